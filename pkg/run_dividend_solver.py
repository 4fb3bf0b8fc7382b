#!/usr/bin/env python3
"""
솔벤시 제약 최적 배당 솔버 — CLI 진입점

실행 예시:
    python run_dividend_solver.py policy --mu 2 --lambda 6 --sigma2 50 --c 0.05 --T 500 --epsilon 0.99
    python run_dividend_solver.py value --preset fig1 --out out/fig1.csv
    python run_dividend_solver.py ruin --preset fig3 --method both --paths 20000
    python run_dividend_solver.py bstar --preset fig5
    python run_dividend_solver.py capital --preset fig4

종료 코드: 0 성공, 2 검증 오류, 3 수치 비수렴, 4 달성 불가 제약
"""

import sys
import os
import math
import argparse
from typing import Dict, List, Optional, Sequence

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
import pandas as pd
from loguru import logger
from pydantic import ValidationError

from config.presets import FigurePreset, get_preset
from config.settings import get_settings
from models.errors import ConfigError, SolverError
from models.params import ModelParams, validate
from models.schemas import PdeGrid, RunConfig, SimConfig
from processors.hjb import build_solution, value_f, value_g
from processors.report_exporter import ReportExporter
from processors.ruin import ruin_probability, survival_field
from processors.simulate import estimate_ruin_prob, estimate_value
from processors.solvency import (
    b_star_sweep,
    capital_sweep,
    decide_policy,
    epsilon_sweep,
    risk_capital,
)

DEFAULT_T = 500.0
DEFAULT_EPSILON = 0.1
DEFAULT_X_POINTS = 21


def setup_logger():
    settings = get_settings()
    logger.remove()
    logger.add(
        sys.stderr, level=settings.LOG_LEVEL,
        format="{time:HH:mm:ss} | {level:<8} | {message}",
    )
    log_path = settings.LOG_FILE
    if not os.path.isabs(log_path):
        log_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), log_path)
    os.makedirs(os.path.dirname(log_path), exist_ok=True)
    logger.add(log_path, level="DEBUG", rotation="1 day", retention="30 days")


# ── 인자 파싱 ────────────────────────────────────────────────
def parse_grid(text: str) -> List[float]:
    """'start:stop:step' (양끝 포함) 또는 쉼표 목록 '0.1,0.5'"""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            # 0.1 + 2·0.1 같은 누적오차 제거
            return [float(format(start + i * step, ".12g")) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"invalid grid '{text}' (expected start:stop:step with step > 0)")


def _label(value: float) -> str:
    return format(value, "g")


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)

    model = common.add_argument_group("모형 파라미터")
    model.add_argument("--mu", type=float, help="보험료 안전부가 μ")
    model.add_argument("--lambda", dest="lam", type=float, help="재보험 안전부가 λ (> μ)")
    vol = model.add_mutually_exclusive_group()
    vol.add_argument("--sigma2", type=float, help="변동성 σ² (그림 캡션 표기)")
    vol.add_argument("--sigma", type=float, help="변동성 σ")
    model.add_argument("--c", type=float, help="할인율 c")
    model.add_argument("--T", type=float, help=f"파산확률 지평 (기본 {DEFAULT_T:g})")
    model.add_argument("--epsilon", type=float, help=f"위험수준 ε (기본 {DEFAULT_EPSILON:g})")
    model.add_argument("--b", type=float, help="배당 장벽 (기본: 명령별)")

    grids = common.add_argument_group("격자 / 스윕")
    grids.add_argument("--x-grid", dest="x_grid", help="초기자본 격자 start:stop:step")
    grids.add_argument("--eps-grid", dest="eps_grid", help="위험수준 격자 start:stop:step")
    grids.add_argument("--b-grid", dest="b_grid", help="장벽 격자 start:stop:step")
    grids.add_argument("--sigma2-list", dest="sigma2_list", help="value 스윕 σ² 목록 (예: 50,100)")
    grids.add_argument("--mu-list", dest="mu_list", help="value 스윕 μ 목록 (예: 1,2)")

    sim = common.add_argument_group("몬테카를로")
    sim.add_argument("--dt", type=float, help="시간 스텝 (기본: 자동)")
    sim.add_argument("--paths", type=int, help="경로 수")
    sim.add_argument("--seed", type=int, help="난수 시드")
    sim.add_argument("--scheme", choices=["euler", "bridge"], help="이산화 방식")
    sim.add_argument("--workers", type=int, help="작업 스레드 수")

    pde = common.add_argument_group("PDE")
    pde.add_argument("--ny", type=int, help="공간 노드 수")
    pde.add_argument("--nt", type=int, help="시간 스텝 수 (기본: 자동)")

    out = common.add_argument_group("출력")
    out.add_argument("--method", choices=["pde", "mc", "both"], default="pde")
    out.add_argument("--out", help="출력 파일 (없으면 stdout)")
    out.add_argument("--format", dest="fmt", choices=["csv", "human"],
                     help="출력 형식 (기본: policy=human, 그 외 csv)")
    out.add_argument("--preset", help="그림 재현 프리셋 fig1 ~ fig6")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="run_dividend_solver.py",
        description="솔벤시 제약 최적 배당 솔버",
    )
    common = _common_parser()
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("policy", parents=[common], help="최적 장벽 결정 + 가치함수 리포트")
    sub.add_parser("value", parents=[common], help="가치함수 g(x) 표 (fig1, fig2)")
    sub.add_parser("ruin", parents=[common], help="파산확률 ψ(T, x) 표 (fig3)")
    sub.add_parser("bstar", parents=[common], help="b(ε) / ε(b) 표 (fig5, fig6)")
    sub.add_parser("capital", parents=[common], help="위험기준자본 x(ε) 표 (fig4)")
    return parser


def build_run_config(args: argparse.Namespace) -> RunConfig:
    """플래그 > 프리셋 > 기본값 순으로 RunConfig 구성

    Raises:
        ConfigError: 필수 파라미터 누락, 알 수 없는 프리셋, 잘못된 격자
    """
    preset: Optional[FigurePreset] = None
    if args.preset:
        try:
            preset = get_preset(args.preset)
        except KeyError as e:
            raise ConfigError(str(e.args[0]))

    def pick(flag, field: str, default=None):
        if flag is not None:
            return flag
        if preset is not None and getattr(preset, field) is not None:
            return getattr(preset, field)
        return default

    if args.sigma is not None:
        sigma = args.sigma
    elif args.sigma2 is not None or preset is not None:
        sigma2 = pick(args.sigma2, "sigma2")
        sigma = math.sqrt(sigma2) if sigma2 > 0 else sigma2
    else:
        sigma = None

    values = {
        "mu": pick(args.mu, "mu"),
        "lam": pick(args.lam, "lam"),
        "sigma": sigma,
        "c": pick(args.c, "c"),
        "T": pick(args.T, "T", DEFAULT_T),
        "epsilon": pick(args.epsilon, "epsilon", DEFAULT_EPSILON),
    }
    missing = [k for k, v in values.items() if v is None]
    if missing:
        names = ", ".join("--lambda" if k == "lam" else f"--{k}" for k in missing)
        raise ConfigError(f"missing parameters: {names} (or use --preset)")

    def grid_of(flag, field: str) -> Optional[List[float]]:
        text = pick(flag, field)
        return parse_grid(text) if text is not None else None

    settings = get_settings()
    try:
        params = validate(ModelParams(**values))
        sim = SimConfig(
            dt=args.dt,
            n_paths=args.paths if args.paths is not None else settings.MC_PATHS,
            seed=args.seed if args.seed is not None else settings.MC_SEED,
            scheme=args.scheme or settings.MC_SCHEME,
            workers=args.workers if args.workers is not None else settings.MC_WORKERS,
            block_size=settings.MC_BLOCK_SIZE,
        )
        grid = PdeGrid(ny=args.ny if args.ny is not None else settings.PDE_NY, nt=args.nt)
        return RunConfig(
            command=args.command,
            params=params,
            sim=sim,
            grid=grid,
            method=args.method,
            out=args.out,
            fmt=args.fmt or ("human" if args.command == "policy" else "csv"),
            preset=preset.name if preset else None,
            note=preset.note if preset else "",
            b=pick(args.b, "b"),
            x_grid=grid_of(args.x_grid, "x_grid"),
            eps_grid=grid_of(args.eps_grid, "eps_grid"),
            b_grid=grid_of(args.b_grid, "b_grid"),
            sigma2_list=(parse_grid(args.sigma2_list) if args.sigma2_list
                         else (preset.sigma2_list if preset else None)),
            mu_list=(parse_grid(args.mu_list) if args.mu_list
                     else (preset.mu_list if preset else None)),
        )
    except ValidationError as e:
        raise ConfigError(f"invalid arguments: {e.errors()[0]['msg']}")


# ── 명령 ─────────────────────────────────────────────────────
def _x_grid(run: RunConfig, upper: float) -> np.ndarray:
    if run.x_grid is not None:
        return np.asarray(run.x_grid, dtype=float)
    return np.linspace(0.0, upper, DEFAULT_X_POINTS)


def _require_pde(run: RunConfig) -> None:
    if run.method != "pde":
        raise ConfigError(f"--method {run.method} is not available for '{run.command}' (PDE only)")


def cmd_policy(run: RunConfig) -> Dict[str, str]:
    """최적 장벽 결정과 가치함수 표"""
    exporter = ReportExporter(run)
    decision = decide_policy(run.params, run.grid)
    x = _x_grid(run, decision.chosen_barrier)
    table = pd.DataFrame({
        "x": x,
        "V": np.asarray(decision.value_at(x), dtype=float),
        "f": np.asarray(value_f(decision.optimum, x), dtype=float),
        "ratio": np.asarray(decision.value_ratio(x), dtype=float),
        "A": np.asarray(decision.control_at(x), dtype=float),
    })
    if run.fmt == "human":
        return {"policy": exporter.format_policy(decision, table)}
    extra = {
        "regime": decision.regime.value,
        "b0": decision.b0,
        "barrier": decision.chosen_barrier,
        "constrained": decision.constrained,
        "attained_ruin_prob": decision.attained_ruin_prob,
        "unconstrained_ruin_prob": decision.unconstrained_ruin_prob,
    }
    return {"policy": exporter.render(table, extra)}


def _value_paramsets(run: RunConfig) -> List[tuple]:
    base = run.params
    if run.sigma2_list:
        return [(f"sigma2={_label(s2)}", validate(base.with_updates(sigma=math.sqrt(s2))))
                for s2 in run.sigma2_list]
    if run.mu_list:
        return [(f"mu={_label(mu)}", validate(base.with_updates(mu=float(mu))))
                for mu in run.mu_list]
    return [("", base)]


def cmd_value(run: RunConfig) -> Dict[str, str]:
    """g(x; b) 표. 파라미터 세트마다 열 하나 (b 미지정 시 각 세트의 b₀, 즉 f)"""
    exporter = ReportExporter(run)
    paramsets = _value_paramsets(run)
    solutions = [(label, p, build_solution(p, run.b)) for label, p in paramsets]
    upper = run.b if run.b is not None else max(sol.b for _, _, sol in solutions)
    x = _x_grid(run, upper)

    columns = {"x": x}
    extra = {}
    for label, p, sol in solutions:
        suffix = f"_{label}" if label else ""
        g = np.asarray(value_g(sol, x), dtype=float)
        extra[f"b({label})" if label else "b"] = sol.b
        if run.method in ("pde", "both"):
            columns[f"g{suffix}"] = g
        if run.method in ("mc", "both"):
            estimates = [estimate_value(p, sol.control, sol.b, float(xi), run.sim) for xi in x]
            j = np.array([e[0] for e in estimates])
            columns[f"J{suffix}"] = j
            columns[f"J_stderr{suffix}"] = np.array([e[1] for e in estimates])
            if run.method == "both":
                columns[f"discrepancy{suffix}"] = j - g
    return {"value": exporter.render(pd.DataFrame(columns), extra)}


def cmd_ruin(run: RunConfig) -> Dict[str, str]:
    """ψᵇ(T, x) 표 (b 미지정 시 b₀)"""
    exporter = ReportExporter(run)
    p = run.params
    sol = build_solution(p, run.b)
    x = _x_grid(run, sol.b)

    columns = {"x": x}
    psi_pde = None
    if run.method in ("pde", "both"):
        psi_pde = np.asarray(ruin_probability(p, sol.control, sol.b, p.T, x, run.grid), dtype=float)
        columns["psi_pde" if run.method == "both" else "psi"] = psi_pde
    if run.method in ("mc", "both"):
        estimates = [estimate_ruin_prob(p, sol.control, sol.b, float(xi), run.sim) for xi in x]
        psi_mc = np.array([e[0] for e in estimates])
        columns["psi_mc" if run.method == "both" else "psi"] = psi_mc
        columns["stderr"] = np.array([e[1] for e in estimates])
        if psi_pde is not None:
            columns["discrepancy"] = psi_mc - psi_pde
    extra = {"b": sol.b, "b0": sol.b0, "regime": sol.regime.value}
    return {"ruin": exporter.render(pd.DataFrame(columns), extra)}


def cmd_bstar(run: RunConfig) -> Dict[str, str]:
    """b(ε) 와 ε(b) 표. 격자가 없으면 현재 ε 한 점의 b(ε)"""
    _require_pde(run)
    exporter = ReportExporter(run)
    p = run.params
    b0 = build_solution(p).b0
    extra = {"b0": b0}
    tables = {}
    if run.eps_grid is not None or run.b_grid is None:
        eps_grid = run.eps_grid if run.eps_grid is not None else [p.epsilon]
        tables["b_of_eps"] = exporter.render(b_star_sweep(p, eps_grid, run.grid), extra)
    if run.b_grid is not None:
        tables["eps_of_b"] = exporter.render(epsilon_sweep(p, run.b_grid, run.grid), extra)
    return tables


def cmd_capital(run: RunConfig) -> Dict[str, str]:
    """x(ε) 표와 각 행의 재검증 열 ψᵇ(T, x(ε))

    ε 격자 없이 한 점만 요청하면 Unattainable 이 그대로 전파된다 (종료 코드 4).
    """
    _require_pde(run)
    exporter = ReportExporter(run)
    p = run.params
    b = run.b if run.b is not None else build_solution(p).b0
    if run.eps_grid is None:
        frame = pd.DataFrame({
            "epsilon": [p.epsilon], "x": [risk_capital(p, b, None, run.grid)], "status": ["ok"],
        })
    else:
        frame = capital_sweep(p, b, run.eps_grid, run.grid)

    field = survival_field(p, b, p.T, run.grid)
    xs = frame["x"].to_numpy(dtype=float)
    ok = np.isfinite(xs)
    psi = np.full(len(xs), np.nan)
    psi[ok] = field.ruin(xs[ok])
    frame.insert(2, "psi_at_x", psi)
    return {"capital": exporter.render(frame, {"b": b})}


HANDLERS = {
    "policy": cmd_policy,
    "value": cmd_value,
    "ruin": cmd_ruin,
    "bstar": cmd_bstar,
    "capital": cmd_capital,
}


def run_command(run: RunConfig) -> List[str]:
    tables = HANDLERS[run.command](run)
    return ReportExporter(run).write_tables(tables)


def main(argv: Optional[Sequence[str]] = None) -> int:
    setup_logger()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    logger.info("=" * 60)
    logger.info(f"  배당 솔버: {args.command}")
    logger.info("=" * 60)

    try:
        run = build_run_config(args)
        written = run_command(run)
    except SolverError as e:
        logger.opt(exception=e).debug(f"[CLI] {type(e).__name__}")
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code

    for path in written:
        logger.info(f"저장: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
