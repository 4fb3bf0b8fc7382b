"""
결과 내보내기 — CSV (# 메타데이터) + 사람용 정책 리포트

CSV 규칙: UTF-8, LF 줄바꿈, '#' 메타데이터 줄이 먼저, 실수는 17 유효자리.
타임스탬프를 넣지 않으므로 같은 입력이면 같은 바이트가 나온다.
"""
import os
import sys
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from loguru import logger

from models.schemas import RunConfig

FLOAT_FORMAT = "%.17g"


def fmt_num(value) -> str:
    """17 유효자리 (정수는 그대로)"""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class ReportExporter:
    """계산 결과를 CSV / 텍스트로 내보내기"""

    def __init__(self, run: RunConfig):
        self.run = run

    # ── 메타데이터 ───────────────────────────────────────────
    def metadata(self, extra: Optional[Dict] = None) -> List[str]:
        run, p = self.run, self.run.params
        lines = [f"# command={run.command}"]
        if run.preset:
            lines.append(f"# preset={run.preset}")
        if run.note:
            lines.append(f"# note={run.note}")
        sim = run.sim
        # 파라미터와 시드는 모든 출력에 한 줄로
        lines.append(
            "# params: "
            f"mu={fmt_num(p.mu)} lambda={fmt_num(p.lam)} sigma={fmt_num(p.sigma)} "
            f"sigma2={p.sigma2:.15g} c={fmt_num(p.c)} T={fmt_num(p.T)} epsilon={fmt_num(p.epsilon)} "
            f"seed={sim.seed}"
        )
        lines.append(
            f"# method={run.method} ny={run.grid.ny} "
            f"nt={fmt_num(run.grid.nt) if run.grid.nt else 'auto'}"
        )
        if run.method in ("mc", "both"):
            lines.append(
                f"# mc: paths={sim.n_paths} scheme={sim.scheme} "
                f"dt={fmt_num(sim.dt) if sim.dt else 'auto'}"
            )
        for key, value in (extra or {}).items():
            lines.append(f"# {key}={fmt_num(value)}")
        return lines

    # ── CSV ──────────────────────────────────────────────────
    def to_csv(self, frame: pd.DataFrame, extra: Optional[Dict] = None) -> str:
        body = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        return "\n".join(self.metadata(extra)) + "\n" + body

    def to_text(self, frame: pd.DataFrame, extra: Optional[Dict] = None) -> str:
        """--format human: 같은 메타데이터 + 정렬된 표"""
        body = frame.to_string(index=False, float_format=lambda v: format(v, ".10g"))
        return "\n".join(self.metadata(extra)) + "\n" + body + "\n"

    def render(self, frame: pd.DataFrame, extra: Optional[Dict] = None) -> str:
        if self.run.fmt == "human":
            return self.to_text(frame, extra)
        return self.to_csv(frame, extra)

    def write(self, text: str, path: Optional[str] = None) -> Optional[str]:
        """path 가 없으면 stdout"""
        if path is None:
            sys.stdout.write(text)
            sys.stdout.flush()
            return None
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info(f"[내보내기] {path}")
        return path

    def write_tables(self, tables: Dict[str, str]) -> List[str]:
        """여러 표: --out 이 있으면 <stem>_<이름>.csv, 없으면 빈 줄로 구분해 stdout

        표가 하나면 --out 경로를 그대로 쓴다.
        """
        out = self.run.out
        if out is None or len(tables) == 1:
            self.write("\n".join(tables.values()), out)
            return [out] if out else []
        stem, ext = os.path.splitext(out)
        written = []
        for name, text in tables.items():
            written.append(self.write(text, f"{stem}_{name}{ext or '.csv'}"))
        return written

    # ── 사람용 리포트 ────────────────────────────────────────
    def format_policy(self, decision, table: pd.DataFrame) -> str:
        """정책 리포트 (decision: PolicyDecision)"""
        p = self.run.params
        sol = decision.solution
        lines = []
        lines.append("=" * 72)
        lines.append("  솔벤시 제약 배당정책 리포트")
        if self.run.preset:
            lines.append(f"  프리셋: {self.run.preset}")
        lines.append("=" * 72)

        lines.append("\n[1] 파라미터")
        lines.append(
            f"  mu={fmt_num(p.mu)}  lambda={fmt_num(p.lam)}  sigma2={p.sigma2:.15g}  "
            f"c={fmt_num(p.c)}  T={fmt_num(p.T)}  epsilon={fmt_num(p.epsilon)}"
        )
        lines.append(f"  영역: {decision.regime.value}   δ = {fmt_num(p.delta)}   d = {fmt_num(p.retention_floor)}")

        lines.append("\n[2] 의사결정")
        status = "제약 (b* > b0)" if decision.constrained else "무제약 (b0)"
        lines.append(f"  결정        : {status}")
        lines.append(f"  constrained : {decision.constrained}")
        lines.append(f"  선택 장벽   : {fmt_num(decision.chosen_barrier)}")
        lines.append(f"  b0          : {fmt_num(decision.b0)}")
        lines.append(f"  ψ(T, b0)    : {fmt_num(decision.unconstrained_ruin_prob)}")
        lines.append(f"  ψ(T, 장벽)  : {fmt_num(decision.attained_ruin_prob)}")
        if not np.isnan(sol.m):
            lines.append(f"  m           : {fmt_num(sol.m)}")
            lines.append(f"  z1          : {fmt_num(sol.z1)}")

        lines.append("\n[3] 가치함수")
        lines.append(f"  {'x':>14} {'V(x)':>16} {'f(x)':>16} {'V/f':>10} {'A*(x)':>10}")
        lines.append("  " + "-" * 70)
        for row in table.itertuples(index=False):
            lines.append(
                f"  {row.x:>14.6f} {row.V:>16.8f} {row.f:>16.8f} {row.ratio:>10.6f} {row.A:>10.6f}"
            )
        lines.append("=" * 72)
        return "\n".join(lines) + "\n"
