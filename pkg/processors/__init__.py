from .hjb import (
    HjbSolution,
    ControlFunction,
    compute_zetas,
    compute_b0,
    solve_interior_coefficients,
    build_solution,
    value_f,
    value_g,
    hjb_residual,
)
from .simulate import (
    PathBatch,
    simulate_path,
    estimate_ruin_prob,
    estimate_value,
    simulate_drift_hitting,
)
from .ruin import (
    SurvivalField,
    RuinCurve,
    pde_coefficients,
    solve_survival_pde,
    ruin_probability,
    u_of_b,
    ruin_curve,
    epsilon0_lower_bound,
    log_epsilon0_lower_bound,
)
from .solvency import (
    PolicyDecision,
    epsilon_of_b,
    solve_b_star,
    decide_policy,
    risk_capital,
)
from .report_exporter import ReportExporter

__all__ = [
    # HJB 닫힌형 해
    "HjbSolution",
    "ControlFunction",
    "compute_zetas",
    "compute_b0",
    "solve_interior_coefficients",
    "build_solution",
    "value_f",
    "value_g",
    "hjb_residual",
    # 몬테카를로
    "PathBatch",
    "simulate_path",
    "estimate_ruin_prob",
    "estimate_value",
    "simulate_drift_hitting",
    # 파산확률 PDE
    "SurvivalField",
    "RuinCurve",
    "pde_coefficients",
    "solve_survival_pde",
    "ruin_probability",
    "u_of_b",
    "ruin_curve",
    "epsilon0_lower_bound",
    "log_epsilon0_lower_bound",
    # 솔벤시 제약
    "PolicyDecision",
    "epsilon_of_b",
    "solve_b_star",
    "decide_policy",
    "risk_capital",
    "ReportExporter",
]
