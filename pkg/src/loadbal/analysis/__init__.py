from .checks import (
    CheckError,
    TailCheck,
    collision_bound_check,
    hoeffding_check,
    psi_identity_check,
    row_norm_check,
    tail_bound,
)
from .metrics import Metrics, above_avg, disc, metrics, y_at_level
from .oracles import (
    OracleBudgetError,
    OracleInstance,
    exhaustive_family,
    na_oracle,
    walk_law_oracle,
)
from .staircase import StaircasePlan, StaircaseReport, plan_for_model, staircase_report

__all__ = [
    "CheckError", "TailCheck", "collision_bound_check", "hoeffding_check", "psi_identity_check",
    "row_norm_check", "tail_bound", "Metrics", "above_avg", "disc", "metrics", "y_at_level",
    "OracleBudgetError", "OracleInstance", "exhaustive_family", "na_oracle", "walk_law_oracle",
    "StaircasePlan", "StaircaseReport", "plan_for_model", "staircase_report",
]
