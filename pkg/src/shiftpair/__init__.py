"""Fixed points under shifting distance pairs: hypothesis checks and Picard iteration."""
from .conditions import (
    ConditionReport,
    ShiftingPair,
    check_altering,
    check_condition_i,
    check_condition_ii,
    from_altering_pair,
    from_banach,
    from_khan,
)
from .corpus import Instance, instance, list_instances, run_instance
from .metric import SelfMap, apply, check_metric_axioms, hybrid_space, interval_space, verify_closure
from .scalar_fn import ScalarFn, eval_fn, limit_values, parse_expr, scalar_fn
from .solver import cauchy_check, picard, probe_uniqueness
from .verifier import check_contraction, search_counterexample

__version__ = "0.1.0"
