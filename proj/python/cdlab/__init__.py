"""Exact oracle estimators for the compound decision problem."""

from ._cdlab import (  # noqa: F401
    CapacityError,
    ContractError,
    DomainError,
    Family,
    TwoValuedSpec,
    check_B1,
    check_G2,
    check_two_valued_condition,
    draw_instance,
    esp_log,
    log_density,
    loglik_matrix,
    mc_gap,
    permanent_log,
    permanental_minors_log,
    pi_rule_enum,
    pi_rule_permanent,
    pi_rule_two_valued,
    sample,
    simple_rule,
    simple_rule_two_valued,
    weights,
)

__all__ = [name for name in dir() if not name.startswith("_")]
