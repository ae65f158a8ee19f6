"""Exact p-adic continued fractions for rationals and quadratic irrationals."""
from .exact import (
    INF,
    MINUS,
    PLUS,
    PartialQuotient,
    PrimeCtx,
    Surd,
    digits,
    hensel_sqrt,
    is_square,
    normalize,
    round_nearest,
    s,
    s1,
    sbar,
    sqrt_in_qp,
    t,
    t1,
    tbar,
    vp,
    vp_surd,
)
from .engine import (
    FINITE,
    PERIODIC,
    TRUNCATED,
    Algorithm,
    BlockCertificate,
    ExpansionResult,
    block_certificate,
    choose_quotient,
    convergents,
    expand,
    parse_algorithm,
    rblock_expand,
    step_update,
    u_sequence,
    zero_eliminate,
)
from .oracle import (
    AuditReport,
    audit_bounds,
    finiteness_bound,
    rational_digit_oracle,
    reconstruct_rational,
    verify_period,
)

__version__ = "0.1.0"

__all__ = [
    "INF", "MINUS", "PLUS", "PartialQuotient", "PrimeCtx", "Surd", "digits",
    "hensel_sqrt", "is_square", "normalize", "round_nearest", "s", "s1", "sbar",
    "sqrt_in_qp", "t", "t1", "tbar", "vp", "vp_surd",
    "FINITE", "PERIODIC", "TRUNCATED", "Algorithm", "BlockCertificate",
    "ExpansionResult", "block_certificate", "choose_quotient", "convergents",
    "expand", "parse_algorithm", "rblock_expand", "step_update", "u_sequence",
    "zero_eliminate",
    "AuditReport", "audit_bounds", "finiteness_bound", "rational_digit_oracle",
    "reconstruct_rational", "verify_period",
]
