"""The complete-quotient state machine and the expansion algorithms.

A complete quotient is tracked as integers ``(P_n, Q_n)`` with
``alpha_n = (P_n + sqrt(D)) / Q_n``.  Every algorithm picks ``b_n`` as a
function of the state and of ``n`` modulo a small phase, so a repeated
``(P_n, Q_n, n mod phase)`` proves eventual periodicity.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

from .exact import (
    INF,
    PartialQuotient,
    PrimeCtx,
    Surd,
    _sign,
    _st_numerators,
    leading,
    normalize,
    s1_parts,
    sbar_parts,
    split_p,
    t1_parts,
    tbar_parts,
    vp,
    vp_int,
    vp_surd,
)

FINITE = "finite"
PERIODIC = "periodic"
TRUNCATED = "truncated"

BASE_ALGORITHMS = ("browkin1", "browkin4", "murru", "new", "neww", "modified")


@dataclass(frozen=True)
class Algorithm:
    """One quotient rule.

    ``keep_zeros`` only matters for the block schemes (``modified``,
    ``rblock``): a t-bar position whose rounding gives 0 either keeps the
    zero (folded later by :func:`zero_eliminate`) or, by default, takes the
    nearest nonzero integer ``sign(P/Q)``.
    """

    name: str
    r: int = 0
    keep_zeros: bool = False

    def __post_init__(self):
        if self.name not in BASE_ALGORITHMS + ("rblock",):
            raise ValueError(f"unknown algorithm {self.name!r}")
        if self.name == "rblock" and self.r < 3:
            raise ValueError("rblock needs r >= 3")
        if self.keep_zeros and not self.block:
            raise ValueError(f"{self.name} never produces zero quotients")

    @property
    def phase(self) -> int:
        """Index modulus that, with the state, fixes the floor function."""
        if self.name == "new":
            return 1
        if self.name == "modified":
            return 3
        if self.name == "rblock":
            return self.r
        return 2

    @property
    def block(self) -> int:
        # block length of the s-bar/t-bar pattern, 0 for the other schemes
        return {"modified": 3, "rblock": self.r}.get(self.name, 0)

    def __str__(self) -> str:
        base = f"rblock{self.r}" if self.name == "rblock" else self.name
        return base + "+zeros" if self.keep_zeros else base


def parse_algorithm(name: Union[str, Algorithm]) -> Algorithm:
    """``"neww"``, ``"modified"``, ``"rblock4"`` / ``"rblock:4"``; a
    ``"+zeros"`` suffix keeps zero quotients in the block schemes."""
    if isinstance(name, Algorithm):
        return name
    text = name.strip().lower()
    keep = text.endswith("+zeros")
    if keep:
        text = text[: -len("+zeros")]
    m = re.fullmatch(r"rblock:?(\d+)", text)
    if m:
        return Algorithm("rblock", int(m.group(1)), keep)
    return Algorithm(text, 0, keep)


class StepDiag(NamedTuple):
    vp_alpha: Union[int, float]
    vp_b: Union[int, float]
    abs_P: int
    abs_Q: int
    vp_B: Union[int, float]


@dataclass
class ExpansionResult:
    kind: str
    quotients: List[PartialQuotient]
    alpha: Surd
    algorithm: Algorithm
    preperiod: Optional[int] = None
    period: Optional[int] = None
    # first (i, j), i < j, with alpha_i == alpha_j regardless of index phase
    value_repeat: Optional[Tuple[int, int]] = None
    # states[n] = (P_n, Q_n) of the normalized input, n = 0 .. len(quotients)
    states: List[Tuple[int, int]] = field(default_factory=list, repr=False)
    diagnostics: List[StepDiag] = field(default_factory=list, repr=False)
    D: int = 0

    @property
    def p(self) -> int:
        return self.alpha.p

    @property
    def steps(self) -> int:
        return len(self.quotients)

    @property
    def preperiod_quotients(self) -> List[PartialQuotient]:
        if self.kind != PERIODIC:
            return list(self.quotients)
        return self.quotients[: self.preperiod]

    @property
    def period_quotients(self) -> List[PartialQuotient]:
        if self.kind != PERIODIC:
            return []
        return self.quotients[self.preperiod:]

    def eliminated(self) -> "ZeroElimination":
        return zero_eliminate(self.quotients)

    def quotient_values(self) -> List[Fraction]:
        return [b.value for b in self.quotients]


class ZeroElimination(NamedTuple):
    quotients: list
    trailing_zero: bool


def zero_eliminate(quotients: Sequence) -> ZeroElimination:
    """Fold interior zeros: ``[.., x, 0, y, ..] -> [.., x + y, ..]``.

    Works left to right and repeats until no interior zero remains.  A zero
    in the last position cannot be folded and is reported by the flag.
    """
    if not quotients:
        return ZeroElimination([], False)
    wrap = isinstance(quotients[0], PartialQuotient)
    p = quotients[0].p if wrap else None
    vals = [q.value if wrap else Fraction(q) for q in quotients]
    i = 1
    while i < len(vals) - 1:
        if vals[i] == 0:
            vals[i - 1: i + 2] = [vals[i - 1] + vals[i + 1]]
            i = max(i - 1, 1)
        else:
            i += 1
    trailing = len(vals) > 1 and vals[-1] == 0
    out = [PartialQuotient.from_fraction(v, p) for v in vals] if wrap else vals
    return ZeroElimination(out, trailing)


def convergents(quotients: Sequence) -> List[Tuple[Fraction, Fraction]]:
    """``(A_n, B_n)`` for ``n = 0 .. len-1`` by the three-term recurrence."""
    A2, A1 = Fraction(0), Fraction(1)
    B2, B1 = Fraction(1), Fraction(0)
    out = []
    for b in quotients:
        b = b.value if isinstance(b, PartialQuotient) else Fraction(b)
        A2, A1 = A1, b * A1 + A2
        B2, B1 = B1, b * B1 + B2
        out.append((A1, B1))
    return out


def choose_parts(alg: Algorithm, n: int, p: int, lead: Optional[Tuple[int, int]],
                 P: int, Q: int) -> Tuple[int, int]:
    """Partial quotient ``num / p**m`` for the state with centre ``P/Q``.

    ``lead`` is the output of :func:`padicfrac.exact.leading` for ``alpha_n``.
    """
    if lead is None:
        m, s_num, t_num = 0, 0, 0
    else:
        m = lead[0]
        s_num, t_num = _st_numerators(p, m, lead[1])
    name = alg.name
    if name == "neww":
        use_s = n % 2 == 0
    elif name == "new":
        use_s = n == 0 or m == 0
    elif name in ("modified", "rblock"):
        use_s = n % alg.phase == 0
    elif name == "murru":
        return (s_num, m) if n % 2 == 0 else (t_num, m)
    elif name == "browkin4":
        if n % 2 == 0:
            return s1_parts(p, m, s_num, P, Q), m
        return t1_parts(p, m, t_num, P, Q), m
    elif name == "browkin1":
        if n % 2 == 0:
            return s_num, m
        # a_0 == 0 exactly when v_p(alpha - t) > 0
        if s_num == t_num:
            return t_num - _sign(t_num) * p ** m, m
        return t_num, m
    else:  # pragma: no cover - guarded by Algorithm
        raise ValueError(name)
    if use_s:
        return sbar_parts(p, m, s_num, P, Q), m
    num = tbar_parts(p, m, t_num, P, Q)
    if num == 0 and alg.block and not alg.keep_zeros:
        # only reachable with t = 0, hence m = 0
        return (1 if P * Q >= 0 else -1), m
    return num, m


def _canonical(num: int, m: int, p: int) -> Tuple[int, int]:
    while m and num % p == 0:
        num //= p
        m -= 1
    return num, m


def choose_quotient(alg: Union[str, Algorithm], alpha: Surd, n: int) -> PartialQuotient:
    """The partial quotient ``alg`` assigns to ``alpha`` at index ``n``."""
    alg = parse_algorithm(alg)
    if alg.name == "browkin4" and alpha.D == 0:
        raise ValueError("browkin4 expands quadratic irrationals only")
    a = normalize(alpha)
    P, Q = int(a.P), int(a.Q)
    lead = leading(a.ctx, P, Q, a.D, a.branch)
    num, m = _canonical(*choose_parts(alg, n, alpha.p, lead, P, Q), alpha.p)
    return PartialQuotient(num, m, alpha.p)


class ExactnessError(ArithmeticError):
    """A division that must be exact was not; indicates a normalization bug."""


def step_update(P: int, Q: int, D: int, num: int, m: int, p: int) -> Tuple[int, int]:
    """Next state after subtracting ``b = num / p**m`` and inverting.

    For ``D != 0``: ``P' = b*Q - P``, ``Q' = (D - P'**2) / Q``.  For ``D == 0``
    the state is the rational ``P/Q`` kept with a positive denominator,
    using the integral update when ``v_p(b) = v_p(alpha)`` and
    ``v_p(alpha - b) >= 0``.
    """
    pm = p ** m
    if D:
        bQ, rem = divmod(num * Q, pm)
        if rem:
            raise ExactnessError(f"b*Q not integral: b={num}/{pm}, Q={Q}")
        P1 = bQ - P
        Q1, rem = divmod(D - P1 * P1, Q)
        if rem:
            raise ExactnessError(f"{Q} does not divide D - P^2 at P={P1}")
        return P1, Q1
    # alpha - b = (P*p^m - num*Q) / (Q*p^m)
    diff = P * pm - num * Q
    if diff == 0:
        raise ZeroDivisionError("alpha_n equals b_n")
    f = vp_int(Q, p)
    e = f - vp_int(P, p) if P else None  # e_n = -v_p(alpha_n)
    if num and e is not None and e >= 0 and m == (e if e > 0 else 0) \
            and (m > 0 or vp_int(num, p) == 0) and vp_int(diff, p) >= f + m:
        pe = p ** e
        qn, rem = divmod(Q, pe)
        X, rem2 = divmod(diff, pm)  # P - b*Q
        Q1, rem3 = divmod(abs(X), pe)
        if rem or rem2 or rem3:
            raise ExactnessError(f"inexact rational update at P={P}, Q={Q}")
        return (qn if X > 0 else -qn), Q1
    num1, den1 = Q * pm, diff
    if den1 < 0:
        num1, den1 = -num1, -den1
    g = math.gcd(num1, den1)
    return num1 // g, den1 // g


def _vp_state(ctx: PrimeCtx, P: int, Q: int, D: int, branch: int):
    if D == 0:
        return vp(Fraction(P, Q), ctx.p)
    return vp_surd(Surd(Fraction(P), Fraction(Q), D, ctx, branch))


def expand(alpha: Surd, alg: Union[str, Algorithm] = "neww", max_steps: int = 1000,
           verify: bool = True) -> ExpansionResult:
    """Expand ``alpha`` until it terminates, repeats, or ``max_steps`` quotients.

    States ``alpha_0 .. alpha_max_steps`` are examined, so a recurrence at
    index ``max_steps`` still counts as periodic.  Periodic results are
    re-checked by :func:`padicfrac.oracle.verify_period` unless ``verify`` is
    false; a failed check raises ``AssertionError``.
    """
    alg = parse_algorithm(alg)
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    if alg.name == "browkin4" and alpha.D == 0:
        raise ValueError("browkin4 expands quadratic irrationals only")
    if alpha.D == 0 and alpha.center == 0:
        raise ValueError("cannot expand zero")
    ctx, p = alpha.ctx, alpha.p
    a = normalize(alpha)
    P, Q, D, branch = int(a.P), int(a.Q), a.D, a.branch
    phase = alg.phase

    quotients: List[PartialQuotient] = []
    states: List[Tuple[int, int]] = []
    diags: List[StepDiag] = []
    seen: Dict[Tuple[int, int, int], int] = {}
    seen_value: Dict[Tuple[int, int], int] = {}
    value_repeat = None
    # convergents scaled by p**E: A_n = At / p**E, B_n = Bt / p**E
    At2, At1, Bt2, Bt1 = 0, 1, 1, 0
    e_prev = 0
    E = 0
    kind = TRUNCATED
    pre = per = None
    n = 0
    while True:
        if value_repeat is None:
            i = seen_value.setdefault((P, Q), n)
            if i != n:
                value_repeat = (i, n)
        key = (P, Q, n % phase)
        if key in seen:
            kind, pre, per = PERIODIC, seen[key], n - seen[key]
            states.append((P, Q))
            break
        seen[key] = n
        states.append((P, Q))
        if n == max_steps:
            break
        lead = leading(ctx, P, Q, D, branch)
        num, m = choose_parts(alg, n, p, lead, P, Q)
        num, m = _canonical(num, m, p)
        b = PartialQuotient(num, m, p)
        quotients.append(b)

        pe = p ** (m + e_prev)
        At2, At1 = At1, num * At1 + At2 * pe
        Bt2, Bt1 = Bt1, num * Bt1 + Bt2 * pe
        E += m
        e_prev = m
        vp_B = vp_int(Bt1, p) - E if Bt1 else INF
        if lead is not None:
            vp_alpha = -lead[0]
        else:
            vp_alpha = _vp_state(ctx, P, Q, D, branch)
            if n > 0 and alg.name == "new":
                raise AssertionError(f"v_p(alpha_{n}) > 0 after a legal step")
        diags.append(StepDiag(vp_alpha, b.valuation, abs(P), abs(Q), vp_B))

        if D == 0 and P * p ** m == num * Q:
            kind = FINITE
            break
        P, Q = step_update(P, Q, D, num, m, p)
        n += 1

    result = ExpansionResult(kind, quotients, alpha, alg, pre, per, value_repeat,
                             states, diags, D)
    if verify and kind == PERIODIC:
        from .oracle import verify_period

        report = verify_period(alpha, alg, result)
        if not report.passed:
            raise AssertionError(f"period check failed: {report.failures()}")
    return result


@dataclass
class BlockCertificate:
    """Record of the block convergence conditions for an r-block expansion."""

    r: int
    blocks_checked: int
    # (block index n, sequence start m, order i) with v_p(U_m^(i)) != 0
    violations: List[Tuple[int, int, int]]
    # (index, reason) where the valuation pattern of the block is broken
    pattern_violations: List[Tuple[int, str]]

    @property
    def holds(self) -> bool:
        return not self.violations and not self.pattern_violations


def u_sequence(quotients: Sequence, m: int, count: int) -> List[Fraction]:
    """``U_m^(0..count-1)``: ``U^(0) = 1``, ``U^(1) = b_m``,
    ``U^(k+1) = b_(m+k) U^(k) + U^(k-1)``."""
    vals = [q.value if isinstance(q, PartialQuotient) else Fraction(q) for q in quotients]
    out = [Fraction(1)]
    if count > 1:
        out.append(vals[m])
    for k in range(1, count - 1):
        out.append(vals[m + k] * out[k] + out[k - 1])
    return out[:count]


def block_certificate(quotients: Sequence, r: int, p: int) -> BlockCertificate:
    """Check the r-block convergence conditions on a quotient sequence.

    For each complete block ``n``: ``v_p(b_(rn+1)) < 0``, ``v_p(b_(rn+i)) = 0``
    for ``i = 2..r``, ``v_p(U_(rn+2)^(i)) = 0`` for ``i = 2..r-1`` and
    ``v_p(U_(rn+3)^(i)) = 0`` for ``i = 2..r-2``.
    """
    if r < 3:
        raise ValueError("r must be >= 3")
    vals = [q.value if isinstance(q, PartialQuotient) else Fraction(q) for q in quotients]
    violations = []
    pattern = []
    n = 0
    while r * n + r < len(vals) and r * n + 3 + (r - 2) <= len(vals):
        base = r * n
        if not vp(vals[base + 1], p) < 0:
            pattern.append((base + 1, "v_p(b) >= 0 at block head"))
        for i in range(2, r + 1):
            if vp(vals[base + i], p) != 0:
                pattern.append((base + i, "v_p(b) != 0 inside block"))
        for m, top in ((base + 2, r - 1), (base + 3, r - 2)):
            if top < 2:
                continue
            U = u_sequence(vals, m, top + 1)
            for i in range(2, top + 1):
                if vp(U[i], p) != 0:
                    violations.append((n, m, i))
        n += 1
    return BlockCertificate(r, n, violations, pattern)


def rblock_expand(alpha: Surd, r: int, max_steps: int = 1000,
                  verify: bool = True) -> Tuple[ExpansionResult, BlockCertificate]:
    """Expand with one s-bar followed by ``r - 1`` t-bar choices per block and
    evaluate the block convergence conditions along the produced quotients."""
    if r < 3:
        raise ValueError("r must be >= 3")
    res = expand(alpha, Algorithm("rblock", r), max_steps, verify=verify)
    qs = list(res.quotients)
    if res.kind == PERIODIC:
        # unroll the cycle so the check also covers blocks that wrap around
        cyc = res.period_quotients
        while len(qs) < res.preperiod + 2 * len(cyc) + r + 3:
            qs.extend(cyc)
    return res, block_certificate(qs, r, alpha.p)
