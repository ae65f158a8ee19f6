"""Exact p-adic primitives: valuations, balanced digits, Hensel square roots
and the floor functions used to pick partial quotients.

Everything here is exact.  Rationals are :class:`fractions.Fraction`; a
quadratic number is carried as a :class:`Surd` ``(P + sqrt(D)) / Q`` whose
``sqrt(D)`` is a fixed branch of the p-adic square root.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from sympy import isprime
from sympy.ntheory import sqrt_mod

INF = math.inf

PLUS = 1
MINUS = -1

Number = Union[int, Fraction]

# Initial Hensel precision; requests above it are served by doubling.
DEFAULT_PRECISION = 32


def vp_int(n: int, p: int) -> int:
    """Valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def split_p(n: int, p: int) -> Tuple[int, int]:
    """Return ``(v, u)`` with ``n = p**v * u`` and ``p`` not dividing ``u``."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v, n


def vp(x: Number, p: int) -> Union[int, float]:
    """p-adic valuation of a rational; ``math.inf`` for zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    return vp_int(x.numerator, p) - vp_int(x.denominator, p)


def balanced(x: int, modulus: int) -> int:
    """Symmetric residue of ``x`` in ``(-modulus/2, modulus/2]``."""
    r = x % modulus
    if 2 * r > modulus:
        r -= modulus
    return r


def round_nearest(x: Number) -> int:
    """Nearest integer, ties rounded away from zero."""
    x = Fraction(x)
    n, d = x.numerator, x.denominator
    k = (2 * abs(n) + d) // (2 * d)
    return k if n >= 0 else -k


def _round_ratio(a: int, b: int) -> int:
    # round_nearest(a / b) without building a Fraction
    if b < 0:
        a, b = -a, -b
    k = (2 * abs(a) + b) // (2 * b)
    return k if a >= 0 else -k


def _sign(x) -> int:
    return (x > 0) - (x < 0)


class PrimeCtx:
    """The ambient field Q_p together with a cache of Hensel-lifted roots.

    Cache entries map ``(D, branch)`` to ``(r, K)`` with ``r*r == D`` mod
    ``p**K``.  Extension is guarded by a lock so a context can be shared
    between threads.
    """

    def __init__(self, p: int):
        if not isinstance(p, int) or p < 2 or not isprime(p):
            raise ValueError(f"p must be a prime, got {p!r}")
        self.p = p
        self.sqrt_cache: Dict[Tuple[int, int], Tuple[int, int]] = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"PrimeCtx(p={self.p})"

    @property
    def branch_modulus(self) -> int:
        """Modulus on which the root branch is decided (4 for p = 2)."""
        return 4 if self.p == 2 else self.p


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def sqrt_in_qp(ctx: PrimeCtx, D: int) -> bool:
    """Whether ``sqrt(D)`` lies in Q_p, for a positive non-square integer D."""
    if D <= 0 or is_square(D):
        raise ValueError(f"D must be a positive non-square integer, got {D}")
    p = ctx.p
    v, u = split_p(D, p)
    if v % 2:
        return False
    if p == 2:
        return u % 8 == 1
    return pow(u, (p - 1) // 2, p) == 1


def _unit_root_seed(p: int, u: int, branch: int) -> int:
    """Root of the unit ``u`` modulo p (mod 8 for p = 2) on the given branch."""
    if p == 2:
        if u % 8 != 1:
            raise ValueError(f"{u} has no square root in Z_2")
        return 1 if branch == PLUS else 7
    roots = sqrt_mod(u % p, p, all_roots=True)
    if not roots:
        raise ValueError(f"{u} is not a square modulo {p}")
    r = min(roots)  # the root in 1..(p-1)/2
    return r if branch == PLUS else p - r


def _lift_unit_root(p: int, u: int, x: int, k: int, K: int) -> int:
    """Lift ``x`` with ``x*x == u`` mod ``p**k`` to precision ``K``."""
    if p == 2:
        # bitwise lift on 2**(K+1); the root is then exact modulo 2**K
        j = max(k, 3)
        x %= 1 << j
        while j < K + 1:
            if (x * x - u) % (1 << (j + 1)):
                x += 1 << (j - 1)
            j += 1
        return x % (1 << K)
    while k < K:
        k = min(2 * k, K)
        mod = p ** k
        x = (x - (x * x - u) * pow(2 * x, -1, mod)) % mod
    return x % p ** K


def _canonical_unit_root(p: int, x: int, K: int, branch: int) -> int:
    # both roots of a unit differ in sign; pick the one matching the branch rule
    mod = p ** K
    if p == 2:
        if K < 2:
            return x % mod
        want = 1 if branch == PLUS else 3
        return x % mod if x % 4 == want else (-x) % mod
    low = 1 <= x % p <= (p - 1) // 2
    if (branch == PLUS) == low:
        return x % mod
    return (-x) % mod


def hensel_sqrt(ctx: PrimeCtx, D: int, branch: int = PLUS, K: int = 1) -> int:
    """Residue ``r`` mod ``p**K`` of the chosen branch of ``sqrt(D)``.

    The branch is fixed on the unit part ``u`` of ``D = p**(2k) * u``: for
    odd p the plus root of ``u`` is the one whose residue lies in
    ``1..(p-1)/2``; for p = 2 it is the root congruent to 1 mod 4.
    """
    p = ctx.p
    entry = ctx.sqrt_cache.get((D, branch))
    if entry is not None and entry[1] >= K and K >= 1:
        return entry[0] % p ** K
    if K < 1:
        raise ValueError("precision K must be >= 1")
    if branch not in (PLUS, MINUS):
        raise ValueError("branch must be +1 or -1")
    if not sqrt_in_qp(ctx, D):
        raise ValueError(f"sqrt({D}) is not in Q_{ctx.p}")
    key = (D, branch)
    with ctx._lock:
        entry = ctx.sqrt_cache.get(key)
        if entry is not None and entry[1] >= K:
            return entry[0] % p ** K
        target = DEFAULT_PRECISION if entry is None else entry[1]
        while target < K:
            target *= 2
        v, u = split_p(D, p)
        half = v // 2
        unit_prec = max(target - half, 1)
        seed = _unit_root_seed(p, u, branch)
        k0 = 3 if p == 2 else 1
        x = _lift_unit_root(p, u, seed, k0, unit_prec)
        x = _canonical_unit_root(p, x, unit_prec, branch)
        r = (p ** half * x) % p ** target
        ctx.sqrt_cache[key] = (r, target)
    return r % p ** K


@dataclass(frozen=True)
class Surd:
    """The number ``(P + sqrt(D)) / Q`` in Q_p; ``D == 0`` encodes ``P/Q``."""

    P: Fraction
    Q: Fraction
    D: int
    ctx: PrimeCtx = field(compare=False, repr=False)
    branch: int = PLUS

    def __post_init__(self):
        object.__setattr__(self, "P", Fraction(self.P))
        object.__setattr__(self, "Q", Fraction(self.Q))
        if self.Q == 0:
            raise ValueError("Q must be nonzero")
        if self.D < 0:
            raise ValueError("D must be >= 0")
        if self.D and not sqrt_in_qp(self.ctx, self.D):
            raise ValueError(f"sqrt({self.D}) is not in Q_{self.ctx.p}")
        if self.branch not in (PLUS, MINUS):
            raise ValueError("branch must be +1 or -1")

    @classmethod
    def rational(cls, x: Number, ctx: PrimeCtx) -> "Surd":
        x = Fraction(x)
        return cls(x, Fraction(1), 0, ctx)

    @classmethod
    def sqrt(cls, D: int, ctx: PrimeCtx, branch: int = PLUS) -> "Surd":
        return cls(Fraction(0), Fraction(1), D, ctx, branch)

    @property
    def p(self) -> int:
        return self.ctx.p

    @property
    def is_rational(self) -> bool:
        return self.D == 0

    @property
    def center(self) -> Fraction:
        """Trace over degree, i.e. ``P/Q``; the rational value when D = 0."""
        return self.P / self.Q

    def __str__(self) -> str:
        if self.D == 0:
            return str(self.center)
        return f"({self.P} + sqrt({self.D}))/{self.Q}"


@dataclass(frozen=True)
class PartialQuotient:
    """An element ``unit / p**exp`` of Z[1/p], kept canonical."""

    unit: int
    exp: int
    p: int

    def __post_init__(self):
        if self.exp < 0:
            raise ValueError("exp must be >= 0")
        if self.exp and (self.unit % self.p == 0):
            raise ValueError("non-canonical partial quotient")

    @classmethod
    def from_fraction(cls, x: Number, p: int) -> "PartialQuotient":
        x = Fraction(x)
        e, rest = split_p(x.denominator, p)
        if rest != 1:
            raise ValueError(f"{x} is not in Z[1/{p}]")
        return cls(x.numerator, e, p)

    @property
    def value(self) -> Fraction:
        return Fraction(self.unit, self.p ** self.exp)

    @property
    def valuation(self) -> Union[int, float]:
        if self.unit == 0:
            return INF
        if self.exp:
            return -self.exp
        return vp_int(self.unit, self.p)

    def __eq__(self, other):
        if isinstance(other, PartialQuotient):
            return (self.unit, self.exp, self.p) == (other.unit, other.exp, other.p)
        if isinstance(other, (int, Fraction)):
            return self.value == other
        return NotImplemented

    def __hash__(self):
        return hash((self.unit, self.exp, self.p))

    def __str__(self) -> str:
        if self.exp == 0:
            return str(self.unit)
        return f"{self.unit}/{self.p ** self.exp}"

    __repr__ = __str__


def _adjust_branch(ctx: PrimeCtx, D: int, branch: int, L: int) -> int:
    """Branch for ``sqrt(L*L*D)`` so that it equals ``L * sqrt(D)``."""
    p = ctx.p
    mod = ctx.branch_modulus
    _, u = split_p(D, p)
    _, lu = split_p(L, p)
    old = _unit_root_seed(p, u, branch) % mod
    plus_new = _unit_root_seed(p, u * lu * lu, PLUS) % mod
    return PLUS if (lu * old) % mod == plus_new else MINUS


def normalize_scaled(alpha: Surd) -> Tuple[Surd, int]:
    """:func:`normalize` plus the integer ``L`` with ``sqrt(D') = L*sqrt(D)``."""
    ctx, p = alpha.ctx, alpha.p
    if alpha.D == 0:
        x = alpha.center
        return Surd(Fraction(x.numerator), Fraction(x.denominator), 0, ctx), 1
    P, Q, D, branch = alpha.P, alpha.Q, alpha.D, alpha.branch
    scale = 1
    L = math.lcm(P.denominator, Q.denominator)
    if L != 1:
        branch = _adjust_branch(ctx, D, branch, L)
        P, Q, D = P * L, Q * L, D * L * L
        scale *= L
    P, Q = int(P), int(Q)
    _, q0 = split_p(Q, p)
    if abs(q0) != 1:
        # Q -> Q*q0 makes the prime-to-p part of Q a square dividing D - P^2
        branch = _adjust_branch(ctx, D, branch, q0)
        P, Q, D = P * q0, Q * q0, D * q0 * q0
        scale *= q0
    return Surd(Fraction(P), Fraction(Q), D, ctx, branch), scale


def normalize(alpha: Surd) -> Surd:
    """Equal surd with integer P, Q and ``q0 | D - P**2`` where ``Q = p**f * q0``.

    Rationals come back as ``numerator / denominator`` with a positive
    denominator.
    """
    return normalize_scaled(alpha)[0]


def leading(ctx: PrimeCtx, P: int, Q: int, D: int, branch: int) -> Optional[Tuple[int, int]]:
    """Return ``(m, c)`` with ``v_p(alpha) = -m <= 0`` and ``c = alpha*p**m``
    mod ``p**(m+1)``, or ``None`` when ``v_p(alpha) > 0``.

    ``P`` and ``Q`` must be integers (normalized); ``alpha = (P+sqrt(D))/Q``.
    Only ``p**(f+1)`` digits of the root are needed, ``f = v_p(Q)``.
    """
    p = ctx.p
    f, q = split_p(Q, p)
    mod = p ** (f + 1)
    if D:
        N = (P + hensel_sqrt(ctx, D, branch, f + 1)) % mod
    else:
        N = P % mod
    if N == 0:
        return None
    w, N = split_p(N, p)
    m = f - w
    mod = p ** (m + 1)
    return m, (N * pow(q, -1, mod)) % mod


def _st_numerators(p: int, m: int, c: int) -> Tuple[int, int]:
    # numerators of s and t over p**m
    mod = p ** (m + 1)
    if p == 2:
        s_num = c
        t_num = c % (mod // 2) if m else 0
    else:
        s_num = balanced(c, mod)
        t_num = balanced(c, mod // p) if m else 0
    return s_num, t_num


def _as_ints(alpha: Surd) -> Tuple[int, int, int, int]:
    if alpha.D == 0:
        x = alpha.center
        return x.numerator, x.denominator, 0, PLUS
    if alpha.P.denominator == 1 and alpha.Q.denominator == 1:
        return int(alpha.P), int(alpha.Q), alpha.D, alpha.branch
    n = normalize(alpha)
    return int(n.P), int(n.Q), n.D, n.branch


def vp_surd(alpha: Surd) -> Union[int, float]:
    """Exact valuation of a surd (``inf`` only for the rational zero)."""
    p = alpha.p
    P, Q, D, branch = _as_ints(alpha)
    if D == 0:
        return vp(Fraction(P, Q), p)
    # v_p(P + sqrt D) <= v_p(P*P - D), which bounds the precision needed
    K = vp_int(P * P - D, p) + 1
    N = (P + hensel_sqrt(alpha.ctx, D, branch, K)) % p ** K
    return vp_int(N, p) - vp_int(Q, p)


def digits(alpha: Surd, start: int, stop: int) -> List[int]:
    """Balanced digits ``a_start .. a_stop`` (inclusive) of ``alpha``."""
    p, ctx = alpha.p, alpha.ctx
    P, Q, D, branch = _as_ints(alpha)
    if D == 0 and P == 0:
        raise ValueError("zero has no leading digit")
    if stop < start:
        return []
    f, q = split_p(Q, p)
    K = f + stop + 1
    if K <= 0:
        return [0] * (stop - start + 1)
    mod = p ** K
    N = P + (hensel_sqrt(ctx, D, branch, K) if D else 0)
    x = N * pow(q, -1, mod) % mod
    out = []
    for i in range(0, K):
        d = x % p if p == 2 else balanced(x, p)
        x = (x - d) // p
        if i - f >= start:
            out.append(d)
    lead = [0] * max(0, min(stop, -f - 1) - start + 1)
    return lead + out


def _st(alpha: Surd) -> Tuple[int, int, int]:
    P, Q, D, branch = _as_ints(alpha)
    lead = leading(alpha.ctx, P, Q, D, branch)
    if lead is None:
        return 0, 0, 0
    m, c = lead
    s_num, t_num = _st_numerators(alpha.p, m, c)
    return m, s_num, t_num


def s(alpha: Surd) -> Fraction:
    """Digits of ``alpha`` through index 0, summed."""
    m, s_num, _ = _st(alpha)
    return Fraction(s_num, alpha.p ** m)


def t(alpha: Surd) -> Fraction:
    """Digits of ``alpha`` through index -1, summed."""
    m, _, t_num = _st(alpha)
    return Fraction(t_num, alpha.p ** m)


def sbar_parts(p: int, m: int, s_num: int, P: int, Q: int) -> int:
    """Numerator over ``p**m`` of ``round((P/Q - s)/p)*p + s``."""
    pm = p ** m
    k = _round_ratio(P * pm - s_num * Q, Q * pm * p)
    return s_num + k * pm * p


def tbar_parts(p: int, m: int, t_num: int, P: int, Q: int) -> int:
    """Numerator over ``p**m`` of ``round(P/Q - t) + t``."""
    pm = p ** m
    k = _round_ratio(P * pm - t_num * Q, Q * pm)
    return t_num + k * pm


def _pq(num: int, m: int, p: int) -> PartialQuotient:
    if m and num % p == 0:
        # only reachable from an exact zero numerator
        return PartialQuotient.from_fraction(Fraction(num, p ** m), p)
    return PartialQuotient(num, m, p)


def _center_ints(alpha: Surd) -> Tuple[int, int]:
    c = alpha.center
    return c.numerator, c.denominator


def sbar(alpha: Surd) -> PartialQuotient:
    """``s(alpha)`` shifted by a multiple of p toward ``P/Q``."""
    m, s_num, _ = _st(alpha)
    P, Q = _center_ints(alpha)
    return _pq(sbar_parts(alpha.p, m, s_num, P, Q), m, alpha.p)


def tbar(alpha: Surd) -> PartialQuotient:
    """``t(alpha)`` shifted by an integer toward ``P/Q``."""
    m, _, t_num = _st(alpha)
    P, Q = _center_ints(alpha)
    return _pq(tbar_parts(alpha.p, m, t_num, P, Q), m, alpha.p)


def s1_parts(p: int, m: int, s_num: int, P: int, Q: int) -> int:
    pm = p ** m
    alt = s_num - p * pm * _sign(s_num)
    # compare |P/Q - s'| via |P*p^m - s'*Q|
    return alt if abs(P * pm - alt * Q) < abs(P * pm - s_num * Q) else s_num


def t1_parts(p: int, m: int, t_num: int, P: int, Q: int) -> int:
    pm = p ** m
    alt = t_num - pm * _sign(t_num)
    return alt if abs(P * pm - alt * Q) < abs(P * pm - t_num * Q) else t_num


def s1(alpha: Surd) -> PartialQuotient:
    """Browkin's ``s1``: ``s`` or ``s - p*sign(s)``, whichever is nearer ``P/Q``."""
    if alpha.D == 0:
        raise ValueError("s1 is defined for quadratic irrationals only")
    m, s_num, _ = _st(alpha)
    P, Q = _center_ints(alpha)
    return _pq(s1_parts(alpha.p, m, s_num, P, Q), m, alpha.p)


def t1(alpha: Surd) -> PartialQuotient:
    """Browkin's ``t1``: ``t`` or ``t - sign(t)``, whichever is nearer ``P/Q``."""
    if alpha.D == 0:
        raise ValueError("t1 is defined for quadratic irrationals only")
    m, _, t_num = _st(alpha)
    P, Q = _center_ints(alpha)
    return _pq(t1_parts(alpha.p, m, t_num, P, Q), m, alpha.p)
