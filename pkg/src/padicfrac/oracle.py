"""Slow, independent re-implementations used to cross-check the engine.

Nothing here shares code with :mod:`padicfrac.engine` beyond the data
types: digits come from repeated balanced residues, square roots from a
digit-by-digit search, and expansions run on plain Fractions.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .engine import PERIODIC, FINITE, Algorithm, ExpansionResult, parse_algorithm
from .exact import PLUS, PartialQuotient, Surd, normalize_scaled


@dataclass
class Check:
    name: str
    passed: bool
    witness_index: Optional[int] = None
    witness: Any = None


@dataclass
class AuditReport:
    subject: Dict[str, Any]
    checks: List[Check] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, name: str, passed: bool, index: Optional[int] = None, witness: Any = None):
        if not passed and index is None and witness is None:
            raise ValueError(f"failing check {name!r} needs a witness")
        self.checks.append(Check(name, bool(passed), index, witness))

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject": self.subject,
            "passed": self.passed,
            "checks": [
                {k: (str(v) if k == "witness" and v is not None else v)
                 for k, v in asdict(c).items()}
                for c in self.checks
            ],
        }


def _val(x: Fraction, p: int) -> float:
    if x == 0:
        return math.inf
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _digit(x: Fraction, p: int) -> int:
    # residue of a p-adic integer x modulo p, in the digit set
    r = x.numerator * pow(x.denominator, -1, p) % p
    if p != 2 and r > p // 2:
        r -= p
    return r


def rational_digit_oracle(x, p: int, K: int) -> List[int]:
    """Digits ``a_v .. a_K`` of a nonzero rational, ``v = v_p(x)``."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("zero has no digits")
    v = int(_val(x, p))
    y = x / Fraction(p) ** v
    out = []
    for _ in range(v, K + 1):
        d = _digit(y, p)
        out.append(d)
        y = (y - d) / p
    return out


def naive_sqrt(D: int, p: int, K: int, branch: int = PLUS) -> int:
    """Root of D modulo p**K, one digit at a time by exhaustive search."""
    v, u = 0, D
    while u % p == 0:
        u //= p
        v += 1
    half = v // 2
    prec = max(K - half, 1)
    if p == 2:
        if u % 8 != 1:
            raise ValueError("no root")
        # x is a root mod 2**k; its top bit is fixed only one level later
        x, k = 1, 3
        while k < prec + 1:
            for d in (0, 1):
                y = x + d * 2 ** (k - 1)
                if (y * y - u) % 2 ** (k + 1) == 0:
                    x = y
                    break
            k += 1
        x %= 2 ** prec
        if prec >= 2 and (x % 4 == 1) != (branch == PLUS):
            x = -x % 2 ** prec
    else:
        x = next((c for c in range(1, p) if (c * c - u) % p == 0), None)
        if x is None:
            raise ValueError("no root")
        for k in range(1, prec):
            for d in range(p):
                y = x + d * p ** k
                if (y * y - u) % p ** (k + 1) == 0:
                    x = y
                    break
        if (1 <= x % p <= (p - 1) // 2) != (branch == PLUS):
            x = -x % p ** prec
    return p ** half * x % p ** K


class _Num:
    """``(P + sqrt(D)) / Q`` over Fractions with naive digit extraction."""

    def __init__(self, P, Q, D, p, branch):
        self.P, self.Q, self.D, self.p, self.branch = Fraction(P), Fraction(Q), D, p, branch

    def approx(self, K: int) -> Fraction:
        # rational congruent to self modulo p**(K - v_p(Q))
        if not self.D:
            return self.P / self.Q
        return (self.P + naive_sqrt(self.D, self.p, K, self.branch)) / self.Q

    def st(self) -> Tuple[Fraction, Fraction]:
        p = self.p
        if not self.D:
            x = self.P / self.Q
        else:
            x = self.approx(max(int(_val(self.Q, p)), 0) + 1)
        if x == 0 or _val(x, p) > 0:
            return Fraction(0), Fraction(0)
        v = int(_val(x, p))
        ds = rational_digit_oracle(x, p, 0)
        s_val = sum(Fraction(d) * Fraction(p) ** (v + i) for i, d in enumerate(ds))
        t_val = sum(Fraction(d) * Fraction(p) ** (v + i) for i, d in enumerate(ds) if v + i < 0)
        return s_val, t_val


def _closest(center: Fraction, base: Fraction, step: int) -> Fraction:
    # base + k*step nearest to center; a tie goes to the k of larger |k|
    k0 = math.floor((center - base) / step)
    best = None
    for k in (k0, k0 + 1):
        cand = base + k * step
        key = (abs(center - cand), -abs(k))
        if best is None or key < best[0]:
            best = (key, cand)
    return best[1]


def _sgn(x) -> int:
    return (x > 0) - (x < 0)


def oracle_quotient(alg: Algorithm, num: _Num, n: int) -> Fraction:
    p = num.p
    s_val, t_val = num.st()
    center = num.P / num.Q
    sb = lambda: _closest(center, s_val, p)  # noqa: E731
    tb = lambda: _closest(center, t_val, 1)  # noqa: E731
    name = alg.name
    if name == "browkin1":
        if n % 2 == 0:
            return s_val
        a0 = s_val - t_val
        return t_val if a0 != 0 else t_val - _sgn(t_val)
    if name == "browkin4":
        if n % 2 == 0:
            cands = [s_val, s_val - p * _sgn(s_val)]
        else:
            cands = [t_val, t_val - _sgn(t_val)]
        return cands[1] if abs(center - cands[1]) < abs(center - cands[0]) else cands[0]
    if name == "murru":
        return s_val if n % 2 == 0 else t_val
    if name == "neww":
        return sb() if n % 2 == 0 else tb()
    if name == "new":
        if n == 0:
            return sb()
        x = num.approx(max(int(_val(num.Q, p)), 0) + 1)
        return sb() if _val(x, p) >= 0 else tb()
    if name in ("modified", "rblock"):
        r = 3 if name == "modified" else alg.r
        if n % r == 0:
            return sb()
        b = tb()
        if b == 0 and not alg.keep_zeros:
            b = Fraction(1) if center >= 0 else Fraction(-1)
        return b
    raise ValueError(name)


def oracle_expand(alpha: Surd, alg, steps: int):
    """Run ``steps`` quotient choices naively.

    Returns ``(states, quotients, finite)`` where states are Fraction pairs
    ``(P_n, Q_n)`` in the caller's own representation of ``alpha``.
    """
    alg = parse_algorithm(alg)
    p, D = alpha.p, alpha.D
    P, Q = alpha.P, alpha.Q
    if D == 0:
        x = P / Q
        P, Q = Fraction(x.numerator), Fraction(x.denominator)
    states = [(P, Q)]
    quotients = []
    for n in range(steps):
        num = _Num(P, Q, D, p, alpha.branch)
        b = oracle_quotient(alg, num, n)
        quotients.append(b)
        if D == 0:
            x = P / Q
            if x == b:
                return states, quotients, True
            y = 1 / (x - b)
            P, Q = Fraction(y.numerator), Fraction(y.denominator)
        else:
            P = b * Q - P
            Q = (D - P * P) / Q
        states.append((P, Q))
    return states, quotients, False


def reconstruct_rational(quotients: Sequence) -> Fraction:
    """Value of a finite continued fraction ``[b_0, ..., b_N]``."""
    if not quotients:
        raise ValueError("empty continued fraction")
    vals = [q.value if isinstance(q, PartialQuotient) else Fraction(q) for q in quotients]
    x = vals[-1]
    for b in reversed(vals[:-1]):
        if x == 0:
            raise ValueError("malformed continued fraction: division by zero")
        x = b + 1 / x
    return x


def _subject(alpha: Surd, alg, **extra) -> Dict[str, Any]:
    d = {"p": alpha.p, "alpha": str(alpha), "algorithm": str(alg)}
    d.update(extra)
    return d


def verify_period(alpha: Surd, alg, result: ExpansionResult) -> AuditReport:
    """Independently confirm a reported eventual period."""
    if result.kind != PERIODIC:
        raise ValueError("verify_period needs a periodic result")
    alg = parse_algorithm(alg)
    pre, per = result.preperiod, result.period
    phase = alg.phase
    rep = AuditReport(_subject(alpha, alg, preperiod=pre, period=per))
    states, qs, finite = oracle_expand(alpha, alg, pre + 2 * per)
    rep.add("not finite", not finite, len(qs) if finite else None)
    if finite:
        return rep

    rep.add("state repeats", states[pre] == states[pre + per] and per % phase == 0,
            pre, (states[pre], states[pre + per]))
    same = qs[pre:pre + per] == qs[pre + per:pre + 2 * per]
    rep.add("period reproduces quotients", same, None if same else pre + per)
    eng = [b.value for b in result.quotients]
    first = next((i for i, (a, b) in enumerate(zip(eng, qs)) if a != b), None)
    rep.add("engine quotients match", first is None, first,
            None if first is None else (eng[first], qs[first]))

    # engine states are in the normalized representation; map them back
    _, L = normalize_scaled(alpha)
    bad = None
    for i, (P, Q) in enumerate(result.states[: pre + per + 1]):
        mine = (Fraction(P), Fraction(Q)) if alpha.D == 0 else (Fraction(P, L), Fraction(Q, L))
        if mine != states[i]:
            bad = i
            break
    rep.add("engine states match", bad is None, bad,
            None if bad is None else (result.states[bad], states[bad]))

    keys = [(states[i], i % phase) for i in range(pre + per)]
    dup = len(set(keys)) != len(keys)
    witness = None
    if dup:
        first_seen = {}
        for i, k in enumerate(keys):
            if k in first_seen:
                witness = (first_seen[k], i)
                break
            first_seen[k] = i
    rep.add("no earlier recurrence", not dup, witness[1] if witness else None, witness)
    return rep


def _ceil_log(Q: int, base: int) -> int:
    # smallest k with base**k >= Q
    k, acc = 0, 1
    while acc < Q:
        acc *= base
        k += 1
    return k


def finiteness_bound(Q: int) -> int:
    """``2*ceil(log_4 Q) + 2`` steps for a rational with denominator ``Q``."""
    return 2 * _ceil_log(abs(Q), 4) + 2


def audit_bounds(alpha: Surd, alg, result: ExpansionResult) -> AuditReport:
    """Evaluate every size bound that applies to ``(p, alg)`` on ``result``."""
    alg = parse_algorithm(alg)
    p = alpha.p
    rep = AuditReport(_subject(alpha, alg, kind=result.kind))
    states = result.states
    if not result.diagnostics:
        raise ValueError("result carries no diagnostics")

    if alpha.D == 0 and alg.name in ("new", "neww"):
        Q0 = states[0][1]
        bound = finiteness_bound(Q0)
        rep.add("finite", result.kind == FINITE, result.steps, result.kind)
        rep.add("step bound 2*ceil(log4 Q)+2", result.steps <= bound, result.steps,
                (result.steps, bound))
        ln_bound = math.ceil(math.log(Q0)) + 2 if Q0 > 1 else 2
        rep.subject["ln_bound"] = ln_bound
        rep.subject["within_ln_bound"] = result.steps <= ln_bound
        for n in range(len(states) - 2):
            P1, P2 = abs(states[n + 1][0]), abs(states[n + 2][0])
            Q0_, Q2 = abs(states[n][1]), abs(states[n + 2][1])
            if not 2 * P2 < P1:
                rep.add("|P_{n+2}| < |P_{n+1}|/2", False, n, (P1, P2))
                break
            if not 4 * Q2 < Q0_:
                rep.add("|Q_{n+2}| < |Q_n|/4", False, n, (Q0_, Q2))
                break
        else:
            rep.add("contraction", True)

    if alpha.D and alg.name in ("new", "neww") and p in (2, 3):
        D = result.D
        Qs = [abs(q) for _, q in states]
        M = max(Fraction(Qs[0]), Fraction(Qs[1] if len(Qs) > 1 else 0),
                Fraction(p * p, 4) * D + 1)
        bad = next((i for i, q in enumerate(Qs) if q > M), None)
        rep.add("|Q_n| <= max(|Q0|,|Q1|,p^2/4 D+1)", bad is None, bad,
                None if bad is None else (Qs[bad], M))

    if alpha.D and p <= 7 and (alg.name == "modified" or (alg.name == "rblock" and alg.r == 3)):
        D = result.D
        P0, Q0 = states[0]
        if (D - P0 * P0) % Q0 == 0:
            M = max(Fraction(abs(Q0)), Fraction(p * p, 4) * D + 1, Fraction(4 * (p * p + 1), 3))
            cap = Fraction(p * p, 4) * M + 1
            Qs = [abs(q) for _, q in states]
            bad = next((i for i, q in enumerate(Qs) if q > cap), None)
            rep.add("|Q_n| <= p^2/4 M + 1", bad is None, bad,
                    None if bad is None else (Qs[bad], cap))
    return rep
