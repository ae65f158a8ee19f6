"""Periodicity counts over ranges of D, run in parallel with stable output."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from typing import Dict, List, Optional, Sequence, Tuple

from .engine import PERIODIC, expand, parse_algorithm
from .exact import PrimeCtx, Surd, is_square, sqrt_in_qp, vp_int

JOBS_ENV = "PADICFRAC_JOBS"
DEFAULT_ALGORITHMS = ("murru", "browkin1", "neww", "modified")


@dataclass
class SweepConfig:
    primes: List[int] = field(default_factory=lambda: [3, 5, 7])
    d_min: int = 1
    d_max: int = 1000
    algorithms: List[str] = field(default_factory=lambda: list(DEFAULT_ALGORITHMS))
    max_steps: int = 1000
    # neww gets a longer budget for small primes
    neww_max_steps: int = 5000
    neww_prime_limit: int = 31
    # columns counted only over D prime to p
    coprime_columns: List[str] = field(default_factory=lambda: ["murru", "browkin1"])
    verify: bool = True
    format: str = "csv"
    jobs: int = 1
    seed: int = 0

    def validate(self) -> "SweepConfig":
        for p in self.primes:
            PrimeCtx(p)
        for a in self.algorithms:
            parse_algorithm(a)
        if self.max_steps < 1 or self.neww_max_steps < 1:
            raise ValueError("step caps must be >= 1")
        if self.d_min < 1 or self.d_max < self.d_min:
            raise ValueError("need 1 <= d_min <= d_max")
        if self.format not in ("csv", "json", "text"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")
        return self

    def steps_for(self, alg: str, p: int) -> int:
        if parse_algorithm(alg).name == "neww" and p <= self.neww_prime_limit:
            return self.neww_max_steps
        return self.max_steps

    def items(self) -> List[Tuple[str, str]]:
        """Resolved settings as text, minus ``jobs`` (output must not
        depend on the degree of parallelism)."""
        out = []
        for f in fields(self):
            if f.name == "jobs":
                continue
            v = getattr(self, f.name)
            if isinstance(v, list):
                v = ",".join(str(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            out.append((f.name, str(v)))
        return out


def _parse_value(name: str, raw: str):
    kind = {f.name: f for f in fields(SweepConfig)}[name]
    default = kind.default_factory() if callable(kind.default_factory) else kind.default
    raw = raw.strip()
    if isinstance(default, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, list):
        items = [x.strip() for x in raw.split(",") if x.strip()]
        if default and isinstance(default[0], int):
            return [int(x) for x in items]
        return items
    return raw


def read_config_file(path: str) -> Dict[str, object]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    known = {f.name for f in fields(SweepConfig)}
    out: Dict[str, object] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, raw = (x.strip() for x in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in known:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = _parse_value(key, raw)
    return out


def resolve_config(file_values: Optional[Dict[str, object]] = None,
                   overrides: Optional[Dict[str, object]] = None,
                   environ=os.environ) -> SweepConfig:
    """Defaults, then the config file, then the environment, then flags."""
    cfg = SweepConfig()
    for k, v in (file_values or {}).items():
        setattr(cfg, k, v)
    if environ.get(JOBS_ENV):
        cfg.jobs = int(environ[JOBS_ENV])
    for k, v in (overrides or {}).items():
        if v is not None:
            setattr(cfg, k, v)
    return cfg.validate()


def admissible(p: int, d_min: int, d_max: int) -> List[int]:
    ctx = PrimeCtx(p)
    return [D for D in range(d_min, d_max + 1) if not is_square(D) and sqrt_in_qp(ctx, D)]


_CTX: Dict[int, PrimeCtx] = {}


def _ctx(p: int) -> PrimeCtx:
    if p not in _CTX:
        _CTX[p] = PrimeCtx(p)
    return _CTX[p]


def run_task(task: Tuple[int, int, Tuple[Tuple[str, int], ...], bool]) -> Tuple[str, ...]:
    """Expand ``sqrt(D)`` in Q_p under each ``(algorithm, cap)``; return kinds."""
    p, D, plan, verify = task
    alpha = Surd.sqrt(D, _ctx(p))
    return tuple(expand(alpha, alg, cap, verify=verify).kind for alg, cap in plan)


def _pmap(fn, tasks: Sequence, jobs: int) -> List:
    if jobs <= 1 or len(tasks) < 2:
        return [fn(t) for t in tasks]
    chunk = max(1, len(tasks) // (jobs * 8))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        # map preserves task order, so output does not depend on scheduling
        return list(pool.map(fn, tasks, chunksize=chunk))


@dataclass
class SweepRow:
    p: int
    counts: Dict[str, int]
    total: int

    def as_dict(self) -> Dict[str, int]:
        d = {"p": self.p}
        d.update(self.counts)
        d["total"] = self.total
        return d


def run_sweep(cfg: SweepConfig) -> List[SweepRow]:
    cfg.validate()
    tasks = []
    for p in sorted(set(cfg.primes)):
        plan = tuple((a, cfg.steps_for(a, p)) for a in cfg.algorithms)
        for D in admissible(p, cfg.d_min, cfg.d_max):
            tasks.append((p, D, plan, cfg.verify))
    kinds = _pmap(run_task, tasks, cfg.jobs)

    rows: Dict[int, SweepRow] = {}
    for (p, D, _, _), ks in zip(tasks, kinds):
        row = rows.setdefault(p, SweepRow(p, {a: 0 for a in cfg.algorithms}, 0))
        row.total += 1
        for a, k in zip(cfg.algorithms, ks):
            if a in cfg.coprime_columns and vp_int(D, p) > 0:
                continue
            if k == PERIODIC:
                row.counts[a] += 1
    return [rows.get(p, SweepRow(p, {a: 0 for a in cfg.algorithms}, 0))
            for p in sorted(set(cfg.primes))]
