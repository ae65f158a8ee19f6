import random
from fractions import Fraction

import pytest

from padicfrac import PrimeCtx, Surd, is_square, sqrt_in_qp

PROPERTY_PRIMES = (3, 5, 7, 11, 13)


def random_rational(rng: random.Random, bound: int = 10 ** 6) -> Fraction:
    num = 0
    while num == 0:
        num = rng.randint(-bound, bound)
    return Fraction(num, rng.randint(1, bound))


def random_surd(rng: random.Random, ctx: PrimeCtx, d_max: int = 5000, pq: int = 60) -> Surd:
    while True:
        D = rng.randint(2, d_max)
        if not is_square(D) and sqrt_in_qp(ctx, D):
            break
    Q = 0
    while Q == 0:
        Q = rng.randint(-pq, pq)
    P = rng.randint(-pq, pq)
    branch = rng.choice((1, -1))
    return Surd(P, Q, D, ctx, branch)


def random_inputs(p: int, count: int, seed: int):
    """Alternating random rationals and surds in Q_p, reproducible per seed."""
    rng = random.Random(seed * 1000 + p)
    ctx = PrimeCtx(p)
    out = []
    for i in range(count):
        if i % 2:
            out.append(random_surd(rng, ctx))
        else:
            out.append(Surd.rational(random_rational(rng), ctx))
    return out


@pytest.fixture(scope="session")
def ctx5():
    return PrimeCtx(5)


# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES = {}
# outcomes of the property suites, keyed by test function name
PROPERTY_OUTCOMES = {}


def pytest_collection_modifyitems(items):
    # the acceptance summary reads the property outcomes, so it runs last
    items.sort(key=lambda it: it.fspath.basename == "test_acceptance.py")


def pytest_runtest_logreport(report):
    if "test_properties.py" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        name = report.nodeid.split("::")[-1].split("[")[0]
        PROPERTY_OUTCOMES.setdefault(name, []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
