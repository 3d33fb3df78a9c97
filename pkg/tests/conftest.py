import os

# let worker-count determinism tests use several numba threads even on one core
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import itertools  # noqa: E402

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from chainbreak.ising import IsingModel  # noqa: E402

ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture(scope="session")
def acceptance_report():
    def record(cid: str, ok: bool, detail: str = ""):
        ACCEPTANCE_LINES.append((cid, bool(ok), detail))
        assert ok, f"{cid}: {detail}"

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {cid}  {detail}")


def naive_ground(model: IsingModel, tol: float = 1e-12):
    """Independent enumerator: itertools over all states, energy summed term by term."""
    h = [float(v) for v in model.h]
    terms = list(model.J.items())
    best, states = None, []
    for s in itertools.product((-1, 1), repeat=model.n):
        e = model.beta + sum(hi * si for hi, si in zip(h, s))
        e += sum(v * s[i] * s[j] for (i, j), v in terms)
        if best is None or e < best - tol:
            best, states = e, [s]
        elif abs(e - best) <= tol:
            states.append(s)
            best = min(best, e)
    return best, set(states)


def random_ising(rng: np.random.Generator, n: int, density: float = 1.0, integer: bool = False) -> IsingModel:
    draw = (lambda size=None: rng.integers(-1, 2, size=size).astype(float)) if integer else \
        (lambda size=None: rng.uniform(-1, 1, size=size))
    J = {(i, j): float(draw()) for i in range(n) for j in range(i + 1, n) if rng.random() < density}
    return IsingModel(n, draw(n), J, float(draw()))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
