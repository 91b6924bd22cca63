import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_density(rng, d, rank=None):
    rank = d if rank is None else rank
    g = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(rng, d):
    q, r = np.linalg.qr(rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_kraus(rng, d, k=3):
    """Kraus operators of a random CPTP map (isometry slices)."""
    v = random_unitary(rng, d * k)[:, :d]
    return [v[i * d:(i + 1) * d, :] for i in range(k)]


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(capsys):
    """Record one pass/fail line per acceptance criterion; the lines are echoed at the end of the run."""
    def record(number, title, ok, elapsed, limit, detail=""):
        ok = ok and elapsed < limit
        budget = "no limit" if limit == float("inf") else f"{limit:.0f}s"
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title} ({elapsed:.2f}s / {budget}){detail}"
        ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
