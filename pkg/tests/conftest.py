import numpy as np
import pytest

from fwmcluster import CascadeTopology, FwmCell, Gain
from fwmcluster.symplectic import _trace_labels


def random_topology(rng, max_cells=6, gain_range=(1.0, 3.0)):
    """Random cascade: every later cell is seeded by a uniformly chosen live output."""
    n = int(rng.integers(1, max_cells + 1))
    cells = [FwmCell(Gain(rng.uniform(*gain_range)), "input")]
    for _ in range(1, n):
        live = _trace_labels(cells)
        cells.append(FwmCell(Gain(rng.uniform(*gain_range)), live[int(rng.integers(len(live)))]))
    return CascadeTopology(tuple(cells))


def monte_carlo_nullifiers(w, s, v, n_samples, seed, chunk=200_000):
    """Sample nullifier variances through the annihilation operators.

    Inputs are independent modes with Var X_k = s_k and Var P_k = 1/s_k.
    With a = (X + iP)/2 the outputs are a' = w a, so X' = 2 Re a' and
    P' = 2 Im a'.  Returns (variance, standard error) per nullifier.
    """
    rng = np.random.default_rng(seed)
    n = len(s)
    sum2 = np.zeros(n)
    sum4 = np.zeros(n)
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        x = rng.standard_normal((n, m)) * np.sqrt(s)[:, None]
        p = rng.standard_normal((n, m)) / np.sqrt(s)[:, None]
        a_out = w @ ((x + 1j * p) / 2)
        xo, po = 2 * a_out.real, 2 * a_out.imag
        delta = po - v @ xo
        sum2 += np.sum(delta**2, axis=1)
        sum4 += np.sum(delta**4, axis=1)
        done += m
    mean2 = sum2 / n_samples
    var_of_sq = sum4 / n_samples - mean2**2
    return mean2, np.sqrt(var_of_sq / n_samples)


def random_unitary(rng, n):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))[None, :]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
