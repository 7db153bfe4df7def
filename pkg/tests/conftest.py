import numpy as np
import pytest

from selective_lasso.datagen import standardize


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_problem(rng, n=40, p=4, rho=0.3, beta=None, noise=1.0):
    """Standardized correlated design plus a linear response."""
    cov = np.full((p, p), rho) + (1 - rho) * np.eye(p)
    x = rng.standard_normal((n, p)) @ np.linalg.cholesky(cov).T
    x, _, _ = standardize(x)
    beta = np.linspace(1.0, 0.0, p) if beta is None else np.asarray(beta, float)
    y = x @ beta + noise * rng.standard_normal(n)
    return x, y


def orthonormal_design(rng, n, p):
    """Centered columns with x_j^T x_k = delta_jk."""
    z = rng.standard_normal((n, p))
    z -= z.mean(axis=0)
    q, _ = np.linalg.qr(z)
    return q


# one verdict line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = {}


def record_criterion(number, passed, detail):
    ACCEPTANCE_LINES[number] = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
