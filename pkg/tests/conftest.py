import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def random_symmetric(rng, n, scale=1.0):
    A = rng.standard_normal((n, n)) * scale
    return (A + A.T) / 2


def random_positive(rng, n, floor=0.3):
    A = rng.standard_normal((n, n))
    return A @ A.T / n + floor * np.eye(n)


def random_point(rng, n):
    return random_symmetric(rng, n) + 1j * random_positive(rng, n)


def random_symplectic(rng, n, scale=0.5):
    """Product of a translation, a GL block and a rotation; the GL block is a matrix
    exponential so its condition number stays below exp(2 scale |N|)."""
    from scipy.linalg import expm

    from siegel_heat.integration import sample_unitary, unitary_to_symplectic

    S = random_symmetric(rng, n, scale)
    T = np.block([[np.eye(n), S], [np.zeros((n, n)), np.eye(n)]])
    G = expm(scale * rng.standard_normal((n, n)) / n)
    D = np.block([[G.T, np.zeros((n, n))], [np.zeros((n, n)), np.linalg.inv(G)]])
    K = unitary_to_symplectic(sample_unitary(n, rng))
    return T @ D @ K


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = {}


@pytest.fixture
def acceptance(request):
    """report(number, ok, detail) records one criterion; an unreported criterion counts as FAIL."""
    lines = request.config.stash[_ACCEPTANCE]
    seen = []

    def report(number, ok, detail):
        seen.append(number)
        lines[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:2d}: {detail}"
        print(lines[number])
        return ok

    yield report
    number = getattr(request.function, "criterion", None)
    if number is not None and number not in seen:
        lines[number] = f"FAIL  criterion {number:2d}: raised before reporting"


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
