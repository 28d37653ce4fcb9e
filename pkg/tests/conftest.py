import numpy as np
import pytest

from ballot_stuffing import GameInstance, PowerCost


def random_monotone_instance(rng, max_booths=12):
    """Power costs with one exponent and nondecreasing coefficients."""
    J = int(rng.integers(2, max_booths + 1))
    K = int(rng.integers(0, J))
    exp = float(rng.uniform(1.2, 4.0))
    coefs = np.sort(np.exp(rng.uniform(-2.0, 2.0, size=J)))
    G = float(np.exp(rng.uniform(np.log(1e-2), np.log(1e4))))
    return GameInstance([PowerCost(float(c), exp) for c in coefs], G, K)


def random_general_instance(rng, max_booths=8):
    """Power costs with mixed exponents, so marginals generally cross."""
    J = int(rng.integers(2, max_booths + 1))
    K = int(rng.integers(0, J))
    exps = rng.uniform(1.3, 4.0, size=J)
    exps[:2] = [1.5, 3.5]
    coefs = np.exp(rng.uniform(-1.5, 1.5, size=J))
    G = float(np.exp(rng.uniform(np.log(1e-2), np.log(1e3))))
    return GameInstance([PowerCost(float(c), float(e)) for c, e in zip(coefs, exps)], G, K)


@pytest.fixture
def worked():
    return GameInstance([PowerCost(1, 2), PowerCost(1, 2), PowerCost(4, 2)], 3.0, 1)


@pytest.fixture
def four_booth():
    return GameInstance([PowerCost(1, 2)] * 3 + [PowerCost(4, 2)], 57 / 16, 1)


@pytest.fixture(scope="session")
def monotone_suite():
    rng = np.random.default_rng(20240601)
    return [random_monotone_instance(rng) for _ in range(200)]


@pytest.fixture(scope="session")
def general_suite():
    rng = np.random.default_rng(20240602)
    return [random_general_instance(rng) for _ in range(200)]


_CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion(n, title)`` returns a context manager."""
    results = request.config.stash[_CRITERIA]

    class _Line:
        def __init__(self, number, title):
            self.number, self.title, self.detail = number, title, ""

        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            verdict = "PASS" if exc_type is None else "FAIL"
            line = f"criterion {self.number:>2} {verdict}: {self.title}"
            if self.detail:
                line += f" ({self.detail})"
            results[self.number] = line
            print(line)
            return False

    return _Line


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash[_CRITERIA]
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
