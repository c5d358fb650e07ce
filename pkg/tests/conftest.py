import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def record_acceptance(line: str):
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_complex(rng, shape, scale=1.0):
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@st.composite
def matrices(draw, n_min=1, n_max=5, bound=2.0, square=True):
    """Complex matrices with entries of modulus at most ``bound * sqrt(2)``."""
    n = draw(st.integers(n_min, n_max))
    m = n if square else draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return bound * (rng.uniform(-1, 1, (n, m)) + 1j * rng.uniform(-1, 1, (n, m)))


@st.composite
def matrix_pairs(draw, n_min=1, n_max=5, bound=2.0, count=2):
    n = draw(st.integers(n_min, n_max))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    return [bound * (rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n))) for _ in range(count)]


@st.composite
def corpus_scenarios(draw, kinds, dims=(2, 6)):
    from quasinil.corpus import generate_corpus

    kind = draw(st.sampled_from(kinds))
    dim = draw(st.integers(*dims))
    seed = draw(st.integers(0, 10**6))
    return generate_corpus(seed, dim, kind)
