import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasinil.calibration import Calibration
from quasinil.corpus import generate_corpus
from quasinil.equivalence import decide_equivalence
from quasinil.errors import LocalSpectrumHit, NotEquivalent
from quasinil.linalg import eigendecompose
from quasinil.local import (
    LocalAnalysis,
    local_resolvent,
    local_resolvent_derivatives,
    local_spectrum,
    same_local_spectrum,
    transfer_local_resolvent,
)
from quasinil.spectral import resolvent

from conftest import corpus_scenarios, random_complex

D = np.diag([1.0, 2.0])
J = np.array([[1.0, 1.0], [0.0, 1.0]])
E1, E2 = np.eye(2)


def test_local_spectrum_examples():
    np.testing.assert_allclose(local_spectrum(D, E1).points, [1])
    assert local_spectrum(D, [0, 0]).empty
    np.testing.assert_allclose(local_spectrum(D, [1, 1]).points, [1, 2])


def test_local_resolvent_examples():
    np.testing.assert_allclose(local_resolvent(D, E1, 3), 0.5 * E1)
    # 2 is an eigenvalue of T but not in the local spectrum of e1
    np.testing.assert_allclose(local_resolvent(D, E1, 2), E1)
    np.testing.assert_array_equal(local_resolvent(D, [0, 0], 1.0), [0, 0])
    with pytest.raises(LocalSpectrumHit):
        local_resolvent(D, E1, 1.0)


def test_local_resolvent_derivative_examples():
    np.testing.assert_allclose(local_resolvent_derivatives(D, E1, 3, 0), local_resolvent(D, E1, 3))
    np.testing.assert_allclose(local_resolvent_derivatives(D, E1, 3, 1), -0.25 * E1)
    np.testing.assert_array_equal(local_resolvent_derivatives(D, [0, 0], 3, 2), [0, 0])


def sample_off_support(rng, analysis, count, include_spectrum=True, gap=0.5):
    """Random points at least ``gap`` from sigma_T(x), led by the eigenvalues outside it.

    Near a Jordan cluster of size m the local resolvent amplifies perturbations
    like dist^-(2m), so points hugging the support test conditioning, not code.
    """
    dec = analysis.decomposition
    support = analysis.spectrum.points

    def far(lam):
        return all(abs(lam - mu) >= gap for mu in support)

    pts = []
    if include_spectrum:
        pts += [mu for i, mu in enumerate(dec.eigenvalues) if i not in analysis.spectrum.support and far(mu)]
    spread = 1 + max(abs(dec.eigenvalues))
    while len(pts) < count:
        lam = spread * complex(*rng.uniform(-1.5, 1.5, 2))
        if far(lam):
            pts.append(lam)
    return pts[:count]


@given(corpus_scenarios(["shared-semisimple", "random-dense", "invariant-kernel"], dims=(1, 7)))
def test_extension_identity(sc):
    rng = np.random.default_rng(sc.space_dim)
    T = sc.operators["T"]
    n = sc.space_dim
    for name, x in sc.vectors.items():
        analysis = LocalAnalysis(T, x)
        for lam in sample_off_support(rng, analysis, 8):
            y = analysis.value(lam)
            assert np.linalg.norm((lam * np.eye(n) - T) @ y - x) <= 1e-8 * np.linalg.norm(x)


@given(corpus_scenarios(["shared-semisimple", "random-dense"], dims=(1, 6)))
def test_derivative_recurrence(sc):
    rng = np.random.default_rng(0)
    T = sc.operators["T"]
    I = np.eye(sc.space_dim)
    analysis = LocalAnalysis(T, sc.vectors["x"])
    for lam in sample_off_support(rng, analysis, 3):
        prev = analysis.derivative(lam, 0)
        for n in range(1, 5):
            cur = analysis.derivative(lam, n)
            rhs = -n * prev
            assert np.linalg.norm((lam * I - T) @ cur - rhs) <= 1e-7 * max(np.linalg.norm(rhs), 1e-300)
            prev = cur


@given(corpus_scenarios(["random-dense", "shared-semisimple"], dims=(1, 6)))
def test_agrees_with_global_resolvent_off_spectrum(sc):
    T = sc.operators["T"]
    x = sc.vectors["x"]
    lam = 3 * (1 + np.abs(T).sum()) * (0.6 + 0.8j)
    ref = resolvent(T, lam) @ x
    assert np.linalg.norm(local_resolvent(T, x, lam) - ref) <= 1e-8 * np.linalg.norm(ref)


@given(corpus_scenarios(["shared-semisimple", "random-dense", "invariant-kernel", "spectral-gap"], dims=(1, 7)),
       st.floats(1e-300, 1e3))
def test_emptiness_iff_zero(sc, scale):
    T = sc.operators["T"]
    n = sc.space_dim
    assert local_spectrum(T, np.zeros(n)).empty
    for x in sc.vectors.values():
        assert not local_spectrum(T, scale * x).empty


@given(corpus_scenarios(["random-dense", "invariant-kernel", "shared-semisimple"], dims=(1, 7)))
def test_containment_and_generic_vectors(sc):
    T = sc.operators["T"]
    dec = eigendecompose(T)
    for x in sc.vectors.values():
        assert set(local_spectrum(T, x).support) <= set(range(len(dec)))
    # a vector with every projection nonzero sees the whole spectrum
    generic = sum(W[:, 0] for W in dec.bases)
    assert local_spectrum(T, generic).support == list(range(len(dec)))


# -- transfer ---------------------------------------------------------------------------


@pytest.mark.parametrize("method", ["clusters", "brackets"])
def test_transfer_examples(method):
    np.testing.assert_allclose(transfer_local_resolvent(J, np.eye(2), E1, 4, method=method), E1 / 3, atol=1e-14)
    np.testing.assert_allclose(transfer_local_resolvent(J, np.eye(2), E2, 0, method=method), -E2, atol=1e-14)
    rng = np.random.default_rng(1)
    T = random_complex(rng, (3, 3))
    x = random_complex(rng, 3)
    np.testing.assert_allclose(
        transfer_local_resolvent(T, T, x, 5.0 + 1j, method=method), local_resolvent(T, x, 5.0 + 1j), atol=1e-13
    )


def test_transfer_rejects_bad_input():
    with pytest.raises(NotEquivalent):
        transfer_local_resolvent(D, np.diag([2.0, 1.0]), E1, 3)
    with pytest.raises(LocalSpectrumHit):
        transfer_local_resolvent(J, np.eye(2), E1, 1.0)
    with pytest.raises(ValueError):
        transfer_local_resolvent(J, np.eye(2), E1, 4, method="nope")


@given(corpus_scenarios(["shared-semisimple", "nilpotent-pair"], dims=(1, 7)))
def test_transfer_solves_for_s(sc):
    rng = np.random.default_rng(sc.space_dim + 17)
    T, S = sc.operators["T"], sc.operators["S"]
    P = sc.build_calibration()
    verdict = decide_equivalence(T, S, P)
    assert verdict.equivalent
    I = np.eye(sc.space_dim)
    for x in sc.vectors.values():
        analysis = LocalAnalysis(T, x)
        assert same_local_spectrum(analysis.spectrum, local_spectrum(S, x))
        for lam in sample_off_support(rng, analysis, 5):
            x1 = transfer_local_resolvent(T, S, x, lam, verdict=verdict, analysis=analysis)
            assert np.linalg.norm((lam * I - S) @ x1 - x) <= 1e-7 * np.linalg.norm(x)


@given(corpus_scenarios(["shared-semisimple", "nilpotent-pair"], dims=(1, 4)))
def test_transfer_methods_agree_at_small_dims(sc):
    T, S = sc.operators["T"], sc.operators["S"]
    x = sc.vectors["x"]
    lam = 1.5 * (1 + np.abs(T).sum()) * 1j
    a = transfer_local_resolvent(T, S, x, lam, P=sc.build_calibration())
    b = transfer_local_resolvent(T, S, x, lam, P=sc.build_calibration(), method="brackets")
    assert np.linalg.norm(a - b) <= 1e-8 * (1 + np.linalg.norm(a))


def test_literal_sum_loses_accuracy_on_large_jordan_clusters():
    """Why the per-cluster evaluation is the default: the ambient sum cancels heavily."""
    worst = {"clusters": 0.0, "brackets": 0.0}
    rng = np.random.default_rng(5)
    for seed in range(10):
        sc = generate_corpus(seed, 8, "shared-semisimple")
        T, S = sc.operators["T"], sc.operators["S"]
        verdict = decide_equivalence(T, S, Calibration.euclidean(8))
        for x in sc.vectors.values():
            analysis = LocalAnalysis(T, x)
            for lam in sample_off_support(rng, analysis, 3, include_spectrum=False):
                for method in worst:
                    x1 = transfer_local_resolvent(T, S, x, lam, verdict=verdict, analysis=analysis, method=method)
                    res = np.linalg.norm((lam * np.eye(8) - S) @ x1 - x) / np.linalg.norm(x)
                    worst[method] = max(worst[method], res)
    assert worst["clusters"] <= 1e-10
    assert worst["brackets"] > 100 * worst["clusters"]
