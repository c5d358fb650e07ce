"""Reproducible random scenarios for the property suites.

Every generator draws from ``numpy.random.default_rng`` seeded with
``(seed, dim, kind)``, so a triple always produces the same scenario and
different kinds never share a stream.

Equivalent pairs are built in a block basis ``V``: eigenvalues live on the
lattice ``{-2..2} + i{-1..1}`` (distinct clusters at least 1 apart), and each
nilpotent part is strictly upper triangular *inside one cluster block*. A
nilpotent that couples two different eigenvalues would change the
semisimple part, so it is never generated.
"""

from __future__ import annotations

import zlib
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .errors import UnknownKind, ValidationError
from .scenario import Scenario

KINDS = (
    "shared-semisimple",
    "nilpotent-pair",
    "permuted-diagonal",
    "random-dense",
    "spectral-gap",
    "invariant-kernel",
)

LATTICE = np.array([complex(a, b) for b in (0, -1, 1) for a in (-2, -1, 0, 1, 2)])


def rng_for(seed: int, dim: int, kind: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(dim), zlib.crc32(kind.encode())])


def _unitary(rng, n) -> np.ndarray:
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def well_conditioned_basis(rng, n, skew: float = 0.25) -> np.ndarray:
    """Unitary times a mildly sheared triangular factor (condition number a few units)."""
    shear = np.eye(n, dtype=complex) + skew * np.triu(
        rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n)), 1
    )
    return _unitary(rng, n) @ shear


def _composition(rng, n, parts) -> List[int]:
    cuts = np.sort(rng.choice(np.arange(1, n), size=parts - 1, replace=False)) if parts > 1 else []
    edges = [0, *cuts, n]
    return [int(b - a) for a, b in zip(edges, edges[1:])]


def _cluster_layout(rng, n) -> Tuple[np.ndarray, List[int]]:
    k = int(rng.integers(1, n + 1))
    values = rng.choice(LATTICE, size=k, replace=False)
    return values, _composition(rng, n, k)


def _block_nilpotent(rng, sizes, density: float = 0.7) -> np.ndarray:
    n = sum(sizes)
    N = np.zeros((n, n), dtype=complex)
    start = 0
    for m in sizes:
        block = np.triu(rng.uniform(-1, 1, (m, m)) + 1j * rng.uniform(-1, 1, (m, m)), 1)
        block *= rng.random((m, m)) < density
        N[start:start + m, start:start + m] = block
        start += m
    return N


def _diag_from(values, sizes) -> np.ndarray:
    return np.diag(np.repeat(values, sizes)).astype(complex)


def _conj(V, M):
    return V @ M @ np.linalg.inv(V)


def _vectors(rng, V, sizes, count: int = 3) -> Dict[str, np.ndarray]:
    """Vectors supported on random unions of the cluster subspaces, plus one generic vector."""
    out = {}
    starts = np.cumsum([0, *sizes])
    for j in range(count):
        pick = rng.random(len(sizes)) < 0.5
        if not pick.any():
            pick[rng.integers(len(sizes))] = True
        coeff = np.zeros(V.shape[0], dtype=complex)
        for i in np.flatnonzero(pick):
            m = sizes[i]
            coeff[starts[i]:starts[i] + m] = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        out[f"x{j + 1}"] = V @ coeff
    n = V.shape[0]
    out["x"] = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return out


def _euclid(n) -> List[Tuple[str, np.ndarray]]:
    return [("euclid", np.eye(n, dtype=complex))]


def _shared_semisimple(rng, n):
    values, sizes = _cluster_layout(rng, n)
    V = well_conditioned_basis(rng, n)
    D = _diag_from(values, sizes)
    ops = {name: _conj(V, D + _block_nilpotent(rng, sizes)) for name in ("T", "S", "R")}
    return ops, _vectors(rng, V, sizes)


def _nilpotent_pair(rng, n):
    sizes = _composition(rng, n, int(rng.integers(1, n + 1)))
    V, W = well_conditioned_basis(rng, n), well_conditioned_basis(rng, n)
    ops = {"T": _conj(V, _block_nilpotent(rng, [n])), "S": _conj(W, _block_nilpotent(rng, sizes))}
    return ops, _vectors(rng, V, [n])


def _permuted_diagonal(rng, n):
    if n < 2:
        raise ValidationError("permuted-diagonal needs dim >= 2", "dim")
    values = rng.choice(LATTICE, size=n, replace=False)
    # A random permutation that also exchanges two eigenvalues at maximal
    # distance, so the brackets grow at the full spectral diameter.
    i, j = np.unravel_index(np.argmax(np.abs(values[:, None] - values[None, :])), (n, n))
    perm = rng.permutation(n)
    k = int(np.flatnonzero(perm == j)[0])
    perm[k], perm[i] = perm[i], j
    V = well_conditioned_basis(rng, n)
    ops = {"T": _conj(V, np.diag(values)), "S": _conj(V, np.diag(values[perm]))}
    return ops, _vectors(rng, V, [1] * n)


def _spectral_gap(rng, n):
    """Same block structure, one cluster moved past the spectral diameter.

    The move ``|delta| >= 1 + diam`` keeps the moved eigenvalue at distance at
    least 1 from every cluster and makes ``|delta|`` the dominant eigenvalue
    difference, which is what keeps the pair decidable in double precision.
    """
    values, sizes = _cluster_layout(rng, n)
    diam = float(np.max(np.abs(values[:, None] - values[None, :])))
    delta = rng.uniform(1.0, 1.5) * (1.0 + diam) * np.exp(2j * np.pi * rng.random())
    moved = values.copy()
    moved[rng.integers(len(values))] += delta
    V = well_conditioned_basis(rng, n)
    ops = {
        "T": _conj(V, _diag_from(values, sizes) + _block_nilpotent(rng, sizes)),
        "S": _conj(V, _diag_from(moved, sizes) + _block_nilpotent(rng, sizes)),
    }
    return ops, _vectors(rng, V, sizes)


def _random_dense(rng, n):
    def draw():
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        return A * (rng.uniform(0.5, 4.0) / np.linalg.norm(A, 2))

    return {"T": draw(), "S": draw()}, {"x": rng.standard_normal(n) + 1j * rng.standard_normal(n)}


def _invariant_kernel(rng, n):
    """``T`` block triangular in a basis ``V``; each seminorm kills a union of leading blocks.

    Null spaces ``span(V[:, :k])`` are ``T``-invariant for every block edge
    ``k``; the seminorm with ``k = 0`` or a complementary family keeps the
    calibration separating.
    """
    values, sizes = _cluster_layout(rng, n)
    V = well_conditioned_basis(rng, n)
    U = _diag_from(values, sizes) + np.triu(
        rng.uniform(-1, 1, (n, n)) + 1j * rng.uniform(-1, 1, (n, n)), 1
    )
    T = _conj(V, U)
    Vinv = np.linalg.inv(V)
    edges = np.cumsum([0, *sizes])[:-1]
    count = int(rng.integers(1, len(edges) + 2))
    chosen = sorted(set(int(e) for e in rng.choice(edges, size=count)) | {0})
    calibration = []
    for j, k in enumerate(chosen):
        r = n - k
        G = rng.uniform(0.5, 2.0) * well_conditioned_basis(rng, r)
        calibration.append((f"q{j + 1}", G @ Vinv[k:, :]))
    return {"T": T}, _vectors(rng, V, sizes), calibration


def generate_corpus(seed: int, dim: int, kind: str) -> Scenario:
    """One random scenario of the given kind on ``C^dim``."""
    if kind not in KINDS:
        raise UnknownKind(f"unknown corpus kind {kind!r}; expected one of {', '.join(KINDS)}", "kind")
    if isinstance(dim, bool) or int(dim) != dim or dim < 1:
        raise ValidationError("dim must be a positive integer", "dim")
    dim = int(dim)
    rng = rng_for(seed, dim, kind)
    calibration = _euclid(dim)
    if kind == "shared-semisimple":
        ops, vecs = _shared_semisimple(rng, dim)
    elif kind == "nilpotent-pair":
        ops, vecs = _nilpotent_pair(rng, dim)
    elif kind == "permuted-diagonal":
        ops, vecs = _permuted_diagonal(rng, dim)
    elif kind == "spectral-gap":
        ops, vecs = _spectral_gap(rng, dim)
    elif kind == "random-dense":
        ops, vecs = _random_dense(rng, dim)
    else:
        ops, vecs, calibration = _invariant_kernel(rng, dim)
    return Scenario(dim, calibration, ops, vecs, {})


def corpus(kinds: Sequence[str], seeds: Sequence[int], dims: Sequence[int]):
    """Iterate ``generate_corpus`` over a grid, skipping kinds that reject a dimension."""
    for kind in kinds:
        for dim in dims:
            for seed in seeds:
                try:
                    yield generate_corpus(seed, dim, kind)
                except ValidationError:
                    if kind == "permuted-diagonal" and dim < 2:
                        continue
                    raise
