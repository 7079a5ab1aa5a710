"""Quantum state of the walker and the hybrid master-equation generator.

The generator mixes a coherent commutator term with a dissipative hopping
term whose jump operators |i><j| carry the Google-matrix rates:

    d(rho)/dt = -i (1-alpha) [H, rho] + alpha * sum_ij G_ij D[|i><j|](rho)

Because the rate columns sum to 1, the full dissipator sum collapses to the
closed form  diag(G @ diag(rho)) - rho, which is what makes integration at
a few hundred nodes cheap: O(n^2) per application plus a sparse commutator
instead of the literal O(n^4) sum over jump operators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .netgraph import DirectedGraph, assert_column_stochastic

HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-9

# Above this size a dense Liouvillian (n^2 x n^2 complex) stops being a
# reasonable thing to materialize.
DENSE_LIOUVILLIAN_CAP = 64

# Sparse commutator products win once the adjacency is reasonably sparse
# and the matrices are big enough to amortize the scipy overhead.
_SPARSE_MIN_N = 64


def hamiltonian_from_graph(g: DirectedGraph) -> np.ndarray:
    """Symmetrized 0/1 hop Hamiltonian: H[i, j] = 1 iff i and j are linked
    in either direction. Hermiticity is mandatory for the coherent term, so
    edge direction is discarded here (the dissipator keeps it)."""
    h = np.zeros((g.n, g.n))
    for u, v in g.edges:
        h[u, v] = 1.0
        h[v, u] = 1.0
    return h


@dataclass(frozen=True)
class LindbladGenerator:
    """Immutable (H, G, alpha) triple exposing the action rho -> d(rho)/dt.

    ``hamiltonian`` is real symmetric with zero diagonal; ``rates`` is the
    column-stochastic Google matrix; ``alpha`` in [0, 1] weighs dissipative
    hopping against coherent evolution (alpha=1 is the classical walk).
    """

    hamiltonian: np.ndarray
    rates: np.ndarray
    alpha: float
    _h_op: object = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        h, g = self.hamiltonian, self.rates
        if h.shape != g.shape or h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("hamiltonian and rates must be square matrices of equal size")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not np.array_equal(h, h.T):
            raise ValueError("hamiltonian must be symmetric")
        if np.any(np.diagonal(h) != 0.0):
            raise ValueError("hamiltonian must have zero diagonal")
        if not np.isin(h, (0.0, 1.0)).all():
            raise ValueError("hamiltonian entries must be 0 or 1")
        assert_column_stochastic(g)
        n = h.shape[0]
        density = np.count_nonzero(h) / max(n * n, 1)
        h_op = scipy.sparse.csr_matrix(h) if (n >= _SPARSE_MIN_N and density < 0.25) else h
        object.__setattr__(self, "_h_op", h_op)

    @property
    def n(self) -> int:
        return self.hamiltonian.shape[0]


def lindblad_apply(gen: LindbladGenerator, rho: np.ndarray) -> np.ndarray:
    """Action of the generator on an arbitrary complex matrix.

    For Hermitian input the output is Hermitian and traceless. The function
    is linear in rho, so it also serves to build the matrix representation
    column by column from (non-Hermitian) basis matrices.
    """
    if rho.shape != (gen.n, gen.n):
        raise ValueError(f"state shape {rho.shape} does not match generator size {gen.n}")
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    if gen.alpha < 1.0:
        h = gen.hamiltonian
        out += -1j * (1.0 - gen.alpha) * (h @ rho - rho @ h)
    if gen.alpha > 0.0:
        p = np.diagonal(rho)
        out += gen.alpha * (np.diag(gen.rates @ p) - rho)
    return out


def apply_split(gen: LindbladGenerator, re: np.ndarray, im: np.ndarray):
    """Generator action on rho = re + i*im as two real matrix products.

    Valid for Hermitian rho (re symmetric, im antisymmetric), which every
    Runge-Kutta stage of a Hermitian initial state satisfies: there
    H @ rho - rho @ H = H*re - (H*re)^T + i (H*im + (H*im)^T) with H real
    symmetric, so one product per component suffices. Roughly 4x faster
    than the complex path since BLAS stays in real arithmetic and the
    adjacency product can run sparse.
    """
    a = gen.alpha
    c = 1.0 - a
    h = gen._h_op
    if c != 0.0:
        hr = h @ re
        hi = h @ im
        dre = c * (hi + hi.T)
        dim = c * (hr.T - hr)
    else:
        dre = np.zeros_like(re)
        dim = np.zeros_like(im)
    if a != 0.0:
        g = gen.rates
        dre += a * (np.diag(g @ np.diagonal(re)) - re)
        dim += a * (np.diag(g @ np.diagonal(im)) - im)
    return dre, dim


@dataclass(frozen=True)
class DenseLiouvillian:
    """Matrix form of the generator on column-major vectorized states."""

    n: int
    matrix: np.ndarray


def dense_liouvillian(gen: LindbladGenerator, cap: int = DENSE_LIOUVILLIAN_CAP) -> DenseLiouvillian:
    """Materialize the n^2 x n^2 generator matrix, column by column.

    Column vec-index a + b*n is the image of the basis matrix |a><b| under
    the generator, using column-major vec so that M @ vec(rho) equals
    vec(lindblad_apply(gen, rho)) for every rho.

    Refuses sizes above ``cap`` (memory grows as n^4).
    """
    n = gen.n
    if n > cap:
        raise ValueError(
            f"dense Liouvillian needs n^4 = {n ** 4:,} complex entries for n={n}; "
            f"cap is {cap}. Raise cap explicitly if you really want this."
        )
    m = np.zeros((n * n, n * n), dtype=complex)
    basis = np.zeros((n, n), dtype=complex)
    for b in range(n):
        for a in range(n):
            basis[a, b] = 1.0
            m[:, a + b * n] = lindblad_apply(gen, basis).reshape(-1, order="F")
            basis[a, b] = 0.0
    return DenseLiouvillian(n=n, matrix=m)


def random_density_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    """Random full-rank density matrix (Ginibre construction)."""
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def hermiticity_defect(rho: np.ndarray) -> float:
    return float(np.abs(rho - rho.conj().T).max())


def check_density_matrix(
    rho: np.ndarray,
    herm_tol: float = HERMITICITY_TOL,
    trace_tol: float = TRACE_TOL,
    psd_tol: float = PSD_TOL,
):
    """Validate the Hermitian / unit-trace / positive-semidefinite invariants."""
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if hermiticity_defect(rho) > herm_tol:
        raise ValueError("density matrix is not Hermitian within tolerance")
    if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
        raise ValueError("density matrix trace is not 1 within tolerance")
    if np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min() < -psd_tol:
        raise ValueError("density matrix has a negative eigenvalue beyond tolerance")


def density_to_csv(rho: np.ndarray, dest):
    """Debug dump: real part rows, blank line, imaginary part rows."""
    from pathlib import Path

    from .netgraph import matrix_to_csv

    if isinstance(dest, (str, Path)):
        with open(dest, "w", encoding="utf-8") as fh:
            density_to_csv(rho, fh)
            return
    matrix_to_csv(np.real(rho), dest)
    dest.write("\n")
    matrix_to_csv(np.imag(rho), dest)
