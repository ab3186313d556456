"""Dense complex linear algebra for small multi-qubit operators.

Everything works on plain complex128 numpy arrays sized for at most
MAX_PARTIES qubits (1024 x 1024).  Functions are pure and never mutate
their inputs.  The production eigensolver delegates to LAPACK through
numpy; a cyclic Jacobi solver is kept alongside it as an independent
reference, and the test suite checks one against the other.
"""

from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .errors import BudgetExceededError

MAX_PARTIES = 10
MAX_DIM = 2**MAX_PARTIES

# Tolerances are scaled by max(1, norm) of the operator.
HERMITICITY_TOL = 1e-10
PSD_TOL = 1e-10


def as_matrix(a) -> np.ndarray:
    """Coerce to a square 2-d complex array, enforcing the size cap."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if m.shape[0] > MAX_DIM:
        raise BudgetExceededError(
            f"matrix dimension {m.shape[0]} exceeds the cap of {MAX_DIM}")
    return m


def frobenius(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def kron(a, b) -> np.ndarray:
    """Kronecker product; output dimension is the product of the inputs'."""
    out = np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    if out.ndim == 2 and out.shape[0] > MAX_DIM:
        raise BudgetExceededError(
            f"kron result dimension {out.shape[0]} exceeds the cap of {MAX_DIM}")
    return out


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence, left to right."""
    mats = list(mats)
    if not mats:
        raise ValueError("kron_all needs at least one factor")
    out = np.asarray(mats[0], dtype=complex)
    for m in mats[1:]:
        out = kron(out, m)
    return out


def trace_product(a, b) -> complex:
    """Tr(A B) computed pairwise, without forming the full product."""
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.einsum("jk,kj->", a, b))


def require_hermitian(h, tol: float = HERMITICITY_TOL) -> np.ndarray:
    h = as_matrix(h)
    scale = max(1.0, float(np.abs(h).max(initial=0.0)))
    dev = float(np.abs(h - h.conj().T).max(initial=0.0))
    if dev > tol * scale:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return h


def hermitian_eigenvalues(h) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, ascending.

    Backed by LAPACK; `jacobi_eigenvalues` below is the in-repo reference
    implementation used to cross-check this routine.
    """
    return np.linalg.eigvalsh(require_hermitian(h))


def hermitian_eigensystem(h):
    """(eigenvalues ascending, eigenvector columns) of a Hermitian matrix."""
    w, v = np.linalg.eigh(require_hermitian(h))
    return w, v


def jacobi_eigenvalues(h, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Eigenvalues via cyclic complex Jacobi rotations, ascending.

    Sweeps all (p, q) pairs, zeroing each off-diagonal entry with a phased
    plane rotation, until the off-diagonal Frobenius mass falls below
    tol * ||H||_F.  Slow but independent of LAPACK.
    """
    a = np.array(require_hermitian(h), dtype=complex)
    n = a.shape[0]
    if n == 1:
        return a.real.ravel().copy()
    norm = frobenius(a)
    if norm == 0.0:
        return np.zeros(n)
    for _ in range(max_sweeps):
        off = np.sqrt(max(frobenius(a) ** 2 - float(np.sum(np.abs(np.diag(a)) ** 2)), 0.0))
        if off <= tol * norm:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                # rotating on negligible entries stalls convergence and can
                # divide by a denormal; they are within tolerance anyway
                if mag <= 1e-16 * norm:
                    continue
                phase = apq / mag
                theta = 0.5 * np.arctan2(2.0 * mag, (a[p, p] - a[q, q]).real)
                c = np.cos(theta)
                s = np.sin(theta)
                # W has W[p,p]=W[q,q]=c, W[p,q]=-phase*s, W[q,p]=conj(phase)*s
                col_p = c * a[:, p] + np.conj(phase) * s * a[:, q]
                col_q = -phase * s * a[:, p] + c * a[:, q]
                a[:, p] = col_p
                a[:, q] = col_q
                row_p = c * a[p, :] + phase * s * a[q, :]
                row_q = -np.conj(phase) * s * a[p, :] + c * a[q, :]
                a[p, :] = row_p
                a[q, :] = row_q
    return np.sort(np.diag(a).real)


def min_eigenvalue(h) -> float:
    return float(hermitian_eigenvalues(h)[0])


def is_psd(h, tol: float = PSD_TOL) -> bool:
    """Positive semidefinite up to -tol * max(1, ||H||_F) on the bottom eigenvalue."""
    h = require_hermitian(h)
    return min_eigenvalue(h) >= -tol * max(1.0, frobenius(h))


def _normalize_parties(parties: Iterable[int], n_parties: int) -> tuple[int, ...]:
    listed = [int(p) for p in parties]
    idx = tuple(sorted(set(listed)))
    if len(idx) != len(listed):
        raise ValueError("party indices must be distinct")
    if not idx:
        raise ValueError("party subset must be nonempty")
    if idx[0] < 0 or idx[-1] >= n_parties:
        raise ValueError(f"party indices out of range for {n_parties} parties: {idx}")
    if len(idx) == n_parties:
        raise ValueError("party subset must be proper; transposing every party "
                         "is the global transpose")
    return idx


def partial_transpose(rho, parties: Iterable[int], n_parties: int) -> np.ndarray:
    """Transpose the listed qubits of a 2^n x 2^n operator.

    Party 0 owns the most significant bit of the basis index.  Applying the
    same subset twice returns the original matrix.
    """
    rho = as_matrix(rho)
    dim = 2**n_parties
    if rho.shape[0] != dim:
        raise ValueError(f"matrix of dimension {rho.shape[0]} does not describe "
                         f"{n_parties} qubits")
    idx = _normalize_parties(parties, n_parties)
    t = rho.reshape((2,) * (2 * n_parties))
    for p in idx:
        t = np.swapaxes(t, p, n_parties + p)
    return np.ascontiguousarray(t).reshape(dim, dim)
