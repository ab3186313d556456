"""Quantum side: states, the correlation operator, and positivity cuts.

States live in the 2**N dimensional qubit register with party 0 on the most
significant bit, matching the tensor convention in `scenario`.  Both state
vectors (1-d, unit norm) and density matrices (2-d, unit trace, PSD) are
accepted wherever a "state" argument appears.
"""

from __future__ import annotations

from itertools import combinations

import numpy as np

from . import linalg
from .errors import BudgetExceededError
from .scenario import BellScenario

# Pauli basis, index order: identity, x, y, z.
PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

# correlation_tensor holds 4**N entries and contracts a 4**N density matrix.
MAX_TENSOR_PARTIES = 6

DENSITY_TOL = 1e-10


def _infer_parties(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 2 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    if n > linalg.MAX_PARTIES:
        raise BudgetExceededError(
            f"{n} parties exceeds the cap of {linalg.MAX_PARTIES}")
    return n


def density_matrix(state) -> np.ndarray:
    """Promote a state vector to a density matrix; pass matrices through."""
    arr = np.asarray(state, dtype=complex)
    if arr.ndim == 1:
        _infer_parties(arr.shape[0])
        norm = np.linalg.norm(arr)
        if abs(norm - 1.0) > 1e-8:
            raise ValueError(f"state vector norm is {norm:.6f}, expected 1")
        return np.outer(arr, arr.conj())
    rho = linalg.as_matrix(arr)
    _infer_parties(rho.shape[0])
    return rho


def validate_density(rho, tol: float = DENSITY_TOL) -> np.ndarray:
    """Check Hermiticity, unit trace, and positivity; return the matrix."""
    rho = linalg.require_hermitian(rho, tol)
    _infer_parties(rho.shape[0])
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > 1e-8:
        raise ValueError(f"trace is {tr:.6f}, expected 1")
    low = linalg.min_eigenvalue(rho)
    if low < -tol * max(1.0, linalg.frobenius(rho)):
        raise ValueError(f"matrix has a negative eigenvalue ({low:.3e})")
    return rho


def ghz_state(n_parties: int, sign: int = 1) -> np.ndarray:
    """(|0...0> + sign |1...1>) / sqrt(2), sign in {+1, -1}."""
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    dim = 2**n_parties
    if n_parties < 1 or n_parties > linalg.MAX_PARTIES:
        raise ValueError(f"n_parties must be in 1..{linalg.MAX_PARTIES}")
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0 / np.sqrt(2.0)
    psi[dim - 1] = sign / np.sqrt(2.0)
    return psi


def phased_ghz_state(n_parties: int, phase: float) -> np.ndarray:
    """(|0...0> + e^{i*phase} |1...1>) / sqrt(2)."""
    dim = 2**n_parties
    if n_parties < 1 or n_parties > linalg.MAX_PARTIES:
        raise ValueError(f"n_parties must be in 1..{linalg.MAX_PARTIES}")
    psi = np.zeros(dim, dtype=complex)
    psi[0] = 1.0 / np.sqrt(2.0)
    psi[dim - 1] = np.exp(1j * phase) / np.sqrt(2.0)
    return psi


def generalized_ghz_state(n_parties: int, alpha: float) -> np.ndarray:
    """cos(alpha) |0...0> + sin(alpha) |1...1>."""
    dim = 2**n_parties
    if n_parties < 1 or n_parties > linalg.MAX_PARTIES:
        raise ValueError(f"n_parties must be in 1..{linalg.MAX_PARTIES}")
    psi = np.zeros(dim, dtype=complex)
    psi[0] = np.cos(alpha)
    psi[dim - 1] = np.sin(alpha)
    return psi


def dur_state(n_parties: int, phase: float = 0.0) -> np.ndarray:
    """Mixed N-qubit state built from a phased cat state plus flip noise.

    Equal-weight mixture, normalized by N+1: one phased cat projector and,
    for every party k, half of the projector onto the basis state with only
    qubit k set plus half of its bitwise complement.  For N >= 4 it stays
    positive under transposing any single party yet still violates the
    correlation inequality for large enough M.
    """
    if n_parties < 3:
        raise ValueError("dur_state needs at least 3 parties")
    dim = 2**n_parties
    if n_parties > linalg.MAX_PARTIES:
        raise BudgetExceededError(
            f"{n_parties} parties exceeds the cap of {linalg.MAX_PARTIES}")
    psi = phased_ghz_state(n_parties, phase)
    rho = np.outer(psi, psi.conj())
    for k in range(n_parties):
        one_up = 1 << (n_parties - 1 - k)
        rho[one_up, one_up] += 0.5
        rho[dim - 1 - one_up, dim - 1 - one_up] += 0.5
    return rho / (n_parties + 1)


def measurement_operator(angle: float) -> np.ndarray:
    """Equatorial qubit observable cos(angle) X + sin(angle) Y."""
    return np.cos(angle) * PAULI[1] + np.sin(angle) * PAULI[2]


def bell_operator_sum(scenario: BellScenario) -> np.ndarray:
    """Coefficient-weighted sum of all M**N products of equatorial observables.

    Built by contracting the coefficient tensor against the stack of the M
    single-party operators, one party at a time.
    """
    n, m = scenario.n_parties, scenario.n_settings
    if n > linalg.MAX_PARTIES:
        raise BudgetExceededError(
            f"{n} parties exceeds the cap of {linalg.MAX_PARTIES}")
    ops = np.stack([measurement_operator(a) for a in scenario.angles])
    x = np.asarray(scenario.coefficients, dtype=complex)
    for _ in range(n):
        # consume one setting axis, append that party's (row, col) axes
        x = np.tensordot(x, ops, axes=([0], [0]))
    rows = tuple(range(0, 2 * n, 2))
    cols = tuple(range(1, 2 * n, 2))
    return x.transpose(rows + cols).reshape(2**n, 2**n)


def bell_operator_closed(scenario: BellScenario) -> np.ndarray:
    """The same operator assembled directly: M**N / 2 times the sum of the
    two extreme off-corner matrix units."""
    n = scenario.n_parties
    if n > linalg.MAX_PARTIES:
        raise BudgetExceededError(
            f"{n} parties exceeds the cap of {linalg.MAX_PARTIES}")
    dim = 2**n
    peak = scenario.n_settings**n / 2.0
    op = np.zeros((dim, dim), dtype=complex)
    op[0, dim - 1] = peak
    op[dim - 1, 0] = peak
    return op


def quantum_value(scenario: BellScenario, state, use_sum: bool = False) -> float:
    """Expectation of the correlation operator in the given state.

    Default route: the operator is M**N / 2 times the difference of the
    projectors onto the two cat states (|0...0> +- |1...1>) / sqrt(2), so
    two quadratic forms suffice at any register size.  use_sum=True instead
    contracts the full M**N-term operator; it is exponentially slower in M
    and exists as an independent cross-check.
    """
    rho = density_matrix(state)
    n = _infer_parties(rho.shape[0])
    if n != scenario.n_parties:
        raise ValueError(f"state has {n} parties, scenario has "
                         f"{scenario.n_parties}")
    if use_sum:
        op = bell_operator_sum(scenario)
        return float(linalg.trace_product(op, rho).real)
    peak = scenario.n_settings**n / 2.0
    plus = ghz_state(n, 1)
    minus = ghz_state(n, -1)
    q_plus = (plus.conj() @ rho @ plus).real
    q_minus = (minus.conj() @ rho @ minus).real
    return float(peak * (q_plus - q_minus))


def distribute_phase(state, alpha: float) -> np.ndarray:
    """Apply diag(1, e^{i*alpha/N}) on every qubit.

    Shifts the |0...0><1...1| coherence by exactly e^{i*alpha} while leaving
    all populations alone.
    """
    rho = density_matrix(state)
    n = _infer_parties(rho.shape[0])
    counts = np.array([bin(j).count("1") for j in range(rho.shape[0])])
    d = np.exp(1j * alpha * counts / n)
    return rho * np.outer(d.conj(), d)


def twirled_quantum_value(scenario: BellScenario, state, alpha: float) -> float:
    """quantum_value after the phase twirl diag(1, e^{i*alpha/N}) per qubit."""
    return quantum_value(scenario, distribute_phase(state, alpha))


def best_phase_value(scenario: BellScenario, state) -> float:
    """Max of quantum_value over a shared corner-phase adjustment."""
    rho = density_matrix(state)
    n = _infer_parties(rho.shape[0])
    if n != scenario.n_parties:
        raise ValueError(f"state has {n} parties, scenario has "
                         f"{scenario.n_parties}")
    return float(scenario.n_settings**n * abs(rho[0, -1]))


def correlation_tensor(state, n_parties: int | None = None) -> np.ndarray:
    """Full Pauli expectation tensor, shape (4,)*N, axis order I, X, Y, Z.

    Entry [mu_1, ..., mu_N] is the expectation of the product of the chosen
    Pauli operators, one per party.  The identity slot makes marginals and
    the all-identity entry (always 1) available in the same array.
    """
    rho = density_matrix(state)
    n = _infer_parties(rho.shape[0])
    if n_parties is not None and n_parties != n:
        raise ValueError(f"state has {n} parties, expected {n_parties}")
    if n > MAX_TENSOR_PARTIES:
        raise BudgetExceededError(
            f"correlation tensor is capped at {MAX_TENSOR_PARTIES} parties, "
            f"got {n}")
    t = rho.reshape((2,) * (2 * n))
    letters = "abcdefghijkl"
    outs = "mnopqr"
    rho_sub = letters[:2 * n]
    terms = [rho_sub]
    for k in range(n):
        # PAULI[mu, col_k, row_k]; trace pairs rho's row with the op's column
        terms.append(outs[k] + rho_sub[n + k] + rho_sub[k])
    expr = ",".join(terms) + "->" + outs[:n]
    out = np.einsum(expr, t, *([PAULI] * n), optimize=True)
    return out.real if np.abs(out.imag).max(initial=0.0) < 1e-9 else out


def spin_block(tensor: np.ndarray) -> np.ndarray:
    """Drop the identity slot on every axis of a correlation tensor."""
    t = np.asarray(tensor)
    return t[(slice(1, 4),) * t.ndim]


def ghz_overlap_via_tensor(state, sign: int = 1) -> float:
    """Overlap with the cat-state projector, computed in the Pauli basis.

    2**-N times the flat dot product of the two expectation tensors; agrees
    with the direct quadratic form and exercises correlation_tensor end to
    end, which is the point.
    """
    rho = density_matrix(state)
    n = _infer_parties(rho.shape[0])
    t_state = np.asarray(correlation_tensor(rho)).real.ravel()
    t_cat = np.asarray(correlation_tensor(ghz_state(n, sign))).real.ravel()
    return float(np.dot(t_cat, t_state) / 2**n)


def block_bipartitions(blocks):
    """Proper bipartitions of a party partition, as tuples of party indices.

    Each cut is represented by the union of the blocks on block 0's side.
    """
    blocks = [tuple(b) for b in blocks]
    if not blocks:
        raise ValueError("need at least one block")
    seen = [p for b in blocks for p in b]
    if len(seen) != len(set(seen)):
        raise ValueError("blocks must not overlap")
    rest = range(1, len(blocks))
    for size in range(0, len(blocks) - 1):
        for extra in combinations(rest, size):
            parties = blocks[0] + tuple(p for i in extra for p in blocks[i])
            yield tuple(sorted(parties))


def transposition_cuts(rho, n_parties: int, blocks=None):
    """Min eigenvalue of the state after transposing each bipartition.

    With blocks=None every party is its own block, so every bipartition of
    the parties is checked.  Returns a list of (parties, min_eigenvalue)
    with parties naming the transposed side (the one containing party 0).
    """
    rho = density_matrix(rho)
    n = _infer_parties(rho.shape[0])
    if n != n_parties:
        raise ValueError(f"state has {n} parties, expected {n_parties}")
    if blocks is None:
        blocks = [(k,) for k in range(n_parties)]
    out = []
    for parties in block_bipartitions(blocks):
        pt = linalg.partial_transpose(rho, parties, n_parties)
        out.append((parties, linalg.min_eigenvalue(pt)))
    return out


def is_ppt_for_blocks(rho, n_parties: int, blocks=None,
                      tol: float = linalg.PSD_TOL) -> bool:
    """True when the state stays PSD under transposing every block cut."""
    scale = max(1.0, linalg.frobenius(density_matrix(rho)))
    cuts = transposition_cuts(rho, n_parties, blocks)
    return all(low >= -tol * scale for _, low in cuts)
