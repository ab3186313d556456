"""Violation analysis: closed-form strength factors and frame optimization.

The strength of a scenario is reported as quantum value over the classical
bound; anything above 1 means no local deterministic model reproduces the
quantum statistics.  For a given state the best measurement frames are
found by coordinate ascent over one rotation per party, working on the
state's spin correlation tensor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import quantum
from .rng import make_rng, resolve_seed
from .scenario import BellScenario

DEFAULT_RESTARTS = 20
_STEP_FLOOR = 1e-6
_VALUE_TIE = 1e-12


def violation_factor(n_parties: int, n_settings: int) -> float:
    """Quantum-to-classical ratio (M sin(pi/2M))**N / (2 cos(pi/2M))."""
    half = np.pi / (2 * n_settings)
    return float((n_settings * np.sin(half)) ** n_parties / (2 * np.cos(half)))


def violation_factor_limit(n_parties: int) -> float:
    """Limit of violation_factor as the setting count grows: (pi/2)**N / 2."""
    return float(0.5 * (np.pi / 2) ** n_parties)


def generalized_ghz_violation_factor(n_parties: int, n_settings: int,
                                     alpha: float) -> float:
    """Best factor reached by cos(a)|0..0> + sin(a)|1..1> with phase-matched
    frames: violation_factor scaled by the coherence weight sin(2a)."""
    return violation_factor(n_parties, n_settings) * float(np.sin(2 * alpha))


def noisy_cat_violation_factor(n_parties: int, n_settings: int,
                               phase: float = 0.0,
                               twirled: bool = True) -> float:
    """Violation factor reached by dur_state.

    The state's only contribution is the cat coherence with weight
    1/(N+1), so with the per-qubit phase twirl applied this is
    violation_factor shrunk by N+1.  Without the twirl the frames cannot
    absorb the cat phase and a further cos(phase) is lost.
    """
    base = violation_factor(n_parties, n_settings) / (n_parties + 1)
    if twirled:
        return base
    return base * float(np.cos(phase))


def noisy_cat_violation_limit(n_parties: int) -> float:
    return violation_factor_limit(n_parties) / (n_parties + 1)


def first_violating_size(n_settings: int, n_limit: int = 16) -> int | None:
    """Smallest party count where dur_state beats the classical bound."""
    for n in range(2, n_limit + 1):
        if noisy_cat_violation_factor(n, n_settings) > 1.0:
            return n
    return None


def ppt_block_bound(n_parties: int, n_settings: int, n_blocks: int) -> float:
    """Value ceiling M**N / 2**p for states PSD under every p-block cut.

    p = 1 is the trivial operator-norm bound, p = N covers states that stay
    positive under transposing any subset of parties.
    """
    if not 1 <= n_blocks <= n_parties:
        raise ValueError(f"n_blocks must be in 1..{n_parties}, got {n_blocks}")
    return n_settings**n_parties / 2.0**n_blocks


def cat_coherence(state) -> float:
    """|2 Re rho[0, -1]|: the gap between the two cat-projector overlaps."""
    rho = quantum.density_matrix(state)
    return float(abs(2.0 * rho[0, -1].real))


def cat_coherence_bound(n_blocks: int) -> float:
    """Ceiling 2**(1-p) on cat_coherence for states PSD under p-block cuts."""
    if n_blocks < 1:
        raise ValueError(f"n_blocks must be positive, got {n_blocks}")
    return 2.0 ** (1 - n_blocks)


def rotation_zyz(a: float, b: float, c: float) -> np.ndarray:
    """Rotation matrix Rz(a) Ry(b) Rz(c)."""
    ca, sa = np.cos(a), np.sin(a)
    cb, sb = np.cos(b), np.sin(b)
    cc, sc = np.cos(c), np.sin(c)
    rza = np.array([[ca, -sa, 0.0], [sa, ca, 0.0], [0.0, 0.0, 1.0]])
    ryb = np.array([[cb, 0.0, sb], [0.0, 1.0, 0.0], [-sb, 0.0, cb]])
    rzc = np.array([[cc, -sc, 0.0], [sc, cc, 0.0], [0.0, 0.0, 1.0]])
    return rza @ ryb @ rzc


def frame_vector(angles3) -> np.ndarray:
    """x row plus i times y row of the rotation given by three Euler angles.

    The identity frame (0, 0, 0) reproduces the equatorial x/y observables
    the coefficient construction is written in.
    """
    r = rotation_zyz(*angles3)
    return r[0] + 1j * r[1]


def _contract_all(t3: np.ndarray, vs) -> complex:
    x = np.asarray(t3, dtype=complex)
    for v in vs:
        x = np.tensordot(x, v, axes=([0], [0]))
    return complex(x)


def _environment(t3: np.ndarray, vs, party: int) -> np.ndarray:
    # contract every frame vector except `party`'s; leaves a 3-vector whose
    # dot with v_party gives the full contraction
    e = np.moveaxis(np.asarray(t3, dtype=complex), party, 0)
    for j in range(len(vs)):
        if j != party:
            e = np.tensordot(e, vs[j], axes=([1], [0]))
    return e


def frame_value(spin_tensor, angles, n_settings: int) -> float:
    """Inequality value for explicit frames: (M/2)**N Re<T, v_1 x ... x v_N>."""
    t3 = np.asarray(spin_tensor)
    n = t3.ndim
    angles = np.asarray(angles, dtype=float).reshape(n, 3)
    vs = [frame_vector(angles[k]) for k in range(n)]
    return float((n_settings / 2.0) ** n * _contract_all(t3, vs).real)


def _ascend(t3, angles, rng, max_sweeps: int = 80):
    n = angles.shape[0]
    vs = [frame_vector(angles[k]) for k in range(n)]
    for _ in range(max_sweeps):
        gained = 0.0
        for flat in rng.permutation(3 * n):
            party, k = divmod(int(flat), 3)
            env = _environment(t3, vs, party)

            def value_at(theta):
                trial = angles[party].copy()
                trial[k] = theta
                return float(np.dot(env, frame_vector(trial)).real)

            cur = float(angles[party, k])
            best = value_at(cur)
            start = best
            step = np.pi / 4
            while step > _STEP_FLOOR:
                up = value_at(cur + step)
                down = value_at(cur - step)
                if up > best + 1e-15 and up >= down:
                    cur, best = cur + step, up
                elif down > best + 1e-15:
                    cur, best = cur - step, down
                else:
                    step *= 0.5
            gained += best - start
            angles[party, k] = cur % (2 * np.pi)
            vs[party] = frame_vector(angles[party])
        if gained < 1e-13:
            break
    return _contract_all(t3, vs).real, angles


@dataclass(eq=False)
class FrameOptimum:
    """Best frames found for one state: value, per-party Euler angles."""

    value: float
    angles: np.ndarray
    restarts: int
    seed: int


@dataclass(eq=False)
class ViolationReport:
    value: float
    classical_bound: float
    factor: float
    violated: bool
    # the search only lower-bounds the true maximum, so a negative verdict
    # is advisory, never a proof
    max_is_heuristic: bool
    method: str
    optimum: FrameOptimum | None


def optimize_frames(scenario: BellScenario, state,
                    restarts: int = DEFAULT_RESTARTS,
                    seed: int | None = None) -> FrameOptimum:
    """Coordinate ascent over 3 Euler angles per party, multistart.

    Restart 0 starts from the identity frames; the rest start from seeded
    uniform angles.  Ties in value are broken toward the lexicographically
    smallest angle tuple so runs with one seed are fully reproducible.
    """
    if restarts < 1:
        raise ValueError("restarts must be positive")
    t3 = quantum.spin_block(quantum.correlation_tensor(state,
                                                       scenario.n_parties))
    n = scenario.n_parties
    scale = (scenario.n_settings / 2.0) ** n
    used = resolve_seed(seed)
    rng = make_rng(used)
    best_val = -np.inf
    best_angles = None
    best_key = None
    for r in range(restarts):
        if r == 0:
            start = np.zeros((n, 3))
        else:
            start = rng.uniform(0.0, 2 * np.pi, size=(n, 3))
        val, angles = _ascend(t3, start, rng)
        key = tuple(np.round(angles.ravel(), 9))
        if val > best_val + _VALUE_TIE or (val > best_val - _VALUE_TIE
                                           and (best_key is None
                                                or key < best_key)):
            best_val, best_angles, best_key = val, angles.copy(), key
    return FrameOptimum(value=float(scale * best_val), angles=best_angles,
                        restarts=restarts, seed=used)


def violates(scenario: BellScenario, state,
             restarts: int = DEFAULT_RESTARTS,
             seed: int | None = None) -> ViolationReport:
    """Best found value against the classical bound for one state.

    Up to the correlation-tensor party cap the value comes from full frame
    optimization; past it, from the corner coherence with an optimal shared
    phase, which is the value of one particular frame family and therefore
    a lower bound on the true optimum.
    """
    if scenario.n_parties <= quantum.MAX_TENSOR_PARTIES:
        opt = optimize_frames(scenario, state, restarts=restarts, seed=seed)
        value, method = opt.value, "frames"
    else:
        opt = None
        value = quantum.best_phase_value(scenario, state)
        method = "corner"
    bound = scenario.classical_bound
    factor = value / bound
    violated = bool(factor > 1.0)
    return ViolationReport(value=value, classical_bound=bound, factor=factor,
                           violated=violated,
                           max_is_heuristic=not violated,
                           method=method, optimum=opt)


def violation_curve(n_parties: int, m_values) -> np.ndarray:
    """violation_factor along a vector of setting counts."""
    return np.array([violation_factor(n_parties, int(m)) for m in m_values])
