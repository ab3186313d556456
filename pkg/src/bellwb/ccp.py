"""A distributed guessing game scored by the scenario coefficients.

Each of the N players is dealt one setting index (the joint settings are
drawn with probability proportional to the coefficient's magnitude) plus an
independent uniform sign bit.  After one round of single-bit messages the
designated answering player must output the product of everyone's sign bit
times the sign of the coefficient at the dealt settings.

The best classical success probability and the success probability of the
protocol that consumes one shared cat state per round both have closed
forms in the total coefficient weight; the quantum-to-classical advantage
in the success biases reproduces the violation factor exactly.  A seeded
Monte Carlo runner simulates either protocol round by round: the classical
one plays the exhaustively optimal deterministic strategy, the quantum one
consumes one shared cat state per round.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import quantum
from .rng import make_rng, resolve_seed
from .scenario import BellScenario, best_classical_strategy

# Coefficients whose magnitude is at or below this are treated as exact
# zeros by the sampler: they carry no weight and have no usable sign.
ZERO_WEIGHT_TOL = 1e-12

_CHUNK = 2**19
_LIMIT_SETTINGS = 2**14


def setting_sum_counts(n_parties: int, n_settings: int) -> np.ndarray:
    """How many joint settings have each total sum, by inclusion-exclusion.

    Entry s counts the vectors in {0..M-1}**N summing to s, for
    s = 0 .. N(M-1).  Exact integer arithmetic throughout; the dtype drops
    to float64 only if a count overflows int64.
    """
    n, m = n_parties, n_settings
    counts = []
    for s in range(n * (m - 1) + 1):
        total = 0
        for j in range(s // m + 1):
            term = math.comb(n, j) * math.comb(s - j * m + n - 1, n - 1)
            total += -term if j % 2 else term
        counts.append(total)
    if max(counts) <= np.iinfo(np.int64).max:
        return np.array(counts, dtype=np.int64)
    return np.array(counts, dtype=float)


@lru_cache(maxsize=64)
def total_weight(scenario: BellScenario) -> float:
    """Sum of coefficient magnitudes over all M**N joint settings.

    The coefficient only depends on the settings' sum, so the sum collapses
    to N(M-1)+1 terms weighted by setting_sum_counts.  This stays cheap for
    setting counts far beyond what the dense tensor allows.  Cached, since
    the large-M limit reuses the same scenarios repeatedly.
    """
    n, m = scenario.n_parties, scenario.n_settings
    counts = setting_sum_counts(n, m)
    s = np.arange(counts.shape[0])
    angle = np.pi * s / m + scenario.offset_steps * np.pi / (2 * m)
    return float(np.abs(np.cos(angle)) @ counts.astype(float))


def classical_success(scenario: BellScenario) -> float:
    """Best success probability with local strategies and one bit each."""
    return 0.5 * (1.0 + scenario.classical_bound / total_weight(scenario))


def quantum_success(scenario: BellScenario, state=None) -> float:
    """Success probability of the shared-entangled-state protocol.

    With no state the shared resource is the cat state, whose inequality
    value is the quantum bound M**N / 2; passing a state replaces that value
    with the state's own (phase-matched frames assumed).
    """
    if state is None:
        value = scenario.quantum_bound
    else:
        value = quantum.quantum_value(scenario, state)
    return 0.5 * (1.0 + value / total_weight(scenario))


def success_ratio(scenario: BellScenario) -> float:
    return quantum_success(scenario) / classical_success(scenario)


def bias_ratio(scenario: BellScenario) -> float:
    """Ratio of success biases 2p-1; equals the scenario violation factor."""
    return ((2.0 * quantum_success(scenario) - 1.0)
            / (2.0 * classical_success(scenario) - 1.0))


def classical_success_limit(n_parties: int) -> float:
    """Large-M limit of classical_success: (1 + (2/pi)**(N-1)) / 2."""
    return 0.5 * (1.0 + (2.0 / np.pi) ** (n_parties - 1))


def quantum_success_limit() -> float:
    """Large-M limit of quantum_success, the same for every N: (1 + pi/4)/2."""
    return 0.5 * (1.0 + np.pi / 4.0)


def success_ratio_limit(n_parties: int) -> float:
    """Large-M success ratio by Richardson extrapolation in 1/M**2.

    Evaluates the ratio at two large setting counts and removes the leading
    1/M**2 deviation.  Independent of the closed-form limit functions above
    and agrees with them to well below 1e-6.
    """
    r1 = success_ratio(BellScenario(n_parties, _LIMIT_SETTINGS // 2))
    r2 = success_ratio(BellScenario(n_parties, _LIMIT_SETTINGS))
    return r2 + (r2 - r1) / 3.0


@dataclass(eq=False)
class ProtocolEstimate:
    """Monte Carlo outcome for one protocol kind."""

    kind: str
    n_trials: int
    successes: int
    probability: float
    stderr: float
    exact: float
    seed: int
    topology: str


def simulate_protocol(scenario: BellScenario, kind: str, n_trials: int,
                      seed: int | None = None, topology: str = "star",
                      chunk: int = _CHUNK) -> ProtocolEstimate:
    """Play the game n_trials times with one protocol and count successes.

    kind "classical" has each player answer from the exhaustively optimal
    deterministic strategy; kind "quantum" draws each round's measurement
    bits from the exact cat-state statistics, where the product of all
    players' bits equals +1 with probability (1 + c)/2 at coefficient c and
    individual bits are unbiased.

    Messages travel either on a star (everyone sends player 0 one bit) or a
    chain (player N-1 starts, each player folds in its bit and passes it
    on); both carry the same information and must agree round by round.
    Draws happen in a fixed order (settings, sign bits, then for the
    quantum protocol the product coin and filler bits) in blocks of
    `chunk`, so one seed always replays the same game.
    """
    if kind not in ("classical", "quantum"):
        raise ValueError(f"unknown protocol kind {kind!r}")
    if topology not in ("star", "chain"):
        raise ValueError(f"unknown topology {topology!r}")
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    n = scenario.n_parties
    c = np.asarray(scenario.coefficients, dtype=float).ravel()
    weights = np.abs(c)
    weights[weights <= ZERO_WEIGHT_TOL] = 0.0
    probs = weights / weights.sum()
    target_sign = np.where(c >= 0.0, 1, -1)
    if kind == "classical":
        _, outcomes = best_classical_strategy(scenario)
        strategy = outcomes.astype(np.int64)
        exact = classical_success(scenario)
    else:
        strategy = None
        exact = quantum_success(scenario)
    used = resolve_seed(seed)
    rng = make_rng(used)
    successes = 0
    done = 0
    while done < n_trials:
        k = min(chunk, n_trials - done)
        dealt = rng.choice(c.shape[0], size=k, p=probs)
        y = 2 * rng.integers(0, 2, size=(k, n)) - 1
        if kind == "classical":
            settings = np.stack(np.unravel_index(
                dealt, (scenario.n_settings,) * n), axis=1)
            f = strategy[np.arange(n)[None, :], settings]
        else:
            coin = rng.random(k)
            product = np.where(coin < 0.5 * (1.0 + c[dealt]), 1, -1)
            f = np.empty((k, n), dtype=np.int64)
            f[:, :-1] = 2 * rng.integers(0, 2, size=(k, n - 1)) - 1
            f[:, -1] = product * f[:, :-1].prod(axis=1)
        if topology == "star":
            inbox = (y[:, 1:] * f[:, 1:]).prod(axis=1)
            answer = y[:, 0] * f[:, 0] * inbox
        else:
            relay = y[:, -1] * f[:, -1]
            for player in range(n - 2, 0, -1):
                relay = y[:, player] * f[:, player] * relay
            answer = y[:, 0] * f[:, 0] * relay
        target = y.prod(axis=1) * target_sign[dealt]
        successes += int((answer == target).sum())
        done += k
    phat = successes / n_trials
    return ProtocolEstimate(
        kind=kind, n_trials=n_trials, successes=successes, probability=phat,
        stderr=float(np.sqrt(max(phat * (1.0 - phat), 0.0) / n_trials)),
        exact=exact, seed=used, topology=topology)
