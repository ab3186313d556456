"""Correlation-inequality scenarios: N observers, M two-outcome settings each.

A scenario fixes one real coefficient per joint choice of settings.  The
coefficient for settings (m_1, ..., m_N) is cos(phi_{m_1} + ... + phi_{m_N})
where the per-setting angles phi_m are equally spaced over half a turn with
a small offset that depends on the parities of N and M.  The tensor of
coefficients is what both the classical and the quantum analysis consume.

Conventions: parties are numbered 0..N-1 and party 0 owns the leading axis
of every tensor (and the most significant bit of any packed basis index).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np

from .errors import BudgetExceededError

# Hard ceilings.  The brute-force strategy search walks 2**(M*(N-1)) sign
# assignments; the coefficient tensor holds M**N floats.
MAX_STRATEGY_BITS = 26
MAX_TENSOR_SIZE = 2**24

# Above this many vectorized sign bits the strategy search switches from one
# flat tensor contraction to looping over one party's assignments at a time.
_DIRECT_BITS = 20
_CHUNK_ROWS = 2**19


@dataclass(frozen=True)
class BellScenario:
    """Immutable (n_parties, n_settings) pair with derived quantities."""

    n_parties: int
    n_settings: int

    def __post_init__(self):
        if self.n_parties < 2:
            raise ValueError(f"need at least 2 parties, got {self.n_parties}")
        if self.n_settings < 2:
            raise ValueError(f"need at least 2 settings, got {self.n_settings}")

    @property
    def offset_steps(self) -> int:
        """Offset numerator for the angle grid: 2 when M is even and N odd, else 1."""
        return ((self.n_settings + 1) % 2) * (self.n_parties % 2) + 1

    @property
    def angles(self) -> np.ndarray:
        """Per-setting angles, shape (M,): pi*m/M plus offset_steps*pi/(2*M*N)."""
        n, m = self.n_parties, self.n_settings
        base = np.arange(m) * (np.pi / m)
        return base + self.offset_steps * np.pi / (2 * m * n)

    @cached_property
    def coefficients(self) -> np.ndarray:
        """Coefficient tensor, shape (M,)*N; entry = cos of the angle sum."""
        n, m = self.n_parties, self.n_settings
        if m**n > MAX_TENSOR_SIZE:
            raise BudgetExceededError(
                f"coefficient tensor would hold {m}**{n} entries, cap is "
                f"{MAX_TENSOR_SIZE}")
        total = reduce(np.add.outer, [self.angles] * n)
        c = np.cos(total)
        c.flags.writeable = False
        return c

    @property
    def classical_bound(self) -> float:
        """Largest value reachable with deterministic local strategies.

        Closed form cos(pi/(2M)) / sin(pi/(2M))**N; the brute-force search
        below reproduces it exactly on every in-budget scenario.
        """
        half = np.pi / (2 * self.n_settings)
        return float(np.cos(half) / np.sin(half) ** self.n_parties)

    @property
    def quantum_bound(self) -> float:
        """Largest value reachable in quantum theory: M**N / 2."""
        return self.n_settings**self.n_parties / 2.0

    @property
    def violation_factor(self) -> float:
        """quantum_bound / classical_bound."""
        return self.quantum_bound / self.classical_bound


def _sign_table(m: int) -> np.ndarray:
    """(2**m, m) table; row a column s is -1 if bit s of a is set, else +1.

    Bit 0 is setting 0.  Row 0 is the all-plus strategy.
    """
    a = np.arange(1 << m)[:, None]
    s = np.arange(m)[None, :]
    return 1.0 - 2.0 * ((a >> s) & 1)


def _best_over_strategies(x: np.ndarray, v: np.ndarray) -> tuple[float, tuple[int, ...]]:
    # x: (M,) + (M,)*k, coefficients contracted against all previously fixed
    # parties; k parties still free.  Party 0 stays free: for any fixed signs
    # of the others its optimal choice contributes sum_m |row m|.  Returns the
    # best value and the packed-sign row indices of the k free parties, in
    # party order (entry j-1 belongs to party j).
    k = x.ndim - 1
    if k == 0:
        return float(np.abs(x).sum()), ()
    m = x.shape[1]
    if k == 1:
        best = -np.inf
        arg = 0
        for lo in range(0, 1 << m, _CHUNK_ROWS):
            scores = np.abs(x @ v[lo:lo + _CHUNK_ROWS].T).sum(axis=0)
            i = int(scores.argmax())
            if scores[i] > best:
                best, arg = float(scores[i]), lo + i
        return best, (arg,)
    if m * k <= _DIRECT_BITS:
        # The cascade appends one assignment axis per contracted party, so
        # the result is indexed [setting of party 0, a_1, ..., a_k].
        y = x
        for _ in range(k):
            y = np.tensordot(y, v, axes=([1], [1]))
        scores = np.abs(y).sum(axis=0)
        flat = int(scores.argmax())
        return float(scores.flat[flat]), tuple(
            int(i) for i in np.unravel_index(flat, scores.shape))
    best = -np.inf
    args: tuple[int, ...] = ()
    for a in range(1 << m):
        y = np.tensordot(x, v[a], axes=([x.ndim - 1], [0]))
        value, sub = _best_over_strategies(y, v)
        if value > best:
            best, args = value, sub + (a,)
    return best, args


def _check_strategy_budget(scenario: BellScenario) -> None:
    bits = scenario.n_settings * (scenario.n_parties - 1)
    if bits > MAX_STRATEGY_BITS:
        raise BudgetExceededError(
            f"strategy search needs 2**{bits} sign assignments, cap is "
            f"2**{MAX_STRATEGY_BITS}")


def best_classical_strategy(scenario: BellScenario) -> tuple[float, np.ndarray]:
    """Exhaustive optimum over deterministic local strategies, with a witness.

    Enumerates every +-1 assignment of parties 1..N-1 (party 0 is optimized
    analytically per joint setting), so the cost is 2**(M*(N-1)) and the
    call refuses scenarios where that exponent passes MAX_STRATEGY_BITS.

    Returns (value, outcomes) where outcomes is an (N, M) array of +-1:
    row n holds the answer party n gives for each of its M settings.
    """
    _check_strategy_budget(scenario)
    coeff = np.asarray(scenario.coefficients, float)
    v = _sign_table(scenario.n_settings)
    value, args = _best_over_strategies(coeff, v)
    outcomes = np.empty((scenario.n_parties, scenario.n_settings))
    y = coeff
    for a in reversed(args):
        y = np.tensordot(y, v[a], axes=([y.ndim - 1], [0]))
    # y is now party 0's per-setting payoff; sign 0 may as well answer +1
    outcomes[0] = np.where(y >= 0.0, 1.0, -1.0)
    for party, a in enumerate(args, start=1):
        outcomes[party] = v[a]
    return value, outcomes


def brute_force_classical_bound(scenario: BellScenario) -> float:
    """Value half of best_classical_strategy, for callers without use for
    the witness."""
    _check_strategy_budget(scenario)
    return _best_over_strategies(np.asarray(scenario.coefficients, float),
                                 _sign_table(scenario.n_settings))[0]


def strategy_correlations(scenario: BellScenario, outcomes: np.ndarray) -> np.ndarray:
    """Correlation tensor of a deterministic strategy, shape (M,)*N.

    Entry (m_1, ..., m_N) is the product of the parties' fixed answers, so
    the tensor is the outer product of the strategy's rows.
    """
    rows = np.asarray(outcomes, float)
    if rows.shape != (scenario.n_parties, scenario.n_settings):
        raise ValueError(
            f"outcomes must have shape ({scenario.n_parties}, "
            f"{scenario.n_settings}), got {rows.shape}")
    return reduce(np.multiply.outer, list(rows))


def bell_value(coefficients: np.ndarray, correlations: np.ndarray) -> float:
    """Flattened dot product of a coefficient tensor with correlations."""
    c = np.asarray(coefficients, float)
    e = np.asarray(correlations, float)
    if c.shape != e.shape:
        raise ValueError(f"shape mismatch: {c.shape} vs {e.shape}")
    return float(np.dot(c.ravel(), e.ravel()))
