import itertools

import numpy as np
import pytest

from bellwb import linalg, quantum
from bellwb.errors import BudgetExceededError
from bellwb.scenario import BellScenario

SEED = 424242


def random_density(rng, n_parties):
    dim = 2**n_parties
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def oracle_operator(scenario):
    # textbook construction: explicit Kronecker product per joint setting
    n = scenario.n_parties
    angles = scenario.angles
    c = np.asarray(scenario.coefficients)
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for settings in itertools.product(range(scenario.n_settings), repeat=n):
        term = np.array([[1.0]], dtype=complex)
        for s in settings:
            term = np.kron(term, quantum.measurement_operator(angles[s]))
        out += c[settings] * term
    return out


def test_pauli_algebra():
    x, y, z = quantum.PAULI[1], quantum.PAULI[2], quantum.PAULI[3]
    assert np.allclose(x @ x, np.eye(2))
    assert np.allclose(x @ y - y @ x, 2j * z)
    assert np.allclose(quantum.PAULI[0], np.eye(2))
    for p in quantum.PAULI[1:]:
        assert abs(np.trace(p)) < 1e-15


def test_measurement_operator():
    op = quantum.measurement_operator(0.3)
    assert np.allclose(op, np.cos(0.3) * quantum.PAULI[1]
                       + np.sin(0.3) * quantum.PAULI[2])
    vals = np.sort(linalg.hermitian_eigenvalues(op))
    assert np.abs(vals - np.array([-1.0, 1.0])).max() < 1e-12


def test_ghz_states():
    psi = quantum.ghz_state(3)
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-12
    assert abs(psi[0] - 1 / np.sqrt(2)) < 1e-12
    assert abs(psi[7] - 1 / np.sqrt(2)) < 1e-12
    assert np.abs(psi[1:7]).max() == 0.0
    minus = quantum.ghz_state(3, sign=-1)
    assert abs(minus[7] + 1 / np.sqrt(2)) < 1e-12
    with pytest.raises(ValueError):
        quantum.ghz_state(3, sign=2)


def test_phased_and_generalized_states():
    psi = quantum.phased_ghz_state(2, 0.9)
    assert abs(psi[3] - np.exp(0.9j) / np.sqrt(2)) < 1e-12
    g = quantum.generalized_ghz_state(2, 0.3)
    assert abs(g[0] - np.cos(0.3)) < 1e-12
    assert abs(g[3] - np.sin(0.3)) < 1e-12
    assert abs(np.linalg.norm(g) - 1.0) < 1e-12


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        quantum.density_matrix(np.ones(4))  # norm 2
    with pytest.raises(ValueError):
        quantum.density_matrix(np.ones(3) / np.sqrt(3))  # not a qubit count
    rho = quantum.density_matrix(quantum.ghz_state(2))
    assert abs(np.trace(rho) - 1.0) < 1e-12
    out = quantum.validate_density(rho)
    assert out.shape == (4, 4)
    bad = rho.copy()
    bad[0, 0] += 0.5
    with pytest.raises(ValueError):
        quantum.validate_density(bad)
    notpsd = np.diag([1.5, -0.5, 0.0, 0.0]).astype(complex)
    with pytest.raises(ValueError):
        quantum.validate_density(notpsd)


def test_dur_state_shape_and_positivity():
    for n in (3, 4):
        rho = quantum.dur_state(n, 0.4)
        rho = quantum.validate_density(rho)
        # cat weight 1/(N+1) sits on the corner coherence
        assert abs(rho[0, -1] - np.exp(-0.4j) / (2 * (n + 1))) < 1e-12
    with pytest.raises(ValueError):
        quantum.dur_state(2)


@pytest.mark.parametrize("n,m", [(2, 2), (2, 3), (3, 2)])
def test_operator_matches_kron_oracle(n, m):
    sc = BellScenario(n, m)
    assert np.abs(quantum.bell_operator_sum(sc)
                  - oracle_operator(sc)).max() < 1e-10


def test_operator_sum_equals_closed_grid():
    for n in (2, 3, 4):
        for m in (2, 3, 4, 5):
            sc = BellScenario(n, m)
            built = quantum.bell_operator_sum(sc)
            direct = quantum.bell_operator_closed(sc)
            assert np.abs(built - direct).max() < 1e-9, (n, m)


def test_operator_spectrum_and_traces():
    for n, m in [(2, 2), (3, 3), (2, 5)]:
        sc = BellScenario(n, m)
        op = quantum.bell_operator_sum(sc)
        dim = 2**n
        peak = m**n / 2.0
        vals = np.sort(linalg.hermitian_eigenvalues(op))
        expect = np.concatenate([[-peak], np.zeros(dim - 2), [peak]])
        assert np.abs(vals - expect).max() < 1e-8
        assert abs(np.trace(op)) < 1e-10
        assert abs(linalg.trace_product(op, op).real
                   - m**(2 * n) / 2.0) < 1e-6 * m**(2 * n)


def test_quantum_value_routes_agree():
    rng = np.random.default_rng(SEED)
    for n, m in [(2, 2), (2, 4), (3, 3)]:
        sc = BellScenario(n, m)
        for _ in range(5):
            rho = random_density(rng, n)
            fast = quantum.quantum_value(sc, rho)
            slow = quantum.quantum_value(sc, rho, use_sum=True)
            trace = linalg.trace_product(quantum.bell_operator_sum(sc),
                                         rho).real
            assert abs(fast - slow) < 1e-9
            assert abs(fast - trace) < 1e-9


def test_quantum_value_reference_states():
    sc = BellScenario(3, 4)
    assert abs(quantum.quantum_value(sc, quantum.ghz_state(3)) - 32.0) < 1e-9
    assert abs(quantum.quantum_value(sc, quantum.ghz_state(3, sign=-1))
               + 32.0) < 1e-9
    mixed = np.eye(8, dtype=complex) / 8.0
    assert abs(quantum.quantum_value(sc, mixed)) < 1e-12
    with pytest.raises(ValueError):
        quantum.quantum_value(sc, quantum.ghz_state(2))


def test_distribute_phase_moves_only_the_corner():
    rng = np.random.default_rng(SEED + 1)
    rho = random_density(rng, 2)
    out = quantum.distribute_phase(rho, 1.1)
    assert abs(out[0, -1] - rho[0, -1] * np.exp(1.1j)) < 1e-12
    assert np.abs(np.diag(out) - np.diag(rho)).max() < 1e-14
    ident = quantum.distribute_phase(rho, 0.0)
    assert np.abs(ident - rho).max() < 1e-14


def test_twirled_quantum_value():
    sc = BellScenario(3, 3)
    # phased cat recovers the full quantum bound once the twirl matches
    rho = quantum.density_matrix(quantum.phased_ghz_state(3, 0.8))
    assert abs(quantum.twirled_quantum_value(sc, rho, 0.8) - 13.5) < 1e-9
    dur = quantum.dur_state(3, 0.6)
    assert abs(quantum.twirled_quantum_value(sc, dur, 0.6)
               - 27.0 / 8.0) < 1e-9
    # full turn of the collective phase is the identity
    rng = np.random.default_rng(SEED + 2)
    rho = random_density(rng, 3)
    assert abs(quantum.twirled_quantum_value(sc, rho, 2 * np.pi)
               - quantum.quantum_value(sc, rho)) < 1e-9


def test_best_phase_value():
    sc = BellScenario(2, 3)
    rho = quantum.density_matrix(quantum.phased_ghz_state(2, 2.2))
    assert abs(quantum.best_phase_value(sc, rho) - 4.5) < 1e-12


def test_correlation_tensor_cat_entries():
    t = quantum.correlation_tensor(quantum.ghz_state(2))
    assert t.shape == (4, 4)
    assert abs(t[0, 0] - 1.0) < 1e-12
    assert abs(t[1, 1] - 1.0) < 1e-12   # XX
    assert abs(t[2, 2] + 1.0) < 1e-12   # YY
    assert abs(t[3, 3] - 1.0) < 1e-12   # ZZ
    assert abs(t[1, 2]) < 1e-12
    tm = quantum.correlation_tensor(quantum.ghz_state(2, sign=-1))
    assert abs(tm[1, 1] + 1.0) < 1e-12
    assert abs(tm[2, 2] - 1.0) < 1e-12


def test_correlation_tensor_generalized_cat():
    alpha = 0.4
    t = quantum.correlation_tensor(quantum.generalized_ghz_state(3, alpha))
    # the three XXY-type entries carry -sin(2 alpha), XXX carries +
    assert abs(t[1, 1, 1] - np.sin(2 * alpha)) < 1e-12
    assert abs(t[1, 2, 2] + np.sin(2 * alpha)) < 1e-12
    assert abs(t[2, 1, 2] + np.sin(2 * alpha)) < 1e-12
    assert abs(t[2, 2, 1] + np.sin(2 * alpha)) < 1e-12


def test_correlation_tensor_is_physical():
    rng = np.random.default_rng(SEED + 3)
    for n in (2, 3):
        rho = random_density(rng, n)
        t = quantum.correlation_tensor(rho)
        flat = np.asarray(t, dtype=float)
        assert flat[(0,) * n] == pytest.approx(1.0, abs=1e-12)
        assert np.abs(flat).max() <= 1.0 + 1e-9


def test_correlation_tensor_matches_direct_traces():
    rng = np.random.default_rng(SEED + 4)
    rho = random_density(rng, 3)
    t = quantum.correlation_tensor(rho)
    for idx in [(0, 1, 2), (3, 3, 3), (1, 2, 0), (2, 2, 2)]:
        op = quantum.PAULI[idx[0]]
        for mu in idx[1:]:
            op = np.kron(op, quantum.PAULI[mu])
        direct = linalg.trace_product(op, rho).real
        assert abs(t[idx] - direct) < 1e-10


def test_correlation_tensor_party_cap():
    with pytest.raises(BudgetExceededError):
        quantum.correlation_tensor(np.eye(2**7) / 2**7)


def test_spin_block():
    t = quantum.correlation_tensor(quantum.ghz_state(2))
    s = quantum.spin_block(t)
    assert s.shape == (3, 3)
    assert abs(s[0, 0] - 1.0) < 1e-12


def test_ghz_overlap_via_tensor_matches_direct():
    rng = np.random.default_rng(SEED + 5)
    for n in (2, 3):
        psi_p = quantum.ghz_state(n, 1)
        psi_m = quantum.ghz_state(n, -1)
        for _ in range(25):
            rho = random_density(rng, n)
            for sign, psi in ((1, psi_p), (-1, psi_m)):
                via = quantum.ghz_overlap_via_tensor(rho, sign)
                direct = float((psi.conj() @ rho @ psi).real)
                assert abs(via - direct) < 1e-9


def test_ghz_overlap_frozen_cases():
    rho = quantum.dur_state(3)
    assert abs(quantum.ghz_overlap_via_tensor(rho, 1) - 0.25) < 1e-10
    ghz = quantum.density_matrix(quantum.ghz_state(4))
    assert abs(quantum.ghz_overlap_via_tensor(ghz, 1) - 1.0) < 1e-10
    assert abs(quantum.ghz_overlap_via_tensor(ghz, -1)) < 1e-10


def test_block_bipartitions():
    cuts = list(quantum.block_bipartitions([(0,), (1,), (2,)]))
    assert cuts == [(0,), (0, 1), (0, 2)]
    grouped = list(quantum.block_bipartitions([(0, 1), (2,), (3,)]))
    assert grouped == [(0, 1), (0, 1, 2), (0, 1, 3)]
    with pytest.raises(ValueError):
        list(quantum.block_bipartitions([(0, 1), (1,)]))


def test_transposition_cuts_and_ppt_flags():
    prod = np.zeros(8, dtype=complex)
    prod[0] = 1.0
    cuts = quantum.transposition_cuts(prod, 3)
    assert len(cuts) == 3
    assert all(low > -1e-12 for _, low in cuts)
    assert quantum.is_ppt_for_blocks(prod, 3)
    ghz = quantum.density_matrix(quantum.ghz_state(3))
    cuts = quantum.transposition_cuts(ghz, 3)
    assert all(low < -0.4 for _, low in cuts)
    assert not quantum.is_ppt_for_blocks(ghz, 3)


def test_dur_state_single_cuts_psd():
    # one cut per complementary pair, so a lone party shows up either as
    # itself or as its (n-1)-sized complement
    for n in (3, 4):
        rho = quantum.dur_state(n)
        cuts = quantum.transposition_cuts(rho, n)
        singles = [low for parties, low in cuts
                   if len(parties) in (1, n - 1)]
        assert len(singles) == n
        assert all(low >= -1e-10 for low in singles)


def test_dur_four_parties_fails_balanced_cuts():
    # the N=4 member is not PPT across the three 2|2 splits: each dips to
    # exactly -1/10
    rho = quantum.dur_state(4)
    cuts = dict(quantum.transposition_cuts(rho, 4))
    for parties in [(0, 1), (0, 2), (0, 3)]:
        assert abs(cuts[parties] + 0.1) < 1e-12
