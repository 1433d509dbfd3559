import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from entfloor.qstate import (
    SampleFamily,
    bell_state,
    check_density,
    connected_czz,
    correlations,
    entropy,
    ghz_state,
    is_density,
    ket_to_dm,
    log2_plus,
    log_negativity,
    mutual_information,
    partial_trace,
    partial_transpose,
    pauli_word,
    purity,
    purity_P,
    relative_entropy,
    sample,
    sample_batch,
    twirl,
    werner_state,
)
from oracles import (
    log_negativity_oracle,
    partial_transpose_loops,
    pauli_matrix,
    random_density,
    reduced_first,
    reduced_second,
    trace_expectation,
    von_neumann,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)
families = st.sampled_from(SampleFamily.KINDS)


# --- Pauli words and validation --------------------------------------------------


@pytest.mark.parametrize("word", ["1", "x", "zz", "xy", "1z", "xxx", "1zz", "zyx"])
def test_pauli_word_matches_kron(word):
    np.testing.assert_array_equal(pauli_word(word), pauli_matrix(word))


def test_pauli_word_rejects_bad_letters():
    with pytest.raises(ValueError):
        pauli_word("xq")
    with pytest.raises(ValueError):
        pauli_word("")


def test_check_density_rejects_invalid():
    with pytest.raises(ValueError, match="Hermitian"):
        check_density(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(ValueError, match="trace"):
        check_density(np.eye(4) / 3)
    with pytest.raises(ValueError, match="semidefinite"):
        check_density(np.diag([1.5, -0.5]))
    with pytest.raises(ValueError):
        check_density(np.eye(3) / 3)
    assert is_density(np.eye(8) / 8)
    assert not is_density(np.eye(16) / 16)


# --- partial transpose ----------------------------------------------------------


def test_partial_transpose_product_state_is_fixed():
    rho = np.kron(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    np.testing.assert_array_equal(partial_transpose(rho), rho)


def test_partial_transpose_bell_min_eigenvalue():
    eigs = np.linalg.eigvalsh(partial_transpose(bell_state()))
    oracle = np.linalg.eigvalsh(partial_transpose_loops(bell_state(), (1,)))
    assert eigs[0] == pytest.approx(-0.5, abs=1e-14)
    np.testing.assert_allclose(eigs, oracle, atol=1e-14)


@given(st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda v: sum(v) > 0))
def test_partial_transpose_diagonal_is_fixed(values):
    rho = np.diag(np.array(values) / sum(values)).astype(complex)
    np.testing.assert_array_equal(partial_transpose(rho), rho)


@pytest.mark.parametrize("dim,cut", [(4, 0), (4, 1), (8, 0), (8, 1), (8, 2), (8, (0, 2))])
def test_partial_transpose_matches_loop_oracle(dim, cut):
    rng = np.random.default_rng(dim)
    rho = random_density(rng, dim)
    qubits = (cut,) if isinstance(cut, int) else cut
    np.testing.assert_array_equal(partial_transpose(rho, cut), partial_transpose_loops(rho, qubits))


@given(seeds, families)
def test_partial_transpose_involution_and_trace(seed, family):
    rho = sample(family, seed)
    for cut in (0, 1):
        pt = partial_transpose(rho, cut)
        np.testing.assert_allclose(pt, pt.conj().T, atol=1e-12)
        assert np.trace(pt).real == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(partial_transpose(pt, cut), rho, atol=1e-12, rtol=0)


def test_partial_transpose_invalid_cut():
    with pytest.raises(ValueError):
        partial_transpose(np.eye(4) / 4, 2)
    with pytest.raises(ValueError):
        partial_transpose(np.eye(3) / 3)


# --- log-negativity ---------------------------------------------------------------


def test_log_negativity_bell():
    assert log_negativity(bell_state()) == pytest.approx(1.0, abs=1e-12)


def test_log_negativity_werner():
    p = 0.6
    expected = np.log2(1 + 2 * max(0.0, (3 * p - 1) / 4))
    assert expected == pytest.approx(np.log2(1.4))
    assert log_negativity(werner_state(p)) == pytest.approx(expected, abs=1e-12)
    assert log_negativity_oracle(werner_state(p)) == pytest.approx(expected, abs=1e-12)


def test_log_negativity_matches_oracle_on_random_states():
    rng = np.random.default_rng(7)
    for _ in range(50):
        rho = random_density(rng, 4, rank=int(rng.integers(1, 5)))
        assert log_negativity(rho) == pytest.approx(log_negativity_oracle(rho), abs=1e-12)


def test_log_negativity_zero_on_separable_mixtures():
    states = sample_batch("separable-mixture", 100_000, seed=11)
    assert np.max(log_negativity(states)) == 0.0


@given(seeds)
def test_pure_product_has_no_negativity(seed):
    assert log_negativity(sample("pure-product", seed)) == 0.0


def test_log_negativity_three_qubit_cuts():
    for cut in range(3):
        assert log_negativity(ghz_state(), cut) == pytest.approx(1.0, abs=1e-12)


def test_log2_plus():
    assert log2_plus(0.5) == 0.0
    assert log2_plus(2.0) == 1.0
    np.testing.assert_array_equal(log2_plus(np.array([0.0, 1.0, 4.0])), [0.0, 0.0, 2.0])


# --- correlations ------------------------------------------------------------------


def test_bell_correlations():
    assert correlations(bell_state(), ["xx", "yy", "zz"]) == pytest.approx([1, -1, 1], abs=1e-12)
    for w in ("xx", "yy", "zz"):
        assert trace_expectation(bell_state(), w) == pytest.approx(correlations(bell_state(), [w])[0])


def test_maximally_mixed_correlations_vanish():
    words = ["1x", "z1", "xy", "zz"]
    assert correlations(np.eye(4) / 4, words) == pytest.approx([0] * 4, abs=1e-15)


def test_ghz_correlations():
    assert correlations(ghz_state(), ["xxx", "1zz", "zz1"]) == pytest.approx([1, 1, 1], abs=1e-12)


def test_correlations_reject_malformed_word():
    with pytest.raises(ValueError):
        correlations(bell_state(), ["xxx"])
    with pytest.raises(ValueError):
        correlations(bell_state(), ["xw"])


@given(seeds)
def test_correlations_match_trace_oracle(seed):
    rho = sample("hilbert-schmidt-mixed", seed)
    words = ["xx", "yz", "1z", "x1", "zy"]
    assert correlations(rho, words) == pytest.approx([trace_expectation(rho, w) for w in words], abs=1e-12)


# --- connected correlator and purity -------------------------------------------------


def test_connected_czz_examples():
    anti = np.diag([0, 0.5, 0.5, 0]).astype(complex)
    assert connected_czz(anti) == pytest.approx(-1.0, abs=1e-15)
    assert connected_czz(bell_state()) == pytest.approx(1.0, abs=1e-15)


@given(seeds)
def test_connected_czz_vanishes_on_pure_products(seed):
    assert connected_czz(sample("pure-product", seed)) == pytest.approx(0.0, abs=1e-12)


@given(seeds)
def test_connected_czz_matches_definition(seed):
    rho = sample("hilbert-schmidt-mixed", seed)
    z = pauli_matrix("z")
    za = np.trace(reduced_first(rho) @ z).real
    zb = np.trace(reduced_second(rho) @ z).real
    assert connected_czz(rho) == pytest.approx(trace_expectation(rho, "zz") - za * zb, abs=1e-12)


def test_connected_czz_requires_two_qubits():
    with pytest.raises(ValueError):
        connected_czz(ghz_state())


def test_purity_examples():
    assert purity_P(bell_state()) == pytest.approx(1.0)
    assert purity_P(np.eye(4) / 4) == pytest.approx(0.0, abs=1e-15)
    assert purity_P(np.diag([0.5, 0, 0, 0.5])) == pytest.approx(1 / 3)
    assert purity(np.diag([0.5, 0, 0, 0.5])) == pytest.approx(0.5)


@given(seeds)
def test_purity_relation(seed):
    rho = sample("hilbert-schmidt-mixed", seed)
    assert purity(rho) == pytest.approx((3 * purity_P(rho) + 1) / 4, abs=1e-14)


def test_hilbert_schmidt_mean_purity():
    # induced measure with a square ancilla: E[Tr rho^2] = (d + K) / (d K + 1) = 8/17
    q = purity(sample_batch("hilbert-schmidt-mixed", 10_000, seed=2024))
    assert abs(q.mean() - 8 / 17) < 4 * q.std() / np.sqrt(len(q))


# --- entropies -----------------------------------------------------------------------


def test_entropy_examples():
    assert entropy(bell_state()) == pytest.approx(0.0, abs=1e-12)
    assert mutual_information(bell_state()) == pytest.approx(2.0, abs=1e-12)
    assert entropy(np.eye(4) / 4) == pytest.approx(2.0, abs=1e-12)
    assert mutual_information(np.eye(4) / 4) == pytest.approx(0.0, abs=1e-12)


@given(seeds)
def test_entropy_matches_oracle(seed):
    rho = sample("hilbert-schmidt-mixed", seed)
    assert entropy(rho) == pytest.approx(von_neumann(rho), abs=1e-12)
    mi = von_neumann(reduced_first(rho)) + von_neumann(reduced_second(rho)) - von_neumann(rho)
    assert mutual_information(rho) == pytest.approx(mi, abs=1e-12)
    np.testing.assert_allclose(partial_trace(rho, [0]), reduced_first(rho), atol=1e-15)


def test_relative_entropy_identity_and_positivity():
    rng = np.random.default_rng(3)
    for _ in range(100):
        sigma, rho = random_density(rng), random_density(rng)
        assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-12)
        assert relative_entropy(sigma, rho) > 0


def test_relative_entropy_support_violation():
    sigma = ket_to_dm([1, 0, 0, 0])
    rho = ket_to_dm([0, 1, 0, 0])
    assert relative_entropy(sigma, rho) == float("inf")
    # sigma supported inside rho's support is finite
    assert np.isfinite(relative_entropy(rho, np.diag([0, 0.5, 0.5, 0])))


def test_relative_entropy_classical_case():
    p, q = np.array([0.7, 0.3]), np.array([0.4, 0.6])
    expected = float(np.sum(p * np.log2(p / q)))
    assert relative_entropy(np.diag(p), np.diag(q)) == pytest.approx(expected, abs=1e-13)


# --- twirls --------------------------------------------------------------------------


def test_zz_pinch_bell():
    np.testing.assert_allclose(twirl(bell_state(), "zz-pinch"), np.diag([0.5, 0, 0, 0.5]), atol=1e-15)


def test_bell_twirl_fixed_point():
    rho = np.zeros((4, 4), dtype=complex)
    rho[np.diag_indices(4)] = [0.3, 0.2, 0.2, 0.3]
    rho[0, 3] = rho[3, 0] = 0.1
    rho[1, 2] = rho[2, 1] = -0.05
    np.testing.assert_allclose(twirl(rho, "bell-twirl"), rho, atol=1e-15)


def test_ghz_symmetrize_fixed_point():
    np.testing.assert_allclose(twirl(ghz_state(), "ghz-symmetrize"), ghz_state(), atol=1e-15)


def test_twirl_mode_mismatch():
    with pytest.raises(ValueError):
        twirl(ghz_state(), "zz-pinch")
    with pytest.raises(ValueError):
        twirl(bell_state(), "ghz-symmetrize")
    with pytest.raises(ValueError):
        twirl(bell_state(), "rotate")


def test_twirl_invariants_over_samples():
    rho = sample_batch("hilbert-schmidt-mixed", 10_000, seed=5)
    pinched = twirl(rho, "zz-pinch")
    assert np.max(np.abs(connected_czz(pinched) - connected_czz(rho))) <= 1e-12
    assert np.all(purity(pinched) <= purity(rho) + 1e-15)
    offdiag = pinched - np.einsum("nii->ni", pinched)[:, :, None] * np.eye(4)
    assert np.max(np.abs(offdiag)) <= 1e-15

    bell = twirl(rho, "bell-twirl")
    for w in ("xx", "zz"):
        op = pauli_word(w)
        diff = np.einsum("ij,nji->n", op, bell) - np.einsum("ij,nji->n", op, rho)
        assert np.max(np.abs(diff)) <= 1e-12
    # Bell-diagonal sparsity: only the main diagonal and the two anti-corner pairs
    mask = np.ones((4, 4), bool)
    mask[np.diag_indices(4)] = False
    mask[0, 3] = mask[3, 0] = mask[1, 2] = mask[2, 1] = False
    assert np.max(np.abs(bell[:, mask])) <= 1e-15


@given(seeds, st.sampled_from(["zz-pinch", "bell-twirl"]))
def test_twirl_outputs_are_states_with_finite_functionals(seed, mode):
    out = twirl(sample("hilbert-schmidt-mixed", seed), mode)
    check_density(out)
    assert 0 <= entropy(out) <= 2 + 1e-12
    assert -1e-12 <= mutual_information(out) <= 2 + 1e-12
    assert 0.25 - 1e-12 <= purity(out) <= 1 + 1e-12


@given(seeds)
def test_ghz_symmetrize_pattern(seed):
    rho = sample(SampleFamily("hilbert-schmidt-mixed", n_qubits=3), seed)
    out = twirl(rho, "ghz-symmetrize")
    check_density(out)
    mask = np.ones((8, 8), bool)
    for k in range(8):
        mask[k, k] = mask[k, 7 - k] = False
    assert np.max(np.abs(out[mask])) <= 1e-15
    for k in range(4):
        assert out[k, k].real == pytest.approx(out[7 - k, 7 - k].real, abs=1e-15)


# --- samplers ------------------------------------------------------------------------


@given(seeds, families)
def test_sample_is_deterministic_and_valid(seed, family):
    a, b = sample(family, seed), sample(family, seed)
    np.testing.assert_array_equal(a, b)
    check_density(a)


def test_sample_ranks():
    for seed in range(20):
        assert np.linalg.matrix_rank(sample("haar-pure", seed), tol=1e-10) == 1
        assert np.linalg.matrix_rank(sample("pure-product", seed), tol=1e-10) == 1
        assert np.linalg.matrix_rank(sample("hilbert-schmidt-mixed", seed), tol=1e-10) == 4


def test_sample_family_validation():
    with pytest.raises(ValueError):
        SampleFamily("mixed")
    with pytest.raises(ValueError):
        SampleFamily("separable-mixture", mixture_size=0)
    one = SampleFamily("separable-mixture", mixture_size=1)
    assert np.linalg.matrix_rank(sample(one, 3), tol=1e-10) == 1


def test_batch_is_deterministic():
    np.testing.assert_array_equal(sample_batch("separable-mixture", 5, 9), sample_batch("separable-mixture", 5, 9))
    np.testing.assert_array_equal(sample_batch("haar-pure", 1, 9)[0], sample("haar-pure", 9))
