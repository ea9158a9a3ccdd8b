import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmemwit import ising
from qmemwit import process as pr
from qmemwit import tensorlinalg as tl
from qmemwit.process import A_I, A_O, B_I, E_I, E_O

# Frozen fixtures for the (J, h, t) = (1, 1, 1) process, computed with the
# explicit index-sum oracle in test_ising and cross-checked between the trace
# and Frobenius norms.
MARKOV_DISTANCE_111_TRACE = 2.401563402802977
MARKOV_DISTANCE_111_FROBENIUS = 1.0688416375392675


def random_state(rng, label, d=2):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    rho = g @ g.conj().T
    return tl.operator([(label, d)], rho / np.trace(rho).real)


def identity_choi():
    return pr.choi_of_unitary(tl.identity([(A_O, 2)]), (A_O,), (B_I,))


def ppt_min(w: pr.ProcessMatrix) -> float:
    return tl.min_eig(tl.partial_transpose(w.op, {A_I}))


class TestChoiOfUnitary:
    def test_identity_channel(self):
        choi = identity_choi()
        expect = np.zeros((4, 4), dtype=complex)
        for j in range(2):
            for k in range(2):
                expect[j * 2 + j, k * 2 + k] = 1.0
        assert np.allclose(choi.mat, expect)
        assert np.isclose(choi.trace(), 2.0)

    def test_sigma_x_relabeling(self):
        choi = pr.choi_of_unitary(tl.qubit(A_O, tl.PAULI_X), (A_O,), (B_I,))
        expect = np.zeros((4, 4), dtype=complex)
        sx = tl.PAULI_X
        for j in range(2):
            for k in range(2):
                block = sx @ np.outer(np.eye(2)[j], np.eye(2)[k]) @ sx
                expect[j * 2 : j * 2 + 2, k * 2 : k * 2 + 2] = block
        assert np.allclose(choi.mat, expect)

    def test_joint_unitary_properties(self):
        u = ising.evolution(1.0, 1.0, 1.0)
        choi = pr.choi_of_unitary(u, (A_O, E_I), (B_I, E_O))
        assert np.isclose(choi.trace(), 4.0)
        vals, _ = tl.herm_eig(choi)
        assert vals[0] >= -1e-12
        assert np.sum(vals > 1e-9) == 1  # rank one

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            pr.choi_of_unitary(tl.qubit(A_O, [[1, 0], [0, 0.5]]), (A_O,), (B_I,))


class TestLinkProduct:
    def test_identity_channel_preserves_state(self):
        rng = np.random.default_rng(0)
        rho = random_state(rng, E_I)
        choi = pr.choi_of_unitary(tl.identity([(E_I, 2)]), (E_I,), (E_O,))
        out = pr.link_product(rho, choi)
        assert out.labels == (E_O,)
        assert np.allclose(out.mat, rho.mat)

    def test_matches_direct_index_formula(self):
        # oracle: before tracing E_O, the linked operator has entries
        # (1/2) U|j k><j' k'|U^dag on (B_I, E_O) against |k><k'| x |j><j'|
        u = ising.evolution(0.7, 1.3, 1.0)
        choi = pr.choi_of_unitary(u, (A_O, E_I), (B_I, E_O))
        linked = pr.link_product(ising.initial_state(), choi)
        assert linked.labels == (A_I, A_O, B_I, E_O)
        um = u.mat
        expect = np.zeros((16, 16), dtype=complex)
        for k in range(2):
            for j in range(2):
                for k2 in range(2):
                    for j2 in range(2):
                        block = np.outer(um[:, 2 * j + k], um[:, 2 * j2 + k2].conj())
                        for be in range(4):
                            for be2 in range(4):
                                row = ((k * 2 + j) * 4) + be
                                col = ((k2 * 2 + j2) * 4) + be2
                                expect[row, col] = 0.5 * block[be, be2]
        assert np.max(np.abs(linked.mat - expect)) <= 1e-12

    @given(st.integers(0, 10**6))
    @settings(max_examples=25)
    def test_commutative(self, seed):
        rng = np.random.default_rng(seed)
        g1 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        g2 = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        x = tl.operator([("P", 2), ("S", 2)], g1)
        y = tl.operator([("S", 2), ("Q", 2)], g2)
        xy = pr.link_product(x, y)
        yx = pr.link_product(y, x)
        assert tl.max_abs_diff(xy, yx) <= 1e-12

    @given(st.integers(0, 10**6))
    @settings(max_examples=25)
    def test_associative_disjoint_shares(self, seed):
        rng = np.random.default_rng(seed)

        def rand(factors):
            d = int(np.prod([dim for _, dim in factors]))
            g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            return tl.operator(factors, g)

        x = rand([("P", 2), ("S", 2)])
        y = rand([("S", 2), ("T", 2)])
        z = rand([("T", 2), ("Q", 2)])
        left = pr.link_product(pr.link_product(x, y), z)
        right = pr.link_product(x, pr.link_product(y, z))
        assert tl.max_abs_diff(left, right) <= 1e-10

    def test_dim_mismatch_rejected(self):
        x = tl.operator([("S", 2)], np.eye(2))
        y = tl.operator([("S", 3)], np.eye(3))
        with pytest.raises(ValueError):
            pr.link_product(x, y)


class TestProbRule:
    def test_deterministic_chain(self):
        ket0 = np.array([1, 0], dtype=complex)
        w = pr.ProcessMatrix(
            tl.kron(tl.operator([(A_I, 2)], np.outer(ket0, ket0)), identity_choi())
        )
        m_a = pr.prepare_and_measure(ket0, ket0)
        assert np.isclose(pr.prob_rule(w, m_a, pr.povm_effect(np.outer(ket0, ket0))), 1.0)
        ket1 = np.array([0, 1], dtype=complex)
        assert np.isclose(pr.prob_rule(w, m_a, pr.povm_effect(np.outer(ket1, ket1))), 0.0)

    def test_born_chain_by_hand(self):
        rng = np.random.default_rng(42)
        rho = random_state(rng, A_I)
        u = tl.unitary_from_hamiltonian(tl.qubit(A_O, tl.PAULI_X + 0.3 * tl.PAULI_Z), 0.9)
        w = pr.markovian_process(rho, pr.ChannelChoi(pr.choi_of_unitary(u, (A_O,), (B_I,)), A_O, B_I))
        m = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        m /= np.linalg.norm(m)
        p_ket = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        p_ket /= np.linalg.norm(p_ket)
        effect = np.array([[0.8, 0.1], [0.1, 0.3]], dtype=complex)
        got = pr.prob_rule(w, pr.prepare_and_measure(m, p_ket), pr.povm_effect(effect))
        evolved = u.mat @ np.outer(p_ket, p_ket.conj()) @ u.mat.conj().T
        expect = (m.conj() @ rho.mat @ m).real * np.trace(effect @ evolved).real
        assert np.isclose(got, expect, atol=1e-12)

    @given(st.integers(0, 10**6))
    @settings(max_examples=25)
    def test_full_instrument_normalization(self, seed):
        rng = np.random.default_rng(seed)
        w = pr.classical_memory_process(pr.random_classical_memory(seed, 2))
        basis = np.linalg.qr(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))[0]
        preps = [v / np.linalg.norm(v) for v in rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))]
        e = rng.uniform(0.2, 0.8) * np.eye(2)
        total = 0.0
        for k in range(2):
            m_a = pr.prepare_and_measure(basis[:, k], preps[k])
            for eff in (e, np.eye(2) - e):
                total += pr.prob_rule(w, m_a, pr.povm_effect(eff))
        assert abs(total - 1.0) <= 1e-9


class TestConstructors:
    def test_markovian_form(self):
        w = pr.markovian_process(
            tl.operator([(A_I, 2)], np.eye(2) / 2), pr.ChannelChoi(identity_choi(), A_O, B_I)
        )
        expect = np.kron(np.eye(2) / 2, identity_choi().mat)
        assert np.allclose(w.op.mat, expect)
        assert pr.markov_distance(w) <= 1e-12
        assert ppt_min(w) >= -1e-10

    def test_classical_single_term_degenerates(self):
        rng = np.random.default_rng(3)
        rho = random_state(rng, A_I)
        channel = pr.ChannelChoi(identity_choi(), A_O, B_I)
        single = pr.ClassicalMemoryProcess(((1.0, rho, channel),))
        w1 = pr.classical_memory_process(single)
        w2 = pr.markovian_process(rho, channel)
        assert tl.max_abs_diff(w1.op, w2.op) <= 1e-12

    def test_h0_mixture_matches_ising(self):
        mix = ising.analytic_h0_mixture(1.3, 0.9)
        w = pr.classical_memory_process(mix)
        assert tl.max_abs_diff(w.op, ising.process_matrix(1.3, 0.0, 0.9).op) <= 1e-10

    def test_classical_is_ppt(self):
        rng = np.random.default_rng(8)
        for seed in rng.integers(0, 2**31, size=50):
            w = pr.classical_memory_process(pr.random_classical_memory(int(seed), 3))
            assert ppt_min(w) >= -1e-10

    def test_unnormalized_weights_rejected(self):
        rng = np.random.default_rng(4)
        rho = random_state(rng, A_I)
        channel = pr.ChannelChoi(identity_choi(), A_O, B_I)
        with pytest.raises(ValueError):
            pr.ClassicalMemoryProcess(((0.7, rho, channel),))


class TestRandomClassicalMemory:
    def test_deterministic(self):
        a = pr.random_classical_memory(123, 3)
        b = pr.random_classical_memory(123, 3)
        for (qa, ra, ta), (qb, rb, tb) in zip(a.terms, b.terms):
            assert qa == qb
            assert np.array_equal(ra.mat, rb.mat)
            assert np.array_equal(ta.op.mat, tb.op.mat)

    def test_invariants(self):
        for seed in range(30):
            sample = pr.random_classical_memory(seed, 1 + seed % 4)
            total = sum(q for q, _, _ in sample.terms)
            assert abs(total - 1.0) <= 1e-12
            for q, rho, channel in sample.terms:
                assert q >= 0
                assert abs(rho.trace() - 1) <= 1e-12
                assert tl.min_eig(rho) >= -1e-12

    def test_thousand_samples_stay_ppt(self):
        rng = np.random.default_rng(99)
        worst = 0.0
        for seed in rng.integers(0, 2**31, size=1000):
            w = pr.classical_memory_process(pr.random_classical_memory(int(seed), 1 + int(seed) % 3))
            worst = min(worst, ppt_min(w))
        assert worst >= -1e-9

    def test_bad_term_count(self):
        with pytest.raises(ValueError):
            pr.random_classical_memory(0, 0)


class TestCombAndProjector:
    def test_markovian_passes(self):
        rng = np.random.default_rng(5)
        w = pr.markovian_process(
            random_state(rng, A_I), pr.ChannelChoi(identity_choi(), A_O, B_I)
        )
        assert pr.validate_comb(w.op).ok

    def test_pauli_perturbation_rejected(self):
        # sigma_z x sigma_z x sigma_z is traceless on every factor, so it
        # leaves the comb equality intact; what it breaks is positivity.
        w = ising.process_matrix(0.9, 0.4, 1.0)
        noise = tl.operator(
            [(A_I, 2), (A_O, 2), (B_I, 2)],
            np.kron(np.kron(tl.PAULI_Z, tl.PAULI_Z), tl.PAULI_Z),
        )
        report = pr.validate_comb(w.op + noise * 0.1)
        assert not report.ok
        assert report.min_eig < report.psd_floor
        assert report.comb_condition <= 1e-12

    def test_signalling_perturbation_fails_comb_condition(self):
        # a projector on A_O with nonzero trace does violate the comb equality
        w = ising.process_matrix(0.9, 0.4, 1.0)
        p0 = np.array([[1, 0], [0, 0]], dtype=complex)
        noise = tl.operator(
            [(A_I, 2), (A_O, 2), (B_I, 2)], np.kron(np.kron(np.eye(2), p0), p0)
        )
        report = pr.validate_comb(w.op + noise * 0.1)
        assert not report.ok
        assert report.comb_condition > 1e-3

    def test_ising_passes_random_params(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            j, h, t = rng.uniform(0, 5, 3)
            assert pr.validate_comb(ising.process_matrix(j, h, t).op).ok

    def test_projector_fixes_combs(self):
        w = ising.process_matrix(1.7, 2.2, 0.8)
        assert tl.max_abs_diff(pr.project_L(w.op), w.op) <= 1e-12

    @given(st.integers(0, 10**6))
    @settings(max_examples=30)
    def test_projector_idempotent_and_self_adjoint(self, seed):
        rng = np.random.default_rng(seed)
        factors = [(A_I, 2), (A_O, 2), (B_I, 2)]

        def rand_herm():
            g = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
            return tl.operator(factors, (g + g.conj().T) / 2)

        x, z = rand_herm(), rand_herm()
        lx = pr.project_L(x)
        assert tl.max_abs_diff(pr.project_L(lx), lx) <= 1e-9
        lhs = np.trace(lx.mat @ z.mat)
        rhs = np.trace(x.mat @ pr.project_L(z).mat)
        assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))

    def test_projector_invariant_pairing_with_comb(self):
        rng = np.random.default_rng(77)
        w = ising.process_matrix(2.0, 1.0, 1.0)
        g = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        z = tl.operator([(A_I, 2), (A_O, 2), (B_I, 2)], (g + g.conj().T) / 2)
        lhs = np.trace(pr.project_L(z).mat @ w.op.mat)
        rhs = np.trace(z.mat @ w.op.mat)
        assert abs(lhs - rhs) <= 1e-9

    def test_projector_rejects_non_hermitian(self):
        x = tl.operator([(A_I, 2), (A_O, 2), (B_I, 2)], np.triu(np.ones((8, 8))))
        with pytest.raises(ValueError):
            pr.project_L(x)


class TestMarkovDistance:
    def test_product_fixed_point(self):
        rng = np.random.default_rng(9)
        w = pr.markovian_process(
            random_state(rng, A_I), pr.ChannelChoi(identity_choi(), A_O, B_I)
        )
        w_m = pr.marginal_markovian(w)
        assert tl.max_abs_diff(w_m.op, w.op) <= 1e-12

    def test_lattice_point_is_fixed(self):
        w = ising.process_matrix(np.pi, 0.0, 1.0)
        assert tl.max_abs_diff(pr.marginal_markovian(w).op, w.op) <= 1e-9

    def test_generic_point_moves(self):
        w = ising.process_matrix(1.0, 1.0, 1.0)
        gap = tl.trace_norm(w.op - pr.marginal_markovian(w).op)
        assert gap > 1e-3

    def test_frozen_fixture_values(self):
        w = ising.process_matrix(1.0, 1.0, 1.0)
        assert abs(pr.markov_distance(w) - MARKOV_DISTANCE_111_TRACE) <= 1e-9
        assert (
            abs(pr.markov_distance(w, norm="frobenius") - MARKOV_DISTANCE_111_FROBENIUS)
            <= 1e-9
        )

    def test_markovian_zero(self):
        rng = np.random.default_rng(10)
        w = pr.markovian_process(
            random_state(rng, A_I), pr.ChannelChoi(identity_choi(), A_O, B_I)
        )
        assert pr.markov_distance(w) <= 1e-12

    def test_half_pi_zero(self):
        assert pr.markov_distance(ising.process_matrix(np.pi / 2, 0.0, 1.0)) <= 1e-9

    def test_unknown_norm(self):
        with pytest.raises(ValueError):
            pr.markov_distance(ising.process_matrix(1, 1, 1), norm="nuclear")
