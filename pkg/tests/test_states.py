import numpy as np
import pytest
from scipy import stats

from teleportsim.errors import (
    BadIndex,
    DimensionMismatch,
    IncompleteProjectorSet,
    NotNormalized,
)
from teleportsim.states import (
    SWAP_2,
    BellOutcome,
    DensityOperator,
    Operator,
    PolarizationSpec,
    PureState,
    bell_projectors,
    bell_state,
    embed_operator,
    fidelity,
    make_qubit,
    measure_projective,
    partial_trace,
    projector,
    tensor,
)

RT2 = np.sqrt(2.0)


def random_qubit(rng):
    amps = rng.normal(size=2) + 1j * rng.normal(size=2)
    return PureState(1, amps / np.linalg.norm(amps))


class TestMakeQubit:
    def test_basis_state(self):
        assert np.allclose(make_qubit(1, 0).amplitudes, [1, 0])

    def test_plus45_input(self):
        state = make_qubit(1 / RT2, 1 / RT2)
        assert np.allclose(state.amplitudes, [1 / RT2, 1 / RT2])

    def test_complex_amplitudes(self):
        state = make_qubit(0.6, 0.8j)
        assert np.allclose(state.amplitudes, [0.6, 0.8j])

    def test_unnormalized_rejected(self):
        with pytest.raises(NotNormalized):
            make_qubit(0.6, 0.9j)

    def test_input_tolerance_renormalizes(self):
        # within the 1e-9 input tolerance, stored amplitudes are exact
        state = make_qubit(1 + 4e-10, 0)
        assert abs(np.vdot(state.amplitudes, state.amplitudes) - 1) < 1e-15


class TestBellStates:
    def test_psi_minus_vector(self):
        psi = bell_state(BellOutcome.PSI_MINUS)
        assert np.allclose(psi.amplitudes, np.array([0, 1, -1, 0]) / RT2)

    def test_psi_minus_antisymmetric(self):
        psi = bell_state(BellOutcome.PSI_MINUS).amplitudes
        assert np.allclose(SWAP_2 @ psi, -psi, atol=1e-12)

    @pytest.mark.parametrize(
        "kind",
        [BellOutcome.PSI_PLUS, BellOutcome.PHI_MINUS, BellOutcome.PHI_PLUS],
    )
    def test_others_symmetric(self, kind):
        vec = bell_state(kind).amplitudes
        assert np.allclose(SWAP_2 @ vec, vec, atol=1e-12)

    def test_orthonormal(self):
        vecs = [bell_state(kind).amplitudes for kind in BellOutcome]
        gram = np.array([[np.vdot(a, b) for b in vecs] for a in vecs])
        assert np.allclose(gram, np.eye(4), atol=1e-12)

    def test_projector_completeness(self):
        total = sum(p.matrix for p in bell_projectors())
        assert np.allclose(total, np.eye(4), atol=1e-12)


class TestTensor:
    def test_basis_index(self):
        hv = tensor(make_qubit(1, 0), make_qubit(0, 1))
        assert np.allclose(hv.amplitudes, [0, 1, 0, 0])

    def test_protocol_initial_state(self):
        chi = PolarizationSpec.from_label("+45").state()
        joint = tensor(chi, bell_state(BellOutcome.PSI_MINUS))
        assert joint.num_photons == 3
        # photon 1 most significant: |+45> x (|HV> - |VH>)/sqrt(2)
        expected = np.kron(chi.amplitudes, bell_state(BellOutcome.PSI_MINUS).amplitudes)
        assert np.allclose(joint.amplitudes, expected)

    def test_associative(self):
        rng = np.random.default_rng(3)
        x, y, z = (random_qubit(rng) for _ in range(3))
        left = tensor(tensor(x, y), z)
        right = tensor(x, tensor(y, z))
        assert np.allclose(left.amplitudes, right.amplitudes, atol=1e-12)

    def test_density_operators(self):
        rng = np.random.default_rng(4)
        a, b = random_qubit(rng).density(), random_qubit(rng).density()
        joint = tensor(a, b)
        assert np.allclose(joint.matrix, np.kron(a.matrix, b.matrix))

    def test_mixed_types_rejected(self):
        with pytest.raises(DimensionMismatch):
            tensor(make_qubit(1, 0), make_qubit(1, 0).density())


class TestPartialTrace:
    def test_bell_member_maximally_mixed(self):
        rho = bell_state(BellOutcome.PSI_MINUS).density()
        reduced = partial_trace(rho, {1})
        assert np.allclose(reduced.matrix, np.eye(2) / 2, atol=1e-12)

    def test_product_state_recovery(self):
        rng = np.random.default_rng(5)
        a, b = random_qubit(rng).density(), random_qubit(rng).density()
        joint = tensor(a, b)
        assert np.allclose(partial_trace(joint, {1}).matrix, a.matrix, atol=1e-12)
        assert np.allclose(partial_trace(joint, {2}).matrix, b.matrix, atol=1e-12)

    def test_trace_preserved(self):
        rng = np.random.default_rng(6)
        psi = rng.normal(size=8) + 1j * rng.normal(size=8)
        rho = PureState(3, psi / np.linalg.norm(psi)).density()
        for keep in ({1}, {2, 3}, {1, 3}):
            assert abs(np.trace(partial_trace(rho, keep).matrix) - 1) < 1e-12

    def test_bad_index(self):
        rho = bell_state(BellOutcome.PSI_MINUS).density()
        with pytest.raises(BadIndex):
            partial_trace(rho, set())
        with pytest.raises(BadIndex):
            partial_trace(rho, {3})


class TestEmbedOperator:
    def test_flip_second_photon(self):
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        full = embed_operator(x, 2, (2,))
        hh = tensor(make_qubit(1, 0), make_qubit(1, 0)).amplitudes
        hv = tensor(make_qubit(1, 0), make_qubit(0, 1)).amplitudes
        assert np.allclose(full @ hh, hv)

    def test_matches_kron_composition(self):
        rng = np.random.default_rng(7)
        for _ in range(5):
            u = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
            direct = embed_operator(u, 3, (1, 2))
            assert np.allclose(direct, np.kron(u, np.eye(2)), atol=1e-12)
            direct = embed_operator(u, 3, (2, 3))
            assert np.allclose(direct, np.kron(np.eye(2), u), atol=1e-12)

    def test_noncontiguous_targets(self):
        rng = np.random.default_rng(8)
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        combined = embed_operator(np.kron(a, b), 3, (1, 3))
        composed = embed_operator(a, 3, (1,)) @ embed_operator(b, 3, (3,))
        assert np.allclose(combined, composed, atol=1e-12)


class TestMeasureProjective:
    def test_plus45_in_hv_basis(self):
        state = PolarizationSpec.from_label("+45").state()
        projs = [projector(make_qubit(1, 0)), projector(make_qubit(0, 1))]
        rng = np.random.default_rng(0)
        _, _, prob = measure_projective(state, projs, rng)
        assert abs(prob - 0.5) < 1e-12

    def test_eigenstate_deterministic(self):
        state = make_qubit(1, 0)
        projs = [projector(make_qubit(1, 0)), projector(make_qubit(0, 1))]
        rng = np.random.default_rng(1)
        for _ in range(20):
            outcome, collapsed, prob = measure_projective(state, projs, rng)
            assert outcome == 0
            assert abs(prob - 1.0) < 1e-12
            assert np.allclose(collapsed.amplitudes, state.amplitudes)

    def test_empirical_frequencies_match_born(self):
        # chi-squared test against exact probabilities over 1e5 draws
        state = make_qubit(0.6, 0.8)
        projs = [projector(make_qubit(1, 0)), projector(make_qubit(0, 1))]
        rng = np.random.default_rng(2)
        n = 100_000
        hits = sum(measure_projective(state, projs, rng)[0] for _ in range(n))
        p_v = 0.64
        sigma = np.sqrt(p_v * (1 - p_v) / n)
        assert abs(hits / n - p_v) < 4 * sigma
        chi2 = stats.chisquare([n - hits, hits], [n * (1 - p_v), n * p_v])
        assert chi2.pvalue > 0.001

    def test_incomplete_set_rejected(self):
        state = make_qubit(1, 0)
        with pytest.raises(IncompleteProjectorSet):
            measure_projective(state, [projector(make_qubit(1, 0))], np.random.default_rng(0))

    def test_density_operator_input(self):
        rho = bell_state(BellOutcome.PSI_MINUS).density()
        projs = [Operator(p.matrix) for p in bell_projectors()]
        rng = np.random.default_rng(3)
        outcome, collapsed, prob = measure_projective(rho, projs, rng)
        assert outcome == 0
        assert abs(prob - 1.0) < 1e-12
        assert isinstance(collapsed, DensityOperator)


class TestFidelity:
    def test_identity_case(self):
        rng = np.random.default_rng(9)
        chi = random_qubit(rng)
        assert abs(fidelity(chi.density(), chi) - 1) < 1e-12

    def test_maximally_mixed(self):
        rho = DensityOperator(1, np.eye(2) / 2)
        rng = np.random.default_rng(10)
        for _ in range(5):
            assert abs(fidelity(rho, random_qubit(rng)) - 0.5) < 1e-12

    def test_global_phase_invariant(self):
        rng = np.random.default_rng(11)
        chi = random_qubit(rng)
        rho = chi.density()
        rotated = PureState(1, np.exp(0.7j) * chi.amplitudes)
        assert abs(fidelity(rho, chi) - fidelity(rho, rotated)) < 1e-12

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            fidelity(bell_state(BellOutcome.PSI_MINUS).density(), make_qubit(1, 0))


class TestPolarizationSpec:
    @pytest.mark.parametrize(
        "label,expected",
        [
            ("H", (1, 0)),
            ("V", (0, 1)),
            ("+45", (1 / RT2, 1 / RT2)),
            ("-45", (1 / RT2, -1 / RT2)),
            ("R", (1 / RT2, 1j / RT2)),
            ("L", (1 / RT2, -1j / RT2)),
        ],
    )
    def test_conventions(self, label, expected):
        state = PolarizationSpec.from_label(label).state()
        assert np.allclose(state.amplitudes, expected)

    @pytest.mark.parametrize("alias,label", [("0", "H"), ("90", "V"), ("circular", "R")])
    def test_aliases(self, alias, label):
        assert PolarizationSpec.from_label(alias).label == label

    def test_parse_amplitude_pair(self):
        spec = PolarizationSpec.parse("0.6,0.8i")
        assert np.allclose(spec.state().amplitudes, [0.6, 0.8j])

    def test_parse_rejects_unnormalized(self):
        with pytest.raises(NotNormalized):
            PolarizationSpec.parse("0.6,0.9i")

    def test_parse_rejects_garbage(self):
        with pytest.raises(NotNormalized):
            PolarizationSpec.parse("diagonalish")

    def test_orthogonal(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            chi = random_qubit(rng)
            spec = PolarizationSpec.custom(*chi.amplitudes)
            cross = np.vdot(spec.orthogonal().state().amplitudes, chi.amplitudes)
            assert abs(cross) < 1e-12


class TestInvariants:
    def test_pure_state_normalization_enforced(self):
        with pytest.raises(NotNormalized):
            PureState(1, np.array([1.0, 1e-5]))

    def test_density_operator_validation(self):
        with pytest.raises(NotNormalized):
            DensityOperator(1, np.array([[0.5, 0.5], [0.1, 0.5]]))
        with pytest.raises(NotNormalized):
            DensityOperator(1, np.array([[0.9, 0.0], [0.0, 0.2]]))
        with pytest.raises(NotNormalized):
            # trace one, Hermitian, but not positive
            DensityOperator(1, np.array([[1.5, 0.0], [0.0, -0.5]]))

    def test_operator_checks(self):
        assert Operator(np.eye(2)).is_unitary()
        assert Operator(np.eye(2)).is_psd()
        assert not Operator(np.array([[1, 1], [0, 1]], dtype=complex)).is_unitary()

    def test_states_immutable(self):
        state = make_qubit(1, 0)
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.0
