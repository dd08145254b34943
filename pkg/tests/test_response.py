"""Response evaluation, massless elimination, pole-residue extraction."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from elastonet import (
    AtResonance,
    BlockPartition,
    CanonicalResponse,
    ElastodynamicNetwork,
    FloppyModeInconsistent,
    Node,
    RayleighParams,
    SchemaError,
    Spring,
    SymMatrix,
    SystemMatrices,
    assemble,
    canonical_from_dict,
    canonical_to_dict,
    check_balanced,
    eliminate_massless,
    evaluate_canonical,
    evaluate_reduced,
    evaluate_response,
    extract_canonical,
    is_psd,
    random_network,
    reduced_modal_stiffnesses,
    sample_nonresonant,
    system_resonances,
)

from conftest import axial_block


def scalar_response(k, m, alpha, beta, lam):
    """Single terminal + single massive interior node, axial closed form."""
    damp = 1.0 + alpha * lam
    return damp * k - (damp * k) ** 2 / (damp * k + (beta * lam + lam * lam) * m)


class TestEvaluateResponse:
    def test_no_interior_nodes_gives_full_pencil(self, single_spring_terminals):
        sys = assemble(single_spring_terminals)
        for lam in (0.0, 1.0 + 2.0j, -0.5j):
            w = evaluate_response(sys, lam).W.a
            assert_allclose(w, axial_block(), atol=1e-15)

    def test_chain_static_pseudoinverse_is_series_spring(self, assembled_chain):
        w = evaluate_response(assembled_chain, 0.0, mode="pseudoinverse").W.a
        assert_allclose(w, axial_block(0.5), atol=1e-14)

    def test_single_mass_matches_scalar_formula(self, terminal_plus_mass):
        sys = assemble(terminal_plus_mass)
        lam = 0.5j
        w = evaluate_response(sys, lam).W.a
        expected = scalar_response(1.0, 1.0, 0.0, 0.0, lam)
        assert_allclose(w[0, 0], expected)
        assert_allclose(expected, 1.0 - 1.0 / 0.75)
        assert_allclose(w[1, 1], 0.0, atol=1e-15)

    def test_resonance_raises(self, terminal_plus_mass):
        sys = assemble(terminal_plus_mass)
        with pytest.raises(AtResonance):
            evaluate_response(sys, 1.0j)  # sigma = 1 pole of the undamped system

    def test_damped_scalar_formula(self):
        nodes = (Node((0.0, 0.0), 0.0, True), Node((1.0, 0.0), 2.0, False))
        net = ElastodynamicNetwork(
            2, nodes, (Spring(0, 1, 1.5),), RayleighParams(0.3, 0.7)
        )
        sys = assemble(net)
        for lam in (0.2 + 0.9j, -0.1 + 2.0j):
            w = evaluate_response(sys, lam).W.a
            assert_allclose(w[0, 0], scalar_response(1.5, 2.0, 0.3, 0.7, lam))


class TestEliminateMassless:
    def test_no_massless_interior_restricts_exactly(self):
        net = random_network(4, 2, 2, 2, 1.0)
        sys = assemble(net)
        red = eliminate_massless(sys)
        keep = list(sys.partition.boundary) + list(sys.partition.interior)
        assert np.array_equal(red.Ktilde.a, sys.K.a[np.ix_(keep, keep)])
        assert np.array_equal(red.Ctilde.a, sys.C.a[np.ix_(keep, keep)])

    def test_chain_reduces_to_series_spring(self, assembled_chain):
        red = eliminate_massless(assembled_chain)
        assert red.n_j == 0
        assert_allclose(red.Ktilde.a, axial_block(0.5), atol=1e-14)

    def test_all_massless_network_response_scales_statically(self):
        base = random_network(10, 2, 2, 3, 0.0, alpha=0.8, beta=1.1)
        nodes = tuple(Node(n.position, 0.0, n.is_terminal) for n in base.nodes)
        net = ElastodynamicNetwork(2, nodes, base.springs, base.rayleigh)
        sys = assemble(net)
        red = eliminate_massless(sys)
        assert red.n_j == 0
        w_static = red.Ktilde.a
        for lam in (0.4 + 0.2j, 1.5j):
            w = evaluate_reduced(red, lam).W.a
            assert_allclose(w, (1.0 + 0.8 * lam) * w_static, atol=1e-12)

    @pytest.mark.parametrize("seed", [0, 3, 11])
    def test_reduction_matches_full_response(self, seed):
        net = random_network(seed, 2 + seed % 2, 2, 4, 0.5)
        sys = assemble(net)
        red = eliminate_massless(sys)
        avoid = system_resonances(net.rayleigh, reduced_modal_stiffnesses(red))
        rng = np.random.default_rng(seed)
        for lam in sample_nonresonant(rng, avoid, 10):
            full = evaluate_response(sys, lam, mode="pseudoinverse").W.a
            reduced = evaluate_reduced(red, lam).W.a
            scale = max(np.abs(full).max(), 1e-300)
            assert np.abs(full - reduced).max() <= 1e-9 * scale

    def test_broken_rayleigh_structure_detected(self, terminal_plus_mass):
        from elastonet import RayleighStructureBroken

        sys = assemble(terminal_plus_mass)
        bad = SystemMatrices(
            K=sys.K,
            C=SymMatrix(np.diag([0.0, 0.0, 1.0, 2.0])),  # not alpha*K + beta*M
            M=sys.M,
            partition=sys.partition,
            dimension=sys.dimension,
            rayleigh=RayleighParams(0.0, 1.0),
            terminal_positions=sys.terminal_positions,
        )
        with pytest.raises(RayleighStructureBroken):
            eliminate_massless(bad)


class TestExtractCanonical:
    def test_single_mass_mode(self, terminal_plus_mass):
        cr = extract_canonical(assemble(terminal_plus_mass))
        n = np.array([-1.0, 0.0])  # unit vector from terminal to the mass
        block = np.outer(n, n)
        assert_allclose(cr.A.a, block, atol=1e-14)
        assert len(cr.modes) == 1
        assert_allclose(cr.modes[0].sigma, 1.0)
        assert_allclose(cr.modes[0].R.a, block, atol=1e-14)
        assert_allclose(cr.static_response().a, 0.0, atol=1e-14)
        assert_allclose(cr.Mbb, [0.0, 0.0])

    def test_all_terminal_network_has_no_modes(self):
        nodes = (Node((0.0, 0.0), 1.5, True), Node((1.0, 0.0), 2.5, True))
        net = ElastodynamicNetwork(2, nodes, (Spring(0, 1, 2.0),))
        sys = assemble(net)
        cr = extract_canonical(sys)
        assert not cr.modes
        assert np.array_equal(cr.A.a, sys.K.a)
        assert_allclose(cr.Mbb, [1.5, 1.5, 2.5, 2.5])

    def test_chain_extraction_matches_elimination(self, assembled_chain):
        cr = extract_canonical(assembled_chain)
        assert not cr.modes  # massless middle node leaves no resonant mode
        assert_allclose(cr.A.a, axial_block(0.5), atol=1e-14)

    def test_floppy_mode_with_coupling_rejected(self):
        # interior stiffness block is zero but couples to the boundary:
        # impossible for a PSD stiffness, so extraction must refuse
        k = np.zeros((4, 4))
        k[:2, :2] = np.eye(2)
        k[:2, 2:] = np.eye(2)
        k[2:, :2] = np.eye(2)
        sys = SystemMatrices(
            K=SymMatrix(k),
            C=SymMatrix(np.zeros((4, 4))),
            M=SymMatrix(np.diag([0.0, 0.0, 1.0, 1.0])),
            partition=BlockPartition([0, 1], [2, 3]),
            dimension=2,
            rayleigh=RayleighParams(0.0, 0.0),
            terminal_positions=np.array([[0.0, 0.0]]),
        )
        with pytest.raises(FloppyModeInconsistent):
            extract_canonical(sys)

    def test_repeated_modal_stiffness_clusters_into_one_residue(self):
        # two identical springs orthogonal to each other at one massive node:
        # the interior stiffness is the identity, a doubly degenerate mode
        nodes = (
            Node((1.0, 0.0), 0.0, True),
            Node((0.0, 1.0), 0.0, True),
            Node((0.0, 0.0), 1.0, False),
        )
        net = ElastodynamicNetwork(2, nodes, (Spring(0, 2, 1.0), Spring(1, 2, 1.0)))
        cr = extract_canonical(assemble(net))
        assert len(cr.modes) == 1
        assert_allclose(cr.modes[0].sigma, 1.0)
        assert np.linalg.matrix_rank(cr.modes[0].R.a, tol=1e-10) == 2

    @pytest.mark.parametrize("seed", [1, 5, 9, 14])
    def test_roundtrip_against_direct_response(self, seed):
        net = random_network(seed, 2 + (seed + 1) % 2, 2 + seed % 3, 2 + seed % 4, 0.5)
        sys = assemble(net)
        cr = extract_canonical(sys, seed=seed)
        red = eliminate_massless(sys)
        avoid = system_resonances(net.rayleigh, reduced_modal_stiffnesses(red))
        rng = np.random.default_rng(100 + seed)
        for lam in sample_nonresonant(rng, avoid, 10):
            direct = evaluate_response(sys, lam, mode="pseudoinverse").W.a
            closed = evaluate_canonical(cr, lam).W.a
            scale = max(np.abs(direct).max(), 1e-300)
            assert np.abs(direct - closed).max() <= 1e-8 * scale

    @pytest.mark.parametrize("seed", [2, 6, 13])
    def test_extracted_form_structure(self, seed):
        net = random_network(seed, 3, 2, 3, 0.7)
        cr = extract_canonical(assemble(net))
        assert is_psd(cr.A, tol=1e-9)
        sigmas = [m.sigma for m in cr.modes]
        assert all(s > 0 for s in sigmas)
        assert sigmas == sorted(sigmas)
        assert len(set(sigmas)) == len(sigmas)
        for m in cr.modes:
            assert is_psd(m.R, tol=1e-9)
        # at most two distinct poles per mode
        assert len(cr.resonances()) <= 2 * len(cr.modes)
        assert all(r.real <= 1e-12 for r in cr.resonances())
        # static slice is PSD with balanced columns
        w0 = cr.static_response()
        assert is_psd(w0, tol=1e-9)
        ok, residual = check_balanced(w0.a, cr.terminal_positions, tol=1e-10)
        assert ok, residual


class TestEvaluateCanonical:
    def test_static_value(self, terminal_plus_mass):
        cr = extract_canonical(assemble(terminal_plus_mass))
        w0 = evaluate_canonical(cr, 0.0).W.a
        expected = cr.A.a - sum(m.R.a / m.sigma for m in cr.modes)
        assert_allclose(w0, expected, atol=1e-15)

    def test_massless_form_scales_statically(self):
        a = SymMatrix(np.array([[2.0, -1.0], [-1.0, 2.0]]))
        cr = CanonicalResponse(
            rayleigh=RayleighParams(0.6, 0.0),
            A=a,
            Mbb=np.zeros(2),
            modes=(),
            terminal_positions=np.array([[0.0, 0.0]]),
        )
        for lam in (0.0, 1.0j, 2.0 - 0.5j):
            w = evaluate_canonical(cr, lam).W.a
            assert_allclose(w, (1.0 + 0.6 * lam) * a.a)

    def test_pole_raises(self, terminal_plus_mass):
        cr = extract_canonical(assemble(terminal_plus_mass))
        with pytest.raises(AtResonance):
            evaluate_canonical(cr, 1.0j)


class TestNonResonantSampling:
    def test_clearance_respected(self):
        rng = np.random.default_rng(0)
        avoid = [1.0j, -1.0j, -0.5 + 0.0j]
        pts = sample_nonresonant(rng, avoid, 50)
        for lam in pts:
            assert min(abs(lam - a) for a in avoid) >= 1e-3
            assert 0.1 <= abs(lam) <= 10.0

    def test_deterministic(self):
        a = sample_nonresonant(np.random.default_rng(5), [1.0j], 10)
        b = sample_nonresonant(np.random.default_rng(5), [1.0j], 10)
        assert np.array_equal(a, b)


class TestCanonicalJson:
    def test_round_trip(self):
        net = random_network(21, 2, 2, 3, 0.5)
        cr = extract_canonical(assemble(net))
        obj = canonical_to_dict(cr)
        back = canonical_from_dict(obj)
        assert_allclose(back.A.a, cr.A.a)
        assert_allclose(back.Mbb, cr.Mbb)
        assert len(back.modes) == len(cr.modes)
        for m1, m2 in zip(back.modes, cr.modes):
            assert m1.sigma == m2.sigma
            assert_allclose(m1.R.a, m2.R.a)
        assert_allclose(back.terminal_positions, cr.terminal_positions)
        assert back.rayleigh == cr.rayleigh

    def test_unknown_field(self):
        obj = canonical_to_dict(extract_canonical(assemble(random_network(3, 2, 2, 1, 1.0))))
        obj["extra"] = 1
        with pytest.raises(SchemaError, match="extra"):
            canonical_from_dict(obj)

    def test_shape_mismatch(self):
        obj = canonical_to_dict(extract_canonical(assemble(random_network(3, 2, 2, 1, 1.0))))
        obj["Mbb"] = obj["Mbb"][:-1]
        with pytest.raises(SchemaError, match="Mbb"):
            canonical_from_dict(obj)

    def test_negative_sigma_is_representable(self):
        # hand-edited candidates must parse; the characterizer rejects them
        obj = canonical_to_dict(extract_canonical(assemble(random_network(16, 2, 2, 2, 1.0))))
        if obj["modes"]:
            obj["modes"][0]["sigma"] = -1.0
            cr = canonical_from_dict(obj)
            assert cr.modes[0].sigma == -1.0
