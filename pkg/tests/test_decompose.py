import itertools
import math

import numpy as np
import pytest

from cylsim import decompose
from cylsim.bloch import BlochVector, CylinderSpace, apply_gate_pauli, radius
from cylsim.decompose import (
    DecompositionRequest,
    InfeasibleRequest,
    NonExtremalInput,
    canonicalize_inputs,
    coupling_operator,
    decompose_gate_output,
    hull_membership,
    min_output_radius,
    reconstruct,
    reduced_determinant,
)
from cylsim.growth import LAMBDA_CZ, GrowthQuery, lambda_phi, lemma1_feasible


def setup_function(_fn):
    decompose.reset_cache()


def test_reduced_determinant_boundary_zero():
    f = math.sqrt(math.sqrt(5) - 2)
    assert abs(reduced_determinant(f, f, math.pi)) < 1e-12


def test_reduced_determinant_examples():
    # direct evaluation at f_a = f_b = 0.1, phi = pi:
    # f^8 + 4 f^6 - 2 f^4 - 4 f^2 + 1
    assert reduced_determinant(0.1, 0.1, math.pi) == pytest.approx(0.95980401,
                                                                   abs=1e-10)
    # closed form 2 fB^2 (1 - cos phi)(fB^2 - 1) at f_a = 1
    assert reduced_determinant(1.0, 0.5, math.pi) == pytest.approx(-0.75, abs=1e-12)


def test_reduced_determinant_matches_numeric_det():
    rng = np.random.default_rng(29)
    for _ in range(300):
        f_a, f_b = rng.uniform(0.0, 1.2, 2)
        phi = rng.uniform(0.01, 2 * math.pi - 0.01)
        analytic = reduced_determinant(f_a, f_b, phi)
        numeric = np.linalg.det(coupling_operator(f_a, f_b, phi))
        assert abs(numeric.imag) < 1e-9
        assert analytic == pytest.approx(numeric.real, abs=1e-9)


def test_reduced_determinant_symmetries_exact():
    rng = np.random.default_rng(31)
    for _ in range(100):
        f_a, f_b = rng.uniform(0, 1, 2)
        phi = rng.uniform(0, 2 * math.pi)
        d = reduced_determinant(f_a, f_b, phi)
        assert reduced_determinant(f_b, f_a, phi) == d
        # -phi is the exactly representable reflection of phi mod 2*pi
        assert reduced_determinant(f_a, f_b, -phi) == d
        # the caller-side rounding of 2*pi - phi costs at most a few ulps
        assert reduced_determinant(f_a, f_b, 2 * math.pi - phi) == \
            pytest.approx(d, abs=5e-15)


def _random_extremal(rng, r):
    az = rng.uniform(0, 2 * math.pi)
    z = 1.0 if rng.random() < 0.5 else -1.0
    return BlochVector(r * math.cos(az), r * math.sin(az), z)


def test_canonicalize_round_trip_all_cases():
    """decompose, transform back, reconstruct: the Frobenius residual matches
    the canonical one (the frame maps are orthogonal on Pauli coefficients)."""
    rng = np.random.default_rng(37)
    for z_a, z_b in itertools.product((1.0, -1.0), repeat=2):
        for phi in (0.9, 2 * math.pi - 0.9):  # with and without the y-flip
            r_a, r_b = rng.uniform(0.05, 0.3, 2)
            az_a, az_b = rng.uniform(0, 2 * math.pi, 2)
            v_a = BlochVector(r_a * math.cos(az_a), r_a * math.sin(az_a), z_a)
            v_b = BlochVector(r_b * math.cos(az_b), r_b * math.sin(az_b), z_b)
            lam = lambda_phi(phi)
            req = DecompositionRequest(v_a, v_b, phi, r_a * lam, r_b * lam)
            canonical, frame = canonicalize_inputs(req)
            assert canonical.input_a.z == 1.0 and canonical.input_b.z == 1.0
            assert 0.0 <= canonical.phi <= math.pi

            terms = decompose_gate_output(req)
            target = apply_gate_pauli(phi, v_a, v_b)
            res_back = np.linalg.norm(reconstruct(terms).m - target.m)

            canon_terms = decompose_gate_output(canonical)
            canon_target = apply_gate_pauli(canonical.phi, canonical.input_a,
                                            canonical.input_b)
            res_canon = np.linalg.norm(reconstruct(canon_terms).m - canon_target.m)
            assert abs(res_back - res_canon) < 1e-10


def test_canonicalize_rejects_non_extremal():
    req = DecompositionRequest(BlochVector(0.1, 0, 0.5), BlochVector(0.1, 0, 1),
                               math.pi, 0.3, 0.3)
    with pytest.raises(NonExtremalInput):
        canonicalize_inputs(req)


def test_hull_membership_product_target():
    v_a, v_b = BlochVector(0.3, 0, 1), BlochVector(0.2, 0, -1)
    target = apply_gate_pauli(0.0, v_a, v_b)
    feasible, terms, residual = hull_membership(target, 0.3, 0.2, n=40)
    assert feasible and residual < 1e-9
    assert len(terms) == 1
    assert terms[0].weight == pytest.approx(1.0)


def test_hull_membership_boundary_feasible():
    for r in (0.1, 0.2):
        target = apply_gate_pauli(math.pi, BlochVector(r, 0, 1), BlochVector(r, 0, 1))
        feasible, terms, residual = hull_membership(
            target, LAMBDA_CZ * r, LAMBDA_CZ * r, n=40, tol=1e-7)
        assert feasible, f"boundary infeasible at r={r}, residual={residual}"
        assert residual < 1e-7
        recon = reconstruct(terms)
        assert np.max(np.abs(recon.m - target.m)) <= 1e-7 + 1e-12


def test_hull_membership_infeasible_inside_boundary():
    r = 0.2
    r_out = 0.9 * LAMBDA_CZ * r
    # the analytic predicate rejects first
    assert not lemma1_feasible(GrowthQuery(r / r_out, r / r_out, math.pi))
    target = apply_gate_pauli(math.pi, BlochVector(r, 0, 1), BlochVector(r, 0, 1))
    feasible, _terms, residual = hull_membership(target, r_out, r_out, n=40)
    assert not feasible
    assert residual > 1e-4


def test_decompose_fast_path_zero_radius():
    v_a = BlochVector(0, 0, 0.4)  # Z-diagonal, radius 0
    v_b = BlochVector(0.25, 0.1, 1.0)
    req = DecompositionRequest(v_a, v_b, 1.7, 0.0, radius(v_b))
    before = decompose.stats["fast_path"]
    terms = decompose_gate_output(req)
    assert decompose.stats["fast_path"] == before + 1
    assert len(terms) == 2
    target = apply_gate_pauli(1.7, v_a, v_b)
    assert np.max(np.abs(reconstruct(terms).m - target.m)) < 1e-12
    # partner radius unchanged
    for t in terms:
        assert radius(t.omega_b) == pytest.approx(radius(v_b), abs=1e-12)


def test_decompose_fast_path_pole():
    # pole input gives a single branch
    req = DecompositionRequest(BlochVector(0, 0, 1.0), BlochVector(0.2, 0, 1),
                               math.pi, 0.0, 0.2)
    terms = decompose_gate_output(req)
    assert len(terms) == 1 and terms[0].weight == 1.0


def test_decompose_identity_gate():
    v_a, v_b = BlochVector(0.3, 0.1, 1), BlochVector(0.2, -0.1, -1)
    req = DecompositionRequest(v_a, v_b, 0.0, radius(v_a), radius(v_b))
    terms = decompose_gate_output(req)
    assert terms == [decompose.DecompositionTerm(1.0, v_a, v_b)]


def test_decompose_lp_path_contract():
    r = 0.1
    req = DecompositionRequest(BlochVector(r, 0, 1), BlochVector(r, 0, 1),
                               math.pi, LAMBDA_CZ * r, LAMBDA_CZ * r)
    terms = decompose_gate_output(req)
    target = apply_gate_pauli(math.pi, req.input_a, req.input_b)
    assert np.max(np.abs(reconstruct(terms).m - target.m)) <= req.tolerance
    assert sum(t.weight for t in terms) == pytest.approx(1.0, abs=1e-12)
    for t in terms:
        assert radius(t.omega_a) <= req.r_out_a + 1e-9
        assert radius(t.omega_b) <= req.r_out_b + 1e-9
        assert abs(t.omega_a.z) == pytest.approx(1.0)


def test_decompose_infeasible_raises():
    r = 0.2
    req = DecompositionRequest(BlochVector(r, 0, 1), BlochVector(r, 0, 1),
                               math.pi, 0.9 * LAMBDA_CZ * r, 0.9 * LAMBDA_CZ * r)
    with pytest.raises(InfeasibleRequest):
        decompose_gate_output(req)


def test_decomposition_cache():
    r = 0.15
    req = DecompositionRequest(BlochVector(r, 0, 1), BlochVector(r, 0, 1),
                               2.0, 1.05 * lambda_phi(2.0) * r,
                               1.05 * lambda_phi(2.0) * r)
    decompose_gate_output(req)
    solves = decompose.stats["lp_solves"]
    # same request rotated: canonical cache must absorb it
    v_a = BlochVector(r * math.cos(1.0), r * math.sin(1.0), 1.0)
    req2 = DecompositionRequest(v_a, req.input_b, 2.0, req.r_out_a, req.r_out_b)
    decompose_gate_output(req2)
    assert decompose.stats["lp_solves"] == solves
    assert decompose.stats["cache_hits"] >= 1


def test_lp_agreement_with_analytic_minigrid():
    # small version of the acceptance grid (full run lives in acceptance)
    grid = np.linspace(0.15, 0.92, 6)
    phis = np.linspace(0.6, 2 * math.pi - 0.6, 4)
    band = 5e-3
    for f_a in grid:
        for f_b in grid:
            for phi in phis:
                target = apply_gate_pauli(phi, BlochVector(f_a, 0, 1),
                                          BlochVector(f_b, 0, 1))
                feasible, _t, _r = hull_membership(target, 1.0, 1.0, n=40,
                                                   refine_rounds=2)
                analytic = lemma1_feasible(GrowthQuery(f_a, f_b, phi))
                if feasible and not analytic:
                    pytest.fail("LP feasible where analytic says infeasible")
                if feasible != analytic:
                    assert abs(reduced_determinant(f_a, f_b, phi)) < band


def test_min_output_radius_cylinders():
    space = CylinderSpace(0.1)
    r_cz = min_output_radius(space, space, math.pi, tol=5e-4)
    assert r_cz == pytest.approx(LAMBDA_CZ * 0.1, abs=2e-3)
    r_id = min_output_radius(space, space, 0.0, tol=5e-4)
    assert r_id == pytest.approx(0.1, abs=1e-3)
    r_q = min_output_radius(space, space, math.pi / 2, tol=5e-4)
    assert r_q == pytest.approx(1.8392867552141612 * 0.1, abs=2e-3)


def test_decomposition_term_json():
    t = decompose.DecompositionTerm(0.5, BlochVector(0.1, 0, 1),
                                    BlochVector(0, 0.2, -1))
    doc = t.to_json()
    assert doc["p"] == 0.5 and doc["omegaA"] == [0.1, 0, 1]
    export = decompose.decomposition_to_json([t], residual=1e-9, n=40)
    assert export["N"] == 40 and len(export["terms"]) == 1


def test_bisect_no_upper_bracket():
    with pytest.raises(decompose.NoUpperBracket):
        decompose.bisect_min_radius(lambda r: False, tol=1e-3)
