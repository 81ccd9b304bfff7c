import math

import numpy as np
import pytest

from cylsim.bloch import (
    BlochVector,
    CylinderSpace,
    DiagonalGate,
    MeasurementSpec,
    NotContainedError,
    PauliCoeffMatrix,
    RadiusDomainError,
    apply_gate_pauli,
    canonicalize_gate,
    extremal_split,
    measure_prob,
    phasing,
    post_measurement_state,
    radius,
    z_rotate,
)


def dense_gate_output(phi, v_a, v_b):
    """Independent route: explicit 4x4 conjugation by the diagonal unitary."""
    V = np.diag([1.0, 1.0, 1.0, np.exp(1j * phi)])
    out = V @ np.kron(v_a.dense(), v_b.dense()) @ V.conj().T
    return PauliCoeffMatrix.from_dense(out).m


def test_radius_examples():
    assert radius(BlochVector(0.3, 0.4, 0.5)) == pytest.approx(0.5, abs=1e-15)
    assert radius(BlochVector(0, 0, 1)) == 0.0
    assert radius(BlochVector(math.sin(math.radians(30)), 0,
                              math.cos(math.radians(30)))) == pytest.approx(0.5)
    with pytest.raises(RadiusDomainError):
        radius(BlochVector(0.1, 0.0, 1.5))


def test_phasing():
    v = phasing(BlochVector(0.4, 0.6, 0.8), 0.5)
    assert (v.x, v.y, v.z) == (0.2, 0.3, 0.8)
    v = BlochVector(0.12, -0.5, 0.3)
    assert phasing(v, 1.0) == v
    back = phasing(phasing(v, 2.0), 0.5)
    assert back.x == pytest.approx(v.x) and back.y == pytest.approx(v.y)


def test_z_rotate():
    v = z_rotate(BlochVector(1, 0, 0), math.pi / 2)
    assert v.x == pytest.approx(0, abs=1e-15)
    assert v.y == pytest.approx(1)
    pole = z_rotate(BlochVector(0, 0, 1), 1.234)
    assert (pole.x, pole.y, pole.z) == (0, 0, 1)
    v0 = BlochVector(0.3, -0.4, 0.5)
    v1 = z_rotate(v0, 2 * math.pi)
    assert v1.x == pytest.approx(v0.x, abs=1e-12)
    assert v1.y == pytest.approx(v0.y, abs=1e-12)


def test_z_rotate_preserves_radius():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        v = BlochVector(*rng.uniform(-1, 1, 2), rng.uniform(-1, 1))
        a = rng.uniform(0, 2 * math.pi)
        assert radius(z_rotate(v, a)) == pytest.approx(radius(v), abs=1e-12)


def test_canonicalize_gate_examples():
    assert canonicalize_gate(0, 0, 0, math.pi).phi == pytest.approx(math.pi)
    assert canonicalize_gate(0, 0, 0, 0).phi == 0.0
    assert canonicalize_gate(0.1, 0.2, 0.3, 0.5).phi == pytest.approx(0.1)


def test_gate_reconstruction_invariant():
    rng = np.random.default_rng(5)
    for _ in range(200):
        phis = rng.uniform(-2 * math.pi, 2 * math.pi, 4)
        gate = canonicalize_gate(*phis)
        original = np.exp(1j * phis)
        rebuilt = gate.diag()
        # match up to a global phase
        ratio = rebuilt / original
        assert np.max(np.abs(ratio - ratio[0])) < 1e-12


def test_extremal_split_examples():
    space = CylinderSpace(0.5)
    theta = 1.1
    v = BlochVector(0.5 * math.cos(0.3), 0.5 * math.sin(0.3), math.cos(theta))
    terms = extremal_split(v, space)
    assert len(terms) == 2
    weights = [w for w, _ in terms]
    assert weights[0] == pytest.approx((1 + math.cos(theta)) / 2)
    assert sum(weights) == pytest.approx(1.0, abs=1e-15)
    recon = sum(w * t.as_array() for w, t in terms)
    assert np.max(np.abs(recon - v.as_array())) < 1e-12

    single = extremal_split(BlochVector(0.5, 0, 1.0), space)
    assert len(single) == 1 and single[0][0] == 1.0

    small = BlochVector(0.05, 0, 0)
    terms = extremal_split(small, CylinderSpace(0.1))
    recon = sum(w * t.as_array() for w, t in terms)
    assert np.max(np.abs(recon - small.as_array())) < 1e-12

    with pytest.raises(NotContainedError):
        extremal_split(BlochVector(0.2, 0, 0), CylinderSpace(0.1))


def test_measure_prob_examples():
    p = measure_prob(BlochVector(0.5, 0, 0.8), MeasurementSpec("Z"))
    assert p.p_plus == pytest.approx(0.9) and p.p_minus == pytest.approx(0.1)
    assert not p.negative
    p = measure_prob(BlochVector(0.5, 0, 0.8), MeasurementSpec("XY", 0.0))
    assert p.p_plus == pytest.approx(0.75)
    p = measure_prob(BlochVector(1.2, 0, 0), MeasurementSpec("XY", 0.0))
    assert p.p_plus == pytest.approx(1.1) and p.p_minus == pytest.approx(-0.1)
    assert p.negative


def test_measure_prob_sums_to_one_exactly():
    rng = np.random.default_rng(7)
    for _ in range(300):
        v = BlochVector(*rng.uniform(-1.5, 1.5, 2), rng.uniform(-1, 1))
        m = MeasurementSpec("XY", rng.uniform(0, 2 * math.pi))
        p = measure_prob(v, m)
        assert p.p_plus + p.p_minus == 1.0


def test_measure_prob_duality_unit_radius():
    # vectors inside Cyl(1) give valid probabilities for every measurement
    rng = np.random.default_rng(13)
    omegas = np.linspace(0, 2 * math.pi, 17)
    for _ in range(200):
        rho = math.sqrt(rng.uniform(0, 1))
        az = rng.uniform(0, 2 * math.pi)
        v = BlochVector(rho * math.cos(az), rho * math.sin(az), rng.uniform(-1, 1))
        for om in omegas:
            p = measure_prob(v, MeasurementSpec("XY", om))
            assert 0.0 <= p.p_plus <= 1.0 and 0.0 <= p.p_minus <= 1.0
        p = measure_prob(v, MeasurementSpec("Z"))
        assert 0.0 <= p.p_plus <= 1.0


def test_post_measurement_state():
    assert post_measurement_state(MeasurementSpec("Z"), +1) == BlochVector(0, 0, 1)
    assert post_measurement_state(MeasurementSpec("Z"), -1) == BlochVector(0, 0, -1)
    assert post_measurement_state(MeasurementSpec("XY", 0.7), -1) == BlochVector(0, 0, 0)


def test_apply_gate_pauli_appendix_matrix():
    r_a, r_b = 0.3, 0.4
    m = apply_gate_pauli(math.pi, BlochVector(r_a, 0, 1), BlochVector(r_b, 0, 1)).m
    expected = np.array([
        [1, r_b, 0, 1],
        [r_a, 0, 0, r_a],
        [0, 0, r_a * r_b, 0],
        [1, r_b, 0, 1],
    ])
    assert np.max(np.abs(m - expected)) < 1e-12


def test_apply_gate_pauli_identity():
    v_a, v_b = BlochVector(0.2, -0.3, 0.4), BlochVector(-0.1, 0.25, -0.9)
    m = apply_gate_pauli(0.0, v_a, v_b).m
    assert np.max(np.abs(m - np.outer(v_a.coeffs(), v_b.coeffs()))) < 1e-14


def test_apply_gate_pauli_quarter_phase():
    m = apply_gate_pauli(math.pi / 2, BlochVector(1, 0, 1), BlochVector(1, 0, 1)).m
    assert m[1, 1] == pytest.approx(0.5)
    assert m[1, 2] == pytest.approx(0.5)
    assert m[2, 1] == pytest.approx(0.5)
    assert m[2, 2] == pytest.approx(0.5)
    dense = dense_gate_output(math.pi / 2, BlochVector(1, 0, 1), BlochVector(1, 0, 1))
    assert np.max(np.abs(m - dense)) < 1e-10


def test_apply_gate_pauli_matches_dense_conjugation():
    rng = np.random.default_rng(17)
    for _ in range(1000):
        phi = rng.uniform(0, 2 * math.pi)
        v_a = BlochVector(*rng.uniform(-0.7, 0.7, 2), rng.uniform(-1, 1))
        v_b = BlochVector(*rng.uniform(-0.7, 0.7, 2), rng.uniform(-1, 1))
        analytic = apply_gate_pauli(phi, v_a, v_b).m
        dense = dense_gate_output(phi, v_a, v_b)
        assert np.max(np.abs(analytic - dense)) < 1e-10


def test_apply_gate_pauli_diagonal_sector_invariant():
    rng = np.random.default_rng(19)
    idx = np.ix_([0, 3], [0, 3])
    for _ in range(1000):
        phi = rng.uniform(0, 2 * math.pi)
        v_a = BlochVector(*rng.uniform(-0.7, 0.7, 2), rng.uniform(-1, 1))
        v_b = BlochVector(*rng.uniform(-0.7, 0.7, 2), rng.uniform(-1, 1))
        out = apply_gate_pauli(phi, v_a, v_b).m
        product = np.outer(v_a.coeffs(), v_b.coeffs())
        assert np.max(np.abs(out[idx] - product[idx])) < 1e-14


def test_pauli_coeff_matrix_round_trip():
    rng = np.random.default_rng(23)
    v_a = BlochVector(0.3, -0.2, 0.5)
    v_b = BlochVector(-0.4, 0.1, -0.6)
    m = PauliCoeffMatrix.from_product(v_a, v_b)
    back = PauliCoeffMatrix.from_dense(m.to_dense())
    assert np.max(np.abs(back.m - m.m)) < 1e-12
    # random Hermitian with unit coefficient on I(x)I
    h = rng.normal(size=(4, 4))
    h[0, 0] = 1.0
    m2 = PauliCoeffMatrix(h)
    assert np.max(np.abs(PauliCoeffMatrix.from_dense(m2.to_dense()).m - h)) < 1e-12


def test_serialization():
    v = BlochVector(0.1, 0.2, -0.3)
    assert BlochVector.from_json(v.to_json()) == v
    m = PauliCoeffMatrix.from_product(v, BlochVector(0, 0, 1))
    m2 = PauliCoeffMatrix.from_json(m.to_json())
    assert np.max(np.abs(m2.m - m.m)) < 1e-15
    spec = MeasurementSpec("XY", 1.25, "quasi-destructive")
    assert MeasurementSpec.from_json(spec.to_json()) == spec


def test_cylinder_space_extrema():
    space = CylinderSpace(0.4)
    assert space.contains(BlochVector(0.4, 0, 1))
    assert not space.contains(BlochVector(0.5, 0, 0))
    assert space.breakpoints == ((-1.0, 0.4), (1.0, 0.4))
    with pytest.raises(ValueError):
        CylinderSpace(-0.1)


def test_diagonal_gate_entry_phases():
    gate = DiagonalGate(phi=1.0, local_a=0.2, local_b=-0.3, global_phase=0.5)
    p = gate.entry_phases()
    assert p[3] + p[0] - p[1] - p[2] == pytest.approx(1.0)
