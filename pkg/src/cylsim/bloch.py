"""Single-particle state geometry and two-particle Pauli algebra.

Bloch vectors here are allowed to leave the Bloch sphere: a vector is any
(x, y, z) with |z| <= 1, representing the normalised Hermitian operator
(I + x X + y Y + z Z) / 2.  Cylinder state spaces bound only the xy-radius,
so they contain non-positive operators whenever the radius is positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

TWO_PI = 2.0 * math.pi

# Pauli basis, indexed 0..3 = (I, X, Y, Z).
PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


class RadiusDomainError(ValueError):
    """Raised for vectors with |z| > 1, which have no valid radius."""


class NotContainedError(ValueError):
    """Raised when a vector is not inside the requested state space."""


def norm_angle(a: float) -> float:
    """Normalise an angle to [0, 2*pi)."""
    return a % TWO_PI


@dataclass(frozen=True, slots=True)
class BlochVector:
    """Coefficients (x, y, z) of the Pauli X, Y, Z parts of a unit-trace operator."""

    x: float
    y: float
    z: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def coeffs(self) -> np.ndarray:
        """Length-4 Pauli coefficient vector (1, x, y, z)."""
        return np.array([1.0, self.x, self.y, self.z])

    def dense(self) -> np.ndarray:
        """The 2x2 Hermitian matrix (I + xX + yY + zZ)/2."""
        return 0.5 * (PAULI[0] + self.x * PAULI[1] + self.y * PAULI[2] + self.z * PAULI[3])

    def azimuth(self) -> float:
        return norm_angle(math.atan2(self.y, self.x))

    def to_json(self) -> list[float]:
        return [self.x, self.y, self.z]

    @classmethod
    def from_json(cls, data) -> "BlochVector":
        x, y, z = data
        return cls(float(x), float(y), float(z))


def radius(v: BlochVector) -> float:
    """Radius of the smallest cylinder containing v, i.e. sqrt(x^2 + y^2)."""
    if abs(v.z) > 1.0 + 1e-12:
        raise RadiusDomainError(f"|z| = {abs(v.z)} exceeds 1")
    return math.hypot(v.x, v.y)


def phasing(v: BlochVector, r: float) -> BlochVector:
    """Scale the xy-components by r (dephasing for r < 1, inverse for r > 1)."""
    return BlochVector(r * v.x, r * v.y, v.z)


def z_rotate(v: BlochVector, angle: float) -> BlochVector:
    """Rotate the xy-components by `angle` about the z axis."""
    c, s = math.cos(angle), math.sin(angle)
    return BlochVector(c * v.x - s * v.y, s * v.x + c * v.y, v.z)


def x_conjugate(v: BlochVector) -> BlochVector:
    """Bloch-vector action of conjugation by Pauli X: (x, -y, -z)."""
    return BlochVector(v.x, -v.y, -v.z)


def y_reflect(v: BlochVector) -> BlochVector:
    """Complex conjugation in the computational basis: (x, -y, z)."""
    return BlochVector(v.x, -v.y, v.z)


@dataclass(frozen=True, slots=True)
class CylinderSpace:
    """Cylinder of Bloch vectors: x^2 + y^2 <= r^2, |z| <= 1."""

    r: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("cylinder radius must be >= 0")

    def contains(self, v: BlochVector, tol: float = 1e-12) -> bool:
        return abs(v.z) <= 1.0 + tol and math.hypot(v.x, v.y) <= self.r + tol

    @property
    def breakpoints(self) -> tuple[tuple[float, float], ...]:
        """Extremal circles as (z, radius) pairs, for decomposition machinery."""
        return ((-1.0, self.r), (1.0, self.r))


def extremal_split(v: BlochVector, space: CylinderSpace):
    """Split v into at most two extremal-z points of `space` with convex weights.

    The split keeps (x, y) fixed and moves z to +-1; the endpoints sit on the
    circle of v's own radius, which is the working extremal circle for all
    downstream feasibility checks (those are monotone in the input radius).
    """
    if not space.contains(v, tol=1e-9):
        raise NotContainedError(f"{v} not in Cyl({space.r})")
    if v.z >= 1.0:
        return [(1.0, BlochVector(v.x, v.y, 1.0))]
    if v.z <= -1.0:
        return [(1.0, BlochVector(v.x, v.y, -1.0))]
    w_plus = (1.0 + v.z) / 2.0
    return [
        (w_plus, BlochVector(v.x, v.y, 1.0)),
        (1.0 - w_plus, BlochVector(v.x, v.y, -1.0)),
    ]


@dataclass(frozen=True, slots=True)
class MeasurementSpec:
    """A cylindrical measurement: Z eigenbasis, or an eigenbasis of
    cos(omega) X + sin(omega) Y."""

    kind: str  # "Z" | "XY"
    omega: float = 0.0
    mode: str = "destructive"  # "destructive" | "quasi-destructive"

    def __post_init__(self):
        if self.kind not in ("Z", "XY"):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        if self.mode not in ("destructive", "quasi-destructive"):
            raise ValueError(f"unknown measurement mode {self.mode!r}")
        object.__setattr__(self, "omega", norm_angle(self.omega))

    def axis(self) -> np.ndarray:
        """Measurement direction as a Bloch 3-vector."""
        if self.kind == "Z":
            return np.array([0.0, 0.0, 1.0])
        return np.array([math.cos(self.omega), math.sin(self.omega), 0.0])

    def to_json(self) -> dict:
        return {"kind": self.kind, "omega": self.omega, "mode": self.mode}

    @classmethod
    def from_json(cls, data: dict) -> "MeasurementSpec":
        return cls(data["kind"], float(data.get("omega", 0.0)),
                   data.get("mode", "destructive"))


class MeasureProbs(NamedTuple):
    p_plus: float
    p_minus: float
    negative: bool  # set when either value < -1e-12 (radius > 1 inputs)


def measure_prob(v: BlochVector, m: MeasurementSpec) -> MeasureProbs:
    """Outcome quasi-probabilities for measuring v.  Values may leave [0, 1]
    when the vector's radius exceeds 1; callers decide what that means."""
    if m.kind == "Z":
        s = v.z
    else:
        s = v.x * math.cos(m.omega) + v.y * math.sin(m.omega)
    # complement the larger value so the pair sums to 1 exactly (Sterbenz)
    if s >= 0.0:
        p_plus = (1.0 + s) / 2.0
        p_minus = 1.0 - p_plus
    else:
        p_minus = (1.0 - s) / 2.0
        p_plus = 1.0 - p_minus
    return MeasureProbs(p_plus, p_minus, min(p_plus, p_minus) < -1e-12)


def post_measurement_state(m: MeasurementSpec, outcome: int) -> BlochVector:
    """State of the measured particle after total Z-dephasing.

    Z outcomes keep their pole; an XY projection dephases to the maximally
    mixed point."""
    if m.kind == "Z":
        return BlochVector(0.0, 0.0, 1.0 if outcome > 0 else -1.0)
    return BlochVector(0.0, 0.0, 0.0)


@dataclass(frozen=True, slots=True)
class DiagonalGate:
    """Two-qubit diagonal unitary in canonical form: a controlled-phase phi
    plus absorbed local Z-rotations and a global phase.

    The entry phases are exp(i*(global + localA*a + localB*b + phi*a*b)) for
    basis state |ab>."""

    phi: float
    local_a: float = 0.0
    local_b: float = 0.0
    global_phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phi", norm_angle(self.phi))

    def entry_phases(self) -> np.ndarray:
        """The four diagonal phases (phi1..phi4) of the reconstructed unitary."""
        g, a, b = self.global_phase, self.local_a, self.local_b
        return np.array([g, g + b, g + a, g + a + b + self.phi])

    def diag(self) -> np.ndarray:
        """Diagonal of the 4x4 unitary."""
        return np.exp(1j * self.entry_phases())


def canonicalize_gate(phi1: float, phi2: float, phi3: float, phi4: float) -> DiagonalGate:
    """Split diag(e^{i phi1}, .., e^{i phi4}) into canonical phase and locals.

    phi = phi4 + phi1 - phi2 - phi3 (mod 2*pi) is the only entangling
    parameter; the rest are local Z-rotations and a global phase."""
    return DiagonalGate(
        phi=norm_angle(phi4 + phi1 - phi2 - phi3),
        local_a=phi3 - phi1,
        local_b=phi2 - phi1,
        global_phase=phi1,
    )


@dataclass(frozen=True)
class PauliCoeffMatrix:
    """A normalised two-particle operator as the 4x4 real matrix of Pauli
    product coefficients, rows/cols indexed over (I, X, Y, Z)."""

    m: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("PauliCoeffMatrix needs a 4x4 array")
        if abs(m[0, 0] - 1.0) > 1e-9:
            raise ValueError("operator must be normalised: m[0][0] = 1")
        object.__setattr__(self, "m", m)

    def to_dense(self) -> np.ndarray:
        """The 4x4 complex Hermitian matrix (1/4) sum_ij m_ij sigma_i x sigma_j."""
        out = np.zeros((4, 4), dtype=complex)
        for i in range(4):
            for j in range(4):
                out += self.m[i, j] * np.kron(PAULI[i], PAULI[j])
        return 0.25 * out

    @classmethod
    def from_dense(cls, rho: np.ndarray, tol: float = 1e-9) -> "PauliCoeffMatrix":
        m = np.empty((4, 4))
        for i in range(4):
            for j in range(4):
                c = np.trace(np.kron(PAULI[i], PAULI[j]).conj().T @ rho)
                if abs(c.imag) > tol:
                    raise ValueError(f"non-Hermitian input: imag coefficient {c.imag}")
                m[i, j] = c.real
        return cls(m)

    @classmethod
    def from_product(cls, v_a: BlochVector, v_b: BlochVector) -> "PauliCoeffMatrix":
        return cls(np.outer(v_a.coeffs(), v_b.coeffs()))

    def to_json(self) -> list[float]:
        return [float(x) for x in self.m.reshape(16)]

    @classmethod
    def from_json(cls, data) -> "PauliCoeffMatrix":
        return cls(np.asarray(data, dtype=float).reshape(4, 4))


def apply_gate_pauli(phi: float, v_a: BlochVector, v_b: BlochVector) -> PauliCoeffMatrix:
    """Pauli coefficients of V_phi (rho_A x rho_B) V_phi^dag for a product input.

    Computed in closed form from the sector structure of the diagonal gate:
    the (I,Z)x(I,Z) block is invariant, a coherent particle's xy-vector is
    rotated by phi inside the partner's |1> sector, and in the doubly
    coherent block the co-rotating component picks up the phase while the
    counter-rotating one is fixed.  No dense conjugation is involved, so this
    stays an independent route from the quantum oracle.
    """
    m = np.outer(v_a.coeffs(), v_b.coeffs())
    c, s = math.cos(phi), math.sin(phi)
    rot = np.array([[c, -s], [s, c]])
    out = m.copy()

    # A diagonal, B coherent: split A into |0><0|, |1><1|; B rotates with A=|1>.
    u, w = m[0, 1:3], m[3, 1:3]
    r_minus = rot @ (u - w)
    out[0, 1:3] = ((u + w) + r_minus) / 2.0
    out[3, 1:3] = ((u + w) - r_minus) / 2.0

    # A coherent, B diagonal: symmetric.
    u, w = m[1:3, 0], m[1:3, 3]
    r_minus = rot @ (u - w)
    out[1:3, 0] = ((u + w) + r_minus) / 2.0
    out[1:3, 3] = ((u + w) - r_minus) / 2.0

    # Both coherent: (c1, c2) rotates by phi, (c3, c4) is invariant.
    blk = m[1:3, 1:3]
    c1 = (blk[0, 0] - blk[1, 1]) / 2.0
    c2 = (blk[0, 1] + blk[1, 0]) / 2.0
    c3 = (blk[0, 0] + blk[1, 1]) / 2.0
    c4 = (blk[1, 0] - blk[0, 1]) / 2.0
    c1p, c2p = rot @ np.array([c1, c2])
    out[1, 1] = c3 + c1p
    out[1, 2] = c2p - c4
    out[2, 1] = c2p + c4
    out[2, 2] = c3 - c1p
    return PauliCoeffMatrix(out)
