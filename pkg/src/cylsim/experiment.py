"""Experiment specification and the radius ledger.

An experiment is a graph of nodes with single-particle inputs, an ordered
list of diagonal gates, and a measurement schedule.  Gates normally precede
all measurements; a gate may instead be anchored after a schedule entry
(`after_measurement`) to express quasi-destructive reuse, where measured
particles interact again.

The radius ledger is the feasibility bookkeeping: each gate grows its
endpoints' cylinder radii by lambda(phi) unless an endpoint has already been
measured (then the diagonal fast path applies and nothing grows), and a node
is measurable only while its radius is at most 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .bloch import BlochVector, MeasurementSpec, norm_angle
from .growth import PowerLawSpec, lambda_phi

LEDGER_SLACK = 1e-9


@dataclass(frozen=True)
class NodeInput:
    """Initial single-particle state: pure state at polar angle theta and the
    given azimuth, optionally shrunk toward the maximally mixed point
    (thermal noise shrinks the whole Bloch vector by 1 - 2 p_T)."""

    theta: float
    azimuth: float = 0.0
    shrink: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.shrink <= 1.0:
            raise ValueError("shrink must lie in (0, 1]")

    def bloch(self) -> BlochVector:
        s = math.sin(self.theta) * self.shrink
        return BlochVector(s * math.cos(self.azimuth), s * math.sin(self.azimuth),
                           math.cos(self.theta) * self.shrink)

    def radius(self) -> float:
        return abs(math.sin(self.theta)) * self.shrink

    def to_json(self) -> dict:
        return {"theta": self.theta, "azimuth": self.azimuth, "shrink": self.shrink}

    @classmethod
    def from_json(cls, data: dict) -> "NodeInput":
        return cls(float(data["theta"]), float(data.get("azimuth", 0.0)),
                   float(data.get("shrink", 1.0)))


@dataclass(frozen=True)
class AdaptiveRule:
    """Finite adaptive lookup: the measurement angle is chosen by the parity
    of the -1 outcomes recorded on the named nodes."""

    nodes: tuple[int, ...]
    angles: tuple[float, float]  # (even parity, odd parity)

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes), "angles": list(self.angles)}

    @classmethod
    def from_json(cls, data: dict) -> "AdaptiveRule":
        return cls(tuple(int(n) for n in data["nodes"]),
                   (float(data["angles"][0]), float(data["angles"][1])))


@dataclass(frozen=True)
class GateStep:
    edge: tuple[int, int]
    phi: float
    after_measurement: int | None = None  # schedule index this gate follows

    def to_json(self) -> dict:
        out = {"edge": list(self.edge), "phi": self.phi}
        if self.after_measurement is not None:
            out["after_measurement"] = self.after_measurement
        return out

    @classmethod
    def from_json(cls, data: dict) -> "GateStep":
        return cls((int(data["edge"][0]), int(data["edge"][1])),
                   float(data["phi"]), data.get("after_measurement"))


@dataclass(frozen=True)
class MeasureStep:
    node: int
    spec: MeasurementSpec
    adaptive: AdaptiveRule | None = None

    def to_json(self) -> dict:
        out = {"node": self.node, **self.spec.to_json()}
        if self.adaptive is not None:
            out["adaptive"] = self.adaptive.to_json()
        return out

    @classmethod
    def from_json(cls, data: dict) -> "MeasureStep":
        adaptive = None
        if data.get("adaptive") is not None:
            adaptive = AdaptiveRule.from_json(data["adaptive"])
        return cls(int(data["node"]), MeasurementSpec.from_json(data), adaptive)


def resolve_measure_angle(step: MeasureStep, outcomes: dict[int, int]) -> float:
    """Measurement angle after applying the adaptive rule to the recorded
    outcomes (parity of -1 results on the rule's nodes)."""
    if step.adaptive is None:
        return step.spec.omega
    parity = 0
    for node in step.adaptive.nodes:
        if node not in outcomes:
            raise ValueError(f"adaptive rule needs outcome of node {node} "
                             "before this measurement")
        if outcomes[node] < 0:
            parity ^= 1
    return norm_angle(step.adaptive.angles[parity])


@dataclass(frozen=True)
class SamplerSettings:
    num_samples: int = 10000
    seed: int = 0
    discretization: int = 40
    tolerance: float = 1e-7

    def to_json(self) -> dict:
        return {"num_samples": self.num_samples, "seed": self.seed,
                "discretization": self.discretization, "tolerance": self.tolerance}

    @classmethod
    def from_json(cls, data: dict) -> "SamplerSettings":
        return cls(int(data.get("num_samples", 10000)), int(data.get("seed", 0)),
                   int(data.get("discretization", 40)),
                   float(data.get("tolerance", 1e-7)))


@dataclass
class ExperimentSpec:
    """A cluster-like experiment: graph, inputs, gate list, schedule, sampler."""

    edges: list[tuple[int, int]]
    inputs: dict[int, NodeInput]
    gates: list[GateStep]
    schedule: list[MeasureStep]
    sampler: SamplerSettings = field(default_factory=SamplerSettings)

    def __post_init__(self):
        self.edges = [(int(a), int(b)) for a, b in self.edges]
        self.validate()

    def node_ids(self) -> list[int]:
        nodes = set(self.inputs)
        for a, b in self.edges:
            nodes.update((a, b))
        return sorted(nodes)

    def degree(self) -> dict[int, int]:
        deg = {node: 0 for node in self.node_ids()}
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def max_degree(self) -> int:
        deg = self.degree()
        return max(deg.values()) if deg else 0

    def timeline(self) -> list[tuple[str, object]]:
        """Events in execution order: unanchored gates first, then each
        measurement followed by the gates anchored after it."""
        events: list[tuple[str, object]] = [
            ("gate", g) for g in self.gates if g.after_measurement is None]
        for k, mstep in enumerate(self.schedule):
            events.append(("measure", mstep))
            events.extend(("gate", g) for g in self.gates
                          if g.after_measurement == k)
        return events

    def validate(self):
        nodes = set(self.node_ids())
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on node {a}")
        edge_set = {frozenset(e) for e in self.edges}
        for g in self.gates:
            if frozenset(g.edge) not in edge_set:
                raise ValueError(f"gate edge {g.edge} is not a graph edge")
            if g.after_measurement is not None and not (
                    0 <= g.after_measurement < len(self.schedule)):
                raise ValueError(f"gate anchored after missing schedule entry "
                                 f"{g.after_measurement}")
        for node in nodes:
            if node not in self.inputs:
                raise ValueError(f"node {node} has no input state")
        seen = set()
        for m in self.schedule:
            if m.node not in nodes:
                raise ValueError(f"measured node {m.node} does not exist")
            if m.node in seen:
                raise ValueError(f"node {m.node} measured twice")
            seen.add(m.node)
        # destructive-measured nodes must not appear in any later gate
        destroyed: set[int] = set()
        for kind, payload in self.timeline():
            if kind == "gate":
                if destroyed & set(payload.edge):
                    raise ValueError(
                        f"gate {payload.edge} touches a destructively "
                        "measured node")
            elif payload.spec.mode == "destructive":
                destroyed.add(payload.node)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "version": 1,
            "graph": [list(e) for e in self.edges],
            "inputs": {str(k): v.to_json() for k, v in self.inputs.items()},
            "gates": [g.to_json() for g in self.gates],
            "schedule": [m.to_json() for m in self.schedule],
            "sampler": self.sampler.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ExperimentSpec":
        if data.get("version", 1) != 1:
            raise ValueError(f"unsupported spec version {data.get('version')}")
        inputs = {int(k): NodeInput.from_json(v) for k, v in data["inputs"].items()}
        gates_field = data.get("gates", [])
        if isinstance(gates_field, dict) and "powerlaw" in gates_field:
            spec = PowerLawSpec(**gates_field["powerlaw"])
            edges, gates = powerlaw_chain_gates(sorted(inputs), spec)
        else:
            gates = [GateStep.from_json(g) for g in gates_field]
            edges = [tuple(e) for e in data.get("graph", [])]
        return cls(
            edges=edges,
            inputs=inputs,
            gates=gates,
            schedule=[MeasureStep.from_json(m) for m in data.get("schedule", [])],
            sampler=SamplerSettings.from_json(data.get("sampler", {})),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "ExperimentSpec":
        return cls.from_json(json.loads(text))


def powerlaw_chain_gates(nodes: list[int], spec: PowerLawSpec):
    """Expand a power-law interaction into explicit pair gates on a 1D chain
    (consecutive integer positions), skipping pairs beyond the cutoff."""
    if spec.dim != 1:
        raise ValueError("gate expansion is defined for 1D chains only")
    edges = []
    gates = []
    for i, a in enumerate(nodes):
        for j in range(i + 1, len(nodes)):
            distance = j - i
            if distance > spec.cutoff:
                break
            b = nodes[j]
            edges.append((a, b))
            gates.append(GateStep((a, b), spec.phase_at(distance)))
    return edges, gates


@dataclass
class LedgerRow:
    step: int
    kind: str  # "gate" | "measure"
    detail: str
    radii: dict[int, float]


@dataclass
class LedgerResult:
    trace: list[LedgerRow]
    verdict: str  # "simulable" | "infeasible"
    infeasible_step: int | None
    final_radii: dict[int, float]

    @property
    def simulable(self) -> bool:
        return self.verdict == "simulable"


def radius_ledger(spec: ExperimentSpec, policy: str = "measurement-aware") -> LedgerResult:
    """Per-node radius accounting for an experiment.

    static: every incident gate grows a node by lambda(phi), regardless of
    measurement timing.  measurement-aware: the timeline is walked in order;
    gates touching an already-measured (radius-0) node grow nothing, and a
    measured node's radius is checked (<= 1) at its measurement time, after
    which it drops to 0.
    """
    if policy not in ("static", "measurement-aware"):
        raise ValueError(f"unknown ledger policy {policy!r}")
    radii = {node: spec.inputs[node].radius() for node in spec.node_ids()}
    trace: list[LedgerRow] = []
    verdict, bad_step = "simulable", None

    if policy == "static":
        for g in spec.gates:
            lam = lambda_phi(g.phi)
            for node in g.edge:
                radii[node] *= lam
        for k, mstep in enumerate(spec.schedule):
            ok = radii[mstep.node] <= 1.0 + LEDGER_SLACK
            trace.append(LedgerRow(k, "measure", f"node {mstep.node}", dict(radii)))
            if not ok and verdict == "simulable":
                verdict, bad_step = "infeasible", k
        return LedgerResult(trace, verdict, bad_step, radii)

    measured: set[int] = set()
    for step, (kind, payload) in enumerate(spec.timeline()):
        if kind == "gate":
            a, b = payload.edge
            # zero-radius endpoints (measured, or Z-diagonal inputs) take the
            # diagonal fast path: no growth on either side
            if radii[a] > 0.0 and radii[b] > 0.0:
                lam = lambda_phi(payload.phi)
                radii[a] *= lam
                radii[b] *= lam
            trace.append(LedgerRow(step, "gate",
                                   f"{payload.edge} phi={payload.phi:.6g}",
                                   dict(radii)))
        else:
            node = payload.node
            ok = radii[node] <= 1.0 + LEDGER_SLACK
            trace.append(LedgerRow(step, "measure", f"node {node}", dict(radii)))
            if not ok and verdict == "simulable":
                verdict, bad_step = "infeasible", step
            radii[node] = 0.0
            measured.add(node)
    return LedgerResult(trace, verdict, bad_step, radii)
