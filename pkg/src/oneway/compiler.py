"""Lowering of logic networks onto cluster-state measurement patterns.

Each gate is replaced by a small cluster template. A template's outcome ->
byproduct relation is never written down by hand; :func:`derive_byproducts`
runs the template on a statevector for every outcome assignment and fits a
sign-free Pauli, then checks that the fit is affine over GF(2).

The compiled network is kept as a list of *stages*: one elementary rotation
(about x or z) for every rotation-chain site, and one symplectic map for
every Clifford template. Each measured site's byproduct is anchored at a
stage boundary, so forward and backward cones fall out of composing the
stage maps on either side of the anchor.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np

from oneway import pauli, qsim
from oneway.circuit import Circuit, CircuitError, Gate, H_MATRIX, S_MATRIX, euler
from oneway.cluster import ClusterGraph
from oneway.config import DEFAULT, SimConfig
from oneway.pauli import PauliImage, PropagationMap
from oneway.qsim import Basis

HALF_PI = math.pi / 2


class CompileError(ValueError):
    pass


class TemplateError(CompileError):
    """A template does not implement its target up to a Pauli byproduct."""


@dataclass(frozen=True)
class ByproductMap:
    """``P(s) = constant + sum_k s_k linear[k]`` on the template's wires."""

    constant: PauliImage
    linear: Mapping

    def __call__(self, outcomes: Mapping) -> PauliImage:
        img = self.constant
        for site, img_k in self.linear.items():
            if outcomes.get(site, 0):
                img = img + img_k
        return img


@dataclass(frozen=True)
class GateTemplate:
    name: str
    sites: tuple
    edges: tuple
    inputs: tuple
    outputs: tuple
    measured: tuple
    basis: Mapping
    # site -> sites whose outcome parity negates its angle
    adaptive: Mapping
    target: np.ndarray = field(compare=False)
    # ("rot", axis, site) for chain rotations, ("clifford",) otherwise
    stages: tuple = (("clifford",),)
    anchors: Mapping = field(default_factory=dict)
    offsets: Mapping = field(default_factory=dict)
    byproducts: ByproductMap | None = None

    @property
    def wires(self) -> int:
        return len(self.outputs)

    def angle(self, site, outcomes: Mapping) -> Basis:
        b = self.basis[site]
        flips = sum(outcomes.get(k, 0) for k in self.adaptive.get(site, ()))
        if b.kind == "XY" and flips % 2:
            return Basis.plane(-b.angle)
        return b


TOMO_STATES = (
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([1, 1], dtype=complex) / math.sqrt(2),
    np.array([1, 1j], dtype=complex) / math.sqrt(2),
)


def run_template(t: GateTemplate, inputs, outcomes: Mapping) -> qsim.QuantumState:
    """Run ``t`` on the product input ``inputs`` (one vector per wire) with forced outcomes.

    Returns the normalized state on the output sites, ordered like ``t.outputs``.
    """
    vecs = {s: v for s, v in zip(t.inputs, inputs)}
    order = tuple(t.inputs) + tuple(s for s in t.sites if s not in vecs)
    psi = qsim.product_state(order, [vecs.get(s, qsim.PLUS) for s in order])
    for a, b in t.edges:
        psi = qsim.apply_cz(psi, a, b)
    for site in t.measured:
        _, psi = qsim.measure(psi, site, t.angle(site, outcomes), outcome=outcomes[site])
    return psi.permuted(t.outputs)


def _fit_pauli(t: GateTemplate, target: np.ndarray, outcomes: Mapping, tol: float) -> PauliImage:
    w = t.wires
    inputs = list(itertools.product(TOMO_STATES, repeat=w))
    outs = [run_template(t, inp, outcomes).tensor.reshape(-1) for inp in inputs]
    fits = []
    for cand in pauli.all_images(w):
        op = pauli.to_pauli(cand) @ target
        ok = True
        for inp, out in zip(inputs, outs):
            want = op @ _kron(inp)
            if abs(np.vdot(want, out)) ** 2 < 1 - tol:
                ok = False
                break
        if ok:
            fits.append(cand)
    if len(fits) != 1:
        raise TemplateError(f"{t.name}: {len(fits)} Pauli fits for outcomes {dict(outcomes)}")
    return fits[0]


def _kron(vecs) -> np.ndarray:
    out = np.ones(1, dtype=complex)
    for v in vecs:
        out = np.kron(out, v)
    return out


def derive_byproducts(t: GateTemplate, target: np.ndarray, tol: float = 1e-10) -> ByproductMap:
    """Brute-force the outcome -> byproduct map of a template.

    Every outcome assignment is forced on every tomographically complete
    product input; the output must equal ``P(s) target input`` up to global
    phase for a single sign-free Pauli ``P(s)``, and ``P`` must be affine.
    """
    k = len(t.measured)
    if k > 6 or t.wires > 2:
        raise TemplateError("derive_byproducts handles at most 6 measured sites and 2 wires")
    table = {}
    for bits in itertools.product((0, 1), repeat=k):
        outcomes = dict(zip(t.measured, bits))
        table[bits] = _fit_pauli(t, target, outcomes, tol)
    zero_bits = (0,) * k
    constant = table[zero_bits]
    linear = {}
    for i, site in enumerate(t.measured):
        unit = tuple(int(j == i) for j in range(k))
        linear[site] = table[unit] + constant
    bmap = ByproductMap(constant, linear)
    for bits, img in table.items():
        if bmap(dict(zip(t.measured, bits))) != img:
            raise TemplateError(f"{t.name}: byproduct map is not affine over GF(2)")
    return bmap


def _with_byproducts(t: GateTemplate) -> GateTemplate:
    return GateTemplate(**{**t.__dict__, "byproducts": derive_byproducts(t, t.target)})


def _chain(name, angles, adaptive, target, stages, anchors) -> GateTemplate:
    n = len(angles) + 1
    return GateTemplate(
        name=name,
        sites=tuple(range(n)),
        edges=tuple((i, i + 1) for i in range(n - 1)),
        inputs=(0,),
        outputs=(n - 1,),
        measured=tuple(range(n - 1)),
        basis={i: Basis.plane(a) for i, a in enumerate(angles)},
        adaptive=adaptive,
        target=target,
        stages=stages,
        anchors=anchors,
        offsets={i: (0, i) for i in range(n)},
    )


@lru_cache(maxsize=256)
def rotation_template(xi: float, eta: float, zeta: float) -> GateTemplate:
    """Five-site chain for ``U_x(zeta) U_z(eta) U_x(xi)``.

    Site 0 is measured at angle 0; sites 1..3 carry base angles -xi, -eta,
    -zeta, negated by outcome parities {s0}, {s1}, {s0, s2}. Site 4 is the output.
    """
    t = _chain(
        "ROT",
        (0.0, -xi, -eta, -zeta),
        {1: (0,), 2: (1,), 3: (0, 2)},
        euler(xi, eta, zeta),
        (("rot", "x", 1), ("rot", "z", 2), ("rot", "x", 3)),
        {0: 0, 1: 1, 2: 2, 3: 3},
    )
    return _with_byproducts(t)


@lru_cache(maxsize=None)
def clifford_template(kind: str) -> GateTemplate:
    """Static X/Y patterns on the five-site chain.

    H uses the chain angles of ROT(pi/2, pi/2, pi/2); S uses those of
    ROT(0, -pi/2, 0), i.e. ``U_z(-pi/2) = Z S`` up to phase, which is where
    the constant z byproduct comes from.
    """
    if kind == "H":
        angles, target = (0.0, -HALF_PI, -HALF_PI, -HALF_PI), H_MATRIX
    elif kind == "S":
        angles, target = (0.0, 0.0, HALF_PI, 0.0), S_MATRIX
    else:
        raise CompileError(f"no Clifford template for {kind!r}")
    t = _chain(kind, angles, {}, target, (("clifford",),), {i: 1 for i in range(4)})
    return _with_byproducts(t)


@lru_cache(maxsize=None)
def wire_template() -> GateTemplate:
    t = _chain("WIRE", (0.0, 0.0), {}, np.eye(2, dtype=complex), (("clifford",),), {0: 1, 1: 1})
    return _with_byproducts(t)


@lru_cache(maxsize=None)
def cnot_template() -> GateTemplate:
    """Target chain t_in - m - t_out with the control site attached to m.

    Local sites: 0 control (input and output), 1 t_in, 2 m, 3 t_out.
    Wire 0 is the control, wire 1 the target.
    """
    t = GateTemplate(
        name="CNOT",
        sites=(0, 1, 2, 3),
        edges=((1, 2), (2, 3), (0, 2)),
        inputs=(0, 1),
        outputs=(0, 3),
        measured=(1, 2),
        basis={1: Basis.plane(0.0), 2: Basis.plane(0.0)},
        adaptive={},
        target=Gate("CNOT", (0, 1)).unitary(),
        stages=(("clifford",),),
        anchors={1: 1, 2: 1},
        offsets={0: (0, 0), 1: (1, 0), 2: (1, 1), 3: (1, 2)},
    )
    return _with_byproducts(t)


def template_for(gate: Gate) -> GateTemplate:
    if gate.kind == "ROT":
        return rotation_template(*gate.angles)
    if gate.kind == "CNOT":
        return cnot_template()
    return clifford_template(gate.kind)


# ---------------------------------------------------------------------------
# compiled patterns


@dataclass(frozen=True)
class Block:
    """Sites attached and measured for one gate, in network order."""

    gate: int
    new_sites: tuple
    edges: tuple
    measure: tuple


@dataclass(frozen=True)
class CompiledPattern:
    circuit: Circuit
    cluster: ClusterGraph
    basis: Mapping  # site -> Basis; adaptive sites carry their initial algorithm angle
    adaptive: frozenset
    site_wire: Mapping
    site_gate: Mapping
    F: Mapping  # site -> PauliImage at the network output
    F_init: PauliImage
    phi_init: Mapping
    fc: Mapping
    bc: Mapping
    inputs: frozenset
    outputs: tuple  # output site per wire
    interior: frozenset
    blocks: tuple
    initial: tuple  # first site per wire
    fillers: frozenset = frozenset()

    @property
    def n(self) -> int:
        return self.circuit.n

    @property
    def measured(self) -> tuple:
        """Every site that gets measured, readouts included."""
        return self.cluster.sites

    @property
    def passthrough(self) -> frozenset:
        return frozenset(self.inputs) & frozenset(self.outputs)

    def is_adaptive(self, site) -> bool:
        return site in self.adaptive


@dataclass
class _Event:
    pos: int
    image: PauliImage
    site: object = None  # None for a gate constant
    gate: int | None = None
    F: PauliImage | None = None
    fc: frozenset = frozenset()
    bc: frozenset = frozenset()
    dep: frozenset = frozenset()
    const: int = 0


@dataclass
class Network:
    """Uncommitted compile state; exposed for tests and diagnostics."""

    circuit: Circuit
    sites: list
    coords: dict
    edges: list
    basis: dict
    site_wire: dict
    site_gate: dict
    stages: list
    rot_stage: dict  # site -> stage index
    events: list
    blocks: list
    initial: tuple
    outputs: tuple
    base_angle: dict


def classify_angle(phi: float, tol: float = DEFAULT.angle_tol) -> str:
    """'x' if B(phi) == B(-phi) with the same labels, 'y' if labels swap, else 'adaptive'."""
    a = math.remainder(phi, 2 * math.pi)
    if abs(a) <= tol or abs(abs(a) - math.pi) <= tol:
        return "x"
    if abs(abs(a) - HALF_PI) <= tol:
        return "y"
    return "adaptive"


def build_network(c: Circuit, *, align: bool = False) -> Network:
    try:
        c.validate_nearest_neighbour()
    except CircuitError as exc:
        raise CompileError(str(exc)) from None
    n = c.n
    counter = itertools.count()
    sites, coords, edges, basis = [], {}, [], {}
    site_wire, site_gate = {}, {}
    stages: list[PropagationMap] = []
    rot_stage, events, blocks, base_angle = {}, [], [], {}

    def new_site(wire, col):
        s = next(counter)
        sites.append(s)
        coords[s] = (2 * wire, col)
        site_wire[s] = wire
        return s

    cur = [new_site(w, 0) for w in range(n)]
    col = [0] * n
    initial = tuple(cur)

    def place(gi: int, t: GateTemplate, wires: tuple, gate: Gate | None):
        local = {}
        for lw, w in enumerate(wires):
            local[t.inputs[lw]] = cur[w]
        new = []
        for ls in t.sites:
            if ls in local:
                continue
            dw, dc = t.offsets[ls]
            w = wires[dw]
            s = new_site(w, col[w] + dc)
            local[ls] = s
            new.append(s)
        tedges = tuple((local[a], local[b]) for a, b in t.edges)
        edges.extend(tedges)
        base = len(stages)
        for st in t.stages:
            if st[0] == "rot":
                _, axis, ls = st
                rot_stage[local[ls]] = len(stages)
                stages.append(pauli.rotation_stage(n, wires[0], axis, local[ls]))
            elif gate is None:
                stages.append(PropagationMap.identity(n))
            else:
                stages.append(pauli.gate_propagation_map(gate, n))
        for ls in t.measured:
            s = local[ls]
            basis[s] = t.basis[ls]
            site_gate[s] = gi
            if ls in t.adaptive:
                base_angle[s] = t.basis[ls].angle
            img = t.byproducts.linear[ls].embed(n, wires)
            events.append(_Event(base + t.anchors[ls], img, site=s))
        if t.byproducts.constant:
            events.append(_Event(len(stages), t.byproducts.constant.embed(n, wires), gate=gi))
        blocks.append(Block(gi, tuple(new), tedges, tuple(local[ls] for ls in t.measured)))
        for lw, w in enumerate(wires):
            cur[w] = local[t.outputs[lw]]
            col[w] = coords[cur[w]][1]

    for gi, g in enumerate(c.gates):
        wires = tuple(g.qubits)
        if align and g.kind == "CNOT":
            c_w, t_w = wires
            while col[c_w] != col[t_w]:
                lag = c_w if col[c_w] < col[t_w] else t_w
                place(-1, wire_template(), (lag,), None)
        place(gi, template_for(g), wires, g)

    outputs = tuple(cur)
    for w, s in enumerate(outputs):
        basis[s] = Basis.z()
        site_gate.setdefault(s, len(c.gates))
        events.append(_Event(len(stages), PauliImage.x(n, w), site=s))

    net = Network(c, sites, coords, edges, basis, site_wire, site_gate, stages, rot_stage,
                  events, blocks, initial, outputs, base_angle)
    _propagate(net)
    return net


def _propagate(net: Network):
    n = net.circuit.n
    S = len(net.stages)
    prefix = [PropagationMap.identity(n)]
    for st in net.stages:
        prefix.append(pauli.compose([prefix[-1], st]))
    suffix = [PropagationMap.identity(n)] * (S + 1)
    for i in range(S - 1, -1, -1):
        suffix[i] = pauli.compose([net.stages[i], suffix[i + 1]])
    for ev in net.events:
        fwd, back = suffix[ev.pos], prefix[ev.pos]
        ev.F = fwd.apply(ev.image)
        ev.fc = frozenset(fwd.triggered(ev.image))
        ev.bc = frozenset(back.triggered(back.inverse_apply(ev.image)))


def compile(c: Circuit, *, align: bool = False, config: SimConfig = DEFAULT) -> CompiledPattern:
    """Place templates, propagate byproducts to the output side, and fix initial angles."""
    net = build_network(c, align=align)
    n = c.n
    kind = {s: classify_angle(net.basis[s].angle, config.angle_tol) for s in net.rot_stage}
    adaptive = frozenset(s for s, k in kind.items() if k == "adaptive")

    # Static-Y chain sites are measured at their base angle; when the adaptive
    # rule would have negated it the outcome label swaps instead. Rewrite each
    # such outcome as t_j + (parity of what would have flipped it) and carry
    # that substitution into images, cones and angles.
    for ev in net.events:
        if ev.site is None:
            ev.dep, ev.const = frozenset(), 1
        else:
            ev.dep, ev.const = frozenset([ev.site]), 0
    by_site = {ev.site: ev for ev in net.events if ev.site is not None}
    for j in sorted((s for s, k in kind.items() if k == "y"), key=net.rot_stage.get):
        dep, const = {j}, 0
        for ev in net.events:
            if j in ev.fc:
                dep ^= ev.dep
                const ^= ev.const
        by_site[j].dep, by_site[j].const = frozenset(dep), const

    F = {s: pauli.zero(n) for s in by_site}
    F_init = pauli.zero(n)
    fc = {s: set() for s in by_site}
    bc = {s: set() for s in by_site}
    flips = {a: 0 for a in adaptive}
    for ev in net.events:
        for m in ev.dep:
            F[m] = F[m] + ev.F
            fc[m] ^= ev.fc & adaptive
            bc[m] ^= ev.bc & adaptive
        if ev.const:
            F_init = F_init + ev.F
            for a in ev.fc & adaptive:
                flips[a] ^= 1

    basis = dict(net.basis)
    phi_init = {}
    for a in adaptive:
        phi = net.base_angle[a] * (-1) ** flips[a]
        phi_init[a] = phi
        basis[a] = Basis.plane(phi)

    graph = ClusterGraph.build(net.sites, net.edges, net.coords)
    outputs = net.outputs
    inputs = frozenset(net.initial)
    interior = frozenset(s for s in net.sites if s not in inputs and s not in outputs)
    return CompiledPattern(
        circuit=c,
        cluster=graph,
        basis=basis,
        adaptive=adaptive,
        site_wire=dict(net.site_wire),
        site_gate=dict(net.site_gate),
        F=F,
        F_init=F_init,
        phi_init=phi_init,
        fc={s: frozenset(v) for s, v in fc.items()},
        bc={s: frozenset(v) for s, v in bc.items()},
        inputs=inputs,
        outputs=outputs,
        interior=interior,
        blocks=tuple(net.blocks),
        initial=net.initial,
    )


def embed_rectangular(p: CompiledPattern, max_qubits: int = DEFAULT.max_qubits) -> CompiledPattern:
    """Fill the layout's bounding box with filler sites.

    Fillers couple to every lattice neighbour at unit distance and are
    measured in Z before anything else; template edges between real sites
    are kept as they are.
    """
    coords = dict(p.cluster.coords)
    rows = [r for r, _ in coords.values()]
    cols = [c for _, c in coords.values()]
    taken = {v: s for s, v in coords.items()}
    nxt = max(p.cluster.sites) + 1
    fillers = []
    for r in range(min(rows), max(rows) + 1):
        for c in range(min(cols), max(cols) + 1):
            if (r, c) not in taken:
                taken[(r, c)] = nxt
                coords[nxt] = (r, c)
                fillers.append(nxt)
                nxt += 1
    if len(coords) > max_qubits:
        raise qsim.SizeLimitError(f"embedded lattice has {len(coords)} sites (limit {max_qubits})")
    fset = set(fillers)
    edges = set(p.cluster.edges)
    for f in fillers:
        r, c = coords[f]
        for dr, dc in ((0, 1), (1, 0), (0, -1), (-1, 0)):
            other = taken.get((r + dr, c + dc))
            if other is not None:
                edges.add((min(f, other), max(f, other)))
    graph = ClusterGraph.build(tuple(p.cluster.sites) + tuple(fillers), edges, coords)
    basis = dict(p.basis)
    F = dict(p.F)
    for f in fillers:
        basis[f] = Basis.z()
        F[f] = pauli.zero(p.n)
    return CompiledPattern(**{**p.__dict__, "cluster": graph, "basis": basis, "F": F,
                              "fillers": frozenset(fset),
                              "fc": {**p.fc, **{f: frozenset() for f in fillers}},
                              "bc": {**p.bc, **{f: frozenset() for f in fillers}}})
