"""JSON forms of circuits, patterns, schedules and summaries.

GF(2) vectors are hex strings of the packed image (bit ``i`` = x on wire
``i``, bit ``n + i`` = z on wire ``i``), so the lowest hex digit covers the
lowest wires. Angles are radians rounded to 15 significant digits.
"""

from __future__ import annotations

import json
from pathlib import Path

from oneway.circuit import Circuit
from oneway.cluster import ClusterGraph
from oneway.compiler import Block, CompiledPattern
from oneway.pauli import PauliImage
from oneway.qsim import Basis
from oneway.scheduler import Schedule

PATTERN_VERSION = 1


class FormatError(ValueError):
    pass


def _angle(a: float) -> float:
    return float(f"{a:.15g}")


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def read_json(path) -> object:
    """Parse a JSON file; decode errors carry line and column."""
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def read_circuit(path) -> Circuit:
    return Circuit.from_dict(read_json(path))


def pattern_to_dict(p: CompiledPattern) -> dict:
    roles = {}
    for s in p.cluster.sites:
        if s in p.fillers:
            roles[s] = "filler"
        elif s in p.outputs:
            roles[s] = "output"
        elif s in p.inputs:
            roles[s] = "input"
        else:
            roles[s] = "interior"
    sites = []
    for s in p.cluster.sites:
        b = p.basis[s]
        row, col = p.cluster.coords.get(s, (0, 0))
        sites.append({
            "id": s,
            "row": row,
            "col": col,
            "role": roles[s],
            "wire": p.site_wire.get(s),
            "gate": p.site_gate.get(s),
            "basis": b.kind,
            "angle": _angle(b.angle) if b.kind == "XY" else None,
            "adaptive": s in p.adaptive,
            "F": p.F[s].hex(),
            "fc": sorted(p.fc.get(s, ())),
            "bc": sorted(p.bc.get(s, ())),
        })
    return {
        "version": PATTERN_VERSION,
        "circuit": p.circuit.to_dict(),
        "qubits": p.n,
        "sites": sites,
        "edges": [list(e) for e in p.cluster.sorted_edges()],
        "F_init": p.F_init.hex(),
        "initial": list(p.initial),
        "outputs": list(p.outputs),
        "blocks": [{"gate": b.gate, "new_sites": list(b.new_sites),
                    "edges": [list(e) for e in b.edges], "measure": list(b.measure)} for b in p.blocks],
    }


def pattern_from_dict(doc: dict) -> CompiledPattern:
    try:
        if doc.get("version") != PATTERN_VERSION:
            raise FormatError("unsupported pattern version")
        c = Circuit.from_dict(doc["circuit"])
        n = c.n
        if doc["qubits"] != n:
            raise FormatError("qubit count disagrees with the embedded circuit")
        ids = [sd["id"] for sd in doc["sites"]]
        coords = {sd["id"]: (sd["row"], sd["col"]) for sd in doc["sites"]}
        graph = ClusterGraph.build(ids, [tuple(e) for e in doc["edges"]], coords)
        basis, F, fc, bc, wire, gate = {}, {}, {}, {}, {}, {}
        adaptive, fillers, phi = set(), set(), {}
        for sd in doc["sites"]:
            s = sd["id"]
            basis[s] = Basis.z() if sd["basis"] == "Z" else Basis.plane(float(sd["angle"]))
            F[s] = PauliImage.from_hex(n, sd["F"])
            fc[s] = frozenset(sd["fc"])
            bc[s] = frozenset(sd["bc"])
            if sd.get("wire") is not None:
                wire[s] = sd["wire"]
            if sd.get("gate") is not None:
                gate[s] = sd["gate"]
            if sd["adaptive"]:
                if basis[s].kind != "XY":
                    raise FormatError(f"site {s} is adaptive but not planar")
                adaptive.add(s)
                phi[s] = basis[s].angle
            if sd["role"] == "filler":
                fillers.add(s)
        initial = tuple(doc["initial"])
        outputs = tuple(doc["outputs"])
        blocks = tuple(Block(b["gate"], tuple(b["new_sites"]), tuple(tuple(e) for e in b["edges"]),
                             tuple(b["measure"])) for b in doc["blocks"])
        inputs = frozenset(initial)
        return CompiledPattern(
            circuit=c, cluster=graph, basis=basis, adaptive=frozenset(adaptive),
            site_wire=wire, site_gate=gate, F=F, F_init=PauliImage.from_hex(n, doc["F_init"]),
            phi_init=phi, fc=fc, bc=bc, inputs=inputs, outputs=outputs,
            interior=frozenset(s for s in ids if s not in inputs and s not in outputs and s not in fillers),
            blocks=blocks, initial=initial, fillers=frozenset(fillers),
        )
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"malformed pattern: {exc}") from None


def read_pattern(path) -> CompiledPattern:
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise FormatError("pattern must be a JSON object")
    return pattern_from_dict(doc)


def schedule_to_dict(s: Schedule) -> dict:
    return {"version": 1, "t_max": s.t_max, "rounds": [list(q) for q in s.rounds]}


def schedule_from_dict(doc: dict) -> Schedule:
    try:
        return Schedule(tuple(tuple(q) for q in doc["rounds"]))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"malformed schedule: {exc}") from None
