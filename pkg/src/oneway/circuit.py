"""Quantum logic networks: the compiler's input language."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GATE_KINDS = ("CNOT", "H", "S", "ROT")

_SQ = 1.0 / math.sqrt(2.0)
H_MATRIX = np.array([[_SQ, _SQ], [_SQ, -_SQ]], dtype=complex)
S_MATRIX = np.array([[1, 0], [0, 1j]], dtype=complex)
X_MATRIX = np.array([[0, 1], [1, 0]], dtype=complex)
Z_MATRIX = np.array([[1, 0], [0, -1]], dtype=complex)


class CircuitError(ValueError):
    pass


def ux(alpha: float) -> np.ndarray:
    """``exp(-i alpha X / 2)``"""
    c, s = math.cos(alpha / 2), math.sin(alpha / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def uz(alpha: float) -> np.ndarray:
    """``exp(-i alpha Z / 2)``"""
    return np.diag([np.exp(-0.5j * alpha), np.exp(0.5j * alpha)])


def euler(xi: float, eta: float, zeta: float) -> np.ndarray:
    """``U_x(zeta) U_z(eta) U_x(xi)``"""
    return ux(zeta) @ uz(eta) @ ux(xi)


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple
    angles: tuple = ()

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise CircuitError(f"unknown gate {self.kind!r}")
        want = 2 if self.kind == "CNOT" else 1
        if len(self.qubits) != want:
            raise CircuitError(f"{self.kind} takes {want} qubit(s)")
        if self.kind == "ROT":
            if len(self.angles) != 3 or not all(math.isfinite(a) for a in self.angles):
                raise CircuitError("ROT needs three finite Euler angles")
        elif self.angles:
            raise CircuitError(f"{self.kind} takes no angles")
        if self.kind == "CNOT" and self.qubits[0] == self.qubits[1]:
            raise CircuitError("CNOT control and target coincide")

    def unitary(self) -> np.ndarray:
        """Matrix on ``self.qubits`` (control first for CNOT)."""
        if self.kind == "H":
            return H_MATRIX
        if self.kind == "S":
            return S_MATRIX
        if self.kind == "ROT":
            return euler(*self.angles)
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)

    def __str__(self):
        if self.kind == "CNOT":
            return f"CNOT({self.qubits[0]},{self.qubits[1]})"
        if self.kind == "ROT":
            return f"ROT({self.qubits[0]}, {', '.join(f'{a:.6g}' for a in self.angles)})"
        return f"{self.kind}({self.qubits[0]})"


def CNOT(c: int, t: int) -> Gate:
    return Gate("CNOT", (c, t))


def H(q: int) -> Gate:
    return Gate("H", (q,))


def S(q: int) -> Gate:
    return Gate("S", (q,))


def ROT(q: int, xi: float, eta: float, zeta: float) -> Gate:
    return Gate("ROT", (q,), (float(xi), float(eta), float(zeta)))


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.n < 1:
            raise CircuitError("circuit needs at least one qubit")
        for g in self.gates:
            for q in g.qubits:
                if not 0 <= q < self.n:
                    raise CircuitError(f"{g}: qubit {q} out of range for {self.n} wires")

    def validate_nearest_neighbour(self):
        for i, g in enumerate(self.gates):
            if g.kind == "CNOT" and abs(g.qubits[0] - g.qubits[1]) != 1:
                raise CircuitError(f"gate {i} {g}: CNOT wires are not nearest neighbours")

    @property
    def is_clifford(self) -> bool:
        return all(g.kind != "ROT" for g in self.gates)

    def to_dict(self) -> dict:
        gates = []
        for g in self.gates:
            if g.kind == "CNOT":
                gates.append({"type": "CNOT", "control": g.qubits[0], "target": g.qubits[1]})
            elif g.kind == "ROT":
                xi, eta, zeta = g.angles
                gates.append({"type": "ROT", "qubit": g.qubits[0], "xi": xi, "eta": eta, "zeta": zeta})
            else:
                gates.append({"type": g.kind, "qubit": g.qubits[0]})
        return {"version": 1, "qubits": self.n, "gates": gates}

    @classmethod
    def from_dict(cls, doc: dict) -> "Circuit":
        if not isinstance(doc, dict):
            raise CircuitError("circuit document must be a JSON object")
        if doc.get("version") != 1:
            raise CircuitError("unsupported circuit version (expected 1)")
        n = doc.get("qubits")
        if not isinstance(n, int) or isinstance(n, bool):
            raise CircuitError("'qubits' must be an integer")
        gates = []
        for i, gd in enumerate(doc.get("gates", [])):
            try:
                kind = gd["type"]
                if kind == "CNOT":
                    gates.append(CNOT(_int(gd["control"]), _int(gd["target"])))
                elif kind in ("H", "S"):
                    gates.append(Gate(kind, (_int(gd["qubit"]),)))
                elif kind == "ROT":
                    gates.append(ROT(_int(gd["qubit"]), _num(gd["xi"]), _num(gd["eta"]), _num(gd["zeta"])))
                else:
                    raise CircuitError(f"unknown gate type {kind!r}")
            except (KeyError, TypeError) as exc:
                raise CircuitError(f"gate {i}: malformed entry ({exc})") from None
        return cls(n, tuple(gates))


def _int(v) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise CircuitError(f"expected an integer index, got {v!r}")
    return v


def _num(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise CircuitError(f"expected a finite angle, got {v!r}")
    return float(v)


def random_circuit(rng: np.random.Generator, n: int, n_gates: int, *, clifford_only: bool = False,
                   kinds: tuple = GATE_KINDS) -> Circuit:
    """Random nearest-neighbour circuit; ROT angles are drawn away from the Clifford points."""
    kinds = tuple(k for k in kinds if not (k == "CNOT" and n < 2) and not (clifford_only and k == "ROT"))
    gates = []
    for _ in range(n_gates):
        kind = kinds[rng.integers(len(kinds))]
        if kind == "CNOT":
            a = int(rng.integers(n - 1))
            c, t = (a, a + 1) if rng.random() < 0.5 else (a + 1, a)
            gates.append(CNOT(c, t))
        elif kind == "ROT":
            q = int(rng.integers(n))
            angles = [generic_angle(rng) for _ in range(3)]
            gates.append(ROT(q, *angles))
        else:
            gates.append(Gate(kind, (int(rng.integers(n)),)))
    return Circuit(n, tuple(gates))


def generic_angle(rng: np.random.Generator) -> float:
    """Uniform angle in (-pi, pi) at least 0.05 away from multiples of pi/2."""
    while True:
        a = float(rng.uniform(-math.pi, math.pi))
        k = round(a / (math.pi / 2))
        if abs(a - k * math.pi / 2) > 0.05:
            return a
