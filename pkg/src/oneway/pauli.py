"""Sign-free Pauli operators as vectors over GF(2).

An n-qubit Pauli operator, with its sign dropped, is stored as the 2n-bit
vector ``(x_1..x_n, z_1..z_n)`` and read back as
``prod_i X_i^{x_i} Z_i^{z_i}``. :class:`PauliImage` packs that vector into an
int: bit ``i`` holds ``x_i`` and bit ``n + i`` holds ``z_i``.

Clifford gates act on images by symplectic matrices. Rotations leave images
untouched but may have their angles negated when a Pauli is pulled through
them; :class:`PropagationMap` keeps one "flip row" per rotation for that.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Mapping, Sequence

import numpy as np

from oneway.circuit import Gate, X_MATRIX, Z_MATRIX


class PauliError(ValueError):
    pass


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


@dataclass(frozen=True)
class PauliImage:
    n: int
    bits: int = 0

    def __post_init__(self):
        if self.bits < 0 or self.bits >> (2 * self.n):
            raise PauliError("bits exceed 2n")

    @classmethod
    def from_parts(cls, x: Sequence[int], z: Sequence[int]) -> "PauliImage":
        if len(x) != len(z):
            raise PauliError("x and z parts differ in length")
        n = len(x)
        bits = 0
        for i, (xi, zi) in enumerate(zip(x, z)):
            bits |= (int(xi) & 1) << i
            bits |= (int(zi) & 1) << (n + i)
        return cls(n, bits)

    @classmethod
    def x(cls, n: int, *qubits: int) -> "PauliImage":
        return cls(n, sum(1 << q for q in set(qubits)))

    @classmethod
    def z(cls, n: int, *qubits: int) -> "PauliImage":
        return cls(n, sum(1 << (n + q) for q in set(qubits)))

    @classmethod
    def from_vector(cls, v) -> "PauliImage":
        v = np.asarray(v, dtype=np.uint8) & 1
        n = len(v) // 2
        return cls(n, int(sum(int(b) << i for i, b in enumerate(v))))

    @classmethod
    def from_hex(cls, n: int, text: str) -> "PauliImage":
        return cls(n, int(text, 16))

    @property
    def x_bits(self) -> int:
        return self.bits & ((1 << self.n) - 1)

    @property
    def z_bits(self) -> int:
        return self.bits >> self.n

    @property
    def x_part(self) -> tuple:
        return tuple((self.bits >> i) & 1 for i in range(self.n))

    @property
    def z_part(self) -> tuple:
        return tuple((self.bits >> (self.n + i)) & 1 for i in range(self.n))

    def vector(self) -> np.ndarray:
        return np.array([(self.bits >> i) & 1 for i in range(2 * self.n)], dtype=np.uint8)

    def hex(self) -> str:
        return format(self.bits, "x")

    def __add__(self, other: "PauliImage") -> "PauliImage":
        if other.n != self.n:
            raise PauliError("image lengths differ")
        return PauliImage(self.n, self.bits ^ other.bits)

    __xor__ = __add__

    def __bool__(self):
        return self.bits != 0

    def restrict(self, qubits: Sequence[int]) -> "PauliImage":
        """Image on the listed qubits only, re-indexed in that order."""
        return PauliImage.from_parts([self.x_part[q] for q in qubits], [self.z_part[q] for q in qubits])

    def embed(self, n: int, qubits: Sequence[int]) -> "PauliImage":
        """Place a ``len(qubits)``-qubit image onto ``qubits`` of an n-qubit register."""
        if len(qubits) != self.n:
            raise PauliError("qubit list does not match image size")
        x = [0] * n
        z = [0] * n
        for local, q in enumerate(qubits):
            x[q] = self.x_part[local]
            z[q] = self.z_part[local]
        return PauliImage.from_parts(x, z)

    def label(self) -> str:
        out = []
        for xi, zi in zip(self.x_part, self.z_part):
            out.append({(0, 0): "I", (1, 0): "X", (0, 1): "Z", (1, 1): "Y"}[(xi, zi)])
        return "".join(out)


def zero(n: int) -> PauliImage:
    return PauliImage(n, 0)


def to_pauli(img: PauliImage) -> np.ndarray:
    """Dense matrix ``prod_i X_i^{x_i} Z_i^{z_i}``, qubit 0 on the most significant bit."""
    if img.n > 10:
        raise PauliError("to_pauli is limited to 10 qubits")
    eye = np.eye(2, dtype=complex)
    factors = []
    for xi, zi in zip(img.x_part, img.z_part):
        f = eye
        if xi:
            f = X_MATRIX
        if zi:
            f = f @ Z_MATRIX
        factors.append(f)
    return reduce(np.kron, factors, np.ones((1, 1), dtype=complex))


def symplectic_product(a: PauliImage, b: PauliImage) -> int:
    """``a_x . b_z + a_z . b_x  (mod 2)``"""
    if a.n != b.n:
        raise PauliError("image lengths differ")
    return _parity((a.x_bits & b.z_bits) ^ (a.z_bits & b.x_bits))


def all_images(n: int) -> Iterable[PauliImage]:
    return (PauliImage(n, b) for b in range(4 ** n))


def symplectic_form(n: int) -> np.ndarray:
    om = np.zeros((2 * n, 2 * n), dtype=np.uint8)
    om[:n, n:] = np.eye(n, dtype=np.uint8)
    om[n:, :n] = np.eye(n, dtype=np.uint8)
    return om


@dataclass(frozen=True)
class PropagationMap:
    """Action of (part of) a network on byproduct images pulled through it.

    ``matrix`` maps an image at the input side to the output side (column
    vectors, x block first). ``flips[label]`` is a row vector over the input
    side; a rotation's angle is negated iff ``row . v = 1``.
    """

    n: int
    matrix: np.ndarray
    flips: Mapping = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.uint8) & 1
        if m.shape != (2 * self.n, 2 * self.n):
            raise PauliError("matrix must be 2n x 2n")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        rows = {}
        for k, r in dict(self.flips).items():
            r = np.asarray(r, dtype=np.uint8) & 1
            if r.shape != (2 * self.n,):
                raise PauliError("flip rows must have length 2n")
            r.setflags(write=False)
            rows[k] = r
        object.__setattr__(self, "flips", rows)

    @classmethod
    def identity(cls, n: int) -> "PropagationMap":
        return cls(n, np.eye(2 * n, dtype=np.uint8))

    def apply(self, img: PauliImage) -> PauliImage:
        if img.n != self.n:
            raise PauliError("image size does not match map")
        return PauliImage.from_vector(self.matrix.astype(np.int64) @ img.vector() % 2)

    def triggered(self, img: PauliImage) -> list:
        """Labels of the rotations whose angle an input-side image flips."""
        v = img.vector().astype(np.int64)
        return [k for k, r in self.flips.items() if int(r.astype(np.int64) @ v) % 2]

    def inverse_apply(self, img: PauliImage) -> PauliImage:
        """Pull an output-side image back to the input side (matrix must be symplectic)."""
        om = symplectic_form(self.n).astype(np.int64)
        inv = om @ self.matrix.T.astype(np.int64) @ om % 2
        return PauliImage.from_vector(inv @ img.vector() % 2)

    def is_symplectic(self) -> bool:
        om = symplectic_form(self.n).astype(np.int64)
        m = self.matrix.astype(np.int64)
        return bool(np.array_equal(m.T @ om @ m % 2, om))


def _column_map(n: int, images: Mapping[int, PauliImage]) -> np.ndarray:
    m = np.eye(2 * n, dtype=np.uint8)
    for col, img in images.items():
        m[:, col] = img.vector()
    return m


def _check_qubits(n: int, qubits: Iterable[int]):
    for q in qubits:
        if not 0 <= q < n:
            raise PauliError(f"qubit {q} out of range for n={n}")


def rotation_stage(n: int, q: int, axis: str, label) -> PropagationMap:
    """One elementary rotation about ``axis`` on wire ``q``: images unchanged, one flip row."""
    _check_qubits(n, [q])
    row = np.zeros(2 * n, dtype=np.uint8)
    if axis == "x":
        row[n + q] = 1
    elif axis == "z":
        row[q] = 1
    else:
        raise PauliError("axis must be 'x' or 'z'")
    return PropagationMap(n, np.eye(2 * n, dtype=np.uint8), {label: row})


def gate_propagation_map(gate: Gate, n: int, labels: Sequence | None = None) -> PropagationMap:
    """Symplectic action of one network gate.

    For ROT the image is left as is; the flip rows (labelled ``labels`` or
    ``("xi", "eta", "zeta")``) say that a z component negates xi and zeta and
    an x component negates eta.
    """
    _check_qubits(n, gate.qubits)
    if gate.kind == "ROT":
        q = gate.qubits[0]
        labels = tuple(labels) if labels is not None else ("xi", "eta", "zeta")
        return compose([rotation_stage(n, q, "x", labels[0]),
                        rotation_stage(n, q, "z", labels[1]),
                        rotation_stage(n, q, "x", labels[2])], n)
    if gate.kind == "H":
        q = gate.qubits[0]
        return PropagationMap(n, _column_map(n, {q: PauliImage.z(n, q), n + q: PauliImage.x(n, q)}))
    if gate.kind == "S":
        q = gate.qubits[0]
        return PropagationMap(n, _column_map(n, {q: PauliImage(n, (1 << q) | (1 << (n + q)))}))
    c, t = gate.qubits
    return PropagationMap(n, _column_map(n, {
        c: PauliImage.x(n, c, t),
        n + t: PauliImage.z(n, c, t),
    }))


def compose(maps: Sequence[PropagationMap], n: int | None = None) -> PropagationMap:
    """Maps in network order (first applied first)."""
    if not maps:
        if n is None:
            raise PauliError("compose([]) needs n")
        return PropagationMap.identity(n)
    n = maps[0].n if n is None else n
    acc = np.eye(2 * n, dtype=np.int64)
    flips = {}
    for m in maps:
        if m.n != n:
            raise PauliError("dimension mismatch in compose")
        for k, r in m.flips.items():
            if k in flips:
                raise PauliError(f"duplicate flip label {k!r}")
            flips[k] = r.astype(np.int64) @ acc % 2
        acc = m.matrix.astype(np.int64) @ acc % 2
    return PropagationMap(n, acc, flips)
