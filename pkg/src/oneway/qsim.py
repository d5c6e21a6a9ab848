"""Dense statevector engine.

A :class:`QuantumState` holds the amplitudes of the live qubits as a rank-m
tensor with one axis of length two per qubit. Axis ``i`` belongs to
``state.sites[i]``; flattening in C order therefore puts the first registered
site on the most significant bit.

Every operation returns a new state and leaves its argument untouched.
Measured qubits are projected out of the tensor, so the dimension halves on
each measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import numpy as np

from oneway.config import DEFAULT

Site = Hashable

_SQRT1_2 = 1.0 / math.sqrt(2.0)
PLUS = np.array([_SQRT1_2, _SQRT1_2], dtype=complex)


class QSimError(ValueError):
    """Invalid use of the statevector engine."""


class SizeLimitError(QSimError):
    """Requested more live qubits than the configured bound."""


class DegenerateProjectionError(QSimError):
    """A forced outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class Basis:
    """One-qubit measurement basis.

    ``kind`` is ``"Z"`` for the computational basis or ``"XY"`` for the
    equatorial basis ``{(|0> + e^{i angle}|1>)/sqrt2, (|0> - e^{i angle}|1>)/sqrt2}``.
    Outcome 0 always refers to the first vector.
    """

    kind: str
    angle: float = 0.0

    def __post_init__(self):
        if self.kind not in ("Z", "XY"):
            raise QSimError(f"unknown basis kind {self.kind!r}")
        if not math.isfinite(self.angle):
            raise QSimError("basis angle must be finite")

    @classmethod
    def z(cls) -> "Basis":
        return cls("Z")

    @classmethod
    def plane(cls, angle: float) -> "Basis":
        return cls("XY", float(angle))

    def vectors(self) -> tuple[np.ndarray, np.ndarray]:
        if self.kind == "Z":
            return (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex))
        phase = np.exp(1j * self.angle)
        return (
            np.array([_SQRT1_2, _SQRT1_2 * phase], dtype=complex),
            np.array([_SQRT1_2, -_SQRT1_2 * phase], dtype=complex),
        )


class QuantumState:
    __slots__ = ("tensor", "sites", "_index")

    def __init__(self, tensor: np.ndarray, sites: Sequence[Site]):
        sites = tuple(sites)
        if tensor.ndim != len(sites) or any(d != 2 for d in tensor.shape):
            raise QSimError("tensor shape does not match the site registry")
        self.tensor = tensor
        self.sites = sites
        self._index = {s: i for i, s in enumerate(sites)}
        if len(self._index) != len(sites):
            raise QSimError("duplicate site ids in registry")

    @property
    def m(self) -> int:
        return len(self.sites)

    @property
    def registry(self) -> dict:
        return dict(self._index)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def axis(self, site: Site) -> int:
        try:
            return self._index[site]
        except KeyError:
            raise QSimError(f"site {site!r} is not live") from None

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def copy(self) -> "QuantumState":
        return QuantumState(self.tensor.copy(), self.sites)

    def permuted(self, order: Sequence[Site]) -> "QuantumState":
        """Same state with the registry reordered to ``order``."""
        order = tuple(order)
        if set(order) != set(self.sites) or len(order) != len(self.sites):
            raise QSimError("registry mismatch")
        axes = [self._index[s] for s in order]
        return QuantumState(np.transpose(self.tensor, axes), order)

    def __repr__(self):
        return f"QuantumState(m={self.m}, sites={self.sites!r})"


def _check_size(m: int, max_qubits: int):
    if m > max_qubits:
        raise SizeLimitError(f"{m} live qubits exceeds the limit of {max_qubits}")


def product_state(sites: Sequence[Site], vectors: Sequence[np.ndarray], max_qubits: int = DEFAULT.max_qubits) -> QuantumState:
    sites = tuple(sites)
    if not sites:
        raise QSimError("need at least one site")
    if len(set(sites)) != len(sites):
        raise QSimError("duplicate site ids")
    _check_size(len(sites), max_qubits)
    t = np.ones((), dtype=complex)
    for v in vectors:
        v = np.asarray(v, dtype=complex)
        t = np.multiply.outer(t, v / np.linalg.norm(v))
    return QuantumState(t, sites)


def init_plus(sites: Sequence[Site], max_qubits: int = DEFAULT.max_qubits) -> QuantumState:
    """Uniform product state of ``|+>`` over ``sites``."""
    sites = tuple(sites)
    return product_state(sites, [PLUS] * len(sites), max_qubits)


def attach(state: QuantumState, sites: Sequence[Site], vectors: Sequence[np.ndarray] | None = None,
           max_qubits: int = DEFAULT.max_qubits) -> QuantumState:
    """Tensor fresh qubits (``|+>`` by default) onto the end of the registry."""
    sites = tuple(sites)
    if not sites:
        return state
    if vectors is None:
        vectors = [PLUS] * len(sites)
    _check_size(state.m + len(sites), max_qubits)
    extra = product_state(sites, vectors, max_qubits)
    return QuantumState(np.multiply.outer(state.tensor, extra.tensor), state.sites + extra.sites)


def apply_cz(state: QuantumState, a: Site, b: Site) -> QuantumState:
    if a == b:
        raise QSimError("CZ needs two distinct sites")
    ia, ib = state.axis(a), state.axis(b)
    t = state.tensor.copy()
    idx = [slice(None)] * state.m
    idx[ia] = 1
    idx[ib] = 1
    t[tuple(idx)] *= -1
    return QuantumState(t, state.sites)


def _is_unitary(u: np.ndarray, tol: float = 1e-12) -> bool:
    return u.shape == (2, 2) and np.allclose(u.conj().T @ u, np.eye(2), atol=tol, rtol=0)


def apply_unitary1(state: QuantumState, site: Site, u) -> QuantumState:
    u = np.asarray(u, dtype=complex)
    if not _is_unitary(u):
        raise QSimError("matrix is not a 2x2 unitary")
    ax = state.axis(site)
    t = np.tensordot(u, state.tensor, axes=([1], [ax]))
    return QuantumState(np.moveaxis(t, 0, ax), state.sites)


def apply_cnot(state: QuantumState, control: Site, target: Site) -> QuantumState:
    h = np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2
    state = apply_unitary1(state, target, h)
    state = apply_cz(state, control, target)
    return apply_unitary1(state, target, h)


def outcome_probability(state: QuantumState, site: Site, basis: Basis) -> float:
    """Born probability of outcome 0."""
    ax = state.axis(site)
    v0, _ = basis.vectors()
    amp = np.tensordot(v0.conj(), state.tensor, axes=([0], [ax]))
    return float(np.vdot(amp, amp).real)


def measure(state: QuantumState, site: Site, basis: Basis, draw: float = 0.0, *,
            outcome: int | None = None, keep: bool = False,
            prob_floor: float = DEFAULT.prob_floor) -> tuple[int, QuantumState]:
    """Projective one-qubit measurement.

    The outcome is 0 when ``draw`` falls below the Born probability of the
    first basis vector. An outcome whose probability is under ``prob_floor``
    is never drawn. Passing ``outcome`` forces the branch instead; forcing an
    impossible branch raises :class:`DegenerateProjectionError`.

    With ``keep=True`` the measured qubit stays in the registry, projected onto
    the observed basis vector.
    """
    ax = state.axis(site)
    vecs = basis.vectors()
    amp0 = np.tensordot(vecs[0].conj(), state.tensor, axes=([0], [ax]))
    p0 = float(np.vdot(amp0, amp0).real)
    total = state.norm() ** 2
    p1 = max(total - p0, 0.0)
    if outcome is None:
        if p0 < prob_floor:
            s = 1
        elif p1 < prob_floor:
            s = 0
        else:
            s = 0 if draw < p0 / total else 1
    else:
        s = int(outcome)
        if s not in (0, 1):
            raise QSimError("outcome must be 0 or 1")
        if (p0 if s == 0 else p1) < prob_floor:
            raise DegenerateProjectionError(f"outcome {s} on site {site!r} has zero probability")
    if s == 0:
        amp, p = amp0, p0
    else:
        amp = np.tensordot(vecs[1].conj(), state.tensor, axes=([0], [ax]))
        p = float(np.vdot(amp, amp).real)
        if p < prob_floor:
            raise DegenerateProjectionError(f"outcome 1 on site {site!r} has zero probability")
    amp = amp / math.sqrt(p)
    if keep:
        t = np.moveaxis(np.multiply.outer(amp, vecs[s]), -1, ax)
        return s, QuantumState(t, state.sites)
    if state.m == 1:
        raise QSimError("cannot remove the last live qubit; use keep=True")
    sites = state.sites[:ax] + state.sites[ax + 1:]
    return s, QuantumState(amp, sites)


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """``|<a|b>|^2`` after aligning ``b`` to ``a``'s registry order."""
    if set(a.sites) != set(b.sites) or a.m != b.m:
        raise QSimError("fidelity needs states on the same sites")
    if b.sites != a.sites:
        b = b.permuted(a.sites)
    ov = np.vdot(a.tensor.reshape(-1), b.tensor.reshape(-1))
    return float(min(abs(ov) ** 2, 1.0))


def state_from_vector(vec: np.ndarray, sites: Iterable[Site]) -> QuantumState:
    sites = tuple(sites)
    vec = np.asarray(vec, dtype=complex)
    if vec.size != 2 ** len(sites):
        raise QSimError("vector length does not match site count")
    return QuantumState(vec.reshape((2,) * len(sites)) / np.linalg.norm(vec), sites)
