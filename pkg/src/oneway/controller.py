"""Classical side-processing: the information flow vector and angle adaptation.

Two ways of driving a :class:`FlowState` are offered. The round-based one
(:func:`finish_round0`, :func:`adapt_angle`, :func:`update`) follows the
measurement schedule and touches outcomes only through ``I``. The streamed
one (:func:`absorb`, :func:`naive_angle`) consumes outcomes one at a time in
network order and tracks per-site flip parities directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from oneway.compiler import CompiledPattern
from oneway.pauli import PauliImage, symplectic_product
from oneway.scheduler import Schedule


class ControllerError(RuntimeError):
    pass


@dataclass
class FlowState:
    I: PauliImage
    t: int = -1
    phi_prime: dict | None = None
    rounds: tuple | None = None
    measured: set = field(default_factory=set)
    flips: dict = field(default_factory=dict)
    trace: list | None = None

    @property
    def t_max(self) -> int | None:
        return None if self.rounds is None else len(self.rounds) - 1


def init_flow(p: CompiledPattern, schedule: Schedule | None = None, *, trace: bool = False) -> FlowState:
    return FlowState(
        I=p.F_init,
        rounds=None if schedule is None else schedule.rounds,
        flips={j: 0 for j in p.adaptive},
        trace=[] if trace else None,
    )


def _accumulate(f: FlowState, outcomes: Mapping, p: CompiledPattern, expected) -> None:
    keys = set(outcomes)
    dup = keys & f.measured
    if dup:
        raise ControllerError(f"sites already measured: {sorted(dup)}")
    if expected is not None and keys != set(expected):
        raise ControllerError(
            f"round {f.t + 1} outcomes cover {sorted(keys)}, expected {sorted(expected)}")
    bits = f.I.bits
    for k in sorted(keys):
        if outcomes[k]:
            bits ^= p.F[k].bits
    f.I = PauliImage(f.I.n, bits)
    f.measured |= keys
    f.t += 1
    if f.trace is not None:
        f.trace.append({"t": f.t, "I": f.I.hex(), "sites": sorted(keys),
                        "outcomes": [int(outcomes[k]) for k in sorted(keys)]})


def finish_round0(f: FlowState, outcomes: Mapping, p: CompiledPattern) -> FlowState:
    """Fold in Q_0 and freeze the adapted algorithm angles."""
    if f.t != -1:
        raise ControllerError("round 0 already finished")
    expected = f.rounds[0] if f.rounds is not None else None
    _accumulate(f, outcomes, p, expected)
    eta = dict.fromkeys(p.adaptive, 0)
    for k, s in outcomes.items():
        if s:
            for j in p.fc[k]:
                eta[j] ^= 1
    f.phi_prime = {}
    for j in p.adaptive:
        phi0 = -p.phi_init[j] if eta[j] else p.phi_init[j]
        f.phi_prime[j] = -phi0 if symplectic_product(f.I, p.F[j]) else phi0
    return f


def adapt_angle(f: FlowState, j, p: CompiledPattern) -> float:
    """``phi'_j (-1)^{(I, F_j)}``"""
    if j not in p.adaptive:
        raise ControllerError(f"site {j} has no adaptive angle")
    if f.phi_prime is None:
        raise ControllerError("adapt_angle before round 0 finished")
    if j in f.measured:
        raise ControllerError(f"site {j} already measured")
    phi = f.phi_prime[j]
    return -phi if symplectic_product(f.I, p.F[j]) else phi


def update(f: FlowState, outcomes: Mapping, p: CompiledPattern) -> FlowState:
    if f.t < 0:
        raise ControllerError("use finish_round0 for round 0")
    expected = None
    if f.rounds is not None:
        if f.t + 1 >= len(f.rounds):
            raise ControllerError("all rounds already consumed")
        expected = f.rounds[f.t + 1]
    _accumulate(f, outcomes, p, expected)
    return f


def result(f: FlowState, p: CompiledPattern | None = None) -> tuple:
    """x-part of ``I``, one bit per wire."""
    if f.rounds is not None and f.t != len(f.rounds) - 1:
        raise ControllerError(f"result requested at round {f.t} of {len(f.rounds) - 1}")
    if p is not None and set(f.measured) != set(p.measured):
        raise ControllerError("not every site has been measured")
    return f.I.x_part


def absorb(f: FlowState, site, s: int, p: CompiledPattern) -> FlowState:
    """Streamed counterpart of :func:`update`: one outcome at a time."""
    if site in f.measured:
        raise ControllerError(f"site {site} already measured")
    f.measured.add(site)
    if s:
        f.I = f.I + p.F[site]
        for j in p.fc[site]:
            f.flips[j] ^= 1
    if f.trace is not None:
        f.trace.append({"t": len(f.measured) - 1, "I": f.I.hex(), "sites": [site], "outcomes": [int(s)]})
    return f


def naive_angle(f: FlowState, j, p: CompiledPattern) -> float:
    """``phi_init (-1)^{sum of s_k with j in fc(k)}`` over outcomes absorbed so far."""
    if j not in p.adaptive:
        raise ControllerError(f"site {j} has no adaptive angle")
    return -p.phi_init[j] if f.flips[j] else p.phi_init[j]
