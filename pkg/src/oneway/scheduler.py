"""Measurement rounds from forward cones."""

from __future__ import annotations

from dataclasses import dataclass
from graphlib import CycleError, TopologicalSorter
from typing import Mapping

from oneway.compiler import CompiledPattern
from oneway.pauli import symplectic_product


class ScheduleError(ValueError):
    pass


class ConeError(ValueError):
    pass


@dataclass(frozen=True)
class ConeSets:
    fc: Mapping
    bc: Mapping


@dataclass(frozen=True)
class Schedule:
    rounds: tuple  # tuple of tuples of site ids, ascending within a round

    @property
    def t_max(self) -> int:
        return len(self.rounds) - 1

    def round_of(self) -> dict:
        return {s: t for t, q in enumerate(self.rounds) for s in q}

    def sizes(self) -> list:
        return [len(q) for q in self.rounds]


def compute_cones(p: CompiledPattern) -> ConeSets:
    """Forward and backward cones as recorded by the compiler, checked for consistency."""
    fc, bc = {}, {}
    for k in p.measured:
        f = frozenset(p.fc.get(k, ()))
        b = frozenset(p.bc.get(k, ()))
        stray = (f | b) - p.adaptive
        if stray:
            raise ConeError(f"cones of {k} contain non-adaptive sites {sorted(stray)}")
        fc[k], bc[k] = f, b
    return ConeSets(fc, bc)


def cone_test(p: CompiledPattern, j, k) -> int:
    """``(F_j, F_k)_S``; only meaningful for an adaptive ``j``."""
    if j not in p.adaptive:
        raise ConeError(f"cone test needs an adaptive site, {j} is not")
    return symplectic_product(p.F[j], p.F[k])


def precedence(cones: ConeSets) -> dict:
    """``k -> {j : j in fc(k)}``, the generating edges of the strict order."""
    return {k: set(js) for k, js in cones.fc.items()}


def transitive_closure(succ: Mapping) -> dict:
    """Reachability sets; raises ScheduleError on a cycle."""
    graph = {k: set() for k in succ}
    for k, js in succ.items():
        for j in js:
            graph.setdefault(j, set()).add(k)  # predecessors, for TopologicalSorter
    try:
        order = list(TopologicalSorter(graph).static_order())
    except CycleError as exc:
        raise ScheduleError(f"forward cones contain a cycle through {exc.args[1]}") from None
    closure = {k: set() for k in graph}
    for k in reversed(order):
        for j in succ.get(k, ()):
            closure[k].add(j)
            closure[k] |= closure[j]
    return closure


def build_schedule(p: CompiledPattern, cones: ConeSets | None = None) -> Schedule:
    """Peel off, round by round, the sites with no remaining predecessor."""
    cones = compute_cones(p) if cones is None else cones
    closure = transitive_closure(precedence(cones))
    preds = {s: set() for s in p.measured}
    for k, later in closure.items():
        for j in later:
            if j in preds:
                preds[j].add(k)
    remaining = set(p.measured)
    rounds = []
    while remaining:
        q = {s for s in remaining if not (preds[s] & remaining)}
        if not q:
            raise ScheduleError("no site can be measured next")
        rounds.append(tuple(sorted(q)))
        remaining -= q
    return Schedule(tuple(rounds))


def check_schedule(p: CompiledPattern, sched: Schedule, cones: ConeSets | None = None):
    """Raise ScheduleError unless ``sched`` is a valid partition consistent with the cones."""
    cones = compute_cones(p) if cones is None else cones
    seen = [s for q in sched.rounds for s in q]
    if len(seen) != len(set(seen)) or set(seen) != set(p.measured):
        raise ScheduleError("rounds do not partition the measured sites")
    rnd = sched.round_of()
    for k, js in cones.fc.items():
        for j in js:
            if rnd[k] >= rnd[j]:
                raise ScheduleError(f"{j} is in fc({k}) but not measured later")
