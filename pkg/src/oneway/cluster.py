"""Cluster graphs and the states they define."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping

import numpy as np

from oneway import qsim
from oneway.config import DEFAULT
from oneway.qsim import Basis, QuantumState

Site = Hashable

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)


class GraphError(ValueError):
    pass


def _edge(a, b) -> tuple:
    return (a, b) if repr(a) <= repr(b) else (b, a)


@dataclass(frozen=True)
class ClusterGraph:
    """Sites with integer ``(row, col)`` coordinates and an undirected edge set.

    Coordinates are layout metadata only; adjacency comes from ``edges``.
    Every site carries ``kappa = 0``.
    """

    sites: tuple
    edges: frozenset
    coords: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        sites = tuple(self.sites)
        if len(set(sites)) != len(sites):
            raise GraphError("duplicate site ids")
        known = set(sites)
        edges = set()
        for e in self.edges:
            a, b = tuple(e)
            if a == b:
                raise GraphError(f"self-loop on {a!r}")
            if a not in known or b not in known:
                raise GraphError(f"edge {a!r}-{b!r} references an unknown site")
            edges.add(_edge(a, b))
        object.__setattr__(self, "sites", sites)
        object.__setattr__(self, "edges", frozenset(edges))
        nbrs = {s: set() for s in sites}
        for a, b in edges:
            nbrs[a].add(b)
            nbrs[b].add(a)
        object.__setattr__(self, "_nbrs", {s: frozenset(v) for s, v in nbrs.items()})

    @classmethod
    def build(cls, sites: Iterable, edges: Iterable, coords: Mapping | None = None) -> "ClusterGraph":
        return cls(tuple(sites), frozenset(_edge(a, b) for a, b in edges), dict(coords or {}))

    @classmethod
    def chain(cls, length: int) -> "ClusterGraph":
        sites = tuple(range(length))
        return cls.build(sites, [(i, i + 1) for i in range(length - 1)], {i: (0, i) for i in sites})

    def ngbh(self, site) -> frozenset:
        try:
            return self._nbrs[site]
        except KeyError:
            raise GraphError(f"unknown site {site!r}") from None

    @property
    def kappa(self) -> dict:
        return {s: 0 for s in self.sites}

    def sorted_edges(self) -> list:
        order = {s: i for i, s in enumerate(self.sites)}
        return sorted(self.edges, key=lambda e: (order[e[0]], order[e[1]]))

    def without(self, site) -> "ClusterGraph":
        self.ngbh(site)
        return ClusterGraph(
            tuple(s for s in self.sites if s != site),
            frozenset(e for e in self.edges if site not in e),
            {s: c for s, c in self.coords.items() if s != site},
        )

    def __len__(self):
        return len(self.sites)


def make_cluster_state(g: ClusterGraph, max_qubits: int = DEFAULT.max_qubits) -> QuantumState:
    """``prod_{edges} CZ`` applied to ``|+>`` on every site."""
    psi = qsim.init_plus(g.sites, max_qubits)
    for a, b in g.sorted_edges():
        psi = qsim.apply_cz(psi, a, b)
    return psi


def check_stabilizers(g: ClusterGraph, psi: QuantumState, tol: float = 1e-10, phase_tol: float = 1e-6) -> bool:
    """True iff ``X_a prod_{b in ngbh(a)} Z_b`` fixes ``psi`` with eigenvalue +1 for every site."""
    if set(psi.sites) != set(g.sites) or psi.m != len(g.sites):
        raise GraphError("state registry does not match the graph")
    ref = psi.tensor.reshape(-1)
    for a in g.sites:
        phi = qsim.apply_unitary1(psi, a, _X)
        for b in g.ngbh(a):
            phi = qsim.apply_unitary1(phi, b, _Z)
        ov = np.vdot(ref, phi.tensor.reshape(-1))
        if abs(ov) ** 2 < 1 - tol or abs(ov - 1) > phase_tol:
            return False
    return True


def remove_z(g: ClusterGraph, psi: QuantumState, site, draw: float = 0.0, *,
             outcome: int | None = None) -> tuple[int, QuantumState, dict]:
    """Measure ``site`` in Z and drop it.

    Returns the outcome, the reduced state, and the map neighbour -> z-flip bit.
    Applying ``Z^bit`` to each neighbour leaves the cluster state of
    ``g.without(site)``.
    """
    nbrs = g.ngbh(site)
    if psi.m == 1:
        s, _ = qsim.measure(psi, site, Basis.z(), draw, outcome=outcome, keep=True)
        return s, None, {}
    s, reduced = qsim.measure(psi, site, Basis.z(), draw, outcome=outcome)
    return s, reduced, {b: s for b in sorted(nbrs, key=repr)}


def apply_corrections(psi: QuantumState, corrections: Mapping) -> QuantumState:
    for site, bit in corrections.items():
        if bit:
            psi = qsim.apply_unitary1(psi, site, _Z)
    return psi


def random_graph(rng: np.random.Generator, n_sites: int, p_edge: float = 0.4) -> ClusterGraph:
    sites = tuple(range(n_sites))
    edges = [(a, b) for a in sites for b in sites if a < b and rng.random() < p_edge]
    return ClusterGraph.build(sites, edges, {s: (0, s) for s in sites})
