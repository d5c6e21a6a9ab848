"""Measurement depth t_max as a function of circuit content.

Reports, for single-wire chains of r generic rotations and for random
circuits, the number of rounds the scheduler needs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from oneway.circuit import ROT, Circuit, generic_angle, random_circuit
from oneway.compiler import compile
from oneway.scheduler import build_schedule


@dataclass(frozen=True)
class DepthConfig:
    max_rotations: int = 8
    random_circuits: int = 50
    max_wires: int = 3
    max_gates: int = 6
    seed: int = 0


def rotation_chain_depths(cfg: DepthConfig, rng) -> list:
    rows = []
    for r in range(1, cfg.max_rotations + 1):
        c = Circuit(1, tuple(ROT(0, *(generic_angle(rng) for _ in range(3))) for _ in range(r)))
        s = build_schedule(compile(c))
        rows.append({"rotations": r, "t_max": s.t_max, "round_sizes": s.sizes()})
    return rows


def random_depths(cfg: DepthConfig, rng) -> list:
    rows = []
    for _ in range(cfg.random_circuits):
        c = random_circuit(rng, int(rng.integers(1, cfg.max_wires + 1)), int(rng.integers(1, cfg.max_gates + 1)))
        p = compile(c)
        rows.append({"wires": c.n, "gates": len(c.gates), "rotations": sum(g.kind == "ROT" for g in c.gates),
                     "clifford": c.is_clifford, "sites": len(p.cluster), "t_max": build_schedule(p).t_max})
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    for f in dataclasses.fields(DepthConfig):
        ap.add_argument(f"--{f.name.replace('_', '-')}", type=int, default=f.default)
    cfg = DepthConfig(**vars(ap.parse_args(argv)))
    rng = np.random.default_rng(cfg.seed)
    chain = rotation_chain_depths(cfg, rng)
    rand = random_depths(cfg, rng)
    print(json.dumps({"config": dataclasses.asdict(cfg), "rotation_chain": chain, "random": rand}, indent=2))


if __name__ == "__main__":
    main()
