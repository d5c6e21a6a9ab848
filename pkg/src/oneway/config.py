"""Run-wide tunables."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class SimConfig:
    # dense statevector bound for full-cluster runs
    max_qubits: int = 24
    # B(phi) == B(-phi) as a set for phi in {0, +-pi/2, pi}
    angle_tol: float = 1e-12
    # below this, an outcome counts as impossible
    prob_floor: float = 1e-14
    # oracle / to_pauli conversions
    oracle_max_qubits: int = 10
    # loose multinomial bound: tv <= tv_factor * sqrt(k / shots)
    tv_factor: float = 3.0
    chi2_pvalue: float = 1e-3
    fidelity_tol: float = 1e-9


DEFAULT = SimConfig()
