import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from oneway.circuit import CNOT, ROT, Circuit, random_circuit

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def equal_up_to_phase(a, b, tol=1e-10) -> bool:
    a = np.asarray(a).reshape(-1)
    b = np.asarray(b).reshape(-1)
    ov = np.vdot(b, a)
    if abs(ov) < 1e-15:
        return np.allclose(a, b, atol=tol)
    return np.allclose(a, (ov / abs(ov)) * b, atol=tol)


def phase_deviation(a, b) -> float:
    """``min_theta ||a - e^{i theta} b||_max``"""
    tr = np.vdot(b.reshape(-1), a.reshape(-1))
    c = tr / abs(tr) if abs(tr) > 1e-15 else 1.0
    return float(np.max(np.abs(a - c * b)))


def small_random_circuits(seed: int, count: int, max_n: int = 3, max_gates: int = 5):
    rng = np.random.default_rng(seed)
    return [random_circuit(rng, int(rng.integers(1, max_n + 1)), int(rng.integers(1, max_gates + 1)))
            for _ in range(count)]


def folded_random_circuits(seed: int, count: int, max_n: int = 3, max_gates: int = 5):
    """Circuits whose ROT angles often sit on multiples of pi/2."""
    rng = np.random.default_rng(seed)
    special = [math.pi / 2, -math.pi / 2, 0.0, math.pi]
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_n + 1))
        gates = []
        for _ in range(int(rng.integers(1, max_gates + 1))):
            if n > 1 and rng.random() < 0.3:
                a = int(rng.integers(n - 1))
                gates.append(CNOT(a, a + 1) if rng.random() < 0.5 else CNOT(a + 1, a))
            else:
                angles = [float(rng.choice(special)) if rng.random() < 0.6 else float(rng.uniform(-3, 3))
                          for _ in range(3)]
                gates.append(ROT(int(rng.integers(n)), *angles))
        out.append(Circuit(n, tuple(gates)))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
