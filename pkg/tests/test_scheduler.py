import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oneway.circuit import CNOT, ROT, Circuit, H, S, random_circuit
from oneway.compiler import compile
from oneway.pauli import symplectic_product
from oneway.scheduler import (ConeError, Schedule, ScheduleError, build_schedule, check_schedule,
                              compute_cones, cone_test, transitive_closure)
from tests.conftest import folded_random_circuits, small_random_circuits


def test_single_rotation_rounds():
    p = compile(Circuit(1, (ROT(0, 0.3, 0.7, -1.1),)))
    s = build_schedule(p)
    assert s.rounds == ((0, 4), (1,), (2,), (3,))
    assert s.t_max == 3


def test_empty_circuit_single_readout_round():
    p = compile(Circuit(3))
    assert build_schedule(p).rounds == (tuple(sorted(p.outputs)),)


@given(st.integers(0, 2 ** 31))
def test_clifford_circuits_have_unit_depth(seed):
    rng = np.random.default_rng(seed)
    c = random_circuit(rng, int(rng.integers(1, 5)), int(rng.integers(0, 11)), clifford_only=True)
    s = build_schedule(compile(c))
    assert s.t_max == 0


def test_rotation_chain_depth_grows():
    depths = []
    for r in range(1, 5):
        c = Circuit(1, tuple(ROT(0, 0.3 + i, 0.7, -1.1) for i in range(r)))
        depths.append(build_schedule(compile(c)).t_max)
    assert depths == [3, 5, 7, 9]


@pytest.mark.parametrize("seed", range(4))
def test_schedule_invariants(seed):
    for c in small_random_circuits(seed, 15) + folded_random_circuits(seed, 15):
        p = compile(c)
        cones = compute_cones(p)
        s = build_schedule(p, cones)
        check_schedule(p, s, cones)
        rnd = s.round_of()
        # everything without an adaptive basis goes first
        assert set(p.measured) - p.adaptive <= set(s.rounds[0])
        closure = transitive_closure({k: set(v) for k, v in cones.fc.items()})
        for t, q in enumerate(s.rounds[1:], start=1):
            for j in q:
                preds = {k for k, later in closure.items() if j in later}
                assert preds and all(rnd[k] < t for k in preds)
                assert any(rnd[k] == t - 1 for k in preds)
            assert list(q) == sorted(q)


@pytest.mark.parametrize("seed", range(3))
def test_cone_test_matches_cones_on_generic_circuits(seed):
    for c in small_random_circuits(100 + seed, 20):
        p = compile(c)
        for j in p.adaptive:
            for k in p.measured:
                assert cone_test(p, j, k) == int(j in p.fc[k] or j in p.bc[k])


def test_cone_test_relation_used_by_controller_survives_folding():
    """For k measured in an adaptive round before j, (F_k, F_j) is exactly j in fc(k)."""
    for c in folded_random_circuits(7, 80):
        p = compile(c)
        rnd = build_schedule(p).round_of()
        for j in p.adaptive:
            for k in p.adaptive:
                if 1 <= rnd[k] < rnd[j]:
                    assert symplectic_product(p.F[k], p.F[j]) == int(j in p.fc[k])


def test_cone_test_trivial_cases():
    p = compile(Circuit(2, (ROT(0, 0.3, 0.7, -1.1), ROT(1, 0.2, 0.5, 0.9))))
    for j in p.adaptive:
        assert cone_test(p, j, j) == 0
        for k in p.adaptive:
            if p.site_wire[j] != p.site_wire[k]:
                assert cone_test(p, j, k) == 0
    with pytest.raises(ConeError):
        cone_test(p, p.outputs[0], 1)


def test_cycle_detected():
    p = compile(Circuit(1, (ROT(0, 0.3, 0.7, -1.1),)))
    fc = dict(p.fc)
    fc[3] = frozenset({1})
    bad = dataclasses.replace(p, fc=fc)
    with pytest.raises(ScheduleError, match="cycle"):
        build_schedule(bad)


def test_cones_must_point_at_adaptive_sites():
    p = compile(Circuit(1, (H(0),)))
    bad = dataclasses.replace(p, fc={**p.fc, 0: frozenset({1})})
    with pytest.raises(ConeError):
        compute_cones(bad)


def test_check_schedule_rejects_bad_partitions():
    p = compile(Circuit(1, (ROT(0, 0.3, 0.7, -1.1),)))
    with pytest.raises(ScheduleError):
        check_schedule(p, Schedule(((0, 1, 4), (2,), (3,))))
    with pytest.raises(ScheduleError):
        check_schedule(p, Schedule(((0, 4), (1,), (2,))))


def test_mixed_clifford_and_rotation():
    c = Circuit(2, (H(0), S(1), CNOT(0, 1), ROT(1, 0.4, 0.5, 0.6)))
    s = build_schedule(compile(c))
    assert s.t_max == 3
    assert s.sizes()[1:] == [1, 1, 1]
