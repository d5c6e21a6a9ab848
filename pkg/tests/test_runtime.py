import dataclasses
import math

import numpy as np
import pytest

from oneway import runtime
from oneway.circuit import CNOT, ROT, Circuit, H, random_circuit
from oneway.compiler import compile, embed_rectangular
from oneway.config import DEFAULT
from oneway.scheduler import build_schedule
from tests.conftest import folded_random_circuits, small_random_circuits


def test_oracle_examples():
    assert runtime.oracle_distribution(Circuit(1)) == pytest.approx({"0": 0.5, "1": 0.5})
    assert runtime.oracle_distribution(Circuit(1, (H(0),))) == pytest.approx({"0": 1.0})
    d = runtime.oracle_distribution(Circuit(2, (CNOT(0, 1),)))
    assert d == pytest.approx({k: 0.25 for k in ("00", "01", "10", "11")})
    # wire 0 is the first character
    d = runtime.oracle_distribution(Circuit(2, (H(1),)))
    assert d == pytest.approx({"00": 0.5, "10": 0.5})
    with pytest.raises(runtime.OracleLimitError):
        runtime.oracle_distribution(Circuit(DEFAULT.oracle_max_qubits + 1))


def test_shot_seeds_are_distinct_and_stable():
    seeds = [runtime.shot_seed(7, i) for i in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds == [runtime.shot_seed(7, i) for i in range(1000)]
    assert runtime.shot_seed(8, 0) != seeds[0]


def test_full_shot_is_deterministic():
    p = compile(Circuit(2, (ROT(0, 0.3, 0.7, -1.1), CNOT(0, 1))))
    s = build_schedule(p)
    a = runtime.run_shot_full(p, s, 99)
    b = runtime.run_shot_full(p, s, 99)
    assert a == b


@pytest.mark.parametrize("folded", [False, True])
def test_full_mode_state_correctness(folded):
    circuits = folded_random_circuits(13, 12) if folded else small_random_circuits(13, 12, max_gates=4)
    for i, c in enumerate(circuits):
        p = compile(c)
        if len(p.cluster) > 18:
            continue
        s = build_schedule(p)
        for k in range(8):
            r = runtime.run_shot_full(p, s, runtime.shot_seed(i, k))
            assert r.final_fidelity >= 1 - 1e-9
            assert r.readout_ok


def test_full_mode_with_fillers():
    c = Circuit(2, (ROT(0, 0.3, 0.7, -1.1), CNOT(0, 1)))
    p = embed_rectangular(compile(c))
    s = build_schedule(p)
    assert p.fillers <= set(s.rounds[0])
    for k in range(10):
        r = runtime.run_shot_full(p, s, runtime.shot_seed(3, k))
        assert r.final_fidelity >= 1 - 1e-9 and r.readout_ok
    summary, _ = runtime.run_experiment(p, 200, 1, "streamed")
    assert summary["chi2_pvalue"] > 1e-3


def test_clifford_full_mode_runs_one_round():
    p = compile(Circuit(2, (H(0), CNOT(0, 1), H(1))))
    r = runtime.run_shot_full(p, build_schedule(p), 5, trace=True)
    assert len(r.trace) == 1 and r.trace[0]["t"] == 0


def test_full_mode_size_limit():
    p = compile(Circuit(1, tuple(ROT(0, 0.1, 0.2, 0.3) for _ in range(4))))
    cfg = dataclasses.replace(DEFAULT, max_qubits=10)
    with pytest.raises(runtime.RuntimeLimitError):
        runtime.run_experiment(p, 1, 0, "full", config=cfg)


def test_batch_agrees_with_single_shot_path():
    for i, c in enumerate(small_random_circuits(31, 10) + folded_random_circuits(31, 10)):
        p = compile(c)
        seeds = [runtime.shot_seed(i, k) for k in range(60)]
        batch = runtime.run_streamed_batch(p, seeds)
        for sd, rec in zip(seeds, batch):
            one = runtime.run_shot_streamed(p, sd)
            assert one.result == rec.result and one.outcomes == rec.outcomes


def test_streamed_frontier_bound():
    rng = np.random.default_rng(8)
    for _ in range(20):
        c = random_circuit(rng, 3, 6)
        p = compile(c)
        r = runtime.run_shot_streamed(p, 1)
        assert r.max_live <= c.n + 4


def test_all_hadamard_is_deterministic():
    p = compile(Circuit(3, (H(0), H(1), H(2))))
    summary, recs = runtime.run_experiment(p, 3000, 4)
    assert summary["distribution"] == {"000": 1.0}
    assert all(r.result == (0, 0, 0) for r in recs)


def test_thread_count_does_not_change_results():
    p = compile(Circuit(2, (ROT(0, 0.3, 0.7, -1.1), CNOT(0, 1))))
    one, _ = runtime.run_experiment(p, 5000, 3, threads=1)
    many, _ = runtime.run_experiment(p, 5000, 3, threads=4)
    assert one == many
    f1, _ = runtime.run_experiment(p, 30, 3, "full", threads=1)
    f4, _ = runtime.run_experiment(p, 30, 3, "full", threads=4)
    assert f1 == f4


def test_full_and_streamed_distributions_agree():
    for c in small_random_circuits(77, 2, max_n=2, max_gates=3):
        p = compile(c)
        full, _ = runtime.run_experiment(p, 10_000, 1, "full")
        streamed, _ = runtime.run_experiment(p, 10_000, 2, "streamed")
        assert runtime.tv_distance(full["distribution"], streamed["distribution"]) <= 0.05
        assert full["chi2_pvalue"] > 1e-3 and streamed["chi2_pvalue"] > 1e-3


def test_statistics_helpers():
    assert runtime.tv_distance({"0": 1.0}, {"1": 1.0}) == 1.0
    assert runtime.tv_distance({"0": 0.5, "1": 0.5}, {"0": 0.5, "1": 0.5}) == 0.0
    assert runtime.chi2_pvalue({"0": 10}, {"0": 1.0}, 10) == 1.0
    assert runtime.chi2_pvalue({"1": 1}, {"0": 1.0}, 1) == 0.0
    assert runtime.chi2_pvalue({"0": 5000, "1": 5000}, {"0": 0.5, "1": 0.5}, 10_000) > 0.99
    assert runtime.chi2_pvalue({"0": 6000, "1": 4000}, {"0": 0.5, "1": 0.5}, 10_000) < 1e-6


def test_summary_fields():
    p = compile(Circuit(1, (ROT(0, 0.3, 0.7, -1.1),)))
    summary, _ = runtime.run_experiment(p, 1000, 0, "full")
    assert summary["t_max"] == 3 and summary["round_sizes"] == [2, 1, 1, 1]
    assert summary["readout_mismatches"] == 0
    assert summary["tv_bound"] == pytest.approx(3 * math.sqrt(2 / 1000))
    assert summary["min_final_fidelity"] >= 1 - 1e-9
