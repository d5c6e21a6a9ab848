"""Shot-by-shot execution of compiled patterns and comparison with a direct simulation."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import stats

from oneway import controller, pauli, qsim
from oneway.circuit import Circuit
from oneway.cluster import apply_corrections, make_cluster_state, remove_z
from oneway.compiler import CompiledPattern
from oneway.config import DEFAULT, SimConfig
from oneway.qsim import Basis, QuantumState
from oneway.scheduler import Schedule, build_schedule, check_schedule


BATCH = 2048  # shots per vectorized chunk; fixed so results do not depend on --threads


class RuntimeLimitError(qsim.SizeLimitError):
    pass


class OracleLimitError(ValueError):
    pass


@dataclass
class ShotRecord:
    seed: int
    outcomes: dict
    result: tuple
    final_fidelity: float | None = None
    readout_ok: bool | None = None
    max_live: int = 0
    trace: list | None = field(default=None, repr=False)

    @property
    def bits(self) -> str:
        return "".join(str(b) for b in self.result)


def shot_seed(seed: int, index: int) -> int:
    """64-bit seed of shot ``index``; shots never share a stream."""
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def shot_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _measure(state: QuantumState, site, basis: Basis, draw=0.0, outcome=None, floor=DEFAULT.prob_floor):
    if state.m == 1:
        s, _ = qsim.measure(state, site, basis, draw, outcome=outcome, keep=True, prob_floor=floor)
        return s, None
    return qsim.measure(state, site, basis, draw, outcome=outcome, prob_floor=floor)


# ---------------------------------------------------------------------------
# oracle


def circuit_state(c: Circuit, config: SimConfig = DEFAULT) -> np.ndarray:
    """``U_circuit |+...+>`` as a vector, wire 0 on the most significant bit."""
    if c.n > config.oracle_max_qubits:
        raise OracleLimitError(f"{c.n} wires exceeds the oracle limit of {config.oracle_max_qubits}")
    psi = qsim.init_plus(tuple(range(c.n)), config.max_qubits)
    for g in c.gates:
        if g.kind == "CNOT":
            psi = qsim.apply_cnot(psi, *g.qubits)
        else:
            psi = qsim.apply_unitary1(psi, g.qubits[0], g.unitary())
    return psi.amplitudes.copy()


def oracle_distribution(c: Circuit, config: SimConfig = DEFAULT) -> dict:
    """Exact Z readout distribution of ``U_circuit |+...+>``; keys are bit strings, wire 0 first."""
    probs = np.abs(circuit_state(c, config)) ** 2
    return {format(i, f"0{c.n}b"): float(pr) for i, pr in enumerate(probs) if pr > config.prob_floor}


def corrected_readouts(residual: np.ndarray, target: np.ndarray, readout: tuple, tol: float) -> set:
    """Readouts ``r + x(P)`` for every Pauli ``P`` with ``P target ~ residual``.

    This is the oracle's own reading of a raw readout: it looks only at the
    output state and the ideal circuit state, never at the controller.
    """
    n = len(readout)
    out = set()
    for img in pauli.all_images(n):
        cand = pauli.to_pauli(img) @ target
        if abs(np.vdot(cand, residual)) ** 2 >= 1 - tol:
            out.add(tuple(r ^ x for r, x in zip(readout, img.x_part)))
    return out


# ---------------------------------------------------------------------------
# full-cluster mode


def prepare_full(p: CompiledPattern, config: SimConfig = DEFAULT) -> QuantumState:
    if len(p.cluster) > config.max_qubits:
        raise RuntimeLimitError(f"cluster has {len(p.cluster)} sites (limit {config.max_qubits})")
    return make_cluster_state(p.cluster, config.max_qubits)


def run_shot_full(p: CompiledPattern, s: Schedule, seed: int, *, config: SimConfig = DEFAULT,
                  cluster_state: QuantumState | None = None, target: np.ndarray | None = None,
                  trace: bool = False) -> ShotRecord:
    """Entangle everything, then measure round by round.

    A twin copy of the state receives the same outcomes on every non-output
    site but never has its outputs read out; it is what ``final_fidelity``
    compares against ``to_pauli(I) U |+...+>``.
    """
    psi = prepare_full(p, config) if cluster_state is None else cluster_state
    rng = shot_rng(seed)
    floor = config.prob_floor
    outputs = set(p.outputs)
    outcomes = {}
    graph = p.cluster
    for f in sorted(p.fillers):
        s_f, psi, corr = remove_z(graph, psi, f, rng.random())
        psi = apply_corrections(psi, corr)
        graph = graph.without(f)
        outcomes[f] = s_f
    twin = psi
    flow = controller.init_flow(p, s, trace=trace)

    def step(site, basis):
        nonlocal psi, twin
        r, psi = _measure(psi, site, basis, rng.random(), floor=floor)
        if site not in outputs:
            _, twin = _measure(twin, site, basis, outcome=r, floor=floor)
        outcomes[site] = r
        return r

    q0 = {}
    for site in s.rounds[0]:
        q0[site] = outcomes[site] if site in p.fillers else step(site, p.basis[site])
    controller.finish_round0(flow, q0, p)
    for q in s.rounds[1:]:
        got = {j: step(j, Basis.plane(controller.adapt_angle(flow, j, p))) for j in q}
        controller.update(flow, got, p)
    res = controller.result(flow, p)

    readout = tuple(outcomes[o] for o in p.outputs)
    pre = flow.I
    for w, r in enumerate(readout):
        if r:
            pre = pre + pauli.PauliImage.x(p.n, w)
    fid = ok = None
    if p.n <= config.oracle_max_qubits:
        target = circuit_state(p.circuit, config) if target is None else target
        residual = twin.permuted(p.outputs).amplitudes
        fid = float(abs(np.vdot(pauli.to_pauli(pre) @ target, residual)) ** 2)
        if p.n <= 5:
            ok = res in corrected_readouts(residual, target, readout, config.fidelity_tol)
    return ShotRecord(seed, outcomes, res, fid, ok, len(graph), flow.trace)


# ---------------------------------------------------------------------------
# streamed mode


def run_shot_streamed(p: CompiledPattern, seed: int, *, config: SimConfig = DEFAULT,
                      trace: bool = False) -> ShotRecord:
    """Gate-by-gate: attach a block, entangle it, measure what it retires."""
    rng = shot_rng(seed)
    floor = config.prob_floor
    limit = p.n + 4
    flow = controller.init_flow(p, trace=trace)
    psi = qsim.init_plus(p.initial, config.max_qubits)
    outcomes = {}
    peak = psi.m
    for b in p.blocks:
        psi = qsim.attach(psi, b.new_sites, max_qubits=config.max_qubits)
        peak = max(peak, psi.m)
        if psi.m > limit:
            raise AssertionError(f"streamed frontier holds {psi.m} qubits (bound {limit})")
        for a, c in b.edges:
            psi = qsim.apply_cz(psi, a, c)
        for site in b.measure:
            basis = p.basis[site]
            if site in p.adaptive:
                basis = Basis.plane(controller.naive_angle(flow, site, p))
            r, psi = _measure(psi, site, basis, rng.random(), floor=floor)
            outcomes[site] = r
            controller.absorb(flow, site, r, p)
    for site in sorted(p.outputs):
        r, psi = _measure(psi, site, Basis.z(), rng.random(), floor=floor)
        outcomes[site] = r
        controller.absorb(flow, site, r, p)
    for f in p.fillers:
        controller.absorb(flow, f, 0, p)
    return ShotRecord(seed, outcomes, controller.result(flow, p), max_live=peak, trace=flow.trace)


def streamed_order(p: CompiledPattern) -> list:
    """Sites in the order streamed mode measures them."""
    return [s for b in p.blocks for s in b.measure] + sorted(p.outputs)


def run_streamed_batch(p: CompiledPattern, seeds, *, config: SimConfig = DEFAULT) -> list:
    """:func:`run_shot_streamed` for many shots at once, one state row per shot.

    Each row consumes its own Philox stream in the same order and applies the
    same outcome rule, so records agree with the one-shot path.
    """
    seeds = list(seeds)
    B = len(seeds)
    order = streamed_order(p)
    K = len(order)
    draws = np.empty((B, K))
    for i, sd in enumerate(seeds):
        draws[i] = shot_rng(sd).random(K)
    floor = config.prob_floor
    limit = p.n + 4
    live = list(p.initial)
    T = np.full((B, 2 ** len(live)), 2.0 ** (-len(live) / 2), dtype=complex)
    I_bits = np.full(B, p.F_init.bits, dtype=np.int64)
    flips = {j: np.zeros(B, dtype=bool) for j in p.adaptive}
    outcomes = {}
    peak = len(live)
    col = 0

    def measure(site, phase):
        nonlocal T
        m = len(live)
        ax = live.index(site)
        R = T.reshape(B, 2 ** ax, 2, 2 ** (m - ax - 1))
        t0, t1 = R[:, :, 0, :], R[:, :, 1, :]
        if phase is None:
            a0, a1 = t0, t1
        else:
            ph = phase[:, None, None]
            a0 = (t0 + ph * t1) * qsim._SQRT1_2
            a1 = (t0 - ph * t1) * qsim._SQRT1_2
        p0 = np.einsum("bij,bij->b", a0.conj(), a0).real
        total = np.einsum("bk,bk->b", T.conj(), T).real
        p1 = np.maximum(total - p0, 0.0)
        s = np.where(p0 < floor, True, np.where(p1 < floor, False, draws[:, col] >= p0 / total))
        live.pop(ax)
        if m > 1:
            new = np.where(s[:, None, None], a1, a0)
            pr = np.einsum("bij,bij->b", new.conj(), new).real
            T = (new / np.sqrt(pr)[:, None, None]).reshape(B, -1)
        return s

    def absorb(site, s):
        nonlocal I_bits
        outcomes[site] = s
        I_bits = np.where(s, I_bits ^ p.F[site].bits, I_bits)
        for j in p.fc[site]:
            flips[j] ^= s

    for b in p.blocks:
        k = len(b.new_sites)
        if k:
            T = (T[:, :, None] * np.full(2 ** k, 2.0 ** (-k / 2))).reshape(B, -1)
            live.extend(b.new_sites)
        peak = max(peak, len(live))
        if len(live) > limit:
            raise AssertionError(f"streamed frontier holds {len(live)} qubits (bound {limit})")
        m = len(live)
        for a, c in b.edges:
            idx = np.arange(2 ** m)
            both = ((idx >> (m - 1 - live.index(a))) & (idx >> (m - 1 - live.index(c))) & 1).astype(bool)
            T[:, both] *= -1
        for site in b.measure:
            basis = p.basis[site]
            if site in p.adaptive:
                phi = np.where(flips[site], -p.phi_init[site], p.phi_init[site])
                phase = np.exp(-1j * phi)
            elif basis.kind == "XY":
                phase = np.full(B, np.exp(-1j * basis.angle))
            else:
                phase = None
            absorb(site, measure(site, phase))
            col += 1
    for site in sorted(p.outputs):
        absorb(site, measure(site, None))
        col += 1
    x_mask = (1 << p.n) - 1
    records = []
    for i, sd in enumerate(seeds):
        x = int(I_bits[i]) & x_mask
        res = tuple((x >> w) & 1 for w in range(p.n))
        outs = {s: int(v[i]) for s, v in outcomes.items()}
        outs.update({f: 0 for f in p.fillers})
        records.append(ShotRecord(sd, outs, res, max_live=peak))
    return records


# ---------------------------------------------------------------------------
# experiments


def tv_distance(a: dict, b: dict) -> float:
    keys = set(a) | set(b)
    return 0.5 * sum(abs(a.get(k, 0.0) - b.get(k, 0.0)) for k in sorted(keys))


def chi2_pvalue(counts: dict, oracle: dict, shots: int) -> float:
    """Goodness of fit of observed counts against the oracle; 0 if anything lands off-support."""
    if any(k not in oracle for k in counts):
        return 0.0
    keys = sorted(oracle)
    if len(keys) == 1:
        return 1.0
    obs = np.array([counts.get(k, 0) for k in keys], dtype=float)
    exp = np.array([oracle[k] for k in keys]) * shots
    exp *= obs.sum() / exp.sum()
    return float(stats.chisquare(obs, exp).pvalue)


def run_shots(fn: Callable[[int], ShotRecord], seeds: list, threads: int = 1) -> list:
    if threads <= 1:
        return [fn(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, seeds))


def run_experiment(p: CompiledPattern, shots: int, seed: int, mode: str = "streamed", *,
                   schedule: Schedule | None = None, threads: int = 1,
                   config: SimConfig = DEFAULT, trace: bool = False) -> tuple[dict, list]:
    """Run ``shots`` shots and summarize; deterministic in ``(pattern, shots, seed, mode)``."""
    if mode not in ("full", "streamed"):
        raise ValueError(f"unknown mode {mode!r}")
    schedule = build_schedule(p) if schedule is None else schedule
    check_schedule(p, schedule)
    seeds = [shot_seed(seed, i) for i in range(shots)]
    if mode == "full":
        psi = prepare_full(p, config)
        target = circuit_state(p.circuit, config) if p.n <= config.oracle_max_qubits else None

        def fn(sd):
            return run_shot_full(p, schedule, sd, config=config, cluster_state=psi, target=target, trace=trace)

        records = run_shots(fn, seeds, threads)
    elif trace:
        records = run_shots(lambda sd: run_shot_streamed(p, sd, config=config, trace=True), seeds, threads)
    else:
        chunks = [seeds[i:i + BATCH] for i in range(0, len(seeds), BATCH)]
        parts = run_shots(lambda ch: run_streamed_batch(p, ch, config=config), chunks, threads)
        records = [r for part in parts for r in part]
    return summarize(p, schedule, records, shots, seed, mode, config), records


def summarize(p: CompiledPattern, schedule: Schedule, records: list, shots: int, seed: int,
              mode: str, config: SimConfig = DEFAULT) -> dict:
    counts = {}
    for r in records:
        counts[r.bits] = counts.get(r.bits, 0) + 1
    dist = {k: counts[k] / shots for k in sorted(counts)}
    summary = {
        "mode": mode,
        "qubits": p.n,
        "shots": shots,
        "seed": seed,
        "sites": len(p.cluster),
        "t_max": schedule.t_max,
        "round_sizes": schedule.sizes(),
        "distribution": dist,
        "oracle": None,
        "tv_distance": None,
        "tv_bound": None,
        "chi2_pvalue": None,
        "mean_final_fidelity": None,
        "min_final_fidelity": None,
        "readout_mismatches": None,
    }
    if p.n <= config.oracle_max_qubits:
        oracle = oracle_distribution(p.circuit, config)
        summary["oracle"] = oracle
        summary["tv_distance"] = tv_distance(dist, oracle)
        summary["tv_bound"] = config.tv_factor * math.sqrt(len(oracle) / shots)
        summary["chi2_pvalue"] = chi2_pvalue(counts, oracle, shots)
    fids = [r.final_fidelity for r in records if r.final_fidelity is not None]
    if fids:
        summary["mean_final_fidelity"] = math.fsum(fids) / len(fids)
        summary["min_final_fidelity"] = min(fids)
    checked = [r.readout_ok for r in records if r.readout_ok is not None]
    if checked:
        summary["readout_mismatches"] = sum(1 for ok in checked if not ok)
    return summary
