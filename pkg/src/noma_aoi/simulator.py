"""Slot-level Monte Carlo engine for the grant-free NOMA uplink.

Implements the protocol literally, per node and slot: Bernoulli arrivals into
one-packet buffers, attempted transmission, Rayleigh-faded power-feasibility
gating of the chosen SNR level, top-down SIC decoding, and the NRT/RT buffer
policies.  Completely independent of the closed-form analysis modules so the
two can cross-validate each other.

All randomness is drawn up front from a counter-based Philox stream keyed by
the run seed, one value per (slot, node) regardless of state, which makes a
run bit-reproducible and replications independent under any schedule.
"""

import csv
from dataclasses import dataclass

import numpy as np
from numba import njit

from .config import SnrLadder, SystemConfig, configure_snr_ladder, require_valid

STRATEGIES = ("nrt", "rt")


class ZeroDeliveryError(RuntimeError):
    """A run produced fewer than two deliveries, so the time-average AoI is
    undefined for it."""


@dataclass(frozen=True)
class SimResult:
    avg_aoi: float           # time units
    deliveries: tuple        # (t_gen, t_recv) slot-end indices, tagged node
    success_count: int       # tagged-node deliveries counted after warm-up
    buffered_slot_count: int  # slots (after warm-up) the tagged node held a packet
    slots: int
    seed: int
    strategy: str
    slot_duration: float


def slot_draws(cfg: SystemConfig, ladder: SnrLadder, slots: int, seed: int):
    """Pre-draw the per-(slot, node) randomness for one run.

    Returns (attempt, level_idx, feasible, arrival).  The level is drawn from
    the raw q first and feasibility is tested afterwards against the power
    budget, mirroring the choose-then-test factorization behind bar_p_tx.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    shape = (slots, cfg.m)
    attempt = rng.random(shape) < cfg.p_tx
    cum_q = np.cumsum(cfg.q)
    level_idx = np.searchsorted(cum_q, rng.random(shape), side="right")
    level_idx = np.minimum(level_idx, cfg.k - 1).astype(np.int64)
    h2 = rng.exponential(1.0, shape)
    feasible = h2 >= np.asarray(ladder.levels)[level_idx] / cfg.power
    arrival = rng.random(shape) < cfg.lam
    return attempt, level_idx, feasible, arrival


@njit(cache=True)
def _run_slots(m, k, slots, warmup, retain, attempt, level_idx, feasible, arrival):
    buf_gen = np.full(m, -1, np.int64)   # generation slot-end index, -1 = empty
    active = np.zeros(m, np.bool_)
    occupancy = np.zeros(k, np.int64)
    level_ok = np.zeros(k, np.bool_)
    gen_log = np.empty(slots, np.int64)
    recv_log = np.empty(slots, np.int64)
    n_deliv = 0
    buffered_u1 = 0
    occ_hist = np.zeros(m + 1, np.int64)
    trans_counts = np.zeros((m + 1, m + 1), np.int64)
    prev_nbuf = -1
    for s in range(1, slots + 1):
        row = s - 1
        nbuf = 0
        for j in range(m):
            if buf_gen[j] >= 0:
                nbuf += 1
        if s > warmup:
            occ_hist[nbuf] += 1
            if buf_gen[0] >= 0:
                buffered_u1 += 1
            if prev_nbuf >= 0:
                trans_counts[prev_nbuf, nbuf] += 1
            prev_nbuf = nbuf
        # who is actually on air, and the per-level occupancy
        for kk in range(k):
            occupancy[kk] = 0
        for j in range(m):
            active[j] = buf_gen[j] >= 0 and attempt[row, j] and feasible[row, j]
            if active[j]:
                occupancy[level_idx[row, j]] += 1
        # SIC: a level delivers iff singly occupied with no collision above
        ok_above = True
        for kk in range(k):
            level_ok[kk] = ok_above and occupancy[kk] == 1
            if occupancy[kk] >= 2:
                ok_above = False
        for j in range(m):
            if active[j] and level_ok[level_idx[row, j]]:
                if j == 0 and s > warmup:
                    gen_log[n_deliv] = buf_gen[0]
                    recv_log[n_deliv] = s
                    n_deliv += 1
                buf_gen[j] = -1
        # slot end: flush (NRT) or retain (RT), then arrivals replace/fill
        if not retain:
            for j in range(m):
                buf_gen[j] = -1
        for j in range(m):
            if arrival[row, j]:
                buf_gen[j] = s
    return (gen_log[:n_deliv], recv_log[:n_deliv], buffered_u1,
            occ_hist, trans_counts)


def aoi_from_deliveries(gen, recv, slot_duration: float) -> float:
    """Time-average AoI of the sawtooth reconstructed from a delivery log.

    Sums the trapezoid areas Q_j = D_j * S_{j-1} + D_j^2 / 2 over the
    inter-delivery intervals D_j and divides by the covered time.
    """
    gen = np.asarray(gen, dtype=np.float64)
    recv = np.asarray(recv, dtype=np.float64)
    if recv.size < 2:
        raise ZeroDeliveryError(
            f"only {recv.size} deliveries: average AoI undefined")
    t = slot_duration
    d = np.diff(recv) * t
    s_prev = (recv - gen)[:-1] * t
    q = d * s_prev + d * d / 2.0
    return float(q.sum() / d.sum())


def _resolve_strategy(strategy: str) -> str:
    s = strategy.lower()
    if s not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    return s


def run_simulation(cfg: SystemConfig, strategy: str, slots: int, seed: int,
                   warmup: int = 0) -> SimResult:
    """Simulate ``slots`` consecutive slots and return the tagged node's
    empirical AoI.

    Buffers start empty; statistics (deliveries, occupancy, buffered-slot
    counts) are collected for slots after ``warmup``.  Deterministic for a
    fixed (cfg, strategy, slots, seed).
    """
    require_valid(cfg)
    strategy = _resolve_strategy(strategy)
    if slots < 1:
        raise ValueError("slots must be >= 1")
    if not 0 <= warmup < slots:
        raise ValueError("warmup must be in [0, slots)")
    ladder = configure_snr_ladder(cfg)
    attempt, level_idx, feasible, arrival = slot_draws(cfg, ladder, slots, seed)
    gen, recv, buffered_u1, _, _ = _run_slots(
        cfg.m, cfg.k, slots, warmup, strategy == "rt",
        attempt, level_idx, feasible, arrival)
    avg = aoi_from_deliveries(gen, recv, cfg.slot_duration)
    return SimResult(
        avg_aoi=avg,
        deliveries=tuple(zip(gen.tolist(), recv.tolist())),
        success_count=int(gen.size),
        buffered_slot_count=int(buffered_u1),
        slots=slots,
        seed=seed,
        strategy=strategy,
        slot_duration=cfg.slot_duration,
    )


@dataclass(frozen=True)
class ReplicationSummary:
    mean: float
    stderr: float
    values: tuple


def run_replications(cfg: SystemConfig, strategy: str, slots: int,
                     base_seed: int, reps: int, warmup: int = 0) -> ReplicationSummary:
    """Independent replications with derived seeds base_seed + r.

    Returns the mean and standard error of the per-replication average AoI;
    the output does not depend on any execution schedule.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    values = tuple(
        run_simulation(cfg, strategy, slots, base_seed + r, warmup).avg_aoi
        for r in range(reps)
    )
    arr = np.asarray(values)
    stderr = float(arr.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return ReplicationSummary(mean=float(arr.mean()), stderr=stderr, values=values)


def empirical_state_occupancy(cfg: SystemConfig, slots: int, seed: int,
                              warmup: int = 0) -> np.ndarray:
    """Frequency of the buffered-node count at slot starts over an RT run
    (statistical oracle for the buffered-count chain's stationary law)."""
    require_valid(cfg)
    ladder = configure_snr_ladder(cfg)
    draws = slot_draws(cfg, ladder, slots, seed)
    _, _, _, occ_hist, _ = _run_slots(cfg.m, cfg.k, slots, warmup, True, *draws)
    return occ_hist / occ_hist.sum()


def empirical_transition_counts(cfg: SystemConfig, slots: int, seed: int,
                                warmup: int = 0) -> np.ndarray:
    """Observed slot-to-slot transition counts of the buffered-node count
    over an RT run (statistical oracle for the transition matrix)."""
    require_valid(cfg)
    ladder = configure_snr_ladder(cfg)
    draws = slot_draws(cfg, ladder, slots, seed)
    _, _, _, _, trans = _run_slots(cfg.m, cfg.k, slots, warmup, True, *draws)
    return trans


def export_deliveries_csv(result: SimResult, path) -> None:
    """Write the delivery log as CSV rows (j, t_j, t'_j, D_j, S_j, Q_j).

    Times are in time units (slot indices scaled by the slot duration);
    D_j and Q_j are empty for the first logged delivery.
    """
    t = result.slot_duration
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["j", "t_gen", "t_recv", "D", "S", "Q"])
        prev_recv = None
        for j, (tg, tr) in enumerate(result.deliveries, start=1):
            s_j = (tr - tg) * t
            if prev_recv is None:
                writer.writerow([j, f"{tg * t:.10g}", f"{tr * t:.10g}", "",
                                 f"{s_j:.10g}", ""])
            else:
                d_j = (tr - prev_recv) * t
                q_j = d_j * prev_s + d_j * d_j / 2.0
                writer.writerow([j, f"{tg * t:.10g}", f"{tr * t:.10g}",
                                 f"{d_j:.10g}", f"{s_j:.10g}", f"{q_j:.10g}"])
            prev_recv, prev_s = tr, s_j
