"""Closed-form average AoI for the no-retransmission (NRT) strategy.

Buffers are flushed at every slot end, so slots are i.i.d. and the delivery
process of a tagged node is Bernoulli with the per-slot success probability
computed by :func:`success_prob_nrt`.  Inter-delivery intervals are then
geometric and the average AoI follows in closed form.
"""

import math
from dataclasses import dataclass, replace

from .combinatorics import beta_u1, binom, gamma_max
from .config import (DegenerateConfigError, SnrLadder, SystemConfig,
                     configure_snr_ladder, require_valid)


class BracketError(RuntimeError):
    """The transcendental optimality equation has no sign change on the
    searched interval; callers should fall back to a grid search."""


@dataclass(frozen=True)
class NrtResult:
    success_prob: float            # per-slot delivery probability of the tagged node
    mean_interval: float           # E{D}
    second_moment_interval: float  # E{D^2}
    avg_aoi: float


def success_prob_nrt(ladder: SnrLadder, cfg: SystemConfig) -> float:
    """Per-slot probability that the tagged node completes a status update.

    Conditions on the number i of actually active nodes (tagged one included,
    each of the others active independently with probability lam*bar_p_tx)
    and sums the joint success law over all feasible success counts.
    """
    a = cfg.lam * ladder.bar_p_tx
    total = 0.0
    for i in range(1, cfg.m + 1):
        p_i = binom(cfg.m - 1, i - 1) * a ** i * (1.0 - a) ** (cfg.m - i)
        if p_i == 0.0:
            continue
        total += p_i * sum(
            beta_u1(i, x, ladder.bar_q)
            for x in range(1, gamma_max(i, cfg.k) + 1)
        )
    return total


def average_aoi_nrt(cfg: SystemConfig, ladder: SnrLadder = None) -> NrtResult:
    """Average AoI of the NRT scheme: T/2 + T/P_success.

    Inter-delivery steps are geometric(P_success), so E{D} = T/P and
    E{D^2} = T^2 (2-P)/P^2; the delivered packet is always exactly one slot
    old (E{S} = T).
    """
    require_valid(cfg)
    if ladder is None:
        ladder = configure_snr_ladder(cfg)
    if cfg.lam * ladder.bar_p_tx <= 0.0:
        raise DegenerateConfigError("lam * bar_p_tx is zero: AoI is unbounded")
    p1 = success_prob_nrt(ladder, cfg)
    t = cfg.slot_duration
    return NrtResult(
        success_prob=p1,
        mean_interval=t / p1,
        second_moment_interval=t * t * (2.0 - p1) / (p1 * p1),
        avg_aoi=t / 2.0 + t / p1,
    )


def _corollary_objective(eta: float, q1: float, q2: float) -> float:
    # stationarity condition of the large-m success probability in eta,
    # common positive factor lam dropped
    return ((-eta * eta * q2 / q1 + (2.0 * q1 - 1.0) * q2 * eta / q1 + q2)
            * math.exp(-eta / q1)
            + (1.0 - eta) * q1 * math.exp(-eta))


def optimal_ptx_nrt_k2(cfg: SystemConfig, bracket_extension: float = 8.0) -> float:
    """Closed-form (large-m asymptotic) optimal transmission probability for
    the NRT scheme with exactly two SNR levels.

    Solves the stationarity equation for eta by bisection, starting from the
    interval [sqrt(1+4*q1^2)/2, 1]; when the objective does not change sign
    there (which happens for q1 > 2/3, where the root sits slightly above 1)
    the upper end is extended geometrically up to ``bracket_extension``.
    The effective optimum bar_p_tx = eta/(lam*m*q1) is then mapped back to an
    attempted probability through the configured ladder's feasibility weights
    and clamped to (0, 1].

    Raises :class:`BracketError` when no sign change is found.
    """
    require_valid(cfg)
    if cfg.k != 2:
        raise ValueError("closed-form optimizer is defined for k=2 only")
    q1, q2 = cfg.q
    if q1 <= 0.0 or q2 <= 0.0:
        raise ValueError("both q entries must be positive for k=2 optimizer")

    lo = math.sqrt(1.0 + 4.0 * q1 * q1) / 2.0
    hi = 1.0
    f_lo = _corollary_objective(lo, q1, q2)
    f_hi = _corollary_objective(hi, q1, q2)
    while f_lo * f_hi > 0.0 and hi < bracket_extension:
        hi = min(bracket_extension, hi * 1.5)
        f_hi = _corollary_objective(hi, q1, q2)
    if f_lo * f_hi > 0.0:
        raise BracketError(
            f"no sign change on [{lo:.6f}, {hi:.6f}]; use grid search instead")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = _corollary_objective(mid, q1, q2)
        if f_mid == 0.0 or hi - lo < 1e-10:
            lo = hi = mid
            break
        if f_lo * f_mid < 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    eta = 0.5 * (lo + hi)

    bar_p_star = eta / (cfg.lam * cfg.m * q1)
    ladder = configure_snr_ladder(cfg)
    feasibility = ladder.bar_p_tx / cfg.p_tx   # sum_j q_j exp(-levels[j]/power)
    return min(1.0, bar_p_star / feasibility)


def ptx_grid_argmin(cfg: SystemConfig, scheme: str, grid_step: float = 0.01) -> float:
    """Attempted-transmission probability minimizing the analytical average
    AoI over the grid {grid_step, 2*grid_step, ..., 1.0}; ties break toward
    the smaller value.
    """
    from .rt import average_aoi_rt   # local import: rt depends on this module's sibling

    if not 0.0 < grid_step <= 0.5:
        raise ValueError("grid_step must be in (0, 0.5]")
    scheme = scheme.lower()
    if scheme not in ("nrt", "rt"):
        raise ValueError(f"unknown scheme {scheme!r}")

    npoints = round(1.0 / grid_step)
    best_p, best_aoi = None, math.inf
    for j in range(1, npoints + 1):
        p = min(1.0, round(j * grid_step, 12))
        trial = replace(cfg, p_tx=p)
        if scheme == "nrt":
            aoi = average_aoi_nrt(trial).avg_aoi
        else:
            aoi = average_aoi_rt(trial)
        if aoi < best_aoi:
            best_p, best_aoi = p, aoi
    return best_p
