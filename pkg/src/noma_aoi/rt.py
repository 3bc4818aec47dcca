"""Closed-form average AoI for the retransmission (RT) strategy.

A failed packet stays buffered, so slots are coupled through the number of
buffered nodes.  That count evolves as an (m+1)-state Markov chain whose
stationary law weights the conditional success probability of a tagged
buffered node; the delivery cycle of the tagged node is then an absorbing
chain whose fundamental matrix yields the interval moments.
"""

import math
from dataclasses import dataclass

import numpy as np

from .combinatorics import beta_any, beta_u1, binom
from .config import (DegenerateConfigError, SnrLadder, SystemConfig,
                     configure_snr_ladder, require_valid)

STATIONARY_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class BufferChain:
    """Markov chain of the number of buffered nodes at slot starts.

    ``transition[b, a]`` is the one-slot probability of moving from b to a
    buffered nodes; ``stationary`` its invariant law; ``conditional_given_u1``
    the law of the number of OTHER buffered nodes given the tagged node is
    buffered (length m, index = other count).
    """

    transition: np.ndarray
    stationary: np.ndarray
    conditional_given_u1: np.ndarray


@dataclass(frozen=True)
class AbsorbingMoments:
    expected_steps: float           # E{n}: slots from one delivery epoch to the next
    variance_steps: float           # sigma^2(n)
    mean_interval: float            # E{D} = T (E{n} - 1)
    second_moment_interval: float   # E{D^2}
    mean_system_time: float         # E{S}


def transition_matrix(ladder: SnrLadder, cfg: SystemConfig) -> np.ndarray:
    """Row-stochastic (m+1)x(m+1) transition matrix of the buffered-count
    chain.

    From state b, x* of the buffered nodes deliver (each buffered node is
    active independently with probability bar_p_tx; the success count law is
    the anonymous one), then each of the m-b+x* empty buffers refills
    independently with probability lam.  Terms whose binomial arguments are
    out of range contribute zero.
    """
    require_valid(cfg)
    m, kk, lam, bar_p = cfg.m, cfg.k, cfg.lam, ladder.bar_p_tx
    matrix = np.zeros((m + 1, m + 1))
    for b in range(m + 1):
        for a in range(m + 1):
            total = 0.0
            for xs in range(max(b - a, 0), min(b, kk) + 1):
                arrivals = (binom(m - b + xs, a - b + xs)
                            * lam ** (a - b + xs) * (1.0 - lam) ** (m - a))
                if arrivals == 0.0:
                    continue
                i_hi = kk if xs == kk else b
                inner = 0.0
                for i_star in range(xs, i_hi + 1):
                    if i_star == 0:
                        inner += (1.0 - bar_p) ** b   # nobody active, xs == 0
                        continue
                    inner += (binom(b, i_star) * (1.0 - bar_p) ** (b - i_star)
                              * bar_p ** i_star * beta_any(i_star, xs, ladder.bar_q))
                total += arrivals * inner
            matrix[b, a] = total
    matrix[matrix < 0.0] = 0.0   # clamp -1e-17-level noise
    return matrix


def stationary_distribution(transition: np.ndarray) -> np.ndarray:
    """Invariant law pi of a row-stochastic matrix (pi @ P = pi, sum pi = 1).

    Solves the balance equations with one of them replaced by the
    normalization constraint; if the resulting fixed-point residual is not
    tight (singular to working precision) falls back to power iteration.
    """
    p = np.asarray(transition, dtype=float)
    n = p.shape[0]
    a = p.T - np.eye(n)
    a[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    try:
        pi = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError:
        pi = None
    if pi is None or np.abs(pi @ p - pi).max() > STATIONARY_RESIDUAL_TOL:
        pi = np.full(n, 1.0 / n)
        for _ in range(10 ** 6):
            nxt = pi @ p
            nxt /= nxt.sum()
            if np.abs(nxt - pi).max() < 1e-12:
                pi = nxt
                break
            pi = nxt
        else:
            raise RuntimeError("stationary distribution did not converge")
    pi = np.where(pi < 0.0, 0.0, pi)
    return pi / pi.sum()


def buffer_chain(ladder: SnrLadder, cfg: SystemConfig) -> BufferChain:
    """Assemble transition matrix, stationary law, and the tagged-node
    conditional buffered-count distribution."""
    transition = transition_matrix(ladder, cfg)
    pi = stationary_distribution(transition)
    # P{tagged node buffered together with exactly m others} ~ (m+1)/M * pi_{m+1}
    weights = np.array([(m + 1) / cfg.m * pi[m + 1] for m in range(cfg.m)])
    total = weights.sum()
    if total <= 0.0:
        raise DegenerateConfigError("tagged node is never buffered")
    return BufferChain(transition=transition, stationary=pi,
                       conditional_given_u1=weights / total)


def success_prob_rt(ladder: SnrLadder, cfg: SystemConfig,
                    chain: BufferChain = None) -> float:
    """Conditional per-slot success probability of the tagged node given it
    holds a packet at the slot start (steady state).

    Averages the tagged-node success law over the stationary number of other
    buffered nodes; given m others, i-1 of them and the tagged node are
    active, and the tagged node's joint success law applies.
    """
    if chain is None:
        chain = buffer_chain(ladder, cfg)
    kk, bar_p = cfg.k, ladder.bar_p_tx
    total = 0.0
    for m in range(cfg.m):
        weight = chain.conditional_given_u1[m]
        if weight == 0.0:
            continue
        acc = 0.0
        for x in range(1, min(m + 1, kk) + 1):
            i_hi = kk if x == kk else m + 1
            for i in range(x, i_hi + 1):
                acc += (binom(m, i - 1) * (1.0 - bar_p) ** (m - i + 1)
                        * bar_p ** i * beta_u1(i, x, ladder.bar_q))
        total += weight * acc
    return total


def absorbing_moments(lam: float, p_tilde: float, slot_duration: float = 1.0) -> AbsorbingMoments:
    """Interval moments of the RT delivery cycle via the absorbing chain.

    Transient states: delivery epoch, empty buffer, buffered; absorption is
    the next delivery.  N = (I-Q)^{-1} gives expected visit counts, its row
    sums the expected steps, and (2N-I)v - v*v the variance of the steps.
    """
    if not 0.0 < lam <= 1.0 or not 0.0 < p_tilde <= 1.0:
        raise ValueError("lam and p_tilde must be in (0, 1]")
    q = np.array([
        [0.0, 1.0 - lam, lam],
        [0.0, 1.0 - lam, lam],
        [0.0, 0.0, 1.0 - p_tilde],
    ])
    n = np.linalg.inv(np.eye(3) - q)
    v = n @ np.ones(3)
    phi = (2.0 * n - np.eye(3)) @ v - v * v
    steps, var = v[0], phi[0]
    t = slot_duration
    return AbsorbingMoments(
        expected_steps=steps,
        variance_steps=var,
        mean_interval=t * (steps - 1.0),
        second_moment_interval=t * t * (var + steps * steps - 2.0 * steps + 1.0),
        mean_system_time=t / (1.0 - (1.0 - lam) * (1.0 - p_tilde)),
    )


def average_aoi_rt(cfg: SystemConfig, p_tilde: float = None) -> float:
    """Average AoI of the RT scheme.

    Evaluates the closed form and, as a self-check, the equivalent
    moment composition E{S} + E{D^2}/(2 E{D}); they must agree.
    """
    require_valid(cfg)
    if p_tilde is None:
        ladder = configure_snr_ladder(cfg)
        p_tilde = success_prob_rt(ladder, cfg)
    if p_tilde <= 0.0:
        raise DegenerateConfigError("conditional success probability is zero")
    lam, t = cfg.lam, cfg.slot_duration
    numer = (2.0 * (lam * lam + p_tilde * p_tilde)
             - lam * p_tilde * (3.0 * lam + 3.0 * p_tilde - lam * p_tilde - 2.0))
    closed = (t / (1.0 - (1.0 - lam) * (1.0 - p_tilde))
              + t * numer / (2.0 * lam * p_tilde * (lam + p_tilde - lam * p_tilde)))
    mom = absorbing_moments(lam, p_tilde, t)
    composed = mom.mean_system_time + mom.second_moment_interval / (2.0 * mom.mean_interval)
    # the fundamental-matrix path recovers p_tilde as 1-(1-p_tilde), so its
    # relative accuracy is limited to ~eps/p_tilde; grant that headroom
    rel = 1e-12 + 32.0 * math.ulp(1.0) * (1.0 / p_tilde + 1.0 / lam)
    if abs(closed - composed) > rel * abs(closed) + 1e-9:
        raise ArithmeticError(
            f"closed form {closed!r} and moment composition {composed!r} disagree")
    return closed
