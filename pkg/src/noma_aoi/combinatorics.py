"""Conditional success-count distributions for one slot of SIC decoding.

Given ``i`` actually active nodes that pick SNR levels i.i.d. from ``bar_q``,
the receiver decodes levels top-down and a node succeeds iff its level holds
exactly one node and no higher-power level holds two or more.  Two flavours of
the success-count law are provided:

* :func:`beta_any`  -- P{exactly x of the i anonymous active nodes succeed};
* :func:`beta_u1`   -- P{a tagged node succeeds AND the success count is x},
  i.e. the joint law used when the tagged node is known to be active.

:func:`brute_force_success_dist` enumerates every level assignment and serves
as the independent oracle for both.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product

ENUMERATION_BOUND = 10 ** 7


def binom(n: int, k: int) -> float:
    """Binomial coefficient as a float; 0.0 for out-of-range arguments.

    Exact integer arithmetic up to n=60, log-gamma beyond that (adequate for
    sweeps pushing n to ~1024).
    """
    if k < 0 or n < 0 or k > n:
        return 0.0
    if n <= 60:
        return float(math.comb(n, k))
    return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


def gamma_max(i: int, k: int) -> int:
    """Maximum feasible success count with ``i`` active nodes on ``k`` levels.

    All i can succeed while they fit on distinct levels; with i > k the
    pigeonhole collision wipes out at least the collided level and everything
    below it, capping successes at k-1.
    """
    if i < 1 or k < 1:
        raise ValueError("i and k must be >= 1")
    return i if i <= k else k - 1


def _suffix_sums(bar_q):
    # tail[j] = probability mass of levels j.. (0-based); tail[K] = 0
    tail = [0.0] * (len(bar_q) + 1)
    for j in range(len(bar_q) - 1, -1, -1):
        tail[j] = tail[j + 1] + bar_q[j]
    return tail


def _none_below_succeeds(nrem, start, bar_q, tail):
    """P{all nrem nodes land on levels >= start and none of them succeeds}.

    The topmost occupied level among them decides: if it is singly occupied
    that node succeeds, otherwise everyone fails.
    """
    p_all_below = tail[start] ** nrem
    if nrem == 0:
        return p_all_below
    p_top_single = sum(
        nrem * bar_q[n] * tail[n + 1] ** (nrem - 1)
        for n in range(start, len(bar_q))
    )
    return p_all_below - p_top_single


@lru_cache(maxsize=200_000)
def _beta_any_cached(i: int, x: int, bar_q: tuple) -> float:
    kk = len(bar_q)
    tail = _suffix_sums(bar_q)
    if i == x + 1:
        return 0.0
    if x == 0:
        # complement of "the topmost occupied level is singly occupied"
        return 1.0 - sum(
            i * bar_q[k] * tail[k + 1] ** (i - 1) for k in range(kk)
        )
    if x == 1:
        return sum(
            i * bar_q[k] * _none_below_succeeds(i - 1, k + 1, bar_q, tail)
            for k in range(kk)
        )
    # x >= 2: the x winners occupy distinct levels with extremes k1, k2 and
    # x-2 intermediates strictly between; the i-x losers must all land below
    # k2 without producing a further success.
    coef = binom(i, x) * math.factorial(x)
    total = 0.0
    for k1 in range(kk - x + 1):
        for k2 in range(k1 + x - 1, kk):
            inner = 0.0
            for mids in combinations(range(k1 + 1, k2), x - 2):
                term = 1.0
                for n in mids:
                    term *= bar_q[n]
                inner += term
            if inner == 0.0:
                continue
            rest = _none_below_succeeds(i - x, k2 + 1, bar_q, tail)
            total += coef * bar_q[k1] * bar_q[k2] * inner * rest
    return total


def beta_any(i_star: int, x_star: int, bar_q) -> float:
    """P{exactly ``x_star`` of ``i_star`` anonymous active nodes succeed}."""
    bar_q = tuple(bar_q)
    if i_star < 1:
        raise ValueError("i_star must be >= 1")
    if x_star >= 0 and i_star == x_star + 1:
        return 0.0   # a collision always fails at least two nodes
    if not 0 <= x_star <= gamma_max(i_star, len(bar_q)):
        raise ValueError(f"x_star={x_star} infeasible for i_star={i_star}, "
                         f"k={len(bar_q)}")
    return _beta_any_cached(i_star, x_star, bar_q)


@lru_cache(maxsize=200_000)
def _beta_u1_cached(i: int, x: int, bar_q: tuple) -> float:
    kk = len(bar_q)
    tail = _suffix_sums(bar_q)
    if i == x + 1:
        return 0.0
    if x == 1:
        # the tagged node picks level k; every other active node lands below
        # without succeeding
        return sum(
            bar_q[k] * _none_below_succeeds(i - 1, k + 1, bar_q, tail)
            for k in range(kk)
        )
    # x >= 2: the tagged node plus x-1 of the other i-1 nodes occupy distinct
    # levels with extremes k1, k2; the i-x losers land below k2 and fail.
    coef = binom(i - 1, x - 1) * math.factorial(x)
    total = 0.0
    for k1 in range(kk - x + 1):
        for k2 in range(k1 + x - 1, kk):
            inner = 0.0
            for mids in combinations(range(k1 + 1, k2), x - 2):
                term = 1.0
                for n in mids:
                    term *= bar_q[n]
                inner += term
            if inner == 0.0:
                continue
            rest = _none_below_succeeds(i - x, k2 + 1, bar_q, tail)
            total += coef * bar_q[k1] * bar_q[k2] * inner * rest
    return total


def beta_u1(i: int, x: int, bar_q) -> float:
    """P{a tagged active node succeeds and the success count equals ``x``},
    given ``i`` active nodes in total (the tagged one included).

    Same case structure as :func:`beta_any` but with the winners anchored to
    the tagged node, so the combinatorial weight counts only assignments of
    the other i-1 nodes; by exchangeability it equals (x/i) * beta_any(i, x).
    """
    bar_q = tuple(bar_q)
    if i < 1:
        raise ValueError("i must be >= 1")
    if x >= 1 and i == x + 1:
        return 0.0   # a collision always fails at least two nodes
    if not 1 <= x <= gamma_max(i, len(bar_q)):
        raise ValueError(f"x={x} infeasible for i={i}, k={len(bar_q)}")
    return _beta_u1_cached(i, x, bar_q)


@dataclass(frozen=True)
class SuccessDistribution:
    """Distribution of the per-slot success count for ``i`` active nodes.

    ``values[x]`` is the probability of exactly x successes; when built with
    ``track_user1`` it is instead the joint probability that node 1 succeeds
    and the count equals x.
    """

    i: int
    values: dict


def brute_force_success_dist(i: int, bar_q, track_user1: bool = False) -> SuccessDistribution:
    """Exact success-count distribution by exhaustive enumeration.

    Walks all ``k**i`` level assignments, weights each by the product of
    ``bar_q`` entries, and applies the SIC rule directly: a node at level k
    succeeds iff level k holds exactly one node and every higher-power level
    holds at most one.  Independent of the closed-form path, so it doubles as
    the oracle in the tests.

    Parameters
    ----------
    i : number of actually active nodes (>= 1)
    bar_q : effective level-selection distribution
    track_user1 : if set, accumulate only events where node 1 succeeds

    Raises
    ------
    ValueError : if k**i exceeds the enumeration bound (10^7).
    """
    bar_q = tuple(bar_q)
    kk = len(bar_q)
    if i < 1:
        raise ValueError("i must be >= 1")
    if kk ** i > ENUMERATION_BOUND:
        raise ValueError(f"enumeration of {kk}**{i} assignments exceeds bound")
    dist = {}
    for assignment in product(range(kk), repeat=i):
        weight = 1.0
        for k in assignment:
            weight *= bar_q[k]
        if weight == 0.0:
            continue
        occ = [0] * kk
        for k in assignment:
            occ[k] += 1
        ok_above = True
        level_ok = [False] * kk
        for k in range(kk):
            level_ok[k] = ok_above and occ[k] == 1
            if occ[k] >= 2:
                ok_above = False
        successes = sum(1 for k in assignment if level_ok[k])
        if track_user1 and not level_ok[assignment[0]]:
            continue
        dist[successes] = dist.get(successes, 0.0) + weight
    return SuccessDistribution(i=i, values=dist)
