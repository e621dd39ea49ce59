"""Randomized apportionment.

   Given per-cluster shares summing to an integer k, build a lottery over
   integer allocations such that every cluster receives its share rounded
   down or up, the allocations sum to k, and the expected allocation of every
   cluster equals its share exactly. The support of the lottery has at most
   one allocation per cluster.

   Clusters are sorted by increasing fractional part (ties by cluster index)
   and two cursors walk towards each other: ``low`` marks the first of the
   ``alpha`` clusters currently rounded up, every cluster above ``high`` has
   already been settled as rounded up. Each iteration emits one allocation
   and gives it the largest probability that neither exhausts the rounding-up
   need of the cluster at ``low`` nor the rounding-down need of the cluster at
   ``high``.

   This file is part of the peerselect distribution.

"""

from fractions import Fraction
import itertools
import math
from . import datatype as mod_datatype
from . import error as mod_error
from . import logger as mod_logger

#: Largest number of fractional shares accepted by the enumeration
MAX_FRACTIONAL = 25


def _as_share_vector(shares):
    if isinstance(shares, mod_datatype.ShareVector):
        return shares
    return mod_datatype.ShareVector.from_values(shares)


def allocation_trace(shares):
    """Run the apportionment loop and return every iteration.

    Zero-probability iterations are included, and so are allocations that are
    only ever given probability 0.

    :param shares: share vector, or a list of shares summing to an integer
    :type shares: ShareVector or list
    :return: one step per iteration
    :rtype: list[ApportionStep]
    :raises ValidationError: if the shares are invalid

    """
    shares = _as_share_vector(shares)
    ell = shares.ell
    fractions = shares.fractional_parts()
    floors = shares.floors()
    order = sorted(range(ell), key=lambda cluster: (fractions[cluster], cluster))
    # Sorted needs for rounding up and rounding down.
    up = [fractions[cluster] for cluster in order]
    down = [1 - fraction for fraction in up]
    alpha = sum(up, Fraction(0))
    if alpha.denominator != 1:
        raise mod_error.ValidationError(f"Fractional parts sum to {alpha}, which is not an integer")
    alpha = int(alpha)
    low = 0
    high = ell - 1
    p = [Fraction(0)] * ell
    pbar = Fraction(0)
    steps = []
    while low <= high:
        rounded_up = set(range(low, low + alpha)) | set(range(high + 1, ell))
        quotas = [0] * ell
        for position, cluster in enumerate(order):
            quotas[cluster] = floors[cluster] + (1 if position in rounded_up else 0)
        step_low, step_high, step_alpha = low, high, alpha
        if alpha == 0:
            probability = 1 - pbar
            high -= 1
        elif up[low] - p[low] < down[high] - pbar + p[high]:
            probability = up[low] - p[low]
            low += 1
        else:
            probability = down[high] - pbar + p[high]
            high -= 1
            alpha -= 1
        for position in rounded_up:
            p[position] += probability
        pbar += probability
        state = mod_datatype.ApportionState(alpha, low, high,
                                            [p[order.index(cluster)] for cluster in range(ell)], pbar)
        mod_logger.log.debug(f"Allocation {quotas} with probability {probability}, low={low} high={high} alpha={alpha}")
        steps.append(mod_datatype.ApportionStep(step_low, step_high, step_alpha, tuple(quotas), probability, state))
    return steps


def allocation_from_shares(shares):
    """Return the lottery over nice allocations for the shares.

    Allocations given probability 0 by the loop are dropped, and the remaining
    ones are listed in the order the loop produced them.

    :param shares: share vector, or a list of shares summing to an integer
    :type shares: ShareVector or list
    :return: distribution whose expected allocation equals the shares
    :rtype: AllocationDistribution
    :raises ValidationError: if the shares are invalid

    """
    shares = _as_share_vector(shares)
    support = {}
    for step in allocation_trace(shares):
        if step.probability > 0:
            support[step.allocation] = support.get(step.allocation, Fraction(0)) + step.probability
    distribution = mod_datatype.AllocationDistribution(list(support.items()), shares=shares)
    mod_logger.log.info(f"Distribution over {len(distribution)} allocations for shares {[str(s) for s in shares]}")
    return distribution


def sample_allocation(dist, seed=None):
    """Draw an allocation by inverse CDF over the support in its fixed order.

    :param dist: distribution over allocations
    :type dist: AllocationDistribution
    :param seed: randomization seed
    :type seed: int, Seed, numpy.random.SeedSequence or numpy.random.Generator
    :return: allocation from the support
    :rtype: NiceAllocation

    """
    rng = mod_datatype.make_rng(seed)
    u = Fraction(float(rng.random()))
    cumulative = Fraction(0)
    for allocation, probability in dist:
        cumulative += probability
        if u < cumulative:
            return allocation
    return dist.support[-1][0]


def expected_allocation(dist):
    """Return the exact expected quota of every cluster.

    :param dist: distribution over allocations
    :type dist: AllocationDistribution
    :rtype: list[Fraction]

    """
    ell = len(dist.support[0][0])
    expectation = [Fraction(0)] * ell
    for allocation, probability in dist:
        for cluster, quota in enumerate(allocation):
            expectation[cluster] += probability * quota
    return expectation


def rounding_probabilities(dist):
    """Return, for every cluster, the probability that its share is rounded up."""
    shares = dist.shares
    result = [Fraction(0)] * len(dist.support[0][0])
    for allocation, probability in dist:
        for cluster, quota in enumerate(allocation):
            if shares is None or quota > math.floor(shares[cluster]):
                result[cluster] += probability
    return result


def enumerate_nice_allocations(shares):
    """Return every allocation satisfying the quota rule.

    :param shares: share vector, or a list of shares summing to an integer
    :type shares: ShareVector or list
    :return: all vectors rounding each share down or up and summing to k
    :rtype: list[NiceAllocation]
    :raises ValidationError: if more than :data:`MAX_FRACTIONAL` shares are fractional

    """
    shares = _as_share_vector(shares)
    floors = shares.floors()
    fractional = [cluster for cluster, fraction in enumerate(shares.fractional_parts()) if fraction]
    if len(fractional) > MAX_FRACTIONAL:
        raise mod_error.ValidationError(
            f"{len(fractional)} fractional shares exceed the enumeration limit of {MAX_FRACTIONAL}")
    alpha = shares.k - sum(floors)
    allocations = []
    for rounded_up in itertools.combinations(fractional, alpha):
        quotas = list(floors)
        for cluster in rounded_up:
            quotas[cluster] += 1
        allocations.append(mod_datatype.NiceAllocation(quotas))
    return allocations


def allocation_schedule(dist, rounds):
    """Return a deterministic sequence of allocations for repeated selection.

    Every allocation is used ``round(probability * rounds)`` times (largest
    remainders break the rounding), which is exact when ``rounds`` is a
    multiple of every probability denominator. The uses are interleaved so
    that every prefix of the schedule stays close to the distribution.

    :param dist: distribution over allocations
    :type dist: AllocationDistribution
    :param rounds: length of the schedule
    :type rounds: int
    :rtype: list[NiceAllocation]

    """
    if rounds < 0:
        raise mod_error.ValidationError(f"Number of rounds must be nonnegative, got {rounds}")
    targets = [probability * rounds for _, probability in dist]
    counts = [math.floor(target) for target in targets]
    remainders = sorted(range(len(targets)), key=lambda index: (-(targets[index] - counts[index]), index))
    for index in remainders[:rounds - sum(counts)]:
        counts[index] += 1
    used = [0] * len(counts)
    schedule = []
    for position in range(rounds):
        candidates = [index for index in range(len(counts)) if used[index] < counts[index]]
        index = max(candidates,
                    key=lambda index: (Fraction(counts[index] * (position + 1), rounds) - used[index], -index))
        used[index] += 1
        schedule.append(dist.support[index][0])
    return schedule
