from collections import Counter
from fractions import Fraction
import math
import numpy as np
import pytest
from peerselect import apportion as mod_apportion
from peerselect import datatype as mod_datatype
from peerselect import error as mod_error
from conftest import FIVE_SHARES, EIGHT_SHARES


def as_dict(distribution):
    return {allocation.quotas: probability for allocation, probability in distribution}


def random_shares(rng):
    """Return random shares over at most 12 clusters with a common denominator of at most 10^6."""
    ell = int(rng.integers(1, 13))
    k = int(rng.integers(0, 40))
    denominator = int(rng.integers(1, 10**6 + 1))
    cuts = sorted(int(cut) for cut in rng.integers(0, k * denominator + 1, size=ell - 1))
    bounds = [0, *cuts, k * denominator]
    return mod_datatype.ShareVector([Fraction(bounds[i + 1] - bounds[i], denominator) for i in range(ell)], k)


def test_five_shares_distribution():
    distribution = mod_apportion.allocation_from_shares(FIVE_SHARES)
    assert as_dict(distribution) == {
        (2, 3, 1, 1, 1): Fraction(1, 10),
        (1, 2, 2, 2, 1): Fraction(1, 10),
        (1, 2, 2, 1, 2): Fraction(1, 5),
        (1, 2, 1, 2, 2): Fraction(3, 5),
    }
    assert [allocation.quotas for allocation in distribution.allocations()] == [
        (2, 3, 1, 1, 1), (1, 2, 2, 2, 1), (1, 2, 2, 1, 2), (1, 2, 1, 2, 2)]


def test_five_shares_trace_includes_zero_probability_step():
    steps = mod_apportion.allocation_trace(FIVE_SHARES)
    assert [step.allocation for step in steps] == [
        (2, 3, 1, 1, 1), (1, 3, 2, 1, 1), (1, 2, 2, 2, 1), (1, 2, 2, 1, 2), (1, 2, 1, 2, 2)]
    assert [step.probability for step in steps] == [
        Fraction(1, 10), 0, Fraction(1, 10), Fraction(1, 5), Fraction(3, 5)]
    assert steps[-1].state.pbar == 1


def test_integer_shares():
    distribution = mod_apportion.allocation_from_shares([2, 1, 3])
    assert as_dict(distribution) == {(2, 1, 3): 1}


def test_eight_shares_distribution():
    distribution = mod_apportion.allocation_from_shares(EIGHT_SHARES)
    assert as_dict(distribution) == {
        (1, 1, 2, 1): Fraction('0.016625'),
        (1, 2, 1, 1): Fraction('0.21775'),
        (2, 1, 1, 1): Fraction('0.220375'),
        (1, 1, 1, 2): Fraction('0.54525'),
    }
    most_likely = max(distribution, key=lambda item: item[1])[0]
    assert most_likely.quotas == (1, 1, 1, 2)
    assert sum(probability for allocation, probability in distribution if allocation[3] == 2) == Fraction('0.54525')


def test_halves():
    distribution = mod_apportion.allocation_from_shares(['1.5', '1.5'])
    assert as_dict(distribution) == {(2, 1): Fraction(1, 2), (1, 2): Fraction(1, 2)}


def test_rejects_fractional_total():
    with pytest.raises(mod_error.ValidationError):
        mod_apportion.allocation_from_shares(['1.1', '1.2'])


def test_sample_single_support():
    distribution = mod_apportion.allocation_from_shares([2, 1, 3])
    for seed in range(10):
        assert mod_apportion.sample_allocation(distribution, seed).quotas == (2, 1, 3)


def test_sample_is_deterministic():
    distribution = mod_apportion.allocation_from_shares(FIVE_SHARES)
    assert mod_apportion.sample_allocation(distribution, 42) == mod_apportion.sample_allocation(distribution, 42)


def test_sample_frequencies():
    distribution = mod_apportion.allocation_from_shares(FIVE_SHARES)
    rng = np.random.default_rng(2024)
    draws = 10**5
    counts = Counter(mod_apportion.sample_allocation(distribution, rng).quotas for _ in range(draws))
    error = math.sqrt(0.6 * 0.4 / draws)
    assert abs(counts[(1, 2, 1, 2, 2)] / draws - 0.6) < 4 * error
    assert set(counts) <= set(as_dict(distribution))


def test_expected_allocation():
    distribution = mod_apportion.allocation_from_shares(FIVE_SHARES)
    assert mod_apportion.expected_allocation(distribution) == FIVE_SHARES
    single = mod_apportion.allocation_from_shares([2, 1, 3])
    assert mod_apportion.expected_allocation(single) == [2, 1, 3]


def test_rounding_probabilities_are_fractional_parts():
    distribution = mod_apportion.allocation_from_shares(EIGHT_SHARES)
    assert mod_apportion.rounding_probabilities(distribution) == [share - 1 for share in EIGHT_SHARES]


def test_enumerate_halves():
    allocations = mod_apportion.enumerate_nice_allocations(['1.5', '1.5'])
    assert {allocation.quotas for allocation in allocations} == {(1, 2), (2, 1)}


def test_enumerate_five_shares():
    allocations = mod_apportion.enumerate_nice_allocations(FIVE_SHARES)
    assert len(allocations) == 10
    assert all(sum(allocation) == 8 for allocation in allocations)
    support = mod_apportion.allocation_from_shares(FIVE_SHARES).allocations()
    assert set(support) <= set(allocations)


def test_enumerate_integer_shares():
    assert len(mod_apportion.enumerate_nice_allocations([2, 1, 3])) == 1


def test_enumerate_guard():
    with pytest.raises(mod_error.ValidationError):
        mod_apportion.enumerate_nice_allocations(['0.5'] * (mod_apportion.MAX_FRACTIONAL + 1))


def test_schedule_matches_frequencies():
    distribution = mod_apportion.allocation_from_shares(FIVE_SHARES)
    schedule = mod_apportion.allocation_schedule(distribution, 20)
    counts = Counter(allocation.quotas for allocation in schedule)
    assert counts == {(2, 3, 1, 1, 1): 2, (1, 2, 2, 2, 1): 2, (1, 2, 2, 1, 2): 4, (1, 2, 1, 2, 2): 12}
    assert mod_apportion.allocation_schedule(distribution, 20) == schedule


@pytest.mark.parametrize('seed', range(4))
def test_exactness(seed):
    rng = np.random.default_rng(seed)
    for _ in range(250):
        shares = random_shares(rng)
        distribution = mod_apportion.allocation_from_shares(shares)
        assert mod_apportion.expected_allocation(distribution) == list(shares)
        assert len(distribution) <= shares.ell
        assert all(allocation.is_nice(shares) for allocation in distribution.allocations())
        assert mod_apportion.rounding_probabilities(distribution) == shares.fractional_parts()


@pytest.mark.parametrize('seed', range(4))
def test_loop_bookkeeping(seed):
    rng = np.random.default_rng(100 + seed)
    for _ in range(100):
        shares = random_shares(rng)
        steps = mod_apportion.allocation_trace(shares)
        assert len(steps) <= shares.ell
        assert all(step.state.within_bounds(list(shares)) for step in steps)


@pytest.mark.parametrize('seed', range(2))
def test_support_within_enumeration(seed):
    rng = np.random.default_rng(200 + seed)
    for _ in range(50):
        shares = random_shares(rng)
        if shares.ell > 8:
            continue
        enumeration = set(mod_apportion.enumerate_nice_allocations(shares))
        assert set(mod_apportion.allocation_from_shares(shares).allocations()) <= enumeration
