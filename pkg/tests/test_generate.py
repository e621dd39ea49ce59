from collections import Counter
import itertools
import math
import numpy as np
import pytest
from peerselect import datatype as mod_datatype
from peerselect import error as mod_error
from peerselect import generate as mod_generate


def test_ground_truth_must_be_permutation():
    assert list(mod_generate.GroundTruth([2, 0, 1])) == [2, 0, 1]
    with pytest.raises(mod_error.ValidationError):
        mod_generate.GroundTruth([0, 0, 1])


@pytest.mark.parametrize('phi', [-0.1, 1.5])
def test_mallows_params_range(phi):
    with pytest.raises(mod_error.ValidationError):
        mod_generate.MallowsParams(phi)


def test_mallows_zero_dispersion_returns_reference():
    sigma = [3, 1, 4, 0, 2]
    for seed in range(100):
        assert mod_generate.mallows_sample(sigma, 0.0, seed) == tuple(sigma)


def test_mallows_sample_is_permutation():
    sigma = list(range(30))
    for phi in (0.1, 0.5, 1.0):
        ranking = mod_generate.mallows_sample(sigma, phi, 3)
        assert sorted(ranking) == sigma


def test_mallows_sample_is_seeded():
    sigma = list(range(10))
    assert mod_generate.mallows_sample(sigma, 0.35, 8) == mod_generate.mallows_sample(sigma, 0.35, 8)


def test_kendall_tau():
    assert mod_generate.kendall_tau([0, 1, 2], [0, 1, 2]) == 0
    assert mod_generate.kendall_tau([2, 1, 0], [0, 1, 2]) == 3
    assert mod_generate.kendall_tau([1, 0, 2], [0, 1, 2]) == 1


def test_mallows_probability_sums_to_one():
    sigma = [0, 1, 2, 3]
    total = sum(mod_generate.mallows_probability(ranking, sigma, 0.35)
                for ranking in itertools.permutations(sigma))
    assert math.isclose(total, 1.0)
    assert mod_generate.mallows_probability(sigma, sigma, 0.0) == 1.0
    assert math.isclose(mod_generate.mallows_probability([3, 2, 1, 0], sigma, 1.0), 1 / 24)


@pytest.mark.parametrize('n, phi', [
    pytest.param(n, phi, marks=pytest.mark.slow) if n == 4 else (n, phi)
    for n in (2, 3, 4) for phi in (0.25, 0.5, 0.75, 1.0)
])
def test_mallows_sample_frequencies(n, phi):
    sigma = tuple(range(n))
    rng = np.random.default_rng(17 + n)
    draws = 6 * 10**4
    counts = Counter(mod_generate.mallows_sample(sigma, phi, rng) for _ in range(draws))
    for ranking in itertools.permutations(sigma):
        p = mod_generate.mallows_probability(ranking, sigma, phi)
        error = math.sqrt(p * (1 - p) / draws)
        assert abs(counts[ranking] / draws - p) < 4 * error


def test_mallows_uniform_dispersion():
    assert all(math.isclose(mod_generate.mallows_probability(ranking, (0, 1, 2), 1.0), 1 / 6)
               for ranking in itertools.permutations((0, 1, 2)))


def test_mallows_swap_probability():
    assert math.isclose(mod_generate.mallows_probability((1, 0), (0, 1), 0.5), 1 / 3)
    rng = np.random.default_rng(5)
    draws = 10**5
    swaps = sum(1 for _ in range(draws) if mod_generate.mallows_sample((0, 1), 0.5, rng) == (1, 0))
    error = math.sqrt(2 / 9 / draws)
    assert abs(swaps / draws - 1 / 3) < 3 * error


def test_make_clustering_sizes():
    clustering = mod_generate.make_clustering(130, 4, 0)
    assert sorted(clustering.sizes()) == [32, 32, 33, 33]
    assert clustering.sizes() == [33, 33, 32, 32]


def test_make_clustering_rejects_too_many_clusters():
    with pytest.raises(mod_error.InfeasibleError):
        mod_generate.make_clustering(3, 4, 0)


def check_assignment(assignment, clustering, m):
    assert assignment.out_degrees() == [m] * clustering.n
    assert assignment.in_degrees() == [m] * clustering.n
    for reviewer, reviewee in assignment.pairs():
        assert reviewer != reviewee
        assert clustering.cluster_of(reviewer) != clustering.cluster_of(reviewee)


@pytest.mark.parametrize('n, m, ell', [(12, 3, 4), (20, 4, 4), (30, 6, 3), (24, 5, 4)])
def test_balanced_assignment(n, m, ell):
    clustering = mod_generate.make_clustering(n, ell, 1)
    assignment = mod_generate.balanced_assignment(clustering, m, 2)
    check_assignment(assignment, clustering, m)
    for reviewer in range(n):
        counts = Counter(clustering.cluster_of(reviewee) for reviewee in assignment.reviewees(reviewer))
        assert max(counts.values()) - min(counts.values()) <= 1


def test_balanced_assignment_exact_split():
    clustering = mod_generate.make_clustering(18, 3, 4)
    assignment = mod_generate.balanced_assignment(clustering, 4, 5)
    for reviewer in range(18):
        counts = Counter(clustering.cluster_of(reviewee) for reviewee in assignment.reviewees(reviewer))
        assert sorted(counts.values()) == [2, 2]


@pytest.mark.slow
def test_balanced_assignment_default_size():
    clustering = mod_generate.make_clustering(130, 4, 0)
    assignment = mod_generate.balanced_assignment(clustering, 9, 0)
    check_assignment(assignment, clustering, 9)


def test_balanced_assignment_without_reviews():
    clustering = mod_generate.make_clustering(6, 2, 0)
    assignment = mod_generate.balanced_assignment(clustering, 0, 0)
    assert assignment.out_degrees() == [0] * 6


def test_balanced_assignment_too_many_reviews():
    clustering = mod_generate.make_clustering(8, 2, 0)
    with pytest.raises(mod_error.InfeasibleError):
        mod_generate.balanced_assignment(clustering, 5, 0)


def test_single_cluster_is_infeasible():
    clustering = mod_generate.make_clustering(8, 1, 0)
    with pytest.raises(mod_error.InfeasibleError):
        mod_generate.balanced_assignment(clustering, 2, 0)


def test_balanced_assignment_is_seeded():
    clustering = mod_generate.make_clustering(20, 4, 0)
    assert mod_generate.balanced_assignment(clustering, 4, 7) == mod_generate.balanced_assignment(clustering, 4, 7)


def test_borda_profile():
    assignment = mod_datatype.ReviewAssignment(2, {0: {1, 2}, 1: {0, 2}, 2: {0, 1}})
    rankings = [[2, 0, 1], [0, 2, 1], [1, 0, 2]]
    profile = mod_generate.borda_profile(rankings, assignment)
    assert profile.row(0) == {2: 2, 1: 1}
    assert profile.row(1) == {0: 2, 2: 1}
    assert profile.row(2) == {1: 2, 0: 1}


def test_borda_profile_needs_full_rankings():
    assignment = mod_datatype.ReviewAssignment(1, {0: {1}, 1: {0}})
    with pytest.raises(mod_error.ValidationError):
        mod_generate.borda_profile([[0], [0]], assignment)


def test_generate_instance():
    profile, clustering, assignment, sigma = mod_generate.generate_instance(24, 5, 4, 0.2, 11)
    assert profile.n == clustering.n == assignment.n == len(sigma) == 24
    check_assignment(assignment, clustering, 5)
    assert mod_datatype.validate_instance(profile, clustering, assignment, 6, strict=True).ok
    for reviewer in range(24):
        assert sorted(profile.row(reviewer).values()) == [1, 2, 3, 4, 5]


def test_generate_instance_is_deterministic():
    first = mod_generate.generate_instance(20, 4, 4, 0.5, 3)
    second = mod_generate.generate_instance(20, 4, 4, 0.5, 3)
    assert first == second
    assert mod_generate.generate_instance(20, 4, 4, 0.5, 4) != first


def test_generate_instance_reference_order():
    # Without noise every reviewer scores its assignees in reference order.
    profile, _, assignment, sigma = mod_generate.generate_instance(16, 3, 4, 0.0, 2)
    position = {agent: index for index, agent in enumerate(sigma)}
    for reviewer in range(16):
        row = profile.row(reviewer)
        order = sorted(assignment.reviewees(reviewer), key=position.get)
        assert [row[agent] for agent in order] == [3, 2, 1]
