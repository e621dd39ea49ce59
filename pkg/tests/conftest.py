from fractions import Fraction
import pytest
from peerselect import datatype as mod_datatype

A, B, C, D, E, F, G, H = range(8)

#: Raw grades of the eight-agent example, reviewer -> {reviewee: grade}
RAW_GRADES = {
    A: {D: 0, H: 100},
    B: {C: 80, E: 30},
    C: {A: 83, G: 42},
    D: {B: 77, F: 50},
    E: {D: 65, G: 65},
    F: {B: 56, H: 98},
    G: {A: 29, F: 62},
    H: {C: 75, E: 29},
}

#: The same grades after normalization, rounded to four decimals
ROUNDED_GRADES = {
    A: {D: '0', H: '1.00'},
    B: {C: '.7272', E: '.2728'},
    C: {A: '.664', G: '.336'},
    D: {B: '.6063', F: '.3937'},
    E: {D: '.50', G: '.50'},
    F: {B: '.3636', H: '.6364'},
    G: {A: '.3187', F: '.6813'},
    H: {C: '.7212', E: '.2788'},
}

PAIR_CLUSTERS = [0, 0, 1, 1, 2, 2, 3, 3]

EIGHT_SHARES = [Fraction(s) for s in ('1.220375', '1.21775', '1.016625', '1.54525')]

FIVE_SHARES = [Fraction(s) for s in ('1.1', '2.1', '1.3', '1.7', '1.8')]


@pytest.fixture
def pair_clustering():
    return mod_datatype.Clustering(4, PAIR_CLUSTERS)


@pytest.fixture
def raw8(pair_clustering):
    """Raw grades, clustering and assignment of the eight-agent example."""
    profile = mod_datatype.ReviewProfile(8, RAW_GRADES)
    return profile, pair_clustering, mod_datatype.ReviewAssignment.from_profile(profile)


@pytest.fixture
def rounded8(pair_clustering):
    """The eight-agent example with the four-decimal normalized values as grades."""
    profile = mod_datatype.ReviewProfile(8, ROUNDED_GRADES)
    return profile, pair_clustering, mod_datatype.ReviewAssignment.from_profile(profile)


@pytest.fixture
def skewed18():
    """18 agents in 3 clusters of 6, where one cluster deserves 4 winners and another none.

    Agents of cluster 0 review cluster 1, preferring agents 6 and 7. Agents of
    clusters 1 and 2 review cluster 0 and split their weight over agents 0 to 3.

    """
    clustering = mod_datatype.Clustering(3, [agent // 6 for agent in range(18)])
    entries = {}
    reviews = {}
    for reviewer in range(18):
        if reviewer < 6:
            entries[reviewer] = {agent: Fraction('0.18') if agent in (6, 7) else Fraction('0.16')
                                 for agent in range(6, 12)}
        else:
            entries[reviewer] = {agent: Fraction('0.25') if agent < 4 else Fraction(0) for agent in range(6)}
        reviews[reviewer] = set(entries[reviewer])
    profile = mod_datatype.ReviewProfile(18, entries)
    return profile, clustering, mod_datatype.ReviewAssignment(6, reviews, n=18)


@pytest.fixture
def uniform12():
    """12 agents in 4 clusters of 3, everyone reviewing one agent of each other cluster with grade 1."""
    clustering = mod_datatype.Clustering(4, [agent % 4 for agent in range(12)])
    reviews = {}
    for reviewer in range(12):
        reviews[reviewer] = {(reviewer + shift) % 12 for shift in (1, 2, 3)}
    assignment = mod_datatype.ReviewAssignment(3, reviews, n=12)
    profile = mod_datatype.ReviewProfile(12, {reviewer: {agent: 1 for agent in reviewees}
                                              for reviewer, reviewees in reviews.items()})
    return profile, clustering, assignment
