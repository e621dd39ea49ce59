"""Synthetic peer review instances.

   An instance is generated in four steps. The agents are dealt at random
   into clusters of nearly equal size, and every agent is assigned ``m``
   agents to review, outside its own cluster and spread as evenly as possible
   over the other clusters. A ground truth order is drawn uniformly, every
   agent ranks all agents by a Mallows model around it, and the ranking of a
   reviewer restricted to its assignees is turned into Borda scores.

   This file is part of the peerselect distribution.

"""

import math
import networkx as nx
import numpy as np
from . import datatype as mod_datatype
from . import error as mod_error
from . import logger as mod_logger


class GroundTruth(mod_datatype.DataType):
    """Reference order, best agent first."""
    _fields = ['sigma']

    def __init__(self, sigma):
        sigma = tuple(int(agent) for agent in sigma)
        if sorted(sigma) != list(range(len(sigma))):
            raise mod_error.ValidationError("Ground truth must be a permutation of the agents")
        self.sigma = sigma
        self._freeze()

    def __hash__(self):
        return hash(self.sigma)

    def __len__(self):
        return len(self.sigma)

    def __iter__(self):
        return iter(self.sigma)

    def __getitem__(self, index):
        return self.sigma[index]


class MallowsParams(mod_datatype.DataType):
    """Dispersion of the Mallows model.

    ``phi = 0`` always returns the reference order, ``phi = 1`` is uniform.

    """
    _fields = ['phi']

    def __init__(self, phi):
        phi = float(phi)
        if not 0 <= phi <= 1:
            raise mod_error.ValidationError(f"Dispersion must be in [0, 1], got {phi}")
        self.phi = phi
        self._freeze()


def _phi(phi):
    return phi if isinstance(phi, MallowsParams) else MallowsParams(phi)


def mallows_sample(sigma, phi, seed=None):
    """Draw a ranking of all agents from a Mallows model.

    The ranking is built by repeated insertion: the agent at position ``j`` of
    ``sigma`` is inserted at position ``i <= j`` of the partial ranking with
    probability proportional to ``phi ** (j - i)``.

    :param sigma: reference order
    :type sigma: GroundTruth or list[int]
    :param phi: dispersion
    :type phi: MallowsParams or float
    :param seed: randomization seed
    :type seed: int, Seed, numpy.random.SeedSequence or numpy.random.Generator
    :return: ranking, best agent first
    :rtype: tuple[int]

    """
    phi = _phi(phi).phi
    sigma = tuple(sigma)
    if phi == 0:
        return sigma
    rng = mod_datatype.make_rng(seed)
    ranking = []
    if phi == 1:
        for j, agent in enumerate(sigma):
            ranking.insert(int(rng.integers(0, j + 1)), agent)
        return tuple(ranking)
    u = rng.random(len(sigma))
    j = np.arange(len(sigma))
    # Distance from the end follows a geometric law truncated to [0, j].
    distance = np.floor(np.log1p(-u * -np.expm1((j + 1) * np.log(phi))) / np.log(phi))
    distance = np.minimum(distance, j).astype(int)
    for j, agent in enumerate(sigma):
        ranking.insert(j - distance[j], agent)
    return tuple(ranking)


def kendall_tau(ranking, sigma):
    """Return the number of agent pairs ordered differently by the two rankings."""
    position = {agent: index for index, agent in enumerate(sigma)}
    ranks = [position[agent] for agent in ranking]
    return sum(1 for i in range(len(ranks)) for j in range(i + 1, len(ranks)) if ranks[i] > ranks[j])


def mallows_probability(ranking, sigma, phi):
    """Return the probability of a ranking under the Mallows model.

    :rtype: float

    """
    phi = _phi(phi).phi
    distance = kendall_tau(ranking, sigma)
    normalizer = math.prod(sum(phi ** r for r in range(j)) for j in range(1, len(sigma) + 1))
    return phi ** distance / normalizer


def make_clustering(n, ell, seed=None):
    """Shuffle the agents and deal them round-robin into clusters.

    :param n: number of agents
    :type n: int
    :param ell: number of clusters
    :type ell: int
    :param seed: randomization seed
    :return: clustering whose cluster sizes differ by at most 1
    :rtype: Clustering
    :raises InfeasibleError: if ``ell`` is not in ``[1, n]``

    """
    if not 1 <= ell <= n:
        raise mod_error.InfeasibleError(f"Cannot make {ell} clusters of {n} agents")
    rng = mod_datatype.make_rng(seed)
    assignment = [0] * n
    for position, agent in enumerate(rng.permutation(n)):
        assignment[int(agent)] = position % ell
    return mod_datatype.Clustering(ell, assignment)


def _foreign_bounds(m, ell):
    """Return the admissible (lower, upper) review counts per foreign cluster, tightest first."""
    if ell == 1:
        return [(0, 0)]
    quotient, remainder = divmod(m, ell - 1)
    if remainder:
        return [(quotient, quotient + 1)]
    return [(quotient, quotient), (max(quotient - 1, 0), quotient + 1)]


def _assignment_flow(clustering, m, lower, upper, rng):
    """Return the review pairs of a minimum-cost flow, or None when infeasible.

    Reviewers supply ``m`` units, reviewees demand ``m``. A reviewer reaches a
    reviewee through one node per foreign cluster, whose edge carries between
    ``lower`` and ``upper`` units. Lower bounds are moved into the node
    demands. Random edge costs make the assignment random.

    """
    graph = nx.DiGraph()
    n = clustering.n
    clusters = clustering.clusters()
    for reviewer in range(n):
        own = clustering.cluster_of(reviewer)
        graph.add_node(('reviewer', reviewer), demand=-m + lower * (clustering.ell - 1))
        for cluster, members in enumerate(clusters):
            if cluster == own:
                continue
            group = ('group', reviewer, cluster)
            graph.add_node(group, demand=-lower)
            graph.add_edge(('reviewer', reviewer), group, capacity=min(upper, len(members)) - lower, weight=0)
            costs = rng.integers(0, 1000, size=len(members))
            for reviewee, cost in zip(members, costs):
                graph.add_edge(group, ('reviewee', reviewee), capacity=1, weight=int(cost))
    for reviewee in range(n):
        graph.add_node(('reviewee', reviewee), demand=m)
    if any(data['capacity'] < 0 for _, _, data in graph.edges(data=True)):
        return None
    try:
        flow = nx.min_cost_flow(graph)
    except nx.NetworkXUnfeasible:
        return None
    reviews = {reviewer: set() for reviewer in range(n)}
    for node, targets in flow.items():
        if node[0] != 'group':
            continue
        for target, units in targets.items():
            if units:
                reviews[node[1]].add(target[1])
    return reviews


def balanced_assignment(clustering, m, seed=None):
    """Assign every agent ``m`` agents to review outside its own cluster.

    Every agent reviews and is reviewed exactly ``m`` times. Every reviewer
    gives ``m / (ell - 1)`` reviews to each other cluster when that is an
    integer and the cluster sizes allow it, and otherwise a count differing
    from it by at most 1.

    :param clustering: partition of the agents
    :type clustering: Clustering
    :param m: number of reviews per agent
    :type m: int
    :param seed: randomization seed
    :return: degree-regular review assignment
    :rtype: ReviewAssignment
    :raises InfeasibleError: if no such assignment exists

    """
    n = clustering.n
    if m < 0:
        raise mod_error.InfeasibleError(f"Number of reviews must be nonnegative, got {m}")
    if m == 0:
        return mod_datatype.ReviewAssignment(0, {}, n=n)
    largest = max(clustering.sizes())
    if m > n - largest:
        raise mod_error.InfeasibleError(f"m={m} exceeds n - largest cluster size = {n - largest}")
    rng = mod_datatype.make_rng(seed)
    for lower, upper in _foreign_bounds(m, clustering.ell):
        reviews = _assignment_flow(clustering, m, lower, upper, rng)
        if reviews is not None:
            mod_logger.log.info(f"Assignment with {lower} to {upper} reviews per foreign cluster")
            return mod_datatype.ReviewAssignment(m, reviews, n=n)
        mod_logger.log.info(f"No assignment with {lower} to {upper} reviews per foreign cluster")
    raise mod_error.InfeasibleError(f"No {m}-regular assignment for cluster sizes {clustering.sizes()}")


def borda_profile(rankings, assignment):
    """Score the assignees of every reviewer by their position in its ranking.

    The best of ``m`` assignees scores ``m``, the worst scores 1.

    :param rankings: full ranking of every agent, indexed by agent
    :type rankings: list[list[int]] or dict[int, list[int]]
    :param assignment: review assignment
    :type assignment: ReviewAssignment
    :return: raw reviews
    :rtype: ReviewProfile

    """
    entries = {}
    for reviewer in range(assignment.n):
        reviewees = set(assignment.reviewees(reviewer))
        order = [agent for agent in rankings[reviewer] if agent in reviewees]
        if len(order) != len(reviewees):
            raise mod_error.ValidationError(f"Ranking of agent {reviewer} does not cover its assignees")
        entries[reviewer] = {agent: len(order) - rank for rank, agent in enumerate(order)}
    return mod_datatype.ReviewProfile(assignment.n, entries)


def generate_instance(n, m, ell, phi, seed=None):
    """Generate a random instance.

    Every step draws from its own child of the seed, so the instance is a pure
    function of the parameters and the seed.

    :param n: number of agents
    :type n: int
    :param m: number of reviews per agent
    :type m: int
    :param ell: number of clusters
    :type ell: int
    :param phi: Mallows dispersion shared by all agents
    :type phi: float
    :param seed: randomization seed
    :return: profile, clustering, assignment and ground truth
    :rtype: tuple[ReviewProfile, Clustering, ReviewAssignment, GroundTruth]
    :raises InfeasibleError: if the parameters admit no instance

    """
    phi = _phi(phi)
    clustering_seed, assignment_seed, sigma_seed, ranking_seed = mod_datatype.make_seed_sequence(seed).spawn(4)
    clustering = make_clustering(n, ell, clustering_seed)
    assignment = balanced_assignment(clustering, m, assignment_seed)
    sigma = GroundTruth(np.random.default_rng(sigma_seed).permutation(n))
    rng = np.random.default_rng(ranking_seed)
    rankings = [mallows_sample(sigma, phi, rng) for _ in range(n)]
    profile = borda_profile(rankings, assignment)
    mod_logger.log.info(f"Generated instance n={n} m={m} ell={ell} phi={phi.phi}")
    return profile, clustering, assignment, sigma
