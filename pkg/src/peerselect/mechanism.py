"""Peer selection mechanisms.

   Every mechanism selects ``k`` of the ``n`` agents from the reviews they
   give each other. The partition mechanisms only count reviews that cross
   cluster boundaries, so that an agent cannot influence the standing of its
   own cluster:

   ======================= ===================== ==========
    Identifier              Class                 Random
   ======================= ===================== ==========
    edp                     ExactDollarPartition  yes
    vanilla                 Vanilla               no
    partition               Partition             no
    credible-subset         CredibleSubset        yes
    dollar-raffle           DollarRaffle          yes
    dollar-partition-raffle DollarPartitionRaffle yes
    top-dollar              TopDollar             no
   ======================= ===================== ==========

   Ties between equal scores are always broken by ascending agent id.

   This file is part of the peerselect distribution.

"""

from fractions import Fraction
import networkx as nx
import sys
from . import apportion as mod_apportion
from . import datatype as mod_datatype
from . import error as mod_error
from . import logger as mod_logger


class ClusterShares(mod_datatype.DataType):
    """Dollar value of every cluster, summing to 1 when every agent reviews."""
    _fields = ['x']

    def __init__(self, x):
        self.x = tuple(x)
        self._freeze()

    def __len__(self):
        return len(self.x)

    def __iter__(self):
        return iter(self.x)

    def __getitem__(self, index):
        return self.x[index]


class CredibleSets(mod_datatype.DataType):
    """The top-k agents and the agents that could manipulate their way in."""
    _fields = ['top', 'entrants']

    def __init__(self, top, entrants):
        self.top = frozenset(top)
        self.entrants = frozenset(entrants)
        self._freeze()


def _check_target(k, n):
    if not 0 <= k <= n:
        raise mod_error.ValidationError(f"Cannot select {k} of {n} agents")


def _check_assigned(profile, assignment):
    if profile.n != assignment.n:
        raise mod_error.ValidationError(f"Profile has {profile.n} agents, assignment {assignment.n}")
    for reviewer, reviewee, _ in profile.items():
        if reviewee not in assignment.reviews[reviewer]:
            raise mod_error.ValidationError(f"Agent {reviewer} scores unassigned agent {reviewee}")


def _top(agents, scores, count):
    """Return the ``count`` agents with the highest scores, ties by ascending id."""
    return sorted(agents, key=lambda agent: (-scores[agent], agent))[:count]


def _draw(rng, weights):
    """Draw a key with probability proportional to its exact weight."""
    total = sum(weights.values(), Fraction(0))
    u = Fraction(float(rng.random())) * total
    cumulative = Fraction(0)
    for key, weight in weights.items():
        cumulative += weight
        if u < cumulative:
            return key
    return [key for key, weight in weights.items() if weight > 0][-1]


def normalize(profile, assignment):
    """Normalize every reviewer's scores over its assigned reviewees.

    A reviewer whose scores are all zero, or who submitted nothing, gives the
    same value to each of its reviewees.

    :param profile: raw reviews
    :type profile: ReviewProfile
    :param assignment: review assignment
    :type assignment: ReviewAssignment
    :return: profile where every reviewer with reviewees distributes exactly 1
    :rtype: NormalizedProfile
    :raises ValidationError: if a reviewer scores an agent it is not assigned

    """
    _check_assigned(profile, assignment)
    entries = {}
    for reviewer in range(profile.n):
        reviewees = assignment.reviewees(reviewer)
        row = profile.entries[reviewer]
        total = sum(row.values(), Fraction(0))
        if not reviewees:
            entries[reviewer] = {}
        elif total == 0:
            entries[reviewer] = {reviewee: Fraction(1, len(reviewees)) for reviewee in reviewees}
        else:
            entries[reviewer] = {reviewee: row.get(reviewee, Fraction(0)) / total for reviewee in reviewees}
    return mod_datatype.NormalizedProfile(profile.n, entries)


def cluster_shares(normalized, clustering, k):
    """Return the Dollar value and the share of every cluster.

    :param normalized: normalized reviews
    :type normalized: NormalizedProfile
    :param clustering: partition of the agents
    :type clustering: Clustering
    :param k: number of agents to select
    :type k: int
    :return: cluster values and shares ``x * k``
    :rtype: tuple[ClusterShares, ShareVector]
    :raises ValidationError: on a review inside a cluster, or if some reviewer
        distributes nothing

    """
    n = normalized.n
    if clustering.n != n:
        raise mod_error.ValidationError(f"Profile has {n} agents, clustering {clustering.n}")
    incoming = [Fraction(0)] * clustering.ell
    for reviewer, reviewee, value in normalized.items():
        cluster = clustering.cluster_of(reviewee)
        if cluster == clustering.cluster_of(reviewer):
            raise mod_error.ValidationError(f"Agent {reviewer} reviews {reviewee} in its own cluster")
        incoming[cluster] += value
    x = ClusterShares(value / n for value in incoming)
    shares = mod_datatype.ShareVector([value * k for value in x], k)
    mod_logger.log.debug(f"Cluster values {[str(value) for value in x]}")
    return x, shares


def agent_scores(normalized, clustering):
    """Return the sum of the normalized values every agent receives from outside its cluster.

    :rtype: dict[int, Fraction]

    """
    scores = {agent: Fraction(0) for agent in range(normalized.n)}
    for reviewer, reviewee, value in normalized.items():
        if clustering.cluster_of(reviewer) != clustering.cluster_of(reviewee):
            scores[reviewee] += value
    return scores


def _ranked_clusters(scores, clustering):
    return [_top(members, scores, len(members)) for members in clustering.clusters()]


def _edp_distribution(profile, clustering, assignment, k):
    _check_target(k, profile.n)
    normalized = normalize(profile, assignment)
    _, shares = cluster_shares(normalized, clustering, k)
    distribution = mod_apportion.allocation_from_shares(shares)
    ranked = _ranked_clusters(agent_scores(normalized, clustering), clustering)
    return distribution, ranked


def _probabilities_from_distribution(distribution, ranked, n):
    probabilities = {agent: Fraction(0) for agent in range(n)}
    for allocation, probability in distribution:
        for members, quota in zip(ranked, allocation):
            for agent in members[:quota]:
                probabilities[agent] += probability
    return probabilities


def exact_dollar_partition(profile, clustering, assignment, k, seed=None):
    """Select ``k`` agents with Exact Dollar Partition.

    Cluster shares are computed from the normalized reviews, an allocation
    is drawn from the apportionment lottery over these shares, and each
    cluster contributes its best agents by out-of-cluster score.

    :param profile: raw reviews
    :type profile: ReviewProfile
    :param clustering: partition of the agents
    :type clustering: Clustering
    :param assignment: review assignment, reviews never fall inside a cluster
    :type assignment: ReviewAssignment
    :param k: number of agents to select
    :type k: int
    :param seed: randomization seed
    :type seed: int, Seed, numpy.random.SeedSequence or numpy.random.Generator
    :return: winners, realized allocation, distribution and selection
        probabilities
    :rtype: SelectionOutcome
    :raises ValidationError: if the drawn allocation asks more agents from a
        cluster than it has

    """
    distribution, ranked = _edp_distribution(profile, clustering, assignment, k)
    allocation = mod_apportion.sample_allocation(distribution, seed)
    winners = []
    for cluster, (members, quota) in enumerate(zip(ranked, allocation)):
        if quota > len(members):
            raise mod_error.ValidationError(
                f"Allocation {allocation} selects {quota} agents from cluster {cluster} of size {len(members)}")
        winners.extend(members[:quota])
    mod_logger.log.info(f"Exact Dollar Partition realized allocation {allocation}")
    return mod_datatype.SelectionOutcome(
        winners,
        realized_allocation=allocation,
        distribution=distribution,
        selection_probabilities=_probabilities_from_distribution(distribution, ranked, profile.n))


def edp_selection_probabilities(profile, clustering, assignment, k):
    """Return the exact probability with which Exact Dollar Partition selects every agent.

    An agent of rank ``r`` in its cluster is selected whenever the drawn quota
    of its cluster is at least ``r``.

    :rtype: dict[int, Fraction]

    """
    distribution, ranked = _edp_distribution(profile, clustering, assignment, k)
    return _probabilities_from_distribution(distribution, ranked, profile.n)


def vanilla(profile, k):
    """Select the ``k`` agents with the highest total raw score."""
    _check_target(k, profile.n)
    totals = profile.totals()
    return mod_datatype.SelectionOutcome(_top(range(profile.n), totals, k))


def partition_quotas(k, ell):
    """Return ``k / ell`` per cluster, the remainder going to the lowest cluster indices."""
    base, remainder = divmod(k, ell)
    return [base + 1 if cluster < remainder else base for cluster in range(ell)]


def partition_mechanism(profile, clustering, assignment, k):
    """Select a preset number of agents from every cluster by out-of-cluster raw score.

    :rtype: SelectionOutcome
    :raises ValidationError: if a quota exceeds the size of its cluster

    """
    _check_target(k, profile.n)
    _check_assigned(profile, assignment)
    scores = {agent: Fraction(0) for agent in range(profile.n)}
    for reviewer, reviewee, score in profile.items():
        if clustering.cluster_of(reviewer) != clustering.cluster_of(reviewee):
            scores[reviewee] += score
    winners = []
    quotas = partition_quotas(k, clustering.ell)
    for cluster, (members, quota) in enumerate(zip(clustering.clusters(), quotas)):
        if quota > len(members):
            raise mod_error.ValidationError(f"Quota {quota} exceeds the size {len(members)} of cluster {cluster}")
        winners.extend(_top(members, scores, quota))
    return mod_datatype.SelectionOutcome(winners, realized_allocation=mod_datatype.NiceAllocation(quotas))


def credible_sets(profile, k):
    """Return the top-k agents by raw score and the potential entrants.

    An agent outside the top k is a potential entrant if it enters the top k
    once all the scores it gave are set to zero.

    :rtype: CredibleSets

    """
    _check_target(k, profile.n)
    totals = profile.totals()
    agents = range(profile.n)
    top = set(_top(agents, totals, k))
    entrants = set()
    for agent in agents:
        if agent in top:
            continue
        without = list(totals)
        for reviewee, score in profile.entries[agent].items():
            without[reviewee] -= score
        if agent in _top(agents, without, k):
            entrants.add(agent)
    return CredibleSets(top, entrants)


def credible_subset(profile, assignment, k, seed=None):
    """Select with Credible Subset, which abstains with some probability.

    With probability ``(k + |P|) / (k + m)`` a uniformly random k-subset of
    the top-k agents and the potential entrants is returned, otherwise the
    empty set.

    :param profile: raw reviews
    :type profile: ReviewProfile
    :param assignment: review assignment, every agent reviews ``m`` agents
    :type assignment: ReviewAssignment
    :param k: number of agents to select
    :type k: int
    :param seed: randomization seed
    :type seed: int, Seed, numpy.random.SeedSequence or numpy.random.Generator
    :return: winners, abstention probability and potential entrants
    :rtype: SelectionOutcome

    """
    sets = credible_sets(profile, k)
    m = assignment.m
    if len(sets.entrants) > m:
        raise mod_error.ValidationError(f"{len(sets.entrants)} potential entrants exceed m={m}")
    abstain = Fraction(m - len(sets.entrants), k + m) if k + m else Fraction(0)
    rng = mod_datatype.make_rng(seed)
    selects = k + m == 0 or rng.integers(0, k + m) < k + len(sets.entrants)
    if selects:
        pool = sorted(sets.top | sets.entrants)
        winners = rng.choice(pool, size=k, replace=False) if k < len(pool) else pool
    else:
        mod_logger.log.info("Credible Subset abstains")
        winners = []
    return mod_datatype.SelectionOutcome(winners, abstain_probability=abstain, entrants=sets.entrants)


def dollar_shares(profile, assignment=None):
    """Return the Dollar share of every agent.

    Every reviewer distributes ``1/n`` in proportion to its scores. A reviewer
    with no positive score spreads it uniformly over its assigned reviewees,
    or over the agents it listed, or else over all other agents.

    :param profile: raw reviews
    :type profile: ReviewProfile
    :param assignment: review assignment used for reviewers without scores
    :type assignment: ReviewAssignment or None
    :return: share of every agent, summing to 1 when ``n >= 2``
    :rtype: dict[int, Fraction]

    """
    n = profile.n
    shares = {agent: Fraction(0) for agent in range(n)}
    for reviewer in range(n):
        row = profile.entries[reviewer]
        total = sum(row.values(), Fraction(0))
        if total > 0:
            for reviewee, score in row.items():
                shares[reviewee] += score / (total * n)
            continue
        if assignment is not None and assignment.reviewees(reviewer):
            targets = assignment.reviewees(reviewer)
        elif row:
            targets = list(row)
        else:
            targets = [agent for agent in range(n) if agent != reviewer]
        for reviewee in targets:
            shares[reviewee] += Fraction(1, len(targets) * n)
    return shares


def _raffle_step(remaining, shares):
    """Return the exact probability of every next pick, ties filled by ascending id."""
    weights = {agent: shares[agent] for agent in sorted(remaining) if shares[agent] > 0}
    total = sum(weights.values(), Fraction(0))
    if total == 0:
        return {min(remaining): Fraction(1)}
    return {agent: weight / total for agent, weight in weights.items()}


def dollar_raffle(profile, k, seed=None, assignment=None):
    """Draw agents by Dollar share until ``k`` different agents are selected.

    Selected agents are removed and the remaining shares renormalized. When
    no remaining agent has a positive share the places left are filled by
    ascending id.

    :rtype: SelectionOutcome

    """
    _check_target(k, profile.n)
    shares = dollar_shares(profile, assignment)
    rng = mod_datatype.make_rng(seed)
    remaining = set(range(profile.n))
    winners = []
    while len(winners) < k:
        step = _raffle_step(remaining, shares)
        if len(step) == 1 and shares[next(iter(step))] == 0:
            mod_logger.log.warning(f"No positive share left, agent {next(iter(step))} selected by tie-break")
        agent = _draw(rng, step)
        winners.append(agent)
        remaining.remove(agent)
    return mod_datatype.SelectionOutcome(winners)


def dollar_raffle_probabilities(profile, k, assignment=None):
    """Return the exact probability with which Dollar Raffle selects every agent.

    :rtype: dict[int, Fraction]

    """
    _check_target(k, profile.n)
    shares = dollar_shares(profile, assignment)
    states = {frozenset(): Fraction(1)}
    for _ in range(k):
        following = {}
        for selected, probability in states.items():
            remaining = set(range(profile.n)) - selected
            for agent, step in _raffle_step(remaining, shares).items():
                state = selected | {agent}
                following[state] = following.get(state, Fraction(0)) + probability * step
        states = following
    probabilities = {agent: Fraction(0) for agent in range(profile.n)}
    for selected, probability in states.items():
        for agent in selected:
            probabilities[agent] += probability
    return probabilities


def _partition_raffle_setup(profile, clustering, assignment, k):
    _check_target(k, profile.n)
    if clustering.ell == 1:
        raise mod_error.ValidationError("Dollar Partition Raffle needs at least two clusters")
    normalized = normalize(profile, assignment)
    x, _ = cluster_shares(normalized, clustering, k)
    ranked = _ranked_clusters(agent_scores(normalized, clustering), clustering)
    return x, ranked


def _cluster_step(counts, x, ranked):
    """Return the exact probability of every cluster being drawn next."""
    open_clusters = [cluster for cluster, members in enumerate(ranked) if counts[cluster] < len(members)]
    weights = {cluster: x[cluster] for cluster in open_clusters if x[cluster] > 0}
    total = sum(weights.values(), Fraction(0))
    if total == 0:
        return {open_clusters[0]: Fraction(1)}
    return {cluster: weight / total for cluster, weight in weights.items()}


def dollar_partition_raffle(profile, clustering, assignment, k, seed=None):
    """Draw clusters by Dollar value and take their next best agent until ``k`` are selected.

    Exhausted clusters are removed and the remaining values renormalized.
    When the remaining clusters all have value 0 the lowest-indexed one is
    used.

    :rtype: SelectionOutcome
    :raises ValidationError: if there is only one cluster

    """
    x, ranked = _partition_raffle_setup(profile, clustering, assignment, k)
    rng = mod_datatype.make_rng(seed)
    counts = [0] * clustering.ell
    winners = []
    while len(winners) < k:
        cluster = _draw(rng, _cluster_step(counts, x, ranked))
        winners.append(ranked[cluster][counts[cluster]])
        counts[cluster] += 1
    return mod_datatype.SelectionOutcome(winners, realized_allocation=mod_datatype.NiceAllocation(counts))


def dollar_partition_raffle_probabilities(profile, clustering, assignment, k):
    """Return the exact probability with which Dollar Partition Raffle selects every agent.

    :rtype: dict[int, Fraction]

    """
    x, ranked = _partition_raffle_setup(profile, clustering, assignment, k)
    states = {(0,) * clustering.ell: Fraction(1)}
    for _ in range(k):
        following = {}
        for counts, probability in states.items():
            for cluster, step in _cluster_step(counts, x, ranked).items():
                state = counts[:cluster] + (counts[cluster] + 1,) + counts[cluster + 1:]
                following[state] = following.get(state, Fraction(0)) + probability * step
        states = following
    probabilities = {agent: Fraction(0) for agent in range(profile.n)}
    for counts, probability in states.items():
        for members, count in zip(ranked, counts):
            for agent in members[:count]:
                probabilities[agent] += probability
    return probabilities


def top_dollar(profile, k, assignment=None):
    """Select the ``k`` agents with the highest Dollar shares."""
    _check_target(k, profile.n)
    shares = dollar_shares(profile, assignment)
    return mod_datatype.SelectionOutcome(_top(range(profile.n), shares, k))


def impose_profile(clustering, assignment, target):
    """Return a profile under which Exact Dollar Partition selects ``target`` with certainty.

    Reviewers only score assignees in the target. How much weight each
    reviewer sends to every target agent is found with a minimum cost flow,
    such that the share of every cluster equals its number of target agents
    and the apportionment lottery is degenerate. Every target agent receives
    some weight, so it ranks above the other agents of its cluster.

    :param clustering: partition of the agents
    :type clustering: Clustering
    :param assignment: review assignment
    :type assignment: ReviewAssignment
    :param target: agents to select
    :type target: iterable[int]
    :return: raw reviews
    :rtype: ReviewProfile
    :raises ValidationError: if the assignment cannot carry the required weights

    """
    target = set(target)
    n = assignment.n
    k = len(target)
    counts = [0] * clustering.ell
    for agent in target:
        counts[clustering.cluster_of(agent)] += 1
    # Integral flow: every reviewer sends k units and cluster c receives
    # n * counts[c]. The first unit of every target is taken out of the
    # network as node demands.
    graph = nx.DiGraph()
    for reviewer in range(n):
        graph.add_node(('reviewer', reviewer), demand=-k)
        for agent in assignment.reviewees(reviewer):
            if agent in target:
                graph.add_edge(('reviewer', reviewer), ('agent', agent), capacity=k, weight=0)
    for agent in target:
        graph.add_node(('agent', agent), demand=1)
        graph.add_edge(('agent', agent), ('cluster', clustering.cluster_of(agent)), weight=0)
    for cluster, count in enumerate(counts):
        graph.add_node(('cluster', cluster), demand=n * count - count)
    try:
        flow = nx.min_cost_flow(graph)
    except nx.NetworkXUnfeasible as e:
        raise mod_error.ValidationError(
            f"Assignment cannot give every cluster its number of targets {counts}") from e
    entries = {}
    for reviewer in range(n):
        entries[reviewer] = {node[1]: Fraction(units)
                             for node, units in flow[('reviewer', reviewer)].items() if units}
    return mod_datatype.ReviewProfile(n, entries)


class Mechanism():
    """Base class for the selection mechanisms.

    Subclasses share the :meth:`select` signature, so that they can be run
    side by side on the same instance.

    """
    identifier = None
    randomized = False

    def select(self, profile, clustering, assignment, k, seed=None):
        """Select ``k`` agents.

        :param profile: raw reviews
        :type profile: ReviewProfile
        :param clustering: partition of the agents
        :type clustering: Clustering
        :param assignment: review assignment
        :type assignment: ReviewAssignment
        :param k: number of agents to select
        :type k: int
        :param seed: randomization seed, ignored by deterministic mechanisms
        :return: selection outcome
        :rtype: SelectionOutcome

        """
        raise NotImplementedError

    def __repr__(self):
        return f"{self.__class__.__name__}()"


class ExactDollarPartition(Mechanism):
    identifier = 'edp'
    randomized = True

    def select(self, profile, clustering, assignment, k, seed=None):
        return exact_dollar_partition(profile, clustering, assignment, k, seed)

    def selection_probabilities(self, profile, clustering, assignment, k):
        return edp_selection_probabilities(profile, clustering, assignment, k)


class Vanilla(Mechanism):
    identifier = 'vanilla'

    def select(self, profile, clustering, assignment, k, seed=None):
        return vanilla(profile, k)


class Partition(Mechanism):
    identifier = 'partition'

    def select(self, profile, clustering, assignment, k, seed=None):
        return partition_mechanism(profile, clustering, assignment, k)


class CredibleSubset(Mechanism):
    identifier = 'credible-subset'
    randomized = True

    def select(self, profile, clustering, assignment, k, seed=None):
        return credible_subset(profile, assignment, k, seed)


class DollarRaffle(Mechanism):
    identifier = 'dollar-raffle'
    randomized = True

    def select(self, profile, clustering, assignment, k, seed=None):
        return dollar_raffle(profile, k, seed, assignment)

    def selection_probabilities(self, profile, clustering, assignment, k):
        return dollar_raffle_probabilities(profile, k, assignment)


class DollarPartitionRaffle(Mechanism):
    identifier = 'dollar-partition-raffle'
    randomized = True

    def select(self, profile, clustering, assignment, k, seed=None):
        return dollar_partition_raffle(profile, clustering, assignment, k, seed)

    def selection_probabilities(self, profile, clustering, assignment, k):
        return dollar_partition_raffle_probabilities(profile, clustering, assignment, k)


class TopDollar(Mechanism):
    identifier = 'top-dollar'

    def select(self, profile, clustering, assignment, k, seed=None):
        return top_dollar(profile, k, assignment)


#: Stable mechanism identifiers and the classes implementing them
_mechanisms = {
    'edp': 'ExactDollarPartition',
    'vanilla': 'Vanilla',
    'partition': 'Partition',
    'credible-subset': 'CredibleSubset',
    'dollar-raffle': 'DollarRaffle',
    'dollar-partition-raffle': 'DollarPartitionRaffle',
    'top-dollar': 'TopDollar',
}

#: Mechanisms needing a clustering
clustered = ('edp', 'partition', 'dollar-partition-raffle')


def identifiers():
    return list(_mechanisms)


def create_mechanism(identifier):
    """Return the mechanism registered under the identifier.

    :param identifier: one of :func:`identifiers`
    :type identifier: str
    :rtype: Mechanism
    :raises ValidationError: if the identifier is unknown

    """
    name = _mechanisms.get(identifier)
    if name is None:
        raise mod_error.ValidationError(f"Unknown mechanism {identifier}")
    mod_logger.log.debug(f"Create mechanism {identifier}")
    mechanism_class = getattr(sys.modules[__name__], name)
    return mechanism_class()
