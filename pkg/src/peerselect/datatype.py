"""Data model shared by the selection mechanisms.

   All scores, shares and probabilities are kept as ``fractions.Fraction``
   objects, so that every comparison made by the apportionment and selection
   code is exact. Raw input values are converted at construction time: strings
   and ``Decimal`` objects are parsed exactly, floats are read through their
   shortest decimal representation (``0.1`` becomes ``1/10``).

   Agents are dense integer identifiers ``0..n-1``. External names are mapped
   to these indices at the file boundary.

   This file is part of the peerselect distribution.

"""

from decimal import Decimal
from fractions import Fraction
import math
import numbers
import numpy as np
from . import error as mod_error
from . import logger as mod_logger


def as_fraction(value):
    """Return the value as an exact rational.

    :param value: number or numeric string, e.g. ``'0.7272'`` or ``'8/11'``
    :type value: int, float, str, Decimal or Fraction
    :return: exact rational
    :rtype: Fraction
    :raises ValidationError: if the value is not a finite number

    """
    try:
        if isinstance(value, float):
            if not math.isfinite(value):
                raise ValueError(value)
            return Fraction(repr(value))
        if isinstance(value, np.integer):
            return Fraction(int(value))
        if isinstance(value, np.floating):
            return as_fraction(float(value))
        if isinstance(value, (str, Decimal, numbers.Rational)):
            return Fraction(value)
    except (ValueError, ZeroDivisionError) as e:
        raise mod_error.ValidationError(f"Not a finite number: {value!r}") from e
    raise mod_error.ValidationError(f"Not a number: {value!r}")


def is_integral(value):
    return Fraction(value).denominator == 1


class DataType():
    """Base datatype.

    Datatypes must derive from the DataType base class. Each subclass must
    define a _fields attribute, the list of the names of its properties.
    Instances are immutable once the constructor has returned.

    """
    _fields = []

    @classmethod
    def get_keys(cls):
        """Return the list of keys of the structure fields.

        :return: list of _field keys
        :rtype: list[str]

        """
        return list(cls._fields)

    def get_dict(self):
        """Return a dictionary with the datatype properties.

        :return: dictionary with datatype properties
        :rtype: dict
        """
        keys = self.get_keys()
        return {key: self.__dict__.get(key) for key in keys}

    def get_values(self):
        """Return the list of values of the datatype properties.

        :return: list of values
        :rtype: list

        """
        return list(self.get_dict().values())

    def _freeze(self):
        object.__setattr__(self, '_frozen', True)

    def __setattr__(self, name, value):
        if self.__dict__.get('_frozen'):
            raise AttributeError(f"{self.__class__.__name__} is immutable")
        object.__setattr__(self, name, value)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self.get_dict() == other.get_dict()

    __hash__ = None

    def __str__(self):
        return str(self.get_dict())

    def __repr__(self):
        keys = self.get_keys()
        values = map(repr, self.get_values())
        kwargs = ', '.join(map('='.join, zip(keys, values)))
        return f"{self.__class__.__name__}({kwargs})"


class Seed(DataType):
    """Randomization seed.

    A seed is an unsigned 64-bit integer. Identical seeds and identical inputs
    give identical outputs for every randomized operation.

    """
    _fields = ['value']
    max_value = 2**64 - 1

    def __init__(self, value):
        if isinstance(value, Seed):
            value = value.value
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise mod_error.ValidationError(f"Seed must be an integer, got {value!r}")
        if not 0 <= value <= self.max_value:
            raise mod_error.ValidationError(f"Seed {value} is not an unsigned 64-bit integer")
        self.value = int(value)
        self._freeze()

    def __hash__(self):
        return hash(self.value)

    def seed_sequence(self):
        return np.random.SeedSequence(self.value)

    def rng(self):
        return np.random.default_rng(self.seed_sequence())


def make_rng(seed=None):
    """Return a random generator for the seed.

    :param seed: seed value; a ``Generator`` is returned unchanged, so that a
        caller can draw a long stream without reseeding
    :type seed: int, Seed, numpy.random.SeedSequence or numpy.random.Generator
    :return: random generator
    :rtype: numpy.random.Generator

    """
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed)
    if seed is None:
        seed = 0
    return Seed(seed).rng()


def make_seed_sequence(seed=None):
    """Return a ``SeedSequence`` that can spawn independent child streams."""
    if isinstance(seed, np.random.SeedSequence):
        return seed
    if isinstance(seed, np.random.Generator):
        return np.random.SeedSequence(int(seed.integers(0, 2**63)))
    if seed is None:
        seed = 0
    return Seed(seed).seed_sequence()


class ReviewProfile(DataType):
    """Raw reviews.

    The profile maps every reviewer to the scores it gave. A reviewer with an
    empty row is an agent that submitted nothing.

    :param n: number of agents
    :type n: int
    :param entries: reviewer -> (reviewee -> nonnegative score)
    :type entries: dict[int, dict[int, number]]

    """
    _fields = ['n', 'entries']

    def __init__(self, n, entries=None):
        if n < 0:
            raise mod_error.ValidationError(f"Number of agents must be nonnegative, got {n}")
        entries = entries or {}
        rows = {reviewer: {} for reviewer in range(n)}
        for reviewer, row in entries.items():
            self._check_agent(reviewer, n)
            for reviewee, score in row.items():
                self._check_agent(reviewee, n)
                if reviewee == reviewer:
                    raise mod_error.ValidationError(f"Agent {reviewer} reviews itself")
                score = as_fraction(score)
                if score < 0:
                    raise mod_error.ValidationError(f"Negative score {score} from {reviewer} to {reviewee}")
                rows[reviewer][reviewee] = score
        self.n = n
        self.entries = {reviewer: dict(sorted(row.items())) for reviewer, row in rows.items()}
        self._freeze()

    @staticmethod
    def _check_agent(agent, n):
        if isinstance(agent, bool) or not isinstance(agent, numbers.Integral) or not 0 <= agent < n:
            raise mod_error.ValidationError(f"Agent {agent!r} is not in range [0, {n})")

    def row(self, reviewer):
        """Return the scores given by the reviewer."""
        return dict(self.entries[reviewer])

    def items(self):
        """Iterate over the (reviewer, reviewee, score) triples in id order."""
        for reviewer, row in self.entries.items():
            for reviewee, score in row.items():
                yield reviewer, reviewee, score

    def totals(self):
        """Return the sum of the incoming scores of every agent.

        :return: incoming score totals, indexed by agent
        :rtype: list[Fraction]

        """
        totals = [Fraction(0)] * self.n
        for _, reviewee, score in self.items():
            totals[reviewee] += score
        return totals

    def with_row(self, reviewer, row):
        """Return a copy of the profile where the reviewer reports ``row`` instead.

        :param reviewer: agent whose report is replaced
        :type reviewer: int
        :param row: new report, reviewee -> score
        :type row: dict[int, number]
        :return: new profile
        :rtype: ReviewProfile

        """
        entries = {agent: self.row(agent) for agent in range(self.n)}
        entries[reviewer] = dict(row)
        return type(self)(self.n, entries)

    def relabel(self, permutation):
        """Return the profile with agent ``i`` renamed to ``permutation[i]``."""
        entries = {permutation[reviewer]: {permutation[reviewee]: score for reviewee, score in row.items()}
                   for reviewer, row in self.entries.items()}
        return type(self)(self.n, entries)


class NormalizedProfile(ReviewProfile):
    """Normalized reviews.

    Every nonempty row sums to exactly 1.

    """

    def __init__(self, n, entries=None):
        super().__init__(n, entries)
        for reviewer, row in self.entries.items():
            if row and sum(row.values()) != 1:
                raise mod_error.ValidationError(f"Row of reviewer {reviewer} sums to {sum(row.values())}, not 1")


class Clustering(DataType):
    """Partition of the agents into clusters.

    :param ell: number of clusters
    :type ell: int
    :param assignment: cluster index of every agent, either a sequence indexed
        by agent or a mapping agent -> cluster
    :type assignment: list[int] or dict[int, int]

    """
    _fields = ['ell', 'assignment']

    def __init__(self, ell, assignment):
        if isinstance(assignment, dict):
            n = len(assignment)
            if sorted(assignment) != list(range(n)):
                raise mod_error.ValidationError("Every agent must be assigned to exactly one cluster")
            assignment = [assignment[agent] for agent in range(n)]
        assignment = tuple(int(cluster) for cluster in assignment)
        if ell < 1:
            raise mod_error.ValidationError(f"Number of clusters must be positive, got {ell}")
        for agent, cluster in enumerate(assignment):
            if not 0 <= cluster < ell:
                raise mod_error.ValidationError(f"Cluster {cluster} of agent {agent} is not in range [0, {ell})")
        sizes = [0] * ell
        for cluster in assignment:
            sizes[cluster] += 1
        if assignment and max(sizes) - min(sizes) > 1:
            raise mod_error.ValidationError(f"Cluster sizes {sizes} differ by more than 1")
        self.ell = ell
        self.assignment = assignment
        self._freeze()

    def __hash__(self):
        return hash((self.ell, self.assignment))

    @property
    def n(self):
        return len(self.assignment)

    def cluster_of(self, agent):
        return self.assignment[agent]

    def members(self, cluster):
        """Return the agents of the cluster in ascending order."""
        return tuple(agent for agent, label in enumerate(self.assignment) if label == cluster)

    def clusters(self):
        return [self.members(cluster) for cluster in range(self.ell)]

    def sizes(self):
        return [len(members) for members in self.clusters()]

    def relabel(self, permutation):
        assignment = [0] * self.n
        for agent, cluster in enumerate(self.assignment):
            assignment[permutation[agent]] = cluster
        return Clustering(self.ell, assignment)


class ReviewAssignment(DataType):
    """Who reviews whom.

    Degree regularity and cluster constraints are not enforced here; they are
    reported by :func:`validate_instance`, since some instances of interest
    are deliberately irregular.

    :param m: number of reviews per agent
    :type m: int
    :param reviews: reviewer -> set of reviewees
    :type reviews: dict[int, iterable[int]]
    :param n: number of agents, inferred from the ids when omitted
    :type n: int or None

    """
    _fields = ['m', 'reviews']

    def __init__(self, m, reviews, n=None):
        if m < 0:
            raise mod_error.ValidationError(f"Number of reviews must be nonnegative, got {m}")
        reviews = {reviewer: frozenset(reviewees) for reviewer, reviewees in reviews.items()}
        if n is None:
            ids = set(reviews).union(*reviews.values()) if reviews else set()
            n = max(ids) + 1 if ids else 0
        for reviewer, reviewees in reviews.items():
            for agent in (reviewer, *reviewees):
                ReviewProfile._check_agent(agent, n)
        self.m = m
        self.reviews = {reviewer: reviews.get(reviewer, frozenset()) for reviewer in range(n)}
        self._freeze()

    @classmethod
    def from_profile(cls, profile):
        """Return the assignment implied by the scores present in a profile."""
        reviews = {reviewer: set(row) for reviewer, row in profile.entries.items()}
        m = max((len(row) for row in reviews.values()), default=0)
        return cls(m, reviews, n=profile.n)

    @property
    def n(self):
        return len(self.reviews)

    def reviewees(self, reviewer):
        """Return the assigned reviewees of the reviewer in ascending order."""
        return tuple(sorted(self.reviews[reviewer]))

    def reviewers_of(self, reviewee):
        return tuple(reviewer for reviewer, reviewees in self.reviews.items() if reviewee in reviewees)

    def pairs(self):
        for reviewer in range(self.n):
            for reviewee in self.reviewees(reviewer):
                yield reviewer, reviewee

    def out_degrees(self):
        return [len(self.reviews[reviewer]) for reviewer in range(self.n)]

    def in_degrees(self):
        degrees = [0] * self.n
        for _, reviewee in self.pairs():
            degrees[reviewee] += 1
        return degrees

    def relabel(self, permutation):
        reviews = {permutation[reviewer]: {permutation[reviewee] for reviewee in reviewees}
                   for reviewer, reviewees in self.reviews.items()}
        return ReviewAssignment(self.m, reviews, n=self.n)


class ShareVector(DataType):
    """Per-cluster quotas summing to the target size.

    :param shares: share of every cluster
    :type shares: list[number]
    :param k: number of agents to select
    :type k: int

    """
    _fields = ['shares', 'k']

    def __init__(self, shares, k):
        shares = tuple(as_fraction(share) for share in shares)
        if not is_integral(k) or k < 0:
            raise mod_error.ValidationError(f"Target size must be a nonnegative integer, got {k}")
        for cluster, share in enumerate(shares):
            if share < 0:
                raise mod_error.ValidationError(f"Share {share} of cluster {cluster} is negative")
        if sum(shares) != k:
            raise mod_error.ValidationError(f"Shares sum to {sum(shares)}, not {k}")
        self.shares = shares
        self.k = int(k)
        self._freeze()

    @classmethod
    def from_values(cls, values):
        """Return the share vector, taking the target size from the sum of the values.

        :raises ValidationError: if the values do not sum to an integer

        """
        shares = [as_fraction(value) for value in values]
        total = sum(shares, Fraction(0))
        if not is_integral(total):
            raise mod_error.ValidationError(f"Shares sum to {total}, which is not an integer")
        return cls(shares, int(total))

    def __hash__(self):
        return hash((self.shares, self.k))

    def __len__(self):
        return len(self.shares)

    def __iter__(self):
        return iter(self.shares)

    def __getitem__(self, index):
        return self.shares[index]

    @property
    def ell(self):
        return len(self.shares)

    def floors(self):
        return [math.floor(share) for share in self.shares]

    def ceils(self):
        return [math.ceil(share) for share in self.shares]

    def fractional_parts(self):
        return [share - math.floor(share) for share in self.shares]


class NiceAllocation(DataType):
    """Integer quota per cluster."""
    _fields = ['quotas']

    def __init__(self, quotas):
        quotas = tuple(int(quota) for quota in quotas)
        for quota in quotas:
            if quota < 0:
                raise mod_error.ValidationError(f"Negative quota in {quotas}")
        self.quotas = quotas
        self._freeze()

    def __hash__(self):
        return hash(self.quotas)

    def __len__(self):
        return len(self.quotas)

    def __iter__(self):
        return iter(self.quotas)

    def __getitem__(self, index):
        return self.quotas[index]

    def __str__(self):
        return ' '.join(map(str, self.quotas))

    @property
    def k(self):
        return sum(self.quotas)

    def is_nice(self, shares):
        """Return whether the allocation satisfies the quota rule for the shares.

        :param shares: originating share vector
        :type shares: ShareVector
        :rtype: bool

        """
        if len(self) != len(shares) or self.k != shares.k:
            return False
        return all(math.floor(share) <= quota <= math.ceil(share)
                   for quota, share in zip(self.quotas, shares))


class AllocationDistribution(DataType):
    """Probability distribution over nice allocations.

    :param support: pairs of allocation and probability, in a fixed order
    :type support: list[tuple[NiceAllocation, Fraction]]
    :param shares: originating share vector, checked when given
    :type shares: ShareVector or None

    """
    _fields = ['support', 'shares']

    def __init__(self, support, shares=None):
        support = tuple((allocation if isinstance(allocation, NiceAllocation) else NiceAllocation(allocation),
                         as_fraction(probability))
                        for allocation, probability in support)
        if not support:
            raise mod_error.ValidationError("Distribution has an empty support")
        allocations = [allocation for allocation, _ in support]
        if len(set(allocations)) != len(allocations):
            raise mod_error.ValidationError("Allocations in the support must be pairwise distinct")
        for allocation, probability in support:
            if not 0 < probability <= 1:
                raise mod_error.ValidationError(f"Probability {probability} of {allocation} is not in (0, 1]")
            if shares is not None and not allocation.is_nice(shares):
                raise mod_error.ValidationError(f"Allocation {allocation} violates the quota rule")
        total = sum(probability for _, probability in support)
        if total != 1:
            raise mod_error.ValidationError(f"Probabilities sum to {total}, not 1")
        self.support = support
        self.shares = shares
        self._freeze()

    def __len__(self):
        return len(self.support)

    def __iter__(self):
        return iter(self.support)

    def probability(self, allocation):
        """Return the probability of the allocation, 0 when outside the support."""
        allocation = tuple(allocation)
        return sum((probability for candidate, probability in self.support if candidate.quotas == allocation),
                   Fraction(0))

    def allocations(self):
        return [allocation for allocation, _ in self.support]


class ApportionState(DataType):
    """Bookkeeping of the apportionment loop.

    ``p[i]`` is the probability with which cluster ``i`` has been rounded up
    so far, ``pbar`` the total probability handed out. ``low`` and ``high``
    are positions in the order of increasing fractional part.

    """
    _fields = ['alpha', 'low', 'high', 'p', 'pbar']

    def __init__(self, alpha, low, high, p, pbar):
        self.alpha = alpha
        self.low = low
        self.high = high
        self.p = tuple(p)
        self.pbar = pbar
        self._freeze()

    def within_bounds(self, shares):
        """Return whether no cluster has been rounded up or down with more probability than it should.

        :param shares: shares indexed by cluster, in the same order as ``p``
        :type shares: list[Fraction]
        :rtype: bool

        """
        for p, share in zip(self.p, shares):
            if p < 0 or p > share - math.floor(share):
                return False
            if self.pbar - p > 1 - (share - math.floor(share)):
                return False
        return True


class ApportionStep(DataType):
    """One iteration of the apportionment loop.

    ``state`` is the bookkeeping after the iteration, ``allocation`` is given
    in the original cluster order.

    """
    _fields = ['low', 'high', 'alpha', 'allocation', 'probability', 'state']

    def __init__(self, low, high, alpha, allocation, probability, state):
        self.low = low
        self.high = high
        self.alpha = alpha
        self.allocation = allocation
        self.probability = probability
        self.state = state
        self._freeze()


class SelectionOutcome(DataType):
    """Result of a selection mechanism.

    ``abstain_probability`` and ``entrants`` are only set by Credible Subset.

    """
    _fields = ['winners', 'realized_allocation', 'distribution', 'selection_probabilities',
               'abstain_probability', 'entrants']

    def __init__(self, winners, realized_allocation=None, distribution=None,
                 selection_probabilities=None, abstain_probability=None, entrants=None):
        self.winners = frozenset(int(winner) for winner in winners)
        self.realized_allocation = realized_allocation
        self.distribution = distribution
        self.selection_probabilities = selection_probabilities
        self.abstain_probability = abstain_probability
        self.entrants = frozenset(entrants) if entrants is not None else None
        self._freeze()

    def __len__(self):
        return len(self.winners)

    def __contains__(self, agent):
        return agent in self.winners


class Violation(DataType):
    """A defect found by :func:`validate_instance`."""
    _fields = ['kind', 'message']

    def __init__(self, kind, message):
        self.kind = kind
        self.message = message
        self._freeze()

    def __hash__(self):
        return hash((self.kind, self.message))

    def __str__(self):
        return f"{self.kind}: {self.message}"


class ValidationReport(DataType):
    _fields = ['violations']

    def __init__(self, violations=()):
        self.violations = tuple(violations)
        self._freeze()

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def kinds(self):
        return {violation.kind for violation in self.violations}

    def __str__(self):
        if self.ok:
            return "OK"
        return '\n'.join(map(str, self.violations))


def validate_instance(profile, clustering, assignment, k, strict=False):
    """Check an instance against the preconditions of the mechanisms.

    Violations are returned as data. The kinds reported are ``empty``,
    ``size-mismatch``, ``self-review``, ``in-cluster``, ``unassigned-score``,
    ``out-degree``, ``in-degree``, ``target-size`` and, in strict mode only,
    ``cluster-size`` (``k`` larger than ``floor(n / ell)``).

    :param profile: raw reviews
    :type profile: ReviewProfile
    :param clustering: partition of the agents
    :type clustering: Clustering
    :param assignment: review assignment
    :type assignment: ReviewAssignment
    :param k: number of agents to select
    :type k: int
    :param strict: enforce ``k <= floor(n / ell)``, otherwise only ``k <= n``
    :type strict: bool
    :return: report listing the violations
    :rtype: ValidationReport

    """
    violations = []
    n = profile.n
    if n == 0:
        violations.append(Violation('empty', "Instance has no agents"))
    if clustering.n != n or assignment.n != n:
        violations.append(Violation('size-mismatch',
                                    f"Profile has {n} agents, clustering {clustering.n}, assignment {assignment.n}"))
        return ValidationReport(violations)
    for reviewer, reviewee in assignment.pairs():
        if reviewer == reviewee:
            violations.append(Violation('self-review', f"Agent {reviewer} is assigned to review itself"))
        elif clustering.cluster_of(reviewer) == clustering.cluster_of(reviewee):
            violations.append(Violation('in-cluster', f"Agent {reviewer} reviews {reviewee} in its own cluster"))
    for reviewer, reviewee, _ in profile.items():
        if reviewee not in assignment.reviews[reviewer]:
            violations.append(Violation('unassigned-score', f"Agent {reviewer} scores unassigned agent {reviewee}"))
    for agent, degree in enumerate(assignment.out_degrees()):
        if degree != assignment.m:
            violations.append(Violation('out-degree', f"Agent {agent} reviews {degree} agents, not {assignment.m}"))
    for agent, degree in enumerate(assignment.in_degrees()):
        if degree != assignment.m:
            violations.append(Violation('in-degree', f"Agent {agent} is reviewed {degree} times, not {assignment.m}"))
    if not 0 <= k <= n:
        violations.append(Violation('target-size', f"Cannot select {k} of {n} agents"))
    elif strict and n and k > n // clustering.ell:
        violations.append(Violation('cluster-size',
                                    f"k={k} exceeds floor(n/ell)={n // clustering.ell}, the smallest cluster size"))
    report = ValidationReport(violations)
    if not report.ok:
        mod_logger.log.debug(f"Instance has {len(violations)} violations")
    return report
