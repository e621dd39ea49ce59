"""Similarity of winner sets and summary statistics."""

from decimal import Decimal, ROUND_HALF_EVEN
from fractions import Fraction
import numpy as np
from . import datatype as mod_datatype
from . import error as mod_error

#: Precision of decimal output
QUANTUM = Decimal('0.000001')


def to_decimal(value):
    """Return the value rounded half-even to six fractional digits.

    :param value: number
    :type value: Fraction, float, int or Decimal
    :rtype: Decimal

    """
    if isinstance(value, Fraction):
        decimal = Decimal(value.numerator) / Decimal(value.denominator)
    elif isinstance(value, (float, np.floating)):
        decimal = Decimal(repr(float(value)))
    else:
        decimal = Decimal(value)
    result = decimal.quantize(QUANTUM, rounding=ROUND_HALF_EVEN)
    # No negative zero
    return result if result else abs(result)


class SummaryStats(mod_datatype.DataType):
    """Descriptive statistics of a sample, as six-digit decimals."""
    _fields = ['mean', 'std', 'min', 'max', 'count']

    def __init__(self, mean, std, min, max, count):
        self.mean = mean
        self.std = std
        self.min = min
        self.max = max
        self.count = count
        self._freeze()


def overlap(w, reference, k):
    """Return the fraction of the ``k`` reference winners also in ``w``.

    :param w: winners of a mechanism, possibly empty
    :type w: iterable[int]
    :param reference: reference winners
    :type reference: iterable[int]
    :param k: target size
    :type k: int
    :rtype: Fraction

    """
    if k <= 0:
        raise mod_error.ValidationError(f"Target size must be positive, got {k}")
    return Fraction(len(set(w) & set(reference)), k)


def ground_truth_topk(sigma, k):
    """Return the first ``k`` agents of the reference order.

    :rtype: frozenset[int]

    """
    sigma = tuple(sigma)
    if not 0 <= k <= len(sigma):
        raise mod_error.ValidationError(f"Cannot take the top {k} of {len(sigma)} agents")
    return frozenset(sigma[:k])


def summarize(samples):
    """Return mean, population standard deviation, minimum and maximum.

    :param samples: nonempty list of numbers
    :type samples: list
    :rtype: SummaryStats
    :raises ValidationError: if the list is empty

    """
    if not len(samples):
        raise mod_error.ValidationError("Cannot summarize an empty sample")
    values = np.array([float(sample) for sample in samples])
    return SummaryStats(mean=to_decimal(np.mean(values)),
                        std=to_decimal(np.std(values)),
                        min=to_decimal(min(samples)),
                        max=to_decimal(max(samples)),
                        count=len(values))
