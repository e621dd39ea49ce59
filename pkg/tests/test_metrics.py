from decimal import Decimal
from fractions import Fraction
import pytest
from peerselect import error as mod_error
from peerselect import metrics as mod_metrics


@pytest.mark.parametrize('value, expected', [
    (Fraction(1, 3), Decimal('0.333333')),
    (Fraction(2, 3), Decimal('0.666667')),
    (Fraction(1, 8), Decimal('0.125000')),
    (0.0000005, Decimal('0.000000')),
    (0.0000015, Decimal('0.000002')),
    (-0.0000001, Decimal('0.000000')),
    (1, Decimal('1.000000')),
])
def test_to_decimal(value, expected):
    result = mod_metrics.to_decimal(value)
    assert result == expected
    assert str(result) == str(expected)


def test_overlap():
    assert mod_metrics.overlap({1, 2, 3}, {2, 3, 4}, 3) == Fraction(2, 3)
    assert mod_metrics.overlap(set(), {2, 3, 4}, 3) == 0
    assert mod_metrics.overlap([4, 2, 3], {2, 3, 4}, 3) == 1


def test_overlap_rejects_empty_target():
    with pytest.raises(mod_error.ValidationError):
        mod_metrics.overlap(set(), set(), 0)


def test_ground_truth_topk():
    assert mod_metrics.ground_truth_topk([5, 3, 1, 0, 2, 4], 3) == {5, 3, 1}
    assert mod_metrics.ground_truth_topk([5, 3, 1], 0) == frozenset()
    with pytest.raises(mod_error.ValidationError):
        mod_metrics.ground_truth_topk([0, 1], 3)


def test_summarize():
    stats = mod_metrics.summarize([Fraction(1, 2), Fraction(1), Fraction(0), Fraction(1, 2)])
    assert stats.mean == Decimal('0.500000')
    assert stats.std == Decimal('0.353553')
    assert stats.min == Decimal('0.000000')
    assert stats.max == Decimal('1.000000')
    assert stats.count == 4


def test_summarize_single_sample():
    stats = mod_metrics.summarize([Fraction(2, 3)])
    assert stats.std == Decimal('0.000000')
    assert stats.mean == Decimal('0.666667')


def test_summarize_rejects_empty():
    with pytest.raises(mod_error.ValidationError):
        mod_metrics.summarize([])
