from decimal import Decimal
import pytest
from peerselect import error as mod_error
from peerselect import experiment as mod_experiment
from peerselect import mechanism as mod_mechanism


def small_grid(**kwargs):
    params = dict(n=20, trials=3, k=[3, 4], m=[4], ell=[4], phi=[0.0, 0.5], seed=1)
    params.update(kwargs)
    return mod_experiment.SweepGrid(**params)


def test_derive_seed():
    seed = mod_experiment.derive_seed(0, (130, 15, 5, 3, 0.0), 7)
    assert seed == mod_experiment.derive_seed(0, (130, 15, 5, 3, 0.0), 7)
    assert seed != mod_experiment.derive_seed(0, (130, 15, 5, 3, 0.0), 8)
    assert seed != mod_experiment.derive_seed(1, (130, 15, 5, 3, 0.0), 7)
    assert 0 <= seed < 2**64


def test_full_grid():
    grid = mod_experiment.SweepGrid.full(trials=1000)
    cells = grid.cells()
    assert len(cells) == 600
    assert len(set(cells)) == 600
    assert all(cell.n == mod_experiment.DEFAULT_N for cell in cells)


def test_grid_rejects_empty_parameters():
    with pytest.raises(mod_error.ValidationError):
        small_grid(trials=0)
    with pytest.raises(mod_error.ValidationError):
        small_grid(m=[])


def test_run_trial():
    cell = mod_experiment.SweepCell(20, 4, 4, 4, 0.2)
    record = mod_experiment.run_trial(cell, 99, trial=5)
    assert record.trial == 5
    assert set(record.overlaps) == set(mod_mechanism.identifiers())
    assert record.overlap('vanilla', 'v') == 1
    for overlap_v, overlap_gt in record.overlaps.values():
        assert 0 <= overlap_v <= 1
        assert 0 <= overlap_gt <= 1
    assert record == mod_experiment.run_trial(cell, 99, trial=5)


def test_record_rows():
    cell = mod_experiment.SweepCell(20, 4, 4, 4, 0.2)
    record = mod_experiment.run_trial(cell, 3)
    rows = list(record.rows())
    assert len(rows) == len(mod_mechanism.identifiers())
    assert rows[0][:7] == (20, 4, 4, 4, 0.2, 0, 'edp')
    for row in rows:
        if row[6] != 'credible-subset':
            assert row[-1] == 0


def test_run_sweep():
    progress = []
    result = mod_experiment.run_sweep(small_grid(), callback=lambda result, done, total: progress.append(done))
    assert progress == list(range(1, 13))
    assert len(result.records) == 12
    assert not result.skipped
    keys = [(record.cell.key(), record.trial) for record in result.records]
    assert keys == sorted(keys)
    assert len(result.summaries) == 4 * (len(mod_mechanism.identifiers()) * 2 + 1)
    for summary in result.summaries:
        assert summary.stats.count == 3
        assert Decimal(0) <= summary.stats.min <= summary.stats.mean <= summary.stats.max <= Decimal(1)


def test_run_sweep_is_reproducible():
    assert mod_experiment.run_sweep(small_grid()) == mod_experiment.run_sweep(small_grid())


def test_run_sweep_in_parallel():
    grid = small_grid(phi=[0.35])
    assert mod_experiment.run_sweep(grid, processes=2) == mod_experiment.run_sweep(grid)


def test_run_sweep_skips_infeasible_cells():
    result = mod_experiment.run_sweep(small_grid(k=[4], m=[4, 16], phi=[0.1]))
    assert [cell.m for cell in result.skipped] == [16]
    assert {record.cell.m for record in result.records} == {4}


def test_vanilla_agrees_with_itself():
    result = mod_experiment.run_sweep(small_grid())
    for summary in result.summaries:
        if summary.mechanism == 'vanilla' and summary.metric == 'v':
            assert summary.stats.mean == Decimal('1.000000')
            assert summary.stats.std == Decimal('0.000000')


@pytest.mark.slow
def test_edp_tracks_vanilla_better_than_partition():
    grid = mod_experiment.SweepGrid(n=130, trials=500, k=[30], m=[9], ell=[4], phi=[0.5], seed=0)
    result = mod_experiment.run_sweep(grid, processes=4)
    assert not result.skipped
    stats = {summary.mechanism: summary.stats for summary in result.summaries if summary.metric == 'v'}
    assert stats['edp'].mean - stats['partition'].mean >= Decimal('0.01')
    assert stats['edp'].std <= stats['partition'].std
