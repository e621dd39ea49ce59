"""Seeded simulation of the mechanisms on generated instances.

   A sweep runs every cell of a parameter grid a number of times. Every
   trial generates one instance and runs all mechanisms on it; the winners
   are compared to those of Vanilla and to the top of the ground truth.

   Every trial seed is derived from the master seed, the cell and the trial
   index, and every mechanism draws from a seed derived from the trial seed
   and its identifier. Results therefore do not depend on the order or the
   process in which the trials run.

   This file is part of the peerselect distribution.

"""

import hashlib
import itertools
import multiprocessing
from . import datatype as mod_datatype
from . import error as mod_error
from . import generate as mod_generate
from . import logger as mod_logger
from . import mechanism as mod_mechanism
from . import metrics as mod_metrics

DEFAULT_N = 130

#: Parameter lists of the NSF-like grid
FULL_GRID = {
    'n': DEFAULT_N,
    'k': [15, 20, 25, 30, 35],
    'm': [5, 7, 9, 11, 13, 15],
    'ell': [3, 4, 5, 6],
    'phi': [0.0, 0.1, 0.2, 0.35, 0.5],
}

#: Comparisons reported per mechanism
metrics = ('v', 'gt')

#: The mechanism whose abstentions are recorded and summarized
ABSTAINING = 'credible-subset'


def derive_seed(master, *parts):
    """Return a 64-bit seed mixing the master seed with the parts.

    :param master: master seed
    :type master: int
    :param parts: values identifying the stream, e.g. cell, trial and mechanism
    :return: unsigned 64-bit seed
    :rtype: int

    """
    text = '|'.join(str(part) for part in (master, *parts))
    digest = hashlib.blake2b(text.encode('utf-8'), digest_size=8).digest()
    return int.from_bytes(digest, 'little')


class SweepCell(mod_datatype.DataType):
    """Parameters of one instance family."""
    _fields = ['n', 'k', 'm', 'ell', 'phi']

    def __init__(self, n, k, m, ell, phi):
        self.n = int(n)
        self.k = int(k)
        self.m = int(m)
        self.ell = int(ell)
        self.phi = float(phi)
        self._freeze()

    def key(self):
        return (self.n, self.k, self.m, self.ell, self.phi)

    def __hash__(self):
        return hash(self.key())

    def __lt__(self, other):
        return self.key() < other.key()


class SweepGrid(mod_datatype.DataType):
    """Cartesian product of parameter lists, each cell run ``trials`` times."""
    _fields = ['n', 'trials', 'k', 'm', 'ell', 'phi', 'seed']

    def __init__(self, n, trials, k, m, ell, phi, seed=0):
        if trials < 1:
            raise mod_error.ValidationError(f"Number of trials must be positive, got {trials}")
        for name, values in (('k', k), ('m', m), ('ell', ell), ('phi', phi)):
            if not values:
                raise mod_error.ValidationError(f"Parameter list {name} is empty")
        self.n = n
        self.trials = trials
        self.k = tuple(k)
        self.m = tuple(m)
        self.ell = tuple(ell)
        self.phi = tuple(phi)
        self.seed = mod_datatype.Seed(seed).value
        self._freeze()

    @classmethod
    def full(cls, trials=1000, seed=0):
        return cls(trials=trials, seed=seed, **FULL_GRID)

    def cells(self):
        return [SweepCell(self.n, k, m, ell, phi)
                for k, m, ell, phi in itertools.product(self.k, self.m, self.ell, self.phi)]


class ExperimentRecord(mod_datatype.DataType):
    """Overlaps of every mechanism in one trial.

    ``overlaps`` maps a mechanism identifier to its overlap with the Vanilla
    winners and with the ground truth top k.

    """
    _fields = ['cell', 'trial', 'overlaps', 'abstained']

    def __init__(self, cell, trial, overlaps, abstained):
        self.cell = cell
        self.trial = trial
        self.overlaps = dict(overlaps)
        self.abstained = abstained
        self._freeze()

    def overlap(self, mechanism, metric):
        overlap_v, overlap_gt = self.overlaps[mechanism]
        return overlap_v if metric == 'v' else overlap_gt

    def rows(self):
        """Yield one results row per mechanism."""
        for mechanism, (overlap_v, overlap_gt) in self.overlaps.items():
            abstained = int(self.abstained) if mechanism == ABSTAINING else 0
            yield (*self.cell.key(), self.trial, mechanism, overlap_v, overlap_gt, abstained)


class CellSummary(mod_datatype.DataType):
    _fields = ['cell', 'mechanism', 'metric', 'stats']

    def __init__(self, cell, mechanism, metric, stats):
        self.cell = cell
        self.mechanism = mechanism
        self.metric = metric
        self.stats = stats
        self._freeze()


class SweepResult(mod_datatype.DataType):
    """Records sorted by cell and trial, per-cell summaries and the skipped cells."""
    _fields = ['records', 'summaries', 'skipped']

    def __init__(self, records, summaries, skipped):
        self.records = list(records)
        self.summaries = list(summaries)
        self.skipped = dict(skipped)
        self._freeze()


def run_trial(cell, trial_seed, trial=0):
    """Generate one instance and run every mechanism on it.

    :param cell: instance parameters
    :type cell: SweepCell
    :param trial_seed: seed of the trial
    :type trial_seed: int
    :param trial: trial index, recorded only
    :type trial: int
    :rtype: ExperimentRecord
    :raises ValidationError: if the parameters admit no instance

    """
    profile, clustering, assignment, sigma = mod_generate.generate_instance(
        cell.n, cell.m, cell.ell, cell.phi, derive_seed(trial_seed, 'instance'))
    reference = mod_mechanism.vanilla(profile, cell.k).winners
    truth = mod_metrics.ground_truth_topk(sigma, cell.k)
    overlaps = {}
    abstained = False
    for identifier in mod_mechanism.identifiers():
        mechanism = mod_mechanism.create_mechanism(identifier)
        outcome = mechanism.select(profile, clustering, assignment, cell.k, derive_seed(trial_seed, identifier))
        overlaps[identifier] = (mod_metrics.overlap(outcome.winners, reference, cell.k),
                                mod_metrics.overlap(outcome.winners, truth, cell.k))
        if identifier == ABSTAINING:
            abstained = not outcome.winners
    return ExperimentRecord(cell, trial, overlaps, abstained)


def _run_task(task):
    cell, trial, seed = task
    try:
        return cell, trial, run_trial(cell, seed, trial), None
    except mod_error.ValidationError as e:
        return cell, trial, None, str(e)


def summarize_records(records):
    """Return the summary of every (cell, mechanism, metric), in cell order.

    The abstaining mechanism has a third metric ``abstained``, whose mean is
    the fraction of trials in which it selected nobody.

    :param records: trial records
    :type records: list[ExperimentRecord]
    :rtype: list[CellSummary]

    """
    by_cell = {}
    for record in records:
        by_cell.setdefault(record.cell, []).append(record)
    summaries = []
    for cell in sorted(by_cell):
        for mechanism in mod_mechanism.identifiers():
            for metric in metrics:
                values = [record.overlap(mechanism, metric) for record in by_cell[cell]]
                summaries.append(CellSummary(cell, mechanism, metric, mod_metrics.summarize(values)))
            if mechanism == ABSTAINING:
                values = [int(record.abstained) for record in by_cell[cell]]
                summaries.append(CellSummary(cell, mechanism, 'abstained', mod_metrics.summarize(values)))
    return summaries


def run_sweep(grid, processes=None, callback=None):
    """Run every trial of the grid.

    A cell where some trial cannot be generated or run is skipped as a whole
    and reported in the result.

    :param grid: parameter grid
    :type grid: SweepGrid
    :param processes: number of worker processes, sequential when None or 1
    :type processes: int or None
    :param callback: called as ``callback(result, done, total)`` after every trial
    :type callback: callable or None
    :rtype: SweepResult

    """
    tasks = [(cell, trial, derive_seed(grid.seed, cell.key(), trial))
             for cell in grid.cells() for trial in range(grid.trials)]
    mod_logger.log.info(f"Run {len(tasks)} trials over {len(grid.cells())} cells")
    results = []
    if processes and processes > 1:
        with multiprocessing.Pool(processes) as pool:
            for done, result in enumerate(pool.imap_unordered(_run_task, tasks, chunksize=4), 1):
                results.append(result)
                if callback:
                    callback(result, done, len(tasks))
    else:
        for done, task in enumerate(tasks, 1):
            result = _run_task(task)
            results.append(result)
            if callback:
                callback(result, done, len(tasks))
    skipped = {}
    for cell, trial, _, error in sorted(results, key=lambda result: (result[0].key(), result[1])):
        if error is not None and cell not in skipped:
            mod_logger.log.warning(f"Skip cell {cell.key()}: {error}")
            skipped[cell] = error
    records = sorted((record for cell, _, record, _ in results if cell not in skipped),
                     key=lambda record: (record.cell.key(), record.trial))
    return SweepResult(records, summarize_records(records), skipped)
