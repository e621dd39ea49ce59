"""CSV files for instances and results.

   ============== ============================= ==============================
    File           Header                        Rows
   ============== ============================= ==============================
    profile        ``reviewer,reviewee,score``   ids and an exact decimal or
                                                 ``p/q`` score
    clustering     ``agent,cluster``             ids
    assignment     ``reviewer,reviewee``         ids
    ground truth   (none)                        one line of ids, best first
    results        see :data:`RESULTS_HEADER`    one row per trial and mechanism
    summary        see :data:`SUMMARY_HEADER`    one row per cell, mechanism
                                                 and metric
   ============== ============================= ==============================

   Files are written as UTF-8 with ``\\n`` line endings and ``.`` as decimal
   separator, whatever the locale. Dispersion, overlaps and statistics in
   the results and summary files have six fractional digits.

   This file is part of the peerselect distribution.

"""

import csv
from fractions import Fraction
import pathlib
from . import datatype as mod_datatype
from . import error as mod_error
from . import metrics as mod_metrics

PROFILE_HEADER = ['reviewer', 'reviewee', 'score']
CLUSTERING_HEADER = ['agent', 'cluster']
ASSIGNMENT_HEADER = ['reviewer', 'reviewee']
RESULTS_HEADER = ['n', 'k', 'm', 'ell', 'phi', 'trial', 'mechanism', 'overlap_v', 'overlap_gt', 'abstained']
SUMMARY_HEADER = ['n', 'k', 'm', 'ell', 'phi', 'mechanism', 'metric', 'mean', 'std', 'min', 'max', 'count']


def format_number(value):
    """Return an exact text representation of a rational.

    Rationals with a finite decimal expansion are written as decimals, the
    others as ``p/q``.

    :type value: Fraction
    :rtype: str

    """
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    denominator = value.denominator
    twos = fives = 0
    while denominator % 2 == 0:
        denominator //= 2
        twos += 1
    while denominator % 5 == 0:
        denominator //= 5
        fives += 1
    if denominator != 1:
        return f"{value.numerator}/{value.denominator}"
    digits = max(twos, fives)
    scaled = abs(value) * 10**digits
    text = str(scaled.numerator).rjust(digits + 1, '0')
    sign = '-' if value < 0 else ''
    return f"{sign}{text[:-digits]}.{text[-digits:]}"


def format_probability(value):
    """Return the rational as ``p/q`` in lowest terms, e.g. ``1/1``."""
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_number(text, where=''):
    """Return a decimal or ``p/q`` string as an exact rational.

    :raises ParseError: if the text is not a number

    """
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise mod_error.ParseError(f"{where}Invalid number {text!r}") from e


def parse_int(text, where=''):
    try:
        return int(text.strip())
    except ValueError as e:
        raise mod_error.ParseError(f"{where}Invalid integer {text!r}") from e


def parse_shares(text):
    """Return a share vector from comma-separated numbers, e.g. ``1.1,2.1,1.3``.

    :rtype: ShareVector
    :raises ParseError: if a share is not a number
    :raises ValidationError: if the shares do not sum to an integer

    """
    values = [parse_number(field, "Shares: ") for field in text.split(',')]
    return mod_datatype.ShareVector.from_values(values)


def _read_rows(path, header):
    path = pathlib.Path(path)
    try:
        with path.open(newline='', encoding='utf-8') as f:
            rows = list(csv.reader(f))
    except OSError as e:
        raise mod_error.ParseError(f"Cannot read {path}: {e.strerror}") from e
    if not rows or [field.strip() for field in rows[0]] != header:
        raise mod_error.ParseError(f"{path}: expected header {','.join(header)}")
    body = []
    for number, row in enumerate(rows[1:], 2):
        if not row:
            continue
        if len(row) != len(header):
            raise mod_error.ParseError(f"{path}:{number}: expected {len(header)} fields, got {len(row)}")
        body.append((f"{path}:{number}: ", row))
    return body


def _writer(f):
    return csv.writer(f, lineterminator='\n')


def read_clustering(path):
    """Read a clustering file.

    :rtype: Clustering

    """
    assignment = {}
    for where, (agent, cluster) in _read_rows(path, CLUSTERING_HEADER):
        agent = parse_int(agent, where)
        if agent in assignment:
            raise mod_error.ParseError(f"{where}Agent {agent} assigned twice")
        assignment[agent] = parse_int(cluster, where)
    ell = max(assignment.values(), default=-1) + 1
    return mod_datatype.Clustering(max(ell, 1), assignment)


def write_clustering(path, clustering):
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        writer = _writer(f)
        writer.writerow(CLUSTERING_HEADER)
        for agent, cluster in enumerate(clustering.assignment):
            writer.writerow([agent, cluster])


def read_profile(path, n=None):
    """Read a profile file.

    :param path: file name
    :type path: str or pathlib.Path
    :param n: number of agents, 1 + the largest id when omitted
    :type n: int or None
    :rtype: ReviewProfile
    :raises ParseError: if the file is malformed

    """
    entries = {}
    largest = -1
    for where, (reviewer, reviewee, score) in _read_rows(path, PROFILE_HEADER):
        reviewer = parse_int(reviewer, where)
        reviewee = parse_int(reviewee, where)
        row = entries.setdefault(reviewer, {})
        if reviewee in row:
            raise mod_error.ParseError(f"{where}Agent {reviewer} scores {reviewee} twice")
        row[reviewee] = parse_number(score, where)
        largest = max(largest, reviewer, reviewee)
    return mod_datatype.ReviewProfile(largest + 1 if n is None else n, entries)


def write_profile(path, profile):
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        writer = _writer(f)
        writer.writerow(PROFILE_HEADER)
        for reviewer, reviewee, score in profile.items():
            writer.writerow([reviewer, reviewee, format_number(score)])


def read_assignment(path, n=None):
    """Read an assignment file; ``m`` is the largest number of reviews of an agent.

    :rtype: ReviewAssignment

    """
    reviews = {}
    for where, (reviewer, reviewee) in _read_rows(path, ASSIGNMENT_HEADER):
        reviews.setdefault(parse_int(reviewer, where), set()).add(parse_int(reviewee, where))
    m = max((len(reviewees) for reviewees in reviews.values()), default=0)
    return mod_datatype.ReviewAssignment(m, reviews, n=n)


def write_assignment(path, assignment):
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        writer = _writer(f)
        writer.writerow(ASSIGNMENT_HEADER)
        for reviewer, reviewee in assignment.pairs():
            writer.writerow([reviewer, reviewee])


def read_ground_truth(path):
    path = pathlib.Path(path)
    try:
        text = path.read_text(encoding='utf-8').strip()
    except OSError as e:
        raise mod_error.ParseError(f"Cannot read {path}: {e.strerror}") from e
    return [parse_int(field, f"{path}: ") for field in text.split(',')] if text else []


def write_ground_truth(path, sigma):
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        f.write(','.join(map(str, sigma)) + '\n')


def _cell_columns(cell):
    n, k, m, ell, phi = cell.key()
    return [n, k, m, ell, mod_metrics.to_decimal(phi)]


def write_results(path, records):
    """Write one row per trial and mechanism.

    :param path: file name
    :param records: sweep records
    :type records: list[ExperimentRecord]

    """
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        writer = _writer(f)
        writer.writerow(RESULTS_HEADER)
        for record in records:
            for row in record.rows():
                trial, mechanism, overlap_v, overlap_gt, abstained = row[5:]
                writer.writerow([*_cell_columns(record.cell), trial, mechanism, mod_metrics.to_decimal(overlap_v),
                                 mod_metrics.to_decimal(overlap_gt), abstained])


def write_summary(path, summaries):
    """Write one row per cell, mechanism and metric.

    :type summaries: list[CellSummary]

    """
    with pathlib.Path(path).open('w', newline='', encoding='utf-8') as f:
        writer = _writer(f)
        writer.writerow(SUMMARY_HEADER)
        for summary in summaries:
            stats = summary.stats
            writer.writerow([*_cell_columns(summary.cell), summary.mechanism, summary.metric,
                             stats.mean, stats.std, stats.min, stats.max, stats.count])
