#!/usr/bin/env python3
"""Peerselect

   This is a console user application for selecting agents from peer reviews,
   for inspecting the apportionment lottery, and for generating instances and
   running simulation sweeps.

   This file is part of the peerselect distribution.

"""

import argparse
import logging
import pathlib
import sys
from tabulate import tabulate
from tqdm import tqdm
from . import __version__
from . import apportion as mod_apportion
from . import csvfile as mod_csvfile
from . import datatype as mod_datatype
from . import error as mod_error
from . import experiment as mod_experiment
from . import generate as mod_generate
from . import logger as mod_logger
from . import mechanism as mod_mechanism
from . import metrics as mod_metrics

logging_levels = {
    0: logging.NOTSET,
    1: logging.WARNING,
    2: logging.INFO,
    3: logging.DEBUG,
}

mod_logger.log.addHandler(logging.StreamHandler())


def int_list(text):
    try:
        return [int(field) for field in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list: {text!r}")


def float_list(text):
    try:
        return [float(field) for field in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number list: {text!r}")


class ProgressBar(tqdm):

    def update_to(self, object, current, total):
        self.total = total
        self.update(current - self.n)


class PeerSelect:

    def read_instance(self, args):
        """Return the profile, clustering and assignment named by the arguments."""
        clustering = mod_csvfile.read_clustering(args.clusters) if args.clusters else None
        n = clustering.n if clustering else None
        if args.assignment:
            assignment = mod_csvfile.read_assignment(args.assignment, n=n)
            n = assignment.n if n is None else n
        else:
            assignment = None
        profile = mod_csvfile.read_profile(args.profile, n=n)
        if assignment is None:
            assignment = mod_datatype.ReviewAssignment.from_profile(profile)
        mod_logger.log.info(f"Read {profile.n} agents with {assignment.m} reviews each")
        return profile, clustering, assignment

    def select(self, args):
        profile, clustering, assignment = self.read_instance(args)
        if clustering is None:
            if args.mechanism in mod_mechanism.clustered:
                raise mod_error.ValidationError(f"Mechanism {args.mechanism} needs a clustering (--clusters)")
            clustering = mod_datatype.Clustering(1, [0] * profile.n)
        else:
            report = mod_datatype.validate_instance(profile, clustering, assignment, args.k, strict=args.strict)
            if not report.ok:
                for violation in report.violations:
                    mod_logger.log.error(f"{violation}")
                raise mod_error.ValidationError(f"Invalid instance: {len(report.violations)} violations")
        mechanism = mod_mechanism.create_mechanism(args.mechanism)
        if args.probabilities:
            if args.mechanism != 'edp':
                raise mod_error.ValidationError("Probabilities are only available for edp")
            probabilities = mechanism.selection_probabilities(profile, clustering, assignment, args.k)
            for agent, probability in probabilities.items():
                args.filename.write(f"{agent},{mod_csvfile.format_probability(probability)}\n")
            return
        outcome = mechanism.select(profile, clustering, assignment, args.k, mod_datatype.Seed(args.seed))
        if outcome.realized_allocation is not None:
            mod_logger.log.info(f"Allocation {outcome.realized_allocation}")
        if outcome.abstain_probability is not None:
            mod_logger.log.info(f"Abstention probability {outcome.abstain_probability}")
        for winner in sorted(outcome.winners):
            args.filename.write(f"{winner}\n")

    def apportion(self, args):
        shares = mod_csvfile.parse_shares(args.shares)
        if args.trace:
            table = []
            for number, step in enumerate(mod_apportion.allocation_trace(shares), 1):
                table.append([number, step.low, step.high, step.alpha, ' '.join(map(str, step.allocation)),
                              mod_csvfile.format_probability(step.probability),
                              mod_csvfile.format_probability(step.state.pbar)])
            headers = ['step', 'low', 'high', 'alpha', 'allocation', 'probability', 'total']
            args.filename.write(tabulate(table, headers=headers) + '\n')
        distribution = mod_apportion.allocation_from_shares(shares)
        if args.sample:
            allocation = mod_apportion.sample_allocation(distribution, mod_datatype.Seed(args.seed))
            args.filename.write(f"{allocation}\n")
        elif args.distribution or not args.trace:
            for allocation, probability in distribution:
                args.filename.write(f"{allocation}\t{mod_csvfile.format_probability(probability)}\n")

    def gen(self, args):
        profile, clustering, assignment, sigma = mod_generate.generate_instance(
            args.n, args.m, args.ell, args.phi, mod_datatype.Seed(args.seed))
        prefix = args.out_prefix
        mod_csvfile.write_profile(f"{prefix}.profile.csv", profile)
        mod_csvfile.write_clustering(f"{prefix}.clusters.csv", clustering)
        mod_csvfile.write_assignment(f"{prefix}.assignment.csv", assignment)
        mod_csvfile.write_ground_truth(f"{prefix}.ground_truth.csv", sigma)
        mod_logger.log.info(f"Wrote instance files {prefix}.*.csv")

    def simulate(self, args):
        grid = mod_experiment.SweepGrid(args.n, args.trials, args.k_list, args.m_list, args.ell_list,
                                        args.phi_list, args.seed)
        if args.progress:
            with ProgressBar(unit='trial') as progress_bar:
                result = mod_experiment.run_sweep(grid, args.processes, callback=progress_bar.update_to)
        else:
            result = mod_experiment.run_sweep(grid, args.processes)
        out = pathlib.Path(args.out)
        mod_csvfile.write_results(out.with_name(out.name + '.results.csv'), result.records)
        mod_csvfile.write_summary(out.with_name(out.name + '.summary.csv'), result.summaries)
        for cell, error in result.skipped.items():
            mod_logger.log.warning(f"Skipped cell {cell.key()}: {error}")
        table = []
        for mechanism in mod_mechanism.identifiers():
            row = [mechanism]
            for metric in mod_experiment.metrics:
                values = [record.overlap(mechanism, metric) for record in result.records]
                row.append(mod_metrics.summarize(values).mean if values else '')
            if mechanism == mod_experiment.ABSTAINING and result.records:
                row.append(mod_metrics.summarize([int(record.abstained) for record in result.records]).mean)
            else:
                row.append('')
            table.append(row)
        headers = ['mechanism', 'mean overlap V', 'mean overlap GT', 'abstained']
        args.filename.write(tabulate(table, headers=headers) + '\n')


parser = argparse.ArgumentParser(prog='peerselect',
                                 description=
"""Command line application to select agents from peer reviews.

Every agent reviews some of the others, and k agents are selected from the
reviews by one of several mechanisms. Exact Dollar Partition divides the agents
into clusters that only review each other, draws the number of agents of every
cluster from a lottery over its share of the reviews, and is strategyproof: no
agent can change its own chance of selection through its reviews.

Scores and probabilities are handled as exact rationals. Probabilities are
printed as p/q.
""")
parser.add_argument('-v',
                    '--verbosity',
                    action='count',
                    default=0,
                    help="Increase output verbosity")
parser.add_argument('-D',
                    '--debug',
                    action='store_const',
                    const=3,
                    default=0,
                    help="Enable debugging")
parser.add_argument('--version',
                    action='store_true',
                    help="Dump version and exit")
parser.add_argument('--progress',
                    action=argparse.BooleanOptionalAction,
                    default=True,
                    help="Show progress bar")
subparsers = parser.add_subparsers(help="Command help")
select = subparsers.add_parser('select', help="Select agents from a profile")
select.set_defaults(command='select')
select.add_argument('--mechanism',
                    choices=mod_mechanism.identifiers(),
                    default='edp',
                    help="Set the selection mechanism (default: edp)")
select.add_argument('--k',
                    type=int,
                    required=True,
                    help="Set the number of agents to select")
select.add_argument('--profile',
                    required=True,
                    help="Read the reviews from <file>")
select.add_argument('--clusters',
                    help="Read the clustering from <file>")
select.add_argument('--assignment',
                    help="Read the review assignment from <file> (default: the pairs in the profile)")
select.add_argument('--seed',
                    type=int,
                    default=0,
                    help="Set the randomization seed (default: 0)")
select.add_argument('--probabilities',
                    action='store_true',
                    help="Print the exact selection probability of every agent instead of the winners")
select.add_argument('--strict',
                    action='store_true',
                    help="Require k to be at most the smallest cluster size")
select.add_argument('filename',
                    nargs='?',
                    type=argparse.FileType(mode='w'),
                    default='-',
                    help="Set output file")
apportion = subparsers.add_parser('apportion', help="Show the lottery over allocations for shares")
apportion.set_defaults(command='apportion')
apportion.add_argument('--shares',
                       required=True,
                       help="Set the comma-separated shares, e.g. 1.1,2.1,1.3,1.7,1.8")
output = apportion.add_mutually_exclusive_group()
output.add_argument('--distribution',
                    action='store_true',
                    help="Print every allocation with its probability (default)")
output.add_argument('--sample',
                    action='store_true',
                    help="Print one allocation drawn from the lottery")
apportion.add_argument('--seed',
                       type=int,
                       default=0,
                       help="Set the randomization seed (default: 0)")
apportion.add_argument('--trace',
                       action='store_true',
                       help="Print every iteration of the construction, including zero-probability ones")
apportion.add_argument('filename',
                       nargs='?',
                       type=argparse.FileType(mode='w'),
                       default='-',
                       help="Set output file")
gen = subparsers.add_parser('gen', help="Generate a random instance")
gen.set_defaults(command='gen')
gen.add_argument('--n',
                 type=int,
                 default=mod_experiment.DEFAULT_N,
                 help="Set the number of agents (default: %(default)s)")
gen.add_argument('--m',
                 type=int,
                 required=True,
                 help="Set the number of reviews per agent")
gen.add_argument('--ell',
                 type=int,
                 required=True,
                 help="Set the number of clusters")
gen.add_argument('--phi',
                 type=float,
                 required=True,
                 help="Set the Mallows dispersion in [0, 1]")
gen.add_argument('--seed',
                 type=int,
                 default=0,
                 help="Set the randomization seed (default: 0)")
gen.add_argument('--out-prefix',
                 required=True,
                 help="Write <prefix>.profile.csv, .clusters.csv, .assignment.csv and .ground_truth.csv")
simulate = subparsers.add_parser('simulate', help="Run a simulation sweep")
simulate.set_defaults(command='simulate')
simulate.add_argument('--n',
                      type=int,
                      default=mod_experiment.DEFAULT_N,
                      help="Set the number of agents (default: %(default)s)")
simulate.add_argument('--k-list',
                      type=int_list,
                      default=mod_experiment.FULL_GRID['k'],
                      help="Set the comma-separated target sizes")
simulate.add_argument('--m-list',
                      type=int_list,
                      default=mod_experiment.FULL_GRID['m'],
                      help="Set the comma-separated numbers of reviews")
simulate.add_argument('--ell-list',
                      type=int_list,
                      default=mod_experiment.FULL_GRID['ell'],
                      help="Set the comma-separated numbers of clusters")
simulate.add_argument('--phi-list',
                      type=float_list,
                      default=mod_experiment.FULL_GRID['phi'],
                      help="Set the comma-separated Mallows dispersions")
simulate.add_argument('--trials',
                      type=int,
                      default=1000,
                      help="Set the number of trials per cell (default: %(default)s)")
simulate.add_argument('--seed',
                      type=int,
                      default=0,
                      help="Set the master seed (default: 0)")
simulate.add_argument('--processes',
                      type=int,
                      default=None,
                      help="Set the number of worker processes (default: sequential)")
simulate.add_argument('--out',
                      required=True,
                      help="Write <out>.results.csv and <out>.summary.csv")
simulate.add_argument('filename',
                      nargs='?',
                      type=argparse.FileType(mode='w'),
                      default='-',
                      help="Set output file for the overview table")


def main(argv=None):
    args = parser.parse_args(argv)
    logging_level = logging_levels.get(max(args.verbosity, args.debug))
    mod_logger.log.setLevel(logging_level)
    mod_logger.log.info(f"Version {__version__}")
    if hasattr(args, 'command'):
        app = PeerSelect()
        command = getattr(app, args.command)
        try:
            command(args)
        except mod_error.ParseError as e:
            mod_logger.log.error(f"{e}")
            sys.exit(3)
        except mod_error.ValidationError as e:
            mod_logger.log.error(f"{e}")
            sys.exit(2)
        finally:
            if hasattr(args, 'filename') and args.filename not in (sys.stdout, None):
                args.filename.close()
    elif args.version:
        print(f"peerselect version {__version__}")
    else:
        parser.print_usage()


if __name__ == '__main__':
    main()
