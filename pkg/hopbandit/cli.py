'''
Command-line front end.

    python -m hopbandit run --config exp.json --out results/
    python -m hopbandit sweep --config exp.json --key environment.n \
        --values 8,16,60 --out sweep/
    python -m hopbandit bench --grid 12x4,24x4,48x6
    python -m hopbandit verify
    python -m hopbandit preset fig2 --horizon 1e5 --out fig2/

Exit status: 0 success, 1 usage error, 2 configuration error,
3 failed verification.
'''
import os
import sys
import json
import argparse

from .experiment import (ExperimentConfig, Experiment, apply_overrides,
                         parse_value, read_json, persist_results,
                         write_manifest, timing_bench, persist_timing,
                         fit_dp_cost)
from .presets import PRESETS, TABLE1_GRID, load_preset
from .verify import run_checks
from . import __version__

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_VERIFY = 3

class UsageError(Exception):
    pass

class _Parser(argparse.ArgumentParser):

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError('{}: error: {}'.format(self.prog, message))

def _count(text):
    '''Integer flag that also accepts 1e5 style values.'''
    try:
        val = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError('not a number: {}'.format(text))
    if val != int(val) or val < 1:
        raise argparse.ArgumentTypeError('not a positive integer: {}'.format(
            text))
    return int(val)

def _grid(text):
    try:
        return [tuple(int(v) for v in cell.split('x'))
                for cell in text.split(',')]
    except ValueError:
        raise argparse.ArgumentTypeError('grid should look like 12x4,24x4')

def build_parser():

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--out', default=None,
                        help='output directory')
    common.add_argument('--seed', type=int, default=None,
                        help='master seed override')
    common.add_argument('--threads', type=int, default=1,
                        help='local worker processes')
    common.add_argument('--horizon', type=_count, default=None,
                        help='horizon override, checkpoints are rescaled')
    common.add_argument('--set', dest='overrides', action='append',
                        default=[], metavar='KEY=VALUE',
                        help='dotted config override, may be repeated')
    common.add_argument('--verbose', type=int, default=1,
                        help='0: quiet, 1: some, 2: all')

    parser = _Parser(prog='hopbandit',
                     description='Combinatorial semi-bandit channel access '
                                 'simulations.')
    parser.add_argument('--version', action='version',
                        version='%(prog)s ' + __version__)
    sub = parser.add_subparsers(dest='command', parser_class=_Parser)
    sub.required = True

    p = sub.add_parser('run', parents=[common],
                       help='run one experiment config')
    p.add_argument('--config', required=True, help='JSON config file')

    p = sub.add_parser('sweep', parents=[common],
                       help='run a config for several values of one key')
    p.add_argument('--config', required=True, help='JSON config file')
    p.add_argument('--key', required=True, help='dotted key to vary')
    p.add_argument('--values', required=True,
                   help='comma-separated values')

    p = sub.add_parser('bench', parents=[common],
                       help='per-round timing of both algorithm forms')
    p.add_argument('--grid', type=_grid, default=None,
                   help='(n, k_r) cells as 12x4,24x4 (default: table1 grid)')
    p.add_argument('--rounds', type=_count, default=1000)
    p.add_argument('--warmup', type=int, default=100)
    p.add_argument('--cap', type=_count, default=10**6)

    p = sub.add_parser('verify', parents=[common],
                       help='fast property checks')

    p = sub.add_parser('preset', parents=[common],
                       help='canned study configurations')
    p.add_argument('name', choices=list(PRESETS))
    p.add_argument('--dry-run', action='store_true',
                   help='only write the resolved manifests')

    return parser

def resolve_config(d, args):
    '''Apply --set, --seed and --horizon to a config dictionary.'''

    if args.overrides:
        d = apply_overrides(d, args.overrides)
    config = ExperimentConfig.from_dict(d)
    if args.seed is not None:
        cd = config.to_dict()
        cd['master_seed'] = args.seed
        config = ExperimentConfig.from_dict(cd)
    if args.horizon is not None:
        config = config.with_horizon(args.horizon)
    return config

def run_config(config, out, args):
    '''
    Run one config and write its outputs (on the root rank only).
    '''

    exp = Experiment(config, threads=args.threads)
    results = exp.run(verbose=args.verbose)

    if exp.mpi_rank != 0:
        return results

    if args.verbose:
        for st in results.stats:
            print('{:<32s} {} regret at t={:d}: {:.2f} +- {:.2f}'.format(
                st.name, st.metric, int(st.checkpoints[-1]),
                st.regret_mean[-1], st.regret_std[-1]))
        for name, reason in results.failures.items():
            print('{:<32s} infeasible: {}'.format(name, reason))
        sys.stdout.flush()

    if out is not None:
        files = persist_results(results, out)
        if args.verbose:
            print('Wrote {}'.format(', '.join(files)))

    return results

def cmd_run(args):
    config = resolve_config(read_json(args.config), args)
    run_config(config, args.out, args)
    return EXIT_OK

def cmd_sweep(args):

    base = read_json(args.config)
    values = [parse_value(v) for v in args.values.split(',')]
    for val in values:
        d = apply_overrides(base, ['{}={}'.format(args.key, json.dumps(val))])
        config = resolve_config(d, args)
        out = None
        if args.out is not None:
            out = os.path.join(args.out, '{}_{}'.format(
                args.key.replace('.', '_'), val))
        if args.verbose:
            print('{} = {}'.format(args.key, val))
        run_config(config, out, args)

    return EXIT_OK

def cmd_bench(args):

    grid = TABLE1_GRID if args.grid is None else args.grid
    rows = timing_bench(grid, rounds=args.rounds, warmup=args.warmup,
                        cap=args.cap, seed=0 if args.seed is None
                        else args.seed, verbose=args.verbose)
    a, b, r2 = fit_dp_cost(rows)
    if args.verbose:
        print('dp fit: {:.2f} + {:.4f} n k_r us (R2 = {:.3f})'.format(a, b, r2))
    if args.out is not None:
        persist_timing(rows, args.out)
    return EXIT_OK

def cmd_verify(args):
    results = run_checks(verbose=args.verbose)
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_VERIFY

def cmd_preset(args):

    preset = load_preset(args.name)

    if args.name == 'table1':
        args.grid = preset['grid']
        args.warmup = preset['warmup']
        args.cap = preset['cap']
        args.rounds = preset['rounds'] if args.horizon is None \
            else args.horizon
        return cmd_bench(args)

    for label, d in preset.items():
        config = resolve_config(d, args)
        out = None if args.out is None else os.path.join(args.out, label)
        if args.dry_run:
            if out is not None:
                write_manifest(config, out)
            if args.verbose:
                print('{}: {}'.format(label, config.to_dict()))
            continue
        if args.verbose:
            print('{}'.format(label))
        run_config(config, out, args)

    return EXIT_OK

COMMANDS = dict(run=cmd_run, sweep=cmd_sweep, bench=cmd_bench,
                verify=cmd_verify, preset=cmd_preset)

def parse_and_dispatch(argv=None):
    '''
    Parse arguments and run the requested subcommand.

    Keyword arguments
    -----------------
    argv : list of str, None
        If None, use sys.argv[1:] (default : None)

    Returns
    -------
    status : int
        Exit status.
    '''

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        sys.stderr.write('{}\n'.format(e))
        return EXIT_USAGE
    except SystemExit as e:
        # --help and --version
        return EXIT_OK if not e.code else EXIT_USAGE

    try:
        return COMMANDS[args.command](args)
    except ValueError as e:
        # Includes ConfigError and SpaceTooLargeError.
        sys.stderr.write('error: {}\n'.format(e))
        return EXIT_CONFIG
    except (IOError, OSError) as e:
        sys.stderr.write('error: {}\n'.format(e))
        return EXIT_CONFIG

def main():
    sys.exit(parse_and_dispatch())
