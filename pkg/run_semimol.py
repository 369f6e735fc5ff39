#!/usr/bin/env python3
"""
SemiMol Engine
==============

Semi-supervised molecular property prediction from the command line:

    train           run one experiment (config file + key=value overrides)
    compare         tabulate finished runs with per-strategy medians
    cliffs          activity-cliff report for a labeled CSV
    pseudo-inspect  pseudo-label state of a run at a dumped epoch
    selftest        run the invariant test suites

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric abort,
1 anything else.
"""

import sys
from pathlib import Path

# Add the project root to the path to ensure imports work correctly
project_root = Path(__file__).parent
sys.path.insert(0, str(project_root))

import argparse
import logging
from dotenv import load_dotenv
from colorama import Fore, Style, init

# Initialize colorama for Windows
init(autoreset=True)

# Load environment variables
load_dotenv()

from config import config
from src.cli.commands import cmd_cliffs, cmd_compare, cmd_pseudo_inspect, cmd_train
from src.core.errors import ConfigError, SemiMolError
from src.core.logging_setup import setup_logging


def print_banner():
    banner = f"""{Fore.CYAN}{Style.BRIGHT}
================================================================================

     ####  ######  #    #  #  #    #   ####   #
    #      #       ##  ##  #  ##  ##  #    #  #
     ####  #####   # ## #  #  # ## #  #    #  #
         # #       #    #  #  #    #  #    #  #
     ####  ######  #    #  #  #    #   ####   ######

            {Fore.YELLOW}>> SEMI-SUPERVISED MOLECULAR PROPERTY ENGINE <<{Fore.CYAN}

    {Fore.WHITE}[*] Target model: GIN or fingerprint MLP{Fore.CYAN}
    {Fore.WHITE}[*] Instructor model scores pseudo-label confidence{Fore.CYAN}
    {Fore.WHITE}[*] Self-adaptive admission threshold{Fore.CYAN}
    {Fore.WHITE}[*] Activity-cliff stratified metrics{Fore.CYAN}

================================================================================
{Style.RESET_ALL}"""
    print(banner)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='SemiMol semi-supervised molecular property engine')
    parser.add_argument('--quiet', action='store_true', help='Do not print the banner')
    parser.add_argument('--log-level', default=None, help='Console log level (default from CONSOLE_LOG_LEVEL)')
    sub = parser.add_subparsers(dest='command', required=True)

    p_train = sub.add_parser('train', help='Run one experiment')
    p_train.add_argument('--config', default=None,
                         help=f'Experiment JSON file (default: {config.DEFAULT_CONFIG_PATH})')
    p_train.add_argument('overrides', nargs='*', help='key=value overrides, e.g. training.lr=0.0005')

    p_compare = sub.add_parser('compare', help='Compare finished runs')
    p_compare.add_argument('run_dirs', nargs='+', help='Run directories holding metrics.json')
    p_compare.add_argument('--output', default=None, help='CSV path for the comparison table')

    p_cliffs = sub.add_parser('cliffs', help='Activity-cliff report for a labeled CSV')
    p_cliffs.add_argument('data', help='Labeled CSV (smiles,label[,split])')
    p_cliffs.add_argument('--sim-threshold', type=float, default=0.9)
    p_cliffs.add_argument('--potency-threshold', type=float, default=1.0)
    p_cliffs.add_argument('--smiles-column', default='smiles')
    p_cliffs.add_argument('--label-column', default='label')
    p_cliffs.add_argument('--output', default='cliffs.csv', help='Pair report CSV')

    p_inspect = sub.add_parser('pseudo-inspect', help='Pseudo-label dump of a run at one epoch')
    p_inspect.add_argument('run_dir')
    p_inspect.add_argument('epoch', type=int)
    p_inspect.add_argument('--output', default=None, help='Write the dump to this CSV as well')

    sub.add_parser('selftest', help='Run the invariant test suites')
    return parser


def run_command(args) -> int:
    if args.command == 'train':
        config_path = args.config
        if config_path is None and Path(config.DEFAULT_CONFIG_PATH).exists():
            config_path = config.DEFAULT_CONFIG_PATH
        print(f"{Fore.BLUE}[*] Training from {config_path or 'built-in defaults'}...{Style.RESET_ALL}")
        run_dir = cmd_train(config_path, args.overrides)
        print(f"{Fore.GREEN}[+] Run written to {run_dir}{Style.RESET_ALL}")
        return 0

    if args.command == 'compare':
        runs, medians = cmd_compare(args.run_dirs, args.output)
        print(f"{Fore.CYAN}{Style.BRIGHT}Runs{Style.RESET_ALL}")
        print(runs.to_string(index=False))
        print(f"\n{Fore.CYAN}{Style.BRIGHT}Medians per strategy{Style.RESET_ALL}")
        print(medians.to_string(index=False))
        return 0

    if args.command == 'cliffs':
        pairs, summary = cmd_cliffs(args.data, args.sim_threshold, args.potency_threshold, args.output,
                                    args.smiles_column, args.label_column, config.WORKERS)
        print(f"{Fore.CYAN}{Style.BRIGHT}Activity cliffs: similarity >= {summary['sim_threshold']}, "
              f"|delta potency| >= {summary['potency_threshold']}{Style.RESET_ALL}")
        print(f"  records: {summary['records']} (dropped {summary['dropped']})")
        print(f"  pairs: {summary['pairs']}")
        print(f"  cliff-flagged molecules: {summary['flagged']}")
        print(f"{Fore.GREEN}[+] Pair report written to {args.output}{Style.RESET_ALL}")
        return 0

    if args.command == 'pseudo-inspect':
        frame = cmd_pseudo_inspect(args.run_dir, args.epoch, args.output)
        print(frame.to_string(index=False))
        admitted = int(frame['admitted'].sum())
        print(f"{Fore.GREEN}[+] {admitted}/{len(frame)} pseudo samples admitted at epoch {args.epoch}{Style.RESET_ALL}")
        return 0

    if args.command == 'selftest':
        print(f"{Fore.BLUE}[*] Running invariant suites...{Style.RESET_ALL}")
        from src.test.test_runner import run_tests
        return run_tests()

    raise ConfigError(f"unknown command: {args.command}")


def main(argv=None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.quiet:
        print_banner()
    setup_logging(console_level=args.log_level.upper() if args.log_level else None)

    issues = config.validate_config()
    if issues:
        print(f"{Fore.RED}[!] Environment configuration issues:{Style.RESET_ALL}")
        for issue in issues:
            print(f"  {Fore.YELLOW}* {issue}{Style.RESET_ALL}")
        return ConfigError.exit_code

    try:
        return run_command(args)

    except KeyboardInterrupt:
        print(f"\n{Fore.YELLOW}[!] Stopped by user{Style.RESET_ALL}")
        logging.info("[CLI] Stopped by user")
        return 1
    except ConfigError as e:
        print(f"\n{Fore.RED}[-] Configuration error:{Style.RESET_ALL}")
        for issue in e.issues:
            print(f"  * {issue}")
        logging.error(f"[CLI] Configuration error: {e}", exc_info=True)
        return e.exit_code
    except SemiMolError as e:
        print(f"\n{Fore.RED}[!] {type(e).__name__}: {e}{Style.RESET_ALL}")
        logging.error(f"[CLI] {type(e).__name__}: {e}", exc_info=True)
        return e.exit_code
    except Exception as e:
        print(f"\n{Fore.RED}[!] Critical error: {e}{Style.RESET_ALL}")
        logging.error(f"[CLI] Critical error: {e}", exc_info=True)
        return 1


if __name__ == '__main__':
    sys.exit(main())
