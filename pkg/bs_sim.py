#!/usr/bin/env python3
"""
bs-sim command line
Subcommands verify, sample and scan over the boson-sampling models
"""
from typing import List, Optional
import argparse
import logging
import sys

from pydantic import ValidationError

from bsim.config import Config
from bsim.errors import FeasibilityError
from bsim.experiment import ExperimentConfig
from bsim.observability import configure_logging, log_structured
from commands import common, sample, scan, verify

logger = logging.getLogger(__name__)

COMMANDS = {
    'verify': verify.run,
    'sample': sample.run,
    'scan': scan.run,
}

MODELS = ['tsbs', 'squeezed', 'homodyne', 'embed', 'herald']


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='bs-sim', description='Boson sampling simulation and verification')
    parser.add_argument('--version', action='version', version=f"%(prog)s {Config.APP_VERSION}")
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name, help_text in (('verify', 'check the identities of a model'),
                            ('sample', 'write a shot log'),
                            ('scan', 'evaluate a quantity over a parameter grid')):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument('--model', choices=MODELS, required=True)
        sub.add_argument('--modes', type=int, help='number of modes M per side')
        sub.add_argument('--photons', type=int, help='photon number N')
        sub.add_argument('--squeezing', type=float, help='squeezing t in [0, 1)')
        sub.add_argument('--xi', type=float, help='squeezing parameter (t = tanh xi)')
        sub.add_argument('--eta', type=float, help='homodyne box width')
        sub.add_argument('--seed', type=int)
        sub.add_argument('--shots', type=int)
        sub.add_argument('--trials', type=int, help='random unitaries per identity')
        sub.add_argument('--max-photons', dest='max_photons', type=int, help='herald photon cap')
        sub.add_argument('--out', help='output path (stdout when omitted)')
        sub.add_argument('--format', choices=['json', 'csv'])
        sub.add_argument('--config', help='JSON file of run parameters; flags override it')
        sub.add_argument('--grid', help='"a,b,c" or "start:stop:count"')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and map failures to exit codes"""
    configure_logging()
    args = build_parser().parse_args(argv)
    overrides = {key: value for key, value in vars(args).items() if key not in ('command', 'config')}

    try:
        config = ExperimentConfig.from_sources(args.config, overrides)
    except (ValidationError, ValueError, OSError) as e:
        logger.error(f"Invalid configuration: {e}")
        return common.EXIT_INVALID

    log_structured('info', 'run started', command=args.command, model=config.model,
                   modes=config.modes, photons=config.photons, seed=config.seed)
    try:
        return COMMANDS[args.command](config)
    except FeasibilityError as e:
        logger.error(f"Infeasible request: {e}")
        return common.EXIT_INVALID
    except ValueError as e:
        # BosonSimError and grid parsing errors
        logger.error(f"Invalid request: {e}")
        return common.EXIT_INVALID
    except Exception as e:
        logger.error(f"Unexpected failure in {args.command}: {e}", exc_info=True)
        return common.EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
