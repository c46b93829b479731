"""
counts subcommand
Simulates Poisson photon counts over the fringe of a scenario
"""

import logging

from commands import add_scenario_arguments, common_parser, overrides_from_args
from config import SimulatorConfig
from io_formats import COUNTS_KIND, default_output_name, write_text
from pipeline import apply_logging_settings, counts_text, handle_command_errors, output_path

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('counts', parents=[common_parser()],
                                   help="simulate counts with background for a scenario")
    add_scenario_arguments(parser)
    parser.add_argument('-o', '--output', help="output file (default <output-dir>/counts_<scheme>.csv)")
    parser.set_defaults(handler=run_counts)


@handle_command_errors
def run_counts(args):
    config = SimulatorConfig(args.config, overrides_from_args(args))
    apply_logging_settings(config, args.log_level, args.log_file)
    path = output_path(config.output_dir, args.output, default_output_name(COUNTS_KIND, config.scheme.value))
    write_text(path, counts_text(config))
    logger.info(f"Counts for seed {config.seed} written to {path}")
    print(path)
