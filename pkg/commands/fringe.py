"""
fringe subcommand
Writes the coincidence curve of a scenario as a fringe CSV
"""

import logging

from commands import add_scenario_arguments, common_parser, overrides_from_args
from config import SimulatorConfig
from io_formats import FRINGE_KIND, default_output_name, write_text
from pipeline import apply_logging_settings, fringe_text, handle_command_errors, output_path

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('fringe', parents=[common_parser()],
                                   help="write the ideal or multimode fringe of a scenario")
    add_scenario_arguments(parser)
    parser.add_argument('-o', '--output', help="output file (default <output-dir>/fringe_<scheme>.csv)")
    parser.set_defaults(handler=run_fringe)


@handle_command_errors
def run_fringe(args):
    config = SimulatorConfig(args.config, overrides_from_args(args))
    apply_logging_settings(config, args.log_level, args.log_file)
    path = output_path(config.output_dir, args.output, default_output_name(FRINGE_KIND, config.scheme.value))
    write_text(path, fringe_text(config))
    logger.info(f"{config.scheme.value} fringe over {len(config.phase_grid())} phases written to {path}")
    print(path)
