"""
fit subcommand
Harmonic least-squares fit of a counts or fringe CSV, reported as JSON and as a text table
"""

import logging

from commands import common_parser
from config import resolve_output_dir
from io_formats import fit_report_name, read_text, write_json_report
from pipeline import fit_text, handle_command_errors, output_path, scenario_from_header
from reporting import render_fit_report
from validation import parse_harmonics

logger = logging.getLogger(__name__)


def register(subparsers):
    parser = subparsers.add_parser('fit', parents=[common_parser()], help="fit a counts or fringe CSV")
    parser.add_argument('input', help="counts or fringe CSV")
    parser.add_argument('--harmonics', help="comma separated harmonic orders (default from the file's scheme)")
    parser.add_argument('-o', '--output', help="JSON report path (default <output-dir>/<input>_fit.json)")
    parser.set_defaults(handler=run_fit)


@handle_command_errors
def run_fit(args):
    requested = parse_harmonics(args.harmonics) if args.harmonics else None
    text = read_text(args.input)
    kind, header, result = fit_text(text, requested)

    scenario = scenario_from_header(header)
    if scenario is not None:
        logger.info(f"{args.input} was generated for scheme '{scenario.scheme.value}', seed {scenario.seed}")

    directory = resolve_output_dir(args.output_dir)
    path = output_path(directory, args.output, fit_report_name(args.input))
    write_json_report(path, result.to_report())
    print(render_fit_report(result, args.input, kind), end='')
