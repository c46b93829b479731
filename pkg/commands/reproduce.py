"""
reproduce subcommand
Runs every reproduction check and prints PASS/FAIL per quantity
"""

import logging

from acceptance import run_checks
from commands import common_parser
from io_formats import write_text
from pipeline import handle_command_errors
from reporting import render_reproduce_report

logger = logging.getLogger(__name__)

EXIT_CHECKS_FAILED = 1


def register(subparsers):
    parser = subparsers.add_parser('reproduce', parents=[common_parser()],
                                   help="recompute the headline numbers and grade them")
    parser.add_argument('--report', help="also write the report to this file")
    parser.set_defaults(handler=run_reproduce)


@handle_command_errors
def run_reproduce(args):
    checks = run_checks()
    report = render_reproduce_report(checks)
    print(report, end='')
    if args.report:
        write_text(args.report, report)
    if not all(check.passed for check in checks):
        return EXIT_CHECKS_FAILED
    return None
