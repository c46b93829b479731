#!/usr/bin/env python3
"""
Command-line front end of the three-photon fringe simulator
Parser factory registering the fringe, counts, fit and reproduce subcommands
"""

import argparse


def create_parser() -> argparse.ArgumentParser:
    """Parser factory; every subcommand module registers itself"""
    parser = argparse.ArgumentParser(
        prog='triphoton',
        description="Simulate and fit three-photon de Broglie fringes of the asymmetric beam-splitter "
                    "and NOON-projection schemes",
    )
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True

    # Register subcommands
    from commands import counts, fit, fringe, reproduce

    for module in (fringe, counts, fit, reproduce):
        module.register(subparsers)

    return parser
