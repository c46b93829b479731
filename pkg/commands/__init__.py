"""
Subcommands of the simulator CLI
Shared argument groups; each module registers one subcommand with the parser factory
"""

import argparse
from typing import Dict

from config import CONFIG_KEYS, NON_ECHO_KEYS
from validation import LOG_LEVELS

SCENARIO_HELP = {
    'scheme': "projection scheme: asym or noon",
    'phase_start': "first phase of the scan in radians",
    'phase_stop': "end of the scan in radians, excluded",
    'points': "number of phase points",
    'sigma_p': "pump bandwidth (spectral model)",
    'sigma_f': "filter bandwidth (spectral model)",
    'delay_h': "delay of the H photon of the heralded pair",
    'delay_v': "delay of the V photon of the heralded pair",
    'overlap_ratio': "E/A given directly instead of spectral parameters",
    'v1': "interferometer visibility factor v1",
    'rate_scale': "signal counts per second per unit of fringe value",
    'peak_counts': "signal counts per point at the fringe maximum",
    'mean_counts': "signal counts per point at the mean fringe level (P40)",
    'duration': "integration time per point in seconds",
    'bg_rate': "flat background rate in counts per second",
    'seed': "64-bit random seed",
    'harmonics': "comma separated harmonic orders to fit",
    'wavelength_nm': "wavelength used for path-difference metadata",
    'quadrature_nodes': "Gauss-Hermite nodes per frequency axis",
}


def common_parser() -> argparse.ArgumentParser:
    """Output and logging options accepted by every subcommand"""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument('--output-dir', dest='output_dir', help="directory for generated files")
    parser.add_argument('--log-level', dest='log_level', type=str.upper, choices=LOG_LEVELS)
    parser.add_argument('--log-file', dest='log_file', help="also write the log to this file")
    return parser


def add_scenario_arguments(parser: argparse.ArgumentParser):
    parser.add_argument('-c', '--config', help="scenario file of key=value lines")
    group = parser.add_argument_group('scenario overrides')
    for key in CONFIG_KEYS:
        if key in NON_ECHO_KEYS:
            continue
        group.add_argument('--' + key.replace('_', '-'), dest=key, help=SCENARIO_HELP[key])


def overrides_from_args(args: argparse.Namespace) -> Dict[str, str]:
    """Scenario keys given on the command line"""
    return {key: getattr(args, key) for key in CONFIG_KEYS if getattr(args, key, None) is not None}
