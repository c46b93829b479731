#!/usr/bin/env python3
"""
Entry point for the three-photon fringe simulator
Handles logging setup and dispatch to the selected subcommand
"""

import os
import sys
import logging
from pathlib import Path
from typing import List, Optional

# Add current directory to Python path
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from app import create_parser
from config import LOG_FORMAT


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None):
    """Configure logging for the application; stdout is reserved for reports"""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, 'triphoton_owned', False):
            root.removeHandler(handler)
            handler.close()

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        log_file_path = Path(log_file)
        log_file_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file_path))

    formatter = logging.Formatter(LOG_FORMAT)
    for handler in handlers:
        handler.setFormatter(formatter)
        handler.triphoton_owned = True
        root.addHandler(handler)

    root.setLevel(getattr(logging, level or 'INFO', logging.INFO))

    # numba, pulled in by thewalrus, logs compilation details
    logging.getLogger('numba').setLevel(logging.WARNING)


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    parser = create_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level, args.log_file)

    try:
        return args.handler(args)
    except KeyboardInterrupt:
        logging.info("Stopped by user")
        return 130


if __name__ == '__main__':
    sys.exit(main())
