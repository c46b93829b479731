"""
Text reports
Jinja2 rendering of fit tables and reproduction check lists
"""

import math
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from experiment import FitResult

logger = logging.getLogger(__name__)

TEMPLATE_DIR = Path(__file__).parent / 'templates'


def format_number(value, digits: int = 6) -> str:
    if value is None:
        return 'n/a'
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if not math.isfinite(value):
        return 'n/a'
    return f"{value:.{digits}g}"


def format_status(passed: bool) -> str:
    return 'PASS' if passed else 'FAIL'


def register_template_filters(env: Environment):
    """Register custom template filters for report display"""
    env.filters['fmt'] = format_number
    env.filters['status'] = format_status


def create_environment(template_dir: Optional[Path] = None) -> Environment:
    env = Environment(
        loader=FileSystemLoader(str(template_dir or TEMPLATE_DIR)),
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
        keep_trailing_newline=True,
    )
    register_template_filters(env)
    return env


def fit_rows(result: FitResult) -> List[Dict[str, object]]:
    rows = [{'name': 'P40', 'value': result.P40, 'stderr': result.stderr.get('P40')}]
    for k in sorted(result.harmonics, reverse=True):
        name = f"V{k}"
        value = getattr(result, name, None)
        if value is not None:
            rows.append({'name': name, 'value': value, 'stderr': result.stderr.get(name)})
    rows.append({'name': 'phi0', 'value': result.phi0, 'stderr': result.stderr.get('phi0')})
    return rows


def render_fit_report(result: FitResult, source: str, kind: str) -> str:
    template = create_environment().get_template('fit_report.txt.j2')
    return template.render(
        source=source,
        kind=kind,
        harmonics=result.harmonics,
        rows=fit_rows(result),
        chi2=result.chi2,
        dof=result.dof,
    )


def render_reproduce_report(checks: Sequence) -> str:
    template = create_environment().get_template('reproduce_report.txt.j2')
    passed = sum(1 for check in checks if check.passed)
    logger.debug(f"Rendering {len(checks)} checks, {passed} passed")
    return template.render(checks=checks, passed=passed)
