"""
File formats for fringe scans, simulated counts and fit reports
CSV with '# key=value' header comments that echo the resolved scenario, plus JSON fit reports
"""

import csv
import io
import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

from experiment import RNG_ALGORITHM, CountRecord
from schemes import FringeSeries

logger = logging.getLogger(__name__)

MAGIC = "triphoton"
FRINGE_KIND = "fringe"
COUNTS_KIND = "counts"

COLUMNS = {
    FRINGE_KIND: ("phase_rad", "value"),
    COUNTS_KIND: ("phase_rad", "duration_s", "raw_counts", "background_counts"),
}

REPORT_KEYS = ("P40", "V3", "V1", "phi0", "chi2", "dof", "covariance")

Header = List[Tuple[str, str]]
PathLike = Union[str, Path]


class CsvFormatError(ValueError):
    """Malformed fringe or counts file; row is the 1-based line number"""

    def __init__(self, row: int, message: str):
        self.row = row
        super().__init__(f"row {row}: {message}")


@dataclass
class CsvDocument:
    """Parsed file: kind, ordered header pairs and the data rows as strings"""
    kind: str
    header: Header = field(default_factory=list)
    rows: List[Tuple[int, List[str]]] = field(default_factory=list)

    def header_dict(self) -> Dict[str, str]:
        return dict(self.header)


def _render(kind: str, header: Header, rows: Sequence[Sequence[str]]) -> str:
    buffer = io.StringIO()
    buffer.write(f"# {MAGIC} {kind}\n")
    for key, value in header:
        buffer.write(f"# {key}={value}\n")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(COLUMNS[kind])
    writer.writerows(rows)
    return buffer.getvalue()


def detect_csv_kind(text: str) -> str:
    """Kind from the '# triphoton <kind>' line, or from the column row when that line is absent"""
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            words = stripped.lstrip("#").split()
            if len(words) == 2 and words[0] == MAGIC and words[1] in COLUMNS:
                return words[1]
            continue
        columns = tuple(part.strip() for part in stripped.split(","))
        for kind, expected in COLUMNS.items():
            if columns == expected:
                return kind
        break
    raise CsvFormatError(1, f"not a fringe or counts file (expected columns {COLUMNS[FRINGE_KIND]} "
                            f"or {COLUMNS[COUNTS_KIND]})")


def parse_document(text: str) -> CsvDocument:
    kind = detect_csv_kind(text)
    document = CsvDocument(kind)
    lines = text.splitlines()
    index = 0

    while index < len(lines) and (lines[index].startswith("#") or not lines[index].strip()):
        body = lines[index].lstrip("#").strip()
        index += 1
        if not body or body == f"{MAGIC} {kind}":
            continue
        key, sep, value = body.partition("=")
        if not sep:
            raise CsvFormatError(index, f"header comment is not key=value: '{body}'")
        document.header.append((key.strip(), value.strip()))

    if index >= len(lines):
        raise CsvFormatError(index, "missing column header row")
    columns = tuple(part.strip() for part in lines[index].split(","))
    index += 1
    if columns != COLUMNS[kind]:
        raise CsvFormatError(index, f"expected columns {','.join(COLUMNS[kind])}, got {','.join(columns)}")

    for offset, row in enumerate(csv.reader(lines[index:])):
        number = index + offset + 1
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(columns):
            raise CsvFormatError(number, f"expected {len(columns)} fields, got {len(row)}")
        document.rows.append((number, [cell.strip() for cell in row]))

    if not document.rows:
        raise CsvFormatError(len(lines), "no data rows")
    return document


def _float(cell: str, row: int, column: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise CsvFormatError(row, f"{column} is not a number: '{cell}'")
    if not math.isfinite(value):
        raise CsvFormatError(row, f"{column} is not finite: '{cell}'")
    return value


def _count(cell: str, row: int, column: str) -> int:
    try:
        value = int(cell)
    except ValueError:
        raise CsvFormatError(row, f"{column} is not an integer: '{cell}'")
    if value < 0:
        raise CsvFormatError(row, f"{column} is negative: {value}")
    return value


def format_fringe(series: FringeSeries, header: Header) -> str:
    rows = [(repr(phase), repr(value)) for phase, value in zip(series.phases, series.values)]
    return _render(FRINGE_KIND, header, rows)


def parse_fringe(text: str) -> Tuple[Header, FringeSeries]:
    document = parse_document(text)
    if document.kind != FRINGE_KIND:
        raise CsvFormatError(1, f"expected a {FRINGE_KIND} file, got {document.kind}")
    phases, values = [], []
    for number, (phase, value) in document.rows:
        phases.append(_float(phase, number, "phase_rad"))
        values.append(_float(value, number, "value"))
        if values[-1] < 0.0:
            raise CsvFormatError(number, f"value is negative: {values[-1]}")
    return document.header, FringeSeries(tuple(phases), tuple(values), document.header_dict())


def format_counts(records: Sequence[CountRecord], header: Header) -> str:
    rows = [(repr(float(r.phase)), repr(float(r.duration)), str(r.raw_counts), repr(float(r.background_estimate)))
            for r in records]
    return _render(COUNTS_KIND, header, rows)


def parse_counts(text: str) -> Tuple[Header, List[CountRecord]]:
    document = parse_document(text)
    if document.kind != COUNTS_KIND:
        raise CsvFormatError(1, f"expected a {COUNTS_KIND} file, got {document.kind}")
    records = []
    for number, (phase, duration, raw, background) in document.rows:
        try:
            records.append(CountRecord(
                _float(phase, number, "phase_rad"),
                _float(duration, number, "duration_s"),
                _count(raw, number, "raw_counts"),
                _float(background, number, "background_counts"),
            ))
        except CsvFormatError:
            raise
        except ValueError as e:
            raise CsvFormatError(number, str(e))
    return document.header, records


def counts_header(echo: Header) -> Header:
    """Scenario echo followed by the generator name"""
    return list(echo) + [("rng", RNG_ALGORITHM)]


def config_from_header(header: Header, keys: Sequence[str]) -> str:
    """Scenario text rebuilt from the header pairs whose key is a scenario key"""
    return "".join(f"{key}={value}\n" for key, value in header if key in keys)


def read_text(path: PathLike) -> str:
    return Path(path).read_text(encoding="utf-8")


def write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    logger.info(f"Wrote {path}")
    return path


def write_json_report(path: PathLike, report: Dict[str, object]) -> Path:
    missing = [key for key in REPORT_KEYS if key not in report]
    if missing:
        raise ValueError(f"Fit report is missing {', '.join(missing)}")
    ordered = {key: report[key] for key in REPORT_KEYS}
    return write_text(path, json.dumps(ordered, indent=2) + "\n")


def default_output_name(kind: str, scheme: str, suffix: str = ".csv") -> str:
    return f"{kind}_{scheme}{suffix}"


def fit_report_name(input_path: PathLike) -> str:
    return f"{Path(input_path).stem}_fit.json"

