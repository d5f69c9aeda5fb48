"""CSV ingestion and emission.

Interchange schemas (UTF-8, comma-delimited, ``.`` decimal separator):

* hospitals file, header ``hospital_id,stratum_id,patients,mortality_rate``;
  an empty ``mortality_rate`` means undefined and is only legal when
  ``patients`` is 0;
* standard file, header ``stratum_id,expected_rate``.

Numbers are emitted with 17 significant digits, so
``ingest(emit(cohort)) == cohort`` bit-for-bit. All ingestion failures
carry the 1-based row number of the offending line.
"""

from __future__ import annotations

import csv
import io
from math import isfinite
from pathlib import Path
from typing import Iterable

from .core import Cohort, ExternalStandard, StratumCell, StratumTable
from .errors import ParseError, ValidationError

HOSPITALS_HEADER = ["hospital_id", "stratum_id", "patients", "mortality_rate"]
STANDARD_HEADER = ["stratum_id", "expected_rate"]


def format_number(value: float) -> str:
    """17 significant digits; round-trips any float exactly."""
    return format(float(value), ".17g")


def _parse_float(text: str, row: int, column: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise ParseError(row, column, f"not a number: {text!r}") from None
    if not isfinite(value):
        raise ParseError(row, column, f"not finite: {text!r}")
    return value


def _check_header(got: list[str] | None, want: list[str], path: str) -> None:
    if got is None or [c.strip() for c in got] != want:
        raise ParseError(1, ",".join(want), f"{path}: header must be {','.join(want)!r}")


def load_hospitals(path: str | Path) -> Cohort:
    """Read a hospitals file into a cohort, in file order."""
    tables: dict[str, dict[str, StratumCell]] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        _check_header(next(reader, None), HOSPITALS_HEADER, str(path))
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise ParseError(row_no, "*", f"expected 4 fields, got {len(row)}")
            hospital, stratum, patients_text, rate_text = (c.strip() for c in row)
            if not hospital or not stratum:
                raise ValidationError(row_no, "hospital_id and stratum_id must be non-empty")
            patients = _parse_float(patients_text, row_no, "patients")
            if patients < 0.0:
                raise ValidationError(row_no, f"patients must be >= 0, got {patients}")
            if rate_text == "":
                rate = None
                if patients > 0.0:
                    raise ValidationError(row_no, "populated stratum needs a mortality_rate")
            else:
                rate = _parse_float(rate_text, row_no, "mortality_rate")
                if not 0.0 <= rate <= 1.0:
                    raise ValidationError(row_no, f"mortality_rate must be in [0, 1], got {rate}")
            cells = tables.setdefault(hospital, {})
            if stratum in cells:
                raise ValidationError(row_no, f"duplicate ({hospital!r}, {stratum!r})")
            cells[stratum] = StratumCell(patients, rate)
    if not tables:
        raise ValidationError(1, "no hospital rows")
    return Cohort(tuple(StratumTable(h, cells) for h, cells in tables.items()))


def load_standard(path: str | Path) -> ExternalStandard:
    """Read a standard file."""
    rates: dict[str, float] = {}
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        _check_header(next(reader, None), STANDARD_HEADER, str(path))
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(row_no, "*", f"expected 2 fields, got {len(row)}")
            stratum, rate_text = (c.strip() for c in row)
            if not stratum:
                raise ValidationError(row_no, "stratum_id must be non-empty")
            if stratum in rates:
                raise ValidationError(row_no, f"duplicate stratum {stratum!r}")
            rate = _parse_float(rate_text, row_no, "expected_rate")
            if not 0.0 <= rate <= 1.0:
                raise ValidationError(row_no, f"expected_rate must be in [0, 1], got {rate}")
            rates[stratum] = rate
    return ExternalStandard(rates)


def ingest(
    hospitals_path: str | Path, standard_path: str | Path | None = None
) -> tuple[Cohort, ExternalStandard | None]:
    """Load and validate the hospitals file and the optional standard."""
    cohort = load_hospitals(hospitals_path)
    standard = None if standard_path is None else load_standard(standard_path)
    return cohort, standard


def _write_rows(rows: Iterable[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerows(rows)
    return buffer.getvalue()


def emit_hospitals(cohort: Cohort) -> str:
    """Serialize a cohort; iteration order is preserved for round-trips."""
    rows: list[list[str]] = [HOSPITALS_HEADER]
    for table in cohort.hospitals:
        for stratum, cell in table.cells.items():
            rate = "" if cell.rate is None else format_number(cell.rate)
            rows.append([str(table.hospital), str(stratum), format_number(cell.count), rate])
    return _write_rows(rows)


def emit_standard(standard: ExternalStandard) -> str:
    rows: list[list[str]] = [STANDARD_HEADER]
    for stratum, rate in standard.rates.items():
        rows.append([str(stratum), format_number(rate)])
    return _write_rows(rows)
