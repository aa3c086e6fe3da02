"""CSV/JSON readers and writers for the command-line pipelines."""
from __future__ import annotations

import csv
import hashlib
import json
from datetime import datetime, timedelta
from pathlib import Path

from .bus_queue import PduRecord
from .classroom import CourseMeeting, Room
from .lpr_cleanse import Direction, PlateRecord, ReadFlag

EPOCH = datetime(1970, 1, 1)


class DataError(ValueError):
    """Malformed input file."""


def parse_time(text: str) -> float:
    """ISO-8601 wall-clock time to naive seconds since the epoch."""
    dt = datetime.fromisoformat(text.strip())
    return (dt.replace(tzinfo=None) - EPOCH).total_seconds()


def format_time(seconds: float) -> str:
    return (EPOCH + timedelta(seconds=float(seconds))).isoformat()


def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def read_rows(path, required):
    """Yield ``(line_number, row)`` from a headed CSV, checking the header."""
    path = Path(path)
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        fields = [c.strip() for c in (reader.fieldnames or [])]
        missing = [c for c in required if c not in fields]
        if missing:
            raise DataError(f"{path}: missing column(s) {', '.join(missing)}")
        reader.fieldnames = fields
        rows = []
        for row in reader:
            rows.append((reader.line_num, {k: (v.strip() if isinstance(v, str) else v)
                                           for k, v in row.items()}))
    return rows


def _field(path, line, row, name, conv):
    try:
        return conv(row[name])
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f"{path}, line {line}: bad {name} value {row.get(name)!r}") from exc


def read_lpr(path) -> list[PlateRecord]:
    out = []
    for line, row in read_rows(path, ["timestamp", "plate_string", "ocr_score", "read_flag", "direction"]):
        fields = (
            _field(path, line, row, "timestamp", parse_time),
            (row["plate_string"] or "").upper(),
            _field(path, line, row, "ocr_score", int),
            _field(path, line, row, "read_flag", lambda v: ReadFlag(v.upper())),
            _field(path, line, row, "direction", lambda v: Direction(v.upper())),
        )
        try:
            out.append(PlateRecord(*fields))
        except ValueError as exc:
            raise DataError(f"{path}, line {line}: {exc}") from exc
    return out


def read_rates(path):
    """``(slot_starts, arrivals, departures)`` from an hourly rates file."""
    starts, arr, dep = [], [], []
    for line, row in read_rows(path, ["slot_start", "arrivals", "departures"]):
        starts.append(_field(path, line, row, "slot_start", parse_time))
        arr.append(_field(path, line, row, "arrivals", float))
        dep.append(_field(path, line, row, "departures", float))
    return starts, arr, dep


def read_timetable(path) -> list[CourseMeeting]:
    out = []
    for line, row in read_rows(path, ["course_id", "day", "start_slot", "duration_slots",
                                      "enrolment", "predicted_attendance"]):
        try:
            out.append(CourseMeeting(
                row["course_id"],
                _field(path, line, row, "day", int),
                _field(path, line, row, "start_slot", int),
                _field(path, line, row, "duration_slots", int),
                _field(path, line, row, "predicted_attendance", float),
                _field(path, line, row, "enrolment", int),
            ))
        except ValueError as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"{path}, line {line}: {exc}") from exc
    return out


def read_actuals(path) -> dict[str, float]:
    out = {}
    for line, row in read_rows(path, ["course_id"]):
        val = row.get("actual_attendance", "")
        if val not in ("", None):
            out[row["course_id"]] = _field(path, line, row, "actual_attendance", float)
    return out


def read_rooms(path) -> list[Room]:
    out = []
    for line, row in read_rows(path, ["room_id", "capacity"]):
        try:
            out.append(Room(row["room_id"], _field(path, line, row, "capacity", int)))
        except ValueError as exc:
            if isinstance(exc, DataError):
                raise
            raise DataError(f"{path}, line {line}: {exc}") from exc
    return out


def read_pdu(path) -> list[PduRecord]:
    out = []
    for line, row in read_rows(path, ["timestamp", "sensor_position", "distance_cm"]):
        raw = row.get("distance_cm")
        dist = None if raw in ("", None) else _field(path, line, row, "distance_cm", float)
        out.append(PduRecord(_field(path, line, row, "timestamp", parse_time),
                             _field(path, line, row, "sensor_position", int), dist))
    return out


def read_scheme_table(path):
    rows = []
    for line, row in read_rows(path, ["day", "scheme", "rho", "spaces_sv", "r_pv", "r_sv"]):
        rows.append((
            _field(path, line, row, "day", int),
            _field(path, line, row, "scheme", int),
            _field(path, line, row, "rho", float),
            _field(path, line, row, "spaces_sv", int),
            _field(path, line, row, "r_pv", float),
            _field(path, line, row, "r_sv", float),
        ))
    return rows


def read_columns(path, columns, conv=float):
    cols = {c: [] for c in columns}
    for line, row in read_rows(path, columns):
        for c in columns:
            cols[c].append(_field(path, line, row, c, conv))
    return cols


def write_table(path, header, rows, fmt: str = "csv") -> Path:
    """Write rows as CSV, or as a JSON list of objects when ``fmt == "json"``."""
    path = Path(path)
    if fmt == "json":
        path = path.with_suffix(".json")
        path.write_text(json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n")
        return path
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path
