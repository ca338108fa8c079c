"""Loading, validation and per-device grouping of raw GPS logs."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .geodesy import GeoCoord


@dataclass(frozen=True)
class GpsRecord:
    """One sensed GPS point: device id, epoch-seconds timestamp, coordinate."""

    device_id: str
    timestamp: float
    coord: GeoCoord

    def __post_init__(self):
        if self.timestamp < 0:
            raise ValueError(f"timestamp {self.timestamp} is negative")


@dataclass
class DeviceLog:
    """All records of one device, sorted ascending by timestamp."""

    device_id: str
    records: list[GpsRecord]


@dataclass
class ColumnSpec:
    """Maps the id/timestamp/lat/lng fields onto delimited-file columns.

    Each column is either a header name (str) or a 0-based index (int).
    ``has_header=None`` auto-detects: a header is assumed whenever any
    column is name-based, otherwise the first row is treated as a header
    only if it does not parse as a record.
    """

    id_col: int | str = "id"
    time_col: int | str = "timestamp"
    lat_col: int | str = "lat"
    lng_col: int | str = "lng"
    delimiter: str = ","
    has_header: bool | None = None

    def needs_header(self) -> bool:
        return any(isinstance(col, str)
                   for col in (self.id_col, self.time_col, self.lat_col, self.lng_col))


@dataclass
class LoadResult:
    """Parsed records plus a counter of dropped (malformed/out-of-range) rows."""

    records: list[GpsRecord] = field(default_factory=list)
    rejects: int = 0


def parse_timestamp(raw: str) -> float:
    """Parse epoch seconds (int/float) or an ISO-8601 datetime to epoch seconds.

    Naive ISO datetimes are interpreted as UTC.
    """
    try:
        return float(raw)
    except ValueError:
        pass
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def _resolve_indices(spec: ColumnSpec, header: list[str] | None) -> list[int]:
    indices = []
    for col in (spec.id_col, spec.time_col, spec.lat_col, spec.lng_col):
        if isinstance(col, int):
            indices.append(col)
        else:
            if header is None:
                raise ValueError(f"column {col!r} is name-based but the file has no header")
            try:
                indices.append(header.index(col))
            except ValueError:
                raise ValueError(f"column {col!r} not found in header {header}") from None
    return indices


def _parse_row(row: list[str], indices: list[int]) -> GpsRecord | None:
    id_i, time_i, lat_i, lng_i = indices
    try:
        device_id = row[id_i].strip()
        timestamp = parse_timestamp(row[time_i].strip())
        coord = GeoCoord(float(row[lat_i]), float(row[lng_i]))
        if not device_id:
            return None
        return GpsRecord(device_id, timestamp, coord)
    except (IndexError, ValueError):
        return None


def load_csv(path: str | Path, spec: ColumnSpec | None = None) -> LoadResult:
    """Load GPS records from a delimited text file.

    Rows whose mapped fields are missing, unparseable or out of range
    (latitude outside [-90, 90], negative timestamp) are dropped and
    counted in ``LoadResult.rejects``. Unmapped columns are ignored.

    Args:
        path: input file; an unreadable path raises OSError.
        spec: column mapping; defaults to header names id/timestamp/lat/lng.

    Returns:
        LoadResult with records in file order and the reject count.
    """
    spec = spec or ColumnSpec()
    result = LoadResult()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=spec.delimiter)
        rows = iter(reader)
        first = next(rows, None)
        if first is None:
            return result

        header_present = spec.has_header
        if header_present is None:
            header_present = spec.needs_header()
        if header_present:
            indices = _resolve_indices(spec, first)
        else:
            indices = _resolve_indices(spec, None)
            record = _parse_row(first, indices)
            if record is not None:
                result.records.append(record)
            elif spec.has_header is None:
                # unparseable first row with index-based columns: treat as header
                pass
            else:
                result.rejects += 1

        for row in rows:
            if not row:
                continue
            record = _parse_row(row, indices)
            if record is not None:
                result.records.append(record)
            else:
                result.rejects += 1
    return result


def group_by_device(records: list[GpsRecord]) -> list[DeviceLog]:
    """Group records by device id and sort each group by timestamp.

    Sorting is stable, so records with equal timestamps keep their input
    order. The returned logs are ordered by device id; the multiset of
    records is preserved exactly.
    """
    by_device: dict[str, list[GpsRecord]] = {}
    for record in records:
        by_device.setdefault(record.device_id, []).append(record)
    logs = []
    for device_id in sorted(by_device):
        group = sorted(by_device[device_id], key=lambda r: r.timestamp)
        logs.append(DeviceLog(device_id, group))
    return logs
