"""Trial-log persistence: JSON-lines with a fixed field order, plus CSV export."""

from __future__ import annotations

import csv
import io
import json
from typing import Iterable

from .experiment import ExperimentError, TrialRecord

LOG_FIELDS = (
    "method",
    "block",
    "trial",
    "dir",
    "D_m",
    "W_m",
    "id",
    "id_cat",
    "mt_s",
    "misses",
    "hit",
    "seed",
    "subject",
)


class LogError(ValueError):
    pass


def record_to_dict(record: TrialRecord) -> dict:
    return {name: getattr(record, name) for name in LOG_FIELDS}


def record_from_dict(obj: dict) -> TrialRecord:
    missing = [name for name in LOG_FIELDS if name not in obj]
    if missing:
        raise LogError(f"record missing fields: {missing}")
    try:
        return TrialRecord(**{name: obj[name] for name in LOG_FIELDS})
    except ExperimentError as exc:
        raise LogError(str(exc)) from exc


def write_log(records: Iterable[TrialRecord]) -> str:
    """Canonical JSON-lines serialization, one record per line."""
    lines = [
        json.dumps(record_to_dict(r), separators=(",", ":")) for r in records
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def read_log(text: str) -> list[TrialRecord]:
    """Parse a JSON-lines trial log; errors name the offending line."""
    records = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise LogError(f"malformed log line {lineno}: {exc}") from exc
        try:
            records.append(record_from_dict(obj))
        except LogError as exc:
            raise LogError(f"invalid record on line {lineno}: {exc}") from exc
    return records


def write_log_file(records: Iterable[TrialRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(write_log(records))


def read_log_file(path) -> list[TrialRecord]:
    with open(path, "r", encoding="utf-8") as fh:
        return read_log(fh.read())


def write_csv(records: Iterable[TrialRecord]) -> str:
    """CSV export with the same columns as the JSON-lines log."""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=LOG_FIELDS)
    writer.writeheader()
    for r in records:
        row = record_to_dict(r)
        row["hit"] = int(row["hit"])
        writer.writerow(row)
    return buf.getvalue()


def read_csv(text: str) -> list[TrialRecord]:
    reader = csv.DictReader(io.StringIO(text))
    records = []
    for lineno, row in enumerate(reader, start=2):
        try:
            records.append(
                TrialRecord(
                    method=row["method"],
                    block=int(row["block"]),
                    trial=int(row["trial"]),
                    dir=int(row["dir"]),
                    D_m=float(row["D_m"]),
                    W_m=float(row["W_m"]),
                    id=float(row["id"]),
                    id_cat=int(row["id_cat"]),
                    mt_s=float(row["mt_s"]),
                    misses=int(row["misses"]),
                    hit=bool(int(row["hit"])),
                    seed=int(row["seed"]),
                    subject=int(row["subject"]),
                )
            )
        except (KeyError, ValueError) as exc:
            raise LogError(f"invalid CSV record on line {lineno}: {exc}") from exc
    return records
