"""Utterance manifest (CSV or JSON lines) loading and validation."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path


class ManifestError(ValueError):
    pass


class Gender(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNSPECIFIED = "unspecified"

    @classmethod
    def parse(cls, token) -> Gender:
        if token is None:
            return cls.UNSPECIFIED
        t = str(token).strip().lower()
        aliases = {"m": "male", "f": "female", "": "unspecified", "u": "unspecified", "unknown": "unspecified"}
        t = aliases.get(t, t)
        try:
            return cls(t)
        except ValueError:
            raise ValueError(f"unknown gender {token!r}") from None


class Split(str, Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


@dataclass(frozen=True)
class UtteranceRecord:
    id: str
    speaker_id: str
    gender: Gender
    wav_path: Path
    transcript: str | None = None
    risk_label: int | None = None
    split: Split = Split.TEST


REQUIRED = ("id", "speaker_id", "gender", "wav_path")
OPTIONAL = ("transcript", "risk_label", "split")


def _record_from_row(row: dict, base: Path, where: str) -> UtteranceRecord:
    missing = [c for c in REQUIRED if not str(row.get(c) or "").strip()]
    if missing:
        raise ManifestError(f"{where}: missing required field(s) {', '.join(missing)}")
    try:
        gender = Gender.parse(row["gender"])
    except ValueError as exc:
        raise ManifestError(f"{where}: {exc}") from None

    label = row.get("risk_label")
    if label is None or str(label).strip() == "":
        label = None
    else:
        try:
            label = int(str(label).strip())
        except ValueError:
            label = -1
        if label not in (0, 1):
            raise ManifestError(f"{where}: risk_label must be 0 or 1, got {row['risk_label']!r}")

    split = str(row.get("split") or "test").strip().lower()
    try:
        split = Split(split)
    except ValueError:
        raise ManifestError(f"{where}: unknown split {row['split']!r}") from None

    wav = Path(str(row["wav_path"]).strip())
    if not wav.is_absolute():
        wav = base / wav
    transcript = row.get("transcript")
    if transcript is not None and str(transcript).strip() == "":
        transcript = None
    return UtteranceRecord(
        id=str(row["id"]).strip(),
        speaker_id=str(row["speaker_id"]).strip(),
        gender=gender,
        wav_path=wav,
        transcript=transcript,
        risk_label=label,
        split=split,
    )


def _iter_rows(path: Path):
    """Yield ``(line_number, row_dict)`` pairs."""
    if path.suffix.lower() in (".jsonl", ".ndjson", ".json"):
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ManifestError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
                if not isinstance(row, dict):
                    raise ManifestError(f"{path}:{lineno}: expected a JSON object")
                yield lineno, row
        return
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        absent = [c for c in REQUIRED if c not in header]
        if absent:
            raise ManifestError(f"{path}:1: header lacks column(s) {', '.join(absent)}")
        for row in reader:
            yield reader.line_num, row


def load_manifest(path) -> list[UtteranceRecord]:
    """Load and validate a manifest; relative wav paths resolve against its directory."""
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"{path}: manifest not found")
    records = []
    seen = {}
    for lineno, row in _iter_rows(path):
        where = f"{path}:{lineno}"
        rec = _record_from_row(row, path.parent, where)
        if rec.id in seen:
            raise ManifestError(f"{where}: duplicate id {rec.id!r} (first seen at line {seen[rec.id]})")
        seen[rec.id] = lineno
        records.append(rec)
    return records


def _portable_path(wav, base: Path) -> str:
    """Path relative to ``base`` if it lies below it, else absolute."""
    wav = Path(wav).resolve()
    try:
        return wav.relative_to(base).as_posix()
    except ValueError:
        return str(wav)


def write_manifest(records, path) -> None:
    """Write a CSV manifest that ``load_manifest`` reads back to the same files."""
    path = Path(path)
    base = path.resolve().parent
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(REQUIRED + OPTIONAL)
        for r in records:
            w.writerow([
                r.id, r.speaker_id, r.gender.value, _portable_path(r.wav_path, base),
                r.transcript or "", "" if r.risk_label is None else r.risk_label, r.split.value,
            ])
