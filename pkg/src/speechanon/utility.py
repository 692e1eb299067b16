"""Utility preservation: CER, emotion similarity, blind SNR, prediction ensembling."""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .audio import AudioClip, FrameSpec, frame_signal
from .privacy import cosine_similarity

SNR_FLOOR_DB = -20.0
SNR_CEIL_DB = 100.0


# --- character error rate ---------------------------------------------------

def normalize_text(text: str) -> str:
    """Case-fold and drop whitespace, punctuation and symbols."""
    text = unicodedata.normalize("NFKC", text).casefold()
    return "".join(ch for ch in text if unicodedata.category(ch)[0] not in "PZSC")


def edit_distance(a, b) -> int:
    """Levenshtein distance with unit costs."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def cer(reference: str, hypothesis: str, normalize: bool = True) -> float:
    if normalize:
        reference, hypothesis = normalize_text(reference), normalize_text(hypothesis)
    if not reference:
        raise ValueError("CER is undefined for an empty reference")
    return edit_distance(reference, hypothesis) / len(reference)


@dataclass(frozen=True)
class TranscriptPair:
    utterance_id: str
    reference: str
    hypothesis: str

    def cer(self) -> float:
        return cer(self.reference, self.hypothesis)


def read_transcripts(path) -> dict[str, str]:
    """Two-column UTF-8 TSV ``id<TAB>text``."""
    out = {}
    with open(Path(path), encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n\r")
            if not line.strip():
                continue
            key, sep, text = line.partition("\t")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected 'id<TAB>text'")
            out[key.strip()] = text
    return out


# --- emotion similarity -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class EmotionEmbeddingPair:
    utterance_id: str
    original_vector: np.ndarray
    anonymised_vector: np.ndarray


def emotion_similarity(pair: EmotionEmbeddingPair) -> float:
    return cosine_similarity(pair.original_vector, pair.anonymised_vector)


# --- blind SNR --------------------------------------------------------------

class SnrEstimate(NamedTuple):
    db: float
    silent: bool = False


def estimate_snr(clip: AudioClip, min_duration: float = 0.5) -> SnrEstimate:
    """No-reference SNR from the distribution of frame energies.

    The noise floor is the mean energy of the quietest 10 % of frames. Frames
    whose level lies above the midpoint (in dB) between that floor and the
    loudest frame count as active; their mean energy minus the floor is the
    signal power. A zero noise floor gives the upper cap, no signal power
    above the floor the lower cap, and an all-zero clip the lower cap with
    ``silent`` set.
    """
    if clip.duration < min_duration:
        raise ValueError(f"{clip.id or 'clip'}: SNR needs at least {min_duration} s of audio")
    energy = np.mean(frame_signal(clip, FrameSpec.from_ms(clip.sample_rate)) ** 2, axis=1)
    if not np.any(energy > 0):
        return SnrEstimate(SNR_FLOOR_DB, True)
    ordered = np.sort(energy)
    noise = float(np.mean(ordered[: max(1, ordered.size // 10)]))
    if noise <= 0:
        return SnrEstimate(SNR_CEIL_DB)
    threshold_db = 0.5 * (10 * np.log10(noise) + 10 * np.log10(ordered[-1]))
    with np.errstate(divide="ignore"):
        active = energy[10 * np.log10(energy) >= threshold_db]
    signal = float(np.mean(active)) - noise
    if signal <= 0:
        return SnrEstimate(SNR_FLOOR_DB)
    snr = 10 * np.log10(signal / noise)
    return SnrEstimate(float(np.clip(snr, SNR_FLOOR_DB, SNR_CEIL_DB)))


# --- predictions, ensembling, accuracy --------------------------------------

class Prediction(NamedTuple):
    id: str
    probability: float
    label: int | None = None


@dataclass(frozen=True, eq=False)
class PredictionSet:
    """Per-utterance positive-class probabilities, keyed by id.

    Equality compares the id -> prediction mapping, ignoring order.
    """

    predictions: tuple[Prediction, ...]

    def __post_init__(self):
        preds = tuple(
            Prediction(str(p[0]), float(p[1]), None if len(p) < 3 or p[2] is None else int(p[2]))
            for p in self.predictions
        )
        seen = set()
        for p in preds:
            if not 0.0 <= p.probability <= 1.0:
                raise ValueError(f"{p.id}: probability {p.probability} outside [0, 1]")
            if p.label not in (None, 0, 1):
                raise ValueError(f"{p.id}: label must be 0 or 1")
            if p.id in seen:
                raise ValueError(f"duplicate prediction id {p.id!r}")
            seen.add(p.id)
        object.__setattr__(self, "predictions", preds)

    def __eq__(self, other):
        if not isinstance(other, PredictionSet):
            return NotImplemented
        return self.as_dict() == other.as_dict()

    def __len__(self):
        return len(self.predictions)

    def __iter__(self):
        return iter(self.predictions)

    def as_dict(self) -> dict[str, Prediction]:
        return {p.id: p for p in self.predictions}

    @property
    def ids(self) -> set[str]:
        return {p.id for p in self.predictions}

    def with_labels(self, labels: dict[str, int]) -> PredictionSet:
        return PredictionSet(tuple(
            Prediction(p.id, p.probability, labels.get(p.id, p.label)) for p in self.predictions
        ))


class IdMismatchError(ValueError):
    def __init__(self, only_a, only_b):
        self.only_a = sorted(only_a)
        self.only_b = sorted(only_b)
        super().__init__(
            f"prediction ids differ: only in first {self.only_a[:10]}, only in second {self.only_b[:10]}"
        )


def ensemble_average(a: PredictionSet, b: PredictionSet) -> PredictionSet:
    """Average two systems' probabilities per id; output sorted by id."""
    da, db = a.as_dict(), b.as_dict()
    if da.keys() != db.keys():
        raise IdMismatchError(da.keys() - db.keys(), db.keys() - da.keys())
    out = []
    for key in sorted(da):
        pa, pb = da[key], db[key]
        if pa.label is not None and pb.label is not None and pa.label != pb.label:
            raise ValueError(f"{key}: conflicting labels {pa.label} and {pb.label}")
        label = pa.label if pa.label is not None else pb.label
        out.append(Prediction(key, (pa.probability + pb.probability) / 2, label))
    return PredictionSet(tuple(out))


def accuracy(preds: PredictionSet, threshold: float = 0.5) -> float:
    if len(preds) == 0:
        raise ValueError("no predictions")
    missing = [p.id for p in preds if p.label is None]
    if missing:
        raise ValueError(f"{len(missing)} prediction(s) lack a true label, e.g. {missing[0]!r}")
    hits = sum(int(p.probability >= threshold) == p.label for p in preds)
    return hits / len(preds)


def read_predictions(path) -> PredictionSet:
    """CSV ``id,probability[,label]``."""
    rows = []
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if not {"id", "probability"} <= set(reader.fieldnames or []):
            raise ValueError(f"{path}: header must contain id,probability")
        for row in reader:
            label = (row.get("label") or "").strip()
            try:
                rows.append(Prediction(row["id"].strip(), float(row["probability"]), int(label) if label else None))
            except ValueError as exc:
                raise ValueError(f"{path}:{reader.line_num}: {exc}") from None
    return PredictionSet(tuple(rows))


def read_labels(path) -> dict[str, int]:
    """CSV ``id,label``."""
    with open(Path(path), newline="", encoding="utf-8") as fh:
        return {row["id"].strip(): int(row["label"]) for row in csv.DictReader(fh)}


def write_predictions(preds: PredictionSet, path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "probability", "label"])
        for p in preds:
            w.writerow([p.id, repr(p.probability), "" if p.label is None else p.label])
