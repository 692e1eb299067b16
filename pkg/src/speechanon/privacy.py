"""Speaker linkability: trial lists, cosine scoring and equal error rate."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import NamedTuple

import numpy as np
import scipy.fft

from .audio import AudioClip, FrameSpec, Window, frame_signal


class Source(str, Enum):
    ORIGINAL = "original"
    ANONYMISED = "anonymised"


@dataclass(frozen=True, eq=False)
class SpeakerEmbedding:
    utterance_id: str
    vector: np.ndarray
    source: Source = Source.ORIGINAL

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=np.float64)
        if v.ndim != 1 or v.size == 0:
            raise ValueError("embedding must be a non-empty 1-D vector")
        if not np.all(np.isfinite(v)):
            raise ValueError(f"{self.utterance_id}: embedding has non-finite entries")
        if not np.any(v):
            raise ValueError(f"{self.utterance_id}: embedding is the zero vector")
        object.__setattr__(self, "vector", v)
        object.__setattr__(self, "source", Source(self.source))


class Trial(NamedTuple):
    enroll_id: str
    test_id: str
    is_same_speaker: bool


@dataclass(frozen=True)
class TrialSet:
    trials: tuple[Trial, ...]

    def __len__(self):
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    @property
    def n_genuine(self) -> int:
        return sum(t.is_same_speaker for t in self.trials)

    @property
    def n_impostor(self) -> int:
        return len(self.trials) - self.n_genuine


@dataclass(frozen=True, eq=False)
class ScoreSet:
    genuine_scores: np.ndarray
    impostor_scores: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.genuine_scores, dtype=np.float64).ravel()
        i = np.asarray(self.impostor_scores, dtype=np.float64).ravel()
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(i))):
            raise ValueError("scores must be finite")
        object.__setattr__(self, "genuine_scores", g)
        object.__setattr__(self, "impostor_scores", i)


class EerResult(NamedTuple):
    eer: float
    threshold: float


def build_trials(records, max_impostor_per_enroll: int = 10, seed: int = 0) -> TrialSet:
    """Linking-attack trials: original enrollment vs anonymised test utterances.

    Each speaker enrolls with its first utterance (manifest order). Genuine
    trials pair that enrollment with every anonymised utterance of the same
    speaker, including the enrollment utterance itself; impostor trials pair
    it with up to ``max_impostor_per_enroll`` anonymised utterances of other
    speakers, drawn without replacement from a generator seeded with ``seed``.
    """
    records = list(records)
    by_speaker: dict[str, list[str]] = {}
    for r in records:
        by_speaker.setdefault(r.speaker_id, []).append(r.id)
    if len(by_speaker) < 2:
        raise ValueError("need at least two speakers to form impostor trials")
    if max_impostor_per_enroll < 1:
        raise ValueError("max_impostor_per_enroll must be at least 1")

    rng = np.random.default_rng(seed)
    trials = []
    for speaker, utts in by_speaker.items():
        enroll = utts[0]
        trials.extend(Trial(enroll, u, True) for u in utts)
        others = [r.id for r in records if r.speaker_id != speaker and r.id != enroll]
        if len(others) > max_impostor_per_enroll:
            pick = np.sort(rng.choice(len(others), max_impostor_per_enroll, replace=False))
            others = [others[k] for k in pick]
        trials.extend(Trial(enroll, u, False) for u in others)
    return TrialSet(tuple(trials))


def cosine_similarity(u, v) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(np.clip(np.dot(u / nu, v / nv), -1.0, 1.0))


def _vector(table, key):
    v = table[key]
    return v.vector if isinstance(v, SpeakerEmbedding) else v


def score_trials(trials: TrialSet, embeddings, test_embeddings=None) -> ScoreSet:
    """Cosine-score every trial.

    ``embeddings`` maps enrollment ids to vectors; ``test_embeddings`` (default:
    the same table) maps test ids.
    """
    test_embeddings = embeddings if test_embeddings is None else test_embeddings
    genuine, impostor = [], []
    for t in trials:
        for table, key in ((embeddings, t.enroll_id), (test_embeddings, t.test_id)):
            if key not in table:
                raise KeyError(f"no embedding for utterance {key!r}")
        s = cosine_similarity(_vector(embeddings, t.enroll_id), _vector(test_embeddings, t.test_id))
        (genuine if t.is_same_speaker else impostor).append(s)
    return ScoreSet(np.array(genuine), np.array(impostor))


def compute_eer(scores: ScoreSet) -> EerResult:
    """Equal error rate by a threshold sweep with linear interpolation.

    Candidate thresholds are the distinct pooled scores plus one above all
    scores. A trial is accepted when its score is >= the threshold, so FRR(t)
    is the fraction of genuine scores below t and FAR(t) the fraction of
    impostor scores at or above t. The EER is read off where FAR - FRR changes
    sign, interpolating linearly between the two bracketing thresholds.
    """
    g = np.sort(scores.genuine_scores)
    imp = np.sort(scores.impostor_scores)
    if g.size == 0 or imp.size == 0:
        raise ValueError("EER needs at least one genuine and one impostor score")
    u = np.unique(np.concatenate((g, imp)))
    t = np.append(u, u[-1] + max(1.0, float(u[-1] - u[0])))
    frr = np.searchsorted(g, t, side="left") / g.size
    far = (imp.size - np.searchsorted(imp, t, side="left")) / imp.size
    d = far - frr
    j = int(np.argmax(d <= 0))  # d[0] == 1 and d[-1] == -1
    if d[j] == 0:
        return EerResult(float(frr[j]), float(t[j]))
    lam = d[j - 1] / (d[j - 1] - d[j])
    eer = frr[j - 1] + lam * (frr[j] - frr[j - 1])
    return EerResult(float(eer), float(t[j - 1] + lam * (t[j] - t[j - 1])))


# --- built-in lightweight speaker embedding -------------------------------

N_MFCC = 20
N_MELS = 40
N_FFT = 512


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(sample_rate: int, n_fft: int = N_FFT, n_mels: int = N_MELS) -> np.ndarray:
    """Triangular filters on the HTK mel scale, shape ``(n_mels, n_fft // 2 + 1)``."""
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2), n_mels + 2))
    bins = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (bins[None, :] - lo) / (mid - lo)
    falling = (hi - bins[None, :]) / (hi - mid)
    return np.maximum(0.0, np.minimum(rising, falling))


def mfcc(clip: AudioClip, n_mfcc: int = N_MFCC) -> np.ndarray:
    """MFCC frames ``(n_frames, n_mfcc)``, c0 (log energy) excluded."""
    spec = FrameSpec.from_ms(clip.sample_rate, window=Window.HAMMING)
    frames = frame_signal(clip, spec)
    power = np.abs(np.fft.rfft(frames, N_FFT)) ** 2
    mel = power @ mel_filterbank(clip.sample_rate).T
    ceps = scipy.fft.dct(np.log(mel + 1e-10), type=2, norm="ortho", axis=1)
    return ceps[:, 1: n_mfcc + 1]


def mfcc_mean_embedding(clip: AudioClip, min_duration: float = 0.5, dynamic_range_db: float = 40.0) -> SpeakerEmbedding:
    """Frame-averaged MFCCs over active frames, centred across coefficients.

    Frames more than ``dynamic_range_db`` below the loudest frame are skipped.
    """
    if clip.duration < min_duration:
        raise ValueError(f"{clip.id or 'clip'}: {clip.duration:.3f} s is shorter than {min_duration} s")
    spec = FrameSpec.from_ms(clip.sample_rate)
    energy = np.sum(frame_signal(clip, spec) ** 2, axis=1)
    if not np.any(energy > 0):
        raise ValueError(f"{clip.id or 'clip'}: silent clip has no speaker embedding")
    active = 10 * np.log10(energy + 1e-20) > 10 * np.log10(energy.max()) - dynamic_range_db
    ceps = mfcc(clip)
    v = ceps[active[: ceps.shape[0]]].mean(axis=0)
    return SpeakerEmbedding(clip.id, v - v.mean())


# --- file formats -----------------------------------------------------------

def read_embedding_table(path) -> dict[str, np.ndarray]:
    """CSV ``id,dim0..dimN`` or raw float32 rows with a ``<path>.ids`` sidecar."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        table = {}
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0] != "id":
                raise ValueError(f"{path}: header must start with 'id'")
            dim = len(header) - 1
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != dim + 1:
                    raise ValueError(f"{path}:{lineno}: expected {dim} values, got {len(row) - 1}")
                table[row[0]] = np.array([float(v) for v in row[1:]])
        return table
    ids = Path(str(path) + ".ids").read_text(encoding="utf-8").split()
    data = np.fromfile(path, dtype="<f4")
    if not ids or data.size % len(ids):
        raise ValueError(f"{path}: {data.size} floats do not divide into {len(ids)} rows")
    rows = data.reshape(len(ids), -1).astype(np.float64)
    return dict(zip(ids, rows))


def write_embedding_table(table, path) -> None:
    path = Path(path)
    ids = list(table)
    rows = np.array([_vector(table, k) for k in ids], dtype=np.float64)
    if path.suffix.lower() == ".csv":
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["id"] + [f"dim{k}" for k in range(rows.shape[1])])
            for k, row in zip(ids, rows):
                w.writerow([k] + [repr(float(v)) for v in row])
        return
    rows.astype("<f4").tofile(path)
    Path(str(path) + ".ids").write_text("\n".join(ids) + "\n", encoding="utf-8")


def read_scores_csv(path) -> tuple[list[tuple[str, str, bool, float]], ScoreSet]:
    """Read ``enroll_id,test_id,label,score`` rows from an external ASV system."""
    rows = []
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        need = {"enroll_id", "test_id", "label", "score"}
        if not need <= set(reader.fieldnames or []):
            raise ValueError(f"{path}: header must contain {sorted(need)}")
        for row in reader:
            label = row["label"].strip().lower()
            if label not in ("1", "0", "target", "nontarget", "true", "false"):
                raise ValueError(f"{path}:{reader.line_num}: bad label {row['label']!r}")
            same = label in ("1", "target", "true")
            rows.append((row["enroll_id"], row["test_id"], same, float(row["score"])))
    genuine = [s for *_, same, s in rows if same]
    impostor = [s for *_, same, s in rows if not same]
    return rows, ScoreSet(np.array(genuine), np.array(impostor))


def write_trials_csv(trials: TrialSet, path, scores=None) -> None:
    """Write trials (and optionally a parallel score list) as CSV."""
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["enroll_id", "test_id", "label"] + (["score"] if scores is not None else []))
        for k, t in enumerate(trials):
            row = [t.enroll_id, t.test_id, int(t.is_same_speaker)]
            if scores is not None:
                row.append(f"{scores[k]:.6f}")
            w.writerow(row)
