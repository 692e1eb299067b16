"""F0 contours in semitones re A4, YIN tracking, and contour deviation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .audio import AudioClip

A4_HZ = 440.0


def hz_to_semitones(f0_hz):
    return 12.0 * np.log2(np.asarray(f0_hz, dtype=np.float64) / A4_HZ)


def semitones_to_hz(semitones):
    return A4_HZ * 2.0 ** (np.asarray(semitones, dtype=np.float64) / 12.0)


@dataclass(frozen=True, eq=False)
class F0Contour:
    """Per-frame pitch; ``semitones`` is NaN wherever ``voiced`` is False."""

    frame_times: np.ndarray
    semitones: np.ndarray
    voiced: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.frame_times, dtype=np.float64)
        v = np.asarray(self.voiced, dtype=bool)
        s = np.asarray(self.semitones, dtype=np.float64)
        if not (t.shape == v.shape == s.shape) or t.ndim != 1:
            raise ValueError("frame_times, semitones and voiced must be equal-length 1-D arrays")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("frame times must be strictly increasing")
        if not np.all(np.isfinite(s[v])):
            raise ValueError("voiced frames need finite semitone values")
        s = np.where(v, s, np.nan)
        object.__setattr__(self, "frame_times", t)
        object.__setattr__(self, "semitones", s)
        object.__setattr__(self, "voiced", v)

    def __len__(self):
        return self.frame_times.size

    @classmethod
    def from_values(cls, semitones, voiced=None, hop_s: float = 0.01) -> F0Contour:
        """Contour with uniform frame times; voicing defaults to all-voiced."""
        s = np.asarray(semitones, dtype=np.float64)
        v = np.ones(s.size, dtype=bool) if voiced is None else np.asarray(voiced, dtype=bool)
        return cls(np.arange(s.size) * hop_s, np.where(v, s, np.nan), v)

    @property
    def f0_hz(self) -> np.ndarray:
        return semitones_to_hz(self.semitones)

    def shifted(self, semitones: float) -> F0Contour:
        return F0Contour(self.frame_times, self.semitones + semitones, self.voiced)


def _yin_cmnd(frames: np.ndarray, width: int, max_lag: int) -> np.ndarray:
    """Cumulative-mean-normalised difference, shape ``(n_frames, max_lag + 1)``."""
    seg_len = frames.shape[1]
    nfft = 1 << int(np.ceil(np.log2(seg_len + width)))
    head = np.fft.rfft(frames[:, :width], nfft)
    full = np.fft.rfft(frames, nfft)
    cross = np.fft.irfft(np.conj(head) * full, nfft)[:, : max_lag + 1]
    cs = np.concatenate((np.zeros((frames.shape[0], 1)), np.cumsum(frames**2, axis=1)), axis=1)
    lags = np.arange(max_lag + 1)
    e0 = cs[:, width][:, None]
    e_lag = cs[:, lags + width] - cs[:, lags]
    diff = np.maximum(e0 + e_lag - 2.0 * cross, 0.0)
    diff[:, 0] = 0.0

    running = np.cumsum(diff[:, 1:], axis=1)
    cmnd = np.ones_like(diff)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = diff[:, 1:] * lags[1:] / running
    cmnd[:, 1:] = np.where(running > 0, ratio, 1.0)
    return cmnd


def extract_f0(
    clip: AudioClip,
    fmin: float = 60.0,
    fmax: float = 500.0,
    frame_ms: float = 25.0,
    hop_ms: float = 10.0,
    threshold: float = 0.1,
    silence_rms: float = 1e-4,
) -> F0Contour:
    """YIN pitch track.

    Each frame integrates the difference function over ``frame_ms`` and
    searches lags for ``fmax..fmin``. A frame is voiced when the normalised
    difference dips below ``threshold`` somewhere in that lag range; the
    first such dip is followed down to its local minimum and refined by
    parabolic interpolation.
    """
    sr = clip.sample_rate
    x = clip.samples
    width = int(round(sr * frame_ms / 1000))
    hop = int(round(sr * hop_ms / 1000))
    min_lag = max(2, int(np.floor(sr / fmax)))
    max_lag = int(np.ceil(sr / fmin))

    n_frames = 1 + max(x.size - width, 0) // hop
    seg_len = width + max_lag + 1
    padded = np.zeros((n_frames - 1) * hop + seg_len)
    padded[: x.size] = x[: padded.size]
    idx = np.arange(seg_len)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = padded[idx]

    cmnd = _yin_cmnd(frames, width, max_lag)
    rms = np.sqrt(np.mean(frames[:, :width] ** 2, axis=1))

    f0 = np.full(n_frames, np.nan)
    below = cmnd[:, min_lag:max_lag] < threshold
    for i in np.flatnonzero(below.any(axis=1) & (rms > silence_rms)):
        d = cmnd[i]
        tau = min_lag + int(np.argmax(below[i]))
        while tau + 1 < max_lag and d[tau + 1] < d[tau]:
            tau += 1
        denom = d[tau - 1] - 2.0 * d[tau] + d[tau + 1]
        shift = 0.5 * (d[tau - 1] - d[tau + 1]) / denom if denom > 0 else 0.0
        f0[i] = sr / (tau + float(np.clip(shift, -1.0, 1.0)))

    voiced = np.isfinite(f0) & (f0 >= fmin) & (f0 <= fmax)
    times = (np.arange(n_frames) * hop + width / 2) / sr
    semis = np.full(n_frames, np.nan)
    semis[voiced] = hz_to_semitones(f0[voiced])
    return F0Contour(times, semis, voiced)


@dataclass(frozen=True, eq=False)
class ContourAlignment:
    """Paired semitone values over jointly voiced frames."""

    a: np.ndarray
    b: np.ndarray
    frame_index: np.ndarray

    def __len__(self):
        return self.frame_index.size

    @property
    def is_empty(self) -> bool:
        return self.frame_index.size == 0


def align_contours(a: F0Contour, b: F0Contour) -> ContourAlignment:
    """Pair frames by index over the shorter length, keeping jointly voiced ones."""
    n = min(len(a), len(b))
    both = a.voiced[:n] & b.voiced[:n]
    idx = np.flatnonzero(both)
    return ContourAlignment(a.semitones[idx], b.semitones[idx], idx)


@dataclass(frozen=True)
class ContourDeviation:
    """``l1`` (semitones) and ``pcc``; ``None`` marks an undefined value."""

    l1: float | None
    pcc: float | None
    joint_voiced_count: int


def pearson(a, b) -> float | None:
    """Pearson correlation, ``None`` if fewer than 2 points or a constant side.

    Both series are first shifted by their first element; the result does
    not change mathematically but a pure offset between the inputs then
    cancels exactly.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size < 2:
        return None
    da = a - a[0]
    db = b - b[0]
    ca = da - da.mean()
    cb = db - db.mean()
    saa = float(np.sum(ca * ca))
    sbb = float(np.sum(cb * cb))
    if saa == 0.0 or sbb == 0.0:
        return None
    den = np.sqrt(saa * sbb)
    if not 0.0 < den < np.inf:
        # product under/overflowed; equal sums still give an exact 1 above
        den = np.sqrt(saa) * np.sqrt(sbb)
    r = float(np.sum(ca * cb)) / den
    return float(np.clip(r, -1.0, 1.0))


def contour_deviation(a: F0Contour, b: F0Contour) -> ContourDeviation:
    pairs = align_contours(a, b)
    if pairs.is_empty:
        return ContourDeviation(None, None, 0)
    l1 = float(np.mean(np.abs(pairs.b - pairs.a)))
    return ContourDeviation(l1, pearson(pairs.a, pairs.b), len(pairs))


def write_contour_csv(contour: F0Contour, path) -> None:
    with open(Path(path), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame_time", "semitone", "voiced"])
        for t, s, v in zip(contour.frame_times, contour.semitones, contour.voiced):
            w.writerow([f"{t:.4f}", f"{s:.4f}" if v else "", int(v)])


def read_contour_csv(path) -> F0Contour:
    times, semis, voiced = [], [], []
    with open(Path(path), newline="") as fh:
        for row in csv.DictReader(fh):
            v = row["voiced"].strip() in ("1", "true", "True")
            times.append(float(row["frame_time"]))
            semis.append(float(row["semitone"]) if v else np.nan)
            voiced.append(v)
    return F0Contour(np.array(times), np.array(semis), np.array(voiced, dtype=bool))
