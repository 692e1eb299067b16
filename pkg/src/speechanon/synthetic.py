"""Synthetic voiced signals and toy multi-speaker corpora for demos and tests."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.signal

from .audio import CANONICAL_RATE, AudioClip, write_wav
from .manifest import Gender, UtteranceRecord


def harmonic_tone(
    f0,
    duration: float = 1.0,
    sample_rate: int = CANONICAL_RATE,
    n_harmonics: int = 10,
    amplitude: float = 0.5,
    rolloff: float = 1.0,
) -> np.ndarray:
    """Band-limited harmonic signal; ``f0`` may be a scalar or a per-sample array.

    Harmonic k has amplitude ``k**-rolloff`` and is dropped above Nyquist.
    """
    n = int(round(duration * sample_rate))
    f0 = np.broadcast_to(np.asarray(f0, dtype=np.float64), (n,))
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate
    x = np.zeros(n)
    for k in range(1, n_harmonics + 1):
        below = k * f0 < 0.45 * sample_rate
        x += np.where(below, np.sin(k * phase), 0.0) / k**rolloff
    return amplitude * x / np.max(np.abs(x))


def resonator(freq: float, bandwidth: float, sample_rate: int) -> np.ndarray:
    """Denominator of a unit-gain-at-DC two-pole resonance."""
    r = np.exp(-np.pi * bandwidth / sample_rate)
    theta = 2 * np.pi * freq / sample_rate
    return np.array([1.0, -2 * r * np.cos(theta), r * r])


def vowel(
    formants=(700.0, 1200.0),
    bandwidths=None,
    f0=120.0,
    duration: float = 1.0,
    sample_rate: int = CANONICAL_RATE,
    vibrato: float = 0.0,
    amplitude: float = 0.5,
) -> np.ndarray:
    """Source-filter vowel: flat-spectrum harmonic source through formant resonators.

    ``vibrato`` is a relative F0 excursion at 4 Hz.
    """
    n = int(round(duration * sample_rate))
    t = np.arange(n) / sample_rate
    f0_track = np.asarray(f0, dtype=np.float64) * (1 + vibrato * np.sin(2 * np.pi * 4.0 * t))
    n_harm = int(0.45 * sample_rate / np.min(f0_track))
    src = harmonic_tone(f0_track, duration, sample_rate, n_harm, 1.0, rolloff=0.0)
    bandwidths = bandwidths or [60.0 + 0.05 * f for f in formants]
    y = src
    for f, bw in zip(formants, bandwidths):
        a = resonator(f, bw, sample_rate)
        y = scipy.signal.lfilter([np.sum(a)], a, y)
    return amplitude * y / np.max(np.abs(y))


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: str
    gender: Gender
    f0: float
    formants: tuple[float, ...]


def speaker_profiles(n_speakers: int = 8, seed: int = 0) -> list[SpeakerProfile]:
    """Alternating male/female speakers with distinct F0 and vocal-tract scale."""
    rng = np.random.default_rng(seed)
    base = np.array([600.0, 1150.0, 2500.0, 3400.0])
    out = []
    for s in range(n_speakers):
        gender = Gender.MALE if s % 2 == 0 else Gender.FEMALE
        scale = 0.85 + 0.35 * s / max(1, n_speakers - 1) + rng.uniform(-0.01, 0.01)
        f0 = (105.0 if gender is Gender.MALE else 200.0) * (1 + 0.08 * rng.uniform(-1, 1))
        out.append(SpeakerProfile(f"spk{s:02d}", gender, float(f0), tuple(float(f) for f in base * scale)))
    return out


def utterance(profile: SpeakerProfile, index: int, duration: float = 1.5,
              sample_rate: int = CANONICAL_RATE, seed: int = 0) -> np.ndarray:
    """One utterance: two vowel-like segments separated by short pauses."""
    rng = np.random.default_rng([seed, index, int(profile.speaker_id[3:])])
    seg = duration / 2 - 0.1
    parts = [np.zeros(int(0.05 * sample_rate))]
    for _ in range(2):
        jitter = np.array(profile.formants) * (1 + rng.uniform(-0.04, 0.04, len(profile.formants)))
        f0 = profile.f0 * (1 + rng.uniform(-0.05, 0.05))
        v = vowel(tuple(jitter), f0=f0, duration=seg, sample_rate=sample_rate,
                  vibrato=0.03, amplitude=0.4 + 0.1 * rng.uniform())
        ramp = int(0.01 * sample_rate)
        env = np.ones(v.size)
        env[:ramp] = np.linspace(0, 1, ramp)
        env[-ramp:] = np.linspace(1, 0, ramp)
        parts.extend([v * env, np.zeros(int(0.05 * sample_rate))])
    x = np.concatenate(parts)
    return x + 1e-4 * rng.standard_normal(x.size)


def make_corpus(out_dir, n_speakers: int = 8, utts_per_speaker: int = 3,
                duration: float = 1.5, seed: int = 0) -> list[UtteranceRecord]:
    """Write a toy corpus of WAV files under ``out_dir`` and return its records."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for prof in speaker_profiles(n_speakers, seed):
        for k in range(utts_per_speaker):
            uid = f"{prof.speaker_id}_u{k}"
            path = out_dir / f"{uid}.wav"
            write_wav(AudioClip(utterance(prof, k, duration, seed=seed), CANONICAL_RATE, uid), path)
            records.append(UtteranceRecord(uid, prof.speaker_id, prof.gender, path))
    return records
