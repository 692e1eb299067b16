"""Semitone pitch shifting: resample, then WSOLA time-stretch back to length."""

from __future__ import annotations

import logging

import numpy as np

from ..audio import AudioClip, resample_ratio, stretch_factor

log = logging.getLogger(__name__)

MAX_SEMITONES = 24.0


def wsola(x, target_length: int, frame_length: int = 640, tolerance: int = 240) -> np.ndarray:
    """Time-stretch ``x`` to ``target_length`` samples, preserving local pitch.

    Waveform-similarity overlap-add: output frames are laid at a fixed hop of
    ``frame_length // 2`` with a Hann window; each analysis frame is taken
    near its nominal input position, shifted by up to ``tolerance`` samples
    so that it best continues the previously copied frame.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if target_length <= 0:
        return np.zeros(0)
    if n == 0:
        return np.zeros(target_length)
    hop = frame_length // 2
    frame_length = 2 * hop
    window = np.hanning(frame_length + 1)[:-1]
    scale = n / target_length  # input samples per output sample

    n_frames = int(np.ceil(target_length / hop)) + 2
    front = hop + tolerance
    back = int(np.ceil(n_frames * hop * scale)) + frame_length + 2 * tolerance
    xp = np.concatenate((np.zeros(front), x, np.zeros(back)))

    # output frame k covers [k*hop - hop, k*hop + hop), centred on k*hop
    out = np.zeros(n_frames * hop + frame_length)
    wsum = np.zeros_like(out)
    prev_start = None
    for k in range(n_frames):
        nominal = int(round(k * hop * scale)) - hop + front
        if prev_start is None:
            start = nominal
        else:
            natural = xp[prev_start + hop: prev_start + hop + frame_length]
            lo = nominal - tolerance
            region = xp[lo: nominal + tolerance + frame_length]
            corr = np.correlate(region, natural, mode="valid")
            energy = np.convolve(region * region, np.ones(frame_length), mode="valid")
            score = corr / np.sqrt(energy + 1e-12)
            start = lo + int(np.argmax(score))
        out[k * hop: k * hop + frame_length] += window * xp[start: start + frame_length]
        wsum[k * hop: k * hop + frame_length] += window
        prev_start = start

    # drop the leading half-frame so sample 0 lines up with input sample 0
    out = out[hop: hop + target_length]
    wsum = wsum[hop: hop + target_length]
    return out / np.maximum(wsum, 1e-8)


def pitch_shift(clip: AudioClip, signed_semitones: float) -> AudioClip:
    """Shift pitch by ``signed_semitones`` keeping the duration unchanged.

    The signal is resampled by ``2**(-s/12)`` (which moves pitch and formants
    together) and then stretched back to its original length with WSOLA.
    """
    if abs(signed_semitones) > MAX_SEMITONES:
        raise ValueError(f"|semitones| must be <= {MAX_SEMITONES:g}, got {signed_semitones}")
    x = clip.samples
    if not np.any(x):
        log.warning("%s: silent clip returned unchanged", clip.id or "<clip>")
        return clip.with_samples(x.copy())
    if signed_semitones == 0:
        return clip.with_samples(x.copy())

    ratio = 2.0 ** (signed_semitones / 12.0)
    up, down = stretch_factor(1.0 / ratio)
    squeezed = resample_ratio(x, up, down)
    y = wsola(squeezed, x.size)
    peak = np.max(np.abs(y))
    if peak > 1.0:
        y = y * (0.999 / peak)
    return clip.with_samples(y)
