"""McAdams-coefficient formant warping via LPC pole angles."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import scipy.signal

from ..audio import AudioClip
from ..lpc import MAX_ORDER, LpcModel, lpc_analyze, lpc_residual

log = logging.getLogger(__name__)

PRE_EMPHASIS = 0.97
ANGLE_MARGIN = 1e-3
CLAMP_RADIUS = 0.998


@dataclass
class McAdamsStats:
    frames: int = 0
    silent_frames: int = 0
    warped_poles: int = 0
    clamped_frames: int = 0


def warp_angle(theta, alpha: float):
    return np.power(theta, alpha)


def warp_poles(poles, alpha: float) -> np.ndarray:
    """Move every complex pole pair from angle theta to theta**alpha.

    Magnitudes are kept. Only upper-half-plane poles with angle inside
    ``(ANGLE_MARGIN, pi - ANGLE_MARGIN)`` are remapped; their partners are
    rebuilt as exact conjugates. Real and near-real poles are left alone.
    """
    poles = np.asarray(poles, dtype=np.complex128)
    upper = poles[poles.imag > 0]
    lower = poles[poles.imag < 0]
    real = poles[poles.imag == 0]
    if upper.size != lower.size:
        # unpaired complex roots; should not happen for a real polynomial
        return poles.copy()
    theta = np.angle(upper)
    inside = (theta > ANGLE_MARGIN) & (theta < np.pi - ANGLE_MARGIN)
    new_upper = upper.copy()
    new_upper[inside] = np.abs(upper[inside]) * np.exp(1j * warp_angle(theta[inside], alpha))
    return np.concatenate((real, new_upper, np.conj(new_upper)))


def mcadams_transform(
    x,
    sample_rate: int,
    order: int = 20,
    alpha: float = 0.8,
    frame_ms: float = 25.0,
    hop_ms: float = 10.0,
) -> tuple[np.ndarray, McAdamsStats]:
    """Warp formants of ``x``; returns the new signal (same length) and counters.

    Per Hann-windowed frame of the pre-emphasised signal: LPC analysis, pole
    warping, inverse filtering with the original model and resynthesis
    through the warped one. Frames are overlap-added and divided by the
    accumulated analysis-window sum, then de-emphasised.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"LPC order must be in [1, {MAX_ORDER}], got {order}")
    if not 0 < alpha <= 1:
        raise ValueError(f"McAdams alpha must lie in (0, 1], got {alpha}")
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    frame_len = int(round(sample_rate * frame_ms / 1000))
    hop = int(round(sample_rate * hop_ms / 1000))
    if frame_len <= order:
        raise ValueError("frame too short for the requested LPC order")

    y = scipy.signal.lfilter([1.0, -PRE_EMPHASIS], [1.0], x)
    pad = frame_len
    n_frames = int(np.ceil((n + pad) / hop)) + 1
    total = n_frames * hop + frame_len
    yp = np.zeros(total)
    yp[pad: pad + n] = y
    window = np.hanning(frame_len + 2)[1:-1]

    out = np.zeros(total)
    wsum = np.zeros(total)
    stats = McAdamsStats()
    for m in range(n_frames):
        s = m * hop
        frame = yp[s: s + frame_len] * window
        wsum[s: s + frame_len] += window
        stats.frames += 1
        model = lpc_analyze(frame, order)
        if model is None:
            stats.silent_frames += 1
            continue
        new_poles = warp_poles(model.poles, alpha)
        theta = np.angle(model.poles)
        stats.warped_poles += 2 * int(np.count_nonzero(
            (model.poles.imag > 0) & (theta > ANGLE_MARGIN) & (theta < np.pi - ANGLE_MARGIN)
        ))
        radius = np.abs(new_poles)
        if np.any(radius >= 1.0):
            new_poles = np.where(radius > CLAMP_RADIUS, new_poles / radius * CLAMP_RADIUS, new_poles)
            stats.clamped_frames += 1
        warped = LpcModel.from_poles(new_poles)
        residual = lpc_residual(frame, model)
        out[s: s + frame_len] += scipy.signal.lfilter([1.0], warped.inverse_filter, residual)

    z = out[pad: pad + n] / np.maximum(wsum[pad: pad + n], 1e-8)
    return scipy.signal.lfilter([1.0], [1.0, -PRE_EMPHASIS], z), stats


def mcadams_anonymize(clip: AudioClip, order: int = 20, alpha: float = 0.8) -> AudioClip:
    y, stats = mcadams_transform(clip.samples, clip.sample_rate, order, alpha)
    if stats.clamped_frames:
        log.warning(
            "%s: clamped unstable poles on %d of %d frames",
            clip.id or "<clip>", stats.clamped_frames, stats.frames,
        )
    peak = np.max(np.abs(y))
    if peak > 1.0:
        y = y * (0.999 / peak)
    return clip.with_samples(y)
