"""Audio clip type, WAV I/O, resampling and framing."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.io.wavfile
import scipy.signal

log = logging.getLogger(__name__)

CANONICAL_RATE = 16000
FRAME_MS = 25.0
HOP_MS = 10.0


class WavError(Exception):
    """A WAV file could not be read or written."""

    def __init__(self, path, reason):
        self.path = str(path)
        self.reason = reason
        super().__init__(f"{self.path}: {reason}")


@dataclass(frozen=True, eq=False)
class AudioClip:
    """Mono signal in [-1, 1] at a fixed sample rate."""

    samples: np.ndarray
    sample_rate: int
    id: str = ""

    def __post_init__(self):
        x = np.asarray(self.samples, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError(f"expected mono samples, got shape {x.shape}")
        if x.size == 0:
            raise ValueError("audio clip is empty")
        if not np.all(np.isfinite(x)):
            raise ValueError("audio clip contains non-finite samples")
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise ValueError(f"invalid sample rate {self.sample_rate!r}")
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    def with_samples(self, samples) -> AudioClip:
        return AudioClip(samples, self.sample_rate, self.id)


class Window(str, Enum):
    RECTANGULAR = "rectangular"
    HANN = "hann"
    HAMMING = "hamming"

    def values(self, n: int) -> np.ndarray:
        if self is Window.RECTANGULAR:
            return np.ones(n)
        return scipy.signal.get_window(self.value, n, fftbins=True)


@dataclass(frozen=True)
class FrameSpec:
    frame_length: int
    hop_length: int
    window: Window = field(default=Window.RECTANGULAR)

    def __post_init__(self):
        object.__setattr__(self, "window", Window(self.window))
        if not 0 < self.hop_length <= self.frame_length:
            raise ValueError(
                f"need 0 < hop_length <= frame_length, got {self.hop_length}, {self.frame_length}"
            )

    @classmethod
    def from_ms(cls, sample_rate: int, frame_ms=FRAME_MS, hop_ms=HOP_MS, window=Window.RECTANGULAR):
        return cls(
            int(round(sample_rate * frame_ms / 1000)),
            int(round(sample_rate * hop_ms / 1000)),
            window,
        )


def read_wav(path) -> AudioClip:
    """Read a PCM or float WAV file into a mono clip.

    Integer samples are scaled by 2**(bits-1) so that the most negative code
    maps to -1.0 exactly; 8-bit files are unsigned with offset 128.
    Multichannel files are averaged down to mono. The sample rate is kept.
    """
    path = Path(path)
    if not path.is_file():
        raise WavError(path, "file not found")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", scipy.io.wavfile.WavFileWarning)
            rate, data = scipy.io.wavfile.read(path)
    except ValueError as exc:
        raise WavError(path, f"malformed or unsupported WAV ({exc})") from exc
    except (EOFError, OSError) as exc:
        raise WavError(path, f"truncated or unreadable WAV ({exc})") from exc

    if data.dtype == np.uint8:
        x = (data.astype(np.float64) - 128.0) / 128.0
    elif np.issubdtype(data.dtype, np.signedinteger):
        # scipy returns odd bit depths (e.g. 24) left-justified in the container
        x = data.astype(np.float64) / float(2 ** (8 * data.dtype.itemsize - 1))
    elif np.issubdtype(data.dtype, np.floating):
        x = data.astype(np.float64)
    else:
        raise WavError(path, f"unsupported sample type {data.dtype}")
    if x.ndim == 2:
        x = x.mean(axis=1)
    if x.size == 0:
        raise WavError(path, "no audio frames")
    if not np.all(np.isfinite(x)):
        raise WavError(path, "non-finite samples")
    return AudioClip(np.clip(x, -1.0, 1.0), int(rate), path.stem)


def write_wav(clip: AudioClip, path) -> int:
    """Write ``clip`` as 16-bit PCM mono and return the number of clipped samples."""
    path = Path(path)
    x = clip.samples
    n_clipped = int(np.count_nonzero(np.abs(x) > 1.0))
    if n_clipped:
        log.warning("%s: clipped %d samples outside [-1, 1]", path, n_clipped)
    pcm = np.clip(np.round(x * 32768.0), -32768, 32767).astype(np.int16)
    try:
        scipy.io.wavfile.write(path, clip.sample_rate, pcm)
    except OSError as exc:
        raise WavError(path, f"cannot write ({exc.strerror or exc})") from exc
    return n_clipped


def resample_ratio(x: np.ndarray, up: int, down: int) -> np.ndarray:
    """Polyphase windowed-sinc resampling of ``x`` by ``up/down``."""
    x = np.asarray(x, dtype=np.float64)
    g = np.gcd(up, down)
    up, down = up // g, down // g
    if up == down:
        return x.copy()
    return scipy.signal.resample_poly(x, up, down, window=("kaiser", 5.0))


def stretch_factor(ratio: float, max_denominator: int = 1000) -> tuple[int, int]:
    """Rational approximation ``(up, down)`` of an arbitrary positive ratio."""
    if ratio <= 0:
        raise ValueError("ratio must be positive")
    frac = Fraction(ratio).limit_denominator(max_denominator)
    return frac.numerator, frac.denominator


def resample(clip: AudioClip, target_rate: int) -> AudioClip:
    if target_rate <= 0:
        raise ValueError(f"target rate must be positive, got {target_rate}")
    if target_rate == clip.sample_rate:
        return AudioClip(clip.samples.copy(), clip.sample_rate, clip.id)
    y = resample_ratio(clip.samples, int(target_rate), clip.sample_rate)
    return AudioClip(y, int(target_rate), clip.id)


def load_clip(path, rate: int = CANONICAL_RATE) -> AudioClip:
    """``read_wav`` followed by resampling to the canonical processing rate."""
    clip = read_wav(path)
    if clip.sample_rate != rate:
        clip = resample(clip, rate)
        clip = clip.with_samples(np.clip(clip.samples, -1.0, 1.0))
    return clip


def frame_signal(clip, spec: FrameSpec) -> np.ndarray:
    """Slice into overlapping frames of shape ``(n_frames, frame_length)``.

    Accepts an :class:`AudioClip` or a bare sample array.
    """
    x = clip.samples if isinstance(clip, AudioClip) else np.asarray(clip, dtype=np.float64)
    n = x.size
    if n < spec.frame_length:
        raise ValueError(f"signal of {n} samples is shorter than one frame ({spec.frame_length})")
    n_frames = (n - spec.frame_length) // spec.hop_length + 1
    idx = np.arange(spec.frame_length)[None, :] + spec.hop_length * np.arange(n_frames)[:, None]
    return x[idx] * spec.window.values(spec.frame_length)[None, :]
