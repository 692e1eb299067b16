"""Autocorrelation-method linear prediction.

Sign convention: the predictor is ``x[n] ~ sum_k a_k x[n-k]`` so the inverse
(analysis) filter is ``A(z) = 1 - sum_k a_k z^-k`` and the synthesis filter is
``1 / A(z)``. Poles are the roots of ``z^p - a_1 z^(p-1) - ... - a_p``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

MAX_ORDER = 64
# magnitude above which a pole counts as on/outside the unit circle
STABILITY_LIMIT = 1.0 - 1e-12


class UnstableFilterError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LpcModel:
    order: int
    coefficients: np.ndarray
    gain: float
    poles: np.ndarray

    def __post_init__(self):
        if len(self.coefficients) != self.order:
            raise ValueError("coefficient count must equal the model order")
        if self.gain < 0:
            raise ValueError("prediction error energy must be non-negative")

    @property
    def inverse_filter(self) -> np.ndarray:
        """Polynomial ``[1, -a_1, ..., -a_p]`` of A(z)."""
        return np.concatenate(([1.0], -np.asarray(self.coefficients, dtype=np.float64)))

    @property
    def is_stable(self) -> bool:
        return self.order == 0 or bool(np.max(np.abs(self.poles)) < STABILITY_LIMIT)

    @classmethod
    def from_coefficients(cls, coefficients, gain: float = 0.0) -> LpcModel:
        a = np.asarray(coefficients, dtype=np.float64)
        return cls(a.size, a, float(gain), polynomial_roots(a))

    @classmethod
    def from_poles(cls, poles, gain: float = 0.0) -> LpcModel:
        poles = np.asarray(poles, dtype=np.complex128)
        # np.poly gives [1, c_1, ..., c_p] with c_k = -a_k
        c = np.real(np.poly(poles)) if poles.size else np.array([1.0])
        return cls(poles.size, -c[1:], float(gain), poles)


def autocorrelation(frame, max_lag: int) -> np.ndarray:
    """Biased autocorrelation ``r[0..max_lag]`` (zero beyond the frame)."""
    x = np.asarray(frame, dtype=np.float64)
    n = x.size
    nfft = 1 << int(np.ceil(np.log2(2 * n - 1))) if n > 1 else 1
    spec = np.fft.rfft(x, nfft)
    r = np.zeros(max_lag + 1)
    m = min(n, max_lag + 1)
    r[:m] = np.fft.irfft(spec * np.conj(spec), nfft)[:m]
    return r


def levinson_durbin(r, order: int) -> tuple[np.ndarray, float, np.ndarray]:
    """Solve the Toeplitz normal equations ``R a = r[1:order+1]``.

    Returns ``(a, error_energy, reflection)``. If a reflection coefficient
    reaches magnitude 1 (singular autocorrelation, e.g. a pure tone with a
    high order) the recursion stops and the remaining coefficients stay zero,
    which keeps the model minimum-phase.
    """
    r = np.asarray(r, dtype=np.float64)
    if r.size < order + 1:
        raise ValueError(f"need {order + 1} autocorrelation lags, got {r.size}")
    a = np.zeros(order)
    k = np.zeros(order)
    err = float(r[0])
    for i in range(order):
        acc = r[i + 1] - np.dot(a[:i], r[i:0:-1])
        ki = acc / err
        if not abs(ki) < 1.0:
            break
        prev = a[:i].copy()
        a[:i] = prev - ki * prev[::-1]
        a[i] = ki
        k[i] = ki
        err *= 1.0 - ki * ki
    return a, max(err, 0.0), k


def companion_matrix(coefficients) -> np.ndarray:
    """Companion matrix of ``z^p - a_1 z^(p-1) - ... - a_p``."""
    a = np.asarray(coefficients, dtype=np.float64)
    p = a.size
    m = np.zeros((p, p))
    m[0, :] = a
    m[np.arange(1, p), np.arange(p - 1)] = 1.0
    return m


def polynomial_roots(coefficients) -> np.ndarray:
    a = np.asarray(coefficients, dtype=np.float64)
    if a.size == 0:
        return np.zeros(0, dtype=np.complex128)
    return np.linalg.eigvals(companion_matrix(a)).astype(np.complex128)


def lpc_analyze(frame, order: int) -> LpcModel | None:
    """Fit an order-``order`` all-pole model to an already windowed frame.

    Returns ``None`` for an all-zero frame; callers pass such frames through
    unchanged.
    """
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"LPC order must be in [1, {MAX_ORDER}], got {order}")
    x = np.asarray(frame, dtype=np.float64)
    if x.size <= order:
        raise ValueError(f"frame of {x.size} samples too short for order {order}")
    r = autocorrelation(x, order)
    if r[0] <= 0.0:
        return None
    a, err, _ = levinson_durbin(r, order)
    return LpcModel(order, a, err, polynomial_roots(a))


def lpc_residual(x, model: LpcModel) -> np.ndarray:
    """Inverse-filter ``x`` through A(z), zero initial state."""
    return scipy.signal.lfilter(model.inverse_filter, [1.0], np.asarray(x, dtype=np.float64))


def lpc_synthesize(residual, model: LpcModel) -> np.ndarray:
    """All-pole filter ``residual`` through 1/A(z), zero initial state."""
    e = np.asarray(residual, dtype=np.float64)
    if model.order == 0:
        return e.copy()
    if not model.is_stable:
        raise UnstableFilterError(
            f"synthesis filter has a pole of magnitude {np.max(np.abs(model.poles)):.6f}"
        )
    return scipy.signal.lfilter([1.0], model.inverse_filter, e)
