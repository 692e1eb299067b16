"""Anonymisers behind one interface: pitch shift, McAdams, external backends."""

from .batch import BatchResult, anonymize_batch, anonymize_clip, anonymize_record
from .config import AnonymizerConfig, GenderPolicy, Method, apply_gender_policy
from .external import (
    BackendError,
    BackendExitError,
    BackendOutputError,
    BackendTimeoutError,
    run_external_backend,
)
from .mcadams import McAdamsStats, mcadams_anonymize, mcadams_transform, warp_angle, warp_poles
from .pitch import pitch_shift, wsola

__all__ = [
    "AnonymizerConfig", "BackendError", "BackendExitError", "BackendOutputError",
    "BackendTimeoutError", "BatchResult", "GenderPolicy", "McAdamsStats", "Method",
    "anonymize_batch", "anonymize_clip", "anonymize_record", "apply_gender_policy",
    "mcadams_anonymize", "mcadams_transform", "pitch_shift", "run_external_backend",
    "warp_angle", "warp_poles", "wsola",
]
