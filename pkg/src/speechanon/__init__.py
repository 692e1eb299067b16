"""Speaker anonymisation and privacy/utility evaluation toolkit."""

from .anonymize import (
    AnonymizerConfig,
    anonymize_batch,
    anonymize_clip,
    apply_gender_policy,
    mcadams_anonymize,
    pitch_shift,
    run_external_backend,
)
from .audio import AudioClip, FrameSpec, Window, frame_signal, load_clip, read_wav, resample, write_wav
from .f0 import ContourDeviation, F0Contour, align_contours, contour_deviation, extract_f0
from .lpc import LpcModel, levinson_durbin, lpc_analyze, lpc_residual, lpc_synthesize
from .manifest import Gender, UtteranceRecord, load_manifest
from .pipeline import EvaluationConfig, load_config_grid, run_pipeline
from .privacy import ScoreSet, TrialSet, build_trials, compute_eer, mfcc_mean_embedding, score_trials
from .report import EvaluationReport, emit_report
from .utility import PredictionSet, accuracy, cer, emotion_similarity, ensemble_average, estimate_snr

__version__ = "0.1.0"
