from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from ..audio import AudioClip, load_clip, write_wav
from ..manifest import Gender, UtteranceRecord
from .config import AnonymizerConfig, Method, apply_gender_policy
from .external import run_external_backend
from .mcadams import mcadams_anonymize
from .pitch import pitch_shift

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BatchResult:
    id: str
    output_path: Path | None
    status: str
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def anonymize_clip(clip: AudioClip, config: AnonymizerConfig, gender: Gender = Gender.UNSPECIFIED) -> AudioClip:
    """Apply an in-process anonymiser to a clip (external backends need a file)."""
    if config.method is Method.PITCH:
        shift = apply_gender_policy(gender, config.semitone_step, config.gender_policy)
        return pitch_shift(clip, shift)
    if config.method is Method.MCADAMS:
        return mcadams_anonymize(clip, config.lpc_order, config.mcadams_alpha)
    raise ValueError("external backends operate on files; use anonymize_record")


def anonymize_record(record: UtteranceRecord, config: AnonymizerConfig) -> AudioClip:
    if config.method is Method.EXTERNAL:
        return run_external_backend(record.wav_path, config)
    clip = load_clip(record.wav_path)
    return anonymize_clip(AudioClip(clip.samples, clip.sample_rate, record.id), config, record.gender)


def _process(record: UtteranceRecord, config: AnonymizerConfig, out_dir: Path) -> BatchResult:
    target = out_dir / f"{record.id}.wav"
    try:
        clip = anonymize_record(record, config)
        write_wav(clip, target)
    except Exception as exc:  # one bad utterance must not stop the batch
        log.error("%s: %s", record.id, exc)
        return BatchResult(record.id, None, "error", f"{type(exc).__name__}: {exc}")
    return BatchResult(record.id, target, "ok")


def anonymize_batch(records, config: AnonymizerConfig, out_dir, workers: int = 1) -> list[BatchResult]:
    """Anonymise every record into ``out_dir/<id>.wav``; results follow input order."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = list(records)
    if workers <= 1:
        return [_process(r, config, out_dir) for r in records]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda r: _process(r, config, out_dir), records))
