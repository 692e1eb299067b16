"""Anonymise -> extract -> score -> report orchestration."""

from __future__ import annotations

import csv
import itertools
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .anonymize import AnonymizerConfig, anonymize_batch
from .audio import AudioClip, load_clip
from .f0 import F0Contour, contour_deviation, extract_f0, write_contour_csv
from .manifest import UtteranceRecord
from .privacy import (
    build_trials,
    compute_eer,
    cosine_similarity,
    mfcc_mean_embedding,
    read_embedding_table,
    read_scores_csv,
    score_trials,
)
from .report import EvaluationReport, ReportRow
from .utility import cer, estimate_snr, read_transcripts

log = logging.getLogger(__name__)

ORIGINAL = "Original"
GRID_FIELDS = ("semitone_step", "lpc_order", "mcadams_alpha")


@dataclass(frozen=True)
class EvaluationConfig:
    """One report row: an anonymiser plus optional externally produced side files.

    ``hypothesis_transcripts``: TSV of ASR output on the anonymised audio.
    ``emotion_embeddings``: table of emotion vectors of the anonymised audio.
    ``mos_scores``: CSV ``id,score`` from an external MOS predictor.
    ``asv_scores``: CSV ``enroll_id,test_id,label,score``; replaces built-in scoring.
    """

    anonymizer: AnonymizerConfig
    hypothesis_transcripts: Path | None = None
    emotion_embeddings: Path | None = None
    mos_scores: Path | None = None
    asv_scores: Path | None = None

    @property
    def name(self) -> str:
        return self.anonymizer.label

    @classmethod
    def from_dict(cls, d: dict, base: Path = Path(".")) -> EvaluationConfig:
        side = {f.name for f in fields(cls)} - {"anonymizer"}
        kwargs = {}
        for key in side:
            if d.get(key):
                p = Path(d[key])
                kwargs[key] = p if p.is_absolute() else base / p
        anon = {k: v for k, v in d.items() if k not in side}
        return cls(AnonymizerConfig.from_dict(anon), **kwargs)


def _expand(entry: dict) -> list[dict]:
    """Cartesian product over list-valued grid fields."""
    keys = [k for k in GRID_FIELDS if isinstance(entry.get(k), list)]
    if not keys:
        return [entry]
    out = []
    for combo in itertools.product(*(entry[k] for k in keys)):
        e = dict(entry)
        e.update(zip(keys, combo))
        out.append(e)
    return out


def _coerce(row: dict) -> dict:
    out = {}
    for k, v in row.items():
        if v is None or str(v).strip() == "":
            continue
        v = str(v).strip()
        if k == "lpc_order":
            out[k] = int(v)
        elif k in ("semitone_step", "mcadams_alpha", "timeout"):
            out[k] = float(v)
        else:
            out[k] = v
    return out


def load_config_grid(path) -> list[EvaluationConfig]:
    """Read a JSON (list, or ``{"configs": [...]}``) or CSV config grid.

    In JSON, ``semitone_step``, ``lpc_order`` and ``mcadams_alpha`` may be
    lists, which expand to one config per combination.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        with open(path, newline="", encoding="utf-8") as fh:
            entries = [_coerce(r) for r in csv.DictReader(fh)]
    else:
        data = json.loads(path.read_text(encoding="utf-8"))
        entries = data["configs"] if isinstance(data, dict) else data
    configs = []
    for k, entry in enumerate(entries):
        for e in _expand(entry):
            try:
                configs.append(EvaluationConfig.from_dict(e, path.parent))
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}: config #{k + 1}: {exc}") from None
    names = [c.name for c in configs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValueError(f"{path}: duplicate config names {dupes}; set 'name' explicitly")
    return configs


@dataclass
class _Utterance:
    """Per-utterance artefacts for one side (original or anonymised)."""

    id: str
    clip: AudioClip | None = None
    contour: F0Contour | None = None
    embedding: np.ndarray | None = None
    snr: float | None = None
    error: str | None = None


def _analyse(record_id: str, loader) -> _Utterance:
    u = _Utterance(record_id)
    try:
        u.clip = loader()
    except Exception as exc:
        u.error = f"{type(exc).__name__}: {exc}"
        return u
    u.contour = extract_f0(u.clip)
    try:
        u.snr = estimate_snr(u.clip).db
    except ValueError as exc:
        log.info("%s: no SNR (%s)", record_id, exc)
    try:
        u.embedding = mfcc_mean_embedding(u.clip).vector
    except ValueError as exc:
        log.info("%s: no speaker embedding (%s)", record_id, exc)
    return u


def _pmap(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _mean(values) -> tuple[float | None, int]:
    vals = [v for v in values if v is not None]
    if not vals:
        return None, 0
    return float(np.mean(vals)), len(vals)


def _read_id_scores(path) -> dict[str, float]:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        col = "score" if "score" in (reader.fieldnames or []) else (reader.fieldnames or ["", ""])[1]
        return {row["id"].strip(): float(row[col]) for row in reader}


def _corpus_eer(records, enroll: dict, test: dict, seed: int, max_impostors: int):
    """EER over trials among records that have embeddings on both sides."""
    usable = [r for r in records if r.id in enroll and r.id in test]
    if len({r.speaker_id for r in usable}) < 2:
        return None, 0
    trials = build_trials(usable, max_impostors, seed)
    scores = score_trials(trials, enroll, test)
    return compute_eer(scores).eer, len(trials)


def run_pipeline(
    records: list[UtteranceRecord],
    configs: list[EvaluationConfig],
    out_dir,
    seed: int = 0,
    workers: int = 1,
    reference_transcripts: dict[str, str] | None = None,
    reference_emotion=None,
    include_original: bool = False,
    original_mos=None,
    max_impostor_per_enroll: int = 10,
    dump_contours: bool = False,
) -> EvaluationReport:
    """Evaluate each config over the corpus and return one report row per config.

    Per-utterance metrics (SNR, MOS, L1/PCC of F0, CER, Emo) are averaged over
    the utterances where they are defined; EER is computed once per config
    from original-enrollment vs anonymised-test trials. Utterances whose
    original audio or anonymisation fails are left out and listed in the row.
    """
    if not configs:
        raise ValueError("at least one config is required")
    records = list(records)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    refs = {r.id: r.transcript for r in records if r.transcript}
    refs.update(reference_transcripts or {})
    if reference_emotion is not None and not isinstance(reference_emotion, dict):
        reference_emotion = read_embedding_table(reference_emotion)

    originals = _pmap(lambda r: _analyse(r.id, lambda: load_clip(r.wav_path)), records, workers)
    orig = {u.id: u for u in originals}
    source_failures = [(u.id, u.error) for u in originals if u.error]
    good = [r for r in records if orig[r.id].error is None]

    report = EvaluationReport()
    if include_original:
        row = ReportRow(ORIGINAL, n_utterances=len(records), failures=list(source_failures))
        row.metrics["SNR"], row.counts["SNR"] = _mean(orig[r.id].snr for r in good)
        if original_mos:
            mos = _read_id_scores(original_mos)
            row.metrics["MOS"], row.counts["MOS"] = _mean(mos.get(r.id) for r in good)
        emb = {r.id: orig[r.id].embedding for r in good if orig[r.id].embedding is not None}
        row.metrics["EER"], row.counts["EER"] = _corpus_eer(good, emb, emb, seed, max_impostor_per_enroll)
        report.rows.append(row)

    for cfg in configs:
        method_dir = out_dir / cfg.name
        batch = anonymize_batch(good, cfg.anonymizer, method_dir, workers)
        failures = list(source_failures) + [(b.id, b.error) for b in batch if not b.ok]
        done = {b.id: b.output_path for b in batch if b.ok}
        anon_list = _pmap(
            lambda r: _analyse(r.id, lambda: load_clip(done[r.id])),
            [r for r in good if r.id in done], workers,
        )
        anon = {}
        for u in anon_list:
            if u.error:
                failures.append((u.id, u.error))
            else:
                anon[u.id] = u
        ok = [r for r in good if r.id in anon]

        row = ReportRow(cfg.name, n_utterances=len(records), failures=failures)
        row.metrics["SNR"], row.counts["SNR"] = _mean(anon[r.id].snr for r in ok)

        devs = [contour_deviation(orig[r.id].contour, anon[r.id].contour) for r in ok]
        row.metrics["L1_F0"], row.counts["L1_F0"] = _mean(d.l1 for d in devs)
        row.metrics["PCC_F0"], row.counts["PCC_F0"] = _mean(d.pcc for d in devs)
        if dump_contours:
            cdir = method_dir / "contours"
            cdir.mkdir(exist_ok=True)
            for r in ok:
                write_contour_csv(orig[r.id].contour, cdir / f"{r.id}.orig.csv")
                write_contour_csv(anon[r.id].contour, cdir / f"{r.id}.anon.csv")

        if cfg.hypothesis_transcripts:
            hyps = read_transcripts(cfg.hypothesis_transcripts)
            vals = []
            for r in ok:
                if r.id in refs and r.id in hyps:
                    try:
                        vals.append(cer(refs[r.id], hyps[r.id]))
                    except ValueError as exc:
                        log.warning("%s: %s", r.id, exc)
            row.metrics["CER"], row.counts["CER"] = _mean(vals)

        if cfg.emotion_embeddings and reference_emotion:
            emo = read_embedding_table(cfg.emotion_embeddings)
            row.metrics["Emo"], row.counts["Emo"] = _mean(
                cosine_similarity(reference_emotion[r.id], emo[r.id])
                for r in ok if r.id in reference_emotion and r.id in emo
            )

        if cfg.mos_scores:
            mos = _read_id_scores(cfg.mos_scores)
            row.metrics["MOS"], row.counts["MOS"] = _mean(mos.get(r.id) for r in ok)

        if cfg.asv_scores:
            rows, scores = read_scores_csv(cfg.asv_scores)
            if scores.genuine_scores.size and scores.impostor_scores.size:
                row.metrics["EER"], row.counts["EER"] = compute_eer(scores).eer, len(rows)
        else:
            enroll = {r.id: orig[r.id].embedding for r in ok if orig[r.id].embedding is not None}
            test = {r.id: anon[r.id].embedding for r in ok if anon[r.id].embedding is not None}
            row.metrics["EER"], row.counts["EER"] = _corpus_eer(ok, enroll, test, seed, max_impostor_per_enroll)

        report.rows.append(row)
    return report
