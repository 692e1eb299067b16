"""Command-line entry point: ``speechanon {anonymize,evaluate,report,ensemble,trials}``."""

from __future__ import annotations

import csv
import logging
import sys
from pathlib import Path

import click

from .anonymize import AnonymizerConfig, GenderPolicy, Method, anonymize_batch
from .manifest import ManifestError, load_manifest, write_manifest
from .pipeline import EvaluationConfig, load_config_grid, run_pipeline
from .privacy import build_trials, write_trials_csv
from .report import EvaluationReport, emit_report, render_csv, render_markdown
from .synthetic import make_corpus
from .utility import (
    accuracy,
    ensemble_average,
    read_labels,
    read_predictions,
    read_transcripts,
    write_predictions,
)

FORMATS = {"markdown": ".md", "csv": ".csv"}


def _anonymizer_options(fn):
    opts = [
        click.option("--method", type=click.Choice([m.value for m in Method]), default=None,
                     help="Anonymiser to run."),
        click.option("--step", "semitone_step", type=float, default=4.0, show_default=True,
                     help="Pitch shift magnitude in semitones."),
        click.option("--lpc-order", type=click.IntRange(1, 64), default=20, show_default=True),
        click.option("--alpha", "mcadams_alpha", type=float, default=0.8, show_default=True,
                     help="McAdams coefficient in (0, 1]."),
        click.option("--backend-cmd", "backend_command", default=None,
                     help="External command template with {input} and {output}."),
        click.option("--gender-policy", type=click.Choice([g.value for g in GenderPolicy]),
                     default=GenderPolicy.RAISE_MALE_LOWER_FEMALE.value, show_default=True),
        click.option("--timeout", type=float, default=300.0, show_default=True,
                     help="Per-file timeout for external backends (s)."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _config_from_flags(method, **kw) -> AnonymizerConfig:
    try:
        return AnonymizerConfig(method=method, **kw)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from None


def _load(manifest):
    try:
        return load_manifest(manifest)
    except ManifestError as exc:
        raise click.ClickException(str(exc)) from None


@click.group()
@click.option("-v", "--verbose", count=True, help="Increase log verbosity.")
def main(verbose):
    """Speaker anonymisation and privacy/utility evaluation."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@_anonymizer_options
def anonymize(manifest, out_dir, workers, method, **kw):
    """Anonymise every utterance of MANIFEST into OUT_DIR/<id>.wav."""
    if method is None:
        raise click.UsageError("--method is required")
    config = _config_from_flags(method, **kw)
    records = _load(manifest)
    results = anonymize_batch(records, config, out_dir, workers)
    status_path = Path(out_dir) / "status.csv"
    with open(status_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "output", "status", "error"])
        for r in results:
            w.writerow([r.id, r.output_path or "", r.status, r.error or ""])
    n_ok = sum(r.ok for r in results)
    click.echo(f"{n_ok}/{len(results)} utterances anonymised ({config.label}); status in {status_path}")


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
@click.option("--grid", type=click.Path(exists=True, dir_okay=False),
              help="Config grid (JSON or CSV). Without it the anonymiser flags define one config.")
@click.option("--seed", type=int, default=0, show_default=True, help="Trial sampling seed.")
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--format", "fmt", type=click.Choice(list(FORMATS)), default="markdown", show_default=True)
@click.option("--ref-transcripts", type=click.Path(exists=True, dir_okay=False),
              help="TSV id<TAB>text of ASR on original audio (overrides manifest transcripts).")
@click.option("--ref-emotion", type=click.Path(exists=True, dir_okay=False),
              help="Emotion embedding table for the original audio.")
@click.option("--with-original", is_flag=True, help="Add an 'Original' row.")
@click.option("--original-mos", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-impostors", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--dump-contours", is_flag=True, help="Write F0 contour CSVs per utterance.")
@_anonymizer_options
def evaluate(manifest, out_dir, grid, seed, workers, fmt, ref_transcripts, ref_emotion,
             with_original, original_mos, max_impostors, dump_contours, method, **kw):
    """Run anonymisers over MANIFEST and write a metric report to OUT_DIR."""
    if grid:
        try:
            configs = load_config_grid(grid)
        except (ValueError, KeyError) as exc:
            raise click.ClickException(str(exc)) from None
    elif method:
        configs = [EvaluationConfig(_config_from_flags(method, **kw))]
    else:
        raise click.UsageError("give --grid or --method")
    records = _load(manifest)
    report = run_pipeline(
        records, configs, out_dir, seed=seed, workers=workers,
        reference_transcripts=read_transcripts(ref_transcripts) if ref_transcripts else None,
        reference_emotion=ref_emotion, include_original=with_original,
        original_mos=original_mos, max_impostor_per_enroll=max_impostors,
        dump_contours=dump_contours,
    )
    out = Path(out_dir)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    path = emit_report(report, out / f"report{FORMATS[fmt]}", fmt)
    click.echo(path.read_text(encoding="utf-8"), nl=False)
    n_failed = sum(len(r.failures) for r in report.rows)
    if n_failed:
        click.echo(f"warning: {n_failed} per-utterance failure(s); details in {out / 'report.json'}", err=True)


@main.command()
@click.argument("report_json", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(list(FORMATS)), default="markdown", show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Defaults to stdout.")
def report(report_json, fmt, output):
    """Re-render a saved report.json as markdown or CSV."""
    rep = EvaluationReport.from_json(Path(report_json).read_text(encoding="utf-8"))
    if output:
        emit_report(rep, output, fmt)
    else:
        click.echo((render_csv if fmt == "csv" else render_markdown)(rep), nl=False)


@main.command()
@click.argument("pred_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("pred_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--labels", type=click.Path(exists=True, dir_okay=False),
              help="CSV id,label; otherwise labels come from the prediction files.")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("-o", "--output", type=click.Path(dir_okay=False), help="Write averaged predictions here.")
def ensemble(pred_a, pred_b, labels, threshold, output):
    """Average two systems' probabilities and report accuracies."""
    try:
        a, b = read_predictions(pred_a), read_predictions(pred_b)
        if labels:
            lab = read_labels(labels)
            a, b = a.with_labels(lab), b.with_labels(lab)
        both = ensemble_average(a, b)
        rows = [(pred_a, accuracy(a, threshold)), (pred_b, accuracy(b, threshold)),
                ("ensemble", accuracy(both, threshold))]
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    for name, acc in rows:
        click.echo(f"{name}\t{acc:.3f}")
    if output:
        write_predictions(both, output)


@main.command()
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--max-impostors", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("-o", "--output", required=True, type=click.Path(dir_okay=False))
def trials(manifest, seed, max_impostors, output):
    """Write the linking-attack trial list for MANIFEST."""
    try:
        ts = build_trials(_load(manifest), max_impostors, seed)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    write_trials_csv(ts, output)
    click.echo(f"{ts.n_genuine} genuine, {ts.n_impostor} impostor trials -> {output}")


@main.command("synth-corpus")
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--speakers", type=click.IntRange(min=2), default=8, show_default=True)
@click.option("--utterances", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def synth_corpus(out_dir, speakers, utterances, seed):
    """Write a toy synthetic multi-speaker corpus and its manifest.csv."""
    records = make_corpus(out_dir, speakers, utterances, seed=seed)
    write_manifest(records, Path(out_dir) / "manifest.csv")
    click.echo(f"{len(records)} utterances -> {Path(out_dir) / 'manifest.csv'}")


if __name__ == "__main__":
    sys.exit(main())
