"""Adapter for anonymisers (or enhancers) that run as external commands."""

from __future__ import annotations

import shlex
import subprocess
import tempfile
from pathlib import Path

from ..audio import CANONICAL_RATE, AudioClip, WavError, load_clip
from .config import AnonymizerConfig, Method


class BackendError(RuntimeError):
    pass


class BackendExitError(BackendError):
    def __init__(self, command, returncode, stderr):
        self.command = command
        self.returncode = returncode
        self.stderr = stderr
        tail = stderr.strip().splitlines()[-5:] if stderr else []
        super().__init__(f"backend exited with status {returncode}: {' | '.join(tail) or '(no stderr)'}")


class BackendTimeoutError(BackendError):
    pass


class BackendOutputError(BackendError):
    pass


def build_command(template: str, input_path, output_path) -> list[str]:
    """Split the template shell-style and substitute the placeholders per token."""
    return [
        tok.replace("{input}", str(input_path)).replace("{output}", str(output_path))
        for tok in shlex.split(template)
    ]


def run_external_backend(clip_path, config: AnonymizerConfig, rate: int = CANONICAL_RATE) -> AudioClip:
    """Run ``config.backend_command`` on ``clip_path`` and load what it writes."""
    if config.method is not Method.EXTERNAL:
        raise ValueError("config is not an external-backend config")
    clip_path = Path(clip_path)
    with tempfile.TemporaryDirectory(prefix="speechanon-") as tmp:
        out_path = Path(tmp) / f"{clip_path.stem}.wav"
        argv = build_command(config.backend_command, clip_path, out_path)
        try:
            proc = subprocess.run(argv, capture_output=True, text=True, timeout=config.timeout)
        except subprocess.TimeoutExpired:
            raise BackendTimeoutError(f"backend timed out after {config.timeout:g} s on {clip_path}") from None
        except OSError as exc:
            raise BackendExitError(argv, None, str(exc)) from None
        if proc.returncode != 0:
            raise BackendExitError(argv, proc.returncode, proc.stderr)
        if not out_path.is_file():
            raise BackendOutputError(f"backend produced no output file for {clip_path}")
        try:
            clip = load_clip(out_path, rate)
        except WavError as exc:
            raise BackendOutputError(f"backend output unreadable: {exc.reason}") from None
    return AudioClip(clip.samples, clip.sample_rate, clip_path.stem)
