import numpy as np
import pytest

from speechanon.manifest import write_manifest
from speechanon.synthetic import make_corpus


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """4 utterances from 2 speakers (one male, one female), with manifest."""
    root = tmp_path_factory.mktemp("corpus")
    records = make_corpus(root / "wav", n_speakers=2, utts_per_speaker=2, duration=1.2, seed=3)
    manifest = root / "manifest.csv"
    write_manifest(records, manifest)
    return records, manifest


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, elapsed, detail in sorted(RESULTS):
        terminalreporter.write_line(f"[{status}] criterion {number}: {title} ({elapsed}) {detail}")
