import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from speechanon.audio import AudioClip
from speechanon.utility import (
    EmotionEmbeddingPair,
    IdMismatchError,
    Prediction,
    PredictionSet,
    TranscriptPair,
    accuracy,
    cer,
    edit_distance,
    emotion_similarity,
    ensemble_average,
    estimate_snr,
    normalize_text,
    read_labels,
    read_predictions,
    read_transcripts,
    write_predictions,
)

from oracles import edit_distance_recursive
from signals import SR


def preds(probs, labels=None, prefix="u"):
    labels = [None] * len(probs) if labels is None else labels
    return PredictionSet(tuple(Prediction(f"{prefix}{k:03d}", p, y) for k, (p, y) in enumerate(zip(probs, labels))))


def disjoint_error_pair():
    """System a is wrong on items 0-2, b on items 3-5; each right with high confidence elsewhere."""
    labels = [1, 0] * 5
    pa, pb = [], []
    for k, y in enumerate(labels):
        right, wrong_mild = (0.9 if y else 0.1), (0.4 if y else 0.6)
        pa.append(wrong_mild if k < 3 else right)
        pb.append(wrong_mild if 3 <= k < 6 else right)
    return preds(pa, labels), preds(pb, labels)


class TestCer:
    @pytest.mark.parametrize("ref,hyp,expected", [
        ("abcd", "abcd", 0.0), ("abcd", "abxd", 0.25), ("abc", "abbc", 1 / 3),
    ])
    def test_examples(self, ref, hyp, expected):
        assert cer(ref, hyp) == expected

    def test_matches_recursive_oracle(self):
        rng = np.random.default_rng(17)
        for _ in range(1000):
            a = "".join(rng.choice(list("abcd"), rng.integers(0, 51)))
            b = "".join(rng.choice(list("abcd"), rng.integers(0, 51)))
            assert edit_distance(a, b) == edit_distance_recursive(a, b)
            if a:
                assert cer(a, b, normalize=False) == edit_distance_recursive(a, b) / len(a)

    @given(st.text("abcd", max_size=30), st.text("abcd", max_size=30))
    def test_symmetric_distance(self, a, b):
        assert edit_distance(a, b) == edit_distance(b, a)

    @given(st.text("abcde", min_size=1, max_size=30))
    def test_self_zero(self, a):
        assert cer(a, a) == 0.0

    def test_normalization(self):
        assert normalize_text("Hello, World!") == "helloworld"
        assert normalize_text("你好，世界。") == "你好世界"
        assert cer("Hello world.", "hello  WORLD") == 0.0

    def test_empty_reference(self):
        with pytest.raises(ValueError, match="empty reference"):
            cer("", "abc")
        with pytest.raises(ValueError):
            cer("?!", "abc")

    def test_can_exceed_one(self):
        assert cer("a", "bcd") == 3.0

    def test_pair(self):
        assert TranscriptPair("x", "abcd", "abxd").cer() == 0.25

    def test_read_transcripts(self, tmp_path):
        (tmp_path / "t.tsv").write_text("u1\t今天 天气\nu2\thello\tworld\n\n", encoding="utf-8")
        assert read_transcripts(tmp_path / "t.tsv") == {"u1": "今天 天气", "u2": "hello\tworld"}
        (tmp_path / "bad.tsv").write_text("u1 no tab\n")
        with pytest.raises(ValueError, match=":1:"):
            read_transcripts(tmp_path / "bad.tsv")


class TestEmotion:
    def test_examples(self):
        v = np.array([0.3, -1.2, 2.0])
        assert emotion_similarity(EmotionEmbeddingPair("u", v, v)) == pytest.approx(1.0)
        assert emotion_similarity(EmotionEmbeddingPair("u", [1.0, 0.0], [0.0, 3.0])) == 0.0
        assert emotion_similarity(EmotionEmbeddingPair("u", v, -v)) == pytest.approx(-1.0)

    def test_zero_vector(self):
        with pytest.raises(ValueError):
            emotion_similarity(EmotionEmbeddingPair("u", [0.0, 0.0], [1.0, 1.0]))

    def test_power_of_two_scaling_exact(self, rng):
        for _ in range(100):
            u, v = rng.standard_normal((2, 16))
            base = emotion_similarity(EmotionEmbeddingPair("u", u, v))
            k = int(rng.integers(-20, 20))
            assert emotion_similarity(EmotionEmbeddingPair("u", u * 2.0 ** k, v)) == base

    @given(st.floats(1e-6, 1e6), st.floats(1e-6, 1e6))
    def test_positive_scaling(self, a, b):
        u, v = np.array([1.0, -2.0, 0.5, 3.0]), np.array([0.2, 0.1, -1.0, 2.0])
        base = emotion_similarity(EmotionEmbeddingPair("u", u, v))
        assert emotion_similarity(EmotionEmbeddingPair("u", a * u, b * v)) == pytest.approx(base, abs=1e-15)


def gapped(signal_fn, rng, noise_std=0.0, seconds=2.0):
    """Alternate 0.25 s of signal and 0.25 s of gap, with optional noise throughout."""
    n = int(seconds * SR)
    t = np.arange(n) / SR
    on = (t % 0.5) < 0.25
    x = np.where(on, signal_fn(t), 0.0)
    return x + noise_std * rng.standard_normal(n)


class TestSnr:
    def test_zero_noise_gaps_capped(self, rng):
        x = gapped(lambda t: 0.5 * np.sin(2 * np.pi * 300 * t), rng)
        est = estimate_snr(AudioClip(x, SR))
        assert est.db == 100.0 and not est.silent

    @pytest.mark.parametrize("target", [0.0, 10.0, 20.0])
    def test_known_segmental_snr(self, rng, target):
        amp = 0.5
        noise_std = np.sqrt(amp ** 2 / 2 / 10 ** (target / 10))
        x = gapped(lambda t: amp * np.sin(2 * np.pi * 300 * t), rng, noise_std)
        assert abs(estimate_snr(AudioClip(x, SR)).db - target) <= 3.0

    def test_white_noise_low(self, rng):
        assert estimate_snr(AudioClip(0.1 * rng.standard_normal(2 * SR), SR)).db <= 3.0

    def test_silent_flag(self):
        est = estimate_snr(AudioClip(np.zeros(SR), SR))
        assert est.silent and est.db == -20.0

    def test_too_short(self):
        with pytest.raises(ValueError):
            estimate_snr(AudioClip(np.ones(100), SR))

    def test_scale_invariant(self, rng):
        x = gapped(lambda t: np.sin(2 * np.pi * 200 * t), rng, 0.05)
        a = estimate_snr(AudioClip(0.5 * x, SR)).db
        assert estimate_snr(AudioClip(0.25 * x, SR)).db == pytest.approx(a, abs=1e-9)


class TestEnsemble:
    def test_average(self):
        out = ensemble_average(preds([0.6]), preds([0.4]))
        assert out.predictions[0].probability == 0.5

    def test_idempotent_exact(self, rng):
        a = preds(rng.uniform(0, 1, 50))
        assert ensemble_average(a, a) == a

    def test_commutative_exact(self, rng):
        a, b = preds(rng.uniform(0, 1, 50)), preds(rng.uniform(0, 1, 50))
        assert ensemble_average(a, b) == ensemble_average(b, a)

    def test_order_independent(self, rng):
        a = preds(rng.uniform(0, 1, 20))
        shuffled = PredictionSet(tuple(reversed(a.predictions)))
        assert ensemble_average(a, shuffled) == a

    def test_id_mismatch(self):
        with pytest.raises(IdMismatchError) as ei:
            ensemble_average(preds([0.1, 0.2]), preds([0.1, 0.2], prefix="v"))
        assert ei.value.only_a == ["u000", "u001"]

    def test_disjoint_errors_beat_both(self):
        a, b = disjoint_error_pair()
        ens = ensemble_average(a, b)
        assert accuracy(a) == accuracy(b) == 0.7
        assert accuracy(ens) == 1.0

    def test_conflicting_labels(self):
        with pytest.raises(ValueError, match="conflicting"):
            ensemble_average(preds([0.5], [1]), preds([0.5], [0]))


class TestAccuracy:
    def test_examples(self):
        assert accuracy(preds([0.9, 0.2, 0.7], [1, 0, 1])) == 1.0
        assert accuracy(preds([0.0] * 4, [1] * 4)) == 0.0
        probs = [0.9] * 7 + [0.1] * 3
        assert accuracy(preds(probs, [1] * 10)) == 0.7

    def test_threshold_inclusive(self):
        assert accuracy(preds([0.5], [1])) == 1.0

    def test_missing_labels(self):
        with pytest.raises(ValueError, match="lack a true label"):
            accuracy(preds([0.3, 0.8], [1, None]))

    def test_validation(self):
        with pytest.raises(ValueError):
            preds([1.5])
        with pytest.raises(ValueError, match="duplicate"):
            PredictionSet((Prediction("a", 0.1), Prediction("a", 0.2)))


class TestPredictionFiles:
    def test_roundtrip(self, tmp_path, rng):
        a = preds(rng.uniform(0, 1, 10), [0, 1] * 5)
        write_predictions(a, tmp_path / "p.csv")
        assert read_predictions(tmp_path / "p.csv") == a

    def test_labels_file(self, tmp_path):
        (tmp_path / "l.csv").write_text("id,label\nu000,1\nu001,0\n")
        labels = read_labels(tmp_path / "l.csv")
        assert accuracy(preds([0.8, 0.3]).with_labels(labels)) == 1.0

    def test_bad_row_line_number(self, tmp_path):
        (tmp_path / "p.csv").write_text("id,probability\na,0.1\nb,oops\n")
        with pytest.raises(ValueError, match=":3:"):
            read_predictions(tmp_path / "p.csv")
