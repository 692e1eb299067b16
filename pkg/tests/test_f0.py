import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from speechanon.audio import AudioClip
from speechanon.f0 import (
    F0Contour,
    align_contours,
    contour_deviation,
    extract_f0,
    hz_to_semitones,
    pearson,
    read_contour_csv,
    semitones_to_hz,
    write_contour_csv,
)
from speechanon.synthetic import harmonic_tone

from signals import SR, sine

# multiples of 2^-10 semitone keep a + c exactly representable
GRID = 2.0 ** -10


def grid_contour(rng, n=None):
    n = int(rng.integers(3, 300)) if n is None else n
    while True:
        vals = rng.integers(-30 * 1024, 30 * 1024, n) * GRID
        if np.ptp(vals) > 0:
            return F0Contour.from_values(vals)


class TestSemitones:
    def test_reference(self):
        assert hz_to_semitones(440.0) == 0.0
        assert hz_to_semitones(880.0) == pytest.approx(12.0)
        assert semitones_to_hz(-12.0) == pytest.approx(220.0)

    @given(st.floats(20.0, 2000.0))
    def test_roundtrip(self, f):
        assert semitones_to_hz(hz_to_semitones(f)) == pytest.approx(f, rel=1e-12)


class TestExtract:
    def test_440_sine(self):
        c = extract_f0(sine(440.0, 1.0))
        assert c.voiced.sum() > 0.9 * len(c)
        np.testing.assert_allclose(c.semitones[c.voiced], 0.0, atol=0.05)

    def test_220_sine(self):
        c = extract_f0(sine(220.0, 1.0))
        np.testing.assert_allclose(c.semitones[c.voiced], -12.0, atol=0.05)

    def test_silence_unvoiced(self):
        c = extract_f0(AudioClip(np.zeros(16000), SR))
        assert len(c) > 0 and not c.voiced.any()

    def test_white_noise_mostly_unvoiced(self, rng):
        c = extract_f0(AudioClip(0.3 * rng.standard_normal(16000), SR))
        assert c.voiced.mean() < 0.2

    def test_short_clip(self):
        c = extract_f0(AudioClip(sine(200.0, 0.01).samples, SR))
        assert len(c) == 1

    def test_frame_times(self):
        c = extract_f0(sine(200.0, 1.0))
        np.testing.assert_allclose(np.diff(c.frame_times), 0.01)
        assert c.frame_times[0] == pytest.approx(0.0125)

    @pytest.mark.parametrize("f0", [110.0, 137.0, 180.0, 220.0, 263.0, 330.0, 400.0])
    def test_yin_accuracy_harmonics(self, f0):
        c = extract_f0(AudioClip(harmonic_tone(f0, 1.0), SR))
        assert c.voiced.mean() > 0.95
        err = np.abs(c.semitones[c.voiced] - hz_to_semitones(f0))
        assert np.mean(err <= 0.1) >= 0.95
        # no octave errors at all
        assert np.max(err) < 1.0
        assert np.median(err) * 100 <= 1.0

    def test_gliding_harmonic(self):
        t = np.arange(SR) / SR
        f = 150.0 * 2 ** (t * 5 / 12)
        phase = 2 * np.pi * np.cumsum(f) / SR
        x = sum(np.sin(h * phase) / h for h in range(1, 6)) * 0.2
        c = extract_f0(AudioClip(x, SR))
        truth = hz_to_semitones(np.interp(c.frame_times, t, f))
        err = np.abs(c.semitones - truth)[c.voiced]
        assert np.mean(err <= 0.1) >= 0.95


class TestAlign:
    def test_identical(self, rng):
        a = grid_contour(rng, 50)
        assert len(align_contours(a, a)) == 50

    def test_intersection(self):
        a = F0Contour.from_values(np.zeros(20), np.arange(20) < 10)
        b = F0Contour.from_values(np.zeros(20), (np.arange(20) >= 5) & (np.arange(20) < 15))
        al = align_contours(a, b)
        assert len(al) == 5
        np.testing.assert_array_equal(al.frame_index, np.arange(5, 10))

    def test_truncation(self):
        al = align_contours(F0Contour.from_values(np.zeros(100)), F0Contour.from_values(np.zeros(98)))
        assert len(al) == 98

    def test_empty_marker(self):
        a = F0Contour.from_values(np.zeros(10), np.arange(10) < 5)
        b = F0Contour.from_values(np.zeros(10), np.arange(10) >= 5)
        assert align_contours(a, b).is_empty
        dev = contour_deviation(a, b)
        assert dev.l1 is None and dev.pcc is None and dev.joint_voiced_count == 0


class TestDeviation:
    def test_identity(self, rng):
        a = grid_contour(rng)
        dev = contour_deviation(a, a)
        assert dev.l1 == 0.0 and dev.pcc == 1.0

    def test_shift_by_four(self, rng):
        a = grid_contour(rng)
        dev = contour_deviation(a, a.shifted(4))
        assert (dev.l1, dev.pcc) == (4.0, 1.0)

    def test_negated_deviations(self, rng):
        a = grid_contour(rng)
        m = np.mean(a.semitones)
        dev = contour_deviation(a, F0Contour.from_values(m - (a.semitones - m)))
        assert dev.pcc == pytest.approx(-1.0, abs=1e-12)

    def test_constant_contour_pcc_undefined(self):
        a = F0Contour.from_values(np.full(10, 3.0))
        dev = contour_deviation(a, a.shifted(1))
        assert dev.l1 == 1.0 and dev.pcc is None

    def test_single_pair_pcc_undefined(self):
        assert pearson([1.0], [2.0]) is None

    def test_constant_shift_law_grid(self, rng):
        for _ in range(100):
            a = grid_contour(rng)
            for c in range(-6, 7):
                dev = contour_deviation(a, a.shifted(c))
                assert dev.l1 == abs(c)
                assert dev.pcc == 1.0

    @settings(max_examples=200)
    @given(st.lists(st.floats(-40, 40), min_size=2, max_size=200), st.floats(-12, 12))
    def test_constant_shift_law_any_float(self, vals, c):
        a = F0Contour.from_values(vals)
        dev = contour_deviation(a, a.shifted(c))
        assert dev.l1 == pytest.approx(abs(c), abs=1e-12)
        if dev.pcc is not None:
            assert dev.pcc == pytest.approx(1.0, abs=1e-9)

    @settings(max_examples=200)
    @given(st.lists(st.integers(-3000, 3000), min_size=3, max_size=100, unique=True),
           st.floats(0.1, 10) | st.floats(-10, -0.1), st.floats(-20, 20))
    def test_scale_law(self, ints, lam, c):
        a = np.array(ints) / 100.0
        assert pearson(a, lam * a + c) == pytest.approx(np.sign(lam), abs=1e-9)

    def test_pearson_matches_numpy(self, rng):
        for _ in range(50):
            a, b = rng.standard_normal((2, 40))
            assert pearson(a, b) == pytest.approx(np.corrcoef(a, b)[0, 1], abs=1e-12)

    def test_unvoiced_frames_ignored(self):
        a = F0Contour.from_values([0.0, 1.0, 2.0, 50.0], [True, True, True, False])
        b = F0Contour.from_values([1.0, 2.0, 3.0, -50.0])
        dev = contour_deviation(a, b)
        assert (dev.l1, dev.pcc, dev.joint_voiced_count) == (1.0, 1.0, 3)


class TestEndToEnd:
    def test_pitch_l1_monotone_in_step(self):
        from speechanon.anonymize import pitch_shift
        clip = AudioClip(harmonic_tone(160.0, 1.5), SR)
        ref = extract_f0(clip)
        l1 = [contour_deviation(ref, extract_f0(pitch_shift(clip, k))).l1 for k in (2, 4, 6)]
        assert l1[0] < l1[1] < l1[2]
        for got, k in zip(l1, (2, 4, 6)):
            assert abs(got - k) <= 0.5


class TestContourIO:
    def test_roundtrip(self, tmp_path):
        c = F0Contour.from_values([1.25, 0.0, -3.5], [True, False, True])
        write_contour_csv(c, tmp_path / "c.csv")
        back = read_contour_csv(tmp_path / "c.csv")
        np.testing.assert_array_equal(back.voiced, c.voiced)
        np.testing.assert_allclose(back.semitones[c.voiced], [1.25, -3.5])

    def test_validation(self):
        with pytest.raises(ValueError):
            F0Contour(np.array([0.0, 0.0]), np.zeros(2), np.ones(2, bool))
        with pytest.raises(ValueError):
            F0Contour(np.array([0.0, 0.1]), np.array([np.nan, 1.0]), np.ones(2, bool))
