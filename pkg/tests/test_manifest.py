import json
from pathlib import Path

import pytest

from speechanon.manifest import Gender, ManifestError, Split, UtteranceRecord, load_manifest, write_manifest

HEADER = "id,speaker_id,gender,wav_path,transcript,risk_label,split\n"


def write(tmp_path, body, name="m.csv"):
    path = tmp_path / name
    path.write_text(body, encoding="utf-8")
    return path


class TestCsv:
    def test_four_rows(self, tmp_path):
        body = HEADER + "".join(f"u{k},s{k % 2},{'MALE' if k % 2 else 'f'},wav/u{k}.wav,,,\n" for k in range(4))
        recs = load_manifest(write(tmp_path, body))
        assert [r.id for r in recs] == ["u0", "u1", "u2", "u3"]
        assert recs[0].gender is Gender.FEMALE and recs[1].gender is Gender.MALE
        assert recs[0].wav_path == tmp_path / "wav" / "u0.wav"
        assert recs[0].split is Split.TEST and recs[0].risk_label is None

    def test_duplicate_id_named(self, tmp_path):
        body = HEADER + "a,s,m,a.wav,,,\nb,s,m,b.wav,,,\na,s,m,c.wav,,,\n"
        with pytest.raises(ManifestError, match=r"m.csv:4: duplicate id 'a' \(first seen at line 2\)"):
            load_manifest(write(tmp_path, body))

    def test_unknown_gender_line(self, tmp_path):
        body = HEADER + "a,s,m,a.wav,,,\nb,s,X,b.wav,,,\n"
        with pytest.raises(ManifestError, match=r"m.csv:3: unknown gender 'X'"):
            load_manifest(write(tmp_path, body))

    def test_missing_column(self, tmp_path):
        with pytest.raises(ManifestError, match="header lacks column"):
            load_manifest(write(tmp_path, "id,gender,wav_path\na,m,a.wav\n"))

    def test_missing_value(self, tmp_path):
        with pytest.raises(ManifestError, match=":2: missing required field"):
            load_manifest(write(tmp_path, HEADER + "a,,m,a.wav,,,\n"))

    @pytest.mark.parametrize("label", ["2", "yes"])
    def test_bad_risk_label(self, tmp_path, label):
        with pytest.raises(ManifestError, match="risk_label"):
            load_manifest(write(tmp_path, HEADER + f"a,s,m,a.wav,,{label},\n"))

    def test_bad_split(self, tmp_path):
        with pytest.raises(ManifestError, match="split"):
            load_manifest(write(tmp_path, HEADER + "a,s,m,a.wav,,,holdout\n"))

    def test_optional_fields(self, tmp_path):
        rec, = load_manifest(write(tmp_path, HEADER + "a,s,Unspecified,/abs/a.wav,你好,1,Train\n"))
        assert rec.transcript == "你好"
        assert rec.risk_label == 1
        assert rec.split is Split.TRAIN
        assert rec.gender is Gender.UNSPECIFIED
        assert rec.wav_path == Path("/abs/a.wav")

    def test_not_found(self, tmp_path):
        with pytest.raises(ManifestError, match="not found"):
            load_manifest(tmp_path / "none.csv")

    def test_roundtrip(self, tmp_path):
        recs = load_manifest(write(tmp_path, HEADER + "a,s1,m,a.wav,hi,0,dev\nb,s2,f,b.wav,,,\n"))
        write_manifest(recs, tmp_path / "out.csv")
        assert load_manifest(tmp_path / "out.csv") == recs
        assert "a.wav" in (tmp_path / "out.csv").read_text().splitlines()[1].split(",")

    def test_written_paths_resolve_from_any_cwd(self, tmp_path, monkeypatch):
        (tmp_path / "data" / "wav").mkdir(parents=True)
        (tmp_path / "other").mkdir()
        monkeypatch.chdir(tmp_path)
        rec = UtteranceRecord("a", "s", Gender.MALE, Path("data/wav/a.wav"))
        outside = UtteranceRecord("b", "s", Gender.MALE, Path("other/b.wav"))
        write_manifest([rec, outside], Path("data/m.csv"))
        monkeypatch.chdir(tmp_path / "other")
        back = load_manifest(tmp_path / "data" / "m.csv")
        assert [r.wav_path for r in back] == [tmp_path / "data" / "wav" / "a.wav", tmp_path / "other" / "b.wav"]


class TestJsonl:
    def test_valid(self, tmp_path):
        rows = [{"id": f"u{k}", "speaker_id": "s", "gender": "female", "wav_path": f"u{k}.wav"} for k in range(3)]
        path = write(tmp_path, "\n".join(json.dumps(r) for r in rows) + "\n\n", "m.jsonl")
        assert len(load_manifest(path)) == 3

    def test_bad_json_line(self, tmp_path):
        path = write(tmp_path, '{"id": "a", "speaker_id": "s", "gender": "m", "wav_path": "a"}\n{oops\n', "m.jsonl")
        with pytest.raises(ManifestError, match="m.jsonl:2: invalid JSON"):
            load_manifest(path)

    def test_non_object(self, tmp_path):
        with pytest.raises(ManifestError, match="JSON object"):
            load_manifest(write(tmp_path, "[1, 2]\n", "m.jsonl"))
