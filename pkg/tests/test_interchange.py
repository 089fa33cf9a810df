import json
import struct

import numpy as np
import pytest

from intellipred.interchange import (
    REPR_MAGIC,
    BeamHypothesis,
    BeamSet,
    InterchangeFormatError,
    RepresentationSequence,
    read_beam,
    read_repr,
    validate_beam_file,
    validate_file,
    validate_repr_file,
    write_beam,
    write_repr,
)

from conftest import random_beam, random_repr


class TestRepresentationSequence:
    def test_shape_validation(self):
        with pytest.raises(ValueError, match="T x D"):
            RepresentationSequence("u", "decoder", np.zeros((0, 3), dtype=np.float32))
        with pytest.raises(ValueError, match="T x D"):
            RepresentationSequence("u", "decoder", np.zeros(5, dtype=np.float32))

    def test_finite_validation(self):
        bad = np.full((2, 2), np.inf, dtype=np.float32)
        with pytest.raises(ValueError, match="non-finite"):
            RepresentationSequence("u", "decoder", bad)

    def test_frames_dim(self):
        r = RepresentationSequence("u", "decoder", np.zeros((4, 7), dtype=np.float32))
        assert (r.frames, r.dim) == (4, 7)


class TestReprFile:
    def test_minimal_file_layout(self, tmp_path):
        r = RepresentationSequence("u0", "decoder", np.zeros((1, 1), dtype=np.float32))
        p = tmp_path / "r.repr"
        write_repr(r, p)
        raw = p.read_bytes()
        assert raw[:8] == b"ASRREPR1"
        (header_len,) = struct.unpack_from("<I", raw, 8)
        assert len(raw) == 8 + 4 + header_len + 4
        meta = json.loads(raw[12:12 + header_len])
        assert meta == {"utterance_id": "u0", "layer": "decoder",
                        "frames": 1, "dim": 1, "dtype": "f32le"}
        back = read_repr(p)
        assert back.values[0, 0] == 0.0

    def test_round_trip_bit_identical(self, tmp_path, rng):
        r = random_repr(rng, frames=7, dim=5, utterance_id="rt", layer="dec:5")
        p = tmp_path / "rt.repr"
        write_repr(r, p)
        back = read_repr(p)
        assert back.utterance_id == "rt"
        assert back.layer == "dec:5"
        assert back.values.tobytes() == r.values.tobytes()

    def test_truncated_payload_names_counts(self, tmp_path, rng):
        r = random_repr(rng, frames=3, dim=4)
        p = tmp_path / "t.repr"
        write_repr(r, p)
        p.write_bytes(p.read_bytes()[:-5])
        with pytest.raises(InterchangeFormatError) as e:
            read_repr(p)
        assert "expected 48 bytes" in str(e.value)
        assert "got 43" in str(e.value)

    def test_trailing_garbage_rejected(self, tmp_path, rng):
        r = random_repr(rng, frames=2, dim=2)
        p = tmp_path / "t.repr"
        write_repr(r, p)
        p.write_bytes(p.read_bytes() + b"\x00")
        with pytest.raises(InterchangeFormatError, match="length mismatch"):
            read_repr(p)

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.repr"
        p.write_bytes(b"NOTMAGIC" + b"\x00" * 20)
        with pytest.raises(InterchangeFormatError, match="bad magic"):
            read_repr(p)

    def test_header_overruns_file(self, tmp_path):
        p = tmp_path / "h.repr"
        p.write_bytes(REPR_MAGIC + struct.pack("<I", 10_000) + b"{}")
        with pytest.raises(InterchangeFormatError, match="header length"):
            read_repr(p)

    def test_unknown_dtype(self, tmp_path):
        header = json.dumps({"utterance_id": "u", "layer": "l", "frames": 1,
                             "dim": 1, "dtype": "f64le"}).encode()
        p = tmp_path / "d.repr"
        p.write_bytes(REPR_MAGIC + struct.pack("<I", len(header)) + header + b"\x00" * 8)
        with pytest.raises(InterchangeFormatError, match="unknown dtype"):
            read_repr(p)

    def test_nonfinite_payload(self, tmp_path):
        header = json.dumps({"utterance_id": "u", "layer": "l", "frames": 1,
                             "dim": 1, "dtype": "f32le"}).encode()
        payload = struct.pack("<f", float("nan"))
        p = tmp_path / "n.repr"
        p.write_bytes(REPR_MAGIC + struct.pack("<I", len(header)) + header + payload)
        with pytest.raises(InterchangeFormatError, match="non-finite"):
            read_repr(p)

    def test_missing_header_field(self, tmp_path):
        header = json.dumps({"utterance_id": "u", "frames": 1, "dim": 1,
                             "dtype": "f32le"}).encode()
        p = tmp_path / "m.repr"
        p.write_bytes(REPR_MAGIC + struct.pack("<I", len(header)) + header + b"\x00" * 4)
        with pytest.raises(InterchangeFormatError, match="layer"):
            read_repr(p)

    def test_magic_corruption_sample(self, tmp_path, rng):
        r = random_repr(rng, frames=2, dim=3)
        p = tmp_path / "ok.repr"
        write_repr(r, p)
        raw = bytearray(p.read_bytes())
        for pos in range(8):
            for delta in (1, 128, 255):
                bad = bytearray(raw)
                bad[pos] = (bad[pos] + delta) % 256
                q = tmp_path / "bad.repr"
                q.write_bytes(bytes(bad))
                with pytest.raises(InterchangeFormatError, match="bad magic"):
                    read_repr(q)


class TestBeamTypes:
    def test_hypothesis_validation(self):
        with pytest.raises(ValueError, match="non-negative"):
            BeamHypothesis(tokens=(1, -2), score=-1.0)
        with pytest.raises(ValueError, match="finite"):
            BeamHypothesis(tokens=(1,), score=float("inf"))

    def test_beamset_sorts_descending_stable(self):
        h1 = BeamHypothesis(tokens=(1,), score=-2.0)
        h2 = BeamHypothesis(tokens=(2,), score=-1.0)
        h3 = BeamHypothesis(tokens=(3,), score=-1.0)
        b = BeamSet(utterance_id="u", hypotheses=(h1, h2, h3))
        assert [h.tokens[0] for h in b.hypotheses] == [2, 3, 1]

    def test_empty_beam_rejected(self):
        with pytest.raises(ValueError, match="no hypotheses"):
            BeamSet(utterance_id="u", hypotheses=())

    def test_empty_tokens_only_alone(self):
        BeamSet("u", (BeamHypothesis(tokens=(), score=0.0),))
        with pytest.raises(ValueError, match="empty token"):
            BeamSet("u", (BeamHypothesis(tokens=(), score=0.0),
                          BeamHypothesis(tokens=(1,), score=-1.0)))


class TestBeamFile:
    def test_single_hypothesis(self, tmp_path):
        p = tmp_path / "b.json"
        p.write_text('{"utterance_id":"u","hypotheses":[{"tokens":[1,2],"score":-1.5}]}')
        b = read_beam(p)
        assert len(b.hypotheses) == 1
        assert b.hypotheses[0].score == -1.5

    def test_reader_sorts(self, tmp_path):
        p = tmp_path / "b.json"
        p.write_text(json.dumps({
            "utterance_id": "u",
            "hypotheses": [{"tokens": [1], "score": -2.0}, {"tokens": [2], "score": -1.0}],
        }))
        b = read_beam(p)
        assert [h.score for h in b.hypotheses] == [-1.0, -2.0]

    def test_nan_score_string(self, tmp_path):
        p = tmp_path / "b.json"
        p.write_text('{"utterance_id":"u","hypotheses":[{"tokens":[1],"score":"NaN"}]}')
        with pytest.raises(InterchangeFormatError, match="non-finite"):
            read_beam(p)

    def test_nan_score_literal(self, tmp_path):
        p = tmp_path / "b.json"
        p.write_text('{"utterance_id":"u","hypotheses":[{"tokens":[1],"score":NaN}]}')
        with pytest.raises(InterchangeFormatError, match="non-finite"):
            read_beam(p)

    def test_empty_hypotheses(self, tmp_path):
        p = tmp_path / "b.json"
        p.write_text('{"utterance_id":"u","hypotheses":[]}')
        with pytest.raises(InterchangeFormatError, match="empty hypothesis list"):
            read_beam(p)

    def test_malformed_json(self, tmp_path):
        p = tmp_path / "b.json"
        p.write_text('{"utterance_id":')
        with pytest.raises(InterchangeFormatError, match="malformed JSON"):
            read_beam(p)

    def test_token_scores_preserved(self, tmp_path):
        b = BeamSet("u", (BeamHypothesis(tokens=(1, 2), score=-1.0,
                                         token_scores=(-0.4, -0.6)),))
        p = tmp_path / "b.json"
        write_beam(b, p)
        back = read_beam(p)
        assert back.hypotheses[0].token_scores == (-0.4, -0.6)

    def test_round_trip_random(self, tmp_path, rng):
        for k in range(50):
            b = random_beam(rng, utterance_id=f"u{k}")
            p = tmp_path / "rt.json"
            write_beam(b, p)
            back = read_beam(p)
            assert back == b


class TestValidate:
    def test_clean_files_have_no_findings(self, tmp_path, rng):
        rp = tmp_path / "a.repr"
        write_repr(random_repr(rng), rp)
        bp = tmp_path / "b.json"
        write_beam(random_beam(rng), bp)
        assert validate_repr_file(rp) == []
        assert validate_beam_file(bp) == []
        assert validate_file(rp) == []
        assert validate_file(bp) == []

    def test_findings_reported(self, tmp_path):
        p = tmp_path / "junk.bin"
        p.write_bytes(b"garbage")
        findings = validate_file(p)
        assert len(findings) == 1

    def test_missing_file(self, tmp_path):
        assert validate_file(tmp_path / "gone.repr")
