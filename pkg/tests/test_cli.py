"""End-to-end tests of the command-line interface.

Each test drives ``barkline.cli.main`` directly with an argv list and
inspects exit codes plus captured stdout/stderr, so the tests exercise
exactly what a shell user would see.
"""
from __future__ import annotations

import json
import os

import numpy as np
import pytest

from barkline.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from barkline.config import DEFAULT_CONFIG_TEXT
from barkline.imagecore import ClassMask, save_mask
from barkline.synthgen import PanelSpec, generate

FRAME = (640, 480)


def _make_mask(path, width_px=120.0, angle_deg=0.0, seed=7, **kwargs):
    spec = PanelSpec(width_px=width_px, angle_deg=angle_deg,
                     center=(320.0, 240.0), length_px=400.0, seed=seed,
                     **kwargs)
    mask, gt = generate(spec, FRAME)
    save_mask(mask, os.fspath(path))
    return gt


# -- keydata -------------------------------------------------------------------


class TestKeydata:
    def test_accepted_panel_json(self, tmp_path, capsys):
        _make_mask(tmp_path / "a.pgm")
        rc = main(["keydata", str(tmp_path / "a.pgm")])
        assert rc == EXIT_OK
        rec = json.loads(capsys.readouterr().out)
        assert rec["rejected"] is False
        assert rec["reason"] is None
        # 120 px at 0.42 mm/px is roughly 50 mm of cuttable width
        assert 48.0 < rec["width_mm"] < 53.0
        assert rec["channel_id"] == 1
        assert set(rec) == {"width_mm", "angle_deg", "centerline_offset_mm",
                            "channel_id", "travel_mm", "rejected", "reason"}

    def test_missing_file_is_io_error(self, tmp_path, capsys):
        rc = main(["keydata", str(tmp_path / "nope.pgm")])
        assert rc == EXIT_IO
        assert "error" in capsys.readouterr().err

    def test_rejected_panel_still_exits_zero(self, tmp_path, capsys):
        # an all-background mask yields no edges: rejection is data, not failure
        save_mask(ClassMask(np.zeros((64, 64), dtype=np.uint8)),
                  os.fspath(tmp_path / "empty.pgm"))
        rc = main(["keydata", str(tmp_path / "empty.pgm")])
        assert rc == EXIT_OK
        rec = json.loads(capsys.readouterr().out)
        assert rec["rejected"] is True
        assert rec["reason"] == "fit_degenerate"


# -- configuration -------------------------------------------------------------


class TestConfig:
    def test_default_config_file_parses(self, tmp_path, capsys):
        cfg_path = tmp_path / "default.ini"
        cfg_path.write_text(DEFAULT_CONFIG_TEXT, encoding="utf-8")
        _make_mask(tmp_path / "a.pgm")
        rc = main(["keydata", str(tmp_path / "a.pgm"),
                   "--config", str(cfg_path)])
        assert rc == EXIT_OK
        capsys.readouterr()

    def test_unknown_key_rejected(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad.ini"
        cfg_path.write_text("[edge]\nrespons_threshold = 1.0\n",
                            encoding="utf-8")
        _make_mask(tmp_path / "a.pgm")
        rc = main(["keydata", str(tmp_path / "a.pgm"),
                   "--config", str(cfg_path)])
        assert rc == EXIT_CONFIG
        assert "respons_threshold" in capsys.readouterr().err

    def test_unknown_section_rejected(self, tmp_path, capsys):
        cfg_path = tmp_path / "bad.ini"
        cfg_path.write_text("[edges]\nresponse_threshold = 1.0\n",
                            encoding="utf-8")
        _make_mask(tmp_path / "a.pgm")
        rc = main(["keydata", str(tmp_path / "a.pgm"),
                   "--config", str(cfg_path)])
        assert rc == EXIT_CONFIG
        capsys.readouterr()

    def test_missing_config_file_is_config_error(self, tmp_path, capsys):
        _make_mask(tmp_path / "a.pgm")
        rc = main(["keydata", str(tmp_path / "a.pgm"),
                   "--config", str(tmp_path / "absent.ini")])
        assert rc == EXIT_CONFIG
        capsys.readouterr()

    def test_env_var_fallback(self, tmp_path, capsys, monkeypatch):
        cfg_path = tmp_path / "env.ini"
        # an env-supplied config with a bad key must also fail fast
        cfg_path.write_text("[tukey]\nbogus = 1\n", encoding="utf-8")
        monkeypatch.setenv("BARKLINE_CONFIG", str(cfg_path))
        _make_mask(tmp_path / "a.pgm")
        rc = main(["keydata", str(tmp_path / "a.pgm")])
        assert rc == EXIT_CONFIG
        capsys.readouterr()

    def test_explicit_config_beats_env_var(self, tmp_path, capsys, monkeypatch):
        bad = tmp_path / "bad.ini"
        bad.write_text("[tukey]\nbogus = 1\n", encoding="utf-8")
        good = tmp_path / "good.ini"
        good.write_text(DEFAULT_CONFIG_TEXT, encoding="utf-8")
        monkeypatch.setenv("BARKLINE_CONFIG", str(bad))
        _make_mask(tmp_path / "a.pgm")
        rc = main(["keydata", str(tmp_path / "a.pgm"), "--config", str(good)])
        assert rc == EXIT_OK
        capsys.readouterr()


# -- batch ---------------------------------------------------------------------


class TestBatch:
    def _populate(self, tmp_path, n=6):
        for i in range(n):
            _make_mask(tmp_path / f"m{i}.pgm", width_px=100.0 + 10.0 * i,
                       seed=i)

    def test_batch_sorted_with_summary(self, tmp_path, capsys):
        self._populate(tmp_path)
        rc = main(["batch", str(tmp_path / "*.pgm")])
        assert rc == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        records = [json.loads(ln) for ln in lines]
        body, summary = records[:-1], records[-1]
        assert [r["path"] for r in body] == sorted(r["path"] for r in body)
        assert summary["summary"]["processed"] == 6
        assert summary["summary"]["errors"] == 0

    def test_jobs_do_not_change_output(self, tmp_path, capsys):
        self._populate(tmp_path)
        assert main(["batch", str(tmp_path / "*.pgm"), "--jobs", "1"]) == EXIT_OK
        serial = capsys.readouterr().out
        assert main(["batch", str(tmp_path / "*.pgm"), "--jobs", "8"]) == EXIT_OK
        threaded = capsys.readouterr().out
        assert serial == threaded

    def test_empty_glob_is_config_error(self, tmp_path, capsys):
        rc = main(["batch", str(tmp_path / "*.pgm")])
        assert rc == EXIT_CONFIG
        capsys.readouterr()

    def test_unreadable_file_counted_as_error(self, tmp_path, capsys):
        self._populate(tmp_path, n=2)
        (tmp_path / "broken.pgm").write_bytes(b"not a pgm at all")
        rc = main(["batch", str(tmp_path / "*.pgm")])
        assert rc == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        summary = json.loads(lines[-1])["summary"]
        assert summary["processed"] == 3
        assert summary["errors"] == 1


# -- segment-eval ----------------------------------------------------------------


class TestSegmentEval:
    def test_perfect_prediction(self, tmp_path, capsys):
        truth = tmp_path / "truth"
        pred = tmp_path / "pred"
        truth.mkdir()
        pred.mkdir()
        rng = np.random.default_rng(3)
        for i in range(4):
            labels = rng.integers(0, 2, size=(32, 32)).astype(np.uint8)
            for d in (truth, pred):
                save_mask(ClassMask(labels), os.fspath(d / f"s{i}.pgm"))
        rc = main(["segment-eval", str(truth), str(pred)])
        assert rc == EXIT_OK
        out = capsys.readouterr().out
        report = json.loads(out.strip().splitlines()[-1])
        assert report["miou"] == pytest.approx(1.0)
        assert report["mpa"] == pytest.approx(1.0)
        assert "MIoU" in out

    def test_missing_directory_is_io_error(self, tmp_path, capsys):
        rc = main(["segment-eval", str(tmp_path / "none"), str(tmp_path)])
        assert rc == EXIT_IO
        capsys.readouterr()

    def test_unmatched_files_reported_and_fail(self, tmp_path, capsys):
        truth = tmp_path / "truth"
        pred = tmp_path / "pred"
        truth.mkdir()
        pred.mkdir()
        labels = np.ones((8, 8), dtype=np.uint8)
        save_mask(ClassMask(labels), os.fspath(truth / "a.pgm"))
        save_mask(ClassMask(labels), os.fspath(pred / "a.pgm"))
        save_mask(ClassMask(labels), os.fspath(truth / "only_truth.pgm"))
        rc = main(["segment-eval", str(truth), str(pred)])
        assert rc == EXIT_IO
        assert "only_truth" in capsys.readouterr().err


# -- overlay ---------------------------------------------------------------------


class TestOverlay:
    def test_writes_pgm(self, tmp_path, capsys):
        _make_mask(tmp_path / "a.pgm")
        out = tmp_path / "overlay.pgm"
        rc = main(["overlay", str(tmp_path / "a.pgm"), str(out)])
        assert rc == EXIT_OK
        assert out.read_bytes().startswith(b"P5")
        capsys.readouterr()

    def test_writes_png(self, tmp_path, capsys):
        _make_mask(tmp_path / "a.pgm")
        out = tmp_path / "overlay.png"
        rc = main(["overlay", str(tmp_path / "a.pgm"), str(out)])
        assert rc == EXIT_OK
        assert out.read_bytes().startswith(b"\x89PNG")
        capsys.readouterr()

    def test_overlay_contains_fit_lines(self, tmp_path, capsys):
        # bark makes edge points deviate from the fit, so the point layer
        # is not fully painted over by the fitted lines
        _make_mask(tmp_path / "a.pgm", bark_amplitude_px=3.0)
        out = tmp_path / "overlay.pgm"
        assert main(["overlay", str(tmp_path / "a.pgm"), str(out)]) == EXIT_OK
        from barkline.imagecore import _read_pgm_p5

        img = _read_pgm_p5(out.read_bytes(), os.fspath(out))
        # panel body, edge points, axis and fitted lines all present
        for level in (64, 128, 200, 255):
            assert np.any(img == level), f"gray level {level} missing"
        capsys.readouterr()


# -- bench -----------------------------------------------------------------------


class TestBench:
    def test_reports_json(self, tmp_path, capsys):
        for i in range(3):
            _make_mask(tmp_path / f"m{i}.pgm", seed=i)
        rc = main(["bench", str(tmp_path / "*.pgm"), "--repetitions", "2"])
        assert rc == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["masks_processed"] == 6
        assert report["masks_per_second"] > 0
        assert set(report["p50_ms"]) == {"edge", "fit", "keydata"}
        assert report["backend"] in ("native", "python")

    def test_zero_repetitions_rejected(self, tmp_path, capsys):
        _make_mask(tmp_path / "a.pgm")
        rc = main(["bench", str(tmp_path / "*.pgm"), "--repetitions", "0"])
        assert rc == EXIT_CONFIG
        capsys.readouterr()


# -- synth -----------------------------------------------------------------------


class TestSynth:
    def test_deterministic_for_fixed_seed(self, tmp_path, capsys):
        out1 = tmp_path / "run1"
        out2 = tmp_path / "run2"
        argv = ["synth", "", "--count", "5", "--seed", "42",
                "--width-px", "80:140", "--angle-deg=-3:3",
                "--bark-amplitude", "2.0"]
        for out in (out1, out2):
            argv[1] = str(out)
            assert main(list(argv)) == EXIT_OK
        for name in sorted(os.listdir(out1)):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()
        capsys.readouterr()

    def test_sidecar_ground_truth(self, tmp_path, capsys):
        out = tmp_path / "ds"
        assert main(["synth", str(out), "--count", "2", "--seed", "1"]) == EXIT_OK
        names = sorted(os.listdir(out))
        assert names == ["mask_0000.json", "mask_0000.pgm",
                         "mask_0001.json", "mask_0001.pgm"]
        sidecar = json.loads((out / "mask_0000.json").read_text())
        assert "spec" in sidecar and "ground_truth" in sidecar
        gt = sidecar["ground_truth"]
        assert {"upper_line", "lower_line", "true_width_px",
                "true_angle_deg"} <= set(gt)
        capsys.readouterr()

    def test_split_moves_all_files(self, tmp_path, capsys):
        out = tmp_path / "ds"
        rc = main(["synth", str(out), "--count", "10", "--seed", "2",
                   "--split", "4:1"])
        assert rc == EXIT_OK
        train = sorted(os.listdir(out / "train"))
        val = sorted(os.listdir(out / "val"))
        assert len(train) == 16 and len(val) == 4  # .pgm + .json each
        assert sorted(os.listdir(out)) == ["train", "val"]
        capsys.readouterr()

    def test_bad_split_rejected(self, tmp_path, capsys):
        rc = main(["synth", str(tmp_path / "ds"), "--count", "2",
                   "--split", "0:1"])
        assert rc == EXIT_CONFIG
        capsys.readouterr()

    def test_bad_frame_rejected(self, tmp_path, capsys):
        rc = main(["synth", str(tmp_path / "ds"), "--frame", "banana"])
        assert rc == EXIT_CONFIG
        capsys.readouterr()

    def test_infeasible_spec_rejected(self, tmp_path, capsys):
        # a panel wider than the frame can never satisfy the border margin
        rc = main(["synth", str(tmp_path / "ds"), "--count", "1",
                   "--width-px", "479"])
        assert rc == EXIT_CONFIG
        capsys.readouterr()
