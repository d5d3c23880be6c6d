import csv
import io
import json

import numpy as np
import pytest

from dequip.cli import CSV_HEADER, main
from dequip.core import load_pgm, save_pgm
from dequip.denoise import denoise_image
from dequip.hyper import auto_params
from dequip.noisemetrics import add_awgn, psnr


@pytest.fixture
def files(tmp_path, camera256):
    clean = camera256[:48, :48]
    save_pgm(clean, tmp_path / "clean.pgm")
    save_pgm(add_awgn(clean, 16, 0), tmp_path / "noisy.pgm")
    return tmp_path


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


class TestDenoise:
    def test_auto_params(self, files, capsys):
        code, out, err = run(capsys, "denoise", "--in", files / "noisy.pgm", "--out", files / "den.pgm",
                             "--patch", 7, "--snr", 16, "--model", "gaussian", "--ref", files / "clean.pgm")
        assert code == 0
        chosen = json.loads(err.strip().splitlines()[-1])
        assert chosen["d"] == 28 and chosen["window"] == 21
        assert chosen["p"] == pytest.approx(0.063096)
        (row,) = rows(out)
        assert list(row) == CSV_HEADER and float(row["psnr"]) > 0
        assert load_pgm(files / "den.pgm").shape == (48, 48)

    def test_missing_snr(self, files, capsys):
        code, _, err = run(capsys, "denoise", "--in", files / "noisy.pgm", "--out", files / "o.pgm", "--patch", 7)
        assert code == 2 and "--snr" in err

    def test_explicit_values_skip_lookup(self, files, capsys):
        code, _, err = run(capsys, "denoise", "--in", files / "noisy.pgm", "--out", files / "o.pgm", "--patch", 9,
                           "--p", 0.05, "--d", 30, "--ffactor", 1.7, "--window", 27)
        assert code == 0
        assert json.loads(err.strip().splitlines()[-1])["d"] == 30

    def test_unknown_side_without_values(self, files, capsys):
        code, _, err = run(capsys, "denoise", "--in", files / "noisy.pgm", "--out", files / "o.pgm", "--patch", 9,
                           "--snr", 16)
        assert code == 2 and "no fit constants" in err

    def test_config_file_equivalence(self, files, capsys):
        flags = ["--in", files / "noisy.pgm", "--patch", 5, "--snr", 12, "--stride", 1]
        assert run(capsys, "denoise", *flags, "--out", files / "a.pgm")[0] == 0
        cfg = files / "cfg.json"
        cfg.write_text(json.dumps({"in": str(files / "noisy.pgm"), "patch": 5, "snr": 12, "stride": 1}))
        assert run(capsys, "denoise", "--config", cfg, "--out", files / "b.pgm")[0] == 0
        assert (files / "a.pgm").read_bytes() == (files / "b.pgm").read_bytes()

    def test_flags_override_file(self, files, capsys):
        cfg = files / "cfg.json"
        cfg.write_text(json.dumps({"patch": 5, "snr": 12, "d": 3}))
        code, _, err = run(capsys, "denoise", "--config", cfg, "--in", files / "noisy.pgm",
                           "--out", files / "o.pgm", "--d", 7)
        assert code == 0 and json.loads(err.strip().splitlines()[-1])["d"] == 7

    def test_threads_do_not_change_output(self, files, capsys):
        base = ["denoise", "--in", files / "noisy.pgm", "--patch", 5, "--snr", 12, "--stride", 1]
        run(capsys, *base, "--out", files / "t1.pgm", "--threads", 1)
        run(capsys, *base, "--out", files / "t4.pgm", "--threads", 4)
        assert (files / "t1.pgm").read_bytes() == (files / "t4.pgm").read_bytes()

    def test_io_errors(self, files, capsys):
        assert run(capsys, "denoise", "--in", files / "none.pgm", "--out", files / "o.pgm",
                   "--patch", 7, "--snr", 16)[0] == 3
        (files / "bad.pgm").write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
        assert run(capsys, "denoise", "--in", files / "bad.pgm", "--out", files / "o.pgm",
                   "--patch", 7, "--snr", 16)[0] == 3

    def test_numerical_error_exit(self, files, capsys):
        # d=7 sits next to the pole of the 11x11 Gaussian fit
        code, _, err = run(capsys, "denoise", "--in", files / "noisy.pgm", "--out", files / "o.pgm",
                           "--patch", 11, "--snr", 16, "--d", 7)
        assert code == 4 and "pole" in err


class TestOtherCommands:
    def test_qab_full_rank(self, files, capsys):
        code, out, _ = run(capsys, "qab", "--in", files / "clean.pgm", "--out", files / "q.pgm",
                           "--beta", 10, "--keep", 64, "--tile", 8, "--ref", files / "clean.pgm")
        assert code == 0
        assert np.array_equal(load_pgm(files / "q.pgm"), load_pgm(files / "clean.pgm"))
        (row,) = rows(out)
        assert float(row["psnr"]) > 100 and float(row["wall_ms"]) >= 0

    def test_qab_capacity(self, files, capsys):
        assert run(capsys, "qab", "--in", files / "clean.pgm", "--out", files / "q.pgm",
                   "--beta", 1, "--keep", 1, "--tile", 97)[0] == 5

    def test_noise_reports_measured_snr(self, files, capsys):
        code, out, _ = run(capsys, "noise", "--in", files / "clean.pgm", "--out", files / "n.pgm",
                           "--model", "poisson", "--snr", 14, "--seed", 3)
        assert code == 0
        (row,) = rows(out)
        assert row["noise_model"] == "poisson" and abs(float(row["measured_snr"]) - 14) < 1.0

    def test_noise_deterministic(self, files, capsys):
        for name in ("a", "b"):
            run(capsys, "noise", "--in", files / "clean.pgm", "--out", files / f"{name}.pgm",
                "--model", "speckle", "--snr", 10, "--seed", 5)
        assert (files / "a.pgm").read_bytes() == (files / "b.pgm").read_bytes()

    def test_metrics(self, files, capsys):
        code, out, _ = run(capsys, "metrics", "--ref", files / "clean.pgm", "--test", files / "clean.pgm")
        (row,) = rows(out)
        assert code == 0 and row["psnr"] == "inf" and float(row["ssim"]) == 1.0
        code, out, _ = run(capsys, "metrics", "--ref", files / "clean.pgm", "--test", files / "noisy.pgm",
                           "--roi-a", "0,0,10,10", "--roi-b", "20,20,10,10")
        assert code == 0 and float(rows(out)[0]["cnr"]) >= 0

    def test_metrics_shape_mismatch(self, files, capsys):
        save_pgm(np.ones((20, 20)), files / "small.pgm")
        assert run(capsys, "metrics", "--ref", files / "clean.pgm", "--test", files / "small.pgm")[0] == 2

    def test_ipr(self, files, capsys):
        code, out, _ = run(capsys, "ipr", "--in", files / "clean.pgm", "--patch", "1,4", "--beta", 20,
                           "--snr-list", "inf,10", "--seeds", 2)
        assert code == 0
        got = rows(out)
        assert [(r["snr"], r["patch_side"]) for r in got] == [("inf", "1"), ("inf", "4"), ("10.000000", "1"),
                                                             ("10.000000", "4")]
        assert float(got[0]["mean_ipr"]) == 1.0 and 1 <= float(got[1]["mean_ipr"]) <= 16

    def test_ipr_constant_image(self, tmp_path, capsys):
        save_pgm(np.full((4, 4), 100.0), tmp_path / "c.pgm")
        code, out, _ = run(capsys, "ipr", "--in", tmp_path / "c.pgm", "--patch", 2, "--beta", 1)
        assert code == 0 and 3.0 <= float(rows(out)[0]["mean_ipr"]) <= 4.0

    @pytest.mark.parametrize("model, expect", [("gaussian", 28), ("poisson", 26)])
    def test_hyper(self, capsys, model, expect):
        code, out, _ = run(capsys, "hyper", "--snr", 16, "--patch", 7, "--model", model)
        got = json.loads(out)
        assert code == 0 and got["d"] == expect and got["W_h"] == 21

    def test_hyper_lookup_error(self, capsys):
        assert run(capsys, "hyper", "--snr", 16, "--patch", 9)[0] == 2

    def test_bench_single_cell_matches_denoise(self, files, capsys):
        folder = files / "imgs"
        folder.mkdir()
        save_pgm(load_pgm(files / "clean.pgm"), folder / "clean.pgm")
        code, out, _ = run(capsys, "bench", "--images", folder, "--snrs", 16, "--patches", 5, "--seeds", 1,
                           "--out", files / "bench.csv")
        assert code == 0
        (row,) = rows(out)
        assert (files / "bench.csv").read_text() == out
        clean = load_pgm(folder / "clean.pgm")
        direct = psnr(clean, denoise_image(add_awgn(clean, 16, 0), auto_params(16, 5)))
        assert float(row["psnr"]) == pytest.approx(direct, abs=1e-6)

    def test_bench_empty_dir(self, tmp_path, capsys):
        assert run(capsys, "bench", "--images", tmp_path)[0] == 2

    def test_usage(self, capsys):
        assert run(capsys)[0] == 2
        assert run(capsys, "denoise", "--bogus")[0] == 2
