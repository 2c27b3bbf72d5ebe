import csv
import io
import json

import numpy as np
import pytest

from conftest import random_image, random_kernel
from filtersim.cli import RangeError, main, parse_range
from filtersim.core import FilterConfig, Kernel, PixelImage, Q1_14
from filtersim.fileio import (
    BadMagic,
    KernelFileError,
    MaxvalUnsupported,
    TruncatedData,
    format_kernel,
    format_pgm,
    load_pgm,
    parse_kernel,
    parse_pgm,
    write_kernel,
    write_pgm,
)
from filtersim.report import ReportRecord


class TestPgm:
    def test_minimal(self):
        img = parse_pgm(b"P5 2 2 255\n" + bytes([0, 1, 2, 3]))
        assert img.samples.tolist() == [[0, 1], [2, 3]]

    def test_comments_and_whitespace(self):
        img = parse_pgm(b"P5\n# made by hand\n3  1\n# depth\n255\n\x05\x06\x07")
        assert img.samples.tolist() == [[5, 6, 7]]

    def test_round_trip_is_byte_identical(self, rng, tmp_path):
        data = format_pgm(random_image(rng, 5, 7))
        p = tmp_path / "a.pgm"
        p.write_bytes(data)
        write_pgm(tmp_path / "b.pgm", load_pgm(p))
        assert (tmp_path / "b.pgm").read_bytes() == data

    @pytest.mark.parametrize("data, exc", [
        (b"P6 2 2 255\n" + bytes(12), BadMagic),
        (b"P5 2 2 65535\n" + bytes(8), MaxvalUnsupported),
        (b"P5 2 2 255\n\x00\x01", TruncatedData),
        (b"P5 2 2", TruncatedData),
    ])
    def test_errors(self, data, exc):
        with pytest.raises(exc):
            parse_pgm(data)

    def test_lower_maxval_sets_depth(self):
        assert parse_pgm(b"P5 1 1 15\n\x0f").depth == 4


class TestKernelFile:
    def test_parse(self):
        k = parse_kernel("3\ns1.14\n0 0 0\n0 1.0 0\n0 0 -0.5\n")
        assert k == Kernel(np.array([[0, 0, 0], [0, 16384, 0], [0, 0, -8192]]), Q1_14)

    def test_round_half_up(self):
        half_lsb = 0.5 / 16384
        k = parse_kernel(f"1\ns1.14\n{half_lsb!r}\n")
        assert k.coeffs[0, 0] == 1
        k = parse_kernel(f"1\ns1.14\n{-half_lsb!r}\n")
        assert k.coeffs[0, 0] == 0

    def test_round_trip(self, rng, tmp_path):
        k = random_kernel(rng, 5)
        write_kernel(tmp_path / "k.txt", k)
        assert parse_kernel((tmp_path / "k.txt").read_text()) == k
        assert parse_kernel(format_kernel(k)) == k

    @pytest.mark.parametrize("text", [
        "4\ns1.14\n" + "0 0 0 0\n" * 4,      # even window
        "3\nq1.14\n" + "0 0 0\n" * 3,        # bad format
        "3\ns1.14\n" + "0 0 0\n" * 2,        # missing row
        "3\ns1.14\n0 0\n0 0 0\n0 0 0\n",     # short row
        "1\ns1.14\n2.5\n",                   # out of range, never clamped
        "1\ns1.14\nabc\n",
        "",
    ])
    def test_errors(self, text):
        with pytest.raises(KernelFileError):
            parse_kernel(text)


def test_report_round_trip():
    from filtersim.core import CycleReport, ResourceReport
    rec = ReportRecord.build(FilterConfig(), CycleReport(205, 4300, 0, 64, 64, 4096),
                             ResourceReport(49, 0, 48, 6, False), 64, 64, 422.0, 1.5, True)
    assert ReportRecord.from_json(rec.to_json()) == rec


@pytest.mark.parametrize("text, expect", [
    ("7", [7]), ("3..7", [3, 5, 7]), ("3,5,9", [3, 5, 9]), ("20..100:40", [20, 60, 100]), ("3..3", [3]),
])
def test_parse_range(text, expect):
    step = 2 if text.startswith("3..") else 1
    assert parse_range(text, step) == expect


@pytest.mark.parametrize("text", ["7..3", "a..b", "3..7:0", "x"])
def test_parse_range_errors(text):
    with pytest.raises(RangeError):
        parse_range(text)


@pytest.fixture
def kernel7(tmp_path, rng):
    p = tmp_path / "k7.txt"
    write_kernel(p, random_kernel(rng, 7, scale=1500))
    return str(p)


class TestSimulate:
    def test_verify_random_64(self, kernel7, capsys):
        assert main(["simulate", "--random", "64x64", "--kernel", kernel7, "--verify"]) == 0
        rep = json.loads(capsys.readouterr().out)
        assert rep["first_output_cycle"] == 3 * 64 + 4 + 9
        assert rep["verified"] is True and rep["layout"] == "log" and rep["border_policy"] == "mirror-nodup"

    def test_writes_image_and_report(self, kernel7, tmp_path, rng):
        src = tmp_path / "in.pgm"
        write_pgm(src, random_image(rng, 20, 30))
        out, rep = tmp_path / "out.pgm", tmp_path / "rep.json"
        rc = main(["simulate", "--image", str(src), "--kernel", kernel7, "--layout", "dsp",
                   "--out", str(out), "--report", str(rep), "--fclk", "405"])
        assert rc == 0
        assert load_pgm(out).width == 30
        data = json.loads(rep.read_text())
        assert data["total_dsp"] == 85 and data["fps"] == pytest.approx(405e6 / 600)

    def test_neglect_shrinks_output(self, kernel7, tmp_path):
        out = tmp_path / "o.pgm"
        assert main(["simulate", "--random", "20x20", "--kernel", kernel7, "--policy", "neglect",
                     "--form", "transposed", "--out", str(out), "--report", str(tmp_path / "r")]) == 0
        assert (load_pgm(out).height, load_pgm(out).width) == (14, 14)

    def test_transposed_with_border_is_config_error(self, kernel7, capsys):
        rc = main(["simulate", "--random", "16x16", "--kernel", kernel7, "--form", "transposed",
                   "--policy", "mirror-dup"])
        assert rc == 1
        assert "TransposedWithBorder" in capsys.readouterr().err

    def test_missing_kernel_is_io_error(self, tmp_path):
        assert main(["simulate", "--random", "8x8", "--kernel", str(tmp_path / "nope")]) == 2

    def test_bad_image_is_io_error(self, kernel7, tmp_path):
        bad = tmp_path / "bad.pgm"
        bad.write_bytes(b"P6 1 1 255\n\x00\x00\x00")
        assert main(["simulate", "--image", str(bad), "--kernel", kernel7]) == 2

    def test_verify_mismatch_exit_code(self, kernel7, monkeypatch, capsys):
        import filtersim.cli as cli

        real = cli.simulate

        def broken(cfg, img, k):
            out, rep = real(cfg, img, k)
            s = out.samples.copy()
            s[0, 0] ^= 1
            return PixelImage(s, out.depth), rep

        monkeypatch.setattr(cli, "simulate", broken)
        assert main(["simulate", "--random", "16x16", "--kernel", kernel7, "--verify"]) == 3
        assert json.loads(capsys.readouterr().out)["verified"] is False


def test_golden_subcommand(tmp_path, rng, kernel7):
    src, out = tmp_path / "in.pgm", tmp_path / "out.pgm"
    write_pgm(src, random_image(rng, 10, 10))
    assert main(["golden", "--image", str(src), "--kernel", kernel7, "--out", str(out)]) == 0
    assert load_pgm(out).height == 10
    assert main(["golden", "--image", str(src), "--kernel", kernel7, "--out", str(out),
                 "--policy", "neglect"]) == 0
    assert load_pgm(out).width == 4
    write_pgm(src, random_image(rng, 5, 5))
    assert main(["golden", "--image", str(src), "--kernel", kernel7, "--out", str(out),
                 "--policy", "neglect"]) == 1

class TestEstimate:
    def test_dspcomp(self, capsys):
        assert main(["estimate", "--form", "direct", "--layout", "dspcomp", "-w", "7"]) == 0
        assert json.loads(capsys.readouterr().out)["total_dsp"] == 69

    def test_csv_and_fps(self, capsys):
        assert main(["estimate", "--border", "neglect", "--fclk", "422", "--format", "csv"]) == 0
        row = next(csv.DictReader(io.StringIO(capsys.readouterr().out)))
        assert int(row["latency"]) == 3856 and float(row["fps"]) == pytest.approx(1373.7, abs=0.1)

    def test_transposed_handled_is_error(self):
        assert main(["estimate", "--form", "transposed"]) == 1


class TestSweep:
    def _rows(self, capsys):
        return list(csv.DictReader(io.StringIO(capsys.readouterr().out)))

    def test_paper_tables(self, capsys):
        assert main(["sweep", "--paper-tables"]) == 0
        keys = {(r["form"], r["layout"], r["w"], r["iw"], r["latency"]) for r in self._rows(capsys)}
        assert ("direct", "dsp", "7", "100", "331") in keys
        assert ("transposed", "log", "7", "640", "3850") in keys

    def test_single_point(self, capsys):
        assert main(["sweep", "-w", "3..3", "--layout", "log"]) == 0
        assert len(self._rows(capsys)) == 1

    def test_bad_range(self):
        assert main(["sweep", "-w", "7..3"]) == 1
        assert main(["sweep", "--layout", "fpga"]) == 1

    def test_json_with_simulation(self, capsys):
        assert main(["sweep", "-w", "3,5", "--iw", "20", "--simulate", "--format", "json"]) == 0
        rows = json.loads(capsys.readouterr().out)
        assert len(rows) == 6 and all(r["latency"] == r["simulated_latency"] for r in rows)

    def test_deterministic(self, capsys):
        main(["sweep", "-w", "3..7", "--iw", "20,100", "--simulate"])
        first = capsys.readouterr().out
        main(["sweep", "-w", "3..7", "--iw", "20,100", "--simulate", "--workers", "1"])
        assert capsys.readouterr().out == first
