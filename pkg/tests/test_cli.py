import csv
import io
import json
import math
import subprocess
import sys

import numpy as np
import pytest
from numpy.testing import assert_allclose

from lapdp import cli
from lapdp.composition import compose_homogeneous
from lapdp.mechanisms import gaussian_profile

GAUSS = '{"gaussian": {"kappa": 0.5}}'
RR_LN2_TWICE = '{"point_guarantee": {"eps0": 0.6931471805599453, "delta0": 0}, "repeat": 2}'


def run(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse(text):
    lines = text.split("\n")
    meta = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if ln and not ln.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    return meta, rows[0], rows[1:]


def column(rows, i=1):
    return np.array([float(r[i]) for r in rows])


class TestProfile:
    def test_gaussian_grid(self, capsys):
        code, out, _ = run(["profile", GAUSS, "--eps-min", "-2", "--eps-max", "6", "--steps", "9"], capsys)
        assert code == 0
        meta, header, rows = parse(out)
        assert header == ["epsilon", "delta"]
        assert len(rows) == 9
        assert any("command: profile" in m for m in meta)
        eps = column(rows, 0)
        assert_allclose(column(rows), gaussian_profile(0.5, eps), rtol=1e-15, atol=0)

    def test_gaussian_at_half(self, capsys):
        _, out, _ = run(["profile", GAUSS, "--eps-min", "0.5", "--eps-max", "1", "--steps", "2"], capsys)
        _, _, rows = parse(out)
        assert float(rows[0][1]) == pytest.approx(0.23842170813487676, rel=1e-15)

    def test_rr_first_branch(self, capsys):
        spec = '{"randomized_response": {"eps0": 1, "delta0": 0.05}}'
        _, out, _ = run(["profile", spec, "--eps-min", "2", "--eps-max", "3", "--steps", "2"], capsys)
        _, _, rows = parse(out)
        assert float(rows[0][1]) == pytest.approx(0.05, abs=1e-16)

    def test_point_guarantee_zero(self, capsys):
        spec = '{"point_guarantee": {"eps0": 0, "delta0": 0}}'
        _, out, _ = run(["profile", spec, "--eps-min", "0", "--eps-max", "1", "--steps", "2"], capsys)
        _, _, rows = parse(out)
        assert rows[0] == ["0", "0"]

    def test_seventeen_digits(self, capsys):
        _, out, _ = run(["profile", GAUSS, "--eps-min", "0.1", "--eps-max", "0.2", "--steps", "2"], capsys)
        _, _, rows = parse(out)
        assert rows[0][0] == "0.10000000000000001"
        assert float(rows[0][1]) == gaussian_profile(0.5, 0.1)

    @pytest.mark.parametrize("argv", [
        ["profile", '{"gaussian": {"kappa": -1}}'],
        ["profile", "not-a-file.json"],
        ["profile", GAUSS, "--eps-min", "3", "--eps-max", "1"],
        ["profile", GAUSS, "--steps", "1"],
        ["profile", RR_LN2_TWICE],
    ])
    def test_invalid_spec_exit_2(self, argv, capsys):
        code, _, err = run(argv, capsys)
        assert code == 2
        assert err.startswith("lapdp profile:")

    def test_spec_file_and_stdin(self, tmp_path, capsys, monkeypatch):
        path = tmp_path / "g.json"
        path.write_text(GAUSS)
        _, a, _ = run(["profile", str(path)], capsys)
        monkeypatch.setattr(sys, "stdin", io.StringIO(GAUSS))
        _, b, _ = run(["profile", "-"], capsys)
        _, c, _ = run(["profile", GAUSS], capsys)
        assert a == b == c


class TestCompose:
    def test_recursion_rr(self, capsys):
        code, out, _ = run(["compose", RR_LN2_TWICE, "--method", "recursion",
                            "--eps-min", "0", "--eps-max", "1", "--steps", "2"], capsys)
        assert code == 0
        meta, _, rows = parse(out)
        assert any("method: recursion" in m for m in meta)
        assert float(rows[0][1]) == pytest.approx(1 / 3, abs=1e-15)

    def test_default_method(self, capsys):
        _, out, _ = run(["compose", RR_LN2_TWICE], capsys)
        assert "# method: recursion" in out
        _, out, _ = run(["compose", '{"gaussian": {"kappa": 0.1}, "repeat": 2}', "--steps", "5"], capsys)
        assert "# method: kernel" in out

    def test_recursion_matches_closed_form(self, capsys):
        spec = '{"point_guarantee": {"eps0": 0.1, "delta0": 1e-8}, "repeat": 100}'
        grid = ["--eps-min", "-1", "--eps-max", "8", "--steps", "46"]
        _, a, _ = run(["compose", spec, "--method", "recursion", *grid], capsys)
        _, b, _ = run(["compose", spec, "--method", "closed-form", *grid], capsys)
        ra, rb = column(parse(a)[2]), column(parse(b)[2])
        assert_allclose(ra, rb, rtol=0, atol=1e-12)
        assert_allclose(rb, compose_homogeneous(0.1, 1e-8, 100, np.linspace(-1, 8, 46)), atol=1e-15)

    def test_kernel_and_oracle_on_gaussians(self, capsys):
        spec = '[{"gaussian": {"kappa": 0.25}}, {"gaussian": {"kappa": 0.5}}]'
        grid = ["--eps-min", "-1", "--eps-max", "4", "--steps", "6"]
        _, a, _ = run(["compose", spec, "--method", "kernel", *grid], capsys)
        _, b, _ = run(["compose", spec, "--method", "oracle", *grid], capsys)
        want = gaussian_profile(0.75, np.linspace(-1, 4, 6))
        assert_allclose(column(parse(a)[2]), want, atol=1e-5)
        assert_allclose(column(parse(b)[2]), want, atol=1e-4)

    def test_closed_form_inapplicable(self, capsys):
        spec = '[{"point_guarantee": {"eps0": 0.1, "delta0": 0}}, {"point_guarantee": {"eps0": 0.2, "delta0": 0}}]'
        code, _, _ = run(["compose", spec, "--method", "closed-form"], capsys)
        assert code == 3
        code, _, _ = run(["compose", GAUSS, "--method", "recursion"], capsys)
        assert code == 3

    def test_book_overflow_exit_4(self, capsys):
        # Generic ε0 values give 2^21 distinct shifts, above the 2^20 cap.
        eps0 = [0.01 * math.sqrt(p) for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31,
                                              37, 41, 43, 47, 53, 59, 61, 67, 71, 73)]
        spec = json.dumps([{"point_guarantee": {"eps0": e, "delta0": 0.001}} for e in eps0])
        code, _, err = run(["compose", spec, "--method", "recursion", "--steps", "3"], capsys)
        assert code == 4, err
        assert "cap" in err


class TestCalibrate:
    def test_single(self, capsys):
        spec = '{"point_guarantee": {"eps0": 0.1, "delta0": 1e-8}}'
        code, out, _ = run(["calibrate", spec, "--delta-budget", "1e-6"], capsys)
        assert code == 0
        _, header, rows = parse(out)
        assert header == ["k", "epsilon"]
        assert rows[0][0] == "1"
        # Middle branch: δ(ε) = δ0 + (1 - δ0)(e^{ε0} - e^ε)/(1 + e^{ε0}), solved for the budget.
        e0, d0, b = 0.1, 1e-8, 1e-6
        want = math.log(math.exp(e0) - (b - d0) * (1 + math.exp(e0)) / (1 - d0))
        assert float(rows[0][1]) < 0.1
        assert float(rows[0][1]) == pytest.approx(want, abs=1e-8)

    def test_increasing(self, capsys):
        spec = '{"point_guarantee": {"eps0": 0.1, "delta0": 1e-8}}'
        _, out, _ = run(["calibrate", spec, "--delta-budget", "1e-6", "--k-range", "1..40"], capsys)
        _, _, rows = parse(out)
        ks = [int(r[0]) for r in rows]
        eps = column(rows)
        assert ks == list(range(1, 41))
        assert np.all(np.diff(eps) > 0)

    @pytest.mark.parametrize("text,want", [("1..3", [1, 2, 3]), ("2:4", [2, 3, 4]), ("1,10,100", [1, 10, 100])])
    def test_k_range_forms(self, text, want):
        assert cli._parse_k_range(text) == want

    def test_unattainable_is_inf(self, capsys):
        spec = '{"point_guarantee": {"eps0": 0.1, "delta0": 1e-8}}'
        code, out, _ = run(["calibrate", spec, "--delta-budget", "1e-8", "--k-range", "1,100"], capsys)
        assert code == 0
        _, _, rows = parse(out)
        assert rows[1] == ["100", "inf"]

    @pytest.mark.parametrize("extra", [["--delta-budget", "0"], ["--delta-budget", "1"],
                                       ["--delta-budget", "0.1", "--k-range", "0..3"],
                                       ["--delta-budget", "0.1", "--k-range", "x"]])
    def test_bad_flags(self, extra, capsys):
        spec = '{"point_guarantee": {"eps0": 0.1, "delta0": 0}}'
        code, _, _ = run(["calibrate", spec, *extra], capsys)
        assert code == 2

    def test_gaussian_inapplicable(self, capsys):
        code, _, _ = run(["calibrate", GAUSS, "--delta-budget", "1e-6"], capsys)
        assert code == 3


class TestConvert:
    def test_gaussian_to_renyi(self, capsys):
        code, out, _ = run(["convert", GAUSS, "--from", "profile", "--to", "renyi",
                            "--q-min", "1.5", "--q-max", "5", "--steps", "8"], capsys)
        assert code == 0
        _, header, rows = parse(out)
        assert header == ["q", "rho"]
        assert_allclose(column(rows), 0.5 * column(rows, 0), atol=1e-6)

    def test_renyi_to_profile(self, capsys):
        code, out, _ = run(["convert", GAUSS, "--from", "renyi", "--to", "profile",
                            "--eps-min", "1", "--eps-max", "3", "--steps", "2"], capsys)
        assert code == 0
        _, _, rows = parse(out)
        assert float(rows[0][1]) == pytest.approx(gaussian_profile(0.5, 1.0), abs=1e-6)

    def test_complex_line(self, capsys):
        code, out, _ = run(["convert", GAUSS, "--from", "profile", "--to", "renyi",
                            "--complex-line", "2", "--omega-max", "1", "--steps", "3"], capsys)
        assert code == 0
        _, header, rows = parse(out)
        assert header == ["omega", "re_E", "im_E"]
        q = 2.0 + 1j * column(rows, 0)
        want = np.exp((q - 1) * 0.5 * q)
        assert_allclose(column(rows, 1) + 1j * column(rows, 2), want, rtol=1e-6)

    def test_empty_roc_exit_5(self, capsys):
        spec = '{"randomized_response": {"eps0": 1, "delta0": 0.1}}'
        code, _, _ = run(["convert", spec, "--from", "profile", "--to", "renyi"], capsys)
        assert code == 5
        code, _, _ = run(["convert", spec, "--from", "renyi", "--to", "profile"], capsys)
        assert code == 5

    def test_same_direction(self, capsys):
        code, _, _ = run(["convert", GAUSS, "--from", "renyi", "--to", "renyi"], capsys)
        assert code == 2


class TestSubsample:
    @pytest.mark.parametrize("direction,want", [("remove", 1 / 6), ("add", 1 / 6), ("max", 1 / 6)])
    def test_rr_at_zero(self, direction, want, capsys):
        spec = '{"randomized_response": {"eps0": 0.6931471805599453, "delta0": 0}}'
        code, out, _ = run(["subsample", spec, "--lambda", "0.5", "--direction", direction,
                            "--eps-min", "0", "--eps-max", "0.3", "--steps", "2"], capsys)
        assert code == 0
        _, _, rows = parse(out)
        assert float(rows[0][1]) == pytest.approx(want, abs=1e-12)

    def test_bad_lambda(self, capsys):
        code, _, _ = run(["subsample", GAUSS, "--lambda", "0"], capsys)
        assert code == 2


class TestVerify:
    def test_quick(self, capsys):
        code, out, _ = run(["verify", "--seed", "3"], capsys)
        assert code == 0
        assert "checks passed" in out
        assert "FAIL" not in out

    def test_failure_exit_1(self, capsys, monkeypatch):
        from lapdp import verify
        bad = verify.CheckResult("forced failure", False, "")
        monkeypatch.setattr(verify, "run", lambda seed, level: [bad])
        code, _, err = run(["verify"], capsys)
        assert code == 1
        assert "forced failure" in err


class TestOutput:
    def test_output_file_lf_and_deterministic(self, tmp_path, capsys):
        path = tmp_path / "out.csv"
        argv = ["compose", RR_LN2_TWICE, "--steps", "11", "--output", str(path)]
        assert cli.main(argv) == 0
        first = path.read_bytes()
        assert cli.main(argv) == 0
        assert path.read_bytes() == first
        assert b"\r" not in first
        first.decode("utf-8")

    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "lapdp.cli", "profile", GAUSS, "--steps", "3"],
                              capture_output=True, text=True, check=True)
        assert proc.stdout.startswith("# command: profile")

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["--version"])
        assert exc.value.code == 0

    def test_spec_document_roundtrip(self, capsys):
        spec = json.dumps({"mechanisms": [{"point_guarantee": {"eps0": 0.1, "delta0": 0}, "repeat": 3}]})
        code, out, _ = run(["compose", spec, "--steps", "3"], capsys)
        assert code == 0
        assert "# mechanisms: 3" in out
