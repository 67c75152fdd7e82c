"""Command-line front end: configs, exit codes, determinism, recipes."""

import math
from pathlib import Path

import pytest

from genbound.cli import main
from genbound.pb_bounded import kl_inverse_upper, xi_factor

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def parse_csv(text):
    lines = text.splitlines()
    meta = [l for l in lines if l.startswith("#")]
    data = [l.split(",") for l in lines if not l.startswith("#")]
    return meta, data[0], data[1:]


def write_cfg(tmp_path, name, body):
    path = tmp_path / name
    path.write_text(body)
    return str(path)


EVAL_TEMPLATE = """\
target = "{op}"

[params]
n = {n}
beta = {beta}
dependency = {dep}
emp_risk = {emp}
"""


class TestEval:
    def test_known_gap_point(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "e.toml", EVAL_TEMPLATE.format(
            op="mcallester", n=100, beta=0.05, dep=1.0, emp=0.0))
        code, out = run(capsys, "eval", cfg)
        assert code == 0
        meta, header, rows = parse_csv(out)
        assert header == ["op", "inputs", "value", "regime", "vacuous",
                          "params"]
        assert len(rows) == 1
        row = dict(zip(header, rows[0]))
        assert row["op"] == "mcallester"
        assert row["regime"] == "sqrt-gap"
        expected = math.sqrt(
            (1.0 + math.log(xi_factor(100) / 0.05)) / 200.0)
        assert float(row["value"]) == expected
        assert round(float(row["value"]), 3) == 0.184
        assert float(row["params"].split("=", 1)[1]) == expected

    def test_zero_risk_seeger_matches_closed_budget(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "e.toml", EVAL_TEMPLATE.format(
            op="seeger_langford", n=200, beta=0.1, dep=0.0, emp=0.0))
        code, out = run(capsys, "eval", cfg)
        assert code == 0
        _, header, rows = parse_csv(out)
        budget = math.log(xi_factor(200) / 0.1) / 200.0
        value = float(dict(zip(header, rows[0]))["value"])
        assert value == kl_inverse_upper(0.0, budget)

    def test_metadata_line_carries_version_and_hash(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "e.toml", EVAL_TEMPLATE.format(
            op="seeger_langford", n=10, beta=0.5, dep=0.0, emp=0.5))
        _, out = run(capsys, "eval", cfg)
        meta, _, _ = parse_csv(out)
        assert len(meta) == 1
        assert meta[0].startswith("# genbound ")
        token = meta[0].rsplit("config=", 1)[1]
        assert len(token) == 12
        int(token, 16)

    def test_out_of_range_parameter_is_usage_error(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "e.toml", EVAL_TEMPLATE.format(
            op="mcallester", n=100, beta=1.5, dep=1.0, emp=0.0))
        code, _ = run(capsys, "eval", cfg)
        assert code == 2

    def test_unknown_operation_is_usage_error(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "e.toml", EVAL_TEMPLATE.format(
            op="not_a_bound", n=100, beta=0.05, dep=1.0, emp=0.0))
        code, _ = run(capsys, "eval", cfg)
        assert code == 2

    def test_unknown_parameter_is_usage_error(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "e.toml", EVAL_TEMPLATE.format(
            op="mcallester", n=100, beta=0.05, dep=1.0, emp=0.0)
            + "typo = 3\n")
        code, _ = run(capsys, "eval", cfg)
        assert code == 2

    def test_missing_parameter_is_usage_error(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "e.toml",
                        'target = "mcallester"\n\n[params]\nn = 100\n')
        code, _ = run(capsys, "eval", cfg)
        assert code == 2

    def test_scalar_ops_report_plain_value(self, tmp_path, capsys):
        cfg = write_cfg(
            tmp_path, "e.toml",
            'target = "kl_inverse_upper"\n\n'
            "[params]\nr_hat = 0.1\nbudget = 0.02\n")
        code, out = run(capsys, "eval", cfg)
        assert code == 0
        _, header, rows = parse_csv(out)
        row = dict(zip(header, rows[0]))
        assert float(row["value"]) == kl_inverse_upper(0.1, 0.02)
        assert row["vacuous"] == "false"


SWEEP_TEMPLATE = """\
target = ["seeger_langford", "mcallester"]
output = "{out}"

[fixed]
beta = 0.05
dependency = 1.0
emp_risk = 0.1

[sweep]
param = "n"
min = 10.0
max = 10000.0
points = {points}
scale = "{scale}"
"""


class TestSweep:
    def test_columns_and_row_count(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        cfg = write_cfg(tmp_path, "s.toml", SWEEP_TEMPLATE.format(
            out=out, points=7, scale="log"))
        code, _ = run(capsys, "sweep", cfg)
        assert code == 0
        _, header, rows = parse_csv(out.read_text())
        assert header == ["n", "seeger_langford", "mcallester"]
        assert len(rows) == 7
        values = [float(r[1]) for r in rows]
        assert values == sorted(values, reverse=True)

    def test_log_scale_has_constant_ratio(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        cfg = write_cfg(tmp_path, "s.toml", SWEEP_TEMPLATE.format(
            out=out, points=13, scale="log"))
        run(capsys, "sweep", cfg)
        _, _, rows = parse_csv(out.read_text())
        xs = [float(r[0]) for r in rows]
        ratios = [b / a for a, b in zip(xs, xs[1:])]
        assert max(ratios) == pytest.approx(min(ratios), rel=1e-12)
        assert xs[0] == pytest.approx(10.0)
        assert xs[-1] == pytest.approx(10000.0)

    def test_linear_scale_has_constant_step(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        cfg = write_cfg(tmp_path, "s.toml", SWEEP_TEMPLATE.format(
            out=out, points=5, scale="linear"))
        run(capsys, "sweep", cfg)
        _, _, rows = parse_csv(out.read_text())
        xs = [float(r[0]) for r in rows]
        steps = [b - a for a, b in zip(xs, xs[1:])]
        assert max(steps) == pytest.approx(min(steps), rel=1e-12)

    def test_reruns_are_byte_identical(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        cfg = write_cfg(tmp_path, "s.toml", SWEEP_TEMPLATE.format(
            out=out, points=9, scale="log"))
        run(capsys, "sweep", cfg)
        first = out.read_bytes()
        run(capsys, "sweep", cfg)
        assert out.read_bytes() == first

    def test_thread_cap_does_not_change_output(self, tmp_path, capsys,
                                               monkeypatch):
        out = tmp_path / "s.csv"
        cfg = write_cfg(tmp_path, "s.toml", SWEEP_TEMPLATE.format(
            out=out, points=9, scale="log"))
        monkeypatch.setenv("GENBOUND_THREADS", "1")
        run(capsys, "sweep", cfg)
        serial = out.read_bytes()
        monkeypatch.setenv("GENBOUND_THREADS", "4")
        run(capsys, "sweep", cfg)
        assert out.read_bytes() == serial

    def test_unwritable_output_is_io_error(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path, "s.toml", SWEEP_TEMPLATE.format(
            out=tmp_path / "missing" / "s.csv", points=5, scale="log"))
        code, _ = run(capsys, "sweep", cfg)
        assert code == 3

    def test_sweep_param_clashing_with_fixed(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        body = SWEEP_TEMPLATE.format(out=out, points=5, scale="log")
        body = body.replace('param = "n"', 'param = "beta"')
        body = body.replace("min = 10.0", "min = 0.01")
        body = body.replace("max = 10000.0", "max = 0.2")
        cfg = write_cfg(tmp_path, "s.toml", body)
        code, _ = run(capsys, "sweep", cfg)
        assert code == 2

    def test_single_point_rejected(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        cfg = write_cfg(tmp_path, "s.toml", SWEEP_TEMPLATE.format(
            out=out, points=1, scale="log"))
        code, _ = run(capsys, "sweep", cfg)
        assert code == 2

    def test_out_of_domain_points_become_nan(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        body = SWEEP_TEMPLATE.format(out=out, points=3, scale="linear")
        body = body.replace('param = "n"', 'param = "emp_risk"')
        body = body.replace("min = 10.0", "min = 0.5")
        body = body.replace("max = 10000.0", "max = 1.5")
        body = body.replace("emp_risk = 0.1\n", "n = 100\n")
        cfg = write_cfg(tmp_path, "s.toml", body)
        code, _ = run(capsys, "sweep", cfg)
        assert code == 0
        _, _, rows = parse_csv(out.read_text())
        assert rows[0][1] != "nan"
        assert rows[2][1] == "nan"
        assert rows[2][2] == "nan"


def read_data_rows(path):
    return [l for l in Path(path).read_text().splitlines()
            if not l.startswith("#")]


class TestFigure:
    def test_variance_caption_row_matches_reference(self, tmp_path, capsys):
        code, _ = run(capsys, "figure", "variance_bounds",
                      "--out", str(tmp_path))
        assert code == 0
        got = read_data_rows(tmp_path / "variance_bounds.csv")
        want = read_data_rows(GOLDEN / "variance_bounds.csv")
        assert got[0] == want[0]
        assert got[1] == want[1]
        assert got[1].startswith("caption,0,")

    def test_emitted_files_are_deterministic(self, tmp_path, capsys):
        a = tmp_path / "a"
        b = tmp_path / "b"
        run(capsys, "figure", "dp_pacbayes", "--out", str(a))
        run(capsys, "figure", "dp_pacbayes", "--out", str(b))
        assert (a / "dp_pacbayes.csv").read_bytes() == \
            (b / "dp_pacbayes.csv").read_bytes()
        assert (a / "dp_pacbayes.svg").read_bytes() == \
            (b / "dp_pacbayes.svg").read_bytes()

    def test_svg_is_native_and_selfcontained(self, tmp_path, capsys):
        run(capsys, "figure", "glm_comparison", "--out", str(tmp_path))
        svg = (tmp_path / "glm_comparison.svg").read_text()
        assert svg.startswith("<svg ")
        assert svg.rstrip().endswith("</svg>")
        assert "polyline" in svg
        assert "href" not in svg

    def test_override_changes_the_figure(self, tmp_path, capsys):
        a = tmp_path / "a"
        b = tmp_path / "b"
        run(capsys, "figure", "variance_bounds", "--out", str(a))
        code, _ = run(capsys, "figure", "variance_bounds", "--out", str(b),
                      "--set", "beta=0.1")
        assert code == 0
        base = read_data_rows(a / "variance_bounds.csv")[1]
        moved = read_data_rows(b / "variance_bounds.csv")[1]
        assert base != moved

    def test_unknown_override_is_usage_error(self, tmp_path, capsys):
        code, _ = run(capsys, "figure", "variance_bounds",
                      "--out", str(tmp_path), "--set", "zeta=1")
        assert code == 2

    def test_unknown_figure_is_usage_error(self, tmp_path, capsys):
        code, _ = run(capsys, "figure", "no_such_figure",
                      "--out", str(tmp_path))
        assert code == 2

    def test_glm_panels_cover_both_dimensions(self, tmp_path, capsys):
        run(capsys, "figure", "glm_comparison", "--out", str(tmp_path))
        rows = read_data_rows(tmp_path / "glm_comparison.csv")
        panels = {r.split(",")[0] for r in rows[1:]}
        assert panels == {"d=1", "d=250"}


class TestOracle:
    def test_gd_counterexample_decoder_is_exact(self, capsys):
        code, out = run(capsys, "oracle", "gd-counterexample", "--seed", "7",
                        "--set", "n=5", "--set", "replicates=500")
        assert code == 0
        _, header, rows = parse_csv(out)
        row = dict(zip(header, rows[0]))
        assert row["decode_error_given_E"] == "0"
        assert float(row["p_event_E"]) >= 0.1
        assert float(row["mean_gen"]) > 0.0

    def test_mixture_kl_columns_are_ordered(self, capsys):
        for seed in ("0", "1", "2", "3"):
            code, out = run(capsys, "oracle", "mixture-kl", "--seed", seed)
            assert code == 0
            _, header, rows = parse_csv(out)
            row = dict(zip(header, rows[0]))
            exact = float(row["exact"])
            lse = float(row["log_sum_exp"])
            min_form = float(row["min_form"])
            assert 0.0 <= exact <= lse <= min_form

    def test_types_count_small_case(self, capsys):
        code, out = run(capsys, "oracle", "types",
                        "--set", "Z=2", "--set", "n=5")
        assert code == 0
        _, header, rows = parse_csv(out)
        assert dict(zip(header, rows[0]))["count"] == "6"

    def test_types_accepts_lowercase_key(self, capsys):
        _, out = run(capsys, "oracle", "types",
                     "--set", "z=3", "--set", "n=4")
        _, header, rows = parse_csv(out)
        assert dict(zip(header, rows[0]))["count"] == "15"

    def test_glm_estimate_brackets_exact(self, capsys):
        code, out = run(capsys, "oracle", "glm", "--seed", "1",
                        "--set", "d=2", "--set", "n=10",
                        "--set", "replicates=20000")
        assert code == 0
        _, header, rows = parse_csv(out)
        row = dict(zip(header, rows[0]))
        assert row["within_3se"] == "true"
        gap = abs(float(row["estimate"]) - float(row["exact"]))
        assert gap <= 3.0 * float(row["std_error"])

    def test_sgld_reports_both_bounds(self, capsys):
        code, out = run(capsys, "oracle", "sgld", "--seed", "2",
                        "--set", "T=10")
        assert code == 0
        _, header, rows = parse_csv(out)
        row = dict(zip(header, rows[0]))
        assert float(row["incoherence_bound"]) <= float(row["pensia_bound"])
        assert row["incoherence_leq_pensia"] == "true"

    def test_reruns_are_byte_identical(self, capsys):
        _, first = run(capsys, "oracle", "gd-counterexample", "--seed", "3",
                       "--set", "n=4", "--set", "replicates=400")
        _, second = run(capsys, "oracle", "gd-counterexample", "--seed", "3",
                        "--set", "n=4", "--set", "replicates=400")
        assert first == second

    def test_unknown_oracle_is_usage_error(self, capsys):
        code, _ = run(capsys, "oracle", "nope")
        assert code == 2

    def test_bad_set_syntax_is_usage_error(self, capsys):
        code, _ = run(capsys, "oracle", "types", "--set", "n5")
        assert code == 2

    def test_negative_seed_is_usage_error(self, capsys):
        code, _ = run(capsys, "oracle", "glm", "--seed", "-1")
        assert code == 2
