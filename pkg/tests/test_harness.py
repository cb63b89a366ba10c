import json

import numpy as np
import pytest

import maxprod_kantorovich as mk
from maxprod_kantorovich.cli import main
from maxprod_kantorovich.harness import (
    LAMBDA_SCAN,
    EVAL_HEADER,
    RATE_HEADER,
    SWEEP_HEADER,
    emit_report,
    ordered_parallel_map,
    report_from_json,
)

pytestmark = pytest.mark.filterwarnings("ignore:kernel 'step'")

FAST = dict(n_list=(8, 16, 32), grid=512)


class TestConfig:
    def test_defaults_valid(self):
        cfg = mk.ExperimentConfig()
        assert cfg.n_list == (8, 16, 32, 64, 128, 256)
        assert len(cfg.config_hash) == 16

    def test_hash_tracks_content(self):
        a = mk.ExperimentConfig()
        b = mk.ExperimentConfig(kernel="tanh")
        assert a.config_hash != b.config_hash
        assert a.config_hash == mk.ExperimentConfig().config_hash

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            mk.ExperimentConfig(n_list=())
        with pytest.raises(ValueError):
            mk.ExperimentConfig(n_list=(16, 8))
        with pytest.raises(ValueError):
            mk.ExperimentConfig(grid=32)
        with pytest.raises(ValueError):
            mk.ExperimentConfig(grid=101)
        with pytest.raises(ValueError):
            mk.ExperimentConfig(lambda_policy="random")
        with pytest.raises(mk.OperatorUndefinedError):
            mk.ExperimentConfig(interval=(0.4, 0.9), n_list=(1,))

    def test_interval_must_match_function(self):
        cfg = mk.ExperimentConfig(interval=(0.0, 2.0), n_list=(8,))
        with pytest.raises(ValueError, match="interval"):
            mk.run_uniform_convergence(cfg)

    def test_json_roundtrip(self, tmp_path):
        cfg = mk.ExperimentConfig(kernel="tanh", **FAST)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg.canonical()))
        again = mk.ExperimentConfig.from_json(path)
        assert again.config_hash == cfg.config_hash

    def test_override_skips_none(self):
        cfg = mk.ExperimentConfig()
        same = cfg.override(kernel=None, grid=None)
        assert same.config_hash == cfg.config_hash
        changed = cfg.override(kernel="step")
        assert changed.kernel == "step"

    def test_scan_policy(self):
        cfg = mk.ExperimentConfig(lambda_policy="scan")
        assert cfg.active_lambdas() == LAMBDA_SCAN


def test_ordered_parallel_map_is_order_stable():
    items = list(range(40))
    serial = ordered_parallel_map(lambda i: i * i, items, workers=1)
    parallel = ordered_parallel_map(lambda i: i * i, items, workers=8)
    assert serial == parallel == [i * i for i in items]


class TestRunVerbs:
    def test_uniform_sweep(self):
        rep = mk.run_uniform_convergence(mk.ExperimentConfig(function="f2", **FAST))
        assert rep.kind == "uniform"
        assert len(rep.records) == 3
        errs = [r["sup_error"] for r in rep.records]
        assert errs[-1] < errs[0]
        assert all(r["denom_min"] > 0 for r in rep.records)
        # C1 function on a clean kernel: envelope rows are present and hold
        assert all(r["pass"] for r in rep.records)

    def test_uniform_rejects_discontinuous(self):
        with pytest.raises(ValueError, match="continuous"):
            mk.run_uniform_convergence(mk.ExperimentConfig(function="f4", **FAST))

    def test_uniform_on_sign_changing(self):
        rep = mk.run_uniform_convergence(mk.ExperimentConfig(function="f5", **FAST))
        errs = [r["sup_error"] for r in rep.records]
        assert errs[-1] < errs[0]

    def test_modular_sweep_continuous(self):
        rep = mk.run_modular_convergence(
            mk.ExperimentConfig(function="f1", n_list=(8, 64, 256), grid=1024)
        )
        assert rep.summary["passed"]
        lams = {r["lambda"] for r in rep.records}
        assert lams == {0.25, 1.0, 4.0}

    def test_modular_scan_discontinuous(self):
        rep = mk.run_modular_convergence(
            mk.ExperimentConfig(function="f4", lambda_policy="scan",
                                n_list=(8, 32, 128), grid=1024)
        )
        assert "lambda_found" in rep.summary
        assert len(rep.records) == 3 * len(LAMBDA_SCAN)

    def test_inequality_all_pairs(self):
        rep = mk.run_modular_inequality(
            mk.ExperimentConfig(lambdas=(0.5, 1.0, 2.0), **FAST)
        )
        assert rep.summary["passed"]
        assert len(rep.records) == 6 * 3 * 3  # pairs x n x lambda

    def test_inequality_identical_pair_trivial(self):
        rep = mk.run_modular_inequality(
            mk.ExperimentConfig(n_list=(8,), grid=512, lambdas=(1.0,)),
            pairs=[("f1", "f1")],
        )
        (row,) = rep.records
        assert row["bound_lhs"] <= 1e-12 and row["bound_rhs"] <= 1e-12
        assert row["pass"]

    def test_inequality_rejects_signed_pair(self):
        with pytest.raises(ValueError, match="non-negative"):
            mk.run_modular_inequality(
                mk.ExperimentConfig(n_list=(8,), grid=512), pairs=[("f1", "f5")]
            )

    def test_rate_suite(self):
        rep = mk.run_rate_suite(mk.ExperimentConfig(n_list=(8, 32), grid=1024))
        assert rep.summary["passed"] and rep.summary["cells"] == 10
        assert {r["f"] for r in rep.records} == {"f1", "f2", "f3", "f4", "f5"}

    def test_rate_suite_step_kernel_warns_in_metadata(self):
        rep = mk.run_rate_suite(
            mk.ExperimentConfig(kernel="step", n_list=(8, 32), grid=1024)
        )
        assert any("unimodality" in w for w in rep.metadata["warnings"])

    def test_validate_kernel_records(self):
        rep = mk.run_validate_kernel(mk.ExperimentConfig(kernel="logistic"))
        keys = {r["key"] for r in rep.records}
        assert {"value_at_zero", "value_at_two", "l1_norm", "sigma2"} <= keys
        assert rep.summary["passed"]

    def test_eval_records(self):
        rep = mk.run_eval(mk.ExperimentConfig(function="f1", n_list=(8,), grid=128))
        assert len(rep.records) == 129
        assert set(rep.records[0]) == set(EVAL_HEADER)


class TestEmission:
    def test_csv_schema_sweep(self, tmp_path):
        rep = mk.run_uniform_convergence(mk.ExperimentConfig(**FAST))
        (path,) = emit_report(rep, formats=("csv",), out_dir=tmp_path)
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(SWEEP_HEADER)
        assert len(lines) == 1 + 3

    def test_csv_schema_rate(self, tmp_path):
        rep = mk.run_rate_suite(mk.ExperimentConfig(n_list=(8,), grid=512))
        (path,) = emit_report(rep, formats=("csv",), out_dir=tmp_path)
        assert path.read_text().splitlines()[0] == ",".join(RATE_HEADER)

    def test_json_roundtrip_and_reemit(self, tmp_path):
        rep = mk.run_uniform_convergence(mk.ExperimentConfig(**FAST))
        (jpath,) = emit_report(rep, formats=("json",), out_dir=tmp_path)
        loaded = report_from_json(jpath)
        assert loaded.kind == rep.kind
        (cpath,) = emit_report(loaded, formats=("csv",), out_dir=tmp_path / "again")
        direct = emit_report(rep, formats=("csv",), out_dir=tmp_path / "direct")[0]
        assert cpath.read_bytes() == direct.read_bytes()

    def test_svg_one_polyline_per_lambda(self, tmp_path):
        rep = mk.run_modular_convergence(
            mk.ExperimentConfig(function="f1", lambdas=(0.5, 1.0, 2.0), **FAST)
        )
        (path,) = emit_report(rep, formats=("svg",), out_dir=tmp_path)
        text = path.read_text()
        assert text.count("<polyline") == 3
        assert "slope -1" in text

    def test_determinism_two_runs(self, tmp_path):
        cfg = mk.ExperimentConfig(function="f1", **FAST)
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        for out in (out_a, out_b):
            rep = mk.run_uniform_convergence(cfg)
            emit_report(rep, formats=("csv", "json", "svg"), out_dir=out)
        for name in sorted(p.name for p in out_a.iterdir()):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_unknown_format_rejected(self, tmp_path):
        rep = mk.run_uniform_convergence(mk.ExperimentConfig(**FAST))
        with pytest.raises(ValueError):
            emit_report(rep, formats=("pdf",), out_dir=tmp_path)


class TestCli:
    def test_sweep_uniform_full_run(self, tmp_path, capsys):
        code = main([
            "sweep-uniform", "--kernel", "ramp", "--function", "f2",
            "--n", "8,16,32,64,128,256", "--grid", "1024",
            "--out", str(tmp_path), "--format", "csv,json",
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert "passed: True" in out
        assert (tmp_path / [p.name for p in tmp_path.iterdir()][0]).exists()

    def test_truncated_sweep_fails_threshold(self, tmp_path):
        code = main([
            "sweep-uniform", "--function", "f3", "--n", "8,16",
            "--grid", "512", "--out", str(tmp_path),
        ])
        assert code == 1

    def test_lambda_scan_flag(self, tmp_path):
        code = main([
            "sweep-modular", "--function", "f4", "--lambda", "scan",
            "--n", "8,32", "--grid", "512", "--out", str(tmp_path),
        ])
        assert code in (0, 1)
        jpath = next(p for p in tmp_path.iterdir() if p.suffix == ".json")
        data = json.loads(jpath.read_text())
        assert data["config"]["lambda_policy"] == "scan"

    def test_report_verb_reemits(self, tmp_path):
        main([
            "sweep-uniform", "--function", "f1", "--n", "8,16", "--grid", "512",
            "--out", str(tmp_path), "--format", "json",
        ])
        jpath = next(p for p in tmp_path.iterdir() if p.suffix == ".json")
        code = main(["report", "--in", str(jpath), "--format", "svg",
                     "--out", str(tmp_path / "re")])
        assert code == 0
        assert any(p.suffix == ".svg" for p in (tmp_path / "re").iterdir())

    def test_validate_kernel_step_exits_nonzero(self, tmp_path):
        code = main(["validate-kernel", "--kernel", "step", "--out", str(tmp_path)])
        assert code == 1

    def test_custom_csv_kernel(self, tmp_path):
        xs = np.linspace(-6, 6, 481)
        ys = np.clip(xs / 3.0 + 0.5, 0.0, 1.0)
        table = tmp_path / "ramp_table.csv"
        table.write_text("\n".join(f"{x},{y}" for x, y in zip(xs, ys)))
        code = main([
            "eval", "--kernel", str(table), "--function", "f1",
            "--n", "8", "--grid", "128", "--out", str(tmp_path / "out"),
        ])
        assert code == 0
