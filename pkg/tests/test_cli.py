import json
import math

import numpy as np
import pytest

from supportlab import bounds
from supportlab.cli import load_instance, main, save_instance
from supportlab.model import (
    ProblemInstance,
    flat_signal,
    gaussian_design,
    make_pattern,
    synthesize_observation,
)


def run(args):
    return main(list(args))


# -------------------------------------------------------------------- decode


def test_decode_noiseless_recovers_planted_support(tmp_path):
    out = tmp_path / "decode.json"
    code = run(["decode", "--n", "8", "--p", "10", "--k", "2", "--seed", "3",
                "--noiseless", "--out", str(out)])
    assert code == 0
    record = json.loads(out.read_text())
    assert record["declared_support"] == record["true_support"] == [1, 2]
    assert record["recovered"] is True
    assert record["candidates_scored"] == math.comb(10, 2)


def test_decode_same_config_identical_bytes(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["decode", "--n", "8", "--p", "10", "--k", "2", "--seed", "11", "--out"]
    assert run(args + [str(a)]) == 0
    assert run(args + [str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_decode_k_above_p_usage_error(capsys):
    assert run(["decode", "--n", "4", "--p", "3", "--k", "5", "--seed", "0"]) == 2
    assert "error:" in capsys.readouterr().err


def test_decode_budget_exit(tmp_path):
    code = run(["decode", "--n", "8", "--p", "24", "--k", "8", "--seed", "0",
                "--cap-candidates", "100", "--out", str(tmp_path / "x.json")])
    assert code == 2


def test_decode_instance_file_roundtrip(tmp_path):
    design = gaussian_design(8, 9, seed=5)
    sig = flat_signal(make_pattern([2, 6], 9), 1.5)
    y = synthesize_observation(design, sig, noise_seed=5, noiseless=True)
    inst = ProblemInstance(design=design, signal=sig, observation=y)
    path = tmp_path / "instance.json"
    save_instance(str(path), inst)
    loaded = load_instance(str(path))
    assert loaded.true_pattern.indices == (2, 6)
    assert np.allclose(loaded.observation, inst.observation)

    out = tmp_path / "decoded.json"
    assert run(["decode", "--instance", str(path), "--out", str(out)]) == 0
    record = json.loads(out.read_text())
    assert record["declared_support"] == [3, 7]  # 1-based
    assert record["recovered"] is True


# -------------------------------------------------------------------- bounds


def test_bound_pairwise_vacuous_warning(tmp_path, capsys):
    out = tmp_path / "b.json"
    code = run(["bound", "pairwise", "--n", "8", "--p", "10", "--k", "2",
                "--seed", "4", "--wrong", "1,2", "--out", str(out)])
    assert code == 0
    assert "vacuous" in capsys.readouterr().err
    assert json.loads(out.read_text())["probability"] == 1.0


def test_bound_union_closed_requires_p_above_2k(capsys):
    code = run(["bound", "union-closed", "--n", "100", "--p", "4", "--k", "2",
               "--beta-min-sq", "1.0", "--C", "9"])
    assert code == 2
    assert "p > 2k" in capsys.readouterr().err


def test_bound_union_sum_matches_library(tmp_path):
    out = tmp_path / "u.json"
    assert run(["bound", "union-sum", "--n", "40", "--p", "12", "--k", "2",
                "--beta-min-sq", "1.0", "--out", str(out)]) == 0
    record = json.loads(out.read_text())
    lib = bounds.union_error_bound_sum(40, 12, 2, 1.0)
    assert record["log_bound"] == lib.log_bound
    assert record["probability"] == lib.probability


def test_bound_averaged_and_mgf(tmp_path):
    out = tmp_path / "a.json"
    assert run(["bound", "averaged", "--n", "10", "--k", "1", "--d", "1",
                "--miss-energy", "1.0", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["log_bound"] == pytest.approx(
        -0.2125623271916872, abs=1e-12
    )
    out2 = tmp_path / "m.json"
    assert run(["bound", "mgf", "--n", "8", "--p", "10", "--k", "2", "--seed", "4",
                "--wrong", "2,3", "--t", "0.1", "--out", str(out2)]) == 0
    assert "log_mgf" in json.loads(out2.read_text())


# ---------------------------------------------------------------- conditions


def test_conditions_single_point(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["conditions", "--point", "100:2:1.0", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("p,k,beta_min_sq,convexity_ok,sufficient_n,necessary_n,gap_ratio")
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert float(fields[5]) == pytest.approx(13.835637846058212, rel=1e-9)


def test_conditions_degenerate_point_reports_row_error(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["conditions", "--point", "100:2:1.0", "--point", "100:2:0.0",
                "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 3
    assert "positive" in lines[2]


def test_conditions_all_rows_failing_is_an_error(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["conditions", "--point", "100:2:0.0", "--out", str(out)]) == 2


def test_conditions_regime_shorthand(tmp_path):
    out = tmp_path / "r.csv"
    assert run(["conditions", "--regime", "linear_unit", "--p-grid", "64,128,256",
                "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("regime,p,k,beta_min_sq")
    assert len(lines) == 4
    assert lines[1].startswith("linear_unit,64,16,")


# ------------------------------------------------------------------------ mc


def test_mc_seeded_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["mc", "pairwise", "--n", "8", "--p", "12", "--k", "2", "--seed", "21",
            "--wrong", "2,3", "--trials", "4000", "--out"]
    assert run(args + [str(a)]) == 0
    assert run(args + [str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_mc_worker_flag_does_not_change_bytes(tmp_path):
    a, b = tmp_path / "w1.csv", tmp_path / "w5.csv"
    base = ["mc", "recover", "--n", "12", "--p", "7", "--k", "2", "--seed", "9",
            "--trials", "300"]
    assert run(base + ["--workers", "1", "--out", str(a)]) == 0
    assert run(base + ["--workers", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_mc_domination_column(tmp_path):
    out = tmp_path / "mc.csv"
    assert run(["mc", "pairwise", "--n", "10", "--p", "10", "--k", "2", "--seed", "2",
                "--wrong", "2,3", "--trials", "2000", "--level", "0.99",
                "--out", str(out)]) == 0
    header, row = out.read_text().splitlines()
    fields = dict(zip(header.split(","), row.split(",")))
    assert fields["dominated"] == "True"
    assert fields["error"] == ""


# --------------------------------------------------------------------- sweep


def test_sweep_empty_values_gives_header_only(tmp_path):
    out = tmp_path / "s.csv"
    assert run(["sweep", "--target", "pairwise", "--n", "8", "--p", "10", "--k", "2",
                "--seed", "5", "--wrong", "2,3", "--vary", "n", "--values", "",
                "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 and lines[0].startswith("target,")


def test_sweep_deterministic_and_continues_past_bad_rows(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--target", "pairwise", "--p", "10", "--k", "2", "--seed", "5",
            "--wrong", "2,3", "--trials", "400", "--vary", "n",
            "--values", "6,0,12", "--out"]
    assert run(args + [str(a), "--workers", "1"]) == 0
    assert run(args + [str(b), "--workers", "3"]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert len(lines) == 4
    assert "n >= 1" in lines[2]  # bad row reported in place, sweep continued


# -------------------------------------------------------------------- config


def test_emit_config_round_trip(tmp_path):
    cfg = tmp_path / "cfg.json"
    first = tmp_path / "first.csv"
    second = tmp_path / "second.csv"
    assert run(["mc", "pairwise", "--n", "9", "--p", "11", "--k", "2", "--seed", "33",
                "--wrong", "3,4", "--trials", "1500", "--emit-config", str(cfg),
                "--out", str(first)]) == 0
    data = json.loads(cfg.read_text())
    assert data["command"] == ["mc", "pairwise"]
    assert run(["mc", "pairwise", "--config", str(cfg), "--out", str(second)]) == 0
    # --out came from the command line; every other parameter from the config
    assert first.read_bytes() == second.read_bytes()


def test_config_explicit_flags_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    assert run(["decode", "--n", "8", "--p", "10", "--k", "2", "--seed", "3",
                "--noiseless", "--emit-config", str(cfg),
                "--out", str(tmp_path / "x.json")]) == 0
    out = tmp_path / "y.json"
    assert run(["decode", "--config", str(cfg), "--seed", "4", "--out", str(out)]) == 0
    record = json.loads(out.read_text())
    assert record["recovered"] is True  # still noiseless via config, new seed


# -------------------------------------------------------------------- verify


def test_verify_passes_and_fault_injection_fails():
    assert run(["verify"]) == 0
    assert run(["verify", "--inject-fault"]) == 1


def test_verify_verbose_prints_residuals(capsys):
    assert run(["verify", "--verbose"]) == 0
    out = capsys.readouterr().out
    assert "chernoff-constants" in out
    assert "worst" in out or "err" in out
