"""CLI subcommands, exit codes, and output reproducibility."""

import json

import pytest

from framecap.cli import main


def test_gen_and_verify_round_trip(tmp_path, capsys):
    path = tmp_path / "etf.txt"
    assert main(["gen", "--kind", "etf-diffset", "--q", "7", "--out", str(path)]) == 0
    assert path.exists()
    assert main(["verify", "--frame", str(path), "--level", "etf"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out


def test_gen_steiner_with_incidence_export(tmp_path, capsys):
    inc_path = tmp_path / "matrix.csv"
    code = main(
        ["gen", "--kind", "etf-steiner", "--steiner-k", "2", "--steiner-v", "4",
         "--method", "pairs", "--incidence-out", str(inc_path)]
    )
    assert code == 0
    assert len(inc_path.read_text().splitlines()) == 6
    # rebuild from the exported incidence
    code = main(
        ["gen", "--kind", "etf-steiner", "--steiner-k", "2", "--incidence-in", str(inc_path)]
    )
    assert code == 0
    assert "6x16" in capsys.readouterr().out


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["gen", "--kind", "wavelet"])
    assert exc.value.code == 1


def test_missing_option_is_usage_error(capsys):
    assert main(["gen", "--kind", "lpf"]) == 1  # no --m/--n


def test_infeasible_exit_code(capsys):
    assert main(["gen", "--kind", "sparse", "--m", "5", "--n", "7", "--d", "2"]) == 2


def test_construction_failure_exit_code(capsys):
    code = main(
        ["gen", "--kind", "etf-steiner", "--steiner-k", "3", "--steiner-v", "21",
         "--method", "backtracking", "--budget", "5"]
    )
    assert code == 3


def test_capacity_command(capsys):
    assert main(["capacity", "--kind", "lpf", "--m", "16", "--n", "32", "--p", "0.5",
                 "--snr-db", "30", "--trials", "5"]) == 0
    out = capsys.readouterr().out
    assert "capacity/user" in out and "singular fraction" in out


def test_spectrum_command_writes_csv(tmp_path, capsys):
    code = main(["spectrum", "--kind", "gaussian", "--m", "16", "--n", "32", "--k", "8",
                 "--trials", "10", "--ref", "mp", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "spectrum_gaussian.csv").exists()
    assert (tmp_path / "spectrum_gaussian_hist.csv").exists()
    assert "KS distance" in capsys.readouterr().out


def test_sweep_cli_reproducible_and_workers_agree(tmp_path, capsys):
    cfg = {
        "kinds": ["gaussian", "sparse"],
        "p": 0.5,
        "snr_db": [30.0],
        "betas": [0.5, 1.0],
        "trials": 6,
        "seed": 13,
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(cfg))
    args = ["sweep", "--config", str(cfg_path), "--no-figures"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0
    csv_a = (tmp_path / "a" / "sweep.csv").read_bytes()
    csv_b = (tmp_path / "b" / "sweep.csv").read_bytes()
    assert csv_a == csv_b
    assert main(args + ["--out", str(tmp_path / "c"), "--workers", "2"]) == 0
    assert (tmp_path / "c" / "sweep.csv").read_bytes() == csv_a


def test_sweep_flag_overrides_config(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"kinds": ["lpf"], "p": 0.5, "betas": [1.0], "trials": 4}))
    code = main(["sweep", "--config", str(cfg_path), "--betas", "0.8,1.0",
                 "--no-figures", "--out", str(tmp_path / "o")])
    assert code == 0
    lines = (tmp_path / "o" / "sweep.csv").read_text().splitlines()
    assert len(lines) == 3  # header + two beta cells


def test_sweep_unknown_config_key_usage_error(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"kinds": ["lpf"], "p": 0.5, "mmin": 64}))
    assert main(["sweep", "--config", str(cfg_path), "--out", str(tmp_path / "o")]) == 1


def test_sweep_empty_plan_exit_code(tmp_path, capsys):
    assert main(["sweep", "--kinds", "sparse", "--p", "0.9", "--betas", "0.95",
                 "--out", str(tmp_path / "o")]) == 2


def test_optimal_and_slope_from_csv(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["sweep", "--kinds", "lpf", "--p", "0.5", "--betas", "0.8,0.9,1.0",
                 "--snr-db", "30", "--trials", "5", "--seed", "4", "--no-figures",
                 "--out", str(out)]) == 0
    table = str(out / "sweep.csv")
    assert main(["optimal", "--table", table, "--kind", "lpf", "--snr-db", "30",
                 "--measure", "cap_res"]) == 0
    assert main(["slope", "--table", table, "--kind", "lpf", "--snr-db", "30",
                 "--beta0", "0.95", "--measure", "cap_res"]) == 0
    text = capsys.readouterr().out
    assert "optimal beta" in text and "slope" in text
