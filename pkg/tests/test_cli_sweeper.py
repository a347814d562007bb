import math
import os

import numpy as np
import pytest

from semrdp import DomainError, closed_form_rate, dsbs_model
from semrdp.cli_sweeper import (
    SweepConfig,
    VerificationConfig,
    check_sandwich,
    main,
    max_workers,
    run_verification,
    sweep_curve,
    zero_rate_threshold,
)

INF = math.inf


def _closed_cfg(**overrides):
    base = dict(
        pi=0.5, q1=0.1, q2=0.1, a=0.2, b=0.2,
        axis="D", axis_min=0.05, axis_max=0.45, steps=9,
        fixed_P=0.05, methods=("closed_form",),
    )
    base.update(overrides)
    return SweepConfig(**base)


def test_sweep_curve_header_and_shape():
    text = sweep_curve(_closed_cfg())
    lines = text.splitlines()
    assert lines[0] == "D,P,R_closed"
    assert len(lines) == 10
    assert text.endswith("\n")
    assert not any(line.endswith(",") for line in lines)


def test_sweep_curve_deterministic():
    assert sweep_curve(_closed_cfg()) == sweep_curve(_closed_cfg())


def test_sweep_curve_infeasible_marker():
    lines = sweep_curve(_closed_cfg()).splitlines()[1:]
    first = lines[0].split(",")
    assert first[0] == "0.050000"
    assert first[2] == "inf"  # below the q = 0.1 noise floor
    last = lines[-1].split(",")
    assert last[2] == "0.000000"


def test_sweep_curve_rows_sorted_by_axis():
    lines = sweep_curve(_closed_cfg()).splitlines()[1:]
    ds = [float(line.split(",")[0]) for line in lines]
    assert ds == sorted(ds)


def test_sweep_curve_p_axis():
    cfg = _closed_cfg(axis="P", axis_min=0.01, axis_max=0.21, steps=5, fixed_D=0.2)
    lines = sweep_curve(cfg).splitlines()
    assert lines[0] == "D,P,R_closed"
    rates = [float(line.split(",")[2]) for line in lines[1:]]
    assert all(b <= a + 1e-9 for a, b in zip(rates, rates[1:]))


def test_sweep_curve_observation_noise_ordering():
    curves = []
    for q in (0.0, 0.1, 0.2):
        cfg = _closed_cfg(q1=q, q2=q, axis_min=0.21, axis_max=0.45, steps=11,
                          fixed_P=INF)
        rates = [
            float(line.split(",")[2])
            for line in sweep_curve(cfg).splitlines()[1:]
        ]
        curves.append(rates)
    for low, high in zip(curves, curves[1:]):
        assert all(l <= h + 1e-9 for l, h in zip(low, high))


def test_sweep_curve_multi_method_header():
    cfg = _closed_cfg(methods=("oracle", "closed_form"), resolution=0.05,
                      axis_min=0.12, axis_max=0.3, steps=3)
    lines = sweep_curve(cfg).splitlines()
    assert lines[0] == "D,P,R_closed,R_oracle"  # canonical column order


def test_sweep_config_validation():
    with pytest.raises(DomainError):
        _closed_cfg(steps=1)
    with pytest.raises(DomainError):
        _closed_cfg(methods=())
    with pytest.raises(DomainError):
        _closed_cfg(methods=("nonsense",))
    with pytest.raises(DomainError):
        _closed_cfg(axis="Q")


def test_fault_injection_breaks_sandwich():
    small = VerificationConfig(
        q_values=(0.1,), p_values=(INF,), d_points=4,
        oracle_resolution=0.05,
    )
    clean, _, gap = check_sandwich(small)
    assert clean.passed, clean.detail
    corrupted, _, gap = check_sandwich(
        VerificationConfig(
            q_values=(0.1,), p_values=(INF,), d_points=4,
            oracle_resolution=0.05, closed_form_bias=0.1,
        )
    )
    assert not corrupted.passed
    assert gap > 0.05


def test_zero_rate_threshold_quick(model_q01):
    threshold = zero_rate_threshold(model_q01, 0.05, 0.05)
    assert threshold == pytest.approx(0.26, abs=0.015)


def test_max_workers_env(monkeypatch):
    monkeypatch.setenv("SEMRDP_THREADS", "3")
    assert max_workers() == 3
    monkeypatch.setenv("SEMRDP_THREADS", "zero")
    with pytest.raises(DomainError):
        max_workers()
    monkeypatch.delenv("SEMRDP_THREADS")
    assert max_workers() >= 1


def test_cli_curve_writes_csv(tmp_path):
    out = tmp_path / "curve.csv"
    code = main([
        "curve", "--q", "0.1", "--pi-x", "0.2", "--P", "0.05",
        "--d-min", "0.1", "--d-max", "0.3", "--steps", "5",
        "--methods", "closed_form", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "D,P,R_closed"
    assert len(lines) == 6


def test_cli_curve_runs_twice_identically(tmp_path):
    args = [
        "curve", "--q", "0.1", "--pi-x", "0.2", "--P", "inf",
        "--d-min", "0.0", "--d-max", "0.5", "--steps", "11",
        "--methods", "closed_form",
    ]
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_cli_conflicting_flags():
    assert main([
        "curve", "--q", "0.1", "--pi-x", "0.2", "--a", "0.3",
        "--methods", "closed_form",
    ]) == 2
    assert main(["curve", "--q", "0.1", "--methods", "closed_form"]) == 2


def test_cli_oracle_point(tmp_path):
    out = tmp_path / "oracle.csv"
    code = main([
        "oracle", "--q", "0.1", "--pi-x", "0.2", "--D", "0.26", "--P", "0.05",
        "--resolution", "0.05", "--out", str(out),
    ])
    assert code == 0
    header, row = out.read_text().splitlines()
    assert header.startswith("D,P,R_oracle")
    assert float(row.split(",")[2]) <= 1e-3


def test_cli_simulate_binning(tmp_path):
    out = tmp_path / "sim.csv"
    code = main([
        "simulate", "--q", "0.1", "--pi-x", "0.2", "--D", "0.2",
        "--margins", "0.4", "--n", "10", "--trials", "12",
        "--seed", "77", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("n,trials,seed,rate_R1,rate_R2,empirical_D")
    assert len(lines) == 2
    assert int(lines[1].split(",")[9]) == 0  # equal rates: no bin failures


def test_cli_simulate_plain_law(tmp_path):
    out = tmp_path / "law.csv"
    code = main([
        "simulate", "--q", "0.1", "--pi-x", "0.2", "--law", "1,1,0,0",
        "--n", "1000", "--trials", "4", "--seed", "5", "--out", str(out),
    ])
    assert code == 0
    row = out.read_text().splitlines()[1].split(",")
    assert float(row[5]) == pytest.approx(0.26, abs=0.05)


def test_cli_config_file_merge(tmp_path):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text("steps = 4\nd-max = 0.3  # comment\n")
    out = tmp_path / "merged.csv"
    code = main([
        "curve", "--config", str(cfg_file), "--q", "0.1", "--pi-x", "0.2",
        "--P", "inf", "--d-min", "0.1", "--methods", "closed_form",
        "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 5  # steps from the config file
    assert lines[-1].split(",")[0] == "0.300000"


def test_cli_simulated_rate_column(tmp_path):
    out = tmp_path / "sim_curve.csv"
    code = main([
        "curve", "--q", "0.1", "--pi-x", "0.2", "--P", "inf",
        "--d-min", "0.2", "--d-max", "0.3", "--steps", "3",
        "--methods", "closed_form,simulate", "--n", "10", "--trials", "10",
        "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "D,P,R_closed,R_sim"
    model = dsbs_model(0.1, 0.2)
    first = lines[1].split(",")
    operating = closed_form_rate(model, 0.2, INF) + 0.4
    if first[3] != "inf":
        assert float(first[3]) == pytest.approx(operating, abs=1e-6)


def test_quick_verification_structure():
    cfg = VerificationConfig(
        q_values=(0.1,), p_values=(INF,), d_points=3, oracle_resolution=0.05,
        transform_laws=2, transform_n=5000, consistency_trials=2,
        consistency_n=2000, binning_trials=10, binning_margins=(0.2, 0.8),
        chain_joints=50,
    )
    summary = run_verification(cfg)
    assert len(summary.criteria) == 9
    text = summary.to_text()
    assert "criterion-1" in text and "overall" in text
    csv = summary.to_csv()
    assert csv.splitlines()[0] == "q,P,D,R_closed,R_oracle"
    assert len(csv.splitlines()) == 1 + 3
