"""Sweep planning, execution, and table analyses."""

import math

import pytest

from framecap.errors import DomainError, EmptyPlan, InsufficientGrid, NoFiniteRows
from framecap.sweep import (
    SweepConfig,
    SweepRow,
    config_from_mapping,
    find_optimal_beta,
    p_regime,
    plan_sweep,
    run_sweep,
    slope_at,
)


def make_row(kind="lpf", beta=0.9, snr=30.0, value=1.0, skipped="", beta_act=None, **extra):
    fields = dict(
        kind=kind,
        p=0.5,
        beta_req=beta,
        snr_db=snr,
        beta_act=beta if beta_act is None else beta_act,
        gamma_act=0.5,
        m=64,
        n=128,
        k=64,
        cap_user=value,
        cap_user_se=0.01,
        cap_res=value,
        cap_res_se=0.01,
        pcap_user=value - 1,
        pcap_res=value - 1,
        lgm=-1.0,
        singular_frac=0.0,
        skipped_reason=skipped,
    )
    fields.update(extra)
    if skipped:
        for key in ("beta_act", "gamma_act", "m", "n", "k", "cap_user", "cap_user_se",
                    "cap_res", "cap_res_se", "pcap_user", "pcap_res", "lgm", "singular_frac"):
            fields[key] = None
    return SweepRow(**fields)


# --- config ---------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(DomainError):
        SweepConfig(kinds=("lpf",), p=0.5, m_min=50)
    with pytest.raises(DomainError):
        SweepConfig(kinds=("wavelet",), p=0.5)
    with pytest.raises(DomainError):
        SweepConfig(kinds=("lpf",), p=1.5)
    with pytest.raises(DomainError):
        SweepConfig(kinds=("lpf",), p=0.5, betas=(0.5, 1.2))
    with pytest.raises(DomainError):
        SweepConfig(kinds=(), p=0.5)


def test_config_from_mapping_rejects_unknown_keys():
    with pytest.raises(DomainError):
        config_from_mapping({"kinds": ["lpf"], "p": 0.5, "snr": [30]})
    with pytest.raises(DomainError):
        config_from_mapping({"p": 0.5})
    cfg = config_from_mapping({"kinds": ["lpf"], "p": 0.5})
    assert cfg.betas == tuple(round(0.5 + 0.05 * i, 2) for i in range(11))
    assert cfg.m_min == 64 and cfg.trials == 50 and cfg.d == 2


def test_p_regime_annotation():
    assert "small" in p_regime(0.1)
    assert "medium" in p_regime(0.5)
    assert "large" in p_regime(0.9)


# --- planning --------------------------------------------------------------------


def test_plan_sparse_feasibility():
    cfg = SweepConfig(kinds=("sparse",), p=0.9, betas=(0.9,), d=2)
    (ok,) = plan_sweep(cfg)  # gamma = 1, row weight 2
    assert not ok.skipped_reason
    assert (ok.m, ok.n) == (64, 64)
    # gamma = 0.8: the row weight d/gamma = 2.5 is not an integer
    cfg = SweepConfig(kinds=("sparse",), p=0.72, betas=(0.9,), d=2)
    with pytest.raises(EmptyPlan):
        plan_sweep(cfg)
    cfg = SweepConfig(kinds=("sparse", "lpf"), p=0.72, betas=(0.9,), d=2)
    cells = plan_sweep(cfg)
    assert "not an integer" in cells[0].skipped_reason
    assert not cells[1].skipped_reason  # lpf unaffected at the same cell


def test_plan_fully_active_square():
    cfg = SweepConfig(kinds=("lpf",), p=1.0, betas=(1.0,))
    (cell,) = plan_sweep(cfg)
    assert cell.m == cell.n == cell.k == 64


def test_plan_beta_below_p_skipped():
    cfg = SweepConfig(kinds=("gaussian",), p=0.75, betas=(0.5, 0.75))
    cells = plan_sweep(cfg)
    assert "gamma > 1" in cells[0].skipped_reason
    assert not cells[1].skipped_reason


def test_plan_lpf_dimension_choice():
    cfg = SweepConfig(kinds=("lpf",), p=0.5, betas=(0.95,))
    (cell,) = plan_sweep(cfg)
    # gamma = 10/19: the smallest multiple of 10 at or above 64 is 70
    assert (cell.m, cell.n) == (70, 133)
    assert cell.k == round(0.5 * 133)


def test_plan_empty_raises():
    cfg = SweepConfig(kinds=("sparse",), p=0.9, betas=(0.95,))
    with pytest.raises(EmptyPlan):
        plan_sweep(cfg)


# --- execution --------------------------------------------------------------------


@pytest.fixture(scope="module")
def small_rows():
    cfg = SweepConfig(
        kinds=("lpf", "gaussian", "sparse"),
        p=0.5,
        snr_db=(10.0, 30.0),
        betas=(0.5, 0.72, 1.0),
        trials=6,
        seed=3,
    )
    return run_sweep(cfg), cfg


def test_rows_well_formed(small_rows):
    rows, cfg = small_rows
    assert len(rows) == 3 * 3 * 2
    computed = [r for r in rows if not r.skipped]
    assert computed
    for r in computed:
        assert r.k == round(cfg.p * r.n)
        assert r.beta_act == pytest.approx(r.k / r.m, abs=0)
        assert r.gamma_act == pytest.approx(r.m / r.n, abs=0)


def test_row_measure_identities(small_rows):
    rows, _ = small_rows
    for r in rows:
        if r.skipped:
            continue
        beta = r.k / r.m
        assert r.cap_res == pytest.approx(beta * r.cap_user, rel=1e-12)
        if math.isfinite(r.pcap_user):
            s = 10 ** (r.snr_db / 10)
            assert r.pcap_user == pytest.approx(math.log2(s) + r.lgm, rel=1e-12)
            assert r.pcap_user < r.cap_user


def test_sparse_skips_never_abort(small_rows):
    rows, _ = small_rows
    sparse = [r for r in rows if r.kind == "sparse"]
    skipped = [r for r in sparse if r.skipped]
    done = [r for r in sparse if not r.skipped]
    assert skipped and done  # beta=0.72 infeasible, 0.5 and 1.0 feasible


def test_run_sweep_deterministic():
    cfg = SweepConfig(kinds=("gaussian",), p=0.5, snr_db=(20.0,), betas=(0.8,), trials=5, seed=7)
    assert run_sweep(cfg) == run_sweep(cfg)


# --- optimal / slope ---------------------------------------------------------------


def test_find_optimal_beta_argmax_and_ties():
    rows = [make_row(beta=b, value=v) for b, v in [(0.5, 1.0), (0.7, 3.0), (0.9, 3.0), (1.0, 2.0)]]
    beta, value = find_optimal_beta(rows, "cap_res", "lpf", 30.0)
    assert (beta, value) == (0.7, 3.0)  # tie with 0.9 broken toward smaller beta


def test_find_optimal_beta_excludes_minus_inf():
    rows = [
        make_row(beta=1.0, value=5.0, pcap_res=float("-inf")),
        make_row(beta=0.5, value=1.0, pcap_res=0.5),
    ]
    beta, value = find_optimal_beta(rows, "pcap_res", "lpf", 30.0)
    assert beta == 0.5


def test_find_optimal_beta_single_row():
    rows = [make_row(beta=0.8, value=2.0)]
    assert find_optimal_beta(rows, "cap_res", "lpf", 30.0) == (0.8, 2.0)


def test_find_optimal_beta_no_rows():
    with pytest.raises(NoFiniteRows):
        find_optimal_beta([make_row(skipped="because")], "cap_res", "lpf", 30.0)


def test_slope_linear_exact():
    # measure = 2.5 / beta  -> slope vs 1/beta is exactly 2.5
    rows = [make_row(beta=b, value=2.5 / b) for b in (0.8, 0.9, 1.0)]
    assert slope_at(rows, "cap_res", "lpf", 30.0, beta0=0.95) == pytest.approx(2.5, rel=1e-12)


def test_slope_constant_zero():
    rows = [make_row(beta=b, value=4.0) for b in (0.9, 1.0)]
    assert slope_at(rows, "cap_res", "lpf", 30.0, beta0=0.95) == 0.0


def test_slope_requires_bracket():
    rows = [make_row(beta=b, value=1.0) for b in (0.5, 0.6)]
    with pytest.raises(InsufficientGrid):
        slope_at(rows, "cap_res", "lpf", 30.0, beta0=0.95)
