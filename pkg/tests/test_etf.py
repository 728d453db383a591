"""Difference sets, Steiner systems, ETF constructions, and the catalog."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from framecap.errors import (
    InfeasibleParameters,
    NotADifferenceSet,
    NotASteinerSystem,
    NotSupported,
    SearchExhausted,
)
from framecap.etf import (
    DifferenceSet,
    SteinerIncidence,
    build_catalog_frame,
    complement_difference_set,
    enumerate_etf_catalog,
    etf_from_difference_set,
    load_incidence,
    lookup_etf,
    naimark_complement,
    paley_difference_set,
    save_incidence,
    steiner_etf,
    steiner_system,
    unimodular_matrix,
    verify_difference_set,
    verify_steiner,
)
from framecap.frames import coherence_stats, verify_frame, welch_bound


# --- difference sets ----------------------------------------------------------


def test_verify_difference_set_017():
    assert verify_difference_set((0, 1, 3), 7) == 1


def test_verify_difference_set_full_set():
    assert verify_difference_set(tuple(range(4)), 4) == 4


def test_verify_difference_set_rejects():
    with pytest.raises(NotADifferenceSet) as err:
        verify_difference_set((0, 1), 4)
    assert "b=1 has 1" in str(err.value) and "b=2 has 0" in str(err.value)


def test_verify_difference_set_counting_identity():
    for residues, v in [((0, 1, 3), 7), ((1, 3, 4, 5, 9), 11)]:
        lam = verify_difference_set(residues, v)
        k = len(residues)
        assert lam * (v - 1) == k * (k - 1)


def test_paley_q7():
    ds = paley_difference_set(7)
    assert ds.residues == (1, 2, 4)
    assert (ds.v, ds.k, ds.lam) == (7, 3, 1)


def test_paley_q11():
    ds = paley_difference_set(11)
    assert ds.residues == (1, 3, 4, 5, 9)
    assert ds.lam == 2


@pytest.mark.parametrize("q", [13, 9, 15, 4, 2])
def test_paley_rejects(q):
    with pytest.raises(NotSupported):
        paley_difference_set(q)


def test_complement_difference_set():
    ds = complement_difference_set(paley_difference_set(7))
    assert ds.k == 4 and ds.lam == 2
    assert verify_difference_set(ds.residues, 7) == 2


def test_etf_from_017_and_paley():
    for residues in [(0, 1, 3), paley_difference_set(7).residues]:
        lam = verify_difference_set(residues, 7)
        frame = etf_from_difference_set(DifferenceSet(residues, 7, lam))
        i_ms, i_max = coherence_stats(frame)
        assert i_ms == pytest.approx(2 / 9, abs=1e-9)
        assert i_max == pytest.approx(2 / 9, abs=1e-9)


def test_etf_paley_103():
    frame = etf_from_difference_set(paley_difference_set(103))
    assert (frame.m, frame.n) == (51, 103)
    assert frame.m / frame.n == pytest.approx(0.5, abs=0.01)
    assert verify_frame(frame, "etf", 1e-9).passed


# --- Steiner systems ------------------------------------------------------------


PAPER_2_2_4 = np.array(
    [
        [1, 1, 0, 0],
        [1, 0, 1, 0],
        [1, 0, 0, 1],
        [0, 1, 1, 0],
        [0, 1, 0, 1],
        [0, 0, 1, 1],
    ],
    dtype=np.uint8,
)


def test_steiner_pairs_2_4():
    inc = steiner_system(2, 4, method="pairs")
    assert verify_steiner(inc) == (6, 3)
    # identical to the reference incidence up to row order
    ours = {tuple(r) for r in inc.blocks.tolist()}
    want = {tuple(r) for r in PAPER_2_2_4.tolist()}
    assert ours == want


def test_steiner_bose_v9():
    inc = steiner_system(3, 9, method="bose")
    assert verify_steiner(inc) == (12, 4)


def test_steiner_bose_v21():
    inc = steiner_system(3, 21, method="bose")
    assert verify_steiner(inc) == (70, 10)


def test_steiner_backtracking_v13_deterministic():
    a = steiner_system(3, 13, method="backtracking", seed=5)
    b = steiner_system(3, 13, method="backtracking", seed=5)
    assert np.array_equal(a.blocks, b.blocks)
    assert verify_steiner(a) == (26, 6)


def test_steiner_backtracking_budget_exhaustion():
    with pytest.raises(SearchExhausted) as err:
        steiner_system(3, 21, method="backtracking", seed=0, budget=10)
    assert err.value.nodes >= 10


def test_steiner_backtracking_multiworker_valid():
    inc = steiner_system(3, 13, method="backtracking", seed=1, workers=2)
    assert verify_steiner(inc) == (26, 6)


def test_steiner_infeasible_parameters():
    with pytest.raises(InfeasibleParameters):
        steiner_system(3, 8, method="backtracking")
    with pytest.raises(InfeasibleParameters):
        steiner_system(3, 10, method="bose")
    with pytest.raises(InfeasibleParameters):
        steiner_system(3, 9, method="pairs")


def test_verify_steiner_rejects_all_ones():
    inc = SteinerIncidence(np.ones((2, 2), dtype=np.uint8), k_block=2, r_point=1)
    with pytest.raises(NotASteinerSystem) as err:
        verify_steiner(inc)
    assert "pair" in str(err.value) or "point" in str(err.value)


def test_incidence_csv_round_trip(tmp_path):
    inc = steiner_system(3, 9, method="bose")
    path = tmp_path / "matrix.csv"
    save_incidence(inc, path)
    back = load_incidence(path, k_block=3)
    assert np.array_equal(back.blocks, inc.blocks)


# --- unimodular matrices --------------------------------------------------------


def test_hadamard_4_sylvester():
    h = unimodular_matrix(4, "hadamard")
    want = np.array(
        [[1, 1, 1, 1], [1, -1, 1, -1], [1, 1, -1, -1], [1, -1, -1, 1]], dtype=complex
    )
    assert np.array_equal(h, want)
    assert np.allclose(h @ h.conj().T, 4 * np.eye(4), atol=1e-12)


def test_dft_3_orthogonal_rows():
    h = unimodular_matrix(3, "dft")
    assert np.allclose(np.abs(h), 1.0, atol=1e-12)
    assert np.allclose(h @ h.conj().T, 3 * np.eye(3), atol=1e-12)


def test_hadamard_6_not_supported():
    with pytest.raises(NotSupported):
        unimodular_matrix(6, "hadamard")


# --- Steiner ETFs ----------------------------------------------------------------


def test_steiner_etf_6x16():
    inc = steiner_system(2, 4, method="pairs")
    frame = steiner_etf(inc, "hadamard")
    assert (frame.m, frame.n) == (6, 16)
    i_ms, i_max = coherence_stats(frame)
    assert i_ms == pytest.approx(1 / 9, abs=1e-9)
    assert i_max == pytest.approx(1 / 9, abs=1e-9)


def test_steiner_etf_within_point_block_products():
    # Columns sharing a point differ by one Hadamard row product: |<.,.>| = 1/r.
    inc = steiner_system(2, 4, method="pairs")
    frame = steiner_etf(inc, "hadamard")
    r = 3
    for h1, h2 in itertools.combinations(range(r + 1), 2):
        ip = np.vdot(frame.entries[:, h1], frame.entries[:, h2])
        assert abs(ip) == pytest.approx(1 / 3, abs=1e-12)


def test_steiner_etf_70x231():
    inc = steiner_system(3, 21, method="bose")
    frame = steiner_etf(inc, "auto")
    assert (frame.m, frame.n) == (70, 231)
    assert frame.recipe.params["h_kind"] == "dft"  # r+1 = 11 is not a power of 2
    assert verify_frame(frame, "etf", 1e-9).passed


@pytest.mark.parametrize("k,v", [(2, 4), (2, 7), (3, 9), (3, 21)])
def test_steiner_welch_equals_inverse_r_squared(k, v):
    r = Fraction(v - 1, k - 1)
    b = Fraction(v * (v - 1), k * (k - 1))
    n = v * (r + 1)
    exact = (n - b) / ((n - 1) * b)
    assert exact == 1 / r**2  # rational identity
    inc = steiner_system(k, v)
    frame = steiner_etf(inc)
    i_ms, _ = coherence_stats(frame)
    assert i_ms == pytest.approx(float(1 / r**2), abs=1e-9)


def test_naimark_complement():
    frame = steiner_etf(steiner_system(2, 4, method="pairs"), "hadamard")
    comp = naimark_complement(frame)
    assert (comp.m, comp.n) == (10, 16)
    assert verify_frame(comp, "etf", 1e-9).passed
    i_ms, _ = coherence_stats(comp)
    assert i_ms == pytest.approx(welch_bound(10, 16), abs=1e-9)


# --- catalog ---------------------------------------------------------------------


def test_catalog_entries_respect_bounds():
    entries = enumerate_etf_catalog(64, 512)
    assert entries
    for e in entries:
        assert 64 <= e.m <= 512
        assert e.m < e.n


def test_lookup_square_for_gamma_one():
    entry = lookup_etf(beta_req=0.9, p=0.9, m_min=64)
    assert entry is not None and entry.family == "square-dft"
    assert entry.m == entry.n == 64


def test_lookup_gamma_above_half():
    entry = lookup_etf(beta_req=0.9, p=0.5, m_min=64)
    assert entry is not None
    gamma_req = 0.5 / 0.9
    assert abs(entry.gamma / gamma_req - 1.0) <= 0.05
    k = round(0.5 * entry.n)
    assert 1 <= k <= entry.m
    frame = build_catalog_frame(entry)
    assert (frame.m, frame.n) == (entry.m, entry.n)
    assert verify_frame(frame, "etf", 1e-9).passed


def test_lookup_infeasible_gamma_returns_none():
    assert lookup_etf(beta_req=0.55, p=0.5, m_min=64) is None  # gamma 0.909: no family
    assert lookup_etf(beta_req=0.5, p=0.9, m_min=64) is None  # gamma > 1


def test_lookup_prefers_achieved_load():
    entry = lookup_etf(beta_req=1.0, p=0.5, m_min=64)
    assert entry is not None
    assert round(0.5 * entry.n) == entry.m  # achieved beta exactly 1
