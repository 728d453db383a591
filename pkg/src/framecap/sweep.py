"""Constant-p load sweeps: planning, execution, and table analyses.

A sweep keeps the activity ratio p fixed and walks an active-load grid
beta; the aspect ratio gamma = p/beta then changes cell by cell. Frame
dimensions are chosen per kind (sparse cells additionally need an integer
row weight, ETF cells are matched against the construction catalog) and
infeasible cells are recorded as skipped rather than aborting the sweep.
"""

from __future__ import annotations

import math
from concurrent import futures
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Sequence

from .capacity import mc_capacity
from .errors import DomainError, EmptyPlan, FramecapError, InsufficientGrid, NoFiniteRows
from .etf import EtfCatalogEntry, build_catalog_frame, lookup_etf
from .frames import Frame, SystemParams, column_normalize
from .generators import SparseRecipe, gen_gaussian, gen_lpf, gen_sparse_regular
from .seeding import derive_seed

KNOWN_KINDS = ("sparse", "lpf", "etf", "gaussian")
DEFAULT_BETAS = tuple(round(0.5 + 0.05 * i, 2) for i in range(11))
MEASURES = ("cap_user", "cap_res", "pcap_user", "pcap_res", "lgm")
GAMMA_REL_TOL = 0.05


@dataclass(frozen=True)
class SweepConfig:
    """One sweep request; JSON configs carry exactly these fields."""

    kinds: tuple[str, ...]
    p: float
    snr_db: tuple[float, ...] = (30.0,)
    betas: tuple[float, ...] = DEFAULT_BETAS
    m_min: int = 64
    trials: int = 50
    seed: int = 0
    d: int = 2
    outdir: str = "out"

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in self.snr_db))
        object.__setattr__(self, "betas", tuple(float(b) for b in self.betas))
        if not self.kinds:
            raise DomainError("kinds must be nonempty")
        for kind in self.kinds:
            if kind not in KNOWN_KINDS:
                raise DomainError(f"unknown frame kind {kind!r}; choose from {KNOWN_KINDS}")
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"p must be in (0, 1], got {self.p}")
        if not self.betas or any(not 0.0 < b <= 1.0 for b in self.betas):
            raise DomainError("betas must be a nonempty list of values in (0, 1]")
        if self.m_min <= 50:
            raise DomainError(f"m_min must exceed 50 for deterministic statistics, got {self.m_min}")
        if self.trials < 2:
            raise DomainError("trials must be >= 2")
        if self.d < 2:
            raise DomainError("sparse column weight d must be >= 2")


CONFIG_KEYS = ("kinds", "p", "snr_db", "betas", "m_min", "trials", "seed", "d", "outdir")


def config_from_mapping(data: dict) -> SweepConfig:
    unknown = set(data) - set(CONFIG_KEYS)
    if unknown:
        raise DomainError(f"unknown config keys: {sorted(unknown)}; allowed: {list(CONFIG_KEYS)}")
    if "kinds" not in data or "p" not in data:
        raise DomainError("config requires at least 'kinds' and 'p'")
    return SweepConfig(**data)


def p_regime(p: float) -> str:
    """Qualitative frame-choice guidance by activity ratio."""
    if p < 0.25:
        return "small p (<0.25): random frames are nearly as good as ETFs; simplicity favors gaussian"
    if p <= 0.75:
        return "medium p (0.25..0.75): ETFs hold a clear capacity advantage"
    return "large p (>0.75): LPF performs on par with ETFs; prefer LPF for simplicity"


@dataclass(frozen=True)
class PlannedCell:
    index: int
    kind: str
    beta_req: float
    snr_db: float
    gamma_req: float
    m: int | None = None
    n: int | None = None
    k: int | None = None
    etf_entry: EtfCatalogEntry | None = None
    skipped_reason: str = ""


@dataclass(frozen=True)
class SweepRow:
    """One line of the sweep table (also one CSV row)."""

    kind: str
    p: float
    beta_req: float
    snr_db: float
    beta_act: float | None = None
    gamma_act: float | None = None
    m: int | None = None
    n: int | None = None
    k: int | None = None
    cap_user: float | None = None
    cap_user_se: float | None = None
    cap_res: float | None = None
    cap_res_se: float | None = None
    pcap_user: float | None = None
    pcap_res: float | None = None
    lgm: float | None = None
    singular_frac: float | None = None
    skipped_reason: str = ""

    @property
    def skipped(self) -> bool:
        return bool(self.skipped_reason)

    def measure(self, name: str) -> float | None:
        if name not in MEASURES:
            raise DomainError(f"unknown measure {name!r}; choose from {MEASURES}")
        return getattr(self, name)


def _as_fraction(x: float) -> Fraction:
    return Fraction(x).limit_denominator(10**6)


def _plan_cell(config: SweepConfig, index: int, kind: str, beta: float, snr: float) -> PlannedCell:
    gamma = _as_fraction(config.p) / _as_fraction(beta)
    cell = PlannedCell(index=index, kind=kind, beta_req=beta, snr_db=snr, gamma_req=float(gamma))
    if gamma > 1:
        return replace(cell, skipped_reason=f"beta={beta} below p={config.p} (gamma > 1)")

    if kind == "etf":
        entry = lookup_etf(beta, config.p, config.m_min, gamma_rel_tol=GAMMA_REL_TOL)
        if entry is None:
            return replace(
                cell,
                skipped_reason=f"no catalog ETF within {GAMMA_REL_TOL:.0%} of gamma={float(gamma):.4f}",
            )
        m, n = entry.m, entry.n
        cell = replace(cell, etf_entry=entry)
    else:
        num, den = gamma.numerator, gamma.denominator
        if kind == "sparse" and (config.d * den) % num != 0:
            return replace(
                cell,
                skipped_reason=f"sparse row weight d/gamma = {config.d * den}/{num} not an integer",
            )
        m = -(-config.m_min // num) * num  # smallest multiple of num >= m_min
        n = m * den // num

    k = round(config.p * n)
    if k < 1:
        return replace(cell, skipped_reason=f"k = round(p*N) = round({config.p * n:.3f}) < 1")
    if k > m:
        return replace(cell, skipped_reason=f"k={k} exceeds m={m} (beta_act > 1)")
    return replace(cell, m=m, n=n, k=k)


def plan_sweep(config: SweepConfig) -> list[PlannedCell]:
    """One cell per (kind, beta, snr); raises EmptyPlan if all are skipped."""
    cells = []
    index = 0
    for kind in config.kinds:
        for beta in config.betas:
            for snr in config.snr_db:
                cells.append(_plan_cell(config, index, kind, beta, snr))
                index += 1
    if all(c.skipped_reason for c in cells):
        raise EmptyPlan("every sweep cell is infeasible")
    return cells


_catalog_cache: dict[EtfCatalogEntry, Frame] = {}


def _catalog_frame(entry: EtfCatalogEntry) -> Frame:
    frame = _catalog_cache.get(entry)
    if frame is None:
        frame = build_catalog_frame(entry)
        _catalog_cache[entry] = frame
    return frame


def _cell_source(config: SweepConfig, cell: PlannedCell):
    m, n = cell.m, cell.n
    if cell.kind == "lpf":
        return gen_lpf(m, n)
    if cell.kind == "etf":
        return _catalog_frame(cell.etf_entry)
    if cell.kind == "gaussian":
        return lambda s: gen_gaussian(m, n, seed=s)
    # sparse columns have norm sqrt(d); normalizing them implements the
    # per-user received-SNR convention exactly (folds 1/d into the spectrum)
    d = config.d
    return lambda s: column_normalize(gen_sparse_regular(SparseRecipe(m, n, d, seed=s)))


def _skipped_row(config: SweepConfig, cell: PlannedCell, reason: str) -> SweepRow:
    return SweepRow(
        kind=cell.kind,
        p=config.p,
        beta_req=cell.beta_req,
        snr_db=cell.snr_db,
        skipped_reason=reason,
    )


def execute_cell(config: SweepConfig, cell: PlannedCell) -> SweepRow:
    """Run one planned cell; failures land in the row, never propagate."""
    if cell.skipped_reason:
        return _skipped_row(config, cell, cell.skipped_reason)
    try:
        source = _cell_source(config, cell)
        params = SystemParams(p=config.p, snr_db=cell.snr_db, m=cell.m, n=cell.n, k=cell.k)
        mc = mc_capacity(
            source,
            params,
            trials=config.trials,
            seed=derive_seed(config.seed, "cell", cell.index),
        )
    except FramecapError as exc:
        return _skipped_row(config, cell, f"error: {exc}")
    return SweepRow(
        kind=cell.kind,
        p=config.p,
        beta_req=cell.beta_req,
        snr_db=cell.snr_db,
        beta_act=cell.k / cell.m,
        gamma_act=cell.m / cell.n,
        m=cell.m,
        n=cell.n,
        k=cell.k,
        cap_user=mc.mean.per_user,
        cap_user_se=mc.per_user_se,
        cap_res=mc.mean.per_resource,
        cap_res_se=mc.per_resource_se,
        pcap_user=mc.mean.practical_per_user,
        pcap_res=mc.mean.practical_per_resource,
        lgm=mc.mean.lgm,
        singular_frac=mc.singular_fraction,
        skipped_reason="",
    )


def run_sweep(
    config: SweepConfig,
    workers: int = 1,
    progress: Callable[[SweepRow], None] | None = None,
) -> list[SweepRow]:
    """Execute the full plan; rows come back in plan order regardless of
    scheduling, and identical (config, seed) reruns are bit-identical."""
    cells = plan_sweep(config)
    if workers <= 1:
        rows = []
        for cell in cells:
            row = execute_cell(config, cell)
            if progress is not None:
                progress(row)
            rows.append(row)
        return rows
    with futures.ProcessPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(execute_cell, [config] * len(cells), cells))
    if progress is not None:
        for row in rows:
            progress(row)
    return rows


def _finite_rows(rows: Sequence[SweepRow], measure: str, kind: str, snr_db: float) -> list[SweepRow]:
    out = []
    for row in rows:
        if row.skipped or row.kind != kind or row.snr_db != snr_db:
            continue
        value = row.measure(measure)
        if value is None or not math.isfinite(value):
            continue
        out.append(row)
    return out


def find_optimal_beta(
    rows: Sequence[SweepRow], measure: str, kind: str, snr_db: float
) -> tuple[float, float]:
    """Grid beta maximizing the measure's mean; ties go to the smaller beta."""
    finite = _finite_rows(rows, measure, kind, snr_db)
    if not finite:
        raise NoFiniteRows(f"no finite {measure} rows for kind={kind}, snr={snr_db} dB")
    best = max(finite, key=lambda r: (r.measure(measure), -r.beta_req))
    return best.beta_req, best.measure(measure)


def slope_at(
    rows: Sequence[SweepRow], measure: str, kind: str, snr_db: float, beta0: float = 0.95
) -> float:
    """Central finite-difference slope of the measure against 1/beta at beta0,
    using the nearest achieved loads on either side."""
    finite = _finite_rows(rows, measure, kind, snr_db)
    x0 = 1.0 / beta0
    below = [r for r in finite if 1.0 / r.beta_act < x0 - 1e-12]
    above = [r for r in finite if 1.0 / r.beta_act > x0 + 1e-12]
    if not below or not above:
        raise InsufficientGrid(
            f"no bracketing loads around beta={beta0} for kind={kind}, snr={snr_db} dB"
        )
    lo = max(below, key=lambda r: 1.0 / r.beta_act)
    hi = min(above, key=lambda r: 1.0 / r.beta_act)
    x_lo, x_hi = 1.0 / lo.beta_act, 1.0 / hi.beta_act
    return (hi.measure(measure) - lo.measure(measure)) / (x_hi - x_lo)
