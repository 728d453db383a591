"""Capacity measures over subframe spectra and their Monte-Carlo expectations.

Four normalized measures: log-det capacity and "practical" capacity (the
same sum without the identity term), each per active user and per resource.
A zero eigenvalue drives the practical measures and the log geometric mean
to -inf; that singularity is the interesting phenomenon near full load, so
it is reported (singular fraction) rather than masked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AllSingular, ConstructionBug, DomainError, NoConvergence
from .frames import GramSpectrum, SystemParams, subgram_spectrum
from .seeding import derive_seed
from .spectra import FrameSource, _resolve_frame, sample_subset

ZERO_EIGENVALUE = 1e-12
DEFAULT_TRIALS = 50


@dataclass(frozen=True)
class CapacityReport:
    """The four measures plus the log geometric mean for one spectrum."""

    per_user: float
    per_resource: float
    practical_per_user: float
    practical_per_resource: float
    lgm: float
    k: int
    m: int
    snr_db: float


def lgm(spec: GramSpectrum) -> float:
    """Log2 geometric mean of the eigenvalues; -inf on any zero eigenvalue."""
    lam = spec.eigenvalues
    if np.any(lam < ZERO_EIGENVALUE):
        return float("-inf")
    return float(np.sum(np.log2(lam))) / spec.k


def measures_from_spectrum(spec: GramSpectrum, snr_db: float, m: int) -> CapacityReport:
    """Evaluate all measures at one SNR.

    per_user = (1/K) sum log2(1 + s*lam_i) with s the linear SNR;
    the practical measure drops the 1, i.e. equals log2(s) + lgm, and the
    per-resource variants are exactly beta = K/m times the per-user ones.
    """
    if m < 1:
        raise DomainError("m must be positive")
    s = 10.0 ** (snr_db / 10.0)
    lam = spec.eigenvalues
    k = spec.k
    per_user = float(np.sum(np.log2(1.0 + s * lam))) / k
    lgm_val = lgm(spec)
    practical_user = math.log2(s) + lgm_val
    beta = k / m
    return CapacityReport(
        per_user=per_user,
        per_resource=beta * per_user,
        practical_per_user=practical_user,
        practical_per_resource=beta * practical_user,
        lgm=lgm_val,
        k=k,
        m=m,
        snr_db=snr_db,
    )


@dataclass(frozen=True)
class McCapacity:
    """Trial-averaged measures with standard errors.

    Practical means (and lgm) average the finite trials only; the share of
    singular trials is reported alongside. -inf means every trial was
    singular.
    """

    mean: CapacityReport
    per_user_se: float
    per_resource_se: float
    practical_per_user_se: float
    practical_per_resource_se: float
    lgm_se: float
    singular_fraction: float
    trials: int


def _mean_se(values: list[float]) -> tuple[float, float]:
    n = len(values)
    if n == 0:
        return float("-inf"), float("nan")
    mean = math.fsum(values) / n
    if n == 1:
        return mean, float("nan")
    var = math.fsum((x - mean) ** 2 for x in values) / (n - 1)
    return mean, math.sqrt(var / n)


def mc_capacity(
    frame_source: FrameSource,
    params: SystemParams,
    trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    require_finite: bool = False,
) -> McCapacity:
    """Monte-Carlo averages of all measures over random activity patterns.

    Per-trial seeds derive from (seed, trial); aggregation uses compensated
    summation in trial order, so results are bit-stable regardless of how
    trials or cells are scheduled.
    """
    if trials < 2:
        raise DomainError("trials must be >= 2")
    probe = _resolve_frame(frame_source, derive_seed(seed, 0, "frame"))
    if (probe.m, probe.n) != (params.m, params.n):
        raise DomainError(
            f"frame is {probe.m}x{probe.n} but params expect {params.m}x{params.n}"
        )
    cap_user: list[float] = []
    cap_res: list[float] = []
    pcap_user: list[float] = []
    pcap_res: list[float] = []
    lgms: list[float] = []
    singular = 0
    for t in range(trials):
        frame = probe if t == 0 else _resolve_frame(frame_source, derive_seed(seed, t, "frame"))
        subset = sample_subset(params.n, params.k, derive_seed(seed, t, "subset"))
        rep = measures_from_spectrum(subgram_spectrum(frame, subset), params.snr_db, params.m)
        cap_user.append(rep.per_user)
        cap_res.append(rep.per_resource)
        if math.isfinite(rep.practical_per_user):
            pcap_user.append(rep.practical_per_user)
            pcap_res.append(rep.practical_per_resource)
            lgms.append(rep.lgm)
        else:
            singular += 1
    if require_finite and not pcap_user:
        raise AllSingular(f"all {trials} trials produced a singular practical measure")
    cu, cu_se = _mean_se(cap_user)
    cr, cr_se = _mean_se(cap_res)
    pu, pu_se = _mean_se(pcap_user)
    pr, pr_se = _mean_se(pcap_res)
    lg, lg_se = _mean_se(lgms)
    mean = CapacityReport(
        per_user=cu,
        per_resource=cr,
        practical_per_user=pu,
        practical_per_resource=pr,
        lgm=lg,
        k=params.k,
        m=params.m,
        snr_db=params.snr_db,
    )
    return McCapacity(
        mean=mean,
        per_user_se=cu_se,
        per_resource_se=cr_se,
        practical_per_user_se=pu_se,
        practical_per_resource_se=pr_se,
        lgm_se=lg_se,
        singular_fraction=singular / trials,
        trials=trials,
    )


def solve_constant_ebn0(untf_gamma_inv: float, ebn0: float, tol: float = 1e-9) -> float:
    """Fixed point C = log2(1 + C*Eb/N0), the tight-frame capacity per
    resource under constant Eb/N0.

    The load ratio enters the fixed-point map multiplied and divided out
    again, which is exactly why the result cannot depend on it; that
    cancellation is asserted against the ratio-1 solve.
    """
    if ebn0 <= 0:
        raise DomainError(f"Eb/N0 must be positive, got {ebn0}")
    if untf_gamma_inv < 1:
        raise DomainError(f"load ratio must be >= 1, got {untf_gamma_inv}")

    def fixed_point(g: float) -> float:
        c = 1.0
        for _ in range(10_000):
            nxt = math.log2(1.0 + (c * ebn0 * g) / g)
            step = abs(nxt - c)
            c = 0.5 * c + 0.5 * nxt
            if step < min(tol, 1e-12):
                return c
        raise NoConvergence(f"fixed point did not settle for ebn0={ebn0}")

    c = fixed_point(untf_gamma_inv)
    if abs(c - fixed_point(1.0)) > tol:
        raise ConstructionBug("load ratio failed to cancel in the Eb/N0 fixed point")
    return c
