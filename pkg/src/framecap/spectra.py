"""Random-subset eigenvalue distributions and their reference laws.

Empirical subframe spectra are pooled over Monte-Carlo trials and compared
(via two-sample Kolmogorov-Smirnov distance) against the Marcenko-Pastur
law for Gaussian frames and a Monte-Carlo MANOVA reference for ETFs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import DomainError
from .frames import Frame, IndexSubset, subgram_spectrum
from .seeding import derive_seed, derived_rng

# A frame source is either a fixed frame (deterministic kinds) or a
# callable seed -> Frame that draws a fresh frame per trial (random kinds).
FrameSource = Union[Frame, Callable[[int], Frame]]


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sorted sample pool with an evaluable ECDF."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.sort(np.asarray(self.samples, dtype=np.float64))
        if s.size < 1:
            raise DomainError("empirical distribution needs at least one sample")
        s.flags.writeable = False
        object.__setattr__(self, "samples", s)

    @property
    def count(self) -> int:
        return self.samples.size

    def ecdf(self, x) -> np.ndarray:
        return np.searchsorted(self.samples, x, side="right") / self.count

    def mean(self) -> float:
        return float(np.mean(self.samples))


def _resolve_frame(source: FrameSource, trial_seed: int) -> Frame:
    if isinstance(source, Frame):
        return source
    return source(trial_seed)


def sample_subset(n: int, k: int, seed: int) -> IndexSubset:
    """Uniformly random k-subset of [0, n), deterministic in the seed."""
    if not 1 <= k <= n:
        raise DomainError(f"need 1 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(n, size=k, replace=False))
    return IndexSubset(tuple(int(i) for i in picks))


def empirical_spectrum(
    frame_source: FrameSource, k: int, trials: int, seed: int = 0
) -> EmpiricalDistribution:
    """Pool the subframe eigenvalues of `trials` random activity draws.

    Per-trial seeds derive from (seed, trial), so the pooled multiset does
    not depend on execution order. Fixed frames keep the frame constant and
    vary only the subset; callable sources redraw the frame each trial.
    """
    if trials < 1:
        raise DomainError("trials must be >= 1")
    pools = []
    for t in range(trials):
        frame = _resolve_frame(frame_source, derive_seed(seed, t, "frame"))
        subset = sample_subset(frame.n, k, derive_seed(seed, t, "subset"))
        pools.append(subgram_spectrum(frame, subset).eigenvalues)
    return EmpiricalDistribution(np.concatenate(pools))


def mp_reference(beta: float, grid: int = 2000) -> EmpiricalDistribution:
    """Quantile samples of the Marcenko-Pastur law with ratio beta in (0, 1].

    Density sqrt((l+ - x)(x - l-)) / (2 pi beta x) on [l-, l+] with
    l+- = (1 +- sqrt(beta))^2. The substitution x = l- + (l+ - l-) sin^2(t)
    removes the edge singularities, so a trapezoid CDF converges fast; the
    total mass is accurate to well under 1e-6.
    """
    if not 0.0 < beta <= 1.0:
        raise DomainError(f"beta must be in (0, 1], got {beta}")
    if grid < 1:
        raise DomainError("grid must be >= 1")
    lo = (1.0 - np.sqrt(beta)) ** 2
    hi = (1.0 + np.sqrt(beta)) ** 2
    span = hi - lo
    theta = np.linspace(0.0, np.pi / 2, 8193)
    x = lo + span * np.sin(theta) ** 2
    # density(x(t)) * dx/dt; both sqrt factors combine into span*sin*cos
    integrand = (span * np.sin(theta) * np.cos(theta)) ** 2 / (np.pi * beta * np.maximum(x, 1e-300))
    if lo == 0.0:
        # beta = 1: the sin^2 factors cancel and the t=0 limit is span/(pi*beta)
        integrand[0] = span / (np.pi * beta)
    cdf = np.concatenate(([0.0], np.cumsum((integrand[1:] + integrand[:-1]) * np.diff(theta) / 2)))
    mass = cdf[-1]
    if abs(mass - 1.0) > 1e-6:
        raise DomainError(f"MP mass integrated to {mass}, expected 1 within 1e-6")
    quantiles = (np.arange(grid) + 0.5) / grid
    samples = np.interp(quantiles * mass, cdf, x)
    return EmpiricalDistribution(samples)


def manova_reference(
    m: int, n: int, k: int, trials: int = 50, seed: int = 0
) -> EmpiricalDistribution:
    """Monte-Carlo MANOVA law: spectra of random k x k principal submatrices
    of (n/m) * P, where P projects onto a uniformly random m-dim subspace
    of C^n. This is the reference law for random subsets of an M x N ETF
    at K active users.
    """
    if not (1 <= m <= n) or not (1 <= k <= n):
        raise DomainError(f"need 1 <= m <= n and 1 <= k <= n, got m={m}, n={n}, k={k}")
    if trials < 1:
        raise DomainError("trials must be >= 1")
    pools = []
    for t in range(trials):
        rng = derived_rng("manova", seed, t, "basis")
        a = rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m))
        u, _ = np.linalg.qr(a)
        subset = sample_subset(n, k, derive_seed("manova", seed, t, "subset"))
        rows = u[list(subset.indices), :]
        # Eigenvalues of (U U^H)[S,S] are the squared singular values of U[S,:],
        # padded with zeros when k exceeds the subspace dimension m.
        svals = np.linalg.svd(rows, compute_uv=False)
        lam = np.zeros(k)
        lam[: svals.size] = svals**2
        pools.append((n / m) * lam)
    return EmpiricalDistribution(np.concatenate(pools))


def ks_distance(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Two-sample Kolmogorov-Smirnov statistic: sup |ECDF_a - ECDF_b|."""
    grid = np.concatenate([a.samples, b.samples])
    return float(np.max(np.abs(a.ecdf(grid) - b.ecdf(grid))))


def write_spectrum_csv(dist: EmpiricalDistribution, path) -> None:
    """Single column of eigenvalues under an `eigenvalue` header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("eigenvalue\n")
        for x in dist.samples:
            fh.write(f"{float(x)!r}\n")


def write_histogram_csv(dist: EmpiricalDistribution, path, bins: int = 100) -> None:
    """Density histogram with `bin_left,bin_right,density` rows."""
    counts, edges = np.histogram(dist.samples, bins=bins, density=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("bin_left,bin_right,density\n")
        for i, c in enumerate(counts):
            fh.write(f"{float(edges[i])!r},{float(edges[i + 1])!r},{float(c)!r}\n")
