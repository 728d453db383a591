"""Generators for regular sparse, low-pass (truncated DFT) and Gaussian frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GenerationExhausted, InfeasibleRegularity
from .frames import Frame, FrameRecipe
from .seeding import derived_rng

PLACEMENT_TRIES = 5
MAX_RESTARTS = 100


@dataclass(frozen=True)
class SparseRecipe:
    """Regular sparse frame parameters: d nonzeros per column, d*n/m per row."""

    m: int
    n: int
    d: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1 or self.m > self.n:
            raise DomainError(f"need 1 <= m <= n, got m={self.m}, n={self.n}")
        if self.d < 2:
            raise DomainError(f"column weight d must be >= 2, got {self.d}")
        if self.d > self.m:
            raise DomainError(f"column weight d={self.d} exceeds m={self.m}")
        if (self.d * self.n) % self.m != 0:
            raise InfeasibleRegularity(
                f"row weight d*n/m = {self.d}*{self.n}/{self.m} is not an integer"
            )

    @property
    def row_weight(self) -> int:
        return self.d * self.n // self.m


def _try_place(recipe: SparseRecipe, rng: np.random.Generator) -> np.ndarray | None:
    """One randomized pairing pass; None when a nonzero cannot be placed."""
    m, n, d = recipe.m, recipe.n, recipe.d
    entries = np.zeros((m, n), dtype=np.complex128)
    # Remaining slot multisets: each resource appears row_weight times,
    # each user d times; placing a nonzero consumes one slot of each.
    rows = [r for r in range(m) for _ in range(recipe.row_weight)]
    cols = [c for c in range(n) for _ in range(d)]
    for _ in range(n * d):
        angle = rng.uniform(0.0, 2.0 * np.pi)
        value = complex(np.cos(angle), np.sin(angle))
        for _ in range(PLACEMENT_TRIES):
            ri = int(rng.integers(len(rows)))
            ci = int(rng.integers(len(cols)))
            if entries[rows[ri], cols[ci]] == 0:
                entries[rows[ri], cols[ci]] = value
                del rows[ri]
                del cols[ci]
                break
        else:
            return None
    return entries


def gen_sparse_regular(recipe: SparseRecipe) -> Frame:
    """Regular sparse frame with unit-modulus nonzeros, phases uniform on [0, 2pi).

    The randomized pairing can deadlock; each deadlock restarts the whole
    assignment with a seed derived from (seed, restart), so results are
    independent of scheduling. The restart count is recorded in the recipe.
    """
    for restart in range(MAX_RESTARTS):
        rng = derived_rng("sparse", recipe.seed, restart)
        entries = _try_place(recipe, rng)
        if entries is not None:
            nz = entries != 0
            assert np.all(nz.sum(axis=0) == recipe.d), "column regularity violated"
            assert np.all(nz.sum(axis=1) == recipe.row_weight), "row regularity violated"
            frame_recipe = FrameRecipe(
                "sparse-regular",
                {"d": recipe.d, "restarts": restart},
                recipe.seed,
            )
            return Frame(entries, frame_recipe)
    raise GenerationExhausted(MAX_RESTARTS, f"sparse pairing failed for {recipe}")


def gen_lpf(m: int, n: int) -> Frame:
    """Low-pass frame: first m rows of the n-point DFT, columns at unit norm.

    Entry (r, c) is exp(-2*pi*i*r*c/n)/sqrt(m); the 1/sqrt(m) scale after
    truncation is exactly the per-column normalization.
    """
    if m < 1 or n < 1 or m > n:
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={n}")
    rows = np.arange(m).reshape(-1, 1)
    cols = np.arange(n).reshape(1, -1)
    entries = np.exp(-2j * np.pi * rows * cols / n) / np.sqrt(m)
    return Frame(entries, FrameRecipe("lpf", {"m": m, "n": n}))


def gen_gaussian(m: int, n: int, seed: int = 0, normalize: bool = True) -> Frame:
    """Circularly symmetric complex Gaussian frame, per-entry variance 1/m.

    With normalize (the default) columns are rescaled to exact unit norm,
    so E[|f_i|^2] = 1 holds exactly rather than asymptotically.
    """
    if m < 1 or n < 1 or m > n:
        raise DomainError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    entries = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) / np.sqrt(2 * m)
    kind = "gaussian"
    if normalize:
        entries = entries / np.linalg.norm(entries, axis=0)
        kind = "gaussian-normalized"
    return Frame(entries, FrameRecipe(kind, {"m": m, "n": n}, seed))
