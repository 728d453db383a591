"""Core frame types: frames, active subsets, subframe spectra, coherence.

A frame is an M x N complex matrix whose columns are user signature vectors
over M shared resources (M <= N). All capacity work downstream runs on the
eigenvalues of the Gram matrix of an active-column subframe.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import DomainError, ZeroColumn

# Kinds whose construction guarantees exactly unit-norm columns.
UNIT_NORM_KINDS = frozenset(
    {"lpf", "etf-diffset", "etf-steiner", "etf-complement", "gaussian-normalized"}
)

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class FrameRecipe:
    """Construction descriptor attached to every frame."""

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int | None = None


@dataclass(frozen=True)
class Frame:
    """An M x N complex frame; column j is user j's signature vector."""

    entries: np.ndarray
    recipe: FrameRecipe

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=np.complex128)
        if a.ndim != 2:
            raise DomainError(f"frame entries must be 2-d, got shape {a.shape}")
        m, n = a.shape
        if m < 1 or n < 1 or m > n:
            raise DomainError(f"need 1 <= M <= N, got M={m}, N={n}")
        if not np.all(np.isfinite(a)):
            raise DomainError("frame entries must be finite")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        object.__setattr__(self, "entries", a)
        self._check_kind_invariants()

    def _check_kind_invariants(self):
        kind = self.recipe.kind
        if kind in UNIT_NORM_KINDS:
            norms = np.linalg.norm(self.entries, axis=0)
            worst = float(np.max(np.abs(norms - 1.0)))
            if worst > DEFAULT_TOL:
                raise DomainError(
                    f"kind {kind!r} requires unit-norm columns; worst deviation {worst:.3e}"
                )
        elif kind == "sparse-regular":
            d = self.recipe.params.get("d")
            if d is None:
                # Serialized frames carry only the kind; infer the column weight.
                d = int(np.count_nonzero(self.entries[:, 0]))
            nz = self.entries != 0
            col_ok = np.all(nz.sum(axis=0) == d)
            row_ok = np.all(nz.sum(axis=1) == d * self.n // self.m)
            mods = np.abs(self.entries[nz])
            if not (col_ok and row_ok and np.all(np.abs(mods - 1.0) < DEFAULT_TOL)):
                raise DomainError("sparse-regular frame violates regularity/unimodularity")

    @property
    def m(self) -> int:
        return self.entries.shape[0]

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    @property
    def kind(self) -> str:
        return self.recipe.kind

    def conjugate(self) -> "Frame":
        return Frame(np.conj(self.entries), self.recipe)


@dataclass(frozen=True)
class IndexSubset:
    """Strictly increasing active-user column indices."""

    indices: tuple[int, ...]

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        if len(idx) < 1:
            raise DomainError("subset must contain at least one index")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise DomainError("subset indices must be strictly increasing")
        if idx[0] < 0:
            raise DomainError("subset indices must be nonnegative")
        object.__setattr__(self, "indices", idx)

    @property
    def k(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class GramSpectrum:
    """Ascending eigenvalues of the active subframe's Gram matrix.

    Negative round-off values are clamped to zero; the largest clamp
    magnitude is kept so downstream reports can surface it.
    """

    eigenvalues: np.ndarray
    clamp: float = 0.0

    def __post_init__(self):
        lam = np.asarray(self.eigenvalues, dtype=np.float64)
        if lam.ndim != 1 or lam.size < 1:
            raise DomainError("spectrum must be a nonempty 1-d array")
        clamp = max(0.0, -float(lam.min()))
        lam = np.sort(np.maximum(lam, 0.0))
        lam.flags.writeable = False
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "clamp", max(float(self.clamp), clamp))

    @property
    def k(self) -> int:
        return self.eigenvalues.size


@dataclass(frozen=True)
class SystemParams:
    """Activity ratio, SNR and dimensions of one operating point."""

    p: float
    snr_db: float
    m: int
    n: int
    k: int

    def __post_init__(self):
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"p must be in (0,1], got {self.p}")
        if self.m < 1 or self.n < 1 or self.k < 1:
            raise DomainError("m, n, k must be positive")
        if self.m > self.n:
            raise DomainError("need m <= n")
        if self.k > self.n:
            raise DomainError(f"k={self.k} exceeds n={self.n}")
        if abs(self.k - self.p * self.n) > 0.5 + 1e-9:
            raise DomainError(f"k={self.k} inconsistent with round(p*n)={self.p * self.n:.3f}")

    @property
    def beta(self) -> float:
        return self.k / self.m

    @property
    def gamma(self) -> float:
        return self.m / self.n

    @property
    def gamma_inv(self) -> float:
        return self.n / self.m

    @property
    def snr(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)


@dataclass(frozen=True)
class VerificationReport:
    """Per-check worst violations for one verification level."""

    level: str
    tol: float
    checks: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.checks.values())

    def describe(self) -> str:
        lines = [f"level={self.level} tol={self.tol:g} -> {'PASS' if self.passed else 'FAIL'}"]
        for name, violation in self.checks.items():
            status = "ok" if violation <= self.tol else "VIOLATED"
            lines.append(f"  {name}: max violation {violation:.3e} [{status}]")
        return "\n".join(lines)


def welch_bound(m: int, n: int) -> float:
    """Mean-square cross-correlation lower bound (n-m)/((n-1)*m) for unit-norm frames."""
    if n < 2:
        raise DomainError(f"welch bound needs n >= 2, got n={n}")
    if not 1 <= m <= n:
        raise DomainError(f"welch bound needs 1 <= m <= n, got m={m}, n={n}")
    return (n - m) / ((n - 1) * m)


def column_normalize(frame: Frame) -> Frame:
    """Rescale every column to unit norm, keeping directions."""
    norms = np.linalg.norm(frame.entries, axis=0)
    small = np.flatnonzero(norms < 1e-14)
    if small.size:
        raise ZeroColumn(int(small[0]))
    kind = frame.recipe.kind
    if kind not in UNIT_NORM_KINDS:
        kind = "gaussian-normalized" if kind == "gaussian" else f"{kind}-normalized"
    recipe = FrameRecipe(kind, dict(frame.recipe.params), frame.recipe.seed)
    return Frame(frame.entries / norms, recipe)


def subgram_spectrum(frame: Frame, subset: IndexSubset) -> GramSpectrum:
    """Eigenvalues of the K x K Gram of the selected columns.

    Computed as squared singular values of the M x K subframe (never by
    forming the full-frame Gram): better conditioned, and handles K > M by
    zero-padding the K - min(M, K) null directions.
    """
    if subset.indices[-1] >= frame.n:
        raise DomainError(
            f"subset index {subset.indices[-1]} out of range for N={frame.n}"
        )
    sub = frame.entries[:, list(subset.indices)]
    svals = np.linalg.svd(sub, compute_uv=False)
    lam = np.zeros(subset.k)
    lam[: svals.size] = svals**2
    return GramSpectrum(lam)


def coherence_stats(frame: Frame) -> tuple[float, float]:
    """Mean-square and maximum-square cross-correlation over distinct columns."""
    if frame.n < 2:
        raise DomainError("coherence statistics need N >= 2")
    g = frame.entries.conj().T @ frame.entries
    sq = np.abs(g) ** 2
    np.fill_diagonal(sq, 0.0)
    n = frame.n
    i_ms = float(np.sum(sq)) / (n * (n - 1))
    i_max = float(np.max(sq))
    return i_ms, i_max


def verify_frame(frame: Frame, level: str = "unit-norm", tol: float = DEFAULT_TOL) -> VerificationReport:
    """Check unit-norm / tightness / equiangularity without raising.

    Levels nest: "untf" includes the unit-norm check, "etf" includes both.
    """
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    if level not in ("unit-norm", "untf", "etf"):
        raise DomainError(f"unknown verification level {level!r}")
    checks: dict[str, float] = {}
    norms = np.linalg.norm(frame.entries, axis=0)
    checks["unit-norm"] = float(np.max(np.abs(norms - 1.0)))
    if level in ("untf", "etf"):
        gram_rows = frame.entries @ frame.entries.conj().T
        target = (frame.n / frame.m) * np.eye(frame.m)
        checks["tightness"] = float(np.max(np.abs(gram_rows - target)))
    if level == "etf":
        if frame.n < 2:
            checks["equiangularity"] = 0.0
        else:
            bound = welch_bound(frame.m, frame.n)
            g = frame.entries.conj().T @ frame.entries
            sq = np.abs(g) ** 2
            np.fill_diagonal(sq, bound)
            checks["equiangularity"] = float(np.max(np.abs(sq - bound)))
    return VerificationReport(level=level, tol=tol, checks=checks)


# --- text serialization ------------------------------------------------------
#
# One header line "M N kind", then M lines of N entries formatted re+imi.
# 17 significant digits give exact double round-trips.


def _format_entry(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def dump_frame(frame: Frame) -> str:
    lines = [f"{frame.m} {frame.n} {frame.recipe.kind}"]
    for row in frame.entries:
        lines.append(" ".join(_format_entry(z) for z in row))
    return "\n".join(lines) + "\n"


def parse_frame(text: str) -> Frame:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise DomainError("empty frame text")
    header = lines[0].split()
    if len(header) != 3:
        raise DomainError(f"bad frame header {lines[0]!r}; expected 'M N kind'")
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError as exc:
        raise DomainError(f"bad frame header {lines[0]!r}") from exc
    kind = header[2]
    if len(lines) != m + 1:
        raise DomainError(f"expected {m} entry rows, found {len(lines) - 1}")
    entries = np.empty((m, n), dtype=np.complex128)
    for r, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != n:
            raise DomainError(f"row {r}: expected {n} entries, found {len(tokens)}")
        for c, tok in enumerate(tokens):
            try:
                entries[r, c] = complex(tok.replace("i", "j"))
            except ValueError as exc:
                raise DomainError(f"row {r}, column {c}: bad entry {tok!r}") from exc
    return Frame(entries, FrameRecipe(kind))


def save_frame(frame: Frame, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_frame(frame))


def load_frame(path) -> Frame:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_frame(fh.read())
