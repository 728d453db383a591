"""Equiangular tight frames from difference sets and Steiner systems.

Two exact families are constructed directly (DFT rows indexed by a
difference set; block embedding of unimodular rows over a (2,k,v)-Steiner
incidence). Naimark complements of both and the degenerate square case
extend the catalog so load sweeps can match aspect ratios above 1/2.
Every constructed frame is verified equiangular-tight before it is returned.
"""

from __future__ import annotations

import itertools
import sys
from concurrent import futures
from dataclasses import dataclass

import numpy as np
from scipy.linalg import hadamard as _sylvester_hadamard

from .errors import (
    ConstructionBug,
    DomainError,
    InfeasibleParameters,
    NotADifferenceSet,
    NotASteinerSystem,
    NotSupported,
    SearchExhausted,
)
from .frames import Frame, FrameRecipe, verify_frame
from .generators import gen_lpf
from .seeding import derive_seed, derived_rng

DEFAULT_SEARCH_BUDGET = 50_000_000
_RESTART_NODE_CAP = 200_000


# --- difference sets ---------------------------------------------------------


@dataclass(frozen=True)
class DifferenceSet:
    """k distinct residues mod v whose nonzero differences each occur lambda times."""

    residues: tuple[int, ...]
    v: int
    lam: int

    @property
    def k(self) -> int:
        return len(self.residues)


def verify_difference_set(residues, v: int) -> int:
    """Count difference multiplicities; return lambda or raise NotADifferenceSet."""
    if v < 2:
        raise DomainError(f"modulus v must be >= 2, got {v}")
    res = sorted(int(r) for r in residues)
    if not res:
        raise DomainError("residues must be nonempty")
    if len(set(res)) != len(res):
        raise DomainError("residues must be distinct")
    if res[0] < 0 or res[-1] >= v:
        raise DomainError(f"residues must lie in [0, {v})")
    counts = [0] * v
    for a, b in itertools.permutations(res, 2):
        counts[(a - b) % v] += 1
    lam = counts[1]
    for b in range(2, v):
        if counts[b] != lam:
            raise NotADifferenceSet(
                f"b=1 has {lam} ordered pairs but b={b} has {counts[b]}"
            )
    k = len(res)
    if lam * (v - 1) != k * (k - 1):
        raise NotADifferenceSet(
            f"counting identity failed: lambda*(v-1)={lam * (v - 1)} != k*(k-1)={k * (k - 1)}"
        )
    return lam


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def paley_difference_set(q: int) -> DifferenceSet:
    """Quadratic residues mod a prime q = 3 (mod 4): a (q, (q-1)/2, (q-3)/4) set."""
    if not _is_prime(q) or q % 4 != 3:
        raise NotSupported(f"Paley set needs a prime q = 3 (mod 4), got q={q}")
    residues = tuple(sorted({(x * x) % q for x in range(1, (q - 1) // 2 + 1)}))
    lam = verify_difference_set(residues, q)
    if lam != (q - 3) // 4:
        raise ConstructionBug(f"Paley set for q={q} verified with lambda={lam}")
    return DifferenceSet(residues, q, lam)


def complement_difference_set(ds: DifferenceSet) -> DifferenceSet:
    """The complementary residues, a (v, v-k, v-2k+lam) difference set."""
    residues = tuple(r for r in range(ds.v) if r not in set(ds.residues))
    lam = verify_difference_set(residues, ds.v)
    return DifferenceSet(residues, ds.v, lam)


def etf_from_difference_set(ds: DifferenceSet) -> Frame:
    """ETF from the DFT rows indexed by the difference set: M = k, N = v."""
    verify_difference_set(ds.residues, ds.v)
    m, n = ds.k, ds.v
    rows = np.array(ds.residues).reshape(-1, 1)
    cols = np.arange(n).reshape(1, -1)
    entries = np.exp(-2j * np.pi * rows * cols / n) / np.sqrt(m)
    frame = Frame(entries, FrameRecipe("etf-diffset", {"v": ds.v, "residues": ds.residues}))
    report = verify_frame(frame, "etf", 1e-9)
    if not report.passed:
        raise ConstructionBug(f"difference-set ETF failed verification:\n{report.describe()}")
    return frame


# --- Steiner systems ---------------------------------------------------------


@dataclass(frozen=True)
class SteinerIncidence:
    """b x v block/point 0-1 incidence of a (2, k, v)-Steiner system."""

    blocks: np.ndarray
    k_block: int
    r_point: int

    def __post_init__(self):
        a = np.asarray(self.blocks, dtype=np.uint8)
        if a.ndim != 2:
            raise DomainError("incidence must be 2-d")
        a = np.ascontiguousarray(a)
        a.flags.writeable = False
        object.__setattr__(self, "blocks", a)

    @property
    def b(self) -> int:
        return self.blocks.shape[0]

    @property
    def v(self) -> int:
        return self.blocks.shape[1]


def verify_steiner(inc: SteinerIncidence) -> tuple[int, int]:
    """Check all Steiner constraints exactly; return (b, r)."""
    a = inc.blocks
    if not np.all((a == 0) | (a == 1)):
        raise NotASteinerSystem("incidence entries must be 0/1")
    b, v = a.shape
    k = inc.k_block
    row_sums = a.sum(axis=1)
    bad = np.flatnonzero(row_sums != k)
    if bad.size:
        raise NotASteinerSystem(f"block {bad[0]} has {row_sums[bad[0]]} points, expected k={k}")
    if (v - 1) % (k - 1) != 0:
        raise NotASteinerSystem(f"r=(v-1)/(k-1) not an integer for v={v}, k={k}")
    r = (v - 1) // (k - 1)
    if r != inc.r_point:
        raise NotASteinerSystem(f"declared r={inc.r_point} but (v-1)/(k-1)={r}")
    col_sums = a.sum(axis=0)
    bad = np.flatnonzero(col_sums != r)
    if bad.size:
        raise NotASteinerSystem(f"point {bad[0]} lies in {col_sums[bad[0]]} blocks, expected r={r}")
    co = a.T.astype(np.int64) @ a.astype(np.int64)
    np.fill_diagonal(co, 1)
    if not np.all(co == 1):
        i, j = np.argwhere(co != 1)[0]
        raise NotASteinerSystem(f"pair ({i},{j}) lies in {co[i, j]} blocks, expected 1")
    if b * k * (k - 1) != v * (v - 1):
        raise NotASteinerSystem(f"b={b} inconsistent with v(v-1)/(k(k-1))")
    return b, r


def _blocks_to_incidence(blocks, v: int, k: int) -> SteinerIncidence:
    a = np.zeros((len(blocks), v), dtype=np.uint8)
    for i, block in enumerate(blocks):
        a[i, list(block)] = 1
    return SteinerIncidence(a, k_block=k, r_point=(v - 1) // (k - 1))


def _bose_triples(v: int) -> list[tuple[int, ...]]:
    # Classical construction on Z_t x {0,1,2}, t = v/3 odd; point (x,i) -> x + t*i.
    t = v // 3
    inv2 = (t + 1) // 2
    blocks = [(x, x + t, x + 2 * t) for x in range(t)]
    for i in range(3):
        for x in range(t):
            for y in range(x + 1, t):
                z = ((x + y) * inv2) % t
                blocks.append(tuple(sorted((x + t * i, y + t * i, z + t * ((i + 1) % 3)))))
    return blocks


def _bit_indices(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class _Budget(Exception):
    pass


def _attempt_search(v: int, k: int, r: int, rng: np.random.Generator, node_cap: int):
    """One randomized depth-first pass; returns (blocks|None, nodes used).

    Points are processed in order; at point c every still-uncovered pair
    (c, x) must be covered now, so the new blocks through c partition the
    available higher points exactly. The smallest available point is forced
    into the current block, which removes ordering symmetry.
    """
    full = (1 << v) - 1
    uncov = [full & ~(1 << p) for p in range(v)]
    cnt = [0] * v
    chosen: list[tuple[int, ...]] = []
    nodes = 0

    def place(members: tuple[int, ...]):
        for a, b in itertools.combinations(members, 2):
            uncov[a] &= ~(1 << b)
            uncov[b] &= ~(1 << a)
        for p in members:
            cnt[p] += 1
        chosen.append(members)

    def unplace(members: tuple[int, ...]):
        chosen.pop()
        for p in members:
            cnt[p] -= 1
        for a, b in itertools.combinations(members, 2):
            uncov[a] |= 1 << b
            uncov[b] |= 1 << a

    def point(col: int) -> bool:
        if col == v:
            return True
        avail = uncov[col] & (full << (col + 1))
        need = r - cnt[col]
        if avail.bit_count() != need * (k - 1):
            return False
        if need == 0:
            return point(col + 1)
        return fill(col, avail, need)

    def fill(col: int, avail: int, need: int) -> bool:
        nonlocal nodes
        if need == 0:
            return point(col + 1)
        x = (avail & -avail).bit_length() - 1
        rest = avail & ~(1 << x)
        pool = rest & uncov[x]
        if k == 2:
            partner_sets = [()]
        elif k == 3:
            partner_sets = [(y,) for y in _bit_indices(pool)]
        else:
            pts = list(_bit_indices(pool))
            partner_sets = [
                combo
                for combo in itertools.combinations(pts, k - 2)
                if all(uncov[a] >> b & 1 for a, b in itertools.combinations(combo, 2))
            ]
        rng.shuffle(partner_sets)
        for partners in partner_sets:
            nodes += 1
            if nodes > node_cap:
                raise _Budget
            members = (col, x) + tuple(partners)
            remaining = avail & ~(1 << x)
            for pnt in partners:
                remaining &= ~(1 << pnt)
            place(members)
            if fill(col, remaining, need - 1):
                return True
            unplace(members)
        return False

    limit = sys.getrecursionlimit()
    b_total = v * (v - 1) // (k * (k - 1))
    sys.setrecursionlimit(max(limit, 4 * (b_total + v) + 200))
    try:
        found = point(0)
    except _Budget:
        return None, nodes
    finally:
        sys.setrecursionlimit(limit)
    return (chosen if found else None), nodes


def _backtracking_blocks(v: int, k: int, r: int, seed: int, budget: int):
    total = 0
    attempt = 0
    while total < budget:
        cap = min(_RESTART_NODE_CAP, budget - total)
        rng = derived_rng("steiner-search", v, k, seed, attempt)
        blocks, used = _attempt_search(v, k, r, rng, cap)
        total += max(1, used)
        if blocks is not None:
            return blocks, total
        attempt += 1
    raise SearchExhausted(total, f"no (2,{k},{v}) system within {budget} node expansions")


def _search_worker(args) -> tuple[list[tuple[int, ...]], int]:
    v, k, r, seed, budget = args
    return _backtracking_blocks(v, k, r, seed, budget)


def steiner_system(
    k: int,
    v: int,
    method: str = "auto",
    seed: int = 0,
    budget: int = DEFAULT_SEARCH_BUDGET,
    workers: int = 1,
) -> SteinerIncidence:
    """A verified (2, k, v)-Steiner incidence.

    methods: "pairs" (k=2, all 2-subsets), "bose" (k=3, v = 3 mod 6),
    "backtracking" (randomized depth-first search, deterministic per seed
    with a single worker), or "auto" to pick the cheapest applicable one.
    Multi-worker backtracking races independently seeded searches and
    returns the first verified solution.
    """
    if k < 2 or v < k:
        raise DomainError(f"need 2 <= k <= v, got k={k}, v={v}")
    if method == "auto":
        if k == 2:
            method = "pairs"
        elif k == 3 and v % 6 == 3:
            method = "bose"
        else:
            method = "backtracking"

    if method == "pairs":
        if k != 2:
            raise InfeasibleParameters(f"pairs method requires k=2, got k={k}")
        blocks = list(itertools.combinations(range(v), 2))
    elif method == "bose":
        if k != 3 or v % 6 != 3:
            raise InfeasibleParameters(f"bose method requires k=3 and v=3 (mod 6), got k={k}, v={v}")
        blocks = _bose_triples(v)
    elif method == "backtracking":
        if (v - 1) % (k - 1) != 0 or (v * (v - 1)) % (k * (k - 1)) != 0:
            raise InfeasibleParameters(
                f"(2,{k},{v}) fails divisibility: r=(v-1)/(k-1) and b=v(v-1)/(k(k-1)) must be integers"
            )
        r = (v - 1) // (k - 1)
        if workers <= 1:
            blocks, _ = _backtracking_blocks(v, k, r, seed, budget)
        else:
            jobs = [(v, k, r, derive_seed("worker", seed, w), budget) for w in range(workers)]
            with futures.ProcessPoolExecutor(max_workers=workers) as pool:
                tasks = [pool.submit(_search_worker, job) for job in jobs]
                blocks = None
                error: Exception | None = None
                for done in futures.as_completed(tasks):
                    try:
                        blocks, _ = done.result()
                        break
                    except SearchExhausted as exc:
                        error = exc
                for t in tasks:
                    t.cancel()
                if blocks is None:
                    raise error if error is not None else SearchExhausted(budget)
    else:
        raise DomainError(f"unknown steiner method {method!r}")

    inc = _blocks_to_incidence(blocks, v, k)
    verify_steiner(inc)
    return inc


def save_incidence(inc: SteinerIncidence, path) -> None:
    """One block per row, comma-separated 0/1."""
    with open(path, "w", encoding="utf-8") as fh:
        for row in inc.blocks:
            fh.write(",".join(str(int(x)) for x in row) + "\n")


def load_incidence(path, k_block: int) -> SteinerIncidence:
    """Read a 0/1 CSV (floats accepted) and verify it as a Steiner incidence."""
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append([int(float(tok)) for tok in line.split(",")])
    if not rows:
        raise DomainError(f"no rows in {path}")
    a = np.array(rows, dtype=np.uint8)
    v = a.shape[1]
    inc = SteinerIncidence(a, k_block=k_block, r_point=(v - 1) // (k_block - 1))
    verify_steiner(inc)
    return inc


# --- unimodular seed matrices and the Steiner embedding -----------------------


def unimodular_matrix(size: int, kind: str = "dft") -> np.ndarray:
    """Square matrix with unit-modulus entries and orthogonal rows."""
    if size < 1:
        raise DomainError(f"size must be positive, got {size}")
    if kind == "dft":
        idx = np.arange(size)
        return np.exp(-2j * np.pi * np.outer(idx, idx) / size).astype(np.complex128)
    if kind == "hadamard":
        if size & (size - 1):
            raise NotSupported(f"Sylvester Hadamard needs a power-of-2 size, got {size}")
        return _sylvester_hadamard(size).astype(np.complex128)
    raise DomainError(f"unknown unimodular kind {kind!r}")


def steiner_etf(inc: SteinerIncidence, h_kind: str = "auto") -> Frame:
    """ETF of size b x v(r+1) from a Steiner incidence and unimodular rows.

    Column (j, h) carries row h of the (r+1)-point unimodular matrix,
    scaled by 1/sqrt(r), on the rows of the blocks through point j (in
    ascending block order); "auto" picks Hadamard when r+1 is a power of 2.
    """
    b, r = verify_steiner(inc)
    size = r + 1
    if h_kind == "auto":
        h_kind = "hadamard" if size & (size - 1) == 0 else "dft"
    h = unimodular_matrix(size, h_kind)
    v = inc.v
    n = v * size
    entries = np.zeros((b, n), dtype=np.complex128)
    scale = 1.0 / np.sqrt(r)
    for j in range(v):
        rows_j = np.flatnonzero(inc.blocks[:, j])
        for hh in range(size):
            entries[rows_j, j * size + hh] = h[hh, :r] * scale
    frame = Frame(
        entries,
        FrameRecipe("etf-steiner", {"v": v, "k": inc.k_block, "r": r, "h_kind": h_kind}),
    )
    report = verify_frame(frame, "etf", 1e-9)
    if not report.passed:
        raise ConstructionBug(f"Steiner ETF failed verification:\n{report.describe()}")
    return frame


def naimark_complement(frame: Frame) -> Frame:
    """The (N-M) x N ETF spanning the null space of an M x N ETF.

    A scaled orthonormal basis of ker(F) has unit columns and cross-
    correlations (M/(N-M)) * c_ij, so equiangularity carries over.
    """
    m, n = frame.m, frame.n
    if m >= n:
        raise DomainError("complement needs M < N")
    _, _, vh = np.linalg.svd(frame.entries, full_matrices=True)
    entries = np.sqrt(n / (n - m)) * vh[m:, :]
    out = Frame(
        entries,
        FrameRecipe("etf-complement", {"base": frame.recipe.kind, "m": m, "n": n}),
    )
    report = verify_frame(out, "etf", 1e-9)
    if not report.passed:
        raise ConstructionBug(f"Naimark complement failed verification:\n{report.describe()}")
    return out


# --- construction catalog -----------------------------------------------------


@dataclass(frozen=True)
class EtfCatalogEntry:
    """One constructible ETF shape: family plus its defining parameter."""

    family: str  # square-dft | paley | steiner-pairs | steiner-bose | steiner-search
    m: int
    n: int
    param: int  # q for paley, v for steiner, m for square-dft
    k_block: int = 0
    complement: bool = False

    @property
    def gamma(self) -> float:
        return self.m / self.n

    def describe(self) -> str:
        tag = f"{self.family}(param={self.param}"
        if self.k_block:
            tag += f", k={self.k_block}"
        tag += ")"
        if self.complement:
            tag += "+naimark"
        return f"{tag} {self.m}x{self.n}"


_FAMILY_COST = {"square-dft": 0, "paley": 1, "steiner-pairs": 1, "steiner-bose": 2, "steiner-search": 4}

# Searched (2,k,v) systems that the randomized DFS settles in well under a
# second; (2,4,25) and (2,4,28) thrash and are left out.
_SEARCH_SHAPES = [(3, 13), (3, 19), (3, 25), (3, 31), (3, 37), (4, 13), (4, 16), (5, 21), (5, 25)]


def _steiner_shape(k: int, v: int) -> tuple[int, int]:
    r = (v - 1) // (k - 1)
    b = v * (v - 1) // (k * (k - 1))
    return b, v * (r + 1)


def enumerate_etf_catalog(m_min: int, m_max: int = 512) -> list[EtfCatalogEntry]:
    """All catalog shapes with m_min <= M <= m_max (square entries excluded:
    their M is free and chosen at lookup time)."""
    entries: list[EtfCatalogEntry] = []

    def add(family, m, n, param, k_block=0, complement=False):
        if m_min <= m <= m_max:
            entries.append(EtfCatalogEntry(family, m, n, param, k_block, complement))

    for q in range(7, 2 * m_max + 2, 4):
        if _is_prime(q):
            add("paley", (q - 1) // 2, q, q)
            add("paley", (q + 1) // 2, q, q, complement=True)

    for v in range(4, 60):
        b, n = _steiner_shape(2, v)
        add("steiner-pairs", b, n, v, 2)
        add("steiner-pairs", n - b, n, v, 2, complement=True)

    for v in range(7, 60):
        if v % 6 == 3:
            b, n = _steiner_shape(3, v)
            add("steiner-bose", b, n, v, 3)
            add("steiner-bose", n - b, n, v, 3, complement=True)

    for k, v in _SEARCH_SHAPES:
        b, n = _steiner_shape(k, v)
        add("steiner-search", b, n, v, k)
        add("steiner-search", n - b, n, v, k, complement=True)

    return entries


def build_catalog_frame(entry: EtfCatalogEntry, budget: int = DEFAULT_SEARCH_BUDGET) -> Frame:
    """Construct (and verify) the frame behind a catalog entry.

    Search-built incidences use a seed derived from the shape, so a given
    entry always yields the same frame.
    """
    if entry.family == "square-dft":
        return gen_lpf(entry.m, entry.m)
    if entry.family == "paley":
        ds = paley_difference_set(entry.param)
        if entry.complement:
            ds = complement_difference_set(ds)
        return etf_from_difference_set(ds)
    method = {"steiner-pairs": "pairs", "steiner-bose": "bose", "steiner-search": "backtracking"}[
        entry.family
    ]
    inc = steiner_system(
        entry.k_block,
        entry.param,
        method=method,
        seed=derive_seed("catalog", entry.k_block, entry.param),
        budget=budget,
    )
    frame = steiner_etf(inc, "auto")
    if entry.complement:
        frame = naimark_complement(frame)
    if (frame.m, frame.n) != (entry.m, entry.n):
        raise ConstructionBug(f"catalog entry {entry.describe()} built {frame.m}x{frame.n}")
    return frame


def lookup_etf(
    beta_req: float,
    p: float,
    m_min: int,
    m_max: int = 512,
    gamma_rel_tol: float = 0.05,
) -> EtfCatalogEntry | None:
    """Best catalog entry for one sweep cell, or None when nothing fits.

    Feasibility: M >= m_min, the achieved aspect ratio within gamma_rel_tol
    of the requested p/beta, and K = round(p*N) in [1, M]. Among feasible
    entries the achieved load round(p*N)/M closest to the requested beta
    wins; ties prefer smaller frames.
    """
    gamma_req = p / beta_req
    if gamma_req > 1.0 + 1e-12:
        return None
    candidates = list(enumerate_etf_catalog(m_min, m_max))
    candidates.append(EtfCatalogEntry("square-dft", m_min, m_min, m_min))
    best = None
    best_key = None
    for entry in candidates:
        if abs(entry.gamma / gamma_req - 1.0) > gamma_rel_tol:
            continue
        k = round(p * entry.n)
        if not 1 <= k <= entry.m:
            continue
        beta_act = k / entry.m
        cost = _FAMILY_COST[entry.family] + (1 if entry.complement else 0)
        key = (
            abs(beta_act - beta_req),
            entry.m,
            abs(entry.gamma - gamma_req),
            cost,
            entry.family,
            entry.param,
        )
        if best_key is None or key < best_key:
            best, best_key = entry, key
    return best
