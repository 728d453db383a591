"""Frame constructions and capacity analysis for partially active code-domain NOMA."""

from .capacity import (
    CapacityReport,
    McCapacity,
    lgm,
    mc_capacity,
    measures_from_spectrum,
    solve_constant_ebn0,
)
from .etf import (
    DifferenceSet,
    SteinerIncidence,
    etf_from_difference_set,
    lookup_etf,
    naimark_complement,
    paley_difference_set,
    steiner_etf,
    steiner_system,
    unimodular_matrix,
    verify_difference_set,
    verify_steiner,
)
from .frames import (
    Frame,
    FrameRecipe,
    GramSpectrum,
    IndexSubset,
    SystemParams,
    VerificationReport,
    coherence_stats,
    column_normalize,
    load_frame,
    save_frame,
    subgram_spectrum,
    verify_frame,
    welch_bound,
)
from .generators import SparseRecipe, gen_gaussian, gen_lpf, gen_sparse_regular
from .report import emit_outputs, read_sweep_csv, write_sweep_csv
from .spectra import (
    EmpiricalDistribution,
    empirical_spectrum,
    ks_distance,
    manova_reference,
    mp_reference,
    sample_subset,
)
from .sweep import (
    SweepConfig,
    SweepRow,
    find_optimal_beta,
    plan_sweep,
    run_sweep,
    slope_at,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityReport", "McCapacity", "lgm", "mc_capacity", "measures_from_spectrum",
    "solve_constant_ebn0",
    "DifferenceSet", "SteinerIncidence", "etf_from_difference_set", "lookup_etf",
    "naimark_complement", "paley_difference_set", "steiner_etf", "steiner_system",
    "unimodular_matrix", "verify_difference_set", "verify_steiner",
    "Frame", "FrameRecipe", "GramSpectrum", "IndexSubset", "SystemParams",
    "VerificationReport", "coherence_stats", "column_normalize", "load_frame",
    "save_frame", "subgram_spectrum", "verify_frame", "welch_bound",
    "SparseRecipe", "gen_gaussian", "gen_lpf", "gen_sparse_regular",
    "emit_outputs", "read_sweep_csv", "write_sweep_csv",
    "EmpiricalDistribution", "empirical_spectrum", "ks_distance", "manova_reference",
    "mp_reference", "sample_subset",
    "SweepConfig", "SweepRow", "find_optimal_beta", "plan_sweep", "run_sweep", "slope_at",
]
