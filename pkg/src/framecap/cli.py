"""Command-line interface: construction, verification, spectra, capacity, sweeps.

Exit codes: 0 success, 1 usage error, 2 infeasible plan/parameters,
3 construction failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import capacity as cap
from . import etf as etfmod
from . import report, spectra, sweep
from .errors import (
    ConstructionBug,
    EmptyPlan,
    FramecapError,
    GenerationExhausted,
    InfeasibleParameters,
    InfeasibleRegularity,
    NotADifferenceSet,
    NotASteinerSystem,
    SearchExhausted,
)
from .frames import SystemParams, column_normalize, load_frame, save_frame, verify_frame
from .generators import SparseRecipe, gen_gaussian, gen_lpf, gen_sparse_regular

USAGE_ERROR, INFEASIBLE, CONSTRUCTION_FAILURE = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _csv_floats(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _csv_names(text: str) -> tuple[str, ...]:
    return tuple(tok.strip() for tok in text.split(",") if tok.strip())


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="base RNG seed (default 0)")
    common.add_argument("--trials", type=int, default=None, help="Monte-Carlo trials (default 50)")
    common.add_argument("--out", type=str, default=None, help="output file or directory")

    parser = _Parser(prog="framecap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_gen = sub.add_parser("gen", parents=[common], help="construct and verify a frame")
    p_gen.add_argument("--kind", required=True,
                       choices=["sparse", "lpf", "gaussian", "etf-diffset", "etf-steiner"])
    p_gen.add_argument("--m", type=int, help="resource count M")
    p_gen.add_argument("--n", type=int, help="user count N")
    p_gen.add_argument("--d", type=int, default=2, help="sparse nonzeros per column")
    p_gen.add_argument("--no-normalize", action="store_true", help="skip gaussian column normalization")
    p_gen.add_argument("--q", type=int, help="Paley prime (q = 3 mod 4) for etf-diffset")
    p_gen.add_argument("--steiner-k", type=int, default=2, help="Steiner block size")
    p_gen.add_argument("--steiner-v", type=int, help="Steiner point count")
    p_gen.add_argument("--method", default="auto", choices=["auto", "pairs", "bose", "backtracking"])
    p_gen.add_argument("--h-kind", default="auto", choices=["auto", "dft", "hadamard"])
    p_gen.add_argument("--budget", type=int, default=etfmod.DEFAULT_SEARCH_BUDGET,
                       help="backtracking node-expansion budget")
    p_gen.add_argument("--workers", type=int, default=1, help="parallel backtracking workers")
    p_gen.add_argument("--incidence-out", type=str, help="write the Steiner incidence as 0/1 CSV")
    p_gen.add_argument("--incidence-in", type=str, help="build the Steiner ETF from an incidence CSV")

    p_verify = sub.add_parser("verify", parents=[common], help="verify a serialized frame")
    p_verify.add_argument("--frame", required=True, help="frame text file")
    p_verify.add_argument("--level", default="unit-norm", choices=["unit-norm", "untf", "etf"])
    p_verify.add_argument("--tol", type=float, default=1e-9)

    p_spec = sub.add_parser("spectrum", parents=[common],
                            help="empirical subframe spectrum and reference comparison")
    p_spec.add_argument("--kind", required=True,
                        choices=["sparse", "lpf", "gaussian", "etf-diffset", "etf-steiner"])
    p_spec.add_argument("--m", type=int)
    p_spec.add_argument("--n", type=int)
    p_spec.add_argument("--d", type=int, default=2)
    p_spec.add_argument("--q", type=int)
    p_spec.add_argument("--steiner-k", type=int, default=2)
    p_spec.add_argument("--steiner-v", type=int)
    p_spec.add_argument("--method", default="auto", choices=["auto", "pairs", "bose", "backtracking"])
    p_spec.add_argument("--k", type=int, required=True, help="active users per draw")
    p_spec.add_argument("--ref", default="none", choices=["none", "mp", "manova"])
    p_spec.add_argument("--bins", type=int, default=100, help="histogram bins")

    p_cap = sub.add_parser("capacity", parents=[common], help="single-point Monte-Carlo capacity")
    p_cap.add_argument("--kind", required=True,
                       choices=["sparse", "lpf", "gaussian", "etf-diffset", "etf-steiner"])
    p_cap.add_argument("--m", type=int)
    p_cap.add_argument("--n", type=int)
    p_cap.add_argument("--d", type=int, default=2)
    p_cap.add_argument("--q", type=int)
    p_cap.add_argument("--steiner-k", type=int, default=2)
    p_cap.add_argument("--steiner-v", type=int)
    p_cap.add_argument("--method", default="auto", choices=["auto", "pairs", "bose", "backtracking"])
    p_cap.add_argument("--p", type=float, help="activity ratio (sets K = round(p*N))")
    p_cap.add_argument("--k", type=int, help="active users (overrides --p)")
    p_cap.add_argument("--snr-db", type=float, default=30.0)

    p_sweep = sub.add_parser("sweep", parents=[common], help="constant-p load sweep")
    p_sweep.add_argument("--config", type=str, help="JSON config file")
    p_sweep.add_argument("--kinds", type=str, help="comma-separated frame kinds")
    p_sweep.add_argument("--p", type=float)
    p_sweep.add_argument("--snr-db", type=str, help="comma-separated SNR list in dB")
    p_sweep.add_argument("--betas", type=str, help="comma-separated beta grid")
    p_sweep.add_argument("--m-min", type=int)
    p_sweep.add_argument("--d", type=int)
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--no-figures", action="store_true", help="skip PNG rendering")

    p_opt = sub.add_parser("optimal", parents=[common], help="argmax beta from a sweep table")
    p_opt.add_argument("--table", required=True, help="sweep.csv path")
    p_opt.add_argument("--measure", default="cap_res", choices=list(sweep.MEASURES))
    p_opt.add_argument("--kind", required=True)
    p_opt.add_argument("--snr-db", type=float, required=True)

    p_slope = sub.add_parser("slope", parents=[common], help="slope vs 1/beta from a sweep table")
    p_slope.add_argument("--table", required=True, help="sweep.csv path")
    p_slope.add_argument("--measure", default="cap_res", choices=list(sweep.MEASURES))
    p_slope.add_argument("--kind", required=True)
    p_slope.add_argument("--snr-db", type=float, required=True)
    p_slope.add_argument("--beta0", type=float, default=0.95)

    return parser


def _require(parser_args, names: list[str]) -> None:
    missing = [n for n in names if getattr(parser_args, n.replace("-", "_"), None) is None]
    if missing:
        raise FramecapError(f"missing required options for this kind: {', '.join('--' + n for n in missing)}")


def _seed(args) -> int:
    return args.seed if args.seed is not None else 0


def _trials(args) -> int:
    return args.trials if args.trials is not None else 50


def _build_frame(args, seed: int):
    kind = args.kind
    if kind == "lpf":
        _require(args, ["m", "n"])
        return gen_lpf(args.m, args.n)
    if kind == "gaussian":
        _require(args, ["m", "n"])
        normalize = not getattr(args, "no_normalize", False)
        return gen_gaussian(args.m, args.n, seed=seed, normalize=normalize)
    if kind == "sparse":
        _require(args, ["m", "n"])
        return gen_sparse_regular(SparseRecipe(args.m, args.n, args.d, seed=seed))
    if kind == "etf-diffset":
        _require(args, ["q"])
        return etfmod.etf_from_difference_set(etfmod.paley_difference_set(args.q))
    # etf-steiner
    if getattr(args, "incidence_in", None):
        inc = etfmod.load_incidence(args.incidence_in, k_block=args.steiner_k)
    else:
        _require(args, ["steiner-v"])
        inc = etfmod.steiner_system(
            args.steiner_k,
            args.steiner_v,
            method=args.method,
            seed=seed,
            budget=getattr(args, "budget", etfmod.DEFAULT_SEARCH_BUDGET),
            workers=getattr(args, "workers", 1),
        )
    if getattr(args, "incidence_out", None):
        etfmod.save_incidence(inc, args.incidence_out)
        print(f"wrote incidence {inc.b}x{inc.v} -> {args.incidence_out}")
    return etfmod.steiner_etf(inc, getattr(args, "h_kind", "auto"))


_GEN_VERIFY_LEVEL = {"lpf": "untf", "etf-diffset": "etf", "etf-steiner": "etf",
                     "gaussian": "unit-norm"}


def _cmd_gen(args) -> int:
    frame = _build_frame(args, _seed(args))
    print(f"built {frame.kind} frame {frame.m}x{frame.n} (gamma={frame.m / frame.n:.4f})")
    if args.kind == "sparse":
        d = frame.recipe.params["d"]
        print(f"regularity: d={d} per column, {d * frame.n // frame.m} per row "
              f"(restarts={frame.recipe.params['restarts']})")
    else:
        level = _GEN_VERIFY_LEVEL[args.kind]
        if args.kind == "gaussian" and getattr(args, "no_normalize", False):
            print("verification skipped: unnormalized gaussian columns are only unit-norm on average")
        else:
            print(verify_frame(frame, level).describe())
    if args.out:
        save_frame(frame, args.out)
        print(f"wrote frame -> {args.out}")
    return 0


def _cmd_verify(args) -> int:
    frame = load_frame(args.frame)
    print(f"loaded {frame.kind} frame {frame.m}x{frame.n} from {args.frame}")
    print(verify_frame(frame, args.level, args.tol).describe())
    return 0


def _spectrum_source(args, seed: int):
    """Fixed frame for deterministic kinds; fresh-per-trial for random ones."""
    if args.kind == "gaussian":
        _require(args, ["m", "n"])
        m, n = args.m, args.n
        return lambda s: gen_gaussian(m, n, seed=s), (m, n)
    if args.kind == "sparse":
        _require(args, ["m", "n"])
        m, n, d = args.m, args.n, args.d
        return lambda s: gen_sparse_regular(SparseRecipe(m, n, d, seed=s)), (m, n)
    frame = _build_frame(args, seed)
    return frame, (frame.m, frame.n)


def _cmd_spectrum(args) -> int:
    source, (m, n) = _spectrum_source(args, _seed(args))
    dist = spectra.empirical_spectrum(source, args.k, _trials(args), _seed(args))
    print(f"pooled {dist.count} eigenvalues over {_trials(args)} trials "
          f"(mean {dist.mean():.4f}, max {dist.samples[-1]:.4f})")
    if args.ref == "mp":
        ref = spectra.mp_reference(args.k / m)
        print(f"KS distance to Marcenko-Pastur(beta={args.k / m:.3f}): "
              f"{spectra.ks_distance(dist, ref):.4f}")
    elif args.ref == "manova":
        ref = spectra.manova_reference(m, n, args.k, trials=_trials(args), seed=_seed(args) + 1)
        print(f"KS distance to MANOVA reference (m={m}, n={n}, k={args.k}): "
              f"{spectra.ks_distance(dist, ref):.4f}")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        csv_path = outdir / f"spectrum_{args.kind}.csv"
        spectra.write_spectrum_csv(dist, csv_path)
        hist_path = outdir / f"spectrum_{args.kind}_hist.csv"
        spectra.write_histogram_csv(dist, hist_path, bins=args.bins)
        print(f"wrote {csv_path} and {hist_path}")
    return 0


def _cmd_capacity(args) -> int:
    source, (m, n) = _spectrum_source(args, _seed(args))
    if args.k is not None:
        k, p = args.k, args.k / n
    elif args.p is not None:
        k, p = round(args.p * n), args.p
    else:
        raise FramecapError("capacity needs --p or --k")
    if args.kind == "sparse":
        base = source
        source = lambda s: column_normalize(base(s))  # per-user SNR convention
    params = SystemParams(p=p, snr_db=args.snr_db, m=m, n=n, k=k)
    mc = cap.mc_capacity(source, params, trials=_trials(args), seed=_seed(args))
    print(f"kind={args.kind} M={m} N={n} K={k} beta={k / m:.4f} snr={args.snr_db:g} dB "
          f"trials={_trials(args)}")
    print(f"  capacity/user     = {mc.mean.per_user:.6f} (se {mc.per_user_se:.2e})")
    print(f"  capacity/resource = {mc.mean.per_resource:.6f} (se {mc.per_resource_se:.2e})")
    print(f"  practical/user    = {mc.mean.practical_per_user:.6f}")
    print(f"  practical/resource= {mc.mean.practical_per_resource:.6f}")
    print(f"  log geometric mean= {mc.mean.lgm:.6f}")
    print(f"  singular fraction = {mc.singular_fraction:.3f}")
    return 0


def _load_sweep_config(args) -> sweep.SweepConfig:
    data: dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise FramecapError(f"{args.config}: config must be a JSON object")
    if args.kinds is not None:
        data["kinds"] = list(_csv_names(args.kinds))
    if args.p is not None:
        data["p"] = args.p
    if args.snr_db is not None:
        data["snr_db"] = list(_csv_floats(args.snr_db))
    if args.betas is not None:
        data["betas"] = list(_csv_floats(args.betas))
    if args.m_min is not None:
        data["m_min"] = args.m_min
    if args.d is not None:
        data["d"] = args.d
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["seed"] = args.seed
    if args.out is not None:
        data["outdir"] = args.out
    return sweep.config_from_mapping(data)


def _cmd_sweep(args) -> int:
    config = _load_sweep_config(args)
    print(f"sweep: kinds={','.join(config.kinds)} p={config.p} betas={len(config.betas)} "
          f"snrs={len(config.snr_db)} trials={config.trials} seed={config.seed}")
    print(f"note: {sweep.p_regime(config.p)}")

    def progress(row: sweep.SweepRow) -> None:
        tag = f"[{row.kind} beta={row.beta_req:g} snr={row.snr_db:g}]"
        if row.skipped:
            print(f"  {tag} skipped: {row.skipped_reason}")
        else:
            print(f"  {tag} {row.m}x{row.n} K={row.k} cap/user={row.cap_user:.4f} "
                  f"cap/res={row.cap_res:.4f} singular={row.singular_frac:.2f}")

    rows = sweep.run_sweep(config, workers=args.workers, progress=progress)
    paths = report.emit_outputs(rows, config.outdir, figures=not args.no_figures)
    done = sum(1 for r in rows if not r.skipped)
    print(f"{done}/{len(rows)} cells computed; outputs:")
    for p in paths:
        print(f"  {p}")
    return 0


def _cmd_optimal(args) -> int:
    rows = report.read_sweep_csv(args.table)
    beta_star, value = sweep.find_optimal_beta(rows, args.measure, args.kind, args.snr_db)
    print(f"optimal beta for {args.measure} ({args.kind}, {args.snr_db:g} dB): "
          f"beta={beta_star:g} value={value:.6f}")
    return 0


def _cmd_slope(args) -> int:
    rows = report.read_sweep_csv(args.table)
    value = sweep.slope_at(rows, args.measure, args.kind, args.snr_db, args.beta0)
    print(f"slope of {args.measure} vs 1/beta at beta={args.beta0:g} "
          f"({args.kind}, {args.snr_db:g} dB): {value:.6f}")
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "verify": _cmd_verify,
    "spectrum": _cmd_spectrum,
    "capacity": _cmd_capacity,
    "sweep": _cmd_sweep,
    "optimal": _cmd_optimal,
    "slope": _cmd_slope,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (EmptyPlan, InfeasibleParameters, InfeasibleRegularity) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return INFEASIBLE
    except (ConstructionBug, SearchExhausted, GenerationExhausted,
            NotADifferenceSet, NotASteinerSystem) as exc:
        print(f"construction failure: {exc}", file=sys.stderr)
        return CONSTRUCTION_FAILURE
    except FramecapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
