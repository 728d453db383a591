"""Sweep outputs: delimited tables, a gnuplot script, and rendered figures.

The CSV schema is the stable interface; the plot script and the PNG
figures are conveniences layered on the same columns.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Sequence

from .errors import DomainError, NoFiniteRows
from .spectra import EmpiricalDistribution, write_histogram_csv, write_spectrum_csv
from .sweep import SweepRow, find_optimal_beta

SWEEP_HEADER = [
    "kind", "p", "beta_req", "beta_act", "gamma_act", "M", "N", "K", "snr_db",
    "cap_user", "cap_user_se", "cap_res", "cap_res_se",
    "pcap_user", "pcap_res", "lgm", "singular_frac", "skipped_reason",
]

OPTIMAL_HEADER = ["kind", "snr_db", "measure", "beta_star", "value"]


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_sweep_csv(rows: Sequence[SweepRow], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for r in rows:
            writer.writerow(
                [
                    r.kind, _cell(r.p), _cell(r.beta_req), _cell(r.beta_act), _cell(r.gamma_act),
                    _cell(r.m), _cell(r.n), _cell(r.k), _cell(r.snr_db),
                    _cell(r.cap_user), _cell(r.cap_user_se), _cell(r.cap_res), _cell(r.cap_res_se),
                    _cell(r.pcap_user), _cell(r.pcap_res), _cell(r.lgm), _cell(r.singular_frac),
                    r.skipped_reason,
                ]
            )
    return path


def _parse(field: str, as_int: bool = False):
    if field == "":
        return None
    return int(field) if as_int else float(field)


def read_sweep_csv(path) -> list[SweepRow]:
    path = Path(path)
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != SWEEP_HEADER:
            raise DomainError(f"{path}: unexpected sweep.csv header")
        for rec in reader:
            if len(rec) != len(SWEEP_HEADER):
                raise DomainError(f"{path}: malformed row {rec!r}")
            rows.append(
                SweepRow(
                    kind=rec[0],
                    p=_parse(rec[1]),
                    beta_req=_parse(rec[2]),
                    beta_act=_parse(rec[3]),
                    gamma_act=_parse(rec[4]),
                    m=_parse(rec[5], as_int=True),
                    n=_parse(rec[6], as_int=True),
                    k=_parse(rec[7], as_int=True),
                    snr_db=_parse(rec[8]),
                    cap_user=_parse(rec[9]),
                    cap_user_se=_parse(rec[10]),
                    cap_res=_parse(rec[11]),
                    cap_res_se=_parse(rec[12]),
                    pcap_user=_parse(rec[13]),
                    pcap_res=_parse(rec[14]),
                    lgm=_parse(rec[15]),
                    singular_frac=_parse(rec[16]),
                    skipped_reason=rec[17],
                )
            )
    return rows


def optimal_beta_records(rows: Sequence[SweepRow]) -> list[tuple[str, float, str, float, float]]:
    """Optimal-beta entries for both per-resource measures, per kind and SNR."""
    kinds = sorted({r.kind for r in rows})
    snrs = sorted({r.snr_db for r in rows})
    records = []
    for kind in kinds:
        for snr in snrs:
            for measure in ("cap_res", "pcap_res"):
                try:
                    beta_star, value = find_optimal_beta(rows, measure, kind, snr)
                except NoFiniteRows:
                    continue
                records.append((kind, snr, measure, beta_star, value))
    return records


def write_optimal_csv(rows: Sequence[SweepRow], path) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(OPTIMAL_HEADER)
        for kind, snr, measure, beta_star, value in optimal_beta_records(rows):
            writer.writerow([kind, _cell(snr), measure, _cell(beta_star), _cell(value)])
    return path


def _selected_snr(rows: Sequence[SweepRow]) -> float:
    return max(r.snr_db for r in rows)


def render_plot_script(rows: Sequence[SweepRow]) -> str:
    """A self-contained gnuplot script over sweep.csv / optimal_beta.csv.

    The script is plain text referencing columns by header name; nothing in
    this package ever invokes gnuplot.
    """
    kinds = sorted({r.kind for r in rows})
    snr_sel = _selected_snr(rows)

    def series(yname: str, xexpr: str) -> str:
        lines = []
        for kind in kinds:
            cond = f"strcol('kind') eq '{kind}' && column('snr_db') == snr_sel"
            lines.append(
                f"  'sweep.csv' using ({cond} ? {xexpr} : 1/0):(column('{yname}'))"
                f" with linespoints title '{kind}'"
            )
        return ", \\\n".join(lines)

    def optimal_series(measure: str) -> str:
        lines = []
        for kind in kinds:
            cond = f"strcol('kind') eq '{kind}' && strcol('measure') eq '{measure}'"
            lines.append(
                f"  'optimal_beta.csv' using ({cond} ? column('snr_db') : 1/0):(column('beta_star'))"
                f" with linespoints title '{kind} {measure}'"
            )
        return ", \\\n".join(lines)

    parts = [
        "# Sweep figure panels; run with: gnuplot plot.gp",
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set key outside",
        "set grid",
        f"snr_sel = {snr_sel!r}",
        "",
        "set terminal pngcairo size 960,640",
        "",
        "set output 'gp_cap_user.png'",
        "set xlabel 'achieved load beta'",
        "set ylabel 'capacity per user [bits/s/user]'",
        "plot \\\n" + series("cap_user", "column('beta_act')"),
        "",
        "set output 'gp_cap_res.png'",
        "set ylabel 'capacity per resource [bits/s/resource]'",
        "plot \\\n" + series("cap_res", "column('beta_act')"),
        "",
        "set output 'gp_lgm.png'",
        "set xlabel '1/beta'",
        "set ylabel 'log geometric mean [bits]'",
        "plot \\\n" + series("lgm", "(1.0/column('beta_act'))"),
        "",
        "set output 'gp_optimal_beta.png'",
        "set xlabel 'SNR [dB]'",
        "set ylabel 'optimal beta'",
        "set yrange [0:1.05]",
        "plot \\\n" + optimal_series("cap_res") + ", \\\n" + optimal_series("pcap_res"),
        "",
    ]
    return "\n".join(parts)


def render_figures(rows: Sequence[SweepRow], outdir: Path) -> list[Path]:
    """Matplotlib PNG panels mirroring the gnuplot script."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    kinds = sorted({r.kind for r in rows})
    snr_sel = _selected_snr(rows)
    written = []

    def live(kind, yname):
        sel = [
            r
            for r in rows
            if r.kind == kind and r.snr_db == snr_sel and not r.skipped
            and r.measure(yname) is not None and math.isfinite(r.measure(yname))
        ]
        sel.sort(key=lambda r: r.beta_act)
        return sel

    panels = [
        ("fig_cap_user.png", "cap_user", "capacity per user [bits/s/user]", False),
        ("fig_cap_res.png", "cap_res", "capacity per resource [bits/s/resource]", False),
        ("fig_lgm.png", "lgm", "log geometric mean [bits]", True),
    ]
    for fname, yname, ylabel, inverse_x in panels:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for kind in kinds:
            sel = live(kind, yname)
            if not sel:
                continue
            x = [1.0 / r.beta_act if inverse_x else r.beta_act for r in sel]
            y = [r.measure(yname) for r in sel]
            ax.plot(x, y, marker="o", label=kind)
        ax.set_xlabel("1/beta" if inverse_x else "achieved load beta")
        ax.set_ylabel(ylabel)
        ax.set_title(f"p={rows[0].p}, SNR={snr_sel:g} dB")
        ax.grid(True, alpha=0.4)
        ax.legend()
        fig.tight_layout()
        path = outdir / fname
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)

    records = optimal_beta_records(rows)
    if records:
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for measure, style in (("cap_res", "-o"), ("pcap_res", "--s")):
            for kind in kinds:
                pts = sorted((snr, b) for kd, snr, ms, b, _ in records if kd == kind and ms == measure)
                if pts:
                    ax.plot([x for x, _ in pts], [y for _, y in pts], style, label=f"{kind} {measure}")
        ax.set_xlabel("SNR [dB]")
        ax.set_ylabel("optimal beta")
        ax.set_ylim(0.0, 1.05)
        ax.grid(True, alpha=0.4)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = outdir / "fig_optimal_beta.png"
        fig.savefig(path, dpi=110)
        plt.close(fig)
        written.append(path)
    return written


def emit_outputs(
    rows: Sequence[SweepRow],
    outdir,
    spectra: dict[str, EmpiricalDistribution] | None = None,
    figures: bool = True,
) -> list[Path]:
    """Write sweep.csv, optimal_beta.csv, plot.gp, any requested spectrum
    dumps, and (by default) rendered PNG figures. Empty tables are an error."""
    if not rows:
        raise DomainError("refusing to emit outputs for an empty table")
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = [write_sweep_csv(rows, outdir / "sweep.csv")]
    written.append(write_optimal_csv(rows, outdir / "optimal_beta.csv"))
    script = outdir / "plot.gp"
    script.write_text(render_plot_script(rows), encoding="utf-8")
    written.append(script)
    for name, dist in (spectra or {}).items():
        spath = outdir / f"spectrum_{name}.csv"
        write_spectrum_csv(dist, spath)
        written.append(spath)
        hpath = outdir / f"spectrum_{name}_hist.csv"
        write_histogram_csv(dist, hpath)
        written.append(hpath)
    if figures:
        written.extend(render_figures(rows, outdir))
    return written
