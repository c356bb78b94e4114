"""Flat-file writers: trace CSVs, key/value summaries and decomposition tables."""

from __future__ import annotations

import csv
import io
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from ..diagnostics import SADecomposition
from .runner import EnsembleSummary, PathTrace


def fmt(value) -> str:
    """Positional decimal with 12 significant digits; never scientific notation."""
    v = float(value)
    if not np.isfinite(v):
        return str(v)
    return np.format_float_positional(v, precision=12, unique=False, fractional=False, trim="-")


@contextmanager
def _open(dest):
    if dest is None or dest == "-":
        yield sys.stdout
    elif isinstance(dest, io.TextIOBase):
        yield dest
    else:
        with open(Path(dest), "w", newline="") as fh:
            yield fh


def emit_trace_csv(obj: PathTrace | EnsembleSummary, dest=None) -> None:
    """Write ``Time,Phi,Psi`` rows, plus ``x1..xI,y1..yJ`` when beliefs were recorded."""
    if isinstance(obj, EnsembleSummary):
        rounds, phi, psi, x, y = obj.rounds, obj.mean_phi1, obj.mean_psi1, None, None
    else:
        rounds, phi, psi, x, y = obj.rounds, obj.phi1, obj.psi1, obj.x, obj.y
    header = ["Time", "Phi", "Psi"]
    if x is not None and y is not None:
        header += [f"x{i + 1}" for i in range(x.shape[1])] + [f"y{j + 1}" for j in range(y.shape[1])]
    with _open(dest) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in range(rounds.size):
            row = [str(int(rounds[r])), fmt(phi[r]), fmt(psi[r])]
            if len(header) > 3:
                row += [fmt(v) for v in x[r]] + [fmt(v) for v in y[r]]
            writer.writerow(row)


def emit_summary(summary: EnsembleSummary, dest=None, per_path: bool = True) -> None:
    """Plain ``key = value`` lines: config echo, class counts and fractions."""
    lines = [f"{k} = {v}" for k, v in summary.config_echo.items()]
    lines.append(f"n_paths = {summary.n_paths}")
    for label, count in summary.class_counts.items():
        lines.append(f"count.{label} = {count}")
    for label, frac in summary.class_fractions.items():
        lines.append(f"fraction.{label} = {fmt(frac)}")
    lines.append(f"final_mean_phi1 = {fmt(summary.mean_phi1[-1])}")
    lines.append(f"final_mean_psi1 = {fmt(summary.mean_psi1[-1])}")
    if per_path:
        lines += [f"path.{k} = {o.label}" for k, o in enumerate(summary.outcomes)]
    with _open(dest) as fh:
        fh.write("\n".join(lines) + "\n")


def emit_decomposition_csv(decomp: SADecomposition, bound: float, dest=None) -> None:
    with _open(dest) as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["round", "C", "D", "E", "error", "bound"])
        b = fmt(bound)
        for n, c, d, e, err in zip(decomp.rounds, decomp.C, decomp.D, decomp.E, decomp.error):
            writer.writerow([str(int(n)), fmt(c), fmt(d), fmt(e), fmt(err), b])
