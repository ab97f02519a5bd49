"""CSV writers and the ensemble cache. Reals are written at 17 significant
digits so they round-trip exactly."""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from . import __version__
from .ensemble import Ensemble, PrimeContext

ENSEMBLE_COLUMNS = ["N_sigma", "x", "y", "pi_x", "pi_y", "E", "p", "q", "t", "u", "k", "kappa"]
SPECTRUM_COLUMNS = ["n", "k", "E_ode", "E_phase", "residual"]
PIQM_COLUMNS = ["x", "pi_exact", "pi_qm", "pi_qm_asym", "u", "E_qm", "rel_err", "flag"]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return format(value, ".17g")


def write_ensemble_csv(ens: Ensemble, path) -> Path:
    path = Path(path)
    cols = [ens.N_sigma, ens.x, ens.y, ens.pi_x, ens.pi_y, ens.E, ens.p, ens.q,
            ens.t, ens.u, ens.k, ens.kappa]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENSEMBLE_COLUMNS)
        for row in zip(*(c.tolist() for c in cols)):
            w.writerow([fmt(v) for v in row])
    return path


def write_spectrum_csv(rows: list[dict], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SPECTRUM_COLUMNS)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in SPECTRUM_COLUMNS])
    return path


def write_piqm_csv(rows, model, path) -> Path:
    """One file per N; model constants go in '#'-prefixed header lines."""
    path = Path(path)
    c = model.context
    meta = [("N", c.N), ("j", c.j), ("gamma", c.gamma), ("alpha", model.alpha), ("beta", model.beta),
            ("kappa1", model.kappa1), ("E1", model.E1), ("F", model.F), ("F_source", model.F_source),
            ("x_limit", model.x_limit), ("li_convention", "offset-2")]
    with open(path, "w", newline="") as fh:
        for key, val in meta:
            fh.write(f"# {key}={val if isinstance(val, str) else fmt(val)}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PIQM_COLUMNS)
        for r in rows:
            w.writerow([fmt(r.x), fmt(r.pi_exact), fmt(r.pi_qm), fmt(r.pi_qm_asymptotic), fmt(r.u),
                        fmt(r.E_qm), fmt(r.rel_err), "" if r.valid else "out_of_range"])
    return path


def read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def ensemble_cache_path(cache_dir, N: int, include_squares: bool = True) -> Path:
    tag = "sq" if include_squares else "nosq"
    return Path(cache_dir) / f"ensemble-{N}-{tag}-v{__version__}.npz"


def save_ensemble(ens: Ensemble, path) -> None:
    c = ens.context
    np.savez(path, N_sigma=ens.N_sigma, x=ens.x, y=ens.y, pi_x=ens.pi_x, pi_y=ens.pi_y,
             ctx=np.array([c.N, c.j, c.x_j, c.x_j1], dtype=np.int64),
             include_squares=np.array(ens.include_squares))


def load_ensemble(path) -> Ensemble | None:
    path = Path(path)
    if not path.exists():
        return None
    with np.load(path) as z:
        N, j, x_j, x_j1 = (int(v) for v in z["ctx"])
        ctx = PrimeContext.from_N(N)
        if (ctx.j, ctx.x_j, ctx.x_j1) != (j, x_j, x_j1):
            return None
        return Ensemble(context=ctx, N_sigma=z["N_sigma"], x=z["x"], y=z["y"], pi_x=z["pi_x"],
                        pi_y=z["pi_y"], include_squares=bool(z["include_squares"]))
