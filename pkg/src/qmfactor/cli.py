"""Command line: ``qmfactor {sieve,ensemble,spectrum,piqm,model}``.

Exit codes: 0 success, 2 bad input, 3 resource bound exceeded, 4 internal
check failed. Options may also come from a ``key=value`` file given by
``--config``; flags on the command line win.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

from . import primes
from .asymptotics import dump_model
from .ensemble import (DEFAULT_INTERVAL_BOUND, build_ensemble, cardinality_asymptote,
                       cardinality_exact, cardinality_literal, check_identities, x3_rank_band, step_structure)
from .exceptions import CheckFailure, DomainError, NoRootError, ResourceError
from .io import (ensemble_cache_path, fmt, load_ensemble, save_ensemble, write_ensemble_csv,
                 write_piqm_csv, write_spectrum_csv)
from .piqm import comparison_table, convergence_report, convergence_sweep, fit_pipeline
from .spectrum import (PhaseParams, fit_phase_params, level_count, phase_spectrum, q_max,
                       solve_ode_spectrum)
from .validation import check_N, parse_int, parse_int_list

log = logging.getLogger("qmfactor")

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_CHECK = 0, 2, 3, 4
ODE_MAX_N = 10**6


@dataclass
class RunConfig:
    command: str
    out: Path
    cache_dir: Path | None
    threads: int
    sieve_limit: int
    interval_bound: int
    tol: float
    literal: bool

    def __post_init__(self):
        if self.threads < 1 or self.sieve_limit < 2 or self.interval_bound < 1 or not self.tol > 0:
            raise DomainError("limits, thread count and tolerance must be positive")


def read_config(path) -> dict:
    cfg = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"bad config line: {line!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        cfg[key.replace("-", "_")] = val
    return cfg


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run options")
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--cache-dir", default=None, help="directory for sieve and ensemble caches")
    g.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    g.add_argument("--sieve-limit", type=parse_int, default=primes.DEFAULT_SIEVE_LIMIT)
    g.add_argument("--interval-bound", type=parse_int, default=DEFAULT_INTERVAL_BOUND)
    g.add_argument("--tol", type=float, default=1e-10, help="integrator tolerance")
    g.add_argument("--literal", action="store_true", help="use alpha=2, beta=1")
    g.add_argument("--seedless", action="store_true",
                   help="accepted for scripts; every run is deterministic anyway")
    g.add_argument("--config", default=None, help="key=value file of defaults")
    g.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmfactor", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sieve", help="build and cache a prime table")
    p.add_argument("--limit", type=parse_int, required=True)
    _common(p)

    p = sub.add_parser("ensemble", help="enumerate the factorization ensemble of N")
    p.add_argument("--N", required=True)
    p.add_argument("--no-squares", action="store_true", help="exclude N_sigma = x^2")
    _common(p)

    p = sub.add_parser("spectrum", help="eigenvalues of the confined inverted oscillator")
    p.add_argument("--N", required=True)
    p.add_argument("--method", default="both")
    p.add_argument("--params", choices=["fitted", "formula"], default=None,
                   help="phase constants (default: fitted when the ODE runs, else formula)")
    p.add_argument("--emin", type=float, default=0.5)
    p.add_argument("--emax", type=float, default=None)
    _common(p)

    p = sub.add_parser("piqm", help="compare pi_QM(x;N) with pi(x)")
    p.add_argument("--N", default=None)
    p.add_argument("--xmin", type=parse_int, default=10)
    p.add_argument("--xmax", type=parse_int, default=1000)
    p.add_argument("--compare-N", default=None, help="comma separated N list")
    p.add_argument("--exact-pi", action="store_true", help="divide by exact pi(N/x)")
    _common(p)

    p = sub.add_parser("model", help="dump the fitted model as key=value")
    p.add_argument("--N", required=True)
    _common(p)
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest for a in sub._actions}
        unknown = set(cfg) - known
        if unknown:
            raise DomainError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
        # defaults from the file arrive as text
        for key in cfg:
            action = next(a for a in sub._actions if a.dest == key)
            val = getattr(args, key)
            if isinstance(val, str) and action.type is not None:
                setattr(args, key, action.type(val))
            elif isinstance(val, str) and action.const is True:
                setattr(args, key, val.lower() in ("1", "true", "yes"))
    return args


def make_config(args) -> RunConfig:
    return RunConfig(command=args.command, out=Path(args.out),
                     cache_dir=Path(args.cache_dir) if args.cache_dir else None,
                     threads=int(args.threads), sieve_limit=int(args.sieve_limit),
                     interval_bound=int(args.interval_bound), tol=float(args.tol),
                     literal=bool(args.literal))


def _ensemble(N: int, cfg: RunConfig, include_squares: bool = True):
    if cfg.cache_dir is not None:
        path = ensemble_cache_path(cfg.cache_dir, N, include_squares)
        ens = load_ensemble(path)
        if ens is not None:
            return ens
    ens = build_ensemble(N, include_squares=include_squares, interval_bound=cfg.interval_bound)
    if cfg.cache_dir is not None:
        cfg.cache_dir.mkdir(parents=True, exist_ok=True)
        save_ensemble(ens, ensemble_cache_path(cfg.cache_dir, N, include_squares))
    return ens


def cmd_sieve(args, cfg: RunConfig) -> int:
    table = primes.PrimeTable(args.limit)
    folder = cfg.cache_dir or cfg.out
    folder.mkdir(parents=True, exist_ok=True)
    target = folder / f"sieve-{args.limit}.bin"
    table.save(target)
    (cfg.out / "sieve.txt").write_text(f"limit={args.limit}\npi={table.count}\nfile={target.name}\n")
    print(f"pi({args.limit}) = {table.count}")
    return EXIT_OK


def cmd_ensemble(args, cfg: RunConfig) -> int:
    N = check_N(args.N)
    ens = _ensemble(N, cfg, include_squares=not args.no_squares)
    check_identities(ens)
    F = cardinality_exact(ens)
    write_ensemble_csv(ens, cfg.out / "ensemble.csv")
    c = ens.context
    lines = [f"N={N}", f"j={c.j}", f"x_j={c.x_j}", f"x_j1={c.x_j1}", f"gamma={fmt(c.gamma)}",
             f"interval={c.interval[0]},{c.interval[1]}", f"F={F}"]
    if N >= 10**4:
        est = cardinality_asymptote(N, c.C)
        lines += [f"F_asymptote={fmt(est)}", f"F_asymptote_rel_err={fmt(abs(est - F) / F)}"]
    if N <= 10**12:
        lit = cardinality_literal(c)
        lines.append(f"F_closed_form={lit['F_literal']}")
    if F:
        lo, hi = x3_rank_band(ens)
        lines.append(f"x3_rank_band={fmt(lo)},{fmt(hi)}")
        lines.append("x,count,formula_count,E_min,E_max,k_min,k_max")
        for s in step_structure(ens).values():
            lines.append(",".join(fmt(v) for v in (s.x, s.count, s.formula_count, s.E_min,
                                                     s.E_max, s.k_min, s.k_max)))
    (cfg.out / "ensemble_stats.txt").write_text("\n".join(lines) + "\n")
    print(f"F({c.j}) = {F} entries written to {cfg.out / 'ensemble.csv'}")
    return EXIT_OK


def cmd_spectrum(args, cfg: RunConfig) -> int:
    N = check_N(args.N)
    if args.method not in ("ode", "phase", "both"):
        raise DomainError(f"unknown method {args.method!r}")
    top = q_max(N) ** 2
    E_range = (args.emin, args.emax if args.emax is not None else 0.99 * top)
    ode = []
    if args.method in ("ode", "both"):
        if N > ODE_MAX_N:
            raise ResourceError(f"ODE shooting is limited to N <= {ODE_MAX_N}")
        ode = solve_ode_spectrum(N, E_range, tol=cfg.tol, threads=cfg.threads)
    phase = []
    fit_rms = None
    if args.method in ("phase", "both"):
        kind = args.params or ("fitted" if ode else "formula")
        if kind == "fitted":
            if not ode:
                raise DomainError("fitted phase constants need the ODE spectrum (--method both)")
            params, fit_rms = fit_phase_params(ode[len(ode) // 2:], N)
        else:
            model = fit_pipeline(N, literal=cfg.literal, interval_bound=cfg.interval_bound)
            params = PhaseParams.from_formula(N, model.F, model.gamma, model.kappa1)
        n_values = [lv.n for lv in ode] if ode else list(range(level_count(N) + 1))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            phase = phase_spectrum(N, params, n_values, E_range, strict=False)
    by_n: dict[int, dict] = {}
    for lv in ode:
        by_n.setdefault(lv.n, {"n": lv.n, "k": lv.k})["E_ode"] = lv.E
        by_n[lv.n]["residual"] = lv.residual
    for lv in phase:
        row = by_n.setdefault(lv.n, {"n": lv.n, "k": lv.k})
        row["E_phase"] = lv.E
        row.setdefault("residual", lv.residual)
    rows = [by_n[n] for n in sorted(by_n, reverse=True)]
    write_spectrum_csv(rows, cfg.out / "spectrum.csv")
    msg = f"{len(ode)} ODE levels, {len(phase)} phase levels (semiclassical count {level_count(N)})"
    if fit_rms is not None:
        msg += f"; fitted phase rms {fit_rms:.4g} rad"
    print(msg)
    return EXIT_OK


def cmd_piqm(args, cfg: RunConfig) -> int:
    if args.xmin < 2 or args.xmax < args.xmin:
        raise DomainError("need 2 <= xmin <= xmax")
    xs = range(args.xmin, args.xmax + 1)
    pipeline = dict(literal=cfg.literal, interval_bound=cfg.interval_bound)
    if args.compare_N:
        Ns = parse_int_list(args.compare_N)
        for N in Ns:
            check_N(N)
        results = convergence_sweep(xs, Ns, threads=cfg.threads, **pipeline)
        for N, res in results.items():
            write_piqm_csv(res.rows, res.model, cfg.out / f"piqm_{N}.csv")
        rep = convergence_report(results)
        lines = ["N,median_rel_err,max_rel_err,n_valid,common_median"]
        for i, N in enumerate(rep["N"]):
            lines.append(",".join(fmt(v) for v in (N, rep["median"][i], rep["max"][i], rep["n_valid"][i],
                                                     rep["common_median"][i])))
        lines.append(f"strictly_decreasing={rep['strictly_decreasing']}")
        lines.append(f"common_x={rep['common_x']}")
        lines.append(f"common_non_increasing={rep['common_non_increasing']}")
        (cfg.out / "convergence.txt").write_text("\n".join(lines) + "\n")
        print("\n".join(lines))
        return EXIT_OK
    if args.N is None:
        raise DomainError("give --N or --compare-N")
    N = check_N(args.N)
    model = fit_pipeline(N, **pipeline)
    rows = comparison_table(xs, model, exact=args.exact_pi, threads=cfg.threads)
    write_piqm_csv(rows, model, cfg.out / "piqm.csv")
    flagged = sum(not r.valid for r in rows)
    print(f"{len(rows)} rows, {flagged} outside the validity range x < {model.x_limit:.6g}")
    return EXIT_OK


def cmd_model(args, cfg: RunConfig) -> int:
    N = check_N(args.N)
    model = fit_pipeline(N, literal=cfg.literal, interval_bound=cfg.interval_bound)
    text = dump_model(model)
    (cfg.out / "model.txt").write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {"sieve": cmd_sieve, "ensemble": cmd_ensemble, "spectrum": cmd_spectrum,
            "piqm": cmd_piqm, "model": cmd_model}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return int(exc.code or 0)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        cfg.out.mkdir(parents=True, exist_ok=True)
        primes.set_default_counter(primes.PrimeCounter(sieve_limit=cfg.sieve_limit,
                                                       cache_dir=cfg.cache_dir))
        return COMMANDS[args.command](args, cfg)
    except (DomainError, NoRootError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ResourceError as exc:
        print(f"resource bound: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except CheckFailure as exc:
        print(f"internal check failed: {exc}", file=sys.stderr)
        return EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
