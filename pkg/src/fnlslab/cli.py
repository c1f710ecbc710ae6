"""Batch entry points: reproducible runs driven by a single INI config.

Each command materializes a run directory containing the resolved config,
copies of the model and parameter files it used, a versions manifest, and
its CSV/JSON/field outputs. Re-running from the persisted config
reproduces every CSV byte for byte.

Exit codes: 0 ok, 1 check failure, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import configparser
import dataclasses
import shutil
import sys
from pathlib import Path

import numpy as np

from . import analysis as an
from . import barycenter as bc
from . import checks as ck
from . import functionals as fn
from . import io as fio
from . import solvers as sv
from .model import ModelError, ModelSpec, read_model

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    """Bad invocation or unreadable inputs."""


def _load_config(path: str) -> tuple[configparser.ConfigParser, Path]:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    cfg = configparser.ConfigParser()
    try:
        cfg.read(p)
    except configparser.Error as exc:
        raise UsageError(f"malformed config {p}: {exc}") from exc
    return cfg, p.parent


def _get(cfg, section, key, fallback=None):
    if cfg.has_option(section, key):
        return cfg.get(section, key)
    return fallback


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split()]


def _solve_options(cfg) -> sv.SolveOptions:
    """SolveOptions from the [solve] section, coerced per field type."""
    kwargs = {}
    if cfg.has_section("solve"):
        by_name = {f.name: f for f in dataclasses.fields(sv.SolveOptions)}
        for key, raw in cfg.items("solve"):
            if key not in by_name:
                raise UsageError(f"unknown solver option {key!r}")
            ftype = by_name[key].type
            if ftype == "int":
                kwargs[key] = int(raw)
            elif ftype == "float":
                kwargs[key] = float(raw)
            elif ftype == "bool":
                kwargs[key] = raw.strip().lower() in ("1", "true", "yes",
                                                      "on")
            elif key == "step_clip":
                vals = _floats(raw)
                if len(vals) != 2:
                    raise UsageError("step_clip needs two numbers")
                kwargs[key] = tuple(vals)
            else:
                kwargs[key] = raw
    return sv.SolveOptions(**kwargs)


def _resolve_run(args, cfg, cfg_dir: Path, needs_model: bool = True,
                 needs_params: bool = False):
    """Create the run directory with resolved config and input copies."""
    run_id = _get(cfg, "run", "id", "run")
    out = args.out or _get(cfg, "run", "out") or f"runs/{run_id}"
    run_dir = Path(out)
    run_dir.mkdir(parents=True, exist_ok=True)

    resolved = configparser.ConfigParser()
    resolved.read_dict({s: dict(cfg.items(s)) for s in cfg.sections()})
    if not resolved.has_section("run"):
        resolved.add_section("run")
    resolved.set("run", "id", run_id)
    resolved.set("run", "out", str(run_dir))
    seed = args.seed if args.seed is not None else int(
        _get(cfg, "run", "seed", str(ck.DEFAULT_SEED)))
    resolved.set("run", "seed", str(seed))
    jobs = args.jobs if args.jobs is not None else int(
        _get(cfg, "run", "jobs", "1"))
    resolved.set("run", "jobs", str(jobs))
    tier = args.tier or _get(cfg, "run", "tier", "fast")
    resolved.set("run", "tier", tier)

    model = None
    if needs_model:
        rel = _get(cfg, "model", "path")
        if rel is None:
            raise UsageError("config has no [model] path")
        src = (cfg_dir / rel).resolve()
        if not src.is_file():
            raise UsageError(f"model file not found: {src}")
        model = read_model(src)
        if src != (run_dir / "model.ini").resolve():
            shutil.copyfile(src, run_dir / "model.ini")
        resolved.set("model", "path", "model.ini")

    params = None
    if needs_params:
        rel = _get(cfg, "semiclassical", "params")
        if rel is None:
            raise UsageError("config has no [semiclassical] params path")
        src = (cfg_dir / rel).resolve()
        if not src.is_file():
            raise UsageError(f"params file not found: {src}")
        params = fn.read_params(src)
        if src != (run_dir / "params.ini").resolve():
            shutil.copyfile(src, run_dir / "params.ini")
        resolved.set("semiclassical", "params", "params.ini")

    with open(run_dir / "config.ini", "w") as fh:
        resolved.write(fh)
    fio.write_json(run_dir / "versions.json", fio.versions_manifest())
    return run_dir, model, params, seed, jobs, tier


_ITER_COLUMNS = ("iter", "energy", "residual", "pohozaev", "penalty",
                 "step_size")


def _write_iterates(path, result: sv.SolveResult) -> None:
    rows = [dict(zip(_ITER_COLUMNS, entry)) for entry in result.iterates]
    fio.write_report(path, rows, columns=list(_ITER_COLUMNS))


def _result_summary(result: sv.SolveResult) -> dict:
    return {
        "converged": result.converged,
        "iterations": result.iterations,
        "energy": result.energy.to_dict(),
        "residual": result.residual,
        "pohozaev": result.pohozaev,
        "barycenter": list(result.barycenter),
        "seed_tag": result.seed_tag,
        "diagnostics": fio._jsonable(result.diagnostics),
    }


def cmd_ground_state(args) -> int:
    cfg, cfg_dir = _load_config(args.config)
    run_dir, model, _, _, _, _ = _resolve_run(args, cfg, cfg_dir)
    a = float(_get(cfg, "ground_state", "a", "1.0"))
    amp = float(_get(cfg, "ground_state", "seed_amplitude", "3.0"))
    width = float(_get(cfg, "ground_state", "seed_width", "2.0"))
    center_raw = _get(cfg, "ground_state", "seed_center")
    center = tuple(_floats(center_raw)) if center_raw else None
    opts = _solve_options(cfg)
    seed = sv.gaussian_seed(model.grid, amp, width, center=center)
    result = sv.solve_ground_state(a, model, opts, seed)
    fio.write_field(run_dir / "field.fnls1", result.field)
    fio.write_json(run_dir / "energy.json", result.energy.to_dict())
    fio.write_json(run_dir / "result.json", _result_summary(result))
    _write_iterates(run_dir / "iterates.csv", result)
    r_lo = _get(cfg, "ground_state", "fit_r_min")
    r_hi = _get(cfg, "ground_state", "fit_r_max")
    if r_lo is not None and r_hi is not None:
        r_lo, r_hi = float(r_lo), float(r_hi)
        slope, intercept, r_sq = an.fit_decay_exponent(result.field, r_lo,
                                                       r_hi)
        fio.write_report(run_dir / "decay.csv",
                         an.decay_table(result.field, r_lo, r_hi),
                         columns=["radius", "shell_max"])
        g = model.grid
        fio.write_json(run_dir / "decay.json", {
            "slope": slope, "intercept": intercept, "r_squared": r_sq,
            "reference_slope": -(g.N + 2.0 * g.s),
            "r_min": r_lo, "r_max": r_hi})
    if not result.converged:
        print(f"solve did not converge in {result.iterations} iterations",
              file=sys.stderr)
        return EXIT_NUMERIC
    print(f"ground state: E={result.energy.total:.6f} "
          f"iters={result.iterations} -> {run_dir}")
    return EXIT_OK


def cmd_dictionary(args) -> int:
    cfg, cfg_dir = _load_config(args.config)
    run_dir, model, _, _, _, _ = _resolve_run(args, cfg, cfg_dir)
    nu0 = float(_get(cfg, "dictionary", "nu0", "0.2"))
    n = int(_get(cfg, "dictionary", "n_samples", "3"))
    opts = _solve_options(cfg)
    d = sv.build_dictionary(model, nu0=nu0, n_samples=n, opts=opts)
    entries = []
    for j, (level, res) in enumerate(d.entries):
        fio.write_field(run_dir / f"entry_{j}.fnls1", res.field)
        _write_iterates(run_dir / f"iterates_{j}.csv", res)
        entries.append({"level": level, "energy": res.energy.total,
                        "iterations": res.iterations,
                        "residual": res.residual})
    fio.write_json(run_dir / "dictionary.json", {
        "r_star": d.r_star, "R0": d.R0, "nu0": nu0, "entries": entries})
    print(f"dictionary: {n} entries r*={d.r_star:.4f} R0={d.R0:.4f} "
          f"-> {run_dir}")
    return EXIT_OK


def _well_sample(model: ModelSpec, count: int) -> list:
    pts = np.asarray(model.potential.k_points, dtype=np.float64)
    idx = np.linspace(0, len(pts), count, endpoint=False).astype(int)
    return [pts[i] for i in idx]


def cmd_semiclassical(args) -> int:
    cfg, cfg_dir = _load_config(args.config)
    run_dir, model, params, _, jobs, _ = _resolve_run(
        args, cfg, cfg_dir, needs_params=True)
    if model.potential is None:
        raise UsageError("semiclassical runs need a model with a potential")
    schedule = _floats(_get(cfg, "semiclassical", "eps_schedule",
                            "0.4 0.2 0.1"))
    n_pts = int(_get(cfg, "semiclassical", "n_seed_points", "8"))
    t_samples = _floats(_get(cfg, "semiclassical", "t_samples",
                             "0.7 1.0 1.3"))
    dict_n = int(_get(cfg, "semiclassical", "dict_samples", "3"))
    symmetry = _get(cfg, "semiclassical", "symmetry")
    opts = _solve_options(cfg)
    g = model.grid
    m0 = model.potential.m0

    limit = ModelSpec(grid=g, nonlinearity=model.nonlinearity, mass=m0)
    d = sv.build_dictionary(limit, nu0=params.nu0, n_samples=dict_n,
                            opts=opts)
    U0 = d.profiles[0]
    cfg_bc = bc.BarycenterConfig(R0=d.R0, r_star=d.r_star, stride=4)
    fio.write_json(run_dir / "dictionary.json",
                   {"r_star": d.r_star, "R0": d.R0})

    eps0 = schedule[0]
    points = _well_sample(model, n_pts)
    seeds = [bc.phi_eps(1.0, p, U0, eps0) for p in points]
    tags = [f"p{k}" for k in range(len(points))]
    outs = sv.multistart(eps0, seeds, model, params, opts, tags=tags,
                         jobs=jobs)
    ms_rows = []
    best = None
    for p, r in zip(points, outs):
        if isinstance(r, sv.SolveFailure):
            ms_rows.append({"seed_tag": r.seed_tag, "converged": False,
                            "error": r.error})
            continue
        ms_rows.append({"seed_tag": r.seed_tag, "converged": r.converged,
                        "energy": r.energy.total,
                        "barycenter": list(r.barycenter)})
        if r.converged and (best is None
                            or r.energy.total < best[1].energy.total):
            best = (p, r)
    fio.write_json(run_dir / "multistart.json", ms_rows)
    if best is None:
        print("no multistart seed converged", file=sys.stderr)
        return EXIT_NUMERIC

    runs = sv.continuation(schedule, model, params, opts,
                           bc.phi_eps(1.0, best[0], U0, eps0))
    for e, r in zip(schedule, runs):
        fio.write_field(run_dir / f"field_eps{e:g}.fnls1", r.field)
        _write_iterates(run_dir / f"iterates_eps{e:g}.csv", r)
    table = an.concentration_report(runs, model, dictionary=d, cfg=cfg_bc)
    fio.write_report(run_dir / "concentration.csv", table)

    good = [r for r in outs if isinstance(r, sv.SolveResult)
            and r.converged]
    clusters = {"raw": an.cluster_solutions(good, dictionary=d)}
    if symmetry:
        clusters[f"quotient_{symmetry}"] = an.cluster_solutions(
            good, dictionary=d, symmetry=symmetry)
    fio.write_json(run_dir / "clusters.json", clusters)

    samples = [(t, p) for t in t_samples for p in points]
    rep = an.sandwich_check(U0, model, params, schedule[-1], samples)
    for row in rep["rows"]:
        row.setdefault("boundary_margin", float("nan"))
    fio.write_report(run_dir / "sandwich.csv", rep["rows"])
    fio.write_json(run_dir / "sandwich.json",
                   {k: v for k, v in rep.items() if k != "rows"})
    print(f"semiclassical: {len(runs)} continuation steps, "
          f"{len(good)}/{len(outs)} seeds converged -> {run_dir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    tier, seed, jobs = "fast", ck.DEFAULT_SEED, 1
    run_dir = None
    if args.config:
        cfg, cfg_dir = _load_config(args.config)
        has_model = cfg.has_option("model", "path")
        run_dir, model, _, seed, jobs, tier = _resolve_run(
            args, cfg, cfg_dir, needs_model=has_model)
        if has_model:
            report = model.validate()
            print(report.summary())
            if not report.ok:
                print(f"model validation failed: "
                      f"{', '.join(report.failed_tags)}", file=sys.stderr)
                return EXIT_CHECK
    if args.tier:
        tier = args.tier
    if args.seed is not None:
        seed = args.seed
    if args.jobs is not None:
        jobs = args.jobs
    rows = ck.run_suite(tier=tier, seed=seed, jobs=jobs)
    for r in rows:
        print(r.line())
    n_pass = sum(1 for r in rows if r.passed)
    print(f"{n_pass}/{len(rows)} checks passed (tier {tier})")
    if run_dir is not None:
        fio.write_report(run_dir / "checks.csv", [
            {"name": r.name, "passed": r.passed, "measured": r.measured,
             "budget": r.budget, "seconds": r.seconds} for r in rows])
        fio.write_json(run_dir / "checks.json",
                       {"tier": tier, "passed": n_pass, "total": len(rows)})
    return EXIT_OK if n_pass == len(rows) else EXIT_CHECK


def cmd_export(args) -> int:
    cfg, cfg_dir = _load_config(args.config)
    rel = _get(cfg, "export", "run")
    if rel is None:
        raise UsageError("config has no [export] run directory")
    src = (cfg_dir / rel).resolve()
    if not src.is_dir():
        raise UsageError(f"run directory not found: {src}")
    out = Path(args.out) if args.out else src / "export"
    out.mkdir(parents=True, exist_ok=True)
    n = 0
    for dump in sorted(src.glob("*.fnls1")):
        u = fio.read_field(dump)
        g = u.grid
        mesh = g.mesh()
        flat = [{**{f"x{ax}": mesh[ax].ravel(order="C")[k]
                    for ax in range(g.N)},
                 "value": u.values.ravel(order="C")[k]}
                for k in range(u.values.size)]
        fio.write_report(out / (dump.stem + ".csv"), flat,
                         columns=[f"x{ax}" for ax in range(g.N)]
                         + ["value"])
        n += 1
    for name in sorted(src.iterdir()):
        if name.suffix in (".csv", ".json") and name.parent == src:
            shutil.copyfile(name, out / name.name)
    print(f"exported {n} fields -> {out}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="fnlslab",
        description="Fractional NLS ground states, semiclassical "
                    "concentration, and their verification suite.")
    sub = ap.add_subparsers(dest="command", required=True)
    specs = (
        ("ground-state", cmd_ground_state, True),
        ("dictionary", cmd_dictionary, True),
        ("semiclassical", cmd_semiclassical, True),
        ("verify", cmd_verify, False),
        ("export", cmd_export, True),
    )
    for name, handler, config_required in specs:
        p = sub.add_parser(name)
        p.add_argument("--config", required=config_required,
                       help="run config INI")
        p.add_argument("--out", help="run directory (overrides config)")
        p.add_argument("--tier", choices=("fast", "full"))
        p.add_argument("--jobs", type=int)
        p.add_argument("--seed", type=int)
        p.set_defaults(handler=handler)
    return ap


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ModelError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (sv.SolverError, fn.FunctionalError, an.AnalysisError,
            bc.BarycenterError, fio.IOFormatError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
