"""Command-line front end: scenario runs, named checks, check listing.

Subcommands
-----------
run <scenario.toml>   execute a scenario (sweeps + checks), write CSV/JSON
check <name>          run one named verification
list-checks           print every named verification

Data outputs are deterministic for a fixed scenario and seed: CSV cells are
printed with repr-exact precision and rows are emitted in sweep order
regardless of thread count.  The JSON run report additionally records wall
times, which naturally vary between runs.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import bulk, gridsolver, slab
from .checks import CHECKS, list_checks, run_check
from .config import Scenario, load_scenario
from .errors import ConfigError, NlmediaError
from .grids import PeriodicGrid, load_kernel, save_kernel
from .units import make_unit_system

_FRAME = ("s", "q", "z")


def _fmt(x: float) -> str:
    return "%.17g" % x


def _write_csv(path: Path, header: list[str], rows: list[list[float]]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _complex_columns(prefix: str, names: list[str]) -> list[str]:
    cols = []
    for n in names:
        cols.append(f"re_{prefix}{n}")
        cols.append(f"im_{prefix}{n}")
    return cols


def _flatten_complex(values) -> list[float]:
    out = []
    for v in values:
        out.append(float(np.real(v)))
        out.append(float(np.imag(v)))
    return out


def _sweep_points(scenario: Scenario):
    return [(q, w) for q in scenario.q_values for w in scenario.omega_values]


def _parallel_map(fn, items, threads: int):
    """Map preserving input order; degree of parallelism never changes the
    output."""
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _tensor_names(prefix: str = "") -> list[str]:
    return [f"{prefix}{a}{b}" for a in _FRAME for b in _FRAME]


def _run_bulk(scenario: Scenario, threads: int):
    model = scenario.models()[0]
    points = _sweep_points(scenario)

    def compute(point):
        q, w = point
        g = bulk.partial_fourier(model, 0.0, q, w, side=+1)
        return [q, w] + _flatten_complex(g.tensor.ravel()) + [g.error]

    rows = _parallel_map(compute, points, threads)
    header = ["q", "omega"] + _complex_columns("g_", _tensor_names()) + ["error"]
    return [("bulk_boundary_limit.csv", header, rows)]


def _run_half_space(scenario: Scenario, threads: int):
    model = scenario.models()[0]
    points = _sweep_points(scenario)

    def compute(point):
        q, w = point
        pair = bulk.kliever_fuchs(model, q, w)
        y = slab.single_interface_admittance(model, q, w)
        return ([q, w]
                + _flatten_complex([pair.z_s, pair.z_p])
                + _flatten_complex(y.ravel())
                + [pair.error])

    rows = _parallel_map(compute, points, threads)
    header = (["q", "omega"]
              + _complex_columns("", ["z_s", "z_p"])
              + _complex_columns("y_", ["ss", "sq", "qs", "qq"])
              + ["error"])
    return [("half_space_impedance.csv", header, rows)]


def _run_slab(scenario: Scenario, threads: int):
    models = scenario.models()
    d = scenario.geometry.d
    points = _sweep_points(scenario)
    want_adm = not scenario.outputs or "admittance" in scenario.outputs
    want_green = "green" in scenario.outputs and scenario.source is not None

    def compute(point):
        q, w = point
        y = slab.slab_admittance(models, d, q, w)
        res = slab.admittance_system_residual(y, y.blocks)
        adm_row = ([q, w]
                   + _flatten_complex(np.concatenate(
                       [y.y00.ravel(), y.y0d.ravel(),
                        y.yd0.ravel(), y.ydd.ravel()]))
                   + [res])
        green_rows = []
        if want_green:
            for zf in scenario.source.z_field:
                g = slab.slab_green(models, d, q, w, scenario.source.z, zf,
                                    admittance=y)
                green_rows.append([q, w, scenario.source.z, zf]
                                  + _flatten_complex(g.ravel()) + [res])
        return adm_row, green_rows

    results = _parallel_map(compute, points, threads)
    outputs = []
    if want_adm:
        names = [f"{blk}_{e}" for blk in ("y00", "y0d", "yd0", "ydd")
                 for e in ("ss", "sq", "qs", "qq")]
        header = ["q", "omega"] + _complex_columns("", names) + ["error"]
        outputs.append(("slab_admittance.csv", header,
                        [r[0] for r in results]))
    if want_green:
        header = (["q", "omega", "z_source", "z_field"]
                  + _complex_columns("g_", _tensor_names()) + ["error"])
        rows = [row for r in results for row in r[1]]
        outputs.append(("slab_green.csv", header, rows))
    return outputs


def _model_cache_key(medium_spec, omega: complex, grid: PeriodicGrid) -> str:
    payload = json.dumps({
        "kind": medium_spec.kind,
        "params": {k: repr(v) for k, v in sorted(medium_spec.params.items())},
        "omega": repr(complex(omega)),
        "shape": grid.shape,
        "lengths": grid.lengths,
    }, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def _cached_sigma(medium_spec, model, omega, grid, cache_dir: Path):
    cache_dir.mkdir(parents=True, exist_ok=True)
    key = _model_cache_key(medium_spec, omega, grid)
    path = cache_dir / f"sigma_{key}.nlmk"
    if path.exists():
        try:
            return load_kernel(path)
        except Exception:
            path.unlink()  # corrupt cache entry: recompute
    sigma = model.sigma_kernel(grid, omega)
    save_kernel(sigma, path)
    return sigma


def _run_grid(scenario: Scenario, threads: int, out_dir: Path):
    spec = scenario.media[scenario.geometry.media[0]]
    model = spec.build()
    grid = PeriodicGrid(scenario.geometry.n)
    cache_dir = out_dir / "cache"
    rows = []
    for w in scenario.omega_values:
        q_kernel = model.q_kernel(grid, w)
        sigma = _cached_sigma(spec, model, w, grid, cache_dir)
        sol = gridsolver.solve_green(gridsolver.build_H(q_kernel, w))
        fd = gridsolver.verify_integral_relation(sol, sigma, w)
        rows.append([w, sol.residual, sol.reciprocity, fd])
    header = ["omega", "solve_residual", "reciprocity_defect",
              "fluctuation_dissipation_residual"]
    return [("grid_green.csv", header, rows)]


def _convert_units(scenario: Scenario, units, args) -> Scenario:
    """Convert SI scenario inputs to internal natural units."""
    if units is None:
        return scenario
    from dataclasses import replace
    geometry = scenario.geometry
    if geometry.d is not None:
        geometry = replace(geometry, d=units.length_to_natural(geometry.d))
    source = scenario.source
    if source is not None:
        source = replace(
            source,
            z=units.length_to_natural(source.z),
            z_field=tuple(units.length_to_natural(z) for z in source.z_field),
        )
    return replace(
        scenario,
        geometry=geometry,
        source=source,
        q_values=tuple(units.wavevector_to_natural(q)
                       for q in scenario.q_values),
        omega_values=tuple(float(np.real(units.frequency_to_natural(w)))
                           for w in scenario.omega_values),
    )


def run_scenario(scenario: Scenario, out_dir: Path, threads: int = 1) -> dict:
    """Execute a scenario: geometry sweep plus requested checks.

    Returns the run report (also written to <out_dir>/report.json).
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    kind = scenario.geometry.kind
    if kind == "bulk":
        outputs = _run_bulk(scenario, threads)
    elif kind == "half_space":
        outputs = _run_half_space(scenario, threads)
    elif kind == "slab":
        outputs = _run_slab(scenario, threads)
    else:
        outputs = _run_grid(scenario, threads, out_dir)
    sweep_seconds = time.perf_counter() - t0

    paths = []
    for fname, header, rows in outputs:
        path = out_dir / fname
        _write_csv(path, header, rows)
        paths.append(str(path))

    check_reports = []
    all_matched = True
    for req in scenario.checks:
        if req.name not in CHECKS:
            raise ConfigError("checks", f"unknown check {req.name!r}")
        result = run_check(req.name, seed=req.seed if req.seed is not None
                           else scenario.seed)
        matched = (result.status == req.expect) or (
            req.expect == "pass" and result.status == "pass")
        if result.status == "error":
            matched = False
        all_matched = all_matched and matched
        rep = result.as_dict()
        rep["expected"] = req.expect
        rep["matched"] = matched
        check_reports.append(rep)

    report = {
        "scenario": scenario.name,
        "seed": scenario.seed,
        "geometry": kind,
        "outputs": paths,
        "checks": check_reports,
        "all_checks_matched": all_matched,
        "sweep_seconds": round(sweep_seconds, 4),
    }
    with open(out_dir / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def _cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    if args.seed is not None:
        from dataclasses import replace
        scenario = replace(scenario, seed=args.seed)
    units = make_unit_system(args.units, args.reference_length)
    scenario = _convert_units(scenario, units, args)
    report = run_scenario(scenario, Path(args.out_dir), threads=args.threads)
    for rep in report["checks"]:
        flag = "ok" if rep["matched"] else "MISMATCH"
        print(f"[{flag}] {rep['name']}: {rep['status']} "
              f"(expected {rep['expected']}, residual {rep['residual']:.3e})")
    print(f"outputs: {', '.join(report['outputs']) or '(none)'}")
    return 0 if report["all_checks_matched"] else 1


def _cmd_check(args) -> int:
    if args.name not in CHECKS:
        print(f"unknown check {args.name!r}; run list-checks", file=sys.stderr)
        return 2
    result = run_check(args.name, seed=args.seed)
    print(json.dumps(result.as_dict(), indent=2, sort_keys=True))
    return 0 if result.passed else 1


def _cmd_list_checks(args) -> int:
    for check in list_checks(args.module):
        print(f"{check.name:24s} [{check.module}] {check.description}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlmedia",
        description="Nonlocal-media electrodynamics: sweeps and verifications")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario file")
    p_run.add_argument("scenario", help="path to a scenario TOML file")
    p_run.add_argument("--out-dir", default="out", help="output directory")
    p_run.add_argument("--threads", type=int, default=1,
                       help="sweep parallelism (deterministic output order)")
    p_run.add_argument("--units", choices=("si", "natural"), default="natural",
                       help="unit system of the scenario inputs")
    p_run.add_argument("--reference-length", type=float, default=1.0,
                       help="reference length L0 in meters (SI mode)")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the scenario seed")
    p_run.set_defaults(fn=_cmd_run)

    p_check = sub.add_parser("check", help="run one named verification")
    p_check.add_argument("name")
    p_check.add_argument("--seed", type=int, default=0)
    p_check.set_defaults(fn=_cmd_check)

    p_list = sub.add_parser("list-checks", help="list named verifications")
    p_list.add_argument("--module", default=None,
                        help="only checks belonging to this module")
    p_list.set_defaults(fn=_cmd_list_checks)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NlmediaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
