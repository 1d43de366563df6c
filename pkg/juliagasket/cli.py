"""
Command-line front door.

Every subcommand prints one JSON line on stdout and writes bulk artifacts
under --out. Exit codes: 0 success, 1 computational failure, 2 usage.
"""
import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from juliagasket import __version__
from juliagasket.core.config import settings
from juliagasket.core.exceptions import GasketError, UsageError
from juliagasket.core.logging import setup_logging
from juliagasket.schemas.gluing import GluingTable
from juliagasket.schemas.invocation import Invocation
from juliagasket.schemas.map_spec import MapSpec
from juliagasket.services import (
    cell_complex,
    dirichlet_form,
    geometry,
    rational_map,
    renormalization,
    spectrum,
)
from juliagasket.services.dirichlet_form import ConductanceModel
from juliagasket.services.export_service import export_service

logger = logging.getLogger(__name__)

SUBCOMMANDS = [
    "classify",
    "render",
    "graph",
    "vertices",
    "energy-check",
    "harmonic",
    "renorm",
    "spectrum",
    "invariance",
]


def _floats(text: str) -> List[float]:
    return [float(Fraction(p.strip())) for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="juliagasket",
        description="Gasket Julia sets of z^n + lambda / z^m: dynamics, energies and spectra.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="Logging level for stderr")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--n", type=int, default=2)
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--lambda", dest="lam", default=str(-16 / 27), help='"re" or "re,im"')
    parser.add_argument("--level", type=int, default=1)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--max-iter", dest="max_iter", type=int, default=None)
    parser.add_argument("--r", type=float, default=None, help="Symmetric weight r for weights (1, r, r)")
    parser.add_argument("--c", default=None, help="Base conductances c0,c1,c2 for the renormalization scan")
    parser.add_argument("--seed", type=int, default=settings.DEFAULT_SEED)
    parser.add_argument("--out", type=Path, default=None)
    parser.add_argument("--trials", type=int, default=100)
    parser.add_argument("--kind", choices=["dirichlet", "neumann"], default="dirichlet")
    parser.add_argument("--k", type=int, default=None)
    parser.add_argument("--width", type=int, default=None)
    parser.add_argument("--height", type=int, default=None)
    parser.add_argument("--window", default=None, help="re_min,re_max,im_min,im_max")
    parser.add_argument("--table", choices=["sg", "infer"], default="sg")
    parser.add_argument("--values", default=None, help="Boundary data on V_0, comma separated")
    parser.add_argument("--exact", action="store_true", help="Rational arithmetic where supported")
    parser.add_argument("--spectral-map", dest="spectral_map", action="store_true")
    parser.add_argument("--function", type=Path, default=None, help="id,value CSV of a function on V_{level-1}")
    parser.add_argument(
        "--refine",
        default=None,
        help="preperiod,period: Newton-refine lambda onto that critical orbit relation first",
    )
    return parser


def parse(argv: Optional[List[str]] = None) -> Invocation:
    """
    Parse and validate arguments. Usage errors exit with code 2.
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.level > settings.LEVEL_CAP:
        parser.error(f"--level {args.level} exceeds the level cap {settings.LEVEL_CAP}")
    # the spectral map also solves level + 1
    if args.spectral_map and args.level + 1 > settings.LEVEL_CAP:
        parser.error(f"--spectral-map at --level {args.level} needs level {args.level + 1}, "
                     f"above the level cap {settings.LEVEL_CAP}")
    try:
        inv = Invocation(
            subcommand=args.subcommand,
            n=args.n,
            m=args.m,
            lam=args.lam,
            level=args.level,
            tol=args.tol,
            max_iter=args.max_iter,
            r=args.r,
            c=_floats(args.c) if args.c else None,
            seed=args.seed,
            out=args.out,
            trials=args.trials,
            kind=args.kind,
            k=args.k,
            width=args.width,
            height=args.height,
            window=_floats(args.window) if args.window else None,
            table=args.table,
            values=_floats(args.values) if args.values else None,
            exact=args.exact,
            spectral_map=args.spectral_map,
            function=args.function,
            refine=[int(x) for x in _floats(args.refine)] if args.refine else None,
        )
    except (ValidationError, ValueError) as e:
        parser.error(str(e))
    if args.log_level:
        setup_logging(args.log_level)
    return inv


def _spec(inv: Invocation) -> MapSpec:
    try:
        spec = MapSpec(n=inv.n, m=inv.m, lam=inv.lam)
    except ValidationError as e:
        raise UsageError("invalid map parameters", {"errors": e.errors(include_url=False)}) from e
    if inv.refine is not None:
        preperiod, period = inv.refine
        spec = rational_map.refine_parameter(spec, preperiod, period)
    return spec


def _table(inv: Invocation) -> GluingTable:
    if inv.table == "infer":
        return geometry.infer_gluing(_spec(inv), inv.tol)
    return cell_complex.sg_dynamical_gluing()


def _model(inv: Invocation, table: GluingTable) -> ConductanceModel:
    if inv.r is None:
        return ConductanceModel.standard(table)
    return ConductanceModel.from_renorm(table, renormalization.solve_symmetric(inv.r))


def _out(inv: Invocation) -> Optional[Path]:
    if inv.out is not None:
        inv.out.mkdir(parents=True, exist_ok=True)
    return inv.out


def _number(x) -> Any:
    if isinstance(x, Fraction):
        return str(x)
    return float(x)


def _random_function(rng: np.random.Generator, size: int, exact: bool) -> np.ndarray:
    if exact:
        numerators = rng.integers(-100, 101, size)
        denominators = rng.integers(1, 50, size)
        return np.array([Fraction(int(a), int(b)) for a, b in zip(numerators, denominators)], dtype=object)
    return rng.uniform(-1.0, 1.0, size)


def _boundary_data(inv: Invocation, table: GluingTable) -> List:
    values = list(inv.values) if inv.values else [1.0] + [0.0] * (table.B - 1)
    if len(values) != table.B:
        raise UsageError("--values needs one number per boundary vertex", {"B": table.B})
    return [Fraction(x) for x in values] if inv.exact else values


def run_classify(inv: Invocation) -> Dict[str, Any]:
    spec = _spec(inv)
    report = rational_map.classify(spec, inv.max_iter, inv.tol)
    result = report.model_dump(mode="json")
    result["lambda"] = [spec.lam.real, spec.lam.imag]
    if _out(inv):
        export_service.write_report(result, inv.out / "report.json")
    return result


def run_render(inv: Invocation) -> Dict[str, Any]:
    spec = _spec(inv)
    cfg = geometry.render_config(spec, inv.width, inv.height, inv.max_iter, inv.window)
    counts = geometry.render(spec, cfg)
    result = {
        "width": cfg.width,
        "height": cfg.height,
        "max_iter": cfg.max_iter,
        "escape_radius": cfg.escape_radius,
        "non_escaping": int(np.sum(counts == cfg.max_iter)),
    }
    if _out(inv):
        result["image"] = export_service.write_ppm(geometry.to_image(counts, cfg.max_iter), inv.out / "julia.ppm")
    return result


def run_graph(inv: Invocation) -> Dict[str, Any]:
    table = _table(inv)
    graph = cell_complex.build_level(table, inv.level)
    result = {
        "level": graph.level,
        "vertices": graph.vertex_count,
        "edges": len(graph.edges),
        "cells": len(graph.cells),
        "table": table.model_dump(mode="json"),
    }
    if _out(inv):
        result["files"] = export_service.write_graph(graph, inv.out)
    return result


def run_vertices(inv: Invocation) -> Dict[str, Any]:
    spec = _spec(inv)
    table = _table(inv)
    embedded = geometry.embed_vertices(spec, table, inv.level, inv.tol)
    result = {
        "level": embedded.level,
        "vertices": len(embedded.coords),
        "rotation_defect": geometry.rotation_defect(spec, embedded),
    }
    if inv.level >= 1:
        coarse = geometry.embed_vertices(spec, table, inv.level - 1, inv.tol)
        result["dynamics_defect"] = geometry.dynamics_defect(spec, embedded, coarse)
    if _out(inv):
        result["coords"] = export_service.write_coords(embedded.coords, inv.out / "coords.csv")
        result["files"] = export_service.write_graph(embedded.graph, inv.out)
    return result


def run_energy_check(inv: Invocation) -> Dict[str, Any]:
    table = _table(inv)
    model = _model(inv, table)
    graph = cell_complex.build_level(table, inv.level)
    rng = np.random.default_rng(inv.seed)

    polarization = 0.0
    markov = 0.0
    for _ in range(inv.trials):
        u = rng.uniform(-1.0, 1.0, graph.vertex_count)
        v = rng.uniform(-1.0, 1.0, graph.vertex_count)
        e_u = dirichlet_form.energy(graph, model, u).renormalized
        e_v = dirichlet_form.energy(graph, model, v).renormalized
        e_uv = dirichlet_form.energy(graph, model, u, v).renormalized
        e_sum = dirichlet_form.energy(graph, model, u + v).renormalized
        polarization = max(polarization, abs(e_sum - e_u - 2 * e_uv - e_v) / max(e_sum, 1e-300))
        clamped = dirichlet_form.energy(graph, model, np.clip(u, 0.0, 1.0)).renormalized
        markov = max(markov, clamped - e_u)

    data = _boundary_data(inv, table)
    harmonic = dirichlet_form.energy_limit_estimate(table, model, data, max(inv.level, 1))
    average = dirichlet_form.energy_limit_estimate(table, model, data, max(inv.level, 1), method="average")
    return {
        "level": inv.level,
        "trials": inv.trials,
        "max_polarization_defect": polarization,
        "max_markov_excess": markov,
        "harmonic_sequence": [_number(e.renormalized) for e in harmonic],
        "average_sequence": [_number(e.renormalized) for e in average],
    }


def run_harmonic(inv: Invocation) -> Dict[str, Any]:
    table = _table(inv)
    model = _model(inv, table)
    values = _boundary_data(inv, table)
    coarse = cell_complex.build_level(table, 0)
    energies = [dirichlet_form.energy(coarse, model, values)]
    for level in range(1, inv.level + 1):
        fine = cell_complex.build_level(table, level)
        values = dirichlet_form.harmonic_extension(table, coarse, fine, model, values)
        energies.append(dirichlet_form.energy(fine, model, values))
        coarse = fine

    result = {
        "level": inv.level,
        "energies": [_number(e.renormalized) for e in energies],
        "min": _number(min(values)),
        "max": _number(max(values)),
    }
    if inv.level == 1:
        fixed = set(cell_complex.embedding_map(table, cell_complex.build_level(table, 0), coarse).tolist())
        result["new_values"] = {
            cell_complex.format_address(coarse.vertices[v]): _number(values[v])
            for v in range(coarse.vertex_count)
            if v not in fixed
        }
    if _out(inv):
        result["function"] = export_service.write_function(list(values), inv.out / "harmonic.csv")
    return result


def run_renorm(inv: Invocation) -> Dict[str, Any]:
    if inv.c is not None:
        scan = renormalization.general_scan(inv.c)
        return scan.model_dump(mode="json")
    if inv.r is None:
        raise UsageError("renorm needs --r or --c")
    solution = renormalization.solve_symmetric(inv.r)
    result = solution.model_dump(mode="json")
    result["lambda"] = result.pop("lam")
    result["energy_factor"] = solution.energy_factor
    return result


def run_spectrum(inv: Invocation) -> Dict[str, Any]:
    table = _table(inv)
    model = _model(inv, table)
    if inv.spectral_map:
        report = spectrum.spectral_map_report(table, model, inv.level, inv.k or 3)
    else:
        pair = spectrum.assemble(cell_complex.build_level(table, inv.level), model)
        report = spectrum.solve_spectrum(pair, inv.kind, inv.k)
    result = report.model_dump(mode="json")
    if _out(inv):
        result["eigenvalues_csv"] = export_service.write_eigenvalues(
            inv.out / "eigenvalues.csv",
            report.level,
            report.kind,
            report.eigenvalues,
            report.map_residuals,
            report.spectrum_distances,
        )
    return result


def run_invariance(inv: Invocation) -> Dict[str, Any]:
    if inv.level < 1:
        raise UsageError("invariance needs --level >= 1")
    table = _table(inv)
    model = _model(inv, table)
    coarse = cell_complex.build_level(table, inv.level - 1)
    rng = np.random.default_rng(inv.seed)

    if inv.function is not None:
        if not inv.function.is_file():
            raise UsageError("--function file not found", {"path": str(inv.function)})
        given = export_service.read_function(inv.function, inv.exact)
        if len(given) != coarse.vertex_count:
            raise UsageError("--function needs one value per vertex of V_{level-1}",
                             {"expected": coarse.vertex_count, "got": len(given)})
        functions = [given]
    else:
        functions = (_random_function(rng, coarse.vertex_count, inv.exact) for _ in range(inv.trials))

    raw_worst = 0.0
    renormalized_worst = 0.0
    trials = 0
    for u in functions:
        trials += 1
        residual = dirichlet_form.check_dynamical_invariance(table, model, inv.level, u)
        before = dirichlet_form.energy(coarse, model, u)
        raw_worst = max(raw_worst, float(residual.raw) / max(float(before.raw), 1e-300))
        renormalized_worst = max(renormalized_worst, float(residual.renormalized) / max(float(before.renormalized), 1e-300))

    measure = spectrum.measure_invariance_check(table, inv.level - 1, exact=True)
    return {
        "level": inv.level,
        "trials": trials,
        "exact": inv.exact,
        "max_raw_residual": raw_worst,
        "max_energy_residual": renormalized_worst,
        "energy_factor": _number(model.energy_factor),
        "measure_vertex_defect": _number(measure.vertex_defect),
        "measure_cell_defect": _number(measure.cell_defect),
        "preimage_cells": measure.preimage_cells,
    }


HANDLERS: Dict[str, Callable[[Invocation], Dict[str, Any]]] = {
    "classify": run_classify,
    "render": run_render,
    "graph": run_graph,
    "vertices": run_vertices,
    "energy-check": run_energy_check,
    "harmonic": run_harmonic,
    "renorm": run_renorm,
    "spectrum": run_spectrum,
    "invariance": run_invariance,
}


def _dispatch(inv: Invocation) -> Dict[str, Any]:
    try:
        return HANDLERS[inv.subcommand](inv)
    except ValidationError as e:
        raise UsageError(f"invalid {inv.subcommand} arguments", {"errors": e.errors(include_url=False)}) from e


def execute(inv: Invocation) -> int:
    """Run one invocation, print its JSON summary and return the exit code."""
    try:
        result = _dispatch(inv)
    except UsageError as e:
        print(json.dumps(e.to_dict(), sort_keys=True, default=str))
        return 2
    except GasketError as e:
        logger.error(f"❌ {inv.subcommand} failed: {e.message}")
        print(json.dumps(e.to_dict(), sort_keys=True, default=str))
        return 1
    print(json.dumps({"subcommand": inv.subcommand, **result}, sort_keys=True, default=str))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    setup_logging()
    try:
        inv = parse(argv)
    except SystemExit as e:
        return int(e.code or 0)
    return execute(inv)


if __name__ == "__main__":
    sys.exit(main())
