import argparse
import logging
import math
from typing import Any, Callable, Dict, List, Tuple

import numpy as np
from joblib import Parallel, delayed

from systolic.config import get_settings
from systolic.models.errors import InputError
from systolic.models.schemas import FlatTorus, GramMatrix, OptimizerConfig, RunManifest
from systolic.repositories.report_repository import ReportRepository
from systolic.services.bm_optimizer_service import BmOptimizerService
from systolic.services.dual_criteria_service import DualCriteriaService
from systolic.services.extremal_construction_service import ExtremalConstructionService
from systolic.services.hodge_service import HodgeService
from systolic.services.lattice_service import LatticeService
from systolic.services.torus_systole_service import TorusSystoleService
from systolic.utils.helpers import (
    compile_field,
    parse_classes,
    parse_exponents,
    parse_grid,
    parse_params,
)

logger = logging.getLogger(__name__)

Outcome = Tuple[int, Dict[str, Any]]

lattice_service = LatticeService()
dual_service = DualCriteriaService(lattice_service)
optimizer_service = BmOptimizerService(lattice_service)
torus_service = TorusSystoleService(lattice_service)
hodge_service = HodgeService(lattice_service)
construction_service = ExtremalConstructionService(hodge_service)
repository = ReportRepository()

CHECKS = ("submersion", "minimality", "harmonic", "hebda")


def manifest_for(args: argparse.Namespace) -> RunManifest:
    """Provenance of a run; every explicitly given option is recorded as a string"""
    skip = {"command", "handler", "seed", "mode", "out"}
    inputs = {name: str(value) for name, value in sorted(vars(args).items())
              if name not in skip and value is not None}
    return RunManifest(
        subcommand=args.command,
        inputs=inputs,
        seed=args.seed,
        mode=args.mode,
        output=args.out,
        tool_version=get_settings().APP_VERSION,
    )


def _require_gram(args: argparse.Namespace) -> GramMatrix:
    if not args.gram:
        raise InputError(f"{args.command} needs --gram")
    return repository.load_gram(args.gram, exact=args.mode == "exact")


def _gram_payload(gram: GramMatrix) -> Dict[str, Any]:
    payload: Dict[str, Any] = {"dim": gram.dim, "gram": gram.entries}
    if gram.is_exact:
        payload["gram_exact"] = [[str(x) for x in row] for row in gram.rational.tolist()]
    return payload


def run_svp(args: argparse.Namespace) -> Outcome:
    gram = _require_gram(args)
    result = lattice_service.shortest_vectors(gram)
    reduced = lattice_service.reduce_basis(gram)
    return 0, {
        "shortest_vectors": result,
        "count": result.count,
        "reduced_gram": reduced.gram.entries,
        "transform": reduced.transform,
    }


def run_dual(args: argparse.Namespace) -> Outcome:
    gram = _require_gram(args)
    dual = lattice_service.dual_gram(gram)
    report: Dict[str, Any] = {
        "dual": _gram_payload(dual),
        "dual_shortest_vectors": lattice_service.shortest_vectors(dual),
        "footprint_size": len(dual_service.short_vector_footprint(gram)),
    }
    if gram.dim <= get_settings().ISODUAL_MAX_DIM:
        report["isoduality"] = dual_service.is_isodual(gram)
    return 0, report


def _optimize(args: argparse.Namespace) -> Outcome:
    if args.dim is None:
        raise InputError("optimization needs --dim")
    config = OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, seed=args.seed)
    traces = optimizer_service.run_restarts(args.dim, config)
    best = max(traces, key=lambda trace: (trace.best_value, -trace.restart_index))
    report: Dict[str, Any] = {
        "dim": args.dim,
        "best_value": best.best_value,
        "best_gram": best.best_gram.entries,
        "best_restart": best.restart_index,
        "restart_values": [trace.best_value for trace in traces],
        "history": [[list(entry) for entry in trace.history] for trace in traces],
    }
    code = 0
    if args.dim >= 2:
        bounds = optimizer_service.check_bounds(args.dim, best.best_value)
        report["bounds"] = bounds
        code = 0 if bounds.passed else 1
    return code, report


def run_bm(args: argparse.Namespace) -> Outcome:
    if args.action == "optimize":
        return _optimize(args)
    gram = _require_gram(args)
    certificate = dual_service.certify_against_known(gram)
    report = {
        "bm_product": certificate.bm_value,
        "hermite_invariant": lattice_service.hermite_invariant(gram),
        "certificate": certificate,
    }
    exceeds = certificate.gap is not None and certificate.gap < -certificate.tolerance
    return (1 if exceeds else 0), report


def run_optimize(args: argparse.Namespace) -> Outcome:
    return _optimize(args)


def run_perfect(args: argparse.Namespace) -> Outcome:
    gram = _require_gram(args)
    return 0, {"dual_perfection": dual_service.is_dual_perfect(gram)}


def run_torus(args: argparse.Namespace) -> Outcome:
    gram = _require_gram(args)
    torus = FlatTorus.from_gram(gram)
    systoles = torus_service.torus_systoles(torus)
    inequality = torus_service.verify_main_inequality(torus)
    relation = torus_service.verify_stable_conformal_relation(torus)
    dual_class = lattice_service.shortest_vectors(lattice_service.dual_gram(gram)).vectors[0]
    coarea = torus_service.coarea_lower_bound_check(torus, dual_class)
    norm_family = torus_service.verify_norm_family(torus, max(2.0, float(torus.dim)), math.inf)
    checks = [inequality.passed, relation.passed, coarea.passed, norm_family.passed]
    report: Dict[str, Any] = {
        "systoles": systoles,
        "main_inequality": inequality,
        "stable_conformal": relation,
        "coarea": coarea,
        "norm_family": norm_family,
    }
    if torus.dim == 1:
        circle = torus_service.hebda_specialization(torus)
        report["circle"] = circle
        checks.append(circle.passed)
    return (0 if all(checks) else 1), report


def _class_tables(args, mesh, classes, exponents):
    def one(klass):
        table = hodge_service.holder_chain(mesh, klass, exponents, minimize=args.minimize)
        return f"{klass[0]},{klass[1]}", table

    return dict(Parallel(n_jobs=get_settings().THREADS, prefer="threads")(delayed(one)(k) for k in classes))


def run_hodge(args: argparse.Namespace) -> Outcome:
    lattice = repository.load_lattice(args.lattice) if args.lattice else np.eye(2)
    params = parse_params(args.param)
    phi = compile_field(args.phi, ("x", "y"), params) if args.phi else None
    mesh = hodge_service.build_torus_mesh(lattice, args.n, phi)
    classes = [k for k in parse_classes(args.classes) if k != (0, 0)]
    if not classes:
        raise InputError("--classes must name a nonzero class")
    hodge_service.operators(mesh)
    tables = _class_tables(args, mesh, classes, parse_exponents(args.ps))
    loewner = hodge_service.loewner_check(mesh)
    report = {
        "resolution": args.n,
        "area": mesh.area,
        "norm_tables": tables,
        "loewner": loewner,
        "confsys": hodge_service.confsys_estimate(mesh),
    }
    if args.csv:
        repository.save_norm_tables_csv(tables, args.csv)
    if args.off:
        repository.export_off(mesh, args.off)
    passed = loewner.passed and all(table.monotone for table in tables.values())
    return (0 if passed else 1), report


def run_construct(args: argparse.Namespace) -> Outcome:
    m, k = parse_grid(args.grid)
    params = parse_params(args.param)
    density = compile_field(args.rho, ("u", "v"), params)
    family = construction_service.build_fiber_family(density, args.l, m, k)
    validation = construction_service.validate_fiber_family(family.density, family.fiber_volume)
    report: Dict[str, Any] = {"grid": [m, k], "base_length": args.l, "validation": validation}
    if not validation.ok:
        return 1, report

    kernel = compile_field(args.c, ("u",), params)(np.arange(m) / m)
    lift = construction_service.moser_lift(family, kernel)
    metric = construction_service.assemble_metric(family, lift)
    report["lift_residual"] = lift.residual
    report["min_determinant"] = float(np.min(metric.determinant))

    wanted = CHECKS if args.checks == "all" else tuple(c.strip() for c in args.checks.split(","))
    unknown = set(wanted) - set(CHECKS)
    if unknown:
        raise InputError(f"Unknown checks {sorted(unknown)}; choose from {', '.join(CHECKS)} or all")

    outcomes: List[bool] = []
    if "submersion" in wanted:
        report["submersion"] = construction_service.check_submersion(metric, family)
        outcomes.append(report["submersion"].passed)
    if "minimality" in wanted:
        report["minimality"] = construction_service.check_minimal_fibers(metric)
        outcomes.append(report["minimality"].passed)
    if "harmonic" in wanted:
        report["harmonic_constant_norm"] = construction_service.check_harmonic_constant_norm(metric, args.n)
        outcomes.append(report["harmonic_constant_norm"].passed)
    if "hebda" in wanted:
        report["hebda"] = construction_service.hebda_equality(metric, args.n)
        outcomes.append(report["hebda"].passed)
    return (0 if all(outcomes) else 1), report


HANDLERS: Dict[str, Callable[[argparse.Namespace], Outcome]] = {
    "svp": run_svp,
    "dual": run_dual,
    "bm": run_bm,
    "optimize": run_optimize,
    "perfect": run_perfect,
    "torus": run_torus,
    "hodge": run_hodge,
    "construct": run_construct,
}


def dispatch(args: argparse.Namespace) -> int:
    """Run one subcommand, write its report with the manifest embedded and return the exit code"""
    manifest = manifest_for(args)
    code, report = HANDLERS[args.command](args)
    repository.save_report({"manifest": manifest, **report, "exit_code": code}, args.out)
    return code
