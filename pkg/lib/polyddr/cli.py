import argparse
import datetime
import json
import os
import sys
import time
import traceback
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import __version__ as VERSION
from . import bgg
from . import constants as C
from . import transfer
from . import verify
from .assembly import Discretisation
from .color import color
from .config import Config
from .ddr import ddr_commutation_residual
from .fields import polynomial_vector
from .logger import logger
from .mesh import PolyMesh, betti_numbers, generate_mesh, load_mesh, regularity
from .potentials import pot_stokes_extension_residual
from .report import CheckRecord, VerificationReport


COMMANDS: Dict[str, str] = {
    "mesh-info": "Mesh counts, Euler characteristic, Betti numbers and regularity",
    "verify-complex": "Complex, commutation, anti-commutation and cochain residuals",
    "cohomology": "Cohomology dimensions of DS, DH and the twisted complex",
    "dof-table": "Per-triangle DOF counts for DS, DH, FN and HZ",
    "consistency": "Convergence-rate studies on a mesh family",
    "poincare": "Poincare constants on a mesh family and the transfer certificate",
    "report": "All of the above",
}
MESH_COMMANDS = ("mesh-info", "verify-complex", "cohomology", "report")


def _common_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(add_help=False)

    parser.add_argument(
        "--config",
        "-c",
        dest="config_file",
        action="store",
        metavar="PATH",
        default=None,
        help=f"Config file to use (default: {C.DEFAULT_CONFIG_FILE} when present)",
    )
    parser.add_argument(
        "--mesh",
        dest="mesh",
        action="store",
        metavar="PATH",
        help="JSON mesh file",
    )
    parser.add_argument(
        "--family",
        dest="family",
        choices=C.MESH_FAMILIES,
        help="Generated mesh family",
    )
    parser.add_argument(
        "--n",
        dest="n",
        type=int,
        metavar="INT",
        help="Resolution of the generated mesh",
    )
    parser.add_argument(
        "-k",
        dest="k",
        type=int,
        default=0,
        help="Polynomial degree (default: %(default)s)",
    )
    parser.add_argument(
        "--kmax",
        dest="k_max",
        type=int,
        metavar="INT",
        help="Largest degree of the DOF table (default: k_max option)",
    )
    parser.add_argument(
        "--tol",
        dest="rank_tol",
        type=float,
        metavar="FLOAT",
        help="Relative rank tolerance (default: rank_tol option)",
    )
    parser.add_argument(
        "--format",
        dest="format",
        choices=C.REPORT_FORMATS,
        default="json",
        help="Report format (default: %(default)s)",
    )
    parser.add_argument(
        "--out",
        dest="out",
        metavar="DIR",
        help="Write report.<format> into this directory instead of stdout",
    )
    parser.add_argument(
        "--seed",
        dest="seed",
        type=int,
        metavar="INT",
        help="Seed of random probes and fields (default: seed option)",
    )
    parser.add_argument(
        "--monochrome",
        "-m",
        dest="color",
        action="store_false",
        help="Don't colorize log messages",
    )
    parser.add_argument(
        "--timing",
        dest="timing",
        action="store_true",
        help="Record elapsed seconds in the report",
    )

    return parser


def _arg_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="polyddr",
        description="Verify discrete Stokes and Hessian complexes on polygonal meshes",
    )
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
    subparsers.required = True
    common = _common_parser()

    for name, description in COMMANDS.items():
        subparser = subparsers.add_parser(name, parents=[common], help=description)
        if name == "consistency":
            subparser.add_argument(
                "--kind",
                dest="kind",
                choices=C.STUDY_KINDS + ["all"],
                default="all",
                help="Study to run (default: %(default)s)",
            )

    return parser


def _parse_args(args: List[str]) -> argparse.Namespace:
    parser = _arg_parser()
    options = parser.parse_args(args)

    def fail(message: str) -> None:
        parser.exit(status=2, message=f"{parser.format_usage()}\n{message}\n")

    if options.mesh and options.family:
        fail("--mesh and --family are mutually exclusive")
    if options.family and options.command in MESH_COMMANDS and options.n is None:
        fail(f"--family needs --n for {options.command}")
    if options.n is not None and options.n < 1:
        fail(f"--n must be positive, got {options.n}")
    if options.command in MESH_COMMANDS and not (options.mesh or options.family):
        fail(f"{options.command} needs --mesh or --family/--n")
    if not 0 <= options.k <= C.DEFAULT_K_MAX:
        fail(f"k must lie in 0..{C.DEFAULT_K_MAX}, got {options.k}")
    if options.k_max is not None and not 0 <= options.k_max <= C.DEFAULT_K_MAX:
        fail(f"--kmax must lie in 0..{C.DEFAULT_K_MAX}, got {options.k_max}")
    if options.rank_tol is not None and options.rank_tol <= 0:
        fail(f"--tol must be positive, got {options.rank_tol}")

    return options


def load_config(path: Optional[str] = None) -> Config:
    if path is not None:
        return Config.from_yaml_filepath(path)
    if os.path.exists(C.DEFAULT_CONFIG_FILE):
        return Config.from_yaml_filepath(C.DEFAULT_CONFIG_FILE)
    return Config()


def parse_args(args: List[str]) -> Tuple[argparse.Namespace, Config]:
    options = _parse_args(args)
    config = load_config(options.config_file)

    if not options.color:
        color.enabled = False
    else:
        color.style.update(config.color_style)

    logger.info(color.header(f"\npolyddr v:{VERSION}"))
    logger.info(f"Called with args: {color.config(json.dumps(args))}")
    logger.info(f"Loaded config file: {color.config(config.path or '<defaults>')}")

    logger.info(color.header("\nConfig options:"))
    config.display_options()

    if options.k > config.k_max:
        parser = _arg_parser()
        parser.exit(status=2, message=f"k={options.k} exceeds k_max={config.k_max}\n")

    options.rank_tol = options.rank_tol or config.rank_tol
    options.seed = config.seed if options.seed is None else options.seed
    options.k_max = config.k_max if options.k_max is None else options.k_max

    return options, config


def elapsed_time(monotonic_start: float) -> str:
    elapsed = datetime.timedelta(seconds=time.monotonic() - monotonic_start)
    return str(elapsed)[:-4]


def load_input_mesh(options: argparse.Namespace) -> PolyMesh:
    if options.mesh:
        mesh = load_mesh(options.mesh)
    else:
        mesh = generate_mesh(options.family, options.n)
    logger.info(f"Mesh: {color.mesh(repr(mesh))}")
    return mesh


def _rank_settings(options: argparse.Namespace, config: Config) -> verify.RankSettings:
    return verify.RankSettings(options.rank_tol, config.gap_ratio, config.max_dense_dofs)


def mesh_info(mesh: PolyMesh, options: argparse.Namespace, config: Config) -> VerificationReport:
    beta0, beta1 = betti_numbers(mesh)
    report = VerificationReport(mesh=mesh.descriptor())
    report.tables["mesh"] = [
        {
            "vertices": mesh.num_vertices,
            "edges": mesh.num_edges,
            "cells": mesh.num_cells,
            "euler": mesh.euler_characteristic,
            "beta0": beta0,
            "beta1": beta1,
            **regularity(mesh),
        }
    ]
    report.add(
        CheckRecord.equals("euler_betti", mesh.euler_characteristic, beta0 - beta1), "mesh"
    )
    return report


def verify_complex(
    disc: Discretisation, options: argparse.Namespace, config: Config
) -> VerificationReport:
    report = VerificationReport(mesh=disc.mesh.descriptor(), k=disc.k)
    residual_tol, commutation_tol = config.residual_tol, config.commutation_tol

    def bound(name: str, value: float, tol: float, section: str) -> None:
        report.add(CheckRecord.upper_bound(name, value, tol), section)

    for name, value in verify.complex_residuals(disc).items():
        bound(name, value, residual_tol, "complex")
    bound("twisted_A1A0", bgg.twisted_residual(disc), residual_tol, "complex")
    bound("anticommutativity", bgg.verify_anticommutativity(disc), residual_tol, "complex")

    sym = bgg.SymSubspaceMap(disc).audit(_rank_settings(options, config))
    bound("sym_sskw_embedding", sym["sskw_embedding"], residual_tol, "complex")
    bound("sym_orthonormality", sym["orthonormality"], residual_tol, "complex")
    report.add(CheckRecord.holds("sym_kernel_dimensions", sym["kernel_dimensions"]), "complex")

    commutation = verify.commutation_residuals(disc, config.random_fields, options.seed)
    rng = np.random.default_rng(options.seed)
    v = polynomial_vector(disc.k + 2, rng)
    commutation.update(ddr_commutation_residual(disc.quad, disc.k, v, v.jacobian))
    for name, value in commutation.items():
        bound(name, value, commutation_tol, "commutation")

    layout = disc.layout("X_Sgrad")
    extension = max(
        pot_stokes_extension_residual(
            rng.standard_normal(layout.local_size(cell.index)), cell, disc.k
        )
        for cell in disc.cells()
    )
    bound("pot_stokes_extension", extension, commutation_tol, "potentials")

    for name, spread in verify.boundedness_spread(disc).items():
        bound(f"boundedness_{name}_spread", spread, C.DEFAULT_BOUNDEDNESS_SPREAD, "potentials")

    residuals = transfer.verify_cochain(disc, options.seed, rank_tol=options.rank_tol)
    membership = residuals.pop("membership")
    for name, value in residuals.items():
        bound(f"cochain_{name}", value, residual_tol, "cochain")
    bound("cochain_membership", membership, config.membership_tol, "cochain")

    rank = _rank_settings(options, config)
    for row in verify.local_exactness(disc, config.local_exactness_cells, rank.tol):
        report.add(
            CheckRecord.equals(
                f"local_exactness_cell{row['cell']}",
                [row["sgrad_nullity"], row["exactness_defect"], row["srot_onto"]],
                [1, 0, True],
                row["certified"],
            ),
            "exactness",
        )

    return report


def cohomology(disc: Discretisation, options: argparse.Namespace, config: Config) -> VerificationReport:
    return bgg.cohomology_report(disc, _rank_settings(options, config))


def consistency(options: argparse.Namespace, config: Config) -> VerificationReport:
    report = VerificationReport(k=options.k)
    family = options.family or "cartesian"
    kinds = C.STUDY_KINDS if getattr(options, "kind", "all") == "all" else [options.kind]
    rows = []

    for kind in kinds:
        tol = config.adjoint_slope_tol if kind in verify.ADJOINT_KINDS else config.slope_tol
        study = verify.consistency_study(
            kind,
            family=family,
            sizes=config.families["consistency"],
            k=options.k,
            quadrature_margin=config.quadrature_margin,
            slope_tol=tol,
            consistency_tol=config.consistency_tol,
        )
        report.add(study.record(), "consistency")
        rows += study.rows()

    report.tables["consistency"] = rows
    return report


def poincare(options: argparse.Namespace, config: Config) -> VerificationReport:
    report = VerificationReport(k=options.k)
    family = options.family or "cartesian"
    sizes = config.families["poincare"]
    study = verify.poincare_study(family, sizes, options.k, config.quadrature_margin, options.rank_tol)

    for slot, spread in study["spread"].items():
        report.add(
            CheckRecord.upper_bound(f"poincare_{slot}_spread", spread, config.poincare_spread),
            "poincare",
        )
    report.tables["poincare"] = study["rows"]

    rows = []
    for n in sizes:
        mesh = generate_mesh(family, n)
        disc = Discretisation(mesh, options.k, config.quadrature_margin)
        slices = transfer.transfer_slices(disc, config.probes, options.seed, options.rank_tol)
        for slot, result in slices.items():
            report.add(
                CheckRecord.holds(
                    f"transfer_{slot}_{mesh.name}",
                    result["passed"],
                    {"direct": result["direct"], "bound": result["bound"]},
                    f"C_P from {result['probes']} probes: {result['C_P_probes']:.4g}",
                ),
                "transfer",
            )
            rows.append(
                {
                    "mesh": mesh.name,
                    "slice": slot,
                    **{key: result[key] for key in ("C_hat", "C_P", "norm_E0", "norm_E1", "norm_R1", "direct", "bound")},
                }
            )

    report.tables["transfer"] = rows
    return report


def dof_table(options: argparse.Namespace, config: Config) -> VerificationReport:
    return bgg.dof_report(options.k_max)


def run_command(options: argparse.Namespace, config: Config) -> VerificationReport:
    command = options.command
    logger.info(color.header(f"\nRunning {command}"))

    if command == "dof-table":
        return dof_table(options, config)
    if command == "consistency":
        return consistency(options, config)
    if command == "poincare":
        return poincare(options, config)

    mesh = load_input_mesh(options)
    if command == "mesh-info":
        return mesh_info(mesh, options, config)

    disc = Discretisation(mesh, options.k, config.quadrature_margin)
    mesh_steps: Dict[str, Callable] = {"verify-complex": verify_complex, "cohomology": cohomology}
    if command in mesh_steps:
        return mesh_steps[command](disc, options, config)

    report = mesh_info(mesh, options, config)
    report.k = options.k
    for step in (verify_complex, cohomology):
        report.merge(step(disc, options, config))
    # rate studies and Poincare sweeps run on their own unit-square families
    family_options = argparse.Namespace(**{**vars(options), "family": None})
    for step in (dof_table, consistency, poincare):
        report.merge(step(family_options, config))
    return report


def cli(args: List[str]) -> VerificationReport:
    start_time = time.monotonic()
    options, config = parse_args(args)

    report = run_command(options, config)
    report.elapsed_s = time.monotonic() - start_time

    if options.out:
        path = report.write(options.out, options.format, options.timing)
        logger.info(f"Wrote report: {color.config(path)}")
    else:
        sys.stdout.write(report.render(options.format, options.timing))

    logger.info(f"\nStatus: {color.status(report.status)}")
    logger.info(f"{color.elapsed('Elapsed time:')} {elapsed_time(start_time)}\n")

    return report


def main() -> None:
    try:
        report = cli(sys.argv[1:])
        status = 0 if report.passed else 1
    except Exception:
        logger.error(color.error(traceback.format_exc()))
        status = 1
    sys.exit(status)
