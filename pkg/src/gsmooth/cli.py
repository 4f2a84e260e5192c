"""Command-line front end.

Subcommands: build-cap, check, solve, export.  Exit codes: 0 success / all
checks pass, 1 verification failure, 2 usage or input error, 3 numerical
failure.  Every error path prints a single line `error:<reason>: message`
to stderr.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as gio
from .errors import (
    ContractError,
    DegenerateSpaceError,
    FileFormatError,
    FoldError,
    GsmoothError,
    InversionError,
    OverlapError,
    SamplingError,
    SingularJacobianError,
    UnsupportedOrderError,
)
from .galerkin import (
    SpaceMember,
    assemble,
    domain_area,
    l2_error,
    l2_project,
    solve_reaction,
)
from .gluing import check_gk
from .isogeo import lemma_check, make_elements
from .spaces import (
    GSmoothSpace,
    build_complex,
    build_gsmooth_space,
    make_geometry,
)

USAGE_ERRORS = (ContractError, FileFormatError, UnsupportedOrderError)
NUMERICAL_ERRORS = (
    FoldError,
    OverlapError,
    DegenerateSpaceError,
    SingularJacobianError,
    InversionError,
    SamplingError,
)


def _parse_degree(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) == 1:
        d = int(parts[0])
        return d, d
    if len(parts) == 2:
        return int(parts[0]), int(parts[1])
    raise argparse.ArgumentTypeError("degree must be 'p' or 'p,q'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gsmooth",
        description="Build, verify, and solve over smooth multipatch caps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build-cap", help="construct a smooth cap and write it to disk")
    p_build.add_argument("--n", type=int, required=True, help="number of patches around the vertex")
    p_build.add_argument("--degree", type=_parse_degree, default=(3, 3), help="bidegree p or p,q")
    p_build.add_argument("--k", type=int, default=1, help="smoothness order")
    p_build.add_argument("--seed", type=int, default=0, help="seed for the sample field draw")
    p_build.add_argument("--out", required=True, help="output complex file")

    p_check = sub.add_parser("check", help="verify smoothness of a complex file")
    p_check.add_argument("file", help="complex file to verify")
    p_check.add_argument("--k", type=int, default=None, help="order to check (default: the file's)")
    p_check.add_argument("--samples", type=int, default=50, help="edge samples per check")
    p_check.add_argument("--tol", type=float, default=1e-8, help="mismatch tolerance")
    p_check.add_argument("--out", default=None, help="directory for per-edge CSV reports")

    p_solve = sub.add_parser("solve", help="project or solve a reaction problem on a cap")
    p_solve.add_argument("file", help="complex file")
    p_solve.add_argument("--problem", choices=("project", "reaction"), default="reaction")
    p_solve.add_argument("--target", choices=("one", "trig"), default="one",
                         help="projection target (project mode)")
    p_solve.add_argument("--quadrature", type=int, default=None, help="Gauss points per direction")
    p_solve.add_argument("--seed", type=int, default=0, help="seed of the manufactured member")
    p_solve.add_argument("--out", default=None, help="output prefix for solution CSV and norms")

    p_export = sub.add_parser("export", help="export geometry, fields, or reports")
    p_export.add_argument("file", help="complex file")
    p_export.add_argument("--what", choices=("surface", "field", "report"), default="surface")
    p_export.add_argument("--format", choices=("csv", "obj"), default="csv")
    p_export.add_argument("--resolution", type=int, default=10, help="samples per direction per patch")
    p_export.add_argument("--out", required=True, help="output file (or directory for reports)")
    return parser


def _rebuild_space(complex_, k: int) -> GSmoothSpace:
    """Deterministically rebuild the smoothness space a file's coefficient
    vectors refer to, from the file's own edge records."""
    return build_gsmooth_space(complex_, k)


def cmd_build_cap(args) -> int:
    if args.n < 3:
        raise ContractError(f"--n must be at least 3, got {args.n}")
    complex_ = build_complex(args.n, args.degree)
    space = build_gsmooth_space(complex_, args.k)
    make_geometry(space)
    rng = np.random.default_rng(args.seed)
    complex_.fields["sample"] = rng.standard_normal(space.dimension)
    gio.write_complex(args.out, complex_, args.k)
    print(f"n={args.n}")
    print(f"bidegree={args.degree[0]},{args.degree[1]}")
    print(f"k={args.k}")
    print(f"space_dimension={space.dimension}")
    print(f"constraint_residual={space.constraint_residual!r}")
    print(f"out={args.out}")
    return 0


def cmd_check(args) -> int:
    complex_, file_k = gio.read_complex(args.file)
    k = file_k if args.k is None else args.k
    out_dir = Path(args.out) if args.out else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    failures = []

    reports = []
    for i, rec in enumerate(complex_.edges):
        rep = check_gk(
            complex_.geometry[rec.patch_a], complex_.geometry[rec.patch_b],
            rec.rho, k, args.samples, args.tol,
        )
        reports.append((f"edge{i}_geometry", rep))
        status = "pass" if rep.verdict else "FAIL"
        print(f"edge {rec.patch_a}-{rec.patch_b} geometry: "
              f"max_mismatch={rep.max_mismatch!r} {status}")
        if not rep.verdict:
            failures.append(f"edge {rec.patch_a}-{rec.patch_b} (geometry)")

    if complex_.fields and complex_.geometry_coeffs is not None and k >= 1:
        space = _rebuild_space(complex_, k)
        for name, coeffs in complex_.fields.items():
            elements = make_elements(space, coeffs)
            for i, rec in enumerate(complex_.edges):
                rep = lemma_check(
                    elements[rec.patch_a], elements[rec.patch_b],
                    rec.rho, k, args.samples, args.tol,
                )
                reports.append((f"edge{i}_field_{name}", rep))
                status = "pass" if rep.verdict else "FAIL"
                print(f"edge {rec.patch_a}-{rec.patch_b} field '{name}': "
                      f"max_mismatch={rep.max_mismatch!r} {status}")
                if not rep.verdict:
                    failures.append(
                        f"edge {rec.patch_a}-{rec.patch_b} (field '{name}')"
                    )

    if out_dir:
        for name, rep in reports:
            gio.report_to_csv(rep, out_dir / f"{name}.csv")
    if failures:
        print(f"verification failed: {'; '.join(failures)}", file=sys.stderr)
        return 1
    return 0


def _trig_target(x) -> float:
    return float(np.sin(1.3 * x[0]) * np.cos(0.7 * x[1]))


def cmd_solve(args) -> int:
    complex_, k = gio.read_complex(args.file)
    space = _rebuild_space(complex_, k)
    problem = assemble(space, args.quadrature)
    prefix = args.out or (str(Path(args.file).with_suffix("")) + f"_{args.problem}")
    norms: dict[str, float] = {"area": domain_area(problem)}

    if args.problem == "project":
        target = (lambda x: 1.0) if args.target == "one" else _trig_target
        coeffs = l2_project(problem, target)
        norms["l2_error"] = l2_error(problem, coeffs, target)
    else:
        rng = np.random.default_rng(args.seed)
        c_star = rng.standard_normal(space.dimension)
        member = SpaceMember(space, c_star)
        coeffs = solve_reaction(problem, member.reaction_rhs, member.value)
        norms["coeff_error"] = float(np.max(np.abs(coeffs - c_star)))
        norms["l2_error"] = l2_error(problem, coeffs, member.value)

    fields = space.complex.patch_nets(coeffs @ space.basis)
    gio.export_field_csv(prefix + ".csv", space.complex.geometry, fields, 10)
    with open(prefix + ".norms.txt", "w") as fh:
        for key, value in norms.items():
            fh.write(f"{key}={value!r}\n")
            print(f"{key}={value!r}")
    print(f"solution={prefix}.csv")
    return 0


def cmd_export(args) -> int:
    complex_, k = gio.read_complex(args.file)
    if args.what == "surface":
        if args.format == "obj":
            gio.export_obj(args.out, complex_.geometry, args.resolution)
        else:
            gio.export_surface_csv(args.out, complex_.geometry, args.resolution)
    elif args.what == "field":
        if not complex_.fields:
            raise ContractError("complex file carries no fields to export")
        space = _rebuild_space(complex_, k)
        name, coeffs = next(iter(complex_.fields.items()))
        fields = space.complex.patch_nets(coeffs @ space.basis)
        if args.format == "obj":
            gio.export_obj(args.out, complex_.geometry, args.resolution, heights=fields)
        else:
            gio.export_field_csv(args.out, complex_.geometry, fields, args.resolution)
    else:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, rec in enumerate(complex_.edges):
            rep = check_gk(
                complex_.geometry[rec.patch_a], complex_.geometry[rec.patch_b],
                rec.rho, k, args.resolution * args.resolution, 1e-8,
            )
            gio.report_to_csv(rep, out_dir / f"edge{i}.csv")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits with 2 on usage errors already
        return int(exc.code or 0)
    handlers = {
        "build-cap": cmd_build_cap,
        "check": cmd_check,
        "solve": cmd_solve,
        "export": cmd_export,
    }
    try:
        return handlers[args.command](args)
    except USAGE_ERRORS as exc:
        print(f"error:{exc.reason}: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"error:{exc.reason}: {exc}", file=sys.stderr)
        return 3
    except GsmoothError as exc:
        print(f"error:{exc.reason}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
