"""Command-line surface tying generators, cubes, estimators and experiments together.

Subcommands: ``gen``, ``cubes``, ``dim``, ``certify``, ``distort``, ``verify``.
Every artifact embeds its schema version and a full config echo; re-running
the echoed config reproduces the artifact byte for byte. Exit status: 0 on
success, 2 when the run itself succeeded but the theory hypotheses were not
met (or verification found violations), 1 on errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .bounds import BoundInputs, run_distortion_experiment
from .cubes import CubeParams, build_system, verify_system
from .dimension import dimension_from_covers, scale_schedule
from .errors import FractalLabError, InvalidInputError
from .generators import (generate, load_point_cloud, make_map,
                         parse_space_token, space_to_dict, write_json)
from .holder import certify_compactly_holder, default_radius_schedule

SUBCOMMANDS = ("gen", "cubes", "dim", "certify", "distort", "verify")


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; 2 is reserved for findings.
    def error(self, message):
        raise InvalidInputError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fractal-lab",
                     description="Desk-scale metric fractal geometry toolkit")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--space", required=True,
                       help="space token (e.g. cantor:8, grid:1000) or file path")
        if name in ("certify", "distort"):
            p.add_argument("--map", required=True, dest="map_kind",
                           help="map token (identity, snowflake_id:a, power:b, ...)")
        p.add_argument("--delta", type=float, default=None)
        p.add_argument("--c0", type=float, default=None)
        p.add_argument("--C0", type=float, default=None, dest="C0")
        p.add_argument("--kmax", type=int, default=None)
        p.add_argument("--p", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--Q", type=float, default=None, dest="Q")
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--schedule", default=None,
                       help="r0,factor,count geometric schedule")
        p.add_argument("--out", default=None)
        p.add_argument("--format", default="json", choices=("json", "csv"))
    return parser


def _config_echo(args) -> dict:
    echo = {"subcommand": args.subcommand, "space": args.space,
            "map": getattr(args, "map_kind", None)}
    for key in ("delta", "c0", "C0", "kmax", "p", "alpha", "Q", "epsilon",
                "schedule", "out", "format"):
        echo[key] = getattr(args, key)
    return echo


def config_to_argv(config: dict) -> list:
    """Rebuild the CLI invocation from an artifact's config echo."""
    argv = [config["subcommand"], "--space", config["space"]]
    if config.get("map"):
        argv += ["--map", config["map"]]
    for key in ("delta", "c0", "C0", "kmax", "p", "alpha", "Q", "epsilon",
                "schedule", "out", "format"):
        value = config.get(key)
        if value is not None:
            argv += [f"--{key}", str(value)]
    return argv


def _load_space(token: str):
    path = Path(token)
    if path.suffix.lower() in (".json", ".csv") or path.exists():
        return load_point_cloud(path)
    return generate(parse_space_token(token))


def _parse_schedule(raw: str) -> list:
    try:
        r0_s, factor_s, count_s = raw.split(",")
        r0, factor, count = float(r0_s), float(factor_s), int(count_s)
    except ValueError as exc:
        raise InvalidInputError(f"--schedule must be r0,factor,count: {exc}") from exc
    if not (r0 > 0 and 0.0 < factor < 1.0 and count >= 1):
        raise InvalidInputError("--schedule needs r0 > 0, factor in (0,1), count >= 1")
    return [r0 * factor ** j for j in range(count)]


def _cube_params(args) -> CubeParams:
    defaults = CubeParams()
    return CubeParams(
        delta=args.delta if args.delta is not None else defaults.delta,
        c0=args.c0 if args.c0 is not None else defaults.c0,
        C0=args.C0 if args.C0 is not None else defaults.C0,
        k_max=args.kmax if args.kmax is not None else defaults.k_max)


def _cmd_gen(args, space):
    return 0, {"schema": "space/1", "space": space_to_dict(space)}, None


def _cmd_cubes(args, space):
    system = build_system(space, _cube_params(args))
    return 0, {"schema": "cubes/1", **system.to_dict()}, None


def _cmd_verify(args, space):
    system = build_system(space, _cube_params(args))
    violations = verify_system(system, space)
    payload = {"schema": "verify/1",
               "params": system.params.to_dict(),
               "level_sizes": [len(level) for level in system.levels],
               "max_children": system.max_children,
               "violation_count": len(violations),
               "violations": violations}
    return (2 if violations else 0), payload, None


def _cmd_dim(args, space):
    if args.schedule is not None:
        scales = _parse_schedule(args.schedule)
    else:
        ratio = args.delta if args.delta is not None else 0.5
        scales = scale_schedule(space, ratio=ratio)
    reports, estimate = dimension_from_covers(space, scales=scales)
    payload = {"schema": "dimension/1",
               "estimate": estimate.to_dict(),
               "counts": [rep.to_dict() for rep in reports]}
    csv_text = "scale,count\n" + "".join(
        f"{rep.scale!r},{rep.upper}\n" for rep in reports)
    return 0, payload, csv_text


def _cmd_certify(args, space):
    if args.p is None or args.alpha is None:
        raise InvalidInputError("certify requires --p and --alpha")
    map_ = make_map(args.map_kind, space)
    epsilon = args.epsilon if args.epsilon is not None else 0.4
    if args.schedule is not None:
        schedule = _parse_schedule(args.schedule)
    else:
        schedule = default_radius_schedule(space)
    cert = certify_compactly_holder(map_, space.all_points(), args.p,
                                    args.alpha, epsilon, schedule)
    payload = {"schema": "certificate/1", "certificate": cert.to_dict()}
    csv_text = "r,ball_count,p_sum_strong,p_sum_weak\n" + "".join(
        f"{r!r},{c},{s!r},{w!r}\n"
        for r, c, s, w in zip(cert.schedule, cert.ball_counts,
                              cert.strong_p_sums, cert.weak_p_sums))
    return 0, payload, csv_text


def _cmd_distort(args, space):
    if args.p is None:
        raise InvalidInputError("distort requires --p")
    if (args.alpha is None) == (args.Q is None):
        raise InvalidInputError("distort takes exactly one of --alpha (compact-Holder "
                                "bound) or --Q (Sobolev-type bound)")
    kind = "ch" if args.alpha is not None else "sobolev"
    inputs = BoundInputs(kind=kind, p=args.p, alpha=args.alpha, q=args.Q)
    map_ = make_map(args.map_kind, space)
    epsilon = args.epsilon if args.epsilon is not None else 0.4
    schedule = _parse_schedule(args.schedule) if args.schedule is not None else None
    report = run_distortion_experiment(map_, space.all_points(), inputs,
                                       _cube_params(args), epsilon=epsilon,
                                       cert_schedule=schedule)
    payload = {"schema": "distortion/1", "report": report.to_dict()}
    return (2 if report.hypothesis_violation else 0), payload, None


_HANDLERS = {"gen": _cmd_gen, "cubes": _cmd_cubes, "dim": _cmd_dim,
             "certify": _cmd_certify, "distort": _cmd_distort,
             "verify": _cmd_verify}


def run_argv(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        space = _load_space(args.space)
        code, payload, csv_text = _HANDLERS[args.subcommand](args, space)
        if args.format == "csv":
            if csv_text is None:
                raise InvalidInputError(
                    f"{args.subcommand} has no CSV form; use --format json")
            if args.out:
                Path(args.out).write_text(csv_text)
            else:
                sys.stdout.write(csv_text)
            return code
        payload["config"] = _config_echo(args)
        if args.out:
            write_json(payload, args.out)
        else:
            json.dump(payload, sys.stdout, sort_keys=True, indent=2)
            sys.stdout.write("\n")
        return code
    except FractalLabError as exc:
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


def main() -> None:
    sys.exit(run_argv(sys.argv[1:]))


if __name__ == "__main__":
    main()
