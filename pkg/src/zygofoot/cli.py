"""Command-line interface: ``zygofoot {reach,perch,tlm,hausdorff}``.

Exit codes: 0 success (including an unconverged perch report), 2 usage or
input errors, 3 point-budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from importlib import resources
from pathlib import Path

import jsonschema

from . import io
from .finger import GOLDEN, BudgetError, ControlSet, FingerSpec
from .foot import default_parrot_foot, foot_reachable
from .perch import CylinderBranch, Contact, search_grasp, solve_branch_all, solve_branch_indices
from .reach import DEFAULT_BUDGET, hausdorff_distance, reachable_set
from .tlm import (CylinderObstacle, Scenario, Sphere, TlmProfile, constant_controls, linear_approach,
                  simulate)

EXIT_USAGE = 2
EXIT_BUDGET = 3


class UsageError(Exception):
    pass


def _angle(token: str) -> float:
    try:
        return io.parse_angle(token)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _floats(token: str) -> list[float]:
    try:
        return [float(v) for v in str(token).split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {token!r}") from None


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--rho", type=float, default=GOLDEN, help="phalanx scaling factor (default: golden mean)")
    p.add_argument("--omega", type=_angle, default=math.pi / 6, help="maximal rotation, e.g. pi/6")
    p.add_argument("--config", help="JSON config supplying defaults for this command")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="zygofoot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    p = sub.add_parser("reach", help="reachable set of one finger")
    _common(p)
    p.add_argument("--finger", type=int, default=3, choices=[1, 2, 3, 4])
    p.add_argument("--planar", action="store_true", help="skip the 3D embedding; write (x, 0, z)")
    p.add_argument("--depth", type=int, default=None, help="iteration depth k (default: phalanx count)")
    p.add_argument("--resolution", type=int, default=8, help="uniform samples of the control interval")
    p.add_argument("--format", choices=io.CLOUD_FORMATS, default="csv")
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    subs["reach"] = p

    p = sub.add_parser("perch", help="stable / grasping configurations on a branch")
    _common(p)
    p.add_argument("--mode", choices=["solve-branch", "search-grasp"], default="solve-branch")
    p.add_argument("--ellipse-mode", choices=["paper", "geometric"], default="paper")
    p.add_argument("--plane-angle", type=_angle, default=math.pi / 12)
    p.add_argument("--controls", help="forward and backward controls as 'v,v,...;v,v,...'")
    p.add_argument("--fwd-controls", type=_floats, default=None)
    p.add_argument("--bwd-controls", type=_floats, default=None)
    p.add_argument("--fwd-k", type=int, default=None, help="tangent phalanx of the forward finger (default: search)")
    p.add_argument("--bwd-k", type=int, default=None)
    p.add_argument("--touch-origin", action="store_true", help="branch top passes through the foot base")
    p.add_argument("--grid", type=int, default=2, help="control grid resolution for search-grasp")
    p.add_argument("--fwd-count", type=int, default=4, help="forward phalanx count for search-grasp")
    p.add_argument("--bwd-count", type=int, default=2)
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--center", type=float, default=None, help="branch axis depth c_z")
    p.add_argument("--output", "-o", default="-")
    p.add_argument("--budget", type=int, default=10**6)
    subs["perch"] = p

    p = sub.add_parser("tlm", help="simulate tendon-lock engagement")
    _common(p)
    p.add_argument("--scenario", help="name of a shipped scenario (perch_origin, strike_sphere, land_branch)")
    p.add_argument("--obstacle", help="sphere:cx,cy,cz,r or cylinder:ax,az,r")
    p.add_argument("--T", type=float, default=1.0, help="engagement time")
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--duration", type=float, default=2.0)
    p.add_argument("--profile", default="linear", help="'linear' or a CSV file with time,value samples")
    p.add_argument("--approach", type=_floats, default=[0.0, 0.0, 0.0], help="foot base velocity vx,vy,vz")
    p.add_argument("--free-controls", type=float, default=0.0, help="constant free control for every phalanx")
    p.add_argument("--output", "-o", default=".", help="directory for trajectory.csv and events.json")
    p.add_argument("--svg", default=None, help="optional SVG of the talon trajectories")
    subs["tlm"] = p

    p = sub.add_parser("hausdorff", help="Hausdorff distance between two cloud files")
    p.add_argument("file_a")
    p.add_argument("file_b")
    subs["hausdorff"] = p
    return parser, subs


def list_scenarios() -> list[str]:
    root = resources.files("zygofoot").joinpath("scenarios")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(path_or_text, command: str) -> dict:
    cfg = json.loads(path_or_text) if isinstance(path_or_text, str) and path_or_text.lstrip().startswith("{") \
        else json.loads(Path(path_or_text).read_text(encoding="utf-8"))
    jsonschema.validate(cfg, io.load_schema("config.schema.json"))
    return dict(cfg.get(command, {}))


def scenario_config(name: str) -> dict:
    if name not in list_scenarios():
        raise UsageError(f"--scenario: unknown scenario {name!r}; choose from {list_scenarios()}")
    text = resources.files("zygofoot").joinpath("scenarios", f"{name}.json").read_text(encoding="utf-8")
    return load_config(text, "tlm")


def load_scenario(name: str, foot=None) -> Scenario:
    """Build one of the shipped scenarios exactly as ``zygofoot tlm --scenario`` does."""
    parser, subs = build_parser()
    subs["tlm"].set_defaults(**scenario_config(name))
    args = parser.parse_args(["tlm", "--scenario", name])
    return build_scenario(args, foot or default_parrot_foot(rho=args.rho, omega=args.omega))


def parse_obstacle(spec: str):
    try:
        kind, _, nums = spec.partition(":")
        vals = [float(v) for v in nums.split(",")]
        if kind == "sphere" and len(vals) == 4:
            return Sphere(tuple(vals[:3]), vals[3])
        if kind == "cylinder" and len(vals) == 3:
            return CylinderObstacle(CylinderBranch(vals[2], vals[0], vals[1]))
    except ValueError:
        pass
    raise UsageError(f"--obstacle: expected sphere:cx,cy,cz,r or cylinder:ax,az,r, got {spec!r}")


def parse_profile(token: str, T: float) -> TlmProfile:
    if token == "linear":
        return TlmProfile.linear(T)
    try:
        lines = Path(token).read_text(encoding="utf-8").splitlines()
        rows = [[float(v) for v in l.split(",")] for l in lines[1:] if l.strip()]
        return TlmProfile(T, tuple(r[0] for r in rows), tuple(r[1] for r in rows))
    except (OSError, ValueError, IndexError) as exc:
        raise UsageError(f"--profile: {exc}") from None


def build_scenario(args, foot) -> Scenario:
    if not args.obstacle:
        raise UsageError("--obstacle is required (or use --scenario)")
    if len(args.approach) != 3:
        raise UsageError("--approach: expected three components vx,vy,vz")
    if not 0.0 <= args.free_controls <= 1.0:
        raise UsageError("--free-controls must lie in [0, 1]")
    for flag, val in (("--T", args.T), ("--dt", args.dt), ("--duration", args.duration)):
        if not val > 0:
            raise UsageError(f"{flag} must be positive")
    return Scenario(duration=args.duration, dt=args.dt, profile=parse_profile(args.profile, args.T),
                    obstacle=parse_obstacle(args.obstacle),
                    free_control_fn=constant_controls(foot, args.free_controls),
                    approach=linear_approach(args.approach) if any(args.approach) else None,
                    name=args.scenario or "")


def cmd_reach(args) -> int:
    if not args.rho > 1:
        raise UsageError("--rho must be > 1")
    if args.resolution < 2:
        raise UsageError("--resolution must be at least 2")
    foot = default_parrot_foot(rho=args.rho, omega=args.omega, control_set=ControlSet.interval(args.resolution))
    spec = foot.finger(args.finger)
    depth = spec.K if args.depth is None else args.depth
    if depth < 0 or depth > spec.K:
        raise UsageError(f"--depth must lie in 0..{spec.K} for finger {args.finger}")
    if args.planar:
        cloud = reachable_set(spec, depth, args.resolution, budget=args.budget)
    else:
        cloud = foot_reachable(foot, args.finger, depth, args.resolution, budget=args.budget)
    kw = {}
    if args.format == "svg":
        kw["reach_bound"] = spec.reach_bound
    elif args.format == "json":
        kw["meta"] = {"finger": args.finger, "depth": depth, "resolution": args.resolution,
                      "rho": args.rho, "omega": args.omega, "planar": bool(args.planar)}
    io.write_cloud(cloud, args.output, args.format, **kw)
    return 0


def _perch_controls(args) -> tuple[list[float], list[float]]:
    fwd, bwd = args.fwd_controls, args.bwd_controls
    if args.controls:
        parts = args.controls.split(";")
        if len(parts) != 2:
            raise UsageError("--controls: expected 'fwd;bwd'")
        try:
            fwd, bwd = _floats(parts[0]), _floats(parts[1])
        except argparse.ArgumentTypeError as exc:
            raise UsageError(f"--controls: {exc}") from None
    fwd = fwd if fwd is not None else [1.0] * 4
    bwd = bwd if bwd is not None else [1.0] * 2
    if not fwd or not bwd or any(not 0 <= v <= 1 for v in fwd + bwd):
        raise UsageError("--controls: each finger needs at least one control, all in [0, 1]")
    return fwd, bwd


def _pair(args, K_f: int, K_b: int):
    fwd = FingerSpec(args.rho, args.omega, 0.0, 1, K_f)
    return fwd, fwd.mirrored().with_K(K_b)


def cmd_perch(args) -> int:
    if not args.rho > 1:
        raise UsageError("--rho must be > 1")
    params = {"rho": args.rho, "omega": args.omega, "plane_angle": args.plane_angle,
              "ellipse_mode": args.ellipse_mode}
    if args.mode == "solve-branch":
        fwd_seq, bwd_seq = _perch_controls(args)
        fwd, bwd = _pair(args, len(fwd_seq), len(bwd_seq))
        params.update(fwd_controls=fwd_seq, bwd_controls=bwd_seq, touch_origin=bool(args.touch_origin))
        if (args.fwd_k is None) != (args.bwd_k is None):
            raise UsageError("--fwd-k and --bwd-k must be given together")
        if args.fwd_k is not None:
            if not 1 <= args.fwd_k <= fwd.K or not 1 <= args.bwd_k <= bwd.K:
                raise UsageError("--fwd-k/--bwd-k out of range for the given controls")
            sols = solve_branch_all(Contact(fwd, fwd_seq, args.fwd_k), Contact(bwd, bwd_seq, args.bwd_k),
                                    args.plane_angle, args.ellipse_mode, touch_origin=args.touch_origin)
        else:
            sols = solve_branch_indices(fwd, fwd_seq, bwd, bwd_seq, args.plane_angle, args.ellipse_mode,
                                        touch_origin=args.touch_origin)
        good = [s for s in sols if s.converged]
        sols = good if good else sols[:1]
    else:
        if args.radius is None or args.center is None:
            raise UsageError("search-grasp needs --radius and --center")
        if args.grid < 2:
            raise UsageError("--grid must be at least 2")
        fwd, bwd = _pair(args, args.fwd_count, args.bwd_count)
        branch = CylinderBranch(args.radius, 0.0, args.center)
        params.update(radius=args.radius, center=args.center, grid=args.grid,
                      fwd_count=args.fwd_count, bwd_count=args.bwd_count)
        sols = search_grasp(fwd, bwd, branch, args.plane_angle, args.grid, args.ellipse_mode, budget=args.budget)
    report = io.perch_report(args.mode, sols, params)
    io._write_text(args.output, io.dump_json(report))
    return 0


def cmd_tlm(args) -> int:
    foot = default_parrot_foot(rho=args.rho, omega=args.omega)
    traj = simulate(foot, build_scenario(args, foot))
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectory.csv").write_text(io.trajectory_to_csv(traj), encoding="utf-8", newline="\n")
    (out / "events.json").write_text(io.events_to_json(traj.events), encoding="utf-8", newline="\n")
    if traj.guard_violations:
        (out / "guard_violations.json").write_text(io.events_to_json(traj.guard_violations), encoding="utf-8")
    if args.svg:
        Path(args.svg).write_text(io.trajectory_to_svg(traj), encoding="utf-8", newline="\n")
    return 0


def cmd_hausdorff(args) -> int:
    try:
        a, b = io.read_cloud(args.file_a), io.read_cloud(args.file_b)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot read cloud: {exc}") from None
    print(f"{hausdorff_distance(a, b):.12g}")
    return 0


COMMANDS = {"reach": cmd_reach, "perch": cmd_perch, "tlm": cmd_tlm, "hausdorff": cmd_hausdorff}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    try:
        defaults = {}
        if getattr(args, "scenario", None):
            defaults.update(scenario_config(args.scenario))
        if getattr(args, "config", None):
            try:
                defaults.update(load_config(args.config, args.command))
            except (OSError, json.JSONDecodeError, jsonschema.ValidationError) as exc:
                raise UsageError(f"--config: {getattr(exc, 'message', exc)}") from None
        if defaults:
            # Config supplies defaults; explicit flags on the command line still win.
            subs[args.command].set_defaults(**defaults)
            args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"zygofoot {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetError as exc:
        print(f"zygofoot {args.command}: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except ValueError as exc:
        print(f"zygofoot {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
