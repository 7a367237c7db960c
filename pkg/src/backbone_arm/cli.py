"""Command-line entry point: ``backbone-arm <deploy|plan|mission|bench|render>``.

Exit codes: 0 ok, 2 usage, 3 infeasible goal, 4 planner timeout, 5 I/O or
parse error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import yaml

from .deploy import BackboneConfig, InfeasibleGoal, deploy_backbone, validate_backbone, workspace
from .env import Environment, InvalidEnvironment, TeamSpec, read_environment
from .kinematics import ArmModel, DisconnectedTarget, inverse_kinematics
from .maps import NAMES, load_map
from .mission import Mission, bench_team_sizes, read_goals, run_mission
from .plan import InvalidEndpoint, PlannerParams, PlanningError, plan
from .render import line_plot_svg, render_svg
from .traj import RobotTrajectories, to_robot_trajectories, validate_connectivity
from .visgraph import build_visibility_graph

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_TIMEOUT, EXIT_IO = 0, 2, 3, 4, 5

log = logging.getLogger("backbone_arm")


class CliError(Exception):
    def __init__(self, msg: str, code: int):
        super().__init__(msg)
        self.code = code


# ------------------------------------------------------------------ helpers


def _point(text: str) -> np.ndarray:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y but got {text!r}")
    return np.array([x, y])


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_IO)


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}", EXIT_IO)


def _env(arg: str) -> Environment:
    """A file path, or the name of a bundled map."""
    if not Path(arg).exists() and arg in NAMES:
        return load_map(arg)
    text = _read(arg)
    try:
        from .env import load_environment

        return load_environment(text)
    except InvalidEnvironment as exc:
        raise CliError(f"{arg}: {exc}", EXIT_IO)


def _backbone(path: str) -> BackboneConfig:
    try:
        return BackboneConfig.loads(_read(path))
    except (yaml.YAMLError, KeyError, TypeError, ValueError) as exc:
        raise CliError(f"{path}: bad backbone file ({exc})", EXIT_IO)


def _team(args, n_relays: int | None = None) -> TeamSpec:
    n = args.robots if n_relays is None else n_relays
    radius = args.radius[0] if len(args.radius) == 1 else tuple(args.radius)
    try:
        return TeamSpec(n, radius, args.gap, args.robot_radius)
    except ValueError as exc:
        raise CliError(f"bad team: {exc}", EXIT_USAGE)


def _params(args) -> PlannerParams:
    try:
        return PlannerParams(
            attempt_time_budget=args.budget,
            max_attempts=args.attempts,
            rng_seed=args.seed,
            max_iters=args.max_iters,
            workers=args.workers,
            max_restarts=args.restarts,
            retract_seed=not args.no_retract,
        )
    except ValueError as exc:
        raise CliError(f"bad planner options: {exc}", EXIT_USAGE)


def _path_yaml(path, model: ArmModel) -> str:
    data = {
        "base": model.base.tolist(),
        "link_lengths": model.link_lengths.tolist(),
        "cost": float(path.cost),
        "waypoints": [[[float(v) for v in j] for j in w] for w in path.waypoints],
    }
    return yaml.safe_dump(data, default_flow_style=None, sort_keys=False)


# -------------------------------------------------------------- subcommands


def cmd_deploy(args) -> int:
    env = _env(args.env)
    team = _team(args)
    try:
        cfg = deploy_backbone(env, team, args.goal)
    except InfeasibleGoal as exc:
        raise CliError(f"infeasible goal: {exc}", EXIT_INFEASIBLE)
    _write(args.out, cfg.dumps())
    if args.svg:
        _write(args.svg, render_svg(env, [cfg], goals=[args.goal]))
    return EXIT_OK


def cmd_plan(args) -> int:
    env = _env(args.env)
    start, goal = _backbone(getattr(args, "from")), _backbone(args.to)
    if start.n_relays != goal.n_relays:
        raise CliError("start and goal backbones have different team sizes", EXIT_USAGE)
    team = _team(args, start.n_relays)
    free = workspace(env, team)
    for name, cfg in (("start", start), ("goal", goal)):
        if not validate_backbone(cfg, free, team).passed:
            raise CliError(f"{name} backbone is not connected", EXIT_INFEASIBLE)
    model = ArmModel.from_team(start.base, team)
    try:
        q0, q1 = inverse_kinematics(model, start), inverse_kinematics(model, goal)
        params = _params(args)
        path = plan(model, q0, q1, free, params)
    except (DisconnectedTarget, InvalidEndpoint) as exc:
        raise CliError(f"infeasible: {exc}", EXIT_INFEASIBLE)
    except PlanningError as exc:
        raise CliError(f"planner timeout: {exc}", EXIT_TIMEOUT)
    _write(args.out, _path_yaml(path, model))
    tr = to_robot_trajectories(path, model, args.vmax, args.dt, params.collision_step, params.collision_res)
    if args.traj:
        _write(args.traj, tr.to_csv())
    if args.svg:
        _write(args.svg, render_svg(env, [start, goal], trajectories=tr))
    audit = validate_connectivity(tr, free, team)
    print(f"cost {path.cost:.3f} m, duration {tr.duration:.2f} s, violations {audit.violations}", file=sys.stderr)
    return EXIT_OK


def cmd_mission(args) -> int:
    env = _env(args.env)
    try:
        goals = read_goals(_read(args.goals))
    except ValueError as exc:
        raise CliError(f"{args.goals}: {exc}", EXIT_IO)
    team = _team(args)
    report = run_mission(Mission(env, team, goals, _params(args), args.vmax, args.dt))
    _write(args.out, report.to_csv(wall_clock=not args.no_wall_clock))
    if args.traj:
        _write(args.traj, report.trajectories_csv())
    if args.svg:
        legs = report.completed
        backbones = [legs[-1].goal_backbone] if legs else []
        tr = None
        if legs:
            tr = RobotTrajectories.from_csv(report.trajectories_csv(), env.base_station)
        _write(args.svg, render_svg(env, backbones, trajectories=tr, goals=goals))
    if report.aborted:
        status = report.legs[-1].status
        code = EXIT_TIMEOUT if status.startswith("timeout") else EXIT_INFEASIBLE
        raise CliError(f"mission aborted at leg {report.legs[-1].index}: {status}", code)
    return EXIT_OK


def cmd_bench(args) -> int:
    env = _env(args.env)
    radius = args.radius[0] if len(args.radius) == 1 else None
    if radius is None:
        raise CliError("bench takes a single --radius", EXIT_USAGE)
    try:
        bench = bench_team_sizes(
            env, args.sizes, n_goals=args.goals, trials=args.trials, params=_params(args), seed=args.seed,
            comm_radius=radius, safety_gap=args.gap, robot_radius=args.robot_radius, v_max=args.vmax, dt=args.dt,
        )
    except RuntimeError as exc:
        raise CliError(str(exc), EXIT_INFEASIBLE)
    out = Path(args.out)
    _write(str(out / "bench.csv"), bench.to_csv(wall_clock=not args.no_wall_clock))
    sizes = np.array(bench.sizes(), dtype=float)
    plan_t = np.array([bench.planning_time(n) for n in bench.sizes()])
    _write(str(out / "planning_time.svg"), line_plot_svg(
        {"planning time": (sizes, plan_t[:, 0], plan_t[:, 1])}, "team size (relays)", "mean planning time [s]",
    ))
    ours = np.array([bench.mission_times(n)[0] for n in bench.sizes()])
    base = np.array([bench.mission_times(n)[1] for n in bench.sizes()])
    _write(str(out / "mission_time.svg"), line_plot_svg(
        {
            "simultaneous": (sizes, ours.mean(axis=1), ours.std(axis=1)),
            "over the backbone": (sizes, base.mean(axis=1), base.std(axis=1)),
        },
        "team size (relays)", "mission time [s]",
    ))
    sys.stdout.write(bench.summary())
    return EXIT_OK


def cmd_render(args) -> int:
    env = _env(args.env)
    backbones = [_backbone(p) for p in args.backbone or []]
    tr = None
    if args.trajectories:
        try:
            tr = RobotTrajectories.from_csv(_read(args.trajectories), env.base_station)
        except ValueError as exc:
            raise CliError(f"{args.trajectories}: {exc}", EXIT_IO)
    goals = None
    if args.goals:
        try:
            goals = read_goals(_read(args.goals))
        except ValueError as exc:
            raise CliError(f"{args.goals}: {exc}", EXIT_IO)
    graph = None
    if args.graph:
        free = workspace(env, TeamSpec(0, 5.0, 0.5, args.robot_radius))
        graph = build_visibility_graph(free, [free.base_station])
    _write(args.out, render_svg(env, backbones, tr, graph, goals))
    return EXIT_OK


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="backbone-arm", description="Plan connectivity-preserving relay backbones.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def team_flags(sp, robots=True):
        if robots:
            sp.add_argument("--robots", type=int, required=True, help="number of relay robots N")
        sp.add_argument("--radius", type=_floats, default=[5.0], help="communication radius, or N+1 comma-separated radii")
        sp.add_argument("--gap", type=float, default=0.5, help="safety gap subtracted from each radius")
        sp.add_argument("--robot-radius", type=float, default=0.0, help="obstacle dilation radius")

    def planner_flags(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--budget", type=float, default=20.0, help="seconds per attempt batch")
        sp.add_argument("--attempts", type=int, default=200, help="attempts per batch")
        sp.add_argument("--max-iters", type=int, default=3000, help="tree extensions per attempt")
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--restarts", type=int, default=PlannerParams.max_restarts, help="extra batches when a batch finds nothing")
        sp.add_argument("--no-retract", action="store_true", help="skip the fold-and-unfold candidate path")
        sp.add_argument("--vmax", type=float, default=0.5, help="robot speed [m/s]")
        sp.add_argument("--dt", type=float, default=0.1, help="trajectory sample period [s]")

    sp = sub.add_parser("deploy", help="place relays for one leader goal")
    sp.add_argument("--env", required=True)
    sp.add_argument("--goal", type=_point, required=True)
    team_flags(sp)
    sp.add_argument("--out", help="backbone file (default stdout)")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_deploy)

    sp = sub.add_parser("plan", help="plan between two backbone files")
    sp.add_argument("--env", required=True)
    sp.add_argument("--from", required=True, metavar="BACKBONE")
    sp.add_argument("--to", required=True, metavar="BACKBONE")
    team_flags(sp, robots=False)
    planner_flags(sp)
    sp.add_argument("--out", help="arm path file (default stdout)")
    sp.add_argument("--traj", help="robot trajectories CSV")
    sp.add_argument("--svg")
    sp.set_defaults(func=cmd_plan)

    sp = sub.add_parser("mission", help="serve a sequence of leader goals")
    sp.add_argument("--env", required=True)
    sp.add_argument("--goals", required=True, help="file with one x,y goal per line")
    team_flags(sp)
    planner_flags(sp)
    sp.add_argument("--out", help="report CSV (default stdout)")
    sp.add_argument("--traj", help="trajectories CSV")
    sp.add_argument("--svg")
    sp.add_argument("--no-wall-clock", action="store_true", help="omit planning time columns")
    sp.set_defaults(func=cmd_mission)

    sp = sub.add_parser("bench", help="planning and mission time against team size")
    sp.add_argument("--env", required=True)
    sp.add_argument("--sizes", type=_ints, default=[2, 4, 6, 8, 10])
    sp.add_argument("--trials", type=int, default=4)
    sp.add_argument("--goals", type=int, default=10, help="goals per mission")
    team_flags(sp, robots=False)
    planner_flags(sp)
    sp.add_argument("--out", default="bench_out", help="output directory")
    sp.add_argument("--no-wall-clock", action="store_true")
    sp.set_defaults(func=cmd_bench)

    sp = sub.add_parser("render", help="draw a map with overlays as SVG")
    sp.add_argument("--env", required=True)
    sp.add_argument("--backbone", action="append", help="backbone file (repeatable)")
    sp.add_argument("--trajectories", help="trajectories CSV")
    sp.add_argument("--goals", help="goals file")
    sp.add_argument("--graph", action="store_true", help="draw the visibility graph")
    sp.add_argument("--robot-radius", type=float, default=0.0)
    sp.add_argument("--out", help="SVG file (default stdout)")
    sp.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"backbone-arm {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
