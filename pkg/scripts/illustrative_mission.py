"""Four-goal mission on the bundled 40x40 m map.

Writes the leg report, the robot trajectories and an SVG with every
intermediate backbone to ``--out``.
"""
import argparse
from pathlib import Path

from backbone_arm.env import TeamSpec
from backbone_arm.maps import load_map
from backbone_arm.mission import Mission, run_mission, sample_goals
from backbone_arm.plan import PlannerParams
from backbone_arm.render import render_svg
from backbone_arm.traj import RobotTrajectories


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--robots", type=int, default=8)
    ap.add_argument("--goals", type=int, default=4)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--attempts", type=int, default=10)
    ap.add_argument("--out", default="out/illustrative")
    args = ap.parse_args()

    env = load_map("illustrative")
    team = TeamSpec(args.robots, 5.0, 0.5)
    goals = sample_goals(env, team, args.goals, seed=args.seed)
    report = run_mission(Mission(env, team, goals, PlannerParams(max_attempts=args.attempts, rng_seed=args.seed)))

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.csv").write_text(report.to_csv())
    traj_csv = report.trajectories_csv()
    (out / "trajectories.csv").write_text(traj_csv)
    tr = RobotTrajectories.from_csv(traj_csv, env.base_station) if report.completed else None
    backbones = [leg.goal_backbone for leg in report.completed]
    (out / "mission.svg").write_text(render_svg(env, backbones, tr, goals=goals))

    for leg in report.legs:
        print(f"leg {leg.index}: {leg.status}, {leg.used_count} relays, exec {leg.execution_time:.1f} s, "
              f"baseline {leg.baseline_time:.1f} s, max link {leg.max_link:.3f} m")
    print(f"total {report.execution_time:.1f} s vs baseline {report.baseline_time:.1f} s -> {out}")


if __name__ == "__main__":
    main()
