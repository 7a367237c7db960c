"""Neighbour distances along seeded missions.

For every mission leg the connectivity audit gives the distance of each
chain link at every trajectory sample. This script pools them and writes
per-link statistics plus an SVG of the worst link distance over time for
the first mission.
"""
import argparse
from pathlib import Path

import numpy as np

from backbone_arm.deploy import workspace
from backbone_arm.env import TeamSpec
from backbone_arm.maps import load_map
from backbone_arm.mission import Mission, run_mission, sample_goals
from backbone_arm.plan import PlannerParams
from backbone_arm.render import line_plot_svg
from backbone_arm.traj import validate_connectivity


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--map", default="illustrative")
    ap.add_argument("--robots", type=int, default=6)
    ap.add_argument("--missions", type=int, default=10)
    ap.add_argument("--goals", type=int, default=10)
    ap.add_argument("--out", default="out/distances")
    args = ap.parse_args()

    env = load_map(args.map)
    team = TeamSpec(args.robots, 5.0, 0.5)
    free = workspace(env, team)
    dists, first = [], None
    violations = 0
    for seed in range(args.missions):
        goals = sample_goals(env, team, args.goals, seed=seed)
        params = PlannerParams(max_attempts=3, max_iters=800, rng_seed=seed)
        report = run_mission(Mission(env, team, goals, params))
        t0 = 0.0
        for leg in report.completed:
            audit = validate_connectivity(leg.trajectories, free, team)
            violations += audit.violations
            dists.append(audit.distances)
            if seed == 0:
                t = audit.times + t0
                first = (t, audit.distances.max(axis=1)) if first is None else (
                    np.concatenate([first[0], t]), np.concatenate([first[1], audit.distances.max(axis=1)]))
            t0 += leg.execution_time

    d = np.vstack(dists)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["link,mean_m,std_m,max_m"]
    for k in range(d.shape[1]):
        lines.append(f"{k + 1},{d[:, k].mean():.4f},{d[:, k].std():.4f},{d[:, k].max():.6f}")
    (out / "link_distances.csv").write_text("\n".join(lines) + "\n")
    limit = np.full_like(first[0], team.link_lengths.min())
    (out / "max_distance.svg").write_text(line_plot_svg(
        {"max neighbour distance": (first[0], first[1], None), "c - gap": (first[0], limit, None)},
        "time [s]", "distance [m]",
    ))
    print("\n".join(lines))
    print(f"{d.shape[0]} samples, {violations} violations, overall max {d.max():.6f} m -> {out}")


if __name__ == "__main__":
    main()
