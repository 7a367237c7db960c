"""Mission pipeline (deploy -> IK -> plan -> trajectories -> audit per leader
goal) and the team-size benchmark built on it."""
from __future__ import annotations

import io
import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .deploy import BackboneConfig, InfeasibleGoal, deploy_backbone, workspace
from .env import Environment, TeamSpec, random_free_point
from .kinematics import ArmModel, inverse_kinematics
from .plan import PlannerParams, PlanningError, plan
from .traj import RobotTrajectories, baseline_over_backbone, to_robot_trajectories, validate_connectivity

log = logging.getLogger(__name__)

WALL_CLOCK_FIELDS = ("planning_time_s",)


@dataclass
class Mission:
    env: Environment
    team: TeamSpec
    goals: np.ndarray
    params: PlannerParams = PlannerParams()
    v_max: float = 0.5
    dt: float = 0.1

    def __post_init__(self):
        self.goals = np.asarray(self.goals, dtype=float).reshape(-1, 2)


@dataclass
class LegResult:
    index: int
    goal: np.ndarray
    status: str = "ok"
    used_count: int = 0
    planning_time: float = 0.0
    path_cost: float = 0.0
    execution_time: float = 0.0
    baseline_time: float = 0.0
    violations: int = 0
    max_link: float = 0.0
    start_backbone: BackboneConfig | None = None
    goal_backbone: BackboneConfig | None = None
    trajectories: RobotTrajectories | None = field(default=None, repr=False)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class MissionReport:
    legs: list[LegResult]
    n_goals: int

    @property
    def completed(self) -> list[LegResult]:
        return [leg for leg in self.legs if leg.ok]

    @property
    def aborted(self) -> bool:
        return len(self.completed) < self.n_goals

    def _stat(self, name: str) -> tuple[float, float]:
        vals = np.array([getattr(leg, name) for leg in self.completed])
        if len(vals) == 0:
            return float("nan"), float("nan")
        return float(vals.mean()), float(vals.std())

    @property
    def planning_time(self) -> tuple[float, float]:
        return self._stat("planning_time")

    @property
    def execution_time(self) -> float:
        return float(sum(leg.execution_time for leg in self.completed))

    @property
    def baseline_time(self) -> float:
        return float(sum(leg.baseline_time for leg in self.completed))

    @property
    def violations(self) -> int:
        return int(sum(leg.violations for leg in self.completed))

    def to_csv(self, wall_clock: bool = True) -> str:
        cols = [
            "leg", "goal_x", "goal_y", "status", "used_count", "planning_time_s",
            "path_cost_m", "execution_time_s", "baseline_time_s", "violations", "max_link_m",
        ]
        if not wall_clock:
            cols = [c for c in cols if c not in WALL_CLOCK_FIELDS]
        lines = [",".join(cols)]
        for leg in self.legs:
            row = {
                "leg": str(leg.index),
                "goal_x": f"{leg.goal[0]:.6f}",
                "goal_y": f"{leg.goal[1]:.6f}",
                "status": leg.status,
                "used_count": str(leg.used_count),
                "planning_time_s": f"{leg.planning_time:.6f}",
                "path_cost_m": f"{leg.path_cost:.6f}",
                "execution_time_s": f"{leg.execution_time:.6f}",
                "baseline_time_s": f"{leg.baseline_time:.6f}",
                "violations": str(leg.violations),
                "max_link_m": f"{leg.max_link:.6f}",
            }
            lines.append(",".join(row[c] for c in cols))
        return "\n".join(lines) + "\n"

    def trajectories_csv(self) -> str:
        """All completed legs back to back on one time axis."""
        out = []
        t0 = 0.0
        for leg in self.completed:
            tr = leg.trajectories
            if tr is None:
                continue
            text = tr.to_csv(t0=t0, header=not out)
            rows = text.splitlines()
            if out:
                rows = rows[1:]  # first sample repeats the previous leg's last
            out.extend(rows)
            t0 += tr.duration
        return "\n".join(out) + "\n"


def leg_seed(seed: int, leg: int) -> int:
    return int(np.random.SeedSequence([seed, leg]).generate_state(1)[0])


def run_mission(m: Mission, keep_trajectories: bool = True) -> MissionReport:
    """Serve each leader goal in turn, starting with every robot at the base.

    A failing leg (infeasible goal or planner timeout) is recorded and ends
    the mission.
    """
    free = workspace(m.env, m.team)
    model = ArmModel.from_team(free.base_station, m.team)
    cfg = model.vertical()
    backbone = BackboneConfig.parked(free.base_station, m.team.n_relays)
    legs = []
    for i, goal in enumerate(m.goals):
        leg = LegResult(i, goal.copy(), start_backbone=backbone)
        try:
            target = deploy_backbone(m.env, m.team, goal, free=free)
            q = inverse_kinematics(model, target)
            params = replace(m.params, rng_seed=leg_seed(m.params.rng_seed, i))
            t0 = time.perf_counter()
            path = plan(model, cfg, q, free, params)
            leg.planning_time = time.perf_counter() - t0
        except InfeasibleGoal as exc:
            leg.status = f"infeasible: {exc}"
            legs.append(leg)
            break
        except PlanningError as exc:
            leg.status = f"timeout: {exc}"
            legs.append(leg)
            break
        tr = to_robot_trajectories(path, model, m.v_max, m.dt, params.collision_step, params.collision_res)
        audit = validate_connectivity(tr, free, m.team)
        leg.goal_backbone = target
        leg.used_count = target.used_count
        leg.path_cost = path.cost
        leg.execution_time = tr.duration
        leg.baseline_time = baseline_over_backbone(backbone, target, free, m.team, m.v_max)
        leg.violations = audit.violations
        leg.max_link = float(audit.max_distance.max())
        leg.trajectories = tr if keep_trajectories else None
        legs.append(leg)
        log.info(
            "leg %d: %d relays, plan %.2fs, exec %.1fs, baseline %.1fs",
            i, leg.used_count, leg.planning_time, leg.execution_time, leg.baseline_time,
        )
        cfg, backbone = q, target
    return MissionReport(legs, len(m.goals))


# --------------------------------------------------------------- benchmark


def sample_goals(env: Environment, team: TeamSpec, n: int, seed: int, max_tries: int = 10000) -> np.ndarray:
    """Uniform goals over the free space that the team can serve."""
    free = workspace(env, team)
    rng = np.random.default_rng(seed)
    goals = []
    for _ in range(max_tries):
        if len(goals) == n:
            break
        g = random_free_point(free, rng)
        try:
            deploy_backbone(env, team, g, free=free)
        except InfeasibleGoal:
            continue
        goals.append(g)
    if len(goals) < n:
        raise RuntimeError(f"found only {len(goals)} servable goals")
    return np.array(goals)


@dataclass
class BenchCell:
    n_relays: int
    trial: int
    report: MissionReport


@dataclass
class BenchReport:
    cells: list[BenchCell]

    def sizes(self) -> list[int]:
        return sorted({c.n_relays for c in self.cells})

    def for_size(self, n: int) -> list[BenchCell]:
        return [c for c in self.cells if c.n_relays == n]

    def planning_time(self, n: int) -> tuple[float, float]:
        """Mean over trials of the per-trial mean planning time, and the
        standard deviation across trials."""
        vals = np.array([c.report.planning_time[0] for c in self.for_size(n)])
        return float(np.nanmean(vals)), float(np.nanstd(vals))

    def mission_times(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-trial (ours, baseline) total mission execution times."""
        cells = self.for_size(n)
        return (
            np.array([c.report.execution_time for c in cells]),
            np.array([c.report.baseline_time for c in cells]),
        )

    def reduction(self, n: int) -> float:
        """Mean fractional mission-time reduction relative to the baseline."""
        ours, base = self.mission_times(n)
        return float(np.mean(1 - ours / base))

    def legs(self):
        for c in self.cells:
            for leg in c.report.completed:
                yield c, leg

    def to_csv(self, wall_clock: bool = True) -> str:
        cols = ["n_relays", "trial", "legs_ok", "legs_total"]
        if wall_clock:
            cols += ["planning_time_mean_s", "planning_time_std_s"]
        cols += ["execution_time_s", "baseline_time_s", "reduction", "violations"]
        lines = [",".join(cols)]
        for c in self.cells:
            r = c.report
            row = [str(c.n_relays), str(c.trial), str(len(r.completed)), str(r.n_goals)]
            if wall_clock:
                mu, sd = r.planning_time
                row += [f"{mu:.6f}", f"{sd:.6f}"]
            red = 1 - r.execution_time / r.baseline_time if r.baseline_time > 0 else float("nan")
            row += [f"{r.execution_time:.6f}", f"{r.baseline_time:.6f}", f"{red:.6f}", str(r.violations)]
            lines.append(",".join(row))
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        buf = io.StringIO()
        buf.write("n_relays  plan_mean_s  plan_std_s  ours_s  baseline_s  reduction\n")
        for n in self.sizes():
            mu, sd = self.planning_time(n)
            ours, base = self.mission_times(n)
            buf.write(
                f"{n:8d}  {mu:11.3f}  {sd:10.3f}  {ours.mean():6.1f}  {base.mean():10.1f}  {self.reduction(n):9.1%}\n"
            )
        return buf.getvalue()


def bench_team_sizes(
    env: Environment,
    sizes,
    n_goals: int = 10,
    trials: int = 4,
    params: PlannerParams = PlannerParams(),
    seed: int = 0,
    comm_radius: float = 5.0,
    safety_gap: float = 0.5,
    robot_radius: float = 0.0,
    v_max: float = 0.5,
    dt: float = 0.1,
) -> BenchReport:
    """Run the same seeded goal sequence ``trials`` times per team size.

    Goals are drawn once per size (servable by that team) and reused across
    trials; trials differ only in the planner seed.
    """
    cells = []
    for n in sizes:
        team = TeamSpec(n, comm_radius, safety_gap, robot_radius)
        goals = sample_goals(env, team, n_goals, seed=leg_seed(seed, 1000 + n))
        for trial in range(trials):
            p = replace(params, rng_seed=leg_seed(params.rng_seed, 10_000 * (trial + 1) + n))
            report = run_mission(Mission(env, team, goals, p, v_max, dt), keep_trajectories=False)
            cells.append(BenchCell(n, trial, report))
            log.info("size %d trial %d: %d/%d legs", n, trial, len(report.completed), n_goals)
    return BenchReport(cells)


def read_goals(text: str) -> np.ndarray:
    """Goals file: one ``x,y`` pair per line; blank lines and ``#`` comments
    are skipped, and the first line may be a header such as ``x,y``."""
    rows = []
    first = True
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        try:
            if len(parts) != 2:
                raise ValueError
            rows.append([float(parts[0]), float(parts[1])])
        except ValueError as exc:
            if not (first and any(c.isalpha() for c in line)):
                raise ValueError(f"bad goal line: {line!r}") from exc
        first = False
    if not rows:
        raise ValueError("no goals")
    return np.array(rows)
