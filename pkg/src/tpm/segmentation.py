"""Time-gap trip segmentation, automatic gap-threshold selection, noise filtering."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geodesy import EARTH, GeoConstants, haversine_np, path_length
from .ingest import DeviceLog, GpsRecord

# Candidate gap thresholds, seconds: 1, 5, 10, 15, 20, 30, 45, 60, 90, 120 minutes.
# A 2-minute candidate would sit exactly on the typical urban sampling scale and
# degenerate the elbow onto a grid point, so the ladder jumps from 1 to 5.
DEFAULT_THETA_GRID = (60.0, 300.0, 600.0, 900.0, 1200.0,
                      1800.0, 2700.0, 3600.0, 5400.0, 7200.0)


@dataclass
class Trajectory:
    """A time-ordered run of points for one device, bounded by gaps > theta."""

    device_id: str
    trajectory_id: str
    points: list[GpsRecord]
    length: float  # meters, sum of consecutive haversine distances


@dataclass
class SegmentationConfig:
    """Gap threshold, its candidate grid, and the noise-filter thresholds."""

    theta: float = 900.0                 # seconds
    theta_grid: tuple = DEFAULT_THETA_GRID
    min_points: int = 3
    min_length: float = 300.0            # meters
    max_jump: float = 5000.0             # meters

    def __post_init__(self):
        if self.theta <= 0:
            raise ValueError("theta must be positive")
        grid = tuple(float(g) for g in self.theta_grid)
        if len(grid) < 3 or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("theta_grid must be strictly increasing with >= 3 entries")
        self.theta_grid = grid
        if self.min_points < 2:
            raise ValueError("min_points must be >= 2")
        if self.min_length < 0:
            raise ValueError("min_length must be >= 0")
        if self.max_jump <= 0:
            raise ValueError("max_jump must be positive")


def split_into_trajectories(log: DeviceLog, theta: float,
                            c: GeoConstants = EARTH) -> list[Trajectory]:
    """Split a sorted device log at every time gap strictly greater than theta.

    A gap equal to theta stays inside the same trajectory; the split
    happens only strictly above. The returned trajectories partition the
    log's records in order, each with its great-circle length precomputed.
    Trajectory ids are ``{device_id}:{n}`` with n counting from 0.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    records = log.records
    if not records:
        return []
    times = np.array([r.timestamp for r in records])
    lats = np.array([r.coord.lat for r in records])
    lngs = np.array([r.coord.lng for r in records])
    # boundary after index i whenever times[i+1] - times[i] > theta
    breaks = np.flatnonzero(np.diff(times) > theta) + 1
    starts = np.concatenate(([0], breaks))
    stops = np.concatenate((breaks, [len(records)]))

    step = haversine_np(lats[:-1], lngs[:-1], lats[1:], lngs[1:], c) if len(records) > 1 else np.zeros(0)
    cum = np.concatenate(([0.0], np.cumsum(step)))

    trajectories = []
    for n, (lo, hi) in enumerate(zip(starts, stops)):
        length = float(cum[hi - 1] - cum[lo])
        trajectories.append(Trajectory(log.device_id, f"{log.device_id}:{n}",
                                       records[lo:hi], length))
    return trajectories


def trajectory_count(logs: list[DeviceLog], theta: float) -> int:
    """Total number of trajectories over all logs at gap threshold theta.

    Counts splits before any noise filtering: per log this is
    1 + #(gaps > theta), identical to len(split_into_trajectories).
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    total = 0
    for log in logs:
        if not log.records:
            continue
        times = np.array([r.timestamp for r in log.records])
        total += 1 + int(np.count_nonzero(np.diff(times) > theta))
    return total


def select_theta(logs: list[DeviceLog], grid=DEFAULT_THETA_GRID) -> float:
    """Pick the gap threshold at the elbow of the trajectory-count curve.

    Evaluates f(theta) = trajectory_count over the grid, estimates the
    second derivative at each interior grid point with the three-point
    divided-difference formula (exact central second difference on a
    uniform grid), and returns the interior theta with the largest |f''|.
    Ties break toward the smallest theta.
    """
    grid = [float(g) for g in grid]
    if len(grid) < 3:
        raise ValueError("theta grid needs at least 3 values")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("theta grid must be strictly increasing")

    f = [float(trajectory_count(logs, g)) for g in grid]
    best_theta = grid[1]
    best_curvature = -1.0
    for i in range(1, len(grid) - 1):
        left = (f[i] - f[i - 1]) / (grid[i] - grid[i - 1])
        right = (f[i + 1] - f[i]) / (grid[i + 1] - grid[i])
        curvature = abs(2.0 * (right - left) / (grid[i + 1] - grid[i - 1]))
        if curvature > best_curvature:
            best_curvature = curvature
            best_theta = grid[i]
    return best_theta


def compute_length(traj: Trajectory, c: GeoConstants = EARTH) -> float:
    """Great-circle length of a trajectory: sum over consecutive point pairs."""
    if not traj.points:
        raise ValueError("trajectory has no points")
    lats = [p.coord.lat for p in traj.points]
    lngs = [p.coord.lng for p in traj.points]
    return path_length(lats, lngs, c)


def _max_adjacent_jump(traj: Trajectory, c: GeoConstants) -> float:
    if len(traj.points) < 2:
        return 0.0
    lats = np.array([p.coord.lat for p in traj.points])
    lngs = np.array([p.coord.lng for p in traj.points])
    return float(np.max(haversine_np(lats[:-1], lngs[:-1], lats[1:], lngs[1:], c)))


def filter_noise(trajs: list[Trajectory], cfg: SegmentationConfig,
                 c: GeoConstants = EARTH) -> list[Trajectory]:
    """Drop noise trajectories; survivors are returned unchanged, in order.

    A trajectory is removed when any of the following holds:
      (a) it has fewer than cfg.min_points points,
      (b) some adjacent pair of points is farther apart than cfg.max_jump,
      (c) its total length is below cfg.min_length.
    """
    kept = []
    for traj in trajs:
        if len(traj.points) < cfg.min_points:
            continue
        if _max_adjacent_jump(traj, c) > cfg.max_jump:
            continue
        if traj.length < cfg.min_length:
            continue
        kept.append(traj)
    return kept
