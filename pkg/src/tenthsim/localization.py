"""Monte-Carlo localization against a known occupancy grid.

A likelihood field (exact Euclidean distance transform of the blocked cells)
scores subsampled LiDAR endpoints; particles move under an odometry alpha
noise model and are resampled with the low-variance systematic scheme when
the effective sample size drops below N/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .geometry import Pose2D, normalize_angle_array
from .gridmap import OccupancyGridMap
from .sensing import LaserScan, ScanSpec

DEFAULT_ALPHAS = (0.1, 0.1, 0.05, 0.05)


@dataclass(frozen=True)
class LikelihoodField:
    """Distance-to-nearest-obstacle map with the mixture weights baked in."""

    grid: OccupancyGridMap
    sigma_hit: float = 0.1
    z_hit: float = 0.95
    z_rand: float = 0.05
    range_max: float = 30.0

    def __post_init__(self):
        if not self.grid.blocked.any():
            raise DomainError("map has no occupied cells; nothing to localize against")

    @property
    def distances(self) -> np.ndarray:
        return self.grid.distance_field

    def log_likelihood(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Per-point log beam likelihood at world coordinates (vectorized).

        Points off the map score as if at the farthest distance seen on it,
        i.e. nearly pure z_rand.
        """
        grid = self.grid
        c, s = math.cos(grid.origin.theta), math.sin(grid.origin.theta)
        dx = x - grid.origin.x
        dy = y - grid.origin.y
        ix = np.floor((c * dx + s * dy) / grid.resolution).astype(np.int64)
        iy = np.floor((-s * dx + c * dy) / grid.resolution).astype(np.int64)
        inb = (ix >= 0) & (ix < grid.width) & (iy >= 0) & (iy < grid.height)
        d = np.full(x.shape, float(self.distances.max()))
        d[inb] = self.distances[iy[inb], ix[inb]]
        p = (self.z_hit * np.exp(-d * d / (2.0 * self.sigma_hit ** 2))
             + self.z_rand / self.range_max)
        return np.log(p)


def build_likelihood_field(grid: OccupancyGridMap, sigma_hit: float = 0.1,
                           z_hit: float = 0.95, z_rand: float = 0.05,
                           range_max: float = 30.0) -> LikelihoodField:
    """Precompute the measurement model for a map (exact EDT under the hood)."""
    return LikelihoodField(grid=grid, sigma_hit=sigma_hit, z_hit=z_hit,
                           z_rand=z_rand, range_max=range_max)


@dataclass
class ParticleSet:
    """N weighted pose hypotheses plus the filter's RNG stream."""

    poses: np.ndarray          # (N, 3): x, y, theta
    weights: np.ndarray        # (N,), sum to 1
    rng: np.random.Generator
    degenerate: bool = False

    @property
    def n(self) -> int:
        return self.poses.shape[0]


@dataclass(frozen=True)
class GlobalUniform:
    """Prior: uniform over all FREE cells, heading uniform."""


@dataclass(frozen=True)
class GaussianAround:
    """Prior: Gaussian around a pose with (sigma_xy, sigma_theta) spread."""

    pose: Pose2D
    sigma_xy: float = 0.5
    sigma_theta: float = 0.2


def pf_init(grid: OccupancyGridMap, n: int, seed: int,
            prior=GlobalUniform()) -> ParticleSet:
    """Sample an initial particle set restricted to FREE cells."""
    if n < 1:
        raise DomainError(f"need at least one particle, got {n}")
    rng = np.random.Generator(np.random.PCG64(seed))
    free = grid.free_cell_indices()
    if free.shape[0] == 0:
        raise DomainError("map has no free cells")

    poses = np.empty((n, 3))
    if isinstance(prior, GlobalUniform):
        picks = rng.integers(0, free.shape[0], size=n)
        jitter = rng.uniform(0.0, 1.0, size=(n, 2))
        local = (free[picks] + jitter) * grid.resolution
        c, s = math.cos(grid.origin.theta), math.sin(grid.origin.theta)
        poses[:, 0] = grid.origin.x + c * local[:, 0] - s * local[:, 1]
        poses[:, 1] = grid.origin.y + s * local[:, 0] + c * local[:, 1]
        poses[:, 2] = rng.uniform(-math.pi, math.pi, size=n)
    elif isinstance(prior, GaussianAround):
        center = prior.pose
        filled = 0
        while filled < n:
            want = n - filled
            cand = np.empty((want, 3))
            cand[:, 0] = center.x + rng.normal(0.0, 1.0, want) * prior.sigma_xy
            cand[:, 1] = center.y + rng.normal(0.0, 1.0, want) * prior.sigma_xy
            cand[:, 2] = center.theta + rng.normal(0.0, 1.0, want) * prior.sigma_theta
            if prior.sigma_xy == 0.0:
                ok = np.ones(want, dtype=bool)
            else:
                ok = ~_blocked_mask(grid, cand[:, 0], cand[:, 1])
                if not ok.any() and filled == 0:
                    # avoid spinning forever on a hopeless prior
                    raise DomainError("GaussianAround prior has no free support")
            take = cand[ok]
            poses[filled:filled + take.shape[0]] = take
            filled += take.shape[0]
    else:
        raise DomainError(f"unknown prior {prior!r}")
    poses[:, 2] = normalize_angle_array(poses[:, 2])
    weights = np.full(n, 1.0 / n)
    return ParticleSet(poses=poses, weights=weights, rng=rng)


def _blocked_mask(grid: OccupancyGridMap, x, y) -> np.ndarray:
    c, s = math.cos(grid.origin.theta), math.sin(grid.origin.theta)
    dx = x - grid.origin.x
    dy = y - grid.origin.y
    ix = np.floor((c * dx + s * dy) / grid.resolution).astype(np.int64)
    iy = np.floor((-s * dx + c * dy) / grid.resolution).astype(np.int64)
    out = np.ones(np.shape(x), dtype=bool)
    inb = (ix >= 0) & (ix < grid.width) & (iy >= 0) & (iy < grid.height)
    out[inb] = grid.blocked[iy[inb], ix[inb]]
    return out


def pf_update(particles: ParticleSet, odom_delta: Pose2D, scan: LaserScan,
              lfield: LikelihoodField, spec: ScanSpec,
              alphas=DEFAULT_ALPHAS, n_beams: int = 60,
              resample_threshold: float = 0.5):
    """One predict/weight/resample cycle.

    odom_delta is the body-frame motion since the last update. Returns
    (new ParticleSet, estimated Pose2D, 3x3 covariance). If every particle
    scores zero weight the set is flagged degenerate and re-weighted
    uniformly.
    """
    rng = particles.rng
    poses = _motion_update(particles.poses, odom_delta, alphas, rng)

    log_w = _measurement_log_weights(poses, scan, lfield, spec, n_beams)
    log_w = log_w + np.log(particles.weights)
    m = log_w.max()
    degenerate = not np.isfinite(m)
    if degenerate:
        weights = np.full(particles.n, 1.0 / particles.n)
    else:
        w = np.exp(log_w - m)
        total = w.sum()
        if total == 0.0 or not np.isfinite(total):
            degenerate = True
            weights = np.full(particles.n, 1.0 / particles.n)
        else:
            weights = w / total

    ess = 1.0 / float(weights @ weights)
    if ess < resample_threshold * particles.n:
        poses, weights = _systematic_resample(poses, weights, rng)

    new_set = ParticleSet(poses=poses, weights=weights, rng=rng,
                          degenerate=degenerate)
    estimate, cov = pf_estimate(new_set)
    return new_set, estimate, cov


def _motion_update(poses: np.ndarray, odom_delta: Pose2D, alphas,
                   rng: np.random.Generator) -> np.ndarray:
    """Odometry alpha-model: rot1 / trans / rot2 with proportional noise."""
    a1, a2, a3, a4 = alphas
    trans = math.hypot(odom_delta.x, odom_delta.y)
    rot1 = math.atan2(odom_delta.y, odom_delta.x) if trans > 1e-9 else 0.0
    rot2 = odom_delta.theta - rot1
    n = poses.shape[0]

    std_rot1 = a1 * abs(rot1) + a2 * trans
    std_trans = a3 * trans + a4 * (abs(rot1) + abs(rot2))
    std_rot2 = a1 * abs(rot2) + a2 * trans
    noise = rng.normal(0.0, 1.0, (n, 3))
    rot1_s = rot1 + noise[:, 0] * std_rot1
    trans_s = trans + noise[:, 1] * std_trans
    rot2_s = rot2 + noise[:, 2] * std_rot2

    out = np.empty_like(poses)
    heading = poses[:, 2] + rot1_s
    out[:, 0] = poses[:, 0] + trans_s * np.cos(heading)
    out[:, 1] = poses[:, 1] + trans_s * np.sin(heading)
    out[:, 2] = normalize_angle_array(poses[:, 2] + rot1_s + rot2_s)
    return out


def _measurement_log_weights(poses: np.ndarray, scan: LaserScan,
                             lfield: LikelihoodField, spec: ScanSpec,
                             n_beams: int) -> np.ndarray:
    idx = np.linspace(0, scan.num_beams - 1, n_beams).round().astype(int)
    ranges = scan.ranges[idx]
    angles = scan.angles[idx]
    # drop no-return beams; they carry almost no positional information
    keep = ranges < spec.range_max - 1e-6
    if not keep.any():
        return np.zeros(poses.shape[0])
    ranges = ranges[keep]
    angles = angles[keep]

    mount = spec.mount_pose
    heading = poses[:, 2:3]
    cos_h = np.cos(heading)
    sin_h = np.sin(heading)
    sx = poses[:, 0:1] + cos_h * mount.x - sin_h * mount.y
    sy = poses[:, 1:2] + sin_h * mount.x + cos_h * mount.y
    beam_dir = heading + mount.theta + angles[None, :]
    ex = sx + ranges[None, :] * np.cos(beam_dir)
    ey = sy + ranges[None, :] * np.sin(beam_dir)
    return lfield.log_likelihood(ex.ravel(), ey.ravel()).reshape(
        poses.shape[0], -1).sum(axis=1)


def _systematic_resample(poses: np.ndarray, weights: np.ndarray,
                         rng: np.random.Generator):
    """Low-variance resampling with a single uniform offset."""
    n = poses.shape[0]
    positions = (rng.uniform(0.0, 1.0) + np.arange(n)) / n
    cumulative = np.cumsum(weights)
    cumulative[-1] = 1.0
    picks = np.searchsorted(cumulative, positions, side="left")
    return poses[picks].copy(), np.full(n, 1.0 / n)


def pf_estimate(particles: ParticleSet):
    """Weighted mean pose (circular in theta) and 3x3 covariance."""
    w = particles.weights
    x = float(w @ particles.poses[:, 0])
    y = float(w @ particles.poses[:, 1])
    sin_sum = float(w @ np.sin(particles.poses[:, 2]))
    cos_sum = float(w @ np.cos(particles.poses[:, 2]))
    theta = math.atan2(sin_sum, cos_sum)
    est = Pose2D(x, y, theta)

    dx = particles.poses[:, 0] - x
    dy = particles.poses[:, 1] - y
    dth = normalize_angle_array(particles.poses[:, 2] - theta)
    dev = np.column_stack([dx, dy, dth])
    cov = (dev * w[:, None]).T @ dev
    return est, cov
