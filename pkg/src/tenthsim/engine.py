"""Deterministic multi-agent simulation engine.

One engine owns the full episode state: vehicle states, per-agent RNG
streams, lap bookkeeping, and termination flags. reset()/step() follow the
episodic environment convention. Agents are integrated simultaneously (each
reads the others' previous-tick poses), collided agents freeze in place, and
the whole state round-trips through a versioned binary snapshot bit-exactly.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import collision as col
from .collision import FootprintRect, StartLine
from .dynamics import params_array, rk4_step
from .errors import (ActionCountMismatchError, CorruptSnapshotError,
                     SteppedAfterDoneError, StartPoseCollisionError,
                     VersionMismatchError)
from .geometry import Pose2D
from .gridmap import OccupancyGridMap
from .sensing import GpsConfig, LaserScan, ScanSpec, gps_measure, simulate_scan
from .vehicle import (SBETA, SDELTA, STHETA, STHETADOT, SV, SX, SY,
                      ControlInput, VehicleParams, VehicleState)

SNAPSHOT_MAGIC = b"TSNP"
SNAPSHOT_VERSION = 1

COLLISION_NONE = -1
COLLISION_WALL = -2

_POOL = None
_POOL_DISABLED = False


def _scan_pool():
    """Shared two-worker pool for overlapping per-agent raycasts.

    Opt-in: only active when TENTHSIM_THREADS requests 2+ threads. The
    kernels release the GIL so two agents' scans genuinely overlap, but on
    small/contended machines the dispatch overhead outweighs the gain, so
    the default stays serial.
    """
    global _POOL, _POOL_DISABLED
    if _POOL_DISABLED:
        return None
    if _POOL is None:
        import os
        cap = os.environ.get("TENTHSIM_THREADS")
        if cap is None or int(cap) < 2:
            _POOL_DISABLED = True
            return None
        from concurrent.futures import ThreadPoolExecutor
        _POOL = ThreadPoolExecutor(max_workers=2,
                                   thread_name_prefix="tenthsim-scan")
    return _POOL


@dataclass(frozen=True)
class AgentSetup:
    params: VehicleParams
    scan_spec: ScanSpec
    start_pose: Pose2D
    gps: GpsConfig = field(default_factory=GpsConfig)


@dataclass(frozen=True)
class SimConfig:
    grid: OccupancyGridMap
    agents: tuple
    physics_dt: float = 0.01
    control_every: int = 1
    seed: int = 0
    start_line: StartLine | None = None
    lap_target: int | None = None
    timeout: float | None = None

    def __post_init__(self):
        if self.physics_dt <= 0:
            raise ValueError("physics_dt must be positive")
        if self.control_every < 1:
            raise ValueError("control_every must be >= 1")
        if len(self.agents) < 1:
            raise ValueError("need at least one agent")
        object.__setattr__(self, "agents", tuple(self.agents))


@dataclass(frozen=True)
class AgentObs:
    scan: LaserScan
    pose: Pose2D
    gps: Pose2D
    v: float
    theta_dot: float
    delta: float
    beta: float
    collision: bool
    collision_with: str
    lap_count: int
    lap_times: tuple


@dataclass(frozen=True)
class StepResult:
    agents: tuple
    sim_time: float
    done: bool


@dataclass(frozen=True)
class RewardSpec:
    """Per-step reward: elapsed-time penalty plus configurable event bonuses."""

    time_penalty: float = 1.0
    collision_penalty: float = 0.0
    lap_bonus: float = 0.0
    terminal_bonus: float = 0.0

    def step_reward(self, dt: float, newly_collided: bool, laps_completed: int,
                    done: bool) -> float:
        r = -dt * self.time_penalty
        if newly_collided:
            r -= self.collision_penalty
        r += laps_completed * self.lap_bonus
        if done:
            r += self.terminal_bonus
        return r


class Engine:
    """Single-writer simulation instance; see module docstring."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.grid = config.grid
        self.n_agents = len(config.agents)
        self._params_arrays = [params_array(a.params) for a in config.agents]
        self._map_hash = self.grid.occupancy_hash
        self._states = np.zeros((self.n_agents, 7))
        self._collided = np.zeros(self.n_agents, dtype=bool)
        self._collision_with = np.full(self.n_agents, COLLISION_NONE, dtype=np.int32)
        self._lap_count = np.zeros(self.n_agents, dtype=np.int32)
        self._lap_pending = np.zeros(self.n_agents, dtype=np.int32)
        self._crossing_times: list[list[float]] = [[] for _ in range(self.n_agents)]
        self._rngs: list[np.random.Generator] = []
        self._sim_time = 0.0
        self._steps = 0
        self._done = False
        self._was_reset = False

    # ------------------------------------------------------------------
    # episode control

    def reset(self) -> StepResult:
        """Place agents at their start poses and return initial observations."""
        cfg = self.config
        self._states[:] = 0.0
        for i, agent in enumerate(cfg.agents):
            self._states[i, SX] = agent.start_pose.x
            self._states[i, SY] = agent.start_pose.y
            self._states[i, STHETA] = agent.start_pose.theta
        self._collided[:] = False
        self._collision_with[:] = COLLISION_NONE
        self._lap_count[:] = 0
        self._lap_pending[:] = 0
        self._crossing_times = [[] for _ in range(self.n_agents)]
        self._sim_time = 0.0
        self._steps = 0
        self._done = False

        for i in range(self.n_agents):
            if col.check_map_collision(self.grid, self._footprint(i)):
                raise StartPoseCollisionError(f"agent {i} start pose overlaps a wall")
        for i in range(self.n_agents):
            for j in range(i + 1, self.n_agents):
                if col.check_obb_collision(self._footprint(i), self._footprint(j)):
                    raise StartPoseCollisionError(
                        f"agents {i} and {j} overlap at their start poses")

        seq = np.random.SeedSequence(cfg.seed)
        self._rngs = [np.random.Generator(np.random.PCG64(child))
                      for child in seq.spawn(self.n_agents)]
        self._was_reset = True
        return self._observe()

    def step(self, actions) -> StepResult:
        """Advance `control_every` physics substeps under the given actions."""
        if self._done:
            raise SteppedAfterDoneError("episode is done; call reset()")
        if not self._was_reset:
            raise SteppedAfterDoneError("engine must be reset() before stepping")
        if len(actions) != self.n_agents:
            raise ActionCountMismatchError(
                f"got {len(actions)} actions for {self.n_agents} agents")

        cfg = self.config
        clamped = []
        for i, action in enumerate(actions):
            if isinstance(action, ControlInput):
                sr, a = action.steer_rate, action.accel
            else:
                sr, a = float(action[0]), float(action[1])
            p = cfg.agents[i].params
            clamped.append(np.array([
                min(max(sr, -p.steer_rate_max), p.steer_rate_max),
                min(max(a, -p.a_max), p.a_max),
            ]))

        for _ in range(cfg.control_every):
            prev_xy = self._states[:, (SX, SY)].copy()
            for i in range(self.n_agents):
                if self._collided[i]:
                    continue
                self._states[i] = rk4_step(self._states[i], clamped[i],
                                           self._params_arrays[i], cfg.physics_dt)
            self._sim_time += cfg.physics_dt

            # collision detection against walls, then pairwise
            for i in range(self.n_agents):
                if self._collided[i]:
                    continue
                if col.check_map_collision(self.grid, self._footprint(i)):
                    self._mark_collided(i, COLLISION_WALL)
            for i in range(self.n_agents):
                for j in range(i + 1, self.n_agents):
                    if self._collision_with[i] == j and self._collision_with[j] == i:
                        continue
                    if col.check_obb_collision(self._footprint(i), self._footprint(j)):
                        if not self._collided[i]:
                            self._mark_collided(i, j)
                        if not self._collided[j]:
                            self._mark_collided(j, i)

            if cfg.start_line is not None:
                for i in range(self.n_agents):
                    crossing = col.detect_line_crossing(
                        prev_xy[i], self._states[i, (SX, SY)], cfg.start_line)
                    if crossing == col.FORWARD:
                        if self._lap_pending[i] < 0:
                            self._lap_pending[i] += 1
                        else:
                            self._lap_count[i] += 1
                            self._crossing_times[i].append(self._sim_time)
                    elif crossing == col.BACKWARD:
                        self._lap_pending[i] -= 1

        self._steps += 1
        self._check_done()
        return self._observe()

    # ------------------------------------------------------------------
    # observation

    def _observe(self) -> StepResult:
        poses = [self._pose(i) for i in range(self.n_agents)]
        footprints = [self._footprint(i).as_tuple() for i in range(self.n_agents)]
        scan_args = []
        for i, setup in enumerate(self.config.agents):
            others = [footprints[j] for j in range(self.n_agents) if j != i]
            scan_args.append((self.grid, poses[i], setup.scan_spec, others))

        pool = _scan_pool()
        if pool is not None and self.n_agents >= 2:
            # overlap the nogil raycast kernels; noise is drawn afterwards in
            # agent order so the rng streams stay schedule-independent
            futures = [pool.submit(simulate_scan, *args, None, self._sim_time)
                       for args in scan_args]
            raw_scans = [f.result() for f in futures]
        else:
            raw_scans = [simulate_scan(*args, None, self._sim_time)
                         for args in scan_args]

        agents = []
        for i, setup in enumerate(self.config.agents):
            scan = raw_scans[i]
            spec = setup.scan_spec
            if spec.noise_std > 0.0:
                noisy = scan.ranges + self._rngs[i].normal(0.0, spec.noise_std,
                                                           spec.num_beams)
                scan = LaserScan(ranges=np.clip(noisy, spec.range_min,
                                                spec.range_max),
                                 fov=scan.fov, timestamp=scan.timestamp)
            gps = gps_measure(poses[i], setup.gps, self._rngs[i])
            agents.append(AgentObs(
                scan=scan,
                pose=poses[i],
                gps=gps,
                v=float(self._states[i, SV]),
                theta_dot=float(self._states[i, STHETADOT]),
                delta=float(self._states[i, SDELTA]),
                beta=float(self._states[i, SBETA]),
                collision=bool(self._collided[i]),
                collision_with=self._collision_with_str(i),
                lap_count=int(self._lap_count[i]),
                lap_times=self.lap_times(i),
            ))
        return StepResult(agents=tuple(agents), sim_time=self._sim_time,
                          done=self._done)

    def lap_times(self, i: int) -> tuple:
        """Durations of completed laps (differences of forward-crossing times)."""
        times = self._crossing_times[i]
        out = []
        prev = 0.0
        for t in times:
            out.append(t - prev)
            prev = t
        return tuple(out)

    def _pose(self, i: int) -> Pose2D:
        return Pose2D(self._states[i, SX], self._states[i, SY], self._states[i, STHETA])

    def _footprint(self, i: int) -> FootprintRect:
        params = self.config.agents[i].params
        return FootprintRect(self._states[i, SX], self._states[i, SY],
                             self._states[i, STHETA], params.length, params.width)

    def _collision_with_str(self, i: int) -> str:
        code = int(self._collision_with[i])
        if code == COLLISION_NONE:
            return "NONE"
        if code == COLLISION_WALL:
            return "WALL"
        return f"AGENT:{code}"

    def _mark_collided(self, i: int, code: int) -> None:
        self._collided[i] = True
        self._collision_with[i] = code
        self._states[i, SV] = 0.0

    def _check_done(self) -> None:
        cfg = self.config
        if bool(self._collided.all()):
            self._done = True
        if cfg.lap_target is not None and int(self._lap_count.max()) >= cfg.lap_target:
            self._done = True
        if cfg.timeout is not None and self._sim_time > cfg.timeout:
            self._done = True

    # ------------------------------------------------------------------
    # introspection used by the harness

    @property
    def sim_time(self) -> float:
        return self._sim_time

    @property
    def done(self) -> bool:
        return self._done

    def state(self, i: int) -> VehicleState:
        return VehicleState.from_array(self._states[i])

    def collided(self, i: int) -> bool:
        return bool(self._collided[i])

    def lap_count(self, i: int) -> int:
        return int(self._lap_count[i])

    # ------------------------------------------------------------------
    # serialization

    def save_state(self) -> bytes:
        """Byte-exact snapshot: header, fixed-width LE records, CRC32."""
        parts = [struct.pack("<4sH32sH", SNAPSHOT_MAGIC, SNAPSHOT_VERSION,
                             self._map_hash, self.n_agents)]
        parts.append(struct.pack("<dQB", self._sim_time, self._steps,
                                 int(self._done)))
        for i in range(self.n_agents):
            parts.append(struct.pack("<7d", *self._states[i]))
            parts.append(struct.pack("<Biii", int(self._collided[i]),
                                     int(self._collision_with[i]),
                                     int(self._lap_count[i]),
                                     int(self._lap_pending[i])))
            times = self._crossing_times[i]
            parts.append(struct.pack("<I", len(times)))
            if times:
                parts.append(struct.pack(f"<{len(times)}d", *times))
            st = self._rngs[i].bit_generator.state
            parts.append(st["state"]["state"].to_bytes(16, "little"))
            parts.append(st["state"]["inc"].to_bytes(16, "little"))
            parts.append(struct.pack("<BI", int(st["has_uint32"]),
                                     int(st["uinteger"])))
        payload = b"".join(parts)
        return payload + struct.pack("<I", zlib.crc32(payload))

    def load_state(self, blob: bytes) -> "Engine":
        """Restore a snapshot taken from an engine with the same config."""
        if len(blob) < 4 + 2 + 32 + 2 + 17 + 4:
            raise CorruptSnapshotError(f"snapshot too short ({len(blob)} bytes)")
        payload, crc_bytes = blob[:-4], blob[-4:]
        (expected_crc,) = struct.unpack("<I", crc_bytes)
        if zlib.crc32(payload) != expected_crc:
            raise CorruptSnapshotError("checksum mismatch")
        off = 0
        magic, version, map_hash, n_agents = struct.unpack_from("<4sH32sH", payload, off)
        off += struct.calcsize("<4sH32sH")
        if magic != SNAPSHOT_MAGIC:
            raise VersionMismatchError(f"bad magic {magic!r}")
        if version != SNAPSHOT_VERSION:
            raise VersionMismatchError(f"snapshot version {version}, "
                                       f"engine expects {SNAPSHOT_VERSION}")
        if map_hash != self._map_hash:
            raise VersionMismatchError("snapshot was taken on a different map")
        if n_agents != self.n_agents:
            raise VersionMismatchError(f"snapshot has {n_agents} agents, "
                                       f"engine has {self.n_agents}")
        try:
            sim_time, steps, done = struct.unpack_from("<dQB", payload, off)
            off += struct.calcsize("<dQB")
            states = np.zeros((self.n_agents, 7))
            collided = np.zeros(self.n_agents, dtype=bool)
            coll_with = np.full(self.n_agents, COLLISION_NONE, dtype=np.int32)
            laps = np.zeros(self.n_agents, dtype=np.int32)
            pending = np.zeros(self.n_agents, dtype=np.int32)
            crossings: list[list[float]] = []
            rng_states = []
            for i in range(self.n_agents):
                states[i] = struct.unpack_from("<7d", payload, off)
                off += 56
                c, cw, lc, pd = struct.unpack_from("<Biii", payload, off)
                off += struct.calcsize("<Biii")
                collided[i] = bool(c)
                coll_with[i] = cw
                laps[i] = lc
                pending[i] = pd
                (n_cross,) = struct.unpack_from("<I", payload, off)
                off += 4
                times = list(struct.unpack_from(f"<{n_cross}d", payload, off))
                off += 8 * n_cross
                state_int = int.from_bytes(payload[off:off + 16], "little")
                inc_int = int.from_bytes(payload[off + 16:off + 32], "little")
                off += 32
                has32, uint = struct.unpack_from("<BI", payload, off)
                off += struct.calcsize("<BI")
                crossings.append(times)
                rng_states.append({
                    "bit_generator": "PCG64",
                    "state": {"state": state_int, "inc": inc_int},
                    "has_uint32": int(has32),
                    "uinteger": int(uint),
                })
        except struct.error as exc:
            raise CorruptSnapshotError(f"snapshot truncated: {exc}") from exc
        if off != len(payload):
            raise CorruptSnapshotError(
                f"snapshot has {len(payload) - off} trailing bytes")

        self._sim_time = sim_time
        self._steps = steps
        self._done = bool(done)
        self._states = states
        self._collided = collided
        self._collision_with = coll_with
        self._lap_count = laps
        self._lap_pending = pending
        self._crossing_times = crossings
        self._rngs = []
        for st in rng_states:
            gen = np.random.Generator(np.random.PCG64())
            gen.bit_generator.state = st
            self._rngs.append(gen)
        self._was_reset = True
        return self
