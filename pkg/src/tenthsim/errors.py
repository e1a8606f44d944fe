"""Exception types raised across the simulator."""


class TenthSimError(Exception):
    """Base class for all simulator errors."""


class MapFormatError(TenthSimError):
    """Map image or metadata could not be parsed."""


class OutOfBoundsError(TenthSimError):
    """World point falls outside the occupancy grid."""


class TrackFormatError(TenthSimError):
    """Centerline CSV is malformed or geometrically degenerate."""


class PointTooFarError(TenthSimError):
    """Query point is too far from the centerline for a Frenet projection."""


class DomainError(TenthSimError):
    """Operation called outside its valid input domain."""


class NonFiniteStateError(TenthSimError):
    """Integration produced NaN or inf (usually a parameter misuse)."""


class SensorOutsideMapError(TenthSimError):
    """LiDAR origin lies outside the map bounds."""


class StartPoseCollisionError(TenthSimError):
    """An initial pose overlaps a wall or another agent."""


class ActionCountMismatchError(TenthSimError):
    """Number of actions does not match number of agents."""


class SteppedAfterDoneError(TenthSimError):
    """step() called on a finished episode."""


class VersionMismatchError(TenthSimError):
    """Snapshot header does not match this engine (version or map hash)."""


class CorruptSnapshotError(TenthSimError):
    """Snapshot bytes are truncated or fail the checksum."""


class NoConvergenceError(TenthSimError):
    """Iterative solver failed to converge (e.g. unstabilizable DARE pair)."""


class EmptyTrajectoryError(TenthSimError):
    """Controller received a trajectory with no points."""


class InfeasibleBoundsError(TenthSimError):
    """QP constraint bounds are contradictory (lower > upper)."""


class ScenarioError(TenthSimError):
    """Scenario file failed validation."""
