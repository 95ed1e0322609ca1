"""Linear inequality rows for one control step: pivot-point tube and
per-step joint increment limits, stacked into a single A dt <= b system
over the 7 increments (six arm joints, one cable).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kinematics import Pose, RobotModel, closest_point_on_tool_axis, point_jacobian

# Row provenance labels.
RCM = "rcm"
ARM_UPPER = "arm_upper"
ARM_LOWER = "arm_lower"
CABLE_UPPER = "cable_upper"
CABLE_LOWER = "cable_lower"

N_COLS = 7


@dataclass(frozen=True)
class LinearConstraints:
    """Stacked inequality rows with a provenance label per row."""

    a: np.ndarray
    b: np.ndarray
    row_labels: tuple

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.size == 0:
            a = a.reshape(0, N_COLS)
        a = np.atleast_2d(a)
        b = np.asarray(self.b, dtype=float).ravel()
        labels = tuple(self.row_labels)
        if not (a.shape[0] == b.size == len(labels)):
            raise ValueError(
                f"row counts disagree: a has {a.shape[0]}, b has {b.size}, "
                f"labels has {len(labels)}"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "row_labels", labels)

    @property
    def r(self) -> int:
        return self.a.shape[0]


@dataclass(frozen=True)
class RcmConfig:
    """Pivot-point tube: the tool axis must keep passing within epsilon_rcm
    of `center`, linearized as a regular polygon around `axis`."""

    center: np.ndarray
    axis: np.ndarray
    epsilon_rcm: float
    polygon_sides: int = 16

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).ravel()
        a = np.asarray(self.axis, dtype=float).ravel()
        if c.shape != (3,) or a.shape != (3,):
            raise ValueError("center and axis must be 3-vectors")
        if abs(np.linalg.norm(a) - 1.0) > 1e-9:
            raise ValueError("axis must be a unit vector")
        if self.epsilon_rcm <= 0:
            raise ValueError("epsilon_rcm must be > 0")
        if self.polygon_sides < 3:
            raise ValueError("polygon_sides must be >= 3")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "axis", a)


@dataclass(frozen=True)
class JointLimitConfig:
    """Per-step increment bounds for the arm joints and the cable range."""

    arm_upper: np.ndarray
    arm_lower: np.ndarray
    cable_max: float = 9.0
    current_cable: float = 0.0

    def __post_init__(self):
        hi = np.asarray(self.arm_upper, dtype=float).ravel()
        lo = np.asarray(self.arm_lower, dtype=float).ravel()
        if hi.shape != (6,) or lo.shape != (6,):
            raise ValueError("arm bounds must be 6-vectors")
        if np.any(lo > hi):
            raise ValueError("arm_lower exceeds arm_upper")
        if not (0.0 <= self.current_cable <= self.cable_max):
            raise ValueError(
                f"current_cable {self.current_cable} outside [0, {self.cable_max}]"
            )
        object.__setattr__(self, "arm_upper", hi)
        object.__setattr__(self, "arm_lower", lo)


def polygon_normals(axis, sides: int) -> np.ndarray:
    """Outward unit normals of a regular polygon in the plane normal to axis.

    Returns (sides, 3) rows spaced 2*pi/sides apart, each perpendicular to
    the axis.
    """
    if sides < 3:
        raise ValueError("a polygon needs at least 3 sides")
    a = np.asarray(axis, dtype=float).ravel()
    a = a / np.linalg.norm(a)
    seed = np.eye(3)[int(np.argmin(np.abs(a)))]
    e1 = seed - (seed @ a) * a
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(a, e1)
    angles = 2.0 * np.pi * np.arange(sides) / sides
    return np.outer(np.cos(angles), e1) + np.outer(np.sin(angles), e2)


def build_rcm(config: RcmConfig, robot: RobotModel, theta, pose: Pose) -> LinearConstraints:
    """Tube rows keeping the tool axis near the pivot point.

    With x_c the point of the tool axis closest to the pivot center and
    u = center - x_c, each polygon normal v contributes
    (v . J_cp) dt_arm <= eps + v . u, so the linearized post-step closest
    point stays inside the polygonal tube.  The cable column is zero: cable
    motion does not move the tool axis.
    """
    x_c, _ = closest_point_on_tool_axis(pose, config.center)
    u = config.center - x_c
    j_cp = point_jacobian(robot, theta, x_c)
    normals = polygon_normals(config.axis, config.polygon_sides)
    a = np.zeros((config.polygon_sides, N_COLS))
    a[:, :6] = normals @ j_cp
    b = config.epsilon_rcm + normals @ u
    return LinearConstraints(a, b, (RCM,) * config.polygon_sides)


def build_joint_limits(config: JointLimitConfig) -> LinearConstraints:
    """14 rows bounding arm increments elementwise and the cable increment
    to what the remaining range allows, in block order
    (arm upper, cable upper, arm lower, cable lower)."""
    a = np.zeros((14, N_COLS))
    b = np.zeros(14)
    a[:6, :6] = np.eye(6)
    b[:6] = config.arm_upper
    a[6, 6] = 1.0
    b[6] = config.cable_max - config.current_cable
    a[7:13, :6] = -np.eye(6)
    b[7:13] = -config.arm_lower
    a[13, 6] = -1.0
    b[13] = config.current_cable
    labels = (ARM_UPPER,) * 6 + (CABLE_UPPER,) + (ARM_LOWER,) * 6 + (CABLE_LOWER,)
    return LinearConstraints(a, b, labels)


def stack(parts) -> LinearConstraints:
    """Vertical concatenation preserving order and labels."""
    parts = list(parts)
    if not parts:
        return LinearConstraints(np.zeros((0, N_COLS)), np.zeros(0), ())
    for part in parts:
        if part.a.shape[1] != N_COLS:
            raise ValueError(
                f"all parts must have {N_COLS} columns, got {part.a.shape[1]}"
            )
    labels = tuple(label for part in parts for label in part.row_labels)
    return LinearConstraints(
        np.vstack([part.a for part in parts]),
        np.concatenate([part.b for part in parts]),
        labels,
    )
