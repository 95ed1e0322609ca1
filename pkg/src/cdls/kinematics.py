"""Screw-axis kinematics for the 6-DoF arm and the 1-DoF continuum segment.

The arm is described by six joint twists at the reference configuration plus
the reference end-effector pose; forward kinematics is the product of twist
exponentials.  The continuum segment mounts on the end-effector with its
straight axis along the local +z and bends in the local x-z plane as its
actuation cable is drawn.  Positions are in mm, angles in rad.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

_UNIT_TOL = 1e-12
_ORTHO_TOL = 1e-9


def skew(v) -> np.ndarray:
    """3x3 cross-product matrix of a 3-vector."""
    x, y, z = np.asarray(v, dtype=float).ravel()
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True)
class Twist:
    """Screw axis of a revolute joint: unit rotation axis and a point on it."""

    omega: np.ndarray
    point: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float).ravel()
        q = np.asarray(self.point, dtype=float).ravel()
        if w.shape != (3,) or q.shape != (3,):
            raise ValueError("omega and point must be 3-vectors")
        wn = np.linalg.norm(w)
        if wn > _UNIT_TOL and abs(wn - 1.0) > _UNIT_TOL:
            raise ValueError(f"omega must be unit or zero, got norm {wn}")
        object.__setattr__(self, "omega", w)
        object.__setattr__(self, "point", q)

    @property
    def as_vector(self) -> np.ndarray:
        """Screw coordinates (v, w) with v = -w x q."""
        return np.concatenate([-np.cross(self.omega, self.point), self.omega])


@dataclass(frozen=True)
class Pose:
    """Rigid transform: orthonormal rotation plus translation in mm."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float).ravel()
        if R.shape != (3, 3) or t.shape != (3,):
            raise ValueError("rotation must be 3x3 and translation a 3-vector")
        if np.max(np.abs(R @ R.T - np.eye(3))) > _ORTHO_TOL:
            raise ValueError("rotation is not orthonormal")
        if abs(np.linalg.det(R) - 1.0) > _ORTHO_TOL:
            raise ValueError("rotation must have determinant +1")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    def compose(self, other: "Pose") -> "Pose":
        return Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def apply(self, point) -> np.ndarray:
        return self.rotation @ np.asarray(point, dtype=float).ravel() + self.translation

    def matrix(self) -> np.ndarray:
        g = np.eye(4)
        g[:3, :3] = self.rotation
        g[:3, 3] = self.translation
        return g


@dataclass(frozen=True)
class RobotModel:
    """Six joint twists at the reference configuration plus the home pose."""

    twists: tuple
    home_pose: Pose
    joint_increment_lower: np.ndarray
    joint_increment_upper: np.ndarray

    def __post_init__(self):
        if len(self.twists) != 6:
            raise ValueError(f"expected 6 twists, got {len(self.twists)}")
        lo = np.asarray(self.joint_increment_lower, dtype=float).ravel()
        hi = np.asarray(self.joint_increment_upper, dtype=float).ravel()
        if lo.shape != (6,) or hi.shape != (6,):
            raise ValueError("joint increment bounds must be 6-vectors")
        if np.any(lo > hi):
            raise ValueError("lower increment bounds exceed upper bounds")
        object.__setattr__(self, "twists", tuple(self.twists))
        object.__setattr__(self, "joint_increment_lower", lo)
        object.__setattr__(self, "joint_increment_upper", hi)


def exp_twist(twist: Twist, theta: float) -> Pose:
    """Exponential of a joint twist: rotation by theta about the screw axis."""
    w = twist.omega
    if np.linalg.norm(w) < _UNIT_TOL:
        return Pose.identity()
    K = skew(w)
    R = np.eye(3) + math.sin(theta) * K + (1.0 - math.cos(theta)) * (K @ K)
    v = -np.cross(w, twist.point)
    p = (np.eye(3) - R) @ np.cross(w, v) + np.outer(w, w) @ v * theta
    return Pose(R, p)


def forward_kinematics(model: RobotModel, theta) -> Pose:
    """Product of exponentials over the six joints, applied to the home pose."""
    theta = np.asarray(theta, dtype=float).ravel()
    g = Pose.identity()
    for tw, th in zip(model.twists, theta):
        g = g.compose(exp_twist(tw, th))
    return g.compose(model.home_pose)


def adjoint(pose: Pose) -> np.ndarray:
    """6x6 adjoint transporting screw coordinates (v, w) between frames."""
    ad = np.zeros((6, 6))
    ad[:3, :3] = pose.rotation
    ad[:3, 3:] = skew(pose.translation) @ pose.rotation
    ad[3:, 3:] = pose.rotation
    return ad


def spatial_jacobian(model: RobotModel, theta) -> np.ndarray:
    """Base-frame Jacobian: column i is the i-th twist transported by the
    exponentials of the preceding joints."""
    theta = np.asarray(theta, dtype=float).ravel()
    cols = []
    g = Pose.identity()
    for tw, th in zip(model.twists, theta):
        cols.append(adjoint(g) @ tw.as_vector)
        g = g.compose(exp_twist(tw, th))
    return np.column_stack(cols)


def point_jacobian(model: RobotModel, theta, point) -> np.ndarray:
    """Linear-velocity Jacobian of a material point carried by the arm.

    `point` is the current base-frame position of the point; each column is
    v_i + w_i x point from the spatial Jacobian.
    """
    p = np.asarray(point, dtype=float).ravel()
    Js = spatial_jacobian(model, theta)
    return Js[:3] + np.cross(Js[3:].T, p).T


class CdmModel:
    """Interface of a 1-DoF continuum segment model.

    Subclasses map cable displacement l (mm) to the tip position in the
    segment's base frame (straight axis along +z, bending in the x-z plane),
    and provide d(tip)/dl plus the planar bend-angle rate d(phi)/dl.
    """

    length: float
    cable_range: tuple

    def tip_map(self, l: float) -> np.ndarray:
        raise NotImplementedError

    def tip_derivative(self, l: float) -> np.ndarray:
        raise NotImplementedError

    def bend_rate(self, l: float) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantCurvatureCdm(CdmModel):
    """Planar circular-arc segment with bend angle linear in cable draw."""

    length: float = 35.0
    cable_range: tuple = (0.0, 9.0)
    max_bend: float = math.pi / 2

    def __post_init__(self):
        lo, hi = self.cable_range
        if not (hi > lo):
            raise ValueError("cable_range must be increasing")
        if self.length <= 0:
            raise ValueError("length must be > 0")

    def _phi(self, l: float) -> float:
        lo, hi = self.cable_range
        return self.max_bend * (l - lo) / (hi - lo)

    def bend_rate(self, l: float) -> float:
        lo, hi = self.cable_range
        return self.max_bend / (hi - lo)

    def tip_map(self, l: float) -> np.ndarray:
        phi = self._phi(l)
        L = self.length
        if abs(phi) < 1e-2:
            # series for (1-cos)/phi and sin/phi, stable through phi = 0
            x = L * (phi / 2.0 - phi**3 / 24.0 + phi**5 / 720.0)
            z = L * (1.0 - phi**2 / 6.0 + phi**4 / 120.0)
        else:
            x = L * (1.0 - math.cos(phi)) / phi
            z = L * math.sin(phi) / phi
        return np.array([x, 0.0, z])

    def tip_derivative(self, l: float) -> np.ndarray:
        phi = self._phi(l)
        L = self.length
        if abs(phi) < 1e-2:
            dx = L * (0.5 - phi**2 / 8.0 + phi**4 / 144.0)
            dz = L * (-phi / 3.0 + phi**3 / 30.0)
        else:
            dx = L * (math.sin(phi) * phi - (1.0 - math.cos(phi))) / phi**2
            dz = L * (math.cos(phi) * phi - math.sin(phi)) / phi**2
        return np.array([dx, 0.0, dz]) * self.bend_rate(l)


@dataclass(frozen=True)
class PolynomialCdm(CdmModel):
    """Segment with per-coordinate polynomial tip map loaded from file.

    `coefficients` holds one low-to-high coefficient row per coordinate.
    The derivative is taken by central differences; an optional bend-angle
    polynomial supplies the angular rate (zero when absent, which is fine
    for position-only tasks).
    """

    length: float
    cable_range: tuple
    coefficients: np.ndarray
    bend_coefficients: np.ndarray | None = None

    _FD_STEP = 1e-4

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coefficients, dtype=float))
        if c.shape[0] != 3:
            raise ValueError("coefficients must have one row per coordinate")
        object.__setattr__(self, "coefficients", c)
        if self.bend_coefficients is not None:
            object.__setattr__(
                self, "bend_coefficients",
                np.asarray(self.bend_coefficients, dtype=float).ravel(),
            )

    def tip_map(self, l: float) -> np.ndarray:
        return np.array([np.polynomial.polynomial.polyval(l, c) for c in self.coefficients])

    def tip_derivative(self, l: float) -> np.ndarray:
        h = self._FD_STEP
        return (self.tip_map(l + h) - self.tip_map(l - h)) / (2.0 * h)

    def bend_rate(self, l: float) -> float:
        if self.bend_coefficients is None:
            return 0.0
        h = self._FD_STEP
        lo = np.polynomial.polynomial.polyval(l - h, self.bend_coefficients)
        hi = np.polynomial.polynomial.polyval(l + h, self.bend_coefficients)
        return float(hi - lo) / (2.0 * h)


def cdm_tip_jacobian(model: CdmModel, l: float, cdm_base_pose: Pose) -> np.ndarray:
    """6-vector of tip velocity per unit cable rate, in the arm base frame.

    Position rows rotate the model's tip derivative into the base frame;
    orientation rows carry the planar bend rate about the segment's local
    bend axis (+y of the base pose).
    """
    lo, hi = model.cable_range
    if not (lo <= l <= hi):
        raise ValueError(f"cable length {l} outside range [{lo}, {hi}]")
    R = cdm_base_pose.rotation
    return np.concatenate([
        R @ model.tip_derivative(l),
        R @ np.array([0.0, model.bend_rate(l), 0.0]),
    ])


def cdm_base_pose(robot: RobotModel, theta_arm) -> Pose:
    """The segment's base frame coincides with the arm end-effector frame."""
    return forward_kinematics(robot, theta_arm)


def cdm_tip_position(robot: RobotModel, cdm: CdmModel, theta) -> np.ndarray:
    """Base-frame tip position of the segment for a 7-vector (arm, cable)."""
    theta = np.asarray(theta, dtype=float).ravel()
    base = cdm_base_pose(robot, theta[:6])
    return base.apply(cdm.tip_map(float(theta[6])))


def combined_jacobian(robot: RobotModel, cdm: CdmModel, theta) -> np.ndarray:
    """6x7 Jacobian of the segment tip w.r.t. the six arm joints and the cable.

    Arm columns move the tip as a rigidly carried point (linear rows) and
    rotate it with the end-effector (angular rows); the cable column is the
    segment's own tip Jacobian.
    """
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.shape != (7,):
        raise ValueError(f"theta must have 7 entries, got {theta.shape}")
    theta_arm, l = theta[:6], float(theta[6])
    base = cdm_base_pose(robot, theta_arm)
    tip = base.apply(cdm.tip_map(l))
    Js = spatial_jacobian(robot, theta_arm)
    arm = np.vstack([Js[:3] + np.cross(Js[3:].T, tip).T, Js[3:]])
    return np.column_stack([arm, cdm_tip_jacobian(cdm, l, base)])


def closest_point_on_tool_axis(cdm_base_pose: Pose, rcm_center):
    """Orthogonal projection of a point onto the segment's straight axis.

    Returns (point, axis_parameter) with the parameter measured in mm along
    the axis from the segment base origin.
    """
    c = np.asarray(rcm_center, dtype=float).ravel()
    direction = cdm_base_pose.rotation[:, 2]
    origin = cdm_base_pose.translation
    s = float(direction @ (c - origin))
    return origin + s * direction, s
