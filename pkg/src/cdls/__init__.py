"""Constrained damped-least-squares redundancy resolution via scaled ADMM,
with screw-axis kinematics for a 6-DoF arm carrying a 1-DoF continuum tool."""

from .solver import (
    AdmmReport,
    AdmmSettings,
    AdmmState,
    AdmmStatus,
    ConvergenceDiagnostics,
    DlmProblem,
    admm_step,
    closed_form_dlm,
    compute_residuals,
    compute_tolerances,
    convergence_diagnostics,
    optimal_rho,
    solve,
)
from .oracle import (
    InfeasibleProblemError,
    OracleCapacityError,
    OracleSolution,
    oracle_solve,
    verify_kkt,
)
from .kinematics import (
    CdmModel,
    ConstantCurvatureCdm,
    Pose,
    PolynomialCdm,
    RobotModel,
    Twist,
    adjoint,
    cdm_tip_jacobian,
    cdm_tip_position,
    closest_point_on_tool_axis,
    combined_jacobian,
    exp_twist,
    forward_kinematics,
    point_jacobian,
    spatial_jacobian,
)
from .constraints import (
    JointLimitConfig,
    LinearConstraints,
    RcmConfig,
    build_joint_limits,
    build_rcm,
    polygon_normals,
    stack,
)

__version__ = "0.1.0"
