"""Nonholonomic mechanics with unilateral constraints.

Kinetic-metric reflection law v+ = (I - (1+mu) P) v- for systems whose
admissible velocities form the kernel of a constraint operator, plus a
hybrid integrate/detect/reflect simulator and two built-in rough-ball
scenes with closed-form oracles.
"""

from .dynamics import (
    FlowState,
    IntegratorSettings,
    accel_and_multipliers,
    energy,
    project_velocity,
    step,
)
from .errors import (
    BisectionStall,
    GrazingImpact,
    InadmissiblePreVelocity,
    MuOutOfRange,
    NestingViolated,
    NhcollideError,
    RankDeficient,
    SchemaError,
    SingularGram,
    SingularKKT,
)
from .geometry import (
    ConstraintMatrix,
    ImpactMatrix,
    KernelBasis,
    Metric,
    Projector,
    apply_impact,
    empty_constraint,
    g_projector,
    impact_matrix,
    kernel_basis,
    kinetic_energy,
    projector_from_kernel,
    validate_nesting,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .models import (
    BallParams,
    BallState,
    MechanicalSystem,
    ReducedWallState,
    ball_floor_impact_closed_form,
    ball_wall_impact_closed_form,
    build_ball_floor_scene,
    build_ball_wall_scene,
    contact_angular_momentum,
    generic_system_from_config,
    rolling_velocity_completion,
)
from .simulate import (
    AuditReport,
    ImpactEvent,
    SimulationSettings,
    Trajectory,
    audit,
    detect_crossing,
    refine_crossing,
    simulate,
)

__version__ = "0.1.0"
