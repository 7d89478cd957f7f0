"""Classify conic programs with Douglas-Rachford fixed-point runs and emit checkable certificates."""

from .affine import AffineInconsistency, AffineProjector, build_projector, project_affine
from .certificates import (
    FarkasRows,
    Hyperplane,
    ImprovingDirection,
    Repair,
    RepairKind,
    Solution,
    displacement_oracle,
    improving_direction,
    repair_feasibility,
    repair_objective,
    separating_hyperplane,
    verify_certificate,
)
from .classifier import (
    Certainty,
    Diagnosis,
    classify,
    params_for,
    solve_primal,
    test_boundedness,
    test_feasibility,
)
from .cones import ConeBlock, ConeSpec, project_cone, project_dual_cone, smat, svec
from .operators import T1, T2, T3, IterationParams, Verdict, run_fixed_point
from .problems import (
    ConicProblem,
    SdpInstance,
    canonical_example,
    generate_weakly_infeasible_sdp,
    messy_transform,
    read_problem,
    write_problem,
)
from .report import write_report

__version__ = "0.1.0"
