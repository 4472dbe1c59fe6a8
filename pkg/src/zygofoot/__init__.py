"""Kinematics of zygodactyl bird feet: reachable sets, perching and tendon lock."""

from .finger import (GOLDEN, BudgetError, ControlSet, FingerSpec, junction_positions, phalanx_directions,
                     phalanx_segment)
from .foot import FootSpec, PointCloud3, default_parrot_foot, embed_finger, foot_pose, foot_reachable
from .perch import (BranchSolution, Contact, CylinderBranch, EllipseSection, TangencySolution, grasp_condition,
                    search_grasp, solve_branch, solve_branch_all, solve_branch_indices, solve_tangency,
                    tangency_residual)
from .reach import (AttractorApprox, PointCloud2, attractor_approx, hausdorff_distance, hutchinson_step,
                    reachable_set, reachable_set_bruteforce, successive_gaps)
from .tlm import (CylinderObstacle, Event, GuardPersistenceWarning, HybridState, Mode, Scenario, Sphere,
                  TlmProfile, Trajectory, engaged_lipschitz, guard, simulate, step)

__version__ = "0.1.0"

__all__ = [
    "GOLDEN", "BudgetError", "ControlSet", "FingerSpec", "junction_positions", "phalanx_directions",
    "phalanx_segment", "FootSpec", "PointCloud3", "default_parrot_foot", "embed_finger", "foot_pose",
    "foot_reachable", "BranchSolution", "Contact", "CylinderBranch", "EllipseSection", "TangencySolution",
    "grasp_condition", "search_grasp", "solve_branch", "solve_branch_all", "solve_branch_indices",
    "solve_tangency", "tangency_residual", "AttractorApprox", "PointCloud2", "attractor_approx",
    "hausdorff_distance", "hutchinson_step", "reachable_set", "reachable_set_bruteforce", "successive_gaps",
    "CylinderObstacle", "Event", "GuardPersistenceWarning", "HybridState", "Mode", "Scenario", "Sphere",
    "TlmProfile", "Trajectory", "engaged_lipschitz", "guard", "simulate", "step",
]
