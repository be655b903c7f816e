"""Joint planning of static and reconfigurable surface deployments.

The package splits into a ground-truth half and an optimizer half.  The
ground truth: ``channel`` synthesizes or loads the radio environment and
``radio`` scores any concrete plan exactly.  The optimizer: ``subproblem``
builds one convex surrogate instance around a phase iterate, ``conic``
solves it, ``mip`` makes the per-surface mode choice integral, and
``deploy`` drives the whole iteration and reports results.  ``cli`` wraps
a budget sweep behind a JSON config.
"""

from .channel import (
    ChannelSet,
    SceneConfig,
    aggregate_cascade,
    load_channels,
    save_channels,
    synthesize_channels,
)
from .conic import (
    ConicProblem,
    ConicSolution,
    ConicWorkspace,
    solve_conic,
)
from .deploy import (
    DeployConfig,
    SolveReport,
    StartReport,
    allocate_airtime,
    plan_deployment,
    random_phase_iterate,
    sweep_budgets,
)
from .mip import MipNode, solve_mi_conic
from .radio import (
    Allocation,
    PlanScore,
    SurfacePlan,
    UnreachableUserError,
    achievable_rate,
    effective_channel,
    evaluate_plan,
    mrt_precoder,
    snr,
)
from .scenes import desk_scene
from .subproblem import PhaseIterate, QuadData, VariableLayout, build_subproblem, quad_data

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "ChannelSet",
    "ConicProblem",
    "ConicSolution",
    "ConicWorkspace",
    "DeployConfig",
    "MipNode",
    "PhaseIterate",
    "PlanScore",
    "QuadData",
    "SceneConfig",
    "SolveReport",
    "StartReport",
    "SurfacePlan",
    "UnreachableUserError",
    "VariableLayout",
    "achievable_rate",
    "aggregate_cascade",
    "allocate_airtime",
    "build_subproblem",
    "desk_scene",
    "effective_channel",
    "evaluate_plan",
    "load_channels",
    "mrt_precoder",
    "plan_deployment",
    "quad_data",
    "random_phase_iterate",
    "save_channels",
    "snr",
    "solve_conic",
    "solve_mi_conic",
    "sweep_budgets",
    "synthesize_channels",
]
