"""Simulator of quantum-jump (spontaneous-decay) dynamics in three-level
systems with a photonic path-encoded detection model."""

from .channels import (
    LEVEL_PAIRS,
    DecayType,
    DensityMatrix,
    InitialState,
    JumpProbabilities,
    KrausSet,
    SubspaceState,
    apply_channel,
    build_kraus,
    closed_form_evolve,
    project_subspace,
    pure_density,
    visibility,
)
from .config import ScenarioConfig, load_config, parse_config
from .estimate import (
    ElementEstimates,
    FringeFitResult,
    PeakFitResult,
    fit_fringe,
    fit_populations,
    reconstruct_elements,
)
from .optics import (
    DetectorFrame,
    DetectorSpec,
    ModeGeometry,
    Profile,
    frame_sequence,
    fringe_intensity,
    fringe_plane_field,
    image_intensity,
    image_plane_field,
    itop,
    itop_aligned,
    read_pgm,
    render_frame,
    write_pgm,
)
from .pipeline import SampleEstimate, simulate_experiment
from .timecourse import (
    DecayRates,
    SweepMode,
    SweepRecord,
    SweepSpec,
    evaluate_point,
    probs_at_progress,
    probs_at_time,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "DecayRates",
    "DecayType",
    "DensityMatrix",
    "DetectorFrame",
    "DetectorSpec",
    "ElementEstimates",
    "FringeFitResult",
    "InitialState",
    "JumpProbabilities",
    "KrausSet",
    "LEVEL_PAIRS",
    "ModeGeometry",
    "PeakFitResult",
    "Profile",
    "SampleEstimate",
    "ScenarioConfig",
    "SubspaceState",
    "SweepMode",
    "SweepRecord",
    "SweepSpec",
    "apply_channel",
    "build_kraus",
    "closed_form_evolve",
    "evaluate_point",
    "fit_fringe",
    "fit_populations",
    "frame_sequence",
    "fringe_intensity",
    "fringe_plane_field",
    "image_intensity",
    "image_plane_field",
    "itop",
    "itop_aligned",
    "load_config",
    "parse_config",
    "probs_at_progress",
    "probs_at_time",
    "project_subspace",
    "pure_density",
    "read_pgm",
    "reconstruct_elements",
    "render_frame",
    "run_sweep",
    "simulate_experiment",
    "visibility",
    "write_pgm",
]
