"""Synthetic-experiment pipeline: render frames for every sweep sample,
estimate density-matrix elements from them, and aggregate repetitions.

Per sample the camera takes one image-plane frame (all three beams, built
as the Kraus film) and three Fourier-plane frames, one per level pair with
the remaining beam blocked.  The blocked-pair frames carry the pair's share
of the photon budget, so a depleted pair exposes an empty frame.  Each
repetition is estimated independently; the sample estimate is the mean over
repetitions with the sample standard deviation as its uncertainty.

Frame seeds derive from the master seed through
``SeedSequence(master, spawn_key=(sample, plane, repetition))``, so adding
samples or repetitions never perturbs previously generated frames.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import (
    EMPTY_SUBSPACE_TOL,
    LEVEL_PAIRS,
    build_kraus,
    project_subspace,
)
from .config import ScenarioConfig
from .errors import QjsimError
from .estimate import (
    ElementEstimates,
    aggregate_estimates,
    fit_fringe,
    fit_populations,
    reconstruct_elements,
)
from .optics import (
    DetectorSpec,
    frame_sequence,
    fringe_plane_field,
    itop_aligned,
    render_frame,
    write_pgm,
    zero_field,
)
from .timecourse import SweepRecord, run_sweep

PLANES = ("image", "pair12", "pair13", "pair23")


def frame_seed(master_seed: int, sample: int, plane: int, repetition: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(sample, plane, repetition))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SampleEstimate:
    """Aggregated estimate of one sweep sample (or its failure)."""

    record: SweepRecord
    mean: np.ndarray | None
    std: np.ndarray | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def theory_rows(records: list[SweepRecord]) -> list[list[float]]:
    """Sweep records in the theory CSV column order."""
    rows = []
    for rec in records:
        rows.append(
            [*rec.probs.as_tuple(), *rec.populations, *rec.coherence_mods]
        )
    return rows


def estimate_rows(samples: list[SampleEstimate]) -> list[list[float]]:
    """Sample estimates in the estimates CSV column order (nan on failure)."""
    rows = []
    for s in samples:
        row = list(s.record.probs.as_tuple())
        if s.ok:
            for value, err in zip(s.mean, s.std):
                row.extend([value, err])
        else:
            row.extend([float("nan")] * 12)
        rows.append(row)
    return rows


def _detector(config: ScenarioConfig, center, photons, seed) -> DetectorSpec:
    return DetectorSpec.centered(
        rows=config.det_rows,
        cols=config.det_cols,
        pitch=config.det_pitch,
        center=center,
        axis_rotation=config.axis_rotation,
        mean_photons=photons,
        seed=seed,
        noiseless=config.noiseless,
    )


def estimate_repetition(
    config: ScenarioConfig,
    record: SweepRecord,
    kraus,
    sample_idx: int,
    rep: int,
    master_seed: int,
    frame_dir: Path | None,
) -> ElementEstimates:
    """Render and fit one repetition (one image frame, three pair frames)."""
    geom = config.geometry
    image_center = (0.0, 2.0 * geom.d)

    spec = _detector(
        config, image_center, config.mean_photons, frame_seed(master_seed, sample_idx, 0, rep)
    )
    frame = frame_sequence(kraus, config.state, geom, spec, fine_scale=geom.sigma_g)
    if frame_dir is not None:
        write_pgm(frame, frame_dir / f"{PLANES[0]}_rep{rep:03d}.pgm")
    pop_fit = fit_populations(itop_aligned(frame, "cols"), geom)

    fringe_fits = []
    for pair_idx, (i, j) in enumerate(LEVEL_PAIRS):
        weight = record.subspace_weights[pair_idx]
        seed = frame_seed(master_seed, sample_idx, 1 + pair_idx, rep)
        spec = _detector(config, (0.0, 0.0), config.mean_photons * weight, seed)
        if weight <= EMPTY_SUBSPACE_TOL:
            frame = render_frame(zero_field, spec)
        else:
            sub = project_subspace(record.rho, i, j)
            frame = render_frame(
                fringe_plane_field(sub, geom), spec, fine_scale=geom.sigma_g
            )
        if frame_dir is not None:
            write_pgm(frame, frame_dir / f"{PLANES[1 + pair_idx]}_rep{rep:03d}.pgm")
        fringe_fits.append(fit_fringe(itop_aligned(frame, "cols"), geom))

    return reconstruct_elements(pop_fit, *fringe_fits)


def simulate_experiment(
    config: ScenarioConfig,
    out_dir: str | Path,
    master_seed: int | None = None,
    write_frames: bool = True,
) -> list[SampleEstimate]:
    """Run the full synthetic experiment for every sweep sample.

    Frames land under ``out_dir/frames/sample_NNN`` (staged per sample and
    committed atomically by rename).  Estimation errors are recorded on the
    affected sample without aborting the sweep.
    """
    out_dir = Path(out_dir)
    seed = config.seed if master_seed is None else master_seed
    records = run_sweep(config.sweep_spec(), config.state)
    repetitions = 1 if config.noiseless else config.repetitions

    results: list[SampleEstimate] = []
    frames_root = out_dir / "frames"
    if write_frames:
        frames_root.mkdir(parents=True, exist_ok=True)

    for idx, record in enumerate(records):
        kraus = build_kraus(config.decay_type, record.probs)
        stage = final = None
        if write_frames:
            final = frames_root / f"sample_{idx:03d}"
            stage = frames_root / f".stage_sample_{idx:03d}"
            if stage.exists():
                for old in stage.iterdir():
                    old.unlink()
            else:
                stage.mkdir()
        per_rep: list[ElementEstimates] = []
        error = None
        try:
            for rep in range(repetitions):
                per_rep.append(
                    estimate_repetition(
                        config, record, kraus, idx, rep, seed, stage
                    )
                )
        except QjsimError as exc:
            error = f"{type(exc).__name__}: {exc}"
        if write_frames:
            if final.exists():
                for old in final.iterdir():
                    old.unlink()
                final.rmdir()
            stage.rename(final)
        if error is None:
            mean, std = aggregate_estimates(per_rep)
            results.append(SampleEstimate(record=record, mean=mean, std=std))
        else:
            results.append(SampleEstimate(record=record, mean=None, std=None, error=error))
    return results
