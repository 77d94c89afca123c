"""Photonic detection chain: beam profiles, interference fringes, and
synthetic noisy detector frames.

The three levels are encoded in three parallel Gaussian beams stacked along
the detector's vertical (y) axis at centers d, 2d, 3d.  Image-plane frames
show one Gaussian spot per populated level; Fourier-plane frames show the
two-beam fringe pattern of a projected pair, with contrast equal to twice
the pair coherence modulus.  Frames carry independent per-pixel Poisson
counts from a counter-based generator, or exact expected values in
noiseless mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .channels import DensityMatrix, InitialState, KrausSet, SubspaceState, pure_density
from .errors import FieldContractError, SchemaError

# Relative amount of negative field tolerated as rounding noise before the
# input contract is considered violated.
_NEGATIVE_FIELD_SLACK = 1e-9

Field2D = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModeGeometry:
    """Geometry of the path-mode optics.

    d        center-to-center mode spacing
    sigma_g  Gaussian mode transverse width (intensity profile exp(-r^2/sigma^2))
    f        focal length of the merging lens
    k        optical wavenumber 2*pi/lambda

    All lengths share one unit (the bundled configs use millimetres).
    """

    d: float
    sigma_g: float
    f: float
    k: float

    def __post_init__(self):
        for name in ("d", "sigma_g", "f", "k"):
            v = float(getattr(self, name))
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and > 0, got {v}")
            object.__setattr__(self, name, v)

    @property
    def fringe_period(self) -> float:
        """Spatial period of the two-beam fringe, 2*pi*f/(k*d)."""
        return 2.0 * math.pi * self.f / (self.k * self.d)

    @property
    def envelope_width(self) -> float:
        """1/e half width of the Fourier-plane intensity envelope, f/(sigma_g*k)."""
        return self.f / (self.sigma_g * self.k)


@dataclass(frozen=True)
class DetectorSpec:
    """Pixel grid and counting statistics of the synthetic camera.

    ``origin`` is the world (x, y) coordinate of the center of pixel
    (row 0, col 0); columns advance along +x, rows along +y.  A nonzero
    ``axis_rotation`` rotates the sampled pattern about the detector center
    (the analog of a tilted incidence plane).  ``mean_photons`` is the
    expected total count per frame; in noiseless mode the frame holds the
    exact per-pixel expectations instead of Poisson draws.
    """

    rows: int
    cols: int
    pitch: float
    origin: tuple[float, float] = (0.0, 0.0)
    axis_rotation: float = 0.0
    mean_photons: float = 0.0
    seed: int = 0
    noiseless: bool = False

    def __post_init__(self):
        if int(self.rows) < 1 or int(self.cols) < 1:
            raise ValueError("detector needs at least one row and one column")
        object.__setattr__(self, "rows", int(self.rows))
        object.__setattr__(self, "cols", int(self.cols))
        if not (float(self.pitch) > 0) or not math.isfinite(float(self.pitch)):
            raise ValueError(f"pitch must be finite and > 0, got {self.pitch}")
        object.__setattr__(self, "pitch", float(self.pitch))
        ox, oy = self.origin
        object.__setattr__(self, "origin", (float(ox), float(oy)))
        object.__setattr__(self, "axis_rotation", float(self.axis_rotation))
        mp = float(self.mean_photons)
        if not math.isfinite(mp) or mp < 0:
            raise ValueError(f"mean_photons must be finite and >= 0, got {mp}")
        object.__setattr__(self, "mean_photons", mp)
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "noiseless", bool(self.noiseless))

    @classmethod
    def centered(
        cls, rows: int, cols: int, pitch: float, center: tuple[float, float], **kw
    ) -> "DetectorSpec":
        """Spec whose pixel grid is centered on a world coordinate."""
        ox = center[0] - 0.5 * (cols - 1) * pitch
        oy = center[1] - 0.5 * (rows - 1) * pitch
        return cls(rows=rows, cols=cols, pitch=pitch, origin=(ox, oy), **kw)

    def pixel_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) meshgrid arrays of shape (rows, cols)."""
        x = self.origin[0] + self.pitch * np.arange(self.cols)
        y = self.origin[1] + self.pitch * np.arange(self.rows)
        return np.meshgrid(x, y)

    @property
    def center(self) -> tuple[float, float]:
        return (
            self.origin[0] + 0.5 * (self.cols - 1) * self.pitch,
            self.origin[1] + 0.5 * (self.rows - 1) * self.pitch,
        )

    def with_seed(self, seed: int) -> "DetectorSpec":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class DetectorFrame:
    """Per-pixel counts plus the spec they were generated with.

    Counts are stored as float64: integral Poisson draws in noisy mode,
    exact expected values in noiseless mode.
    """

    counts: np.ndarray
    spec: DetectorSpec

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.float64)
        if c.shape != (self.spec.rows, self.spec.cols):
            raise ValueError(
                f"counts shape {c.shape} does not match spec "
                f"({self.spec.rows}, {self.spec.cols})"
            )
        if not np.all(np.isfinite(c)) or (c < 0).any():
            raise ValueError("counts must be finite and nonnegative")
        c = np.array(c, order="C")  # copy: freezing must not touch the input
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def total(self) -> float:
        return float(self.counts.sum())


@dataclass(frozen=True)
class Profile:
    """1D normalized intensity profile at known world positions."""

    positions: np.ndarray
    values: np.ndarray
    total: float
    is_empty: bool = False

    def __post_init__(self):
        p = np.array(self.positions, dtype=np.float64, order="C")
        v = np.array(self.values, dtype=np.float64, order="C")
        if p.ndim != 1 or p.shape != v.shape:
            raise ValueError("positions and values must be 1D and equally long")
        p.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "total", float(self.total))


def image_intensity(rho: DensityMatrix, geom: ModeGeometry, y) -> np.ndarray | float:
    """Image-plane intensity at position y: sum_i rho_ii exp(-(y-i*d)^2/sigma^2)."""
    return _image_intensity_from_diag(np.real(np.diag(rho.mat)), geom, y)


def _image_intensity_from_diag(diag, geom: ModeGeometry, y):
    y = np.asarray(y, dtype=np.float64)
    out = np.zeros_like(y)
    for level in (1, 2, 3):
        w = float(diag[level - 1])
        if w != 0.0:
            out = out + w * np.exp(-((y - level * geom.d) ** 2) / geom.sigma_g**2)
    if out.ndim == 0:
        return float(out)
    return out


def fringe_intensity(sub: SubspaceState, geom: ModeGeometry, y) -> np.ndarray | float:
    """Fourier-plane two-beam pattern of a projected pair state.

    envelope(y) * [1 + 2|sigma_ij| cos(k*y*d/f + phase)], with a Gaussian
    envelope exp(-sigma_g^2 k^2 y^2 / f^2) set by the transverse mode width.
    """
    y = np.asarray(y, dtype=np.float64)
    coh = sub.coherence
    envelope = np.exp(-((geom.sigma_g * geom.k / geom.f) ** 2) * y**2)
    pattern = envelope * (
        1.0
        + 2.0 * abs(coh) * np.cos(geom.k * y * geom.d / geom.f + np.angle(coh))
    )
    if pattern.ndim == 0:
        return float(pattern)
    return pattern


def transverse_envelope(geom: ModeGeometry, x) -> np.ndarray:
    """Fixed Gaussian carried by the axis orthogonal to the pattern."""
    x = np.asarray(x, dtype=np.float64)
    return np.exp(-(x**2) / geom.sigma_g**2)


def image_plane_field(rho: DensityMatrix, geom: ModeGeometry) -> Field2D:
    """2D image-plane field: the 1D profile times the transverse envelope."""
    diag = np.real(np.diag(rho.mat)).copy()
    return _image_field_from_diag(diag, geom)


def _image_field_from_diag(diag, geom: ModeGeometry) -> Field2D:
    diag = np.asarray(diag, dtype=np.float64)

    def field(x, y):
        return _image_intensity_from_diag(diag, geom, y) * transverse_envelope(geom, x)

    return field


def fringe_plane_field(sub: SubspaceState, geom: ModeGeometry) -> Field2D:
    """2D Fourier-plane field of a pair state."""

    def field(x, y):
        return fringe_intensity(sub, geom, y) * transverse_envelope(geom, x)

    return field


def zero_field(x, y):
    return np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)


# 2-point Gauss-Legendre nodes on [-1/2, 1/2], tensored per axis.
_GL_NODE = 0.5 / math.sqrt(3.0)


def _sample_coordinates(spec: DetectorSpec, fine_scale: float | None):
    """Sample points per pixel (possibly 4 quadrature points) and weights."""
    x, y = spec.pixel_centers()
    if fine_scale is not None and spec.pitch > fine_scale / 4.0:
        off = _GL_NODE * spec.pitch
        offsets = [(-off, -off), (-off, off), (off, -off), (off, off)]
        weights = [0.25] * 4
    else:
        offsets = [(0.0, 0.0)]
        weights = [1.0]
    return x, y, offsets, weights


def _rotate_about(x, y, center: tuple[float, float], angle: float):
    if angle == 0.0:
        return x, y
    cx, cy = center
    c, s = math.cos(angle), math.sin(angle)
    dx, dy = x - cx, y - cy
    return cx + c * dx - s * dy, cy + s * dx + c * dy


def expected_pixel_intensity(
    field: Field2D, spec: DetectorSpec, fine_scale: float | None = None
) -> np.ndarray:
    """Unnormalized expected intensity per pixel (field integrated over the
    pixel area by midpoint rule, or 4-point Gauss quadrature when the pitch
    undersamples ``fine_scale``)."""
    x, y, offsets, weights = _sample_coordinates(spec, fine_scale)
    lam = np.zeros((spec.rows, spec.cols), dtype=np.float64)
    for (ox, oy), w in zip(offsets, weights):
        xs, ys = _rotate_about(x + ox, y + oy, spec.center, spec.axis_rotation)
        vals = np.asarray(field(xs, ys), dtype=np.float64)
        if vals.shape != lam.shape:
            raise FieldContractError(
                f"field returned shape {vals.shape}, expected {lam.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise FieldContractError("field returned non-finite values")
        lam += w * vals
    floor = -_NEGATIVE_FIELD_SLACK * max(float(lam.max(initial=0.0)), 1.0)
    if (lam < floor).any():
        raise FieldContractError("field returned negative values")
    np.clip(lam, 0.0, None, out=lam)
    return lam * spec.pitch**2


def _draw_counts(lam: np.ndarray, spec: DetectorSpec) -> np.ndarray:
    total = float(lam.sum())
    if total <= 0.0 or spec.mean_photons == 0.0:
        return np.zeros_like(lam)
    lam = lam * (spec.mean_photons / total)
    if spec.noiseless:
        return lam
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(spec.seed)))
    return rng.poisson(lam).astype(np.float64)


def render_frame(
    field: Field2D, spec: DetectorSpec, fine_scale: float | None = None
) -> DetectorFrame:
    """Expose the detector to an intensity field.

    The field is integrated per pixel, normalized so the expected total
    equals ``spec.mean_photons``, and (unless noiseless) converted to
    independent Poisson counts seeded by ``spec.seed``.
    """
    lam = expected_pixel_intensity(field, spec, fine_scale)
    return DetectorFrame(_draw_counts(lam, spec), spec)


def frame_sequence(
    kraus: KrausSet,
    state: InitialState,
    geom: ModeGeometry,
    spec: DetectorSpec,
    fine_scale: float | None = None,
) -> DetectorFrame:
    """Film realization of a channel: one image-plane exposure per Kraus
    branch, accumulated into a single frame.

    Each branch contributes the image field of its unnormalized conditional
    state K_i rho_0 K_i^dag (weight = branch probability); the camera
    integrates over the whole sequence, so the expected totals add up to
    ``spec.mean_photons``.
    """
    rho0 = pure_density(state).mat
    lam = np.zeros((spec.rows, spec.cols), dtype=np.float64)
    for k in kraus.operators:
        cond = k @ rho0 @ k.conj().T
        diag = np.real(np.diag(cond))
        if diag.sum() <= 0.0:
            continue
        lam += expected_pixel_intensity(
            _image_field_from_diag(diag, geom), spec, fine_scale
        )
    return DetectorFrame(_draw_counts(lam, spec), spec)


def itop(frame: DetectorFrame, axis: str) -> Profile:
    """Integrated transverse optical profile.

    Sums counts along the named axis ("rows" or "cols") and normalizes by
    the grand total; an empty frame yields a flagged all-zero profile.
    Positions are the pixel-center world coordinates of the remaining axis.
    """
    if axis == "rows":
        sums = frame.counts.sum(axis=0)
        positions = frame.spec.origin[0] + frame.spec.pitch * np.arange(frame.spec.cols)
    elif axis == "cols":
        sums = frame.counts.sum(axis=1)
        positions = frame.spec.origin[1] + frame.spec.pitch * np.arange(frame.spec.rows)
    else:
        raise ValueError(f"axis must be 'rows' or 'cols', got {axis!r}")
    total = float(sums.sum())
    if total <= 0.0:
        return Profile(positions, np.zeros_like(sums), total=0.0, is_empty=True)
    return Profile(positions, sums / total, total=total)


def itop_aligned(frame: DetectorFrame, axis: str) -> Profile:
    """ITOP in the pattern's own frame.

    For an unrotated detector this is exactly ``itop``.  When the frame was
    rendered with a nonzero axis rotation, counts are re-binned along the
    rotated pattern axis (bin width = pixel pitch) before normalizing.
    """
    spec = frame.spec
    if spec.axis_rotation == 0.0:
        return itop(frame, axis)
    if axis not in ("rows", "cols"):
        raise ValueError(f"axis must be 'rows' or 'cols', got {axis!r}")
    x, y = spec.pixel_centers()
    xs, ys = _rotate_about(x, y, spec.center, spec.axis_rotation)
    coord = ys if axis == "cols" else xs
    o = spec.origin[1] if axis == "cols" else spec.origin[0]
    idx = np.rint((coord - o) / spec.pitch).astype(int)
    lo, hi = int(idx.min()), int(idx.max())
    sums = np.bincount((idx - lo).ravel(), weights=frame.counts.ravel(), minlength=hi - lo + 1)
    positions = o + spec.pitch * np.arange(lo, hi + 1)
    total = float(sums.sum())
    if total <= 0.0:
        return Profile(positions, np.zeros_like(sums), total=0.0, is_empty=True)
    return Profile(positions, sums / total, total=total)


# ----------------------------------------------------------------------
# 16-bit PGM export with a plain-text sidecar carrying the DetectorSpec.

_PGM_MAXVAL = 65535


def write_pgm(frame: DetectorFrame, path: str | Path) -> Path:
    """Write the frame as binary 16-bit PGM plus a ``.txt`` sidecar.

    Counts are divided by the sidecar ``scale`` before quantization, so
    ``stored * scale`` recovers the counts (exactly for integral counts
    within the 16-bit range, to quantization accuracy otherwise).
    """
    path = Path(path)
    peak = float(frame.counts.max(initial=0.0))
    scale = 1.0 if peak <= _PGM_MAXVAL and not frame.spec.noiseless else max(peak / _PGM_MAXVAL, 1e-300)
    stored = np.rint(frame.counts / scale).astype(">u2")
    header = f"P5\n{frame.spec.cols} {frame.spec.rows}\n{_PGM_MAXVAL}\n"
    path.write_bytes(header.encode("ascii") + stored.tobytes())
    spec = frame.spec
    side = "\n".join(
        [
            f"rows = {spec.rows}",
            f"cols = {spec.cols}",
            f"pitch = {spec.pitch:.17g}",
            f"origin_x = {spec.origin[0]:.17g}",
            f"origin_y = {spec.origin[1]:.17g}",
            f"axis_rotation = {spec.axis_rotation:.17g}",
            f"mean_photons = {spec.mean_photons:.17g}",
            f"seed = {spec.seed}",
            f"noiseless = {str(spec.noiseless).lower()}",
            f"scale = {scale:.17g}",
        ]
    )
    path.with_suffix(path.suffix + ".txt").write_text(side + "\n")
    return path


def read_pgm(path: str | Path) -> DetectorFrame:
    """Read a frame written by write_pgm (requires the sidecar)."""
    path = Path(path)
    raw = path.read_bytes()
    fields = raw.split(maxsplit=4)
    if fields[0] != b"P5":
        raise SchemaError(f"{path}: not a binary PGM file")
    cols, rows, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != _PGM_MAXVAL:
        raise SchemaError(f"{path}: expected 16-bit PGM, maxval {maxval}")
    data = np.frombuffer(raw[-2 * rows * cols :], dtype=">u2").reshape(rows, cols)
    side_path = path.with_suffix(path.suffix + ".txt")
    kv = {}
    for line in side_path.read_text().splitlines():
        if line.strip():
            key, _, val = line.partition("=")
            kv[key.strip()] = val.strip()
    spec = DetectorSpec(
        rows=rows,
        cols=cols,
        pitch=float(kv["pitch"]),
        origin=(float(kv["origin_x"]), float(kv["origin_y"])),
        axis_rotation=float(kv["axis_rotation"]),
        mean_photons=float(kv["mean_photons"]),
        seed=int(kv["seed"]),
        noiseless=kv["noiseless"] == "true",
    )
    return DetectorFrame(data.astype(np.float64) * float(kv["scale"]), spec)
