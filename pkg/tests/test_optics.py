"""Detection-chain model: fields, frames, profiles, and the film
realization of a channel."""

import math

import numpy as np
import pytest
from scipy.special import erf

from qjsim import (
    DecayType,
    DensityMatrix,
    DetectorFrame,
    DetectorSpec,
    InitialState,
    JumpProbabilities,
    ModeGeometry,
    apply_channel,
    build_kraus,
    closed_form_evolve,
    frame_sequence,
    fringe_intensity,
    image_intensity,
    image_plane_field,
    itop,
    itop_aligned,
    project_subspace,
    pure_density,
    read_pgm,
    render_frame,
    visibility,
    write_pgm,
)
from qjsim.errors import FieldContractError
from qjsim.optics import expected_pixel_intensity, zero_field

from conftest import random_probs


def _image_spec(geom, **kw):
    defaults = dict(mean_photons=1e5, seed=123)
    defaults.update(kw)
    return DetectorSpec.centered(256, 32, 0.0125, center=(0.0, 2 * geom.d), **defaults)


def _fringe_spec(geom, **kw):
    defaults = dict(mean_photons=1e5, seed=321)
    defaults.update(kw)
    return DetectorSpec.centered(256, 32, 0.0125, center=(0.0, 0.0), **defaults)


class TestFields:
    def test_single_mode_peak(self, geom):
        rho = DensityMatrix(np.diag([1.0, 0.0, 0.0]).astype(complex))
        assert image_intensity(rho, geom, geom.d) == pytest.approx(1.0, abs=1e-15)

    def test_two_neighbor_tail_sum(self):
        # equal populations, midpoint between modes 1 and 2, sigma = d/4:
        # (2/3) e^-4 plus mode 3 four half-spacings away
        geom = ModeGeometry(d=1.0, sigma_g=0.25, f=150.0, k=9926.0)
        rho = DensityMatrix((np.eye(3) / 3).astype(complex))
        expected = (2 / 3) * math.exp(-4.0) + (1 / 3) * math.exp(-36.0)
        assert image_intensity(rho, geom, 1.5) == pytest.approx(expected, rel=1e-12)

    def test_peak_heights_follow_populations(self, geom, equal_state):
        rho = closed_form_evolve(
            DecayType.CASCADE, JumpProbabilities(p21=0.25, p32=0.25), equal_state
        )
        peaks = [image_intensity(rho, geom, lvl * geom.d) for lvl in (1, 2, 3)]
        pops = rho.populations
        # sigma_g << d: cross-mode leakage is negligible
        assert peaks[0] / peaks[1] == pytest.approx(pops[0] / pops[1], rel=1e-9)
        assert peaks[2] / peaks[1] == pytest.approx(pops[2] / pops[1], rel=1e-9)

    def test_image_linearity_in_rho(self, geom):
        rng = np.random.default_rng(5)
        d1 = rng.dirichlet([1, 1, 1])
        d2 = rng.dirichlet([1, 1, 1])
        r1 = DensityMatrix(np.diag(d1).astype(complex))
        r2 = DensityMatrix(np.diag(d2).astype(complex))
        mix = DensityMatrix(np.diag(0.3 * d1 + 0.7 * d2).astype(complex))
        y = np.linspace(0, 4, 201)
        expect = 0.3 * image_intensity(r1, geom, y) + 0.7 * image_intensity(r2, geom, y)
        assert np.allclose(image_intensity(mix, geom, y), expect, atol=1e-15)

    def test_full_visibility_null(self, geom, equal_state):
        sub = project_subspace(pure_density(equal_state), 1, 2)
        y_dark = math.pi * geom.f / (geom.k * geom.d)  # cos = -1
        assert fringe_intensity(sub, geom, y_dark) == pytest.approx(0.0, abs=1e-12)

    def test_no_coherence_keeps_envelope(self, geom):
        rho = DensityMatrix(np.diag([0.5, 0.0, 0.5]).astype(complex))
        sub = project_subspace(rho, 1, 3)
        y = np.linspace(-0.5, 0.5, 101)
        envelope = np.exp(-((geom.sigma_g * geom.k / geom.f) ** 2) * y**2)
        assert np.allclose(fringe_intensity(sub, geom, y), envelope, atol=1e-15)

    def test_fringe_extremes_ratio(self, geom, equal_state):
        rho = closed_form_evolve(
            DecayType.CASCADE, JumpProbabilities(p21=0.25, p32=0.25), equal_state
        )
        sub = project_subspace(rho, 1, 2)
        v = visibility(sub)
        y_bright = 0.0
        y_dark = math.pi * geom.f / (geom.k * geom.d)
        envelope = lambda y: math.exp(-((geom.sigma_g * geom.k / geom.f) ** 2) * y**2)
        i_max = fringe_intensity(sub, geom, y_bright) / envelope(y_bright)
        i_min = fringe_intensity(sub, geom, y_dark) / envelope(y_dark)
        assert i_max / i_min == pytest.approx((1 + v) / (1 - v), abs=1e-9)

    def test_geometry_validation(self):
        with pytest.raises(ValueError):
            ModeGeometry(d=0.0, sigma_g=1, f=1, k=1)
        with pytest.raises(ValueError):
            ModeGeometry(d=1, sigma_g=-1, f=1, k=1)


class TestRenderFrame:
    def test_zero_field_gives_zero_frame(self, geom):
        frame = render_frame(zero_field, _image_spec(geom))
        assert frame.total == 0.0

    def test_zero_photons_gives_zero_frame(self, geom, equal_state):
        field = image_plane_field(pure_density(equal_state), geom)
        frame = render_frame(field, _image_spec(geom, mean_photons=0.0))
        assert frame.total == 0.0

    def test_seed_reproducibility(self, geom, equal_state):
        field = image_plane_field(pure_density(equal_state), geom)
        a = render_frame(field, _image_spec(geom, seed=99))
        b = render_frame(field, _image_spec(geom, seed=99))
        c = render_frame(field, _image_spec(geom, seed=100))
        assert np.array_equal(a.counts, b.counts)
        assert not np.array_equal(a.counts, c.counts)

    def test_noiseless_total_matches_budget(self, geom, equal_state):
        field = image_plane_field(pure_density(equal_state), geom)
        frame = render_frame(field, _image_spec(geom, noiseless=True, mean_photons=5e4))
        assert frame.total == pytest.approx(5e4, rel=1e-12)

    def test_negative_field_rejected(self, geom):
        bad = lambda x, y: np.full_like(np.asarray(x, dtype=float), -1.0)
        with pytest.raises(FieldContractError):
            render_frame(bad, _image_spec(geom))

    def test_nonfinite_field_rejected(self, geom):
        bad = lambda x, y: np.full_like(np.asarray(x, dtype=float), np.nan)
        with pytest.raises(FieldContractError):
            render_frame(bad, _image_spec(geom))

    def test_beam_count_ratio(self, geom, equal_state):
        rho = closed_form_evolve(
            DecayType.CASCADE, JumpProbabilities(p21=0.25, p32=0.25), equal_state
        )
        spec = _image_spec(geom, mean_photons=1e6, seed=4)
        frame = render_frame(image_plane_field(rho, geom), spec, fine_scale=geom.sigma_g)
        y = spec.origin[1] + spec.pitch * np.arange(spec.rows)
        row_sums = frame.counts.sum(axis=1)
        nearest = np.rint(y / geom.d).astype(int)
        totals = np.array([row_sums[nearest == lvl].sum() for lvl in (1, 2, 3)])
        n = totals.sum()
        for got, want in zip(totals / n, rho.populations):
            # three Poisson standard deviations on a binomial fraction
            assert abs(got - want) <= 3 * math.sqrt(want * (1 - want) / n)

    def test_noiseless_mixture_linearity(self, geom):
        rng = np.random.default_rng(17)
        d1, d2 = rng.dirichlet([1, 1, 1]), rng.dirichlet([1, 1, 1])
        spec = _image_spec(geom, noiseless=True, mean_photons=1.0)
        mix = 0.4 * d1 + 0.6 * d2

        def lam(diag):
            rho = DensityMatrix(np.diag(diag).astype(complex))
            return expected_pixel_intensity(image_plane_field(rho, geom), spec)

        assert np.allclose(lam(mix), 0.4 * lam(d1) + 0.6 * lam(d2), rtol=1e-12)

    def test_quadrature_beats_midpoint_on_coarse_pixels(self):
        # single Gaussian, pixels 2x wider than the feature: the 4-point rule
        # must land closer to the analytic pixel integral than the midpoint
        geom = ModeGeometry(d=1.0, sigma_g=0.05, f=150.0, k=9926.0)
        sigma = geom.sigma_g
        spec = DetectorSpec.centered(32, 8, 0.1, center=(0.0, 2.0), mean_photons=1.0)
        rho = DensityMatrix(np.diag([0.0, 1.0, 0.0]).astype(complex))
        field = image_plane_field(rho, geom)
        mid = expected_pixel_intensity(field, spec, fine_scale=None)
        quad = expected_pixel_intensity(field, spec, fine_scale=sigma)
        assert not np.allclose(mid, quad)

        def gauss_cell(center, half, mu):
            a = (center - half - mu) / sigma
            b = (center + half - mu) / sigma
            return 0.5 * sigma * math.sqrt(math.pi) * (erf(b) - erf(a))

        x = spec.origin[0] + spec.pitch * np.arange(spec.cols)
        y = spec.origin[1] + spec.pitch * np.arange(spec.rows)
        exact = np.outer(
            [gauss_cell(yy, spec.pitch / 2, 2 * geom.d) for yy in y],
            [gauss_cell(xx, spec.pitch / 2, 0.0) for xx in x],
        )
        err_mid = np.abs(mid - exact).max()
        err_quad = np.abs(quad - exact).max()
        assert err_quad < err_mid

    def test_poisson_statistics_chi_square(self):
        # per-pixel sample mean over many frames against the expectation
        geom = ModeGeometry(d=1.0, sigma_g=0.6, f=150.0, k=9926.0)
        spec = DetectorSpec.centered(8, 8, 0.5, center=(0.0, 2.0), mean_photons=2000.0)
        rho = DensityMatrix((np.eye(3) / 3).astype(complex))
        field = image_plane_field(rho, geom)
        lam = expected_pixel_intensity(field, spec)
        lam *= spec.mean_photons / lam.sum()
        n = 1000
        acc = np.zeros_like(lam)
        for s in range(n):
            acc += render_frame(field, spec.with_seed(s)).counts
        mean = acc / n
        chi2 = float(((mean - lam) ** 2 / (lam / n)).sum())
        # chi-square with 64 dof: generous 1e-4 two-sided bounds
        assert 25.0 < chi2 < 125.0


class TestFrameSequence:
    def test_identity_channel_matches_initial_image(self, geom, equal_state):
        ks = build_kraus(DecayType.V, JumpProbabilities())
        spec = _image_spec(geom, noiseless=True)
        film = frame_sequence(ks, equal_state, geom, spec)
        direct = render_frame(image_plane_field(pure_density(equal_state), geom), spec)
        assert np.allclose(film.counts, direct.counts, rtol=1e-12)

    def test_saturated_cascade_concentrates_in_mode_one(self, geom, equal_state):
        ks = build_kraus(DecayType.CASCADE, JumpProbabilities(p21=1, p32=1))
        spec = _image_spec(geom, noiseless=True)
        film = frame_sequence(ks, equal_state, geom, spec)
        y = spec.origin[1] + spec.pitch * np.arange(spec.rows)
        mode1 = film.counts[np.abs(y - geom.d) < geom.d / 2, :].sum()
        assert mode1 / film.total > 1 - 1e-9

    def test_equivalence_with_channel_render(self, geom):
        # the central oracle: film accumulation equals rendering the
        # channel-evolved state, pixel-exact in noiseless mode
        rng = np.random.default_rng(2024)
        types = list(DecayType)
        for trial in range(4):
            decay_type = types[trial % 3]
            p21, p31, p32 = random_probs(decay_type, rng)
            probs = JumpProbabilities(p21=p21, p31=p31, p32=p32)
            state = InitialState(tuple(rng.uniform(0.1, 3.0, size=3)))
            ks = build_kraus(decay_type, probs)
            spec = _image_spec(geom, noiseless=True, seed=trial)
            film = frame_sequence(ks, state, geom, spec, fine_scale=geom.sigma_g)
            rho = apply_channel(ks, pure_density(state))
            direct = render_frame(
                image_plane_field(rho, geom), spec, fine_scale=geom.sigma_g
            )
            scale = direct.counts.max()
            assert np.abs(film.counts - direct.counts).max() <= 1e-12 * scale


class TestItop:
    def test_single_pixel_delta(self):
        spec = DetectorSpec(rows=4, cols=5, pitch=1.0)
        counts = np.zeros((4, 5))
        counts[2, 3] = 7.0
        frame = DetectorFrame(counts, spec)
        prof = itop(frame, "cols")
        assert prof.values[2] == 1.0
        assert prof.values.sum() == 1.0
        assert prof.total == 7.0

    def test_uniform_frame_is_flat(self):
        spec = DetectorSpec(rows=6, cols=3, pitch=0.5)
        frame = DetectorFrame(np.ones((6, 3)), spec)
        prof = itop(frame, "cols")
        assert np.allclose(prof.values, 1 / 6, atol=1e-15)
        prof_t = itop(frame, "rows")
        assert np.allclose(prof_t.values, 1 / 3, atol=1e-15)

    def test_empty_frame_flagged(self):
        spec = DetectorSpec(rows=2, cols=2, pitch=1.0)
        prof = itop(DetectorFrame(np.zeros((2, 2)), spec), "cols")
        assert prof.is_empty
        assert np.all(prof.values == 0.0)

    def test_axis_validation(self):
        spec = DetectorSpec(rows=2, cols=2, pitch=1.0)
        with pytest.raises(ValueError):
            itop(DetectorFrame(np.zeros((2, 2)), spec), "diagonal")

    def test_three_peak_areas(self, geom, equal_state):
        rho = closed_form_evolve(
            DecayType.CASCADE, JumpProbabilities(p21=0.25, p32=0.25), equal_state
        )
        spec = _image_spec(geom, noiseless=True)
        frame = render_frame(image_plane_field(rho, geom), spec)
        prof = itop(frame, "cols")
        nearest = np.rint(prof.positions / geom.d).astype(int)
        fracs = [prof.values[nearest == lvl].sum() for lvl in (1, 2, 3)]
        assert np.allclose(fracs, rho.populations, atol=1e-9)

    def test_rotated_frame_realigned(self, geom, equal_state):
        rho = pure_density(equal_state)
        base = DetectorSpec.centered(
            192, 192, 0.0125, center=(0.0, 2.0), mean_photons=1.0, noiseless=True
        )
        straight = render_frame(image_plane_field(rho, geom), base)
        p0 = itop_aligned(straight, "cols")
        rotated_spec = DetectorSpec.centered(
            192, 192, 0.0125, center=(0.0, 2.0), mean_photons=1.0,
            noiseless=True, axis_rotation=0.3,
        )
        rotated = render_frame(image_plane_field(rho, geom), rotated_spec)
        p1 = itop_aligned(rotated, "cols")
        # compare the mass near each mode center
        for lvl in (1, 2, 3):
            m0 = p0.values[np.abs(p0.positions - lvl * geom.d) < 0.25].sum()
            m1 = p1.values[np.abs(p1.positions - lvl * geom.d) < 0.25].sum()
            assert m1 == pytest.approx(m0, abs=0.02)

    def test_aligned_equals_plain_when_unrotated(self, geom, equal_state):
        spec = _image_spec(geom, noiseless=True)
        frame = render_frame(image_plane_field(pure_density(equal_state), geom), spec)
        a = itop(frame, "cols")
        b = itop_aligned(frame, "cols")
        assert np.array_equal(a.values, b.values)
        assert np.array_equal(a.positions, b.positions)


class TestPgm:
    def test_round_trip_noisy(self, geom, equal_state, tmp_path):
        field = image_plane_field(pure_density(equal_state), geom)
        frame = render_frame(field, _image_spec(geom, seed=8))
        path = write_pgm(frame, tmp_path / "frame.pgm")
        again = read_pgm(path)
        assert np.array_equal(again.counts, frame.counts)
        assert again.spec == frame.spec

    def test_round_trip_noiseless_quantized(self, geom, equal_state, tmp_path):
        field = image_plane_field(pure_density(equal_state), geom)
        frame = render_frame(field, _image_spec(geom, noiseless=True))
        path = write_pgm(frame, tmp_path / "frame.pgm")
        again = read_pgm(path)
        quantum = frame.counts.max() / 65535
        assert np.abs(again.counts - frame.counts).max() <= 0.5 * quantum
