"""Configuration parsing and CSV schemas."""

import numpy as np
import pytest

from qjsim import DecayType, SweepMode, parse_config
from qjsim.errors import ConfigError, SchemaError
from qjsim.io import (
    ESTIMATE_COLUMNS,
    THEORY_COLUMNS,
    read_estimates_csv,
    read_profile_csv,
    read_theory_csv,
    write_estimates_csv,
    write_profile_csv,
    write_theory_csv,
)
from qjsim.optics import Profile

MINIMAL = "decay_type = cascade\n"


class TestConfigParsing:
    def test_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.decay_type is DecayType.CASCADE
        assert cfg.state.intensities == (1.0, 1.0, 1.0)
        assert cfg.rates.gamma21 == 1.0 and cfg.rates.gamma32 == 1.0
        assert cfg.sweep_mode is SweepMode.PROBABILITY
        assert cfg.samples == tuple(i * 0.125 for i in range(9))
        assert cfg.repetitions == 64
        assert not cfg.noiseless

    def test_per_type_default_rates(self):
        lam = parse_config("decay_type = lambda\n")
        assert (lam.rates.gamma31, lam.rates.gamma32) == (2.0, 1.0)
        vee = parse_config("decay_type = v\n")
        assert (vee.rates.gamma21, vee.rates.gamma31) == (2.0, 1.0)

    def test_comments_and_blank_lines(self):
        cfg = parse_config("# comment\n\ndecay_type = v  # inline\nseed = 7\n")
        assert cfg.decay_type is DecayType.V
        assert cfg.seed == 7

    def test_unknown_key_reports_line(self):
        with pytest.raises(ConfigError, match="line 3.*unknown key.*banana"):
            parse_config("decay_type = cascade\nseed = 1\nbanana = 2\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("seed = 1\nseed = 2\n")

    def test_bad_number_reports_field(self):
        with pytest.raises(ConfigError, match="mean_photons"):
            parse_config("mean_photons = lots\n")

    def test_bad_bool(self):
        with pytest.raises(ConfigError, match="noiseless"):
            parse_config("noiseless = maybe\n")

    def test_negative_intensity_reported(self):
        with pytest.raises(ConfigError, match="intensity_2"):
            parse_config("intensity_2 = -1\n")

    def test_sweep_grid_bounds(self):
        cfg = parse_config("sweep_start = 0.25\nsweep_stop = 0.75\nsweep_step = 0.25\n")
        assert cfg.samples == (0.25, 0.5, 0.75)
        with pytest.raises(ConfigError):
            parse_config("sweep_stop = 1.5\n")

    def test_time_mode_requires_times(self):
        with pytest.raises(ConfigError, match="sweep_times"):
            parse_config("sweep_mode = time\n")
        cfg = parse_config("sweep_mode = time\nsweep_times = 0.0, 0.5, 2.0\n")
        assert cfg.sweep_mode is SweepMode.TIME
        assert cfg.samples == (0.0, 0.5, 2.0)

    def test_missing_assignment_syntax(self):
        with pytest.raises(ConfigError, match="line 1"):
            parse_config("this is not a config\n")

    def test_override(self):
        cfg = parse_config(MINIMAL).override(seed=99, noiseless=True)
        assert cfg.seed == 99 and cfg.noiseless


class TestCsvRoundTrip:
    def test_theory_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(0)
        rows = rng.uniform(-1, 1, size=(7, 9))
        rows[0, 3] = 1e-17
        rows[1, 4] = 12345678.901234567
        path = write_theory_csv(tmp_path / "theory.csv", rows)
        again = read_theory_csv(path)
        assert np.array_equal(again, rows)

    def test_estimates_round_trip_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        rows = rng.uniform(0, 1, size=(3, 15))
        path = write_estimates_csv(tmp_path / "est.csv", rows)
        assert np.array_equal(read_estimates_csv(path), rows)

    def test_headers_are_pinned(self, tmp_path):
        assert ",".join(THEORY_COLUMNS) == (
            "p21,p31,p32,rho11,rho22,rho33,abs_sigma12,abs_sigma13,abs_sigma23"
        )
        assert ",".join(ESTIMATE_COLUMNS) == (
            "p21,p31,p32,rho11,rho11_err,rho22,rho22_err,rho33,rho33_err,"
            "abs_sigma12,abs_sigma12_err,abs_sigma13,abs_sigma13_err,"
            "abs_sigma23,abs_sigma23_err"
        )
        path = write_theory_csv(tmp_path / "t.csv", np.zeros((1, 9)))
        first = path.read_text().splitlines()[0]
        assert first == ",".join(THEORY_COLUMNS)

    def test_header_mismatch_names_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("p21,p31,p32,rho11,rho22,oops,abs_sigma12,abs_sigma13,abs_sigma23\n")
        with pytest.raises(SchemaError, match="column 6.*oops"):
            read_theory_csv(path)

    def test_short_row_reports_number(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(THEORY_COLUMNS) + "\n1,2,3\n")
        with pytest.raises(SchemaError, match="row 2"):
            read_theory_csv(path)

    def test_non_numeric_row_reported(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(THEORY_COLUMNS) + "\n" + ",".join(["x"] * 9) + "\n")
        with pytest.raises(SchemaError, match="row 2"):
            read_theory_csv(path)

    def test_profile_round_trip(self, tmp_path):
        prof = Profile(
            np.linspace(-1, 1, 33), np.abs(np.sin(np.linspace(0, 9, 33))), total=10.0
        )
        path = write_profile_csv(tmp_path / "p.csv", prof)
        again = read_profile_csv(path)
        assert np.array_equal(again.positions, prof.positions)
        assert np.array_equal(again.values, prof.values)

    def test_profile_rejects_negative_values(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("position,value\n0,1\n1,-2\n")
        with pytest.raises(SchemaError, match="nonnegative"):
            read_profile_csv(path)

    def test_profile_requires_increasing_positions(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("position,value\n0,1\n0,2\n")
        with pytest.raises(SchemaError, match="increasing"):
            read_profile_csv(path)
