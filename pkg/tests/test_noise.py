"""Compound Poisson sampling, path access and CSV round trips."""

import io
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumpsde.errors import ParseError, ValidationError
from jumpsde.noise import (CompoundPoissonPath, Constant, Exponential, Normal,
                           Uniform, _nudge_ties, c_value, increment,
                           parse_distribution, path_seed, read_path_csv,
                           sample_path, splitmix64, write_path_csv)


class TestDistributions:
    def test_parameter_validation(self):
        with pytest.raises(ValidationError):
            Normal(0.0, 0.0)
        with pytest.raises(ValidationError):
            Exponential(-1.0)
        with pytest.raises(ValidationError):
            Uniform(2.0, 1.0)

    def test_parse_round_trip(self):
        for d in (Normal(), Normal(1.5, 0.25), Constant(2.0),
                  Exponential(3.0), Uniform(-1.0, 1.0)):
            assert parse_distribution(d.label()) == d

    def test_parse_errors(self):
        with pytest.raises(ParseError):
            parse_distribution("gamma(1,2)")
        with pytest.raises(ParseError):
            parse_distribution("normal")
        with pytest.raises(ParseError):
            parse_distribution("uniform(1)")


class TestSamplePath:
    def test_zero_intensity_empty(self):
        p = sample_path(0.0, 1.0, Normal(), 7)
        assert len(p) == 0
        assert c_value(p, 1.0) == 0.0

    def test_constant_amplitudes(self):
        p = sample_path(10.0, 1.0, Constant(2.0), 3)
        assert all(r == 2.0 for r in p.amplitudes)

    def test_reproducible_bit_identical(self):
        a = sample_path(10.0, 1.0, Normal(), 42)
        b = sample_path(10.0, 1.0, Normal(), 42)
        assert a == b

    def test_different_seeds_differ(self):
        a = sample_path(10.0, 1.0, Normal(), 1)
        b = sample_path(10.0, 1.0, Normal(), 2)
        assert a.jump_times != b.jump_times

    def test_times_sorted_in_range(self):
        p = sample_path(50.0, 2.0, Normal(), 11)
        assert list(p.jump_times) == sorted(p.jump_times)
        assert all(0.0 < tk <= 2.0 for tk in p.jump_times)

    def test_count_statistics_smoke(self):
        # acceptance runs the full 10,000-seed version
        counts = [len(sample_path(10.0, 1.0, Normal(), s)) for s in range(1000)]
        mean = sum(counts) / len(counts)
        assert abs(mean - 10.0) < 3.0 * math.sqrt(10.0 / 1000)

    def test_invalid_args(self):
        with pytest.raises(ValidationError):
            sample_path(-1.0, 1.0, Normal(), 0)
        with pytest.raises(ValidationError):
            sample_path(1.0, 0.0, Normal(), 0)

    def test_nudge_ties(self):
        with pytest.warns(RuntimeWarning):
            out = _nudge_ties([0.0, 0.3, 0.3, 0.7])
        assert out[0] > 0.0
        assert all(b > a for a, b in zip(out, out[1:]))
        assert out[2] == math.nextafter(0.3, math.inf)


class TestPathValues:
    def make(self):
        return CompoundPoissonPath(T=1.0, intensity=2.0,
                                   jump_times=(0.3, 0.7),
                                   amplitudes=(1.5, -0.5), seed=0)

    def test_before_first_jump(self):
        assert c_value(self.make(), 0.1) == 0.0

    def test_cadlag_at_jump(self):
        assert c_value(self.make(), 0.7) == 1.0

    def test_no_jumps_at_horizon(self):
        p = CompoundPoissonPath(T=1.0, intensity=0.0, jump_times=(),
                                amplitudes=(), seed=0)
        assert c_value(p, 1.0) == 0.0

    def test_terminal_equals_sum_exactly(self):
        p = sample_path(20.0, 1.0, Normal(), 5)
        assert c_value(p, 1.0) == sum(p.amplitudes)

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            c_value(self.make(), 1.5)
        with pytest.raises(ValidationError):
            c_value(self.make(), -0.1)

    def test_increment_between_jumps(self):
        assert increment(self.make(), 0.5) == 0.0

    def test_increment_at_jump(self):
        assert increment(self.make(), 0.3) == 1.5

    def test_increment_empty_path(self):
        p = CompoundPoissonPath(T=1.0, intensity=0.0, jump_times=(),
                                amplitudes=(), seed=0)
        assert increment(p, 0.4) == 0.0

    @settings(max_examples=200, deadline=None)
    @given(st.floats(min_value=0.0, max_value=1.0,
                     allow_nan=False))
    def test_piecewise_constant_right_continuous(self, t):
        p = sample_path(8.0, 1.0, Normal(), 99)
        # value at t equals the value at the last jump at or before t
        prev = [tk for tk in p.jump_times if tk <= t]
        expected = c_value(p, prev[-1]) if prev else 0.0
        assert c_value(p, t) == expected

    def test_validation(self):
        with pytest.raises(ValidationError):
            CompoundPoissonPath(T=1.0, intensity=1.0, jump_times=(0.5, 0.5),
                                amplitudes=(1.0, 1.0), seed=0)
        with pytest.raises(ValidationError):
            CompoundPoissonPath(T=1.0, intensity=1.0, jump_times=(0.5,),
                                amplitudes=(), seed=0)
        with pytest.raises(ValidationError):
            CompoundPoissonPath(T=1.0, intensity=1.0, jump_times=(1.5,),
                                amplitudes=(1.0,), seed=0)


class TestSubstreams:
    def test_mixing_documented_values(self):
        # frozen reference values of the documented mixing function
        assert splitmix64(0) == 16294208416658607535
        assert path_seed(42, 0) == splitmix64(42)

    def test_distinct_indices(self):
        seeds = {path_seed(123, i) for i in range(1000)}
        assert len(seeds) == 1000


class TestCsv:
    def test_round_trip(self):
        p = sample_path(10.0, 1.0, Normal(), 42)
        buf = io.StringIO()
        write_path_csv(p, buf)
        q = read_path_csv(io.StringIO(buf.getvalue()))
        assert q == p

    def test_header_checked(self):
        with pytest.raises(ParseError):
            read_path_csv(io.StringIO("k,t_k,R_k\n"))

    def test_replay_metadata(self):
        p = sample_path(10.0, 1.0, Uniform(-1.0, 1.0), 7)
        buf = io.StringIO()
        write_path_csv(p, buf)
        q = read_path_csv(io.StringIO(buf.getvalue()))
        resampled = sample_path(q.intensity, q.T, q.dist, q.seed)
        assert resampled == p
