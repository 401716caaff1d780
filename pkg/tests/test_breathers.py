"""Exact solutions on the unit background."""
import numpy as np
import pytest
from scipy.integrate import quad

from breatherlab.breathers import (
    BreatherSpec, ExactOffset, evaluate, limit_checks, offset, residual,
)
from breatherlab.grid import Grid1D

SQ2 = np.sqrt(2.0)


class TestSpec:
    def test_parameter_ranges(self):
        with pytest.raises(ValueError):
            BreatherSpec("kuznetsov_ma", a=0.5)
        with pytest.raises(ValueError):
            BreatherSpec("akhmediev", a=0.5)
        with pytest.raises(ValueError):
            BreatherSpec("plane_wave", c=0.0)
        with pytest.raises(ValueError):
            BreatherSpec("soliton")

    def test_km_constants(self):
        sp = BreatherSpec("kuznetsov_ma", a=1.0)
        assert sp.alpha == pytest.approx(2 * SQ2)
        assert sp.beta == pytest.approx(SQ2)
        assert sp.period == pytest.approx(2 * np.pi / (2 * SQ2))

    def test_dict_round_trip(self):
        sp = BreatherSpec("plane_wave", c=2.0, v=0.5, gamma=0.1, x0=1.0)
        assert BreatherSpec.from_dict(sp.to_dict()) == sp
        with pytest.raises(ValueError):
            BreatherSpec.from_dict({"kind": "peregrine", "bogus": 1})


class TestValues:
    def test_peregrine_peak(self):
        assert evaluate(BreatherSpec("peregrine"), 0.0, 0.0) == -3.0

    def test_km_peak(self):
        u = evaluate(BreatherSpec("kuznetsov_ma", a=1.0), 0.0, 0.0)
        assert u == pytest.approx(-1 - 2 * SQ2, rel=1e-15)
        W = offset(BreatherSpec("kuznetsov_ma", a=1.0))(0.0, 0.0)
        assert W == pytest.approx(-2 - 2 * SQ2, rel=1e-15)

    def test_stokes(self, rng):
        t, x = rng.uniform(-5, 5, 20), rng.uniform(-5, 5, 20)
        np.testing.assert_allclose(np.abs(evaluate(BreatherSpec("stokes"), t, x)), 1.0)
        assert np.all(offset(BreatherSpec("stokes"))(t, x) == 0)

    def test_shifts_act_on_offset(self):
        sp = BreatherSpec("peregrine", x0=2.0, t0=-1.0)
        assert ExactOffset(sp)(-1.0, 2.0) == -4.0

    def test_background_reconstruction(self, rng):
        sp = BreatherSpec("kuznetsov_ma", a=0.8)
        t, x = rng.uniform(-3, 3, 50), rng.uniform(-3, 3, 50)
        np.testing.assert_allclose(evaluate(sp, t, x), np.exp(1j * t) * (1 + offset(sp)(t, x)), rtol=1e-15)


class TestResiduals:
    def test_stokes(self):
        assert residual(BreatherSpec("stokes"), Grid1D(40.0, 256), 0.4) <= 1e-9

    def test_plane_wave(self):
        g = Grid1D(8 * np.pi, 256)  # v/2 = 0.5 is a grid wavenumber
        assert residual(BreatherSpec("plane_wave", c=1.5, v=1.0, gamma=0.3), g, 0.2) <= 1e-8

    def test_peregrine_interior(self):
        assert residual(BreatherSpec("peregrine"), Grid1D(), 0.3, interior=20.0) <= 1e-6

    @pytest.mark.parametrize("a", [0.75, 1.0])
    def test_km(self, a):
        assert residual(BreatherSpec("kuznetsov_ma", a=a), Grid1D(), 0.0) <= 1e-6
        assert residual(BreatherSpec("kuznetsov_ma", a=a), Grid1D(), 0.9) <= 1e-6

    def test_akhmediev_on_commensurate_grid(self):
        sp = BreatherSpec("akhmediev", a=0.3)
        g = Grid1D(4 * sp.x_period, 512)
        assert residual(sp, g, 0.5) <= 1e-6

    def test_residual_converges_in_ht(self):
        # centered differences: halving h_t quarters the truncation part
        sp, g = BreatherSpec("kuznetsov_ma", a=1.0), Grid1D()
        r1, r2 = residual(sp, g, 0.3, h_t=4e-3), residual(sp, g, 0.3, h_t=2e-3)
        assert r1 / r2 == pytest.approx(4.0, rel=0.05)


class TestStructure:
    def test_km_time_periodic(self, rng):
        sp = BreatherSpec("kuznetsov_ma", a=1.0)
        t, x = rng.uniform(-2, 2, 100), rng.uniform(-5, 5, 100)
        W = offset(sp)
        np.testing.assert_allclose(W(t + sp.period, x), W(t, x), atol=1e-12)

    def test_akhmediev_space_periodic(self, rng):
        sp = BreatherSpec("akhmediev", a=0.2)
        t, x = rng.uniform(-2, 2, 100), rng.uniform(-5, 5, 100)
        W = offset(sp)
        np.testing.assert_allclose(W(t, x + sp.x_period), W(t, x), atol=1e-12)

    def test_peregrine_symmetries(self, rng):
        Q = offset(BreatherSpec("peregrine"))
        t, x = rng.uniform(-3, 3, 100), rng.uniform(-5, 5, 100)
        np.testing.assert_allclose(Q(-t, x), np.conj(Q(t, x)), rtol=1e-15)
        np.testing.assert_allclose(Q(t, -x), Q(t, x), rtol=1e-15)

    @pytest.mark.parametrize("t", [0.0, 0.5, 3.0, 10.0])
    def test_peregrine_l2_decay(self, t):
        Q = offset(BreatherSpec("peregrine"))
        val, _ = quad(lambda x: abs(Q(t, x)) ** 2, -np.inf, np.inf, epsabs=0, epsrel=1e-13)
        assert val == pytest.approx(4 * SQ2 * np.pi / np.sqrt(1 + 4 * t * t), rel=1e-10)


class TestLimits:
    def test_converge_to_peregrine(self):
        rep = limit_checks()
        assert rep.km_dist[-1] < 0.05 and rep.ab_dist[-1] < 0.05
        assert rep.km_monotone and rep.ab_monotone
        # regression values from the first run
        assert rep.km_dist[-1] == pytest.approx(4.0e-4, rel=0.05)
        assert rep.ab_dist[-1] == pytest.approx(4.0e-4, rel=0.05)

    def test_sequence_must_approach_from_correct_side(self):
        with pytest.raises(ValueError):
            limit_checks(km_a=(0.4,), ab_a=(0.3,))
