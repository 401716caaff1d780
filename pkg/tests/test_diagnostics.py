"""Conserved functionals, shift-minimized distances and rate fits."""
import numpy as np
import pytest
from scipy.integrate import quad

from breatherlab.breathers import BreatherSpec, ExactOffset
from breatherlab.diagnostics import (
    CSV_HEADER, DiagnosticsRecord, compute_record, fit_growth_rate, functionals,
    hs_distance_min_shift, read_csv, whole_line_functionals, write_csv,
)
from breatherlab.grid import Grid1D, PerturbationField

SQ2 = np.sqrt(2.0)


def energy_312(u, grid):
    """1/2 int |u_x|^2 - 1/4 int (|u|^2 - 1)^2, straight from u."""
    ux = grid.derivative(u, 1)
    return float(np.sum(0.5 * np.abs(ux) ** 2 - 0.25 * (np.abs(u) ** 2 - 1) ** 2).real * grid.dx)


class TestRecord:
    def test_zero_field(self, small_grid):
        rec = compute_record(PerturbationField(small_grid, np.zeros(small_grid.points)), 0.0)
        for name in CSV_HEADER[1:8]:
            assert getattr(rec, name) == 0.0
        assert np.isnan(rec.err_vs_exact)

    @pytest.mark.parametrize("a", [0.75, 1.0])
    def test_km_mass_and_energy(self, a):
        sp = BreatherSpec("kuznetsov_ma", a=a)
        g = Grid1D()
        for t in (0.0, 0.4):
            W = ExactOffset(sp).on_grid(g, t)
            mass, energy, momentum = functionals(W, g)
            assert mass == pytest.approx(4 * sp.beta, rel=1e-10)
            assert energy == pytest.approx(-4 / 3 * sp.beta**3, rel=1e-10)
            assert abs(momentum) < 1e-12

    def test_energy_is_twice_the_u_energy(self):
        sp = BreatherSpec("kuznetsov_ma", a=1.0)
        g = Grid1D()
        W = ExactOffset(sp).on_grid(g, 0.3)
        u = np.exp(0.3j) * (1 + W)
        assert functionals(W, g)[1] == pytest.approx(2 * energy_312(u, g), rel=1e-12)

    def test_momentum_of_boosted_plane_wave_density(self):
        # w = e^{i k x} - 1 with k on the grid: Im int conj(w) w_x = k L
        g = Grid1D(2 * np.pi * 4, 128)
        k = 0.5
        w = np.exp(1j * k * g.x) - 1
        assert functionals(w, g)[2] == pytest.approx(k * g.length, rel=1e-12)

    def test_exact_comparison_fields(self):
        g = Grid1D(80.0, 1024)
        Q = ExactOffset(BreatherSpec("peregrine"))
        rec = compute_record(PerturbationField(g, Q.on_grid(g, 0.2)), 0.2, exact=Q)
        assert rec.err_vs_exact < 1e-10 and abs(rec.shift_x0) < 1e-10
        assert rec.err_l2 < 1e-12
        assert len(rec.row()) == len(CSV_HEADER)


class TestShiftDistance:
    def test_exact_grid_shift(self):
        g = Grid1D(80.0, 1024)
        Q = ExactOffset(BreatherSpec("kuznetsov_ma", a=1.0))
        W = Q.on_grid(g, 0.0)
        w = np.roll(W, 3)
        d, x0 = hs_distance_min_shift(w, W, g)
        assert d <= 1e-10
        assert x0 == pytest.approx(3 * g.dx, abs=1e-10)

    def test_subgrid_shift(self):
        g = Grid1D(80.0, 2048)
        Q = ExactOffset(BreatherSpec("kuznetsov_ma", a=1.0))
        true = 0.37 * g.dx - 1.1
        d, x0 = hs_distance_min_shift(Q(0.0, g.x - true), Q.on_grid(g, 0.0), g)
        assert x0 == pytest.approx(true, abs=1e-9)
        assert d < 1e-10

    def test_same_shift_on_both_arguments(self):
        g = Grid1D(80.0, 1024)
        Q = ExactOffset(BreatherSpec("peregrine"))
        w = Q(0.1, g.x - 0.5)
        W = Q.on_grid(g, 0.0)
        d1, _ = hs_distance_min_shift(w, W, g)
        d2, _ = hs_distance_min_shift(np.roll(w, 7), np.roll(W, 7), g)
        assert d1 == pytest.approx(d2, rel=1e-9)

    def test_distance_to_zero_is_norm(self):
        g = Grid1D(640.0, 8192)
        Q = ExactOffset(BreatherSpec("peregrine"))
        W = Q.on_grid(g, 50.0)
        d, _ = hs_distance_min_shift(np.zeros(g.points), W, g)
        assert d == pytest.approx(g.hs_norm(W, 1.0), rel=1e-12)
        # L2 part against the closed form, up to the box truncation
        assert g.hs_norm(W, 0.0) ** 2 == pytest.approx(4 * SQ2 * np.pi / np.sqrt(1 + 4 * 2500), rel=0.05)


class TestFits:
    def test_exponential(self):
        t = np.linspace(0, 20, 2001)
        rate = fit_growth_rate(t, 1e-8 * np.exp(0.8 * t))
        assert rate == pytest.approx(0.8, abs=1e-10)

    def test_oscillation(self):
        t = np.linspace(0, 20, 4001)
        w = 2 * SQ2
        assert fit_growth_rate(t, np.cos(w * t + 0.3), kind="oscillation") == pytest.approx(w, abs=1e-4)

    def test_degenerate_windows(self):
        t = np.linspace(0, 1, 10)
        with pytest.raises(ValueError, match="degenerate"):
            fit_growth_rate(t, np.full(10, 1.0))
        with pytest.raises(ValueError, match="degenerate"):
            fit_growth_rate(t, np.full(10, 1.0), kind="oscillation")
        with pytest.raises(ValueError, match="unknown"):
            fit_growth_rate(t, t, kind="bogus")


class TestWholeLine:
    def test_peregrine_mass_vanishes(self):
        Q = ExactOffset(BreatherSpec("peregrine"))
        for t in (0.0, 1.0, -4.0):
            wl = whole_line_functionals(Q, t)
            assert abs(wl["mass"]) < 1e-10
            assert wl["l2_squared"] == pytest.approx(4 * SQ2 * np.pi / np.sqrt(1 + 4 * t * t), rel=1e-12)

    def test_gradient_against_quadrature(self):
        # Q_x = 16 x (1 + 2 i t) / D^2, D = 1 + 4t^2 + 2x^2
        t = 0.7
        ref, _ = quad(lambda x: 256 * x * x * (1 + 4 * t * t) / (1 + 4 * t * t + 2 * x * x) ** 4,
                      -np.inf, np.inf, epsabs=0, epsrel=1e-13)
        wl = whole_line_functionals(ExactOffset(BreatherSpec("peregrine")), t)
        assert wl["grad_squared"] == pytest.approx(ref, rel=1e-10)

    def test_peregrine_energy_vanishes(self):
        wl = whole_line_functionals(ExactOffset(BreatherSpec("peregrine")), 0.3)
        assert abs(wl["energy"]) < 1e-9


class TestCSV:
    def test_round_trip(self, tmp_path):
        recs = [DiagnosticsRecord(0.1 * i, 1.0 / 3, -2.0, 1e-17, 4.0, 5.0, 6.0, 7.0) for i in range(3)]
        p = tmp_path / "traj.csv"
        write_csv(recs, p)
        assert p.read_text().splitlines()[0] == ",".join(CSV_HEADER)
        data = read_csv(p)
        assert data["mass_w"][0] == 1.0 / 3
        assert data["momentum_w"][2] == 1e-17
        assert np.isnan(data["err_vs_exact"]).all()

    def test_empty(self, tmp_path):
        p = tmp_path / "e.csv"
        p.write_text("")
        with pytest.raises(ValueError, match="empty"):
            read_csv(p)
        p.write_text(",".join(CSV_HEADER) + "\n")
        with pytest.raises(ValueError, match="no data"):
            read_csv(p)
