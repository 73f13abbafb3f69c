import numpy as np
import pytest

from pacok.energy import discrete_energy
from pacok.grid import GridField, PeriodicGrid
from pacok.physics import FKind, ModelParams, NonlinearSpec, W_eval, f_eval
from pacok.spectral import LongRangeOp

from test_spectral import dense_laplacian

CUBIC = NonlinearSpec(FKind.CUBIC_HERMITE)


def params(**kwargs):
    base = dict(epsilon=0.1, gamma=100.0, M=2000.0, omega=0.3, kappa=10.0, tau=1e-3)
    base.update(kwargs)
    return ModelParams(**base)


def solve_f_equals(target):
    """Root of 3s^2 - 2s^3 = target in [0, 1] by bisection (independent oracle)."""
    lo, hi = 0.0, 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if 3 * mid**2 - 2 * mid**3 < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestDiscreteEnergy:
    def test_volume_consistent_constant(self):
        g = PeriodicGrid((32, 32), (1.0, 1.0))
        p = params(omega=0.3)
        w_star = solve_f_equals(p.omega)
        assert f_eval(CUBIC, w_star) == pytest.approx(p.omega, abs=1e-14)
        e = discrete_energy(GridField.constant(g, w_star), p, CUBIC, LongRangeOp.inverse_laplacian())
        assert e.interfacial == pytest.approx(0.0, abs=1e-12)
        assert e.longrange == pytest.approx(0.0, abs=1e-12)
        assert e.penalty == pytest.approx(0.0, abs=1e-12)
        assert e.well == pytest.approx(g.measure * W_eval(w_star) / p.epsilon, rel=1e-12)

    def test_zero_field_penalty(self):
        # Phi = 0, omega = 0.3, M = 2000 on |T| = 2: penalty = (M/2)(0.3*2)^2 = 360.
        g = PeriodicGrid((64,), (1.0,))
        p = params(omega=0.3, M=2000.0)
        e = discrete_energy(GridField.constant(g, 0.0), p, CUBIC, LongRangeOp.inverse_laplacian())
        assert e.penalty == pytest.approx(360.0, rel=1e-12)
        assert e.well == 0.0
        assert e.interfacial == pytest.approx(0.0, abs=1e-13)
        assert e.total == pytest.approx(360.0, rel=1e-12)

    def test_matches_dense_quadratic_forms(self):
        g = PeriodicGrid((8, 8), (1.0, 1.0))
        p = params()
        rng = np.random.default_rng(31)
        phi = GridField(g, rng.uniform(0.0, 1.0, size=g.shape))
        L = dense_laplacian(g)
        G = np.linalg.pinv(-L)
        v = phi.values.ravel()
        dx = g.cell_measure
        mismatch = f_eval(CUBIC, v) - p.omega
        expected = (
            -0.5 * p.epsilon * dx * v @ (L @ v)
            + dx * np.sum(W_eval(v)) / p.epsilon
            + 0.5 * p.gamma * dx * mismatch @ (G @ mismatch)
            + 0.5 * p.M * (dx * np.sum(mismatch)) ** 2
        )
        e = discrete_energy(phi, p, CUBIC, LongRangeOp.inverse_laplacian())
        assert e.total == pytest.approx(expected, abs=1e-10 * max(1.0, abs(expected)))

    def test_translation_invariance(self):
        g = PeriodicGrid((32, 32), (1.0, 1.0))
        p = params()
        rng = np.random.default_rng(32)
        phi = GridField(g, rng.uniform(0.0, 1.0, size=g.shape))
        e0 = discrete_energy(phi, p, CUBIC, LongRangeOp.inverse_laplacian())
        shifted = GridField(g, np.roll(phi.values, (5, -9), axis=(0, 1)))
        e1 = discrete_energy(shifted, p, CUBIC, LongRangeOp.inverse_laplacian())
        assert e1.total == pytest.approx(e0.total, rel=1e-10)
        assert e1.interfacial == pytest.approx(e0.interfacial, rel=1e-10)
        assert e1.longrange == pytest.approx(e0.longrange, rel=1e-10)

    def test_part_signs_on_random_fields(self):
        g = PeriodicGrid((16, 16), (1.0, 1.0))
        p = params()
        rng = np.random.default_rng(33)
        for op in [LongRangeOp.inverse_laplacian(), LongRangeOp.helmholtz(0.3)]:
            for _ in range(10):
                phi = GridField(g, rng.uniform(0.0, 1.0, size=g.shape))
                e = discrete_energy(phi, p, CUBIC, op)
                assert e.interfacial >= -1e-12
                assert e.well >= 0.0
                assert e.penalty >= 0.0
                assert e.longrange >= -1e-12
                assert e.total == e.interfacial + e.well + e.longrange + e.penalty

    def test_solvation_mode(self):
        g = PeriodicGrid((64,), (5.0,))
        p = params(gamma=0.0, M=0.0, omega=0.5)
        rng = np.random.default_rng(34)
        phi = GridField(g, rng.uniform(0.0, 1.0, size=g.shape))
        pot = GridField(g, rng.standard_normal(g.shape))
        e = discrete_energy(phi, p, CUBIC, LongRangeOp.none(), potential=pot)
        expected = g.cell_measure * np.sum(f_eval(CUBIC, phi.values) * pot.values)
        assert e.longrange == pytest.approx(expected, rel=1e-12)
        assert e.penalty == 0.0

    def test_none_operator_drops_longrange_only(self):
        g = PeriodicGrid((32,), (1.0,))
        p = params()
        rng = np.random.default_rng(35)
        phi = GridField(g, rng.uniform(0.0, 1.0, size=g.shape))
        e = discrete_energy(phi, p, CUBIC, LongRangeOp.none())
        assert e.longrange == 0.0
        assert e.penalty > 0.0
