import numpy as np
import pytest

from curvedis.cg import CgConfig, CgTrace, armijo_step, cg_minimize
from curvedis.curves import DiscreteCurve
from curvedis.errors import LineSearchFailedError, NotDescentDirectionError, NonsmoothPointError
from curvedis.manifolds import SO3, Grass24, Sphere, Torus
from curvedis.measures import empirical_coefficients, uniform_measure
from curvedis.objective import ObjectiveConfig, Problem
from curvedis.spectral import kernel_weights

TAU = 2 * np.pi


def single_mode(c):
    """sum_ij (1 - cos 2 pi (x_ij - c_ij)) / (4 pi^2): one frequency per coordinate, minimizer x = c."""
    F = lambda x: float(np.sum(1 - np.cos(TAU * (x - c))) / TAU ** 2)
    G = lambda x: np.sin(TAU * (x - c)) / TAU
    H = lambda x, v, g=None: np.cos(TAU * (x - c)) * v
    return F, G, H


def line_problem():
    """F(x) = 2 x^2 - 4 x on the torus coordinate near 0 (d = -g = 4 at x = 0)."""
    F = lambda x: float(np.sum(2 * x ** 2 - 4 * x))
    return F


# --- config -----------------------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(armijo_a=0.5), dict(armijo_a=0.0), dict(armijo_b=1.0), dict(armijo_b=0.0),
                                dict(k_max=-1), dict(armijo_k_max=0), dict(restart_extra=-1), dict(gtol=-1.0)])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        CgConfig(**kw)


def test_forced_restarts_evenly_spaced():
    assert CgConfig(k_max=100, restart_extra=3).forced_restarts() == {25, 50, 75}
    assert CgConfig().forced_restarts() == set()


# --- line search --------------------------------------------------------------------------

def test_armijo_zero_curvature_starts_at_one():
    m = Torus(1)
    x = np.array([[0.0]])
    F = lambda y: float(np.sum(-0.01 * y))
    res = armijo_step(F, m, x, np.array([[0.1]]), np.array([[-0.01]]), CgConfig(), curvature=0.0)
    assert res.tau == 1.0 and res.backtracks == 0


def test_armijo_quadratic_model_step():
    m = Torus(1)
    x = np.array([[0.0]])
    g = np.array([[-4.0]])
    d = np.array([[1.0]])
    # <d, g> = -4, <d, H d> = 8
    res = armijo_step(line_problem(), m, x, d * 0.1, g * 0.1, CgConfig(), curvature=8.0 * 0.01)
    assert res.tau == pytest.approx(0.5)
    assert res.backtracks == 0


def test_armijo_uses_hessvec_when_needed():
    m = Torus(1)
    x = np.array([[0.0]])
    res = armijo_step(line_problem(), m, x, np.array([[0.1]]), np.array([[-0.4]]), CgConfig(),
                      hessvec=lambda x, d, g: 4 * d)
    assert res.tau == pytest.approx(1.0)


def test_armijo_rejects_ascent():
    m = Torus(1)
    x = np.array([[0.0]])
    with pytest.raises(NotDescentDirectionError):
        armijo_step(line_problem(), m, x, np.array([[0.1]]), np.array([[0.4]]), CgConfig(), curvature=1.0)


def test_armijo_exhaustion():
    m = Torus(1)
    x = np.array([[0.0]])
    # claims descent but the function only increases
    with pytest.raises(LineSearchFailedError):
        armijo_step(lambda y: float(np.sum(y ** 2)) + (0.0 if np.all(y == 0) else 1.0), m, x, np.array([[0.1]]),
                    np.array([[-1.0]]), CgConfig(armijo_k_max=5), curvature=1.0)


def test_armijo_treats_cut_locus_as_failed_test(rng):
    from curvedis.errors import CutLocusError
    m = SO3()
    x = m.random_point(rng, 1)
    d = m.proj(x, rng.normal(size=x.shape))
    d = d / np.sqrt(np.sum(m.inner(x, d, d)))

    def F(y):
        dist = float(np.sum(m.dist(x, y)))
        if dist > 0.3:
            raise CutLocusError()
        return -dist

    res = armijo_step(F, m, x, d, -d, CgConfig(), curvature=0.0)
    assert res.backtracks > 0 and res.tau <= 0.3
    assert res.value < 0


@pytest.mark.parametrize("seed", range(5))
def test_armijo_decreases(seed):
    rng = np.random.default_rng(seed)
    c = rng.random((5, 2))
    F, G, H = single_mode(c)
    x = rng.random((5, 2))
    g = G(x)
    res = armijo_step(F, Torus(2), x, -g, g, CgConfig(), hessvec=H)
    assert res.value < F(x)


# --- minimization ----------------------------------------------------------------------------

def test_stationary_start_returns_immediately():
    c = np.array([[0.2, 0.4]])
    F, G, H = single_mode(c)
    x0 = DiscreteCurve(Torus(2), c)
    x, tr = cg_minimize(F, G, H, x0)
    assert np.array_equal(x.points, x0.points)
    assert len(tr) == 1 and tr.status == "stationary"


@pytest.mark.parametrize("seed", range(20))
def test_single_mode_converges(seed):
    rng = np.random.default_rng(seed)
    n, d = 8, 2
    c = rng.random((n, d))
    F, G, H = single_mode(c)
    x0 = DiscreteCurve(Torus(d), rng.random((n, d)))
    x, tr = cg_minimize(F, G, H, x0, CgConfig(k_max=5 * n * d))
    assert min(tr.grad_norm) < 1e-8
    assert np.max(np.abs(Torus.delta(x.points, c))) < 1e-8
    assert tr.is_monotone()
    assert tr.restart[0]


def test_restart_rule_and_trace_export():
    rng = np.random.default_rng(3)
    m = Sphere(2)
    target = empirical_coefficients(DiscreteCurve(m, m.random_point(rng, 30)), 4)
    p = Problem(ObjectiveConfig(target, kernel_weights(m, 4), 10.0, 0.0))
    x0 = DiscreteCurve(m, m.random_point(rng, 3))
    cfg = CgConfig(k_max=20, restart_extra=1)
    x, tr = cg_minimize(p.value, p.gradient, p.hessian_vec, x0, cfg)
    assert tr.is_monotone()
    assert tr.iteration == list(range(len(tr)))
    # period N * dim = 6 counted from the last restart, plus the forced one at k_max / 2
    assert [k for k, flag in enumerate(tr.restart) if flag] == [0, 6, 10, 16]
    assert all(np.isfinite(tr.beta))
    lines = tr.to_csv().splitlines()
    assert lines[0] == "iteration,F,grad_norm,tau,beta,restart"
    assert len(lines) == len(tr) + 1
    assert m.check_point(x.points, tol=1e-9)


@pytest.mark.parametrize("m", [Torus(2), Sphere(2), SO3(), Grass24()], ids=lambda m: m.tag)
def test_discrepancy_minimization_decreases(m):
    rng = np.random.default_rng(0)
    r = 3
    target = uniform_measure(m, r)
    p = Problem(ObjectiveConfig(target, kernel_weights(m, r), 5.0, 1.0))
    x0 = DiscreteCurve(m, m.random_point(rng, 12))
    x, tr = cg_minimize(p.value, p.gradient, p.hessian_vec, x0, CgConfig(k_max=15))
    assert tr.value[-1] < tr.value[0]
    assert tr.is_monotone()
    assert p.value(np.asarray(x.points)) == pytest.approx(tr.value[-1], rel=1e-12)


def test_deterministic(rng):
    m = Grass24()
    x0 = DiscreteCurve(m, m.random_point(rng, 6))
    p = Problem(ObjectiveConfig(uniform_measure(m, 2), kernel_weights(m, 2), 3.0, 1.0))
    a = cg_minimize(p.value, p.gradient, p.hessian_vec, x0, CgConfig(k_max=8))
    b = cg_minimize(p.value, p.gradient, p.hessian_vec, x0, CgConfig(k_max=8))
    assert np.array_equal(a[0].points, b[0].points)
    assert a[1].value == b[1].value


def test_oracle_errors_carry_iteration():
    def grad(x):
        raise NonsmoothPointError()

    x0 = DiscreteCurve(Torus(2), [[0.1, 0.2]])
    with pytest.raises(NonsmoothPointError, match="CG iteration 0"):
        cg_minimize(lambda x: 0.0, grad, lambda x, d, g: d, x0)


def test_trace_monotone_flag():
    tr = CgTrace()
    tr.record(0, 2.0, 1.0, 0, 0, True)
    tr.record(1, 1.0, 1.0, 0.5, 0, False)
    assert tr.is_monotone()
    tr.record(2, 1.5, 1.0, 0.5, 0, False)
    assert not tr.is_monotone()
