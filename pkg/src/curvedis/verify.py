"""Self-check suites run by ``curvedis verify``. Every suite uses fixed seeds."""

import numpy as np

from .curves import DiscreteCurve
from .manifolds import SO3, Grass24, Sphere, Torus
from .measures import empirical_coefficients, uniform_measure
from .objective import ObjectiveConfig, Problem, discrepancy_sq
from .quadrature_curves import (circle_coefficients, discretize, line_coefficients, so3_quadrature_curve,
                                sphere2_quadrature_curve, torus_quadrature_curve)
from .spectral import kernel_closed_form, kernel_series, kernel_weights, zero_position

SUITES = ("quadrature", "gradient", "kernel", "gamma-proxy")


def _check(name, value, tol, passed=None):
    value = float(value)
    ok = bool(value < tol) if passed is None else bool(passed)
    return {"name": name, "value": value, "tol": tol, "passed": ok}


def _off_zero(c, m, r):
    c = np.array(c, dtype=complex)
    c[zero_position(m, r)] -= 1.0
    return float(np.max(np.abs(c)))


def quadrature_suite():
    out = []
    for r in (2, 4, 8):
        curve = torus_quadrature_curve(2, r)
        nu = line_coefficients(curve, r)
        out.append(_check(f"torus2 r={r}", _off_zero(nu.coefficients, curve.manifold, r), 1e-12))
    for r in (2, 4, 6):
        curve = sphere2_quadrature_curve(r)
        nu = circle_coefficients(curve, r)
        out.append(_check(f"sphere2 r={r}", _off_zero(nu.coefficients, curve.manifold, r), 1e-10))
    for r in (1, 2):
        curve, dens = so3_quadrature_curve(r)
        nu = line_coefficients(curve, r, density=dens)
        out.append(_check(f"so3 r={r}", _off_zero(nu.coefficients, curve.manifold, r), 1e-8))
    return out


def gradient_case(m, lam, seed=0, n=8, r=4, h=1e-6, directions=4):
    """Largest relative error between directional derivatives of the gradient and central differences."""
    rng = np.random.default_rng(seed)
    x = m.random_point(rng, n)
    if isinstance(m, Torus):
        # a small random loop keeps every segment far from the wrap ambiguity
        x = m.wrap(0.5 + 0.15 * (x - 0.5))
    target_pts = m.random_point(rng, 5)
    mu = empirical_coefficients(DiscreteCurve(m, target_pts), r)
    seg = m.dist(np.roll(x, 1, axis=0), x)
    # with lam > 0 the speed bound sits at the median segment: about half the segments are active
    L = float(n * np.median(seg)) if lam > 0 else 1.0
    prob = Problem(ObjectiveConfig(mu, kernel_weights(m, r), L, lam))
    g = prob.gradient(x)
    worst = 0.0
    for _ in range(directions):
        v = m.random_tangent(rng, x)
        an = prob.inner(x, g, v)
        fd = (prob.value(m.exp(x, h * v)) - prob.value(m.exp(x, -h * v))) / (2 * h)
        worst = max(worst, abs(fd - an) / max(abs(an), 1e-3))
    active = int(np.sum(n * seg - L > 0)) if lam > 0 else 0
    return worst, active


def gradient_suite(seed=0):
    out = []
    for m in (Torus(2), Sphere(2), SO3(), Grass24()):
        for lam in (0.0, 1e-2):
            err, active = gradient_case(m, lam, seed)
            ok = err < 1e-5 and (lam == 0 or active > 0)
            out.append(_check(f"{m.tag} lam={lam} active={active}", err, 1e-5, ok))
    return out


def kernel_suite(pairs=100, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    s2 = Sphere(2)
    x, y = s2.random_point(rng, pairs), s2.random_point(rng, pairs)
    err = np.max(np.abs(kernel_series(s2, x, y, 1000) - kernel_closed_form(s2, x, y)))
    out.append(_check("sphere2 degree 1000", err, 1e-3))
    so3 = SO3()
    x, y = so3.random_point(rng, pairs), so3.random_point(rng, pairs)
    err = np.max(np.abs(kernel_series(so3, x, y, 500) - kernel_closed_form(so3, x, y)))
    out.append(_check("so3 degree 500", err, 1e-3))
    return out


def gamma_proxy_values(r_curve=4, degree=16, sizes=(64, 128, 256, 512)):
    """|D²(mu, gamma_* e_N) - D²(mu, gamma_* lambda)| for mu uniform on T²."""
    curve = torus_quadrature_curve(2, r_curve)
    m = curve.manifold
    cfg = ObjectiveConfig(uniform_measure(m, degree), kernel_weights(m, degree), 1.0, 0.0)
    exact = discrepancy_sq(line_coefficients(curve, degree), cfg)
    return [abs(discrepancy_sq(empirical_coefficients(discretize(curve, n), degree), cfg) - exact) for n in sizes]


def gamma_proxy_suite():
    vals = gamma_proxy_values()
    dec = all(b < a for a, b in zip(vals, vals[1:]))
    out = [_check(f"N={n}", v, np.inf) for n, v in zip((64, 128, 256, 512), vals)]
    out.append(_check("decreasing", 0.0, 1.0, dec))
    out.append(_check("final", vals[-1], 1e-4))
    return out


def run_suite(name, seed=0):
    if name == "gradient":
        checks = gradient_suite(seed)
    elif name == "kernel":
        checks = kernel_suite(seed=seed)
    elif name == "quadrature":
        checks = quadrature_suite()
    elif name == "gamma-proxy":
        checks = gamma_proxy_suite()
    else:
        raise ValueError(f"unknown suite {name!r}; choose from {SUITES}")
    return {"suite": name, "seed": seed, "passed": all(c["passed"] for c in checks), "checks": checks}


__all__ = ["SUITES", "run_suite", "gradient_case", "gamma_proxy_values"]
