import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from curvedis.curves import DiscreteCurve
from curvedis.errors import AliasingError, DegenerateInputError
from curvedis.manifolds import SO3, Grass24, Sphere, Torus
from curvedis.measures import (SpectralMeasure, curve_line_coefficients, empirical_coefficients, from_sphere_grid,
                               from_torus_image, gaussian_mixture_torus, read_pgm, read_sphere_grid, so3_doughnut,
                               sphere_grid_points, uniform_measure, write_pgm)
from curvedis.quadrature_curves import discretize, torus_quadrature_curve
from curvedis.spectral import basis_for, enumerate_frequencies, zero_position


def delta_at(mu, pos):
    e = np.zeros(len(mu))
    e[pos] = 1
    return np.array_equal(mu.coefficients, e)


# --- uniform ------------------------------------------------------------------------

def test_uniform_torus():
    mu = uniform_measure(Torus(2), 4)
    assert len(mu) == 81
    assert np.count_nonzero(mu.coefficients) == 1
    assert mu[(0, 0)] == 1


def test_uniform_grass_is_delta_at_trivial_frequency():
    mu = uniform_measure(Grass24(), 2)
    assert delta_at(mu, 0)
    assert enumerate_frequencies(Grass24(), 2)[0][:2] == (0, 0)


def test_uniform_sphere():
    assert delta_at(uniform_measure(Sphere(2), 3), 0)


def test_measure_validation():
    with pytest.raises(ValueError):
        SpectralMeasure(Torus(2), 1, np.zeros(9))
    with pytest.raises(ValueError):
        SpectralMeasure(Torus(2), 1, np.ones(8))
    c = np.zeros(9)
    c[4] = 1
    c[0] = 1.5
    with pytest.raises(ValueError):
        SpectralMeasure(Torus(2), 1, c)


def test_restrict_and_json_round_trip(rng):
    pix = rng.random((32, 32))
    mu = from_torus_image(pix, 6)
    small = mu.restrict(3)
    assert small.as_dict() == {k: mu[k] for k in enumerate_frequencies(Torus(2), 3)}
    back = SpectralMeasure.from_json(mu.to_json())
    assert np.array_equal(back.coefficients, mu.coefficients)
    with pytest.raises(ValueError):
        small.restrict(4)


# --- torus images ------------------------------------------------------------------

def test_constant_image_is_uniform():
    mu = from_torus_image(np.full((16, 16), 7.0), 3)
    assert np.allclose(mu.coefficients, uniform_measure(Torus(2), 3).coefficients, atol=1e-14)


def test_single_pixel_image():
    pix = np.zeros((4, 4))
    pix[0, 0] = 1
    mu = from_torus_image(pix, 1)
    assert np.allclose(mu.coefficients, 1.0, atol=1e-15)


def test_half_period_shift_negates_odd_frequencies(rng):
    pix = rng.random((16, 16))
    a = from_torus_image(pix, 3)
    b = from_torus_image(np.roll(pix, 8, axis=1), 3)
    for k in enumerate_frequencies(Torus(2), 3):
        sign = -1 if k[0] % 2 else 1
        assert b[k] == pytest.approx(sign * a[k], abs=1e-13)


def test_pixel_position_convention():
    # a bright pixel at row i, column j sits at x = (j/W, i/H)
    pix = np.zeros((8, 8))
    pix[2, 1] = 1.0
    mu = from_torus_image(pix, 2)
    x = np.array([1 / 8, 2 / 8])
    for k in enumerate_frequencies(Torus(2), 2):
        assert mu[k] == pytest.approx(np.exp(-2j * np.pi * np.dot(k, x)), abs=1e-13)


def test_image_invert():
    pix = np.full((8, 8), 200.0)
    pix[3, 3] = 0.0
    mu = from_torus_image(pix, 2, invert=True)
    assert mu[(1, 0)] == pytest.approx(np.exp(-2j * np.pi * 3 / 8), abs=1e-13)


def test_image_errors():
    with pytest.raises(DegenerateInputError):
        from_torus_image(np.zeros((8, 8)), 2)
    with pytest.raises(AliasingError):
        from_torus_image(np.ones((8, 8)), 4)


def test_pgm_round_trip(tmp_path, rng):
    pix = rng.integers(0, 256, (5, 7))
    p = tmp_path / "a.pgm"
    write_pgm(p, pix)
    assert np.array_equal(read_pgm(p), pix)
    q = tmp_path / "b.pgm"
    q.write_bytes(b"P5\n# comment\n3 2\n255\n" + bytes([0, 1, 2, 3, 4, 255]))
    assert read_pgm(q).tolist() == [[0, 1, 2], [3, 4, 255]]


# --- sphere grids ----------------------------------------------------------------------

def test_constant_grid_is_nearly_uniform():
    # the one degree grid runs over theta = 1..180 degrees, a one sided rule whose
    # zonal bias is about 8e-5 at degree 4; nonzonal terms vanish to round-off
    mu = from_sphere_grid(np.ones((180, 360)), 4)
    assert mu.coefficients[0] == 1
    zonal = [i for i, (k, l) in enumerate(enumerate_frequencies(Sphere(2), 4)) if l == k + 1]
    rest = np.delete(mu.coefficients, zonal)
    assert np.max(np.abs(rest[1:])) < 1e-12
    assert np.max(np.abs(mu.coefficients[zonal][1:])) < 1e-4


def test_zonal_round_trip():
    pts, _ = sphere_grid_points()
    amp = 0.4
    y10 = np.sqrt(3) * pts[..., 2]
    mu = from_sphere_grid(1 + amp * y10, 3)
    # int conj(Y) (1 + a Y) dsigma = a
    assert mu[(1, 2)].real == pytest.approx(amp, abs=1e-3)


def test_sphere_grid_errors(tmp_path):
    with pytest.raises(ValueError):
        from_sphere_grid(np.ones((10, 10)), 2)
    with pytest.raises(AliasingError):
        from_sphere_grid(np.ones((180, 360)), 181)
    with pytest.raises(DegenerateInputError):
        from_sphere_grid(np.zeros((180, 360)), 2)
    f = tmp_path / "g.txt"
    np.savetxt(f, np.ones((3, 3)))
    with pytest.raises(ValueError):
        read_sphere_grid(f)


# --- gaussian mixtures -----------------------------------------------------------------

def test_single_gaussian_is_real_and_even():
    mu = gaussian_mixture_torus([[0.0, 0.0]], 4, sharpness=200.0)
    c = mu.as_dict()
    for k, v in c.items():
        assert abs(v.imag) < 1e-14
        assert v == pytest.approx(c[(-k[0], -k[1])], abs=1e-14)
    assert mu[(0, 0)] == 1


def test_mixture_linearity():
    p, q = [0.1, -0.2], [-0.3, 0.25]
    kw = dict(sharpness=300.0, grid_n=64)
    both = gaussian_mixture_torus([p, q], 4, **kw)
    avg = (gaussian_mixture_torus([p], 4, **kw).coefficients + gaussian_mixture_torus([q], 4, **kw).coefficients) / 2
    assert np.allclose(both.coefficients, avg, atol=1e-12)


def test_mixture_errors():
    with pytest.raises(DegenerateInputError):
        gaussian_mixture_torus(np.zeros((0, 2)), 2)
    with pytest.raises(AliasingError):
        gaussian_mixture_torus([[0, 0]], 4, grid_n=8)


# --- SO(3) doughnut ----------------------------------------------------------------------

def test_doughnut_values():
    mu = so3_doughnut(4)
    assert mu[(0, 0, 0)] == 1
    assert mu[(1, 0, 0)] == pytest.approx(1.5, abs=1e-15)
    assert mu[(2, 0, 0)] == pytest.approx(0.0, abs=1e-15)
    assert mu[(4, 0, 0)] == pytest.approx(0.0, abs=1e-15)
    nz = [k for k, v in mu.as_dict().items() if v != 0]
    assert all(k[1] == 0 and k[2] == 0 for k in nz)


def test_doughnut_orthonormal_variant_matches_quadrature():
    # Haar integral over {beta <= pi/2} of conj of the sqrt(2k+1) D^k_00 functions
    from curvedis.spectral import gauss_legendre
    mu = so3_doughnut(3, "orthonormal")
    t, w = gauss_legendre(20)
    cb = 0.5 * (t + 1)  # cos(beta) in [0, 1]
    ww = 0.25 * w  # Haar density of cos(beta) is 1/2 on [-1, 1]
    from curvedis.spectral import legendre_p
    for k in range(4):
        val = 2 * np.sum(ww * np.sqrt(2 * k + 1) * legendre_p(k, cb))
        assert mu[(k, 0, 0)].real == pytest.approx(val, abs=1e-12)


# --- empirical and line coefficients -----------------------------------------------------------

def test_empirical_single_point():
    c = DiscreteCurve(Torus(2), [[0.3, 0.1]])
    nu = empirical_coefficients(c, 2)
    assert np.allclose(np.abs(nu.coefficients), 1.0)


def test_empirical_equispaced_circle():
    c = DiscreteCurve(Torus(1), np.arange(4)[:, None] / 4)
    nu = empirical_coefficients(c, 4)
    assert abs(nu[(1,)]) < 1e-15
    assert nu[(4,)] == pytest.approx(1.0, abs=1e-14)


def test_empirical_sphere_zero(rng):
    c = DiscreteCurve(Sphere(2), Sphere(2).random_point(rng, 7))
    assert empirical_coefficients(c, 3)[(0, 1)] == 1


def test_line_coefficients_of_torus_construction():
    curve = torus_quadrature_curve(2, 2)
    # 18 grid edges of length 1/3; sampling hits every corner when 18 | N
    dc = discretize(curve, 18 * 4)
    nu = curve_line_coefficients(dc, 2)
    z = zero_position(Torus(2), 2)
    dev = np.abs(nu.coefficients - np.eye(len(nu))[z])
    assert dev.max() < 1e-12


def test_great_circle_has_no_odd_harmonics():
    t = 2 * np.pi * np.arange(40) / 40
    c = DiscreteCurve(Sphere(2), np.stack([np.cos(t), np.sin(t) * 0.6, np.sin(t) * 0.8], axis=1))
    nu = curve_line_coefficients(c, 5)
    for (k, l), v in nu.as_dict().items():
        if k % 2 == 1:
            assert abs(v) < 1e-10


def test_line_coefficients_reject_repeated_points():
    with pytest.raises(DegenerateInputError):
        curve_line_coefficients(DiscreteCurve(Torus(2), [[0.1, 0.1], [0.1, 0.1], [0.4, 0.2]]), 2)


# --- invariants --------------------------------------------------------------------------------

@given(seed=st.integers(0, 2 ** 31 - 1))
def test_torus_conjugate_symmetry(seed):
    rng = np.random.default_rng(seed)
    mu = from_torus_image(rng.random((12, 10)), 3)
    d = mu.as_dict()
    for k, v in d.items():
        assert d[(-k[0], -k[1])] == np.conj(v)


@given(seed=st.integers(0, 2 ** 31 - 1))
def test_zero_coefficient_is_one(seed):
    rng = np.random.default_rng(seed)
    for m in (Torus(2), Sphere(2), SO3(), Grass24()):
        c = DiscreteCurve(m, m.random_point(rng, 5))
        nu = empirical_coefficients(c, 2)
        assert nu.coefficients[zero_position(m, 2)] == 1
    assert from_torus_image(rng.random((8, 8)) + 0.1, 2)[(0, 0)] == 1


@given(seed=st.integers(0, 2 ** 31 - 1))
def test_empirical_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    m = Sphere(2)
    pts = m.random_point(rng, 9)
    a = empirical_coefficients(DiscreteCurve(m, pts), 3).coefficients
    b = empirical_coefficients(DiscreteCurve(m, pts[rng.permutation(9)]), 3).coefficients
    assert np.allclose(a, b, atol=1e-14)


def test_empirical_matches_basis_analysis(rng):
    m = SO3()
    pts = m.random_point(rng, 6)
    nu = empirical_coefficients(DiscreteCurve(m, pts), 2)
    direct = np.conj(basis_for(m).evaluate(pts, 2)).mean(axis=0)
    assert np.allclose(nu.coefficients, direct, atol=1e-13)
