import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semigibbs import sphere as sp
from semigibbs.errors import GridOrderError
from semigibbs.polynomials import (
    Polynomial, X, Y, Z, format_monomial, parse_monomial, poisson_bracket, random_polynomial,
)

ONE = Polynomial.constant(1.0)
seeds = st.integers(0, 2**32 - 1)


def random_angles(rng, n):
    return np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * np.pi, n)


# -- polynomials ------------------------------------------------------------------

def test_monomial_keys_round_trip():
    assert parse_monomial("x2y") == (2, 1, 0)
    assert parse_monomial("1") == (0, 0, 0)
    assert parse_monomial("zxz") == (1, 0, 2)
    for exp in [(0, 0, 0), (1, 0, 0), (2, 1, 3), (0, 0, 12)]:
        assert parse_monomial(format_monomial(exp)) == exp
    with pytest.raises(ValueError):
        parse_monomial("w2")


def test_polynomial_from_dict_and_evaluation():
    p = Polynomial.from_dict({"x2y": 2.0, "z": -1.0, "1": 0.5})
    assert p.degree == 3
    assert p.at((0.3, -0.4, 0.5)) == pytest.approx(2 * 0.09 * -0.4 - 0.5 + 0.5)
    assert Polynomial.from_dict(p.to_dict()) == p


def test_polynomial_evaluation_on_sphere_matches_angles():
    p = X * X * Y - 2 * Z + 1
    th, ph = 0.7, 2.1
    x, y, z = math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)
    assert p.at((x, y, z)) == pytest.approx(x * x * y - 2 * z + 1, abs=1e-15)


def test_poisson_bracket_su2():
    assert poisson_bracket(X, Y) == Z
    assert poisson_bracket(Y, Z) == X
    assert poisson_bracket(Z, X) == Y
    jacobi = (poisson_bracket(X, poisson_bracket(Y, Z)) + poisson_bracket(Y, poisson_bracket(Z, X))
              + poisson_bracket(Z, poisson_bracket(X, Y)))
    assert jacobi.is_zero()


def test_poisson_bracket_matches_finite_differences():
    # {f, g} = (1/sin t)(df/dt dg/dphi - df/dphi dg/dt) reproduces {x, y} = z for the su(2) bracket
    def xy(t, p):
        return math.sin(t) * math.cos(p), math.sin(t) * math.sin(p)

    h = 1e-5
    for t, p in [(0.4, 0.3), (1.2, 2.5), (2.6, 4.0)]:
        dxt = (xy(t + h, p)[0] - xy(t - h, p)[0]) / (2 * h)
        dxp = (xy(t, p + h)[0] - xy(t, p - h)[0]) / (2 * h)
        dyt = (xy(t + h, p)[1] - xy(t - h, p)[1]) / (2 * h)
        dyp = (xy(t, p + h)[1] - xy(t, p - h)[1]) / (2 * h)
        assert (dxt * dyp - dxp * dyt) / math.sin(t) == pytest.approx(math.cos(t), abs=1e-8)


@given(seeds)
@settings(max_examples=30, deadline=None)
def test_poisson_bracket_algebra(seed):
    rng = np.random.default_rng(seed)
    f, g, h = (random_polynomial(rng, 3) for _ in range(3))
    pts = rng.normal(size=(5, 3))

    def vanishes(p):
        return all(abs(p.at(r)) <= 1e-10 * (1 + np.abs(r).max()) ** 10 for r in pts)

    assert vanishes(poisson_bracket(f, f))
    assert vanishes(poisson_bracket(f, g) + poisson_bracket(g, f))
    assert vanishes(poisson_bracket(f, poisson_bracket(g, h)) + poisson_bracket(g, poisson_bracket(h, f))
                    + poisson_bracket(h, poisson_bracket(f, g)))
    assert vanishes(poisson_bracket(f, g * h) - (poisson_bracket(f, g) * h + g * poisson_bracket(f, h)))


# -- grids --------------------------------------------------------------------------

def test_grid_weights_and_moments():
    g = sp.make_grid(10, 21)
    assert g.weights.sum() == pytest.approx(4 * np.pi, abs=1e-12)
    assert sp.integrate(ONE, g) == pytest.approx(4 * np.pi, abs=1e-12)
    assert abs(sp.integrate(Z, g)) <= 1e-14
    assert sp.integrate(Z * Z, g) == pytest.approx(4 * np.pi / 3, abs=1e-13)


def test_grid_exact_for_powers_of_z():
    n = 8
    g = sp.make_grid(n, 3)
    for p in range(2 * n):
        exact = 4 * np.pi / (p + 1) if p % 2 == 0 else 0.0
        assert g.integrate(g.points()[2] ** p) == pytest.approx(exact, abs=1e-12)


# -- coherent states --------------------------------------------------------------------

def test_coherent_state_poles():
    v = sp.spin_coherent(6, 0.0, 1.3)
    np.testing.assert_allclose(v, np.eye(7)[0], atol=1e-15)
    w = sp.spin_coherent(6, np.pi, 0.7)
    assert abs(abs(w[-1]) - 1) <= 1e-15 and np.max(np.abs(w[:-1])) <= 1e-15


@pytest.mark.parametrize("N", [1, 5, 20])
def test_coherent_overlap(N):
    rng = np.random.default_rng(N)
    th, ph = random_angles(rng, 10)
    for i in range(5):
        a = sp.spin_coherent(N, th[2 * i], ph[2 * i])
        b = sp.spin_coherent(N, th[2 * i + 1], ph[2 * i + 1])
        assert np.linalg.norm(a) == pytest.approx(1, abs=1e-12)
        ua = np.array([math.sin(th[2 * i]) * math.cos(ph[2 * i]), math.sin(th[2 * i]) * math.sin(ph[2 * i]), math.cos(th[2 * i])])
        ub = np.array([math.sin(th[2 * i + 1]) * math.cos(ph[2 * i + 1]),
                       math.sin(th[2 * i + 1]) * math.sin(ph[2 * i + 1]), math.cos(th[2 * i + 1])])
        cos_half_sq = (1 + ua @ ub) / 2
        assert abs(np.vdot(a, b)) ** 2 == pytest.approx(cos_half_sq**N, abs=1e-10)


def test_coherent_overlap_decreases_with_N():
    vals = [abs(np.vdot(sp.spin_coherent(N, 0.3, 0.0), sp.spin_coherent(N, 0.9, 1.0))) ** 2 for N in range(1, 30)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


# -- Berezin quantization -------------------------------------------------------------------

@pytest.mark.parametrize("N", [1, 2, 7, 32])
def test_quantization_identities(N):
    assert np.max(np.abs(sp.berezin_quantize_sphere(N, ONE) - np.eye(N + 1))) <= 1e-10
    s1, s2, s3 = sp.spin_operators(N)
    assert np.max(np.abs(sp.berezin_quantize_sphere(N, (N + 2) * Z) - s3)) <= 1e-9
    assert np.max(np.abs(sp.berezin_quantize_sphere(N, (N + 2) * X) - s1)) <= 1e-9
    assert np.max(np.abs(sp.berezin_quantize_sphere(N, (N + 2) * Y) - s2)) <= 1e-9
    # spin-1/2 normalisation S3/2 arises from the factor (N+2)/2
    assert np.max(np.abs(sp.berezin_quantize_sphere(N, (N + 2) / 2 * Z) - s3 / 2)) <= 1e-9


@pytest.mark.parametrize("N", [3, 16, 64])
def test_trace_formula(N):
    for f in [ONE, Z, Z * Z, X * X * Y, X**4 - Y * Z]:
        g = sp.make_grid(*sp.required_grid(N, f.degree))
        tr = np.trace(sp.berezin_quantize_sphere(N, f)).real
        assert tr == pytest.approx((N + 1) / (4 * np.pi) * sp.integrate(f, g), abs=1e-9)


@given(seeds, st.integers(1, 20))
@settings(max_examples=30, deadline=None)
def test_quantization_positive_and_bounded(seed, N):
    rng = np.random.default_rng(seed)
    p = random_polynomial(rng, 4)
    f = p * p  # nonnegative
    g = sp.make_grid(*sp.required_grid(N, f.degree))
    q = sp.berezin_quantize_sphere(N, f, g)
    lam = np.linalg.eigvalsh(q)
    assert lam.min() >= -1e-10
    assert np.max(np.abs(lam)) <= np.max(np.abs(sp.sample(f, g))) + 1e-9


def test_quantization_is_hermitian_and_linear():
    rng = np.random.default_rng(1)
    f, g = random_polynomial(rng, 3), random_polynomial(rng, 3)
    qf, qg = sp.berezin_quantize_sphere(9, f), sp.berezin_quantize_sphere(9, g)
    np.testing.assert_allclose(qf, qf.conj().T, atol=1e-14)
    np.testing.assert_allclose(sp.berezin_quantize_sphere(9, 2 * f - g), 2 * qf - qg, atol=1e-12)


def test_grid_order_error_for_coarse_grid():
    with pytest.raises(GridOrderError):
        sp.berezin_quantize_sphere(8, Z * Z, sp.make_grid(4, 8))


def test_sampled_function_warns():
    g = sp.make_grid(*sp.required_grid(4, 2))
    with pytest.warns(UserWarning):
        q = sp.berezin_quantize_sphere(4, lambda x, y, z: z * z, g)
    np.testing.assert_allclose(q, sp.berezin_quantize_sphere(4, Z * Z), atol=1e-12)


# -- lower symbols ---------------------------------------------------------------------

def test_lower_symbol_examples():
    N = 7
    _, _, s3 = sp.spin_operators(N)
    assert sp.lower_symbol_sphere(N, np.eye(N + 1), 1.0, 2.0) == pytest.approx(1.0)
    assert sp.lower_symbol_sphere(N, s3, 0.0, 0.0) == pytest.approx(N)
    from scipy.special import comb
    for th in (0.3, 1.4, 2.8):
        m = np.arange(N + 1)
        oracle = np.sum((N - 2 * m) * comb(N, m) * math.cos(th / 2) ** (2 * (N - m)) * math.sin(th / 2) ** (2 * m))
        assert sp.lower_symbol_sphere(N, s3, th, 0.4) == pytest.approx(oracle, abs=1e-12)
        assert oracle == pytest.approx(N * math.cos(th), abs=1e-12)


def test_lower_symbol_grid_matches_pointwise():
    N = 6
    a = sp.berezin_quantize_sphere(N, X * Y + Z**3)
    g = sp.make_grid(5, 7)
    vals = sp.lower_symbol_grid(a, g)
    th, ph = g.theta, g.phi
    for i in (0, 2, 4):
        for k in (0, 3, 6):
            assert vals[i, k] == pytest.approx(sp.lower_symbol_sphere(N, a, th[i], ph[k]), abs=1e-13)


# -- classical Gibbs and KMS -------------------------------------------------------------

def test_classical_gibbs_examples():
    assert sp.classical_gibbs_sphere(X * Y - Z, 1.3, ONE) == pytest.approx(1.0, abs=1e-12)
    for beta in (0.5, 1.0, 2.0):
        ref = 1 / math.tanh(beta) - 1 / beta
        assert sp.classical_gibbs_sphere(-1 * Z, beta, Z) == pytest.approx(ref, abs=1e-10)
    g = sp.make_grid(20, 41)
    f = Z * Z + X
    assert sp.classical_gibbs_sphere(X * Z, 1e-9, f) == pytest.approx(sp.integrate(f, g) / (4 * np.pi), abs=1e-7)


def test_kms_examples():
    assert sp.classical_kms_residual(Z, 1.0, X, Y) <= 1e-8
    assert sp.classical_kms_residual(X * X - Z, 0.7, Y, Y) <= 1e-10
    chk = sp.classical_kms_check(Z * Z + X, 1.5, Y, ONE)
    assert abs(chk.lhs) <= 1e-12 and abs(chk.rhs) <= 1e-12


def test_kms_opposite_convention_fails():
    chk = sp.classical_kms_check(Z, 1.0, X, Y)
    assert chk.residual <= 1e-8
    assert chk.flipped_residual > 1e-3


@given(seeds, st.sampled_from([0.5, 1.0, 2.0]))
@settings(max_examples=15, deadline=None)
def test_kms_random_triples(seed, beta):
    rng = np.random.default_rng(seed)
    h, f, g = (random_polynomial(rng, 3) for _ in range(3))
    assert sp.classical_kms_residual(h, beta, f, g) <= 1e-8


# -- sandwich and free energies -------------------------------------------------------------

def test_sandwich_zero_hamiltonian():
    s = sp.berezin_lieb_sphere(5, Polynomial.constant(0.0), 1.0)
    for v in (s.lower, s.mid, s.upper):
        assert v == pytest.approx(6.0, rel=1e-12)


def test_sandwich_minus_z_closed_form():
    N, beta = 8, 1.0
    s = sp.berezin_lieb_sphere(N, -1 * Z, beta)
    assert s.ordered(1e-9)
    m = np.arange(N + 1)
    assert s.log_mid == pytest.approx(math.log(np.sum(np.exp(beta * N * (N - 2 * m) / (N + 2)))), abs=1e-12)
    # upper: (N+1)/4pi * int e^{beta N z} = (N+1) sinh(beta N)/(beta N)
    assert s.log_upper == pytest.approx(math.log((N + 1) * math.sinh(beta * N) / (beta * N)), abs=1e-10)


@pytest.mark.parametrize("h0", [-1 * Z, X * X - Z])
@pytest.mark.parametrize("beta", [0.5, 2.0])
def test_sandwich_ordered(h0, beta):
    for N in (8, 16):
        assert sp.berezin_lieb_sphere(N, h0, beta).ordered(1e-9)


def test_large_spin_free_energy_closed_form():
    for N in (4, 8, 16):
        assert sp.large_spin_free_energy(N, -1 * Z, 1.0) == pytest.approx(sp.free_energy_minus_z(N, 1.0), abs=1e-12)
    vals = [abs(sp.free_energy_minus_z(N, 1.0) + 1) for N in (8, 16, 32, 64)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_sphere_infimum():
    assert sp.sphere_infimum(-1 * Z) == pytest.approx(-1.0, abs=1e-12)
    assert sp.sphere_infimum(X * X - Z) == pytest.approx(-1.0, abs=1e-9)
    assert sp.sphere_infimum(-1 * (X * X) - 0.5 * Z) == pytest.approx(-1.0625, abs=1e-9)


def test_dgr_defect_closed_forms():
    for N in (4, 8, 16):
        assert sp.dgr_defect(N, X, Y) == pytest.approx(N * (3 * N + 2) / (N + 2) ** 2, abs=1e-9)
        assert sp.dgr_defect(N, X, Y, bracket_scale=-2.0) == pytest.approx(4 * N / (N + 2) ** 2, abs=1e-9)
