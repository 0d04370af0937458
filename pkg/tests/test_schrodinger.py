import math

import numpy as np
import pytest
from scipy.integrate import simpson

from semigibbs import schrodinger as sq
from semigibbs.errors import ConfinementError
from semigibbs.operators import eigh, gibbs_expectation

HARMONIC = sq.PotentialSpec.preset("harmonic")
DOUBLE_WELL = sq.PotentialSpec.preset("double_well")
GRID = sq.Grid1D(8.0, 512)
HBARS = [0.4, 0.2, 0.1, 0.05]


def decreasing(v):
    return all(b < a for a, b in zip(v, v[1:]))


@pytest.fixture(scope="module")
def harmonic_spectra():
    return {h: eigh(sq.build_hamiltonian(h, HARMONIC, GRID)) for h in HBARS}


# -- grids and potentials --------------------------------------------------------------

def test_grid_invariants():
    g = sq.Grid1D(5.0, 128)
    np.testing.assert_allclose(g.x, -g.x[::-1], atol=1e-14)
    assert g.dx == pytest.approx(10 / 128)
    for bad in (127, 64):
        with pytest.raises(ValueError):
            sq.Grid1D(5.0, bad)


def test_potential_validation():
    assert DOUBLE_WELL.minimum == pytest.approx(0.0, abs=1e-14)
    assert DOUBLE_WELL.argmin == pytest.approx((-1.0, 1.0))
    assert sq.PotentialSpec.preset("shifted_quadratic").argmin == pytest.approx((1.0,))
    for coeffs in [(3.0,), (0.0, 1.0, 0.0, 1.0), (0.0, 0.0, -1.0)]:
        with pytest.raises(ValueError):
            sq.PotentialSpec(coeffs)


def test_smoothed_coefficients():
    # E(q+u)^4 = q^4 + 6 q^2 s + 3 s^2 with s = hbar/2
    h = 0.3
    s = h / 2
    q = np.linspace(-2, 2, 7)
    ref = (q**4 + 6 * q**2 * s + 3 * s**2) - 2 * (q**2 + s) + 1
    np.testing.assert_allclose(DOUBLE_WELL.smoothed(h, q), ref, atol=1e-13)


def test_confinement_check():
    with pytest.raises(ConfinementError):
        sq.build_hamiltonian(0.1, HARMONIC, sq.Grid1D(4.0, 256))


# -- Hamiltonian ---------------------------------------------------------------------

def test_hamiltonian_hermitian():
    H = sq.build_hamiltonian(0.2, DOUBLE_WELL, GRID)
    assert np.max(np.abs(H - H.T)) <= 1e-12


def test_harmonic_eigenvalues():
    lam = np.linalg.eigvalsh(sq.build_hamiltonian(0.1, HARMONIC, GRID))
    np.testing.assert_allclose(lam[:5], [0.1, 0.3, 0.5, 0.7, 0.9], atol=1e-8)


def test_constant_shift():
    shifted = sq.PotentialSpec((2.5, 0.0, 1.0))
    a = np.linalg.eigvalsh(sq.build_hamiltonian(0.2, HARMONIC, GRID))
    b = np.linalg.eigvalsh(sq.build_hamiltonian(0.2, shifted, GRID))
    np.testing.assert_allclose(b - a, 2.5, atol=1e-10)


def test_finite_difference_cross_check():
    # three-point Laplacian converges to the pseudospectral ground state
    h, g = 0.2, sq.Grid1D(8.0, 1024)
    x = g.x
    lap = (np.diag(np.full(g.M - 1, 1.0), 1) + np.diag(np.full(g.M - 1, 1.0), -1) - 2 * np.eye(g.M)) / g.dx**2
    fd = np.linalg.eigvalsh(-(h**2) * lap + np.diag(x**2))[0]
    # second-order scheme: error ~ hbar^2 dx^2 <p^4> / 12
    assert fd == pytest.approx(np.linalg.eigvalsh(sq.build_hamiltonian(h, HARMONIC, g))[0], abs=1e-4)


# -- coherent states and lower symbols --------------------------------------------------

@pytest.mark.parametrize("q,p", [(0.0, 0.0), (1.3, -0.7), (-2.0, 2.5)])
def test_coherent_state_moments(q, p):
    h = 0.1
    v = sq.schrodinger_coherent(h, sq.PhasePoint(q, p), GRID)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
    assert np.real(np.vdot(v, GRID.x * v)) == pytest.approx(q, abs=1e-9)
    assert sq.momentum_expectation(h, v, GRID) == pytest.approx(p, abs=1e-8)


def test_coherent_state_rejects_edge():
    with pytest.raises(ConfinementError):
        sq.schrodinger_coherent(0.1, sq.PhasePoint(5.0, 0.0), GRID)


def test_lower_symbol_harmonic():
    h = 0.2
    H = sq.build_hamiltonian(h, HARMONIC, GRID)
    for q, p in [(0.0, 0.0), (1.0, 0.5), (-2.0, -1.5)]:
        assert sq.lower_symbol_line(h, H, sq.PhasePoint(q, p), GRID) == pytest.approx(p * p + q * q + h, abs=1e-7)


def test_lower_symbol_matches_exact_and_converges():
    pts = [(-1.5, 0.3), (-0.5, 0.0), (0.0, 1.0), (0.8, -0.4), (1.7, 0.2)]
    errs = []
    for h in HBARS:
        H = sq.build_hamiltonian(h, DOUBLE_WELL, GRID)
        row = []
        for q, p in pts:
            val = sq.lower_symbol_line(h, H, sq.PhasePoint(q, p), GRID)
            assert val == pytest.approx(sq.lower_symbol_exact(h, DOUBLE_WELL, q, p), abs=1e-8)
            assert val >= DOUBLE_WELL.minimum
            row.append(abs(val - (p * p + DOUBLE_WELL(q))))
        errs.append(row)
    for k in range(len(pts)):
        assert decreasing([e[k] for e in errs])


# -- quantization ----------------------------------------------------------------------

def test_quantize_constant_and_gaussian():
    g = sq.Grid1D(8.0, 128)
    np.testing.assert_allclose(sq.berezin_quantize_position(0.2, np.ones_like, g), np.eye(128), atol=1e-13)
    for h in (0.05, 0.2, 0.4):
        d = np.diag(sq.berezin_quantize_position(h, lambda x: np.exp(-x**2), g))
        np.testing.assert_allclose(d, np.exp(-g.x**2 / (1 + h)) / math.sqrt(1 + h), atol=1e-12)


def test_position_quantization_matches_phase_space_oracle():
    g, h = sq.Grid1D(8.0, 128), 0.2
    f = lambda x: np.exp(-(x - 0.5) ** 2) * (1 + x)  # noqa: E731
    fast = sq.berezin_quantize_position(h, f, g)
    slow = sq.berezin_quantize_phase_space(h, lambda q, p: f(q), g)
    # the oracle only places coherent states in [-L/2, L/2]; compare away from that edge
    bulk = np.abs(g.x) < 3
    assert np.max(np.abs((fast - slow)[np.ix_(bulk, bulk)])) <= 1e-6
    gauss = lambda x: np.exp(-x**2)  # noqa: E731
    full = sq.berezin_quantize_position(h, gauss, g) - sq.berezin_quantize_phase_space(h, lambda q, p: gauss(q), g)
    assert np.max(np.abs(full)) <= 1e-6


def test_phase_space_oracle_resolves_identity_in_bulk():
    g, h = sq.Grid1D(8.0, 128), 0.2
    one = sq.berezin_quantize_phase_space(h, lambda q, p: np.ones_like(q), g)
    bulk = np.abs(g.x) < 3
    assert np.max(np.abs((one - np.eye(128))[np.ix_(bulk, bulk)])) <= 1e-3


def test_gibbs_expectation_within_range():
    h = 0.1
    f = lambda x: np.sin(x) * np.exp(-(x**2) / 4)  # noqa: E731
    spec = eigh(sq.build_hamiltonian(h, DOUBLE_WELL, GRID))
    val = gibbs_expectation(spec, 1.0, sq.berezin_quantize_position(h, f, GRID))
    x = np.linspace(-8, 8, 20001)
    assert f(x).min() - 1e-9 <= val <= f(x).max() + 1e-9


# -- partition functions ------------------------------------------------------------------

def test_classical_partition():
    for beta in (0.5, 1.0, 2.0):
        assert sq.classical_partition_plane(HARMONIC, beta) == pytest.approx(math.pi / beta, rel=1e-12)
    q = np.linspace(-6, 6, 1_000_001)
    ref = math.sqrt(math.pi) * simpson(np.exp(-DOUBLE_WELL(q)), x=q)
    assert sq.classical_partition_plane(DOUBLE_WELL, 1.0) == pytest.approx(ref, abs=1e-9)


def test_harmonic_partition_closed_form(harmonic_spectra):
    diffs = []
    for h in HBARS:
        part = sq.quantum_partition_line(harmonic_spectra[h], 1.0, h, HARMONIC)
        val = 2 * math.pi * h * part.z
        ref = 2 * math.pi * h * math.exp(-h) / (1 - math.exp(-2 * h))
        assert val == pytest.approx(ref, abs=1e-7)
        assert part.truncation_bound <= 1e-10
        diffs.append(abs(val - math.pi))
    assert decreasing(diffs)


def test_harmonic_sandwich_closed_form(harmonic_spectra):
    h, beta = 0.1, 1.0
    s = sq.partition_sandwich_line(h, HARMONIC, beta, GRID, H=harmonic_spectra[h])
    assert s.lower == pytest.approx(math.exp(-beta * h) * math.pi / beta, rel=1e-10)
    assert s.mid == pytest.approx(2 * math.pi * h * math.exp(-beta * h) / (1 - math.exp(-2 * beta * h)), rel=1e-9)
    assert s.upper == pytest.approx(math.pi / beta, rel=1e-12)
    assert s.ordered()
    assert s.mid / s.upper == pytest.approx(beta * h / math.sinh(beta * h), abs=1e-7)


def test_double_well_sandwich():
    widths = []
    for h in HBARS:
        s = sq.partition_sandwich_line(h, DOUBLE_WELL, 1.0, GRID)
        assert s.ordered(1e-8)
        widths.append(s.log_width)
    assert decreasing(widths)


def test_sandwich_small_beta_positive():
    s = sq.partition_sandwich_line(0.2, DOUBLE_WELL, 0.05, sq.Grid1D(8.0, 512))
    assert s.ordered(1e-8) and 0 < s.mid / s.upper <= 1


# -- classical limit ----------------------------------------------------------------------

def test_classical_gibbs_zero_observable(harmonic_spectra):
    rows = sq.classical_limit_gibbs_line(HBARS, HARMONIC, 1.0, np.zeros_like, GRID, spectra=harmonic_spectra)
    assert all(r.diff == 0.0 for r in rows)


def test_classical_limit_harmonic(harmonic_spectra):
    f = lambda q: np.exp(-q * q)  # noqa: E731
    rows = sq.classical_limit_gibbs_line(HBARS, HARMONIC, 1.0, f, GRID, spectra=harmonic_spectra)
    # classical side in closed form: int e^{-q^2} e^{-q^2} / int e^{-q^2} = 1/sqrt 2
    assert rows[0].classical == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    assert decreasing([r.diff for r in rows])


def test_classical_limit_double_well():
    f = lambda q: np.exp(-((q - 1) ** 2))  # noqa: E731
    rows = sq.classical_limit_gibbs_line(HBARS, DOUBLE_WELL, 1.0, f, GRID)
    diffs = [r.diff for r in rows]
    assert decreasing(diffs) and diffs[-1] < diffs[0] / 4


def test_classical_limit_rejects_edge_mass():
    with pytest.raises(ValueError):
        sq.classical_limit_gibbs_line([0.4], HARMONIC, 1.0, np.ones_like, GRID)


def test_grid_doubling_self_consistency():
    h, f = 0.4, (lambda q: np.exp(-((q - 1) ** 2)))
    out = []
    for g in (sq.Grid1D(7.0, 448), sq.Grid1D(14.0, 896)):
        s = sq.partition_sandwich_line(h, DOUBLE_WELL, 1.0, g)
        r = sq.classical_limit_gibbs_line([h], DOUBLE_WELL, 1.0, f, g)[0]
        out.append((s.log_lower, s.log_mid, s.log_upper, r.quantum))
    np.testing.assert_allclose(out[0], out[1], atol=1e-7)
