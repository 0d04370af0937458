"""Berezin quantization of the two-sphere with spin coherent states.

Operators live on the symmetric sector Sym^N(C^2) in the Dicke basis
``|m>``, m = number of down spins, so that ``S3 = diag(N - 2m)``.

Quadrature is Gauss-Legendre in cos(theta) times a uniform periodic rule in
phi.  With the orders returned by :func:`required_grid`, every Berezin
integral of a polynomial is exact up to rounding.  Because the coherent
state components factor as ``a_m(theta) exp(i m phi)``, Berezin integrals and
lower symbols reduce to per-ring Fourier sums and never materialize the
(nodes x (N+1)) coherent-state matrix.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from .errors import ConvergenceError, GridOrderError
from .operators import hermitian, log_partition
from .polynomials import Polynomial, poisson_bracket

SphereFunction = Union[Polynomial, Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]]


@dataclass(frozen=True)
class SphereGrid:
    n_theta: int
    n_phi: int
    cos_theta: np.ndarray      # Gauss-Legendre abscissae, ascending
    theta_weights: np.ndarray  # Gauss-Legendre weights (sum 2)

    @property
    def theta(self) -> np.ndarray:
        return np.arccos(self.cos_theta)

    @property
    def phi(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n_phi) / self.n_phi

    @property
    def weights(self) -> np.ndarray:
        """Node weights, shape (n_theta, n_phi), summing to 4 pi."""
        return np.outer(self.theta_weights, np.full(self.n_phi, 2 * np.pi / self.n_phi))

    def points(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        ct = self.cos_theta[:, None]
        st = np.sqrt(1.0 - ct**2)
        phi = self.phi[None, :]
        return st * np.cos(phi), st * np.sin(phi), np.broadcast_to(ct, (self.n_theta, self.n_phi))

    def integrate(self, values) -> float:
        return float(np.sum(self.weights * values))

    def refined(self) -> "SphereGrid":
        return make_grid(2 * self.n_theta, 2 * self.n_phi)


def make_grid(n_theta: int, n_phi: int) -> SphereGrid:
    if n_theta < 2 or n_phi < 2:
        raise ValueError("n_theta and n_phi must be at least 2")
    nodes, weights = np.polynomial.legendre.leggauss(n_theta)
    return SphereGrid(n_theta, n_phi, nodes, weights)


def required_grid(N: int, degree: int) -> tuple[int, int]:
    """Smallest (n_theta, n_phi) for which Q^B_{1/N} of a degree-``degree`` polynomial is exact."""
    return N + math.ceil(degree / 2) + 1, 2 * N + degree + 1


def sample(f: SphereFunction, grid: SphereGrid) -> np.ndarray:
    x, y, z = grid.points()
    if isinstance(f, Polynomial):
        return np.broadcast_to(np.asarray(f(x, y, z), dtype=float), x.shape)
    if isinstance(f, (int, float)):
        return np.full(x.shape, float(f))
    if isinstance(f, np.ndarray):
        if f.shape != x.shape:
            raise ValueError(f"sampled values have shape {f.shape}, grid is {x.shape}")
        return f.astype(float)
    return np.broadcast_to(np.asarray(f(x, y, z), dtype=float), x.shape)


# -- spin coherent states ------------------------------------------------------

def _log_binom(N: int) -> np.ndarray:
    m = np.arange(N + 1)
    return gammaln(N + 1) - gammaln(m + 1) - gammaln(N - m + 1)


def spin_coherent(N: int, theta: float, phi: float) -> np.ndarray:
    """Dicke components of ``(cos(t/2)|up> + e^{i phi} sin(t/2)|down>)^{(x)N}``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    m = np.arange(N + 1)
    with np.errstate(divide="ignore"):
        log_mag = 0.5 * _log_binom(N) + xlogy(N - m, abs(c)) + xlogy(m, abs(s))
    mag = np.exp(log_mag)
    sign = np.where(N - m > 0, np.sign(c), 1.0) ** (N - m) * np.where(m > 0, np.sign(s), 1.0) ** m
    return mag * sign * np.exp(1j * m * phi)


def _ring_amplitudes(N: int, cos_theta: np.ndarray) -> np.ndarray:
    """``a_m(theta)`` for each ring, shape (n_theta, N+1); nodes are interior."""
    half_c = np.sqrt((1 + cos_theta) / 2)[:, None]
    half_s = np.sqrt((1 - cos_theta) / 2)[:, None]
    m = np.arange(N + 1)[None, :]
    return np.exp(0.5 * _log_binom(N)[None, :] + (N - m) * np.log(half_c) + m * np.log(half_s))


def spin_operators(N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``S_mu = sum_i sigma_mu(i)`` restricted to the symmetric sector, Dicke basis."""
    m = np.arange(N + 1)
    s3 = np.diag((N - 2 * m).astype(float))
    lower = np.sqrt((m[:-1] + 1.0) * (N - m[:-1]))  # <m+1| sum sigma_- |m>
    s_minus = np.diag(lower, -1)
    s1 = s_minus + s_minus.T
    s2 = -1j * (s_minus.T - s_minus)
    return s1.astype(complex), s2, s3.astype(complex)


# -- Berezin quantization --------------------------------------------------------

def _check_order(N: int, f: SphereFunction, grid: SphereGrid) -> None:
    if isinstance(f, Polynomial):
        nt, nph = required_grid(N, f.degree)
        if grid.n_theta < nt or grid.n_phi < nph:
            raise GridOrderError(
                f"grid ({grid.n_theta}, {grid.n_phi}) too coarse for N={N}, degree {f.degree}: "
                f"need n_theta >= {nt}, n_phi >= {nph}")
    elif not isinstance(f, (int, float)):
        warnings.warn("sampled function: Berezin integral is a quadrature approximation, "
                      "exactness only holds for polynomials", stacklevel=3)


def _default_grid(N: int, f: SphereFunction) -> SphereGrid:
    degree = f.degree if isinstance(f, Polynomial) else 0
    return make_grid(*required_grid(N, degree))


def berezin_quantize_sphere(N: int, f: SphereFunction, grid: SphereGrid | None = None) -> np.ndarray:
    """``(N+1)/(4 pi) * int f(Omega) |Omega><Omega| dOmega`` as an (N+1)x(N+1) matrix."""
    if grid is None:
        grid = _default_grid(N, f)
    _check_order(N, f, grid)
    values = sample(f, grid)
    # fourier[i, d] = int_0^{2pi} f(theta_i, phi) e^{i d phi} dphi for d = m - n
    fourier = 2 * np.pi * np.fft.ifft(values, axis=1)
    amps = _ring_amplitudes(N, grid.cos_theta)
    m = np.arange(N + 1)
    offsets = (m[:, None] - m[None, :]) % grid.n_phi
    q = np.zeros((N + 1, N + 1), dtype=complex)
    for i in range(grid.n_theta):
        q += grid.theta_weights[i] * np.outer(amps[i], amps[i]) * fourier[i][offsets]
    return hermitian((N + 1) / (4 * np.pi) * q)


def lower_symbol_sphere(N: int, a, theta: float, phi: float) -> float:
    """``<Omega|A|Omega>`` at a single point."""
    a = np.asarray(a)
    if a.shape != (N + 1, N + 1):
        raise ValueError(f"operator must be {N + 1}x{N + 1}")
    psi = spin_coherent(N, theta, phi)
    return float(np.real(psi.conj() @ a @ psi))


def lower_symbol_grid(a, grid: SphereGrid) -> np.ndarray:
    """``<Omega|A|Omega>`` on every grid node, shape (n_theta, n_phi)."""
    a = np.asarray(a)
    N = a.shape[0] - 1
    amps = _ring_amplitudes(N, grid.cos_theta)
    # c[i, d] = sum_{m - n = d} a_m a_n A_mn for d in [-N, N]
    c = np.zeros((grid.n_theta, 2 * N + 1), dtype=complex)
    for d in range(-N, N + 1):
        diag = np.diagonal(a, offset=-d)  # entries A[n + d, n] (d >= 0) or A[m, m - d]
        lo = max(d, 0)
        rows = np.arange(lo, lo + len(diag))
        c[:, d + N] = (amps[:, rows] * amps[:, rows - d]) @ diag
    d = np.arange(-N, N + 1)
    phase = np.exp(-1j * np.outer(d, grid.phi))
    return np.real(c @ phase)


def integrate(f: SphereFunction, grid: SphereGrid) -> float:
    return grid.integrate(sample(f, grid))


# -- classical Gibbs functionals ---------------------------------------------------

def _refine(evaluate: Callable[[SphereGrid], np.ndarray], grid: SphereGrid, tol: float,
            max_doublings: int = 6, relative: bool = True):
    prev = np.atleast_1d(np.asarray(evaluate(grid), dtype=float))
    for _ in range(max_doublings):
        grid = grid.refined()
        cur = np.atleast_1d(np.asarray(evaluate(grid), dtype=float))
        scale = np.maximum(1.0, np.abs(cur)) if relative else 1.0
        if np.all(np.abs(cur - prev) <= tol * scale):
            return cur, grid
        prev = cur
    raise ConvergenceError(f"sphere quadrature did not converge to {tol:g} after "
                           f"{max_doublings} doublings (last grid {grid.n_theta}x{grid.n_phi})")


def _start_grid(*funcs, grid: SphereGrid | None) -> SphereGrid:
    if grid is not None:
        return grid
    degree = max((f.degree for f in funcs if isinstance(f, Polynomial)), default=0)
    return make_grid(max(8, degree + 2), max(16, 2 * degree + 2))


def _boltzmann(h: SphereFunction, beta: float, grid: SphereGrid) -> np.ndarray:
    e = -beta * sample(h, grid)
    return np.exp(e - e.max())


def classical_gibbs_sphere(h: SphereFunction, beta: float, f: SphereFunction,
                           grid: SphereGrid | None = None, tol: float = 1e-10) -> float:
    """Normalized classical Gibbs expectation ``int f e^{-beta h} / int e^{-beta h}``."""
    if not beta > 0:
        raise ValueError("beta must be positive")

    def evaluate(g):
        w = g.weights * _boltzmann(h, beta, g)
        return np.sum(w * sample(f, g)) / np.sum(w)

    value, _ = _refine(evaluate, _start_grid(h, f, grid=grid), tol, relative=False)
    return float(value[0])


def gibbs_functional(h: SphereFunction, beta: float, f: SphereFunction, grid: SphereGrid) -> float:
    """Unnormalized ``int e^{-beta h} f dOmega`` on a fixed grid."""
    return grid.integrate(np.exp(-beta * sample(h, grid)) * sample(f, grid))


@dataclass(frozen=True)
class KMSCheck:
    lhs: float              # phi({f, g})
    rhs: float              # beta * phi({f, h} g)
    residual: float
    flipped_residual: float  # same with Y(f) := {h, f}


def classical_kms_check(h: Polynomial, beta: float, f: Polynomial, g: Polynomial,
                        grid: SphereGrid | None = None, tol: float = 1e-12) -> KMSCheck:
    """Both sides of ``phi({f,g}) = beta phi(Y(f) g)`` for the unnormalized Gibbs functional.

    ``Y(f) = {f, h}``, which is the convention forced by
    ``int {f, F} dOmega = 0`` applied to ``F = g e^{-beta h}``.
    """
    if not beta > 0:
        raise ValueError("beta must be positive")
    fg = poisson_bracket(f, g)
    yf_g = poisson_bracket(f, h) * g

    def evaluate(gr):
        return [gibbs_functional(h, beta, fg, gr), beta * gibbs_functional(h, beta, yf_g, gr)]

    (lhs, rhs), _ = _refine(evaluate, _start_grid(h, f, g, grid=grid), tol)
    return KMSCheck(float(lhs), float(rhs), abs(lhs - rhs), abs(lhs + rhs))


def classical_kms_residual(h: Polynomial, beta: float, f: Polynomial, g: Polynomial,
                           grid: SphereGrid | None = None) -> float:
    return classical_kms_check(h, beta, f, g, grid).residual


# -- Berezin-Lieb sandwich ----------------------------------------------------------

@dataclass(frozen=True)
class Sandwich:
    """Logs of the lower, middle and upper terms of a partition-function sandwich."""
    log_lower: float
    log_mid: float
    log_upper: float

    @property
    def lower(self) -> float:
        return float(np.exp(self.log_lower))

    @property
    def mid(self) -> float:
        return float(np.exp(self.log_mid))

    @property
    def upper(self) -> float:
        return float(np.exp(self.log_upper))

    def ordered(self, slack: float = 1e-9) -> bool:
        eps = math.log1p(slack)
        return self.log_lower <= self.log_mid + eps and self.log_mid <= self.log_upper + eps

    @property
    def log_width(self) -> float:
        return self.log_upper - self.log_lower


def _log_integral_exp(exponent: np.ndarray, grid: SphereGrid) -> float:
    return float(logsumexp(exponent, b=grid.weights))


def berezin_lieb_sphere(N: int, h0: Polynomial, beta: float, grid: SphereGrid | None = None,
                        tol: float = 1e-12) -> Sandwich:
    """Sandwich for ``H = N Q(h0)``.

    lower = (N+1)/4pi int exp(-beta N <Omega|Q(h0)|Omega>),
    mid   = Tr exp(-beta N Q(h0)),
    upper = (N+1)/4pi int exp(-beta N h0).
    """
    if grid is None:
        grid = make_grid(*required_grid(N, h0.degree))
    q = berezin_quantize_sphere(N, h0, grid)
    log_c = math.log((N + 1) / (4 * np.pi))
    log_mid = log_partition(N * q, beta)

    def evaluate(g):
        lower = _log_integral_exp(-beta * N * lower_symbol_grid(q, g), g)
        upper = _log_integral_exp(-beta * N * sample(h0, g), g)
        return [lower, upper]

    (log_lower, log_upper), _ = _refine(evaluate, grid, tol)
    return Sandwich(log_c + log_lower, log_mid, log_c + log_upper)


def large_spin_free_energy(N: int, h0: Polynomial, beta: float, q: np.ndarray | None = None) -> float:
    """``-(1/(beta N)) log Tr exp(-beta N Q(h0))``."""
    if q is None:
        q = berezin_quantize_sphere(N, h0)
    return -log_partition(N * q, beta) / (beta * N)


def free_energy_minus_z(N: int, beta: float) -> float:
    """Closed form of :func:`large_spin_free_energy` for ``h0 = -z``: ``Q(z) = diag(N-2m)/(N+2)``."""
    m = np.arange(N + 1)
    exponent = beta * N * (N - 2 * m) / (N + 2)
    return -float(logsumexp(exponent)) / (beta * N)


def dgr_defect(N: int, f: Polynomial, g: Polynomial, bracket_scale: float = 1.0) -> float:
    """Operator norm of ``iN[Q(f), Q(g)] - Q(c {f, g})`` with ``c = bracket_scale``."""
    qf = berezin_quantize_sphere(N, f)
    qg = berezin_quantize_sphere(N, g)
    qb = berezin_quantize_sphere(N, bracket_scale * poisson_bracket(f, g))
    diff = 1j * N * (qf @ qg - qg @ qf) - qb
    return float(np.linalg.norm(diff, 2))


def sphere_infimum(h: Polynomial, n_theta: int = 48, n_phi: int = 96, n_polish: int = 4) -> float:
    """``min_{S^2} h``: grid scan followed by local polishing in (theta, phi)."""
    from scipy.optimize import minimize

    grid = make_grid(n_theta, n_phi)
    vals = sample(h, grid)
    theta, phi = grid.theta, grid.phi

    def obj(a):
        st = math.sin(a[0])
        return h.at((st * math.cos(a[1]), st * math.sin(a[1]), math.cos(a[0])))

    best = float(vals.min())
    for flat in np.argsort(vals, axis=None)[:n_polish]:
        i, k = np.unravel_index(flat, vals.shape)
        res = minimize(obj, [theta[i], phi[k]], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        best = min(best, float(res.fun))
    # the poles are singular points of the chart
    return min(best, h.at((0, 0, 1)), h.at((0, 0, -1)))
