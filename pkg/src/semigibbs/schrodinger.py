"""One-dimensional Schrodinger operators ``-hbar^2 d^2/dx^2 + V`` and their semiclassics.

Space is a periodic box ``[-L, L)`` sampled at midpoint nodes; the Laplacian is
Fourier pseudospectral.  Coherent states are Gaussians of position variance
``hbar/2``; with that normalization

* the Berezin quantization of ``f(q)`` is multiplication by ``f * G_hbar``,
  ``G_hbar(u) = (pi hbar)^{-1/2} exp(-u^2/hbar)``;
* the lower symbol of ``H`` is ``p^2 + hbar/2 + (V * G_hbar)(q)``.

Vectors on the grid are stored with unit l2 norm, i.e. ``v_i = psi(x_i) sqrt(dx)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import integrate
from scipy.linalg import circulant

from .errors import BoundViolation, ConfinementError, ConvergenceError
from .operators import Spectrum, eigh, gibbs_expectation, log_partition_from_eigenvalues
from .sphere import Sandwich

TAIL_TOL = 1e-14
CONFINEMENT_BARRIER = 40.0
TRUNCATION_TOL = 1e-10
GAUSS_HERMITE_NODES = 120


@dataclass(frozen=True)
class Grid1D:
    L: float
    M: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("half-width L must be positive")
        if self.M < 128 or self.M % 2:
            raise ValueError(f"M must be even and >= 128, got {self.M}")

    @property
    def dx(self) -> float:
        return 2 * self.L / self.M

    @property
    def x(self) -> np.ndarray:
        return -self.L + (np.arange(self.M) + 0.5) * self.dx

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.M, d=self.dx)

    def doubled(self) -> "Grid1D":
        return Grid1D(2 * self.L, 2 * self.M)


@dataclass(frozen=True)
class PhasePoint:
    q: float
    p: float


@dataclass(frozen=True)
class PotentialSpec:
    """Polynomial potential ``V(q) = sum_k coeffs[k] q^k``."""
    coeffs: tuple[float, ...]
    name: str = "custom"
    minimum: float = field(init=False)
    argmin: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        c = np.trim_zeros(np.asarray(self.coeffs, dtype=float), "b")
        if len(c) < 2:
            raise ValueError("constant potential: exp(-tV) is not integrable (V3 fails)")
        deg = len(c) - 1
        if deg % 2 or c[-1] <= 0:
            raise ValueError("potential must have even degree and positive leading coefficient "
                             "so that it is bounded below and confining (V2, V3)")
        object.__setattr__(self, "coeffs", tuple(float(v) for v in c))
        crit = P.polyroots(P.polyder(c))
        crit = np.real(crit[np.abs(np.imag(crit)) < 1e-9])
        vals = P.polyval(crit, c)
        vmin = vals.min()
        object.__setattr__(self, "minimum", float(vmin))
        object.__setattr__(self, "argmin", tuple(sorted(float(q) for q, v in zip(crit, vals)
                                                        if v - vmin <= 1e-12 * max(1.0, abs(vmin)))))

    @classmethod
    def preset(cls, name: str) -> "PotentialSpec":
        try:
            return cls(PRESETS[name], name)
        except KeyError:
            raise ValueError(f"unknown potential preset {name!r}; choose from {sorted(PRESETS)}") from None

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, q):
        return P.polyval(np.asarray(q, dtype=float), self.coeffs)

    def smoothed_coeffs(self, hbar: float) -> np.ndarray:
        """Coefficients of ``(V * G_hbar)(q) = E[V(q + u)]``, ``u ~ N(0, hbar/2)``."""
        c = np.asarray(self.coeffs)
        out = np.zeros_like(c)
        var = hbar / 2
        for n, cn in enumerate(c):
            # E (q+u)^n = sum_j C(n, 2j) q^{n-2j} var^j (2j-1)!!
            for j in range(n // 2 + 1):
                out[n - 2 * j] += cn * math.comb(n, 2 * j) * var**j * _double_factorial(2 * j - 1)
        return out

    def smoothed(self, hbar: float, q):
        return P.polyval(np.asarray(q, dtype=float), self.smoothed_coeffs(hbar))


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


PRESETS = {
    "harmonic": (0.0, 0.0, 1.0),
    "shifted_quadratic": (1.0, -2.0, 1.0),
    "double_well": (1.0, 0.0, -2.0, 0.0, 1.0),
}


# -- operators -------------------------------------------------------------------

def kinetic_matrix(hbar: float, grid: Grid1D) -> np.ndarray:
    """``-hbar^2 d^2/dx^2`` as a dense real symmetric circulant."""
    col = np.real(np.fft.ifft(hbar**2 * grid.k**2))
    t = circulant(col)
    return (t + t.T) / 2


def check_confinement(V: PotentialSpec, grid: Grid1D, beta_min: float) -> None:
    barrier = min(V(-grid.L), V(grid.L)) - V.minimum
    need = CONFINEMENT_BARRIER / beta_min
    if barrier < need:
        raise ConfinementError(
            f"potential barrier V(+-L) - min V = {barrier:.4g} < {need:.4g} = 40/beta_min "
            f"at L = {grid.L:g}; increase L")


def build_hamiltonian(hbar: float, V: PotentialSpec, grid: Grid1D, beta_min: float = 1.0) -> np.ndarray:
    if not hbar > 0:
        raise ValueError("hbar must be positive")
    check_confinement(V, grid, beta_min)
    return kinetic_matrix(hbar, grid) + np.diag(V(grid.x))


# -- coherent states and symbols ----------------------------------------------------

def schrodinger_coherent(hbar: float, pt: PhasePoint, grid: Grid1D) -> np.ndarray:
    """Grid samples of the coherent state at (q, p), scaled to unit l2 norm."""
    q, p = pt.q, pt.p
    if abs(q) > grid.L / 2:
        raise ConfinementError(f"|q| = {abs(q):g} exceeds L/2 = {grid.L / 2:g}")
    edge = grid.L - abs(q)
    if math.exp(-edge**2 / (2 * hbar)) >= TAIL_TOL:
        raise ConfinementError(f"coherent state tail at the box edge is not negligible "
                               f"(hbar = {hbar:g}, distance {edge:g}); increase L")
    k_room = math.pi / grid.dx - abs(p) / hbar
    if k_room <= 0 or math.exp(-k_room**2 * hbar / 2) >= TAIL_TOL:
        raise ConfinementError(f"momentum p = {p:g} is not resolved by dx = {grid.dx:g}; increase M")
    x = grid.x
    psi = ((math.pi * hbar) ** -0.25 * np.exp(-0.5j * p * q / hbar) * np.exp(1j * p * x / hbar)
           * np.exp(-((x - q) ** 2) / (2 * hbar)))
    v = psi * math.sqrt(grid.dx)
    norm = np.linalg.norm(v)
    if abs(norm - 1) > 1e-10:
        raise ConfinementError(f"discrete coherent-state norm {norm!r} deviates from 1")
    return v / norm


def momentum_expectation(hbar: float, v: np.ndarray, grid: Grid1D) -> float:
    dv = np.fft.ifft(1j * grid.k * np.fft.fft(v))
    return float(np.real(np.vdot(v, -1j * hbar * dv)))


def lower_symbol_line(hbar: float, H: np.ndarray, pt: PhasePoint, grid: Grid1D) -> float:
    v = schrodinger_coherent(hbar, pt, grid)
    return float(np.real(np.vdot(v, H @ v)))


def lower_symbol_exact(hbar: float, V: PotentialSpec, q, p):
    """Closed form ``p^2 + hbar/2 + (V * G_hbar)(q)``."""
    return np.asarray(p) ** 2 + hbar / 2 + V.smoothed(hbar, q)


def gaussian_smooth(hbar: float, f: Callable[[np.ndarray], np.ndarray], x: np.ndarray,
                    n_nodes: int = GAUSS_HERMITE_NODES) -> np.ndarray:
    """``(f * G_hbar)(x)`` by Gauss-Hermite quadrature."""
    t, w = np.polynomial.hermite.hermgauss(n_nodes)
    x = np.asarray(x, dtype=float)
    vals = f(x[..., None] + math.sqrt(hbar) * t)
    return vals @ w / math.sqrt(math.pi)


def berezin_quantize_position(hbar: float, f: Callable[[np.ndarray], np.ndarray], grid: Grid1D) -> np.ndarray:
    """Berezin quantization of a function of position: diagonal Gaussian smoothing."""
    return np.diag(gaussian_smooth(hbar, f, grid.x))


def berezin_quantize_phase_space(hbar: float, f: Callable[[np.ndarray, np.ndarray], np.ndarray],
                                 grid: Grid1D, n_q: int | None = None, n_p: int = 64) -> np.ndarray:
    """Slow direct quadrature of ``(2 pi hbar)^{-1} int f(q,p) |Psi><Psi| dq dp``.

    q runs over ``[-L/2, L/2]`` with the trapezoid rule; p covers one aliasing
    period ``[-pi hbar/dx, pi hbar/dx)`` of the grid uniformly.  Entries near the
    box edge miss the coherent states centred outside ``[-L/2, L/2]``.
    """
    if n_q is None:
        n_q = grid.M + 1
    qs = np.linspace(-grid.L / 2, grid.L / 2, n_q)
    wq = np.full(n_q, qs[1] - qs[0])
    wq[[0, -1]] /= 2
    p_max = math.pi * hbar / grid.dx
    ps = -p_max + 2 * p_max * np.arange(n_p) / n_p
    wp = 2 * p_max / n_p
    x = grid.x
    out = np.zeros((grid.M, grid.M), dtype=complex)
    for q, w in zip(qs, wq):
        env = (math.pi * hbar) ** -0.25 * np.exp(-((x - q) ** 2) / (2 * hbar)) * math.sqrt(grid.dx)
        phase = np.exp(1j * np.outer(x - q / 2, ps) / hbar)   # (M, n_p)
        vecs = env[:, None] * phase
        fw = f(np.full(n_p, q), ps) * w * wp
        out += (vecs * fw) @ vecs.conj().T
    out /= 2 * math.pi * hbar
    return (out + out.conj().T) / 2


# -- partition functions --------------------------------------------------------------

def _shifted_integral(V: PotentialSpec, beta: float, f: Callable | None = None,
                      tol: float = 1e-12) -> float:
    """``int f(q) exp(-beta (V(q) - min V)) dq`` by adaptive quadrature (f = 1 if omitted)."""
    breaks = sorted(set(V.argmin) | {0.0})
    # beyond beta (V - c) > 750 the weight underflows
    span = 1.0
    while beta * (min(V(breaks[0] - span), V(breaks[-1] + span)) - V.minimum) < 750:
        span *= 2
    pts = [breaks[0] - span] + breaks + [breaks[-1] + span]
    if f is None:
        g = lambda q: np.exp(-beta * (V(q) - V.minimum))  # noqa: E731
    else:
        g = lambda q: f(q) * np.exp(-beta * (V(q) - V.minimum))  # noqa: E731
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        if b <= a:
            continue
        val, err = integrate.quad(g, a, b, epsabs=1e-300, epsrel=tol, limit=500)
        if not np.isfinite(val) or err > 1e3 * tol * max(abs(val), 1e-300):
            raise ConvergenceError(f"quadrature on [{a:g}, {b:g}] did not converge (err {err:.2e})")
        total += val
    return total


def classical_log_partition_plane(V: PotentialSpec, beta: float, tol: float = 1e-12) -> float:
    """``log( sqrt(pi/beta) int exp(-beta V(q)) dq )``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return 0.5 * math.log(math.pi / beta) - beta * V.minimum + math.log(_shifted_integral(V, beta, tol=tol))


def classical_partition_plane(V: PotentialSpec, beta: float, tol: float = 1e-12) -> float:
    return math.exp(classical_log_partition_plane(V, beta, tol))


def classical_gibbs_line(V: PotentialSpec, beta: float, f: Callable, tol: float = 1e-12) -> float:
    """``int f(q) e^{-beta V} dq / int e^{-beta V} dq``; the p-integrals cancel."""
    return _shifted_integral(V, beta, f, tol) / _shifted_integral(V, beta, tol=tol)


@dataclass(frozen=True)
class LinePartition:
    log_z: float
    truncation_bound: float   # bound on the contribution of states beyond the grid spectrum
    log_classical_bound: float | None  # log of (2 pi hbar)^{-1} int e^{-beta h0}

    @property
    def z(self) -> float:
        return math.exp(self.log_z)


def quantum_partition_line(H, beta: float, hbar: float, V: PotentialSpec | None = None) -> LinePartition:
    """``Tr e^{-beta H}`` over the grid spectrum, with a truncation bound.

    States beyond the top grid eigenvalue ``Lambda`` contribute at most
    ``e^{-beta Lambda/2} Tr e^{-beta H/2} <= e^{-beta Lambda/2} (2 pi hbar)^{-1} int e^{-beta h0/2}``.
    When ``V`` is given the upper bound ``Tr e^{-beta H} <= (2 pi hbar)^{-1} int e^{-beta h0}``
    is asserted.
    """
    spec = H if isinstance(H, Spectrum) else eigh(H)
    lam = spec.eigenvalues
    log_z = log_partition_from_eigenvalues(lam, beta)
    log_c = -math.log(2 * math.pi * hbar)
    if V is None:
        # grid spectrum itself bounds the missing mass by the same trick
        trunc_log = -beta * lam[-1] / 2 + log_partition_from_eigenvalues(lam, beta / 2)
        return LinePartition(log_z, math.exp(trunc_log - log_z), None)
    log_bound = log_c + classical_log_partition_plane(V, beta)
    trunc_log = -beta * lam[-1] / 2 + log_c + classical_log_partition_plane(V, beta / 2)
    rel_trunc = math.exp(trunc_log - log_z)
    if rel_trunc > TRUNCATION_TOL:
        raise ConfinementError(f"spectral truncation bound {rel_trunc:.2e} exceeds {TRUNCATION_TOL:g} "
                               "of the total; increase M or L")
    if log_z > log_bound + 1e-9:
        raise BoundViolation(f"Tr e^(-beta H) exceeds the phase-space bound: "
                             f"log {log_z:.12g} > {log_bound:.12g}")
    return LinePartition(log_z, rel_trunc, log_bound)


def partition_sandwich_line(hbar: float, V: PotentialSpec, beta: float, grid: Grid1D,
                            H=None) -> Sandwich:
    """``int e^{-beta lower symbol} <= 2 pi hbar Tr e^{-beta H} <= int e^{-beta h0}`` (logs).

    The lower term factorizes: ``e^{-beta hbar/2} sqrt(pi/beta) int e^{-beta (V * G_hbar)}``.
    """
    if H is None:
        H = build_hamiltonian(hbar, V, grid, beta_min=beta)
    part = quantum_partition_line(H, beta, hbar, V)
    smooth = PotentialSpec(tuple(V.smoothed_coeffs(hbar)))
    log_lower = -beta * hbar / 2 + classical_log_partition_plane(smooth, beta)
    log_mid = math.log(2 * math.pi * hbar) + part.log_z
    log_upper = classical_log_partition_plane(V, beta)
    return Sandwich(log_lower, log_mid, log_upper)


def harmonic_partition_closed_form(hbar: float, beta: float) -> float:
    """``2 pi hbar e^{-beta hbar} / (1 - e^{-2 beta hbar}) = pi hbar / sinh(beta hbar)``."""
    return math.pi * hbar / math.sinh(beta * hbar)


@dataclass(frozen=True)
class GibbsLimitRow:
    hbar: float
    quantum: float
    classical: float

    @property
    def diff(self) -> float:
        return abs(self.quantum - self.classical)


def classical_limit_gibbs_line(hbars: Sequence[float], V: PotentialSpec, beta: float,
                               f: Callable[[np.ndarray], np.ndarray], grid: Grid1D,
                               spectra: dict | None = None) -> list[GibbsLimitRow]:
    """Quantum ``<Q(f)>`` versus classical Gibbs average of ``f`` along an hbar sequence."""
    edge = np.abs(f(np.array([-grid.L, grid.L])))
    if edge.max() >= 1e-12:
        raise ValueError(f"observable does not vanish at the box edge (|f(+-L)| = {edge.max():.2e})")
    classical = classical_gibbs_line(V, beta, f)
    rows = []
    for hbar in hbars:
        spec = (spectra or {}).get(hbar)
        if spec is None:
            spec = eigh(build_hamiltonian(hbar, V, grid, beta_min=beta))
        qf = berezin_quantize_position(hbar, f, grid)
        rows.append(GibbsLimitRow(hbar, gibbs_expectation(spec, beta, qf), classical))
    return rows


def strictly_decreasing(values: Sequence[float]) -> bool:
    return all(b < a for a, b in zip(values[:-1], values[1:]))
