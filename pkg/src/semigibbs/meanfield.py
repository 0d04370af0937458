"""Mean-field quantum spin systems on N qubits and their Bloch-ball variational limit.

Permutation-invariant operators are handled per total-spin sector: an
operator built from collective spins ``J = (1/2) sum_i sigma(i)`` acts as the
same (2j+1)-dimensional block on each of the ``mult(N, j)`` copies of the
spin-j irrep.  Full-space traces are multiplicity-weighted sums over blocks
and cost polynomial time in N.  A brute-force path on ``(C^2)^{(x)N}``
(N <= 10) serves as an oracle.

Symbols are :class:`~semigibbs.polynomials.Polynomial` objects in the Bloch
coordinates (x, y, z) of ``rho = (I + r . sigma) / 2``.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.special import logsumexp
from scipy.stats import qmc

from .errors import CapacityError, ConvergenceError, SemigibbsError
from .operators import Spectrum, eigh, embed_local, log_partition
from .polynomials import Polynomial, X, Y, Z

PAULI = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]]),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
MAX_BRUTEFORCE_SITES = 10
CLUSTER_TOL = 1e-6
GRAD_TOL = 1e-10


class OrbitError(SemigibbsError):
    """Minimizers do not form a single group orbit; the classical limit is not determined."""


@dataclass(frozen=True)
class LMGParams:
    lam: float
    gamma: float
    B: float

    def symbol(self) -> Polynomial:
        """Principal symbol ``lam (x^2 + gamma y^2) - B z``."""
        return self.lam * (X * X + self.gamma * (Y * Y)) - self.B * Z


# -- spin sectors --------------------------------------------------------------

def _two_j(N: int, j) -> int:
    two_j = Fraction(j) * 2
    if two_j.denominator != 1:
        raise ValueError(f"j = {j} is not a half-integer")
    two_j = int(two_j)
    if not 0 <= two_j <= N or (N - two_j) % 2:
        raise ValueError(f"j = {j} is not a total spin of {N} qubits")
    return two_j


def sector_multiplicity(N: int, j) -> int:
    """``C(N, N/2 - j) - C(N, N/2 - j - 1)``."""
    two_j = _two_j(N, j)
    k = (N - two_j) // 2
    return math.comb(N, k) - (math.comb(N, k - 1) if k >= 1 else 0)


@dataclass(frozen=True)
class SectorDecomposition:
    N: int
    two_j: tuple[int, ...]           # 2j, descending from N
    multiplicity: tuple[int, ...]

    @classmethod
    def of(cls, N: int) -> "SectorDecomposition":
        if N < 1:
            raise ValueError("N must be >= 1")
        tj = tuple(range(N, -1, -2))
        return cls(N, tj, tuple(sector_multiplicity(N, Fraction(t, 2)) for t in tj))

    @property
    def j(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(t, 2) for t in self.two_j)

    def total_dimension(self) -> int:
        return sum(m * (t + 1) for t, m in zip(self.two_j, self.multiplicity))

    def log_multiplicity(self) -> np.ndarray:
        return np.array([math.log(m) for m in self.multiplicity])


@functools.lru_cache(maxsize=512)
def _collective(two_j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = two_j / 2 - np.arange(two_j + 1)           # Jz eigenvalues j, j-1, ..., -j
    jp = np.sqrt((two_j / 2 - m[1:]) * (two_j / 2 + m[1:] + 1))  # <m+1|J+|m>
    j_plus = np.diag(jp, 1)
    jx = (j_plus + j_plus.T) / 2
    jy = (j_plus - j_plus.T) / 2j
    jz = np.diag(m)
    for a in (jx, jy, jz):
        a.setflags(write=False)
    return jx, jy, jz


def collective_spin(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angular-momentum matrices in the basis ``|j, m>``, m = j, ..., -j."""
    two_j = Fraction(j) * 2
    if two_j.denominator != 1 or two_j < 0:
        raise ValueError(f"j = {j} must be a non-negative half-integer")
    return tuple(a.copy() for a in _collective(int(two_j)))  # type: ignore[return-value]


def dicke_isometry(N: int) -> np.ndarray:
    """Columns are the Dicke states |m> (m down spins) in the 2^N product basis."""
    if N > MAX_BRUTEFORCE_SITES:
        raise CapacityError(f"brute-force path supports N <= {MAX_BRUTEFORCE_SITES}")
    idx = np.arange(2**N)
    downs = np.array([bin(i).count("1") for i in idx])
    out = np.zeros((2**N, N + 1))
    for m in range(N + 1):
        sel = downs == m
        out[sel, m] = 1 / math.sqrt(sel.sum())
    return out


# -- quantization maps ----------------------------------------------------------

def quantize_symbol_bruteforce(N: int, p: Polynomial) -> np.ndarray:
    """Symmetrized product quantization on ``(C^2)^{(x)N}``.

    A monomial ``x^a y^b z^c`` of degree ``L <= N`` maps to
    ``S_{L,N}(sigma_1^{(x)a} (x) sigma_2^{(x)b} (x) sigma_3^{(x)c})``; degree ``L > N`` maps to 0.
    """
    if N > MAX_BRUTEFORCE_SITES:
        raise CapacityError(f"quantize_symbol_bruteforce supports N <= {MAX_BRUTEFORCE_SITES}; "
                            "use quantize_symbol_collective")
    dim = 2**N
    out = np.zeros((dim, dim), dtype=complex)
    truncated = False
    for (a, b, c), coef in p:
        L = a + b + c
        if L == 0:
            out += coef * np.eye(dim)
            continue
        if L > N:
            truncated = True
            continue
        factors = [PAULI[0]] * a + [PAULI[1]] * b + [PAULI[2]] * c
        local = functools.reduce(np.kron, factors)
        out += coef * embed_local(local, L, N)
    if truncated:
        warnings.warn(f"monomials of degree > N = {N} quantize to 0", stacklevel=2)
    return (out + out.conj().T) / 2


def _monomial_block(exp: tuple[int, int, int], N: int, two_j: int) -> np.ndarray | None:
    J = _collective(two_j)
    axes = [mu for mu in range(3) for _ in range(exp[mu])]
    if len(axes) == 0:
        return np.eye(two_j + 1)
    if len(axes) > N:
        return None
    if len(axes) == 1:
        return 2 * J[axes[0]] / N
    mu, nu = axes
    if mu == nu:
        return (4 * J[mu] @ J[mu] - N * np.eye(two_j + 1)) / (N * (N - 1))
    return 2 * (J[mu] @ J[nu] + J[nu] @ J[mu]) / (N * (N - 1))


def quantize_symbol_collective(N: int, p: Polynomial, two_j: int | None = None) -> dict[int, np.ndarray]:
    """Per-sector blocks ``{2j: Q_j(p)}`` of the symmetrized quantization (degree <= 2)."""
    if p.degree > 2:
        raise ValueError(f"collective quantization handles degree <= 2 (got {p.degree}); "
                         "use quantize_symbol_bruteforce for N <= 10")
    sectors = SectorDecomposition.of(N).two_j if two_j is None else (two_j,)
    out = {}
    for tj in sectors:
        block = np.zeros((tj + 1, tj + 1), dtype=complex)
        for exp, coef in p:
            mono = _monomial_block(exp, N, tj)
            if mono is not None:
                block += coef * mono
        out[tj] = _real_if_real(block)
    return out


def _real_if_real(a: np.ndarray) -> np.ndarray:
    a = (a + a.conj().T) / 2
    return a.real.copy() if np.iscomplexobj(a) and not np.any(a.imag) else a


# -- LMG model ---------------------------------------------------------------------

def lmg_block(N: int, params: LMGParams, two_j: int) -> np.ndarray:
    """``(4 lam / N)(Jx^2 + gamma Jy^2) - 2 B Jz`` in sector j."""
    jx, jy, jz = _collective(two_j)
    block = 4 * params.lam / N * (jx @ jx + params.gamma * (jy @ jy)) - 2 * params.B * jz
    return _real_if_real(block)


def lmg_hamiltonian(N: int, params: LMGParams) -> dict[int, np.ndarray]:
    if N < 1:
        raise ValueError("N must be >= 1")
    return {tj: lmg_block(N, params, tj) for tj in SectorDecomposition.of(N).two_j}


def lmg_hamiltonian_bruteforce(N: int, params: LMGParams) -> np.ndarray:
    """``(lam/N)((sum sigma_1)^2 + gamma (sum sigma_2)^2) - B sum sigma_3`` on ``(C^2)^{(x)N}``."""
    if N > MAX_BRUTEFORCE_SITES:
        raise CapacityError(f"brute-force path supports N <= {MAX_BRUTEFORCE_SITES}")
    total = []
    for s in PAULI:
        acc = np.zeros((2**N, 2**N), dtype=complex)
        for i in range(N):
            acc += np.kron(np.kron(np.eye(2**i), s), np.eye(2 ** (N - i - 1)))
        total.append(acc)
    h = params.lam / N * (total[0] @ total[0] + params.gamma * (total[1] @ total[1])) - params.B * total[2]
    return _real_if_real(h)


@functools.lru_cache(maxsize=64)
def _lmg_spectra(N: int, params: LMGParams) -> tuple[tuple[int, int, Spectrum], ...]:
    dec = SectorDecomposition.of(N)
    return tuple((tj, m, eigh(lmg_block(N, params, tj))) for tj, m in zip(dec.two_j, dec.multiplicity))


def lmg_log_partition(N: int, params: LMGParams, beta: float) -> float:
    """``log Tr_{(C^2)^{(x)N}} exp(-beta H)`` via the sector decomposition."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    terms = [math.log(m) + log_partition(spec, beta) for _, m, spec in _lmg_spectra(N, params)]
    return float(logsumexp(terms))


def local_free_energy_density(N: int, params: LMGParams, beta: float) -> float:
    return -lmg_log_partition(N, params, beta) / (beta * N)


def local_free_energy_density_bruteforce(N: int, params: LMGParams, beta: float) -> float:
    return -log_partition(lmg_hamiltonian_bruteforce(N, params), beta) / (beta * N)


def gibbs_expectation_lmg(N: int, params: LMGParams, beta: float, p: Polynomial) -> float:
    """Full-space Gibbs expectation of the collective quantization of ``p``."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    q = quantize_symbol_collective(N, p)
    log_w, vals = [], []
    for tj, m, spec in _lmg_spectra(N, params):
        u = spec.eigenvectors
        diag = np.real(np.einsum("ij,ik,kj->j", u.conj(), q[tj], u))
        log_w.append(math.log(m) - beta * spec.eigenvalues)
        vals.append(diag)
    log_w = np.concatenate(log_w)
    vals = np.concatenate(vals)
    w = np.exp(log_w - log_w.max())
    return float(np.dot(w, vals) / w.sum())


def gibbs_expectation_bruteforce(N: int, params: LMGParams, beta: float, p: Polynomial) -> float:
    from .operators import gibbs_expectation
    return gibbs_expectation(lmg_hamiltonian_bruteforce(N, params), beta, quantize_symbol_bruteforce(N, p))


# -- mean-field free energy on the Bloch ball ------------------------------------------

def _check_ball(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError("Bloch vector must have 3 components")
    rho = np.linalg.norm(r)
    if rho > 1 + 1e-12:
        raise ValueError(f"|r| = {rho!r} exceeds 1")
    return r


def mf_entropy_term(rho: float) -> float:
    """``lam_+ log lam_+ + lam_- log lam_-`` with ``lam_pm = (1 +- rho)/2``."""
    rho = min(rho, 1.0)
    out = 0.0
    for lam in ((1 + rho) / 2, (1 - rho) / 2):
        if lam > 0:
            out += lam * math.log(lam)
    return out


def mf_free_energy(r, h0: Polynomial, beta: float) -> float:
    """``h0(r) + (1/beta) Tr rho log rho`` at the Bloch vector r."""
    r = _check_ball(r)
    return h0.at(r) + mf_entropy_term(float(np.linalg.norm(r))) / beta


def _artanh_ratio(rho: float) -> float:
    # artanh(rho)/rho, smooth at 0
    if rho >= 1.0:
        return math.inf
    return 1 + rho**2 / 3 + rho**4 / 5 if rho < 1e-4 else math.atanh(rho) / rho


def mf_gradient(r, h0: Polynomial, beta: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return h0.gradient_at(r) + _artanh_ratio(float(np.linalg.norm(r))) * r / beta


def mf_hessian(r, h0: Polynomial, beta: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    rho = float(np.linalg.norm(r))
    if rho < 1e-8:
        ent = np.eye(3)
    else:
        u = r / rho
        proj = np.outer(u, u)
        ent = _artanh_ratio(rho) * (np.eye(3) - proj) + proj / (1 - rho**2)
    return h0.hessian_at(r) + ent / beta


def _to_ball(u: np.ndarray) -> np.ndarray:
    """``r = tanh|u| u/|u|``, mapping R^3 onto the open ball (|u| = artanh|r|)."""
    return u * _tanh_ratio(float(np.linalg.norm(u)))


def _tanh_ratio(s: float) -> float:
    # tanh(s)/s, smooth at 0
    return 1 - s**2 / 3 if s < 1e-6 else math.tanh(s) / s


def _ball_jacobian(u: np.ndarray, inverse: bool = False) -> np.ndarray:
    """``dr/du``, or its inverse."""
    s = float(np.linalg.norm(u))
    if s < 1e-8:
        return np.eye(3)
    uh = u / s
    proj = np.outer(uh, uh)
    t = math.tanh(s)
    if inverse:
        return math.cosh(min(s, 300.0)) ** 2 * proj + (s / t) * (np.eye(3) - proj)
    sech2 = 1 - t * t if s < 10 else 4 * math.exp(-2 * s)
    return sech2 * proj + (t / s) * (np.eye(3) - proj)


def _unconstrained_objective(u: np.ndarray, h0: Polynomial, beta: float) -> tuple[float, np.ndarray]:
    s = float(np.linalg.norm(u))
    r = _to_ball(u)
    # lam_+ log lam_+ + lam_- log lam_- = s tanh s - log(2 cosh s)
    ent = s * math.tanh(s) - s - math.log1p(math.exp(-2 * s))
    f = h0.at(r) + ent / beta
    return f, _ball_jacobian(u) @ _stationarity(u, h0, beta)


def _stationarity(u: np.ndarray, h0: Polynomial, beta: float) -> np.ndarray:
    """Gradient of F in r, written through u: ``grad h0(r) + u / beta``."""
    return h0.gradient_at(_to_ball(u)) + u / beta


def _polish(h0: Polynomial, beta: float, u: np.ndarray, max_iter: int = 50) -> tuple[np.ndarray, bool]:
    """Newton root-finding on the stationarity equation in u.

    Iterates until the residual stops decreasing, so converged points are
    accurate to rounding; ``GRAD_TOL`` only decides success.
    """
    g = _stationarity(u, h0, beta)
    for _ in range(max_iter):
        if not np.any(g):
            return u, True
        dg = h0.hessian_at(_to_ball(u)) @ _ball_jacobian(u) + np.eye(3) / beta
        try:
            d = -np.linalg.solve(dg, g)
        except np.linalg.LinAlgError:
            return u, False
        step = 1.0
        while step > 1e-8:
            trial = u + step * d
            gt = _stationarity(trial, h0, beta)
            if np.linalg.norm(gt) < np.linalg.norm(g):
                break
            step *= 0.5
        else:
            return u, bool(np.linalg.norm(g) <= GRAD_TOL)
        u, g = trial, gt
    return u, bool(np.linalg.norm(g) <= GRAD_TOL)


def _is_local_min(h0: Polynomial, beta: float, u: np.ndarray) -> bool:
    hess = h0.hessian_at(_to_ball(u)) + _ball_jacobian(u, inverse=True) / beta
    return bool(np.min(np.linalg.eigvalsh((hess + hess.T) / 2)) > -1e-8)


def _descend(h0: Polynomial, beta: float, r0: np.ndarray) -> tuple[np.ndarray, float, bool, bool]:
    rho = float(np.linalg.norm(r0))
    u0 = r0 * (math.atanh(rho) / rho if rho > 0 else 1.0)
    res = optimize.minimize(_unconstrained_objective, u0, args=(h0, beta), jac=True, method="BFGS",
                            options={"gtol": 1e-11, "maxiter": 2000})
    u, ok = _polish(h0, beta, res.x)
    f, _ = _unconstrained_objective(u, h0, beta)
    return _to_ball(u), f, ok, _is_local_min(h0, beta, u)


def ball_starts(n: int, seed: int = 0, radius: float = 0.95) -> np.ndarray:
    """Scrambled Sobol points mapped uniformly into the ball of the given radius."""
    u = qmc.Sobol(d=3, scramble=True, seed=seed).random(n)
    rad = radius * np.cbrt(u[:, 0])
    ct = 2 * u[:, 1] - 1
    st = np.sqrt(1 - ct**2)
    ph = 2 * np.pi * u[:, 2]
    return rad[:, None] * np.column_stack([st * np.cos(ph), st * np.sin(ph), ct])


def _cluster(points: Sequence[np.ndarray], values: Sequence[float], tol: float = CLUSTER_TOL):
    reps: list[np.ndarray] = []
    vals: list[float] = []
    for r, v in zip(points, values):
        for i, c in enumerate(reps):
            if np.linalg.norm(r - c) <= tol:
                if v < vals[i]:
                    reps[i], vals[i] = r, v
                break
        else:
            reps.append(r)
            vals.append(v)
    return reps, vals


@dataclass
class MFResult:
    value: float
    minimizers: list[np.ndarray]
    local_minima: list[np.ndarray] = field(default_factory=list)
    local_values: list[float] = field(default_factory=list)
    failures: int = 0


def minimize_mf_free_energy(h0: Polynomial, beta: float, n_starts: int = 64, seed: int = 0) -> MFResult:
    """Global minimum of the mean-field free energy over the Bloch ball by multistart Newton."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    points, values, failures = [], [], 0
    for r0 in ball_starts(n_starts, seed):
        r, f, ok, is_min = _descend(h0, beta, r0)
        if not ok:
            failures += 1
            continue
        if not is_min:
            continue  # saddle
        points.append(r)
        values.append(f)
    if not points:
        raise ConvergenceError(f"mean-field minimization failed from all {n_starts} starts")
    reps, vals = _cluster(points, values)
    order = np.argsort(vals)
    reps = [reps[i] for i in order]
    vals = [vals[i] for i in order]
    best = vals[0]
    keep = [r for r, v in zip(reps, vals) if v <= best + 1e-9 * max(1.0, abs(best))]
    return MFResult(best, keep, reps, vals, failures)


# -- gap equation --------------------------------------------------------------------

def bloch_vector(rho: np.ndarray) -> np.ndarray:
    return np.array([float(np.real(np.trace(rho @ s))) for s in PAULI])


def effective_hamiltonian(r, h0: Polynomial) -> np.ndarray:
    a = h0.gradient_at(r)
    return sum(c * s for c, s in zip(a, PAULI))


def gap_map(r, h0: Polynomial, beta: float) -> np.ndarray:
    """Bloch vector of the Gibbs state of ``a . sigma``, ``a = grad h0(r)``: ``-tanh(beta|a|) a/|a|``."""
    a = h0.gradient_at(r)
    na = float(np.linalg.norm(a))
    if na == 0.0:
        return np.zeros(3)
    return -math.tanh(beta * na) * a / na


@dataclass
class GapResult:
    r: np.ndarray
    iterations: int
    residual: float


def gap_equation_solve(h0: Polynomial, beta: float, r0, tol: float = 1e-12, max_iter: int = 10_000,
                       damping: float = 1.0) -> GapResult:
    """Fixed point of ``r -> (1 - damping) r + damping * gap_map(r)``."""
    if not 0 < damping <= 1:
        raise ValueError("damping must lie in (0, 1]")
    r = _check_ball(r0).copy()
    for it in range(1, max_iter + 1):
        new = (1 - damping) * r + damping * gap_map(r, h0, beta)
        step = float(np.linalg.norm(new - r))
        r = new
        if step <= tol:
            residual = float(np.linalg.norm(gap_map(r, h0, beta) - r))
            grad = float(np.linalg.norm(mf_gradient(r, h0, beta)))
            if not grad <= 1e-8:
                raise ConvergenceError(f"gap fixed point {r} is not stationary for the "
                                       f"mean-field free energy (|grad| = {grad:.2e})")
            return GapResult(r, it, residual)
    residual = float(np.linalg.norm(gap_map(r, h0, beta) - r))
    raise ConvergenceError(f"gap iteration did not converge in {max_iter} steps; last iterate {r}, "
                           f"residual {residual:.2e}")


def gap_fixed_points(h0: Polynomial, beta: float, starts: np.ndarray, damping: float = 1.0,
                     stable_only: bool = True) -> list[np.ndarray]:
    """Distinct gap-equation fixed points reached from ``starts``."""
    found = []
    for r0 in starts:
        try:
            res = gap_equation_solve(h0, beta, r0, damping=damping)
        except ConvergenceError:
            continue
        if stable_only and np.min(np.linalg.eigvalsh(mf_hessian(res.r, h0, beta))) <= 0:
            continue
        found.append(res.r)
    reps, _ = _cluster(found, [0.0] * len(found))
    return reps


# -- derivative probe and orbits ---------------------------------------------------

@dataclass
class ProbeResult:
    t: np.ndarray
    values: np.ndarray
    left_slope: float
    right_slope: float
    differentiable: bool
    concave: bool


def derivative_probe(h0: Polynomial, a0: Polynomial, beta: float,
                     t_grid: Sequence[float] = (-1e-1, -1e-2, -1e-3, 0.0, 1e-3, 1e-2, 1e-1),
                     n_starts: int = 64, seed: int = 0, tol: float = 1e-4) -> ProbeResult:
    """One-sided derivatives at t = 0 of ``F(t) = min_r F(h0 + t a0, r)``."""
    t = np.array(sorted(set(float(v) for v in t_grid) | {0.0}))
    for h in (1e-1, 1e-2, 1e-3):
        if not (np.any(np.isclose(t, h)) and np.any(np.isclose(t, -h))):
            raise ValueError("t grid must contain +-1e-1, +-1e-2, +-1e-3")
    values = np.array([minimize_mf_free_energy(h0 + tv * a0, beta, n_starts, seed).value for tv in t])
    f0 = values[t == 0.0][0]

    def value_at(tv):
        return values[np.argmin(np.abs(t - tv))]

    def one_sided(sign):
        d = {h: (value_at(sign * h) - f0) / (sign * h) for h in (1e-2, 1e-3)}
        return d[1e-3] + (d[1e-3] - d[1e-2]) / 9

    left, right = one_sided(-1), one_sided(+1)
    secants = np.diff(values) / np.diff(t)
    concave = bool(np.all(np.diff(secants) <= 1e-10 * max(1.0, np.max(np.abs(secants)))))
    return ProbeResult(t, values, float(left), float(right), abs(left - right) <= tol, concave)


def lmg_symmetry_group(params: LMGParams) -> list[np.ndarray]:
    """Orthogonal maps leaving the LMG symbol invariant: identity and rotation by pi about z."""
    return [np.eye(3), np.diag([-1.0, -1.0, 1.0])]


def orbit_average(p: Polynomial, group: Sequence[np.ndarray], minimizers: Sequence[np.ndarray],
                  tol: float = CLUSTER_TOL) -> float:
    """Average of ``p`` over the group orbit carried by ``minimizers``."""
    group = [np.asarray(g, dtype=float) for g in group]
    for g in group:
        for h in group:
            if not any(np.max(np.abs(g @ h - k)) <= 1e-12 for k in group):
                raise ValueError("group is not closed under composition")
    if not minimizers:
        raise ValueError("no minimizers given")
    orbit, _ = _cluster([g @ np.asarray(minimizers[0], float) for g in group], [0.0] * len(group), tol)
    mins, _ = _cluster([np.asarray(m, float) for m in minimizers], [0.0] * len(minimizers), tol)
    covered = all(any(np.linalg.norm(m - o) <= tol for o in orbit) for m in mins)
    if not covered or len(mins) != len(orbit):
        raise OrbitError("minimizers do not form a single group orbit; classical limit not determined")
    return float(np.mean([p.at(o) for o in orbit]))
