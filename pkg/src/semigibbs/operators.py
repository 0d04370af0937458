"""Dense Hermitian linear algebra: spectra, Gibbs states, entropy, symmetrizers.

Every function of an operator goes through a full eigendecomposition; the
dimensions used here stay below a few thousand, and one spectrum is reused
across many inverse temperatures.  Partition functions are only ever handled
as logarithms.
"""

from __future__ import annotations

import hashlib
import itertools
import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import CapacityError, SemigibbsError

HERMITIAN_REJECT_TOL = 1e-8
ENTROPY_ZERO = 1e-14
NEGATIVE_EIG_TOL = 1e-10
MAX_SYMMETRIZE_SITES = 12
MAX_PERMUTATION_SITES = 8
MAX_EMBED_DIM = 4096


class EigenSolverError(SemigibbsError):
    pass


def hermitian(a, tol: float = HERMITIAN_REJECT_TOL) -> np.ndarray:
    """Validate a square matrix as Hermitian and return ``(A + A^H) / 2``.

    Real input stays real.  Inputs whose anti-Hermitian part exceeds ``tol``
    (max-abs entry) are rejected.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.complexfloating):
        a = a.astype(float)
    skew = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    if skew > tol:
        raise ValueError(f"matrix is not Hermitian: max |A - A^H| = {skew:.3e} > {tol:g}")
    return (a + a.conj().T) / 2


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray   # ascending
    eigenvectors: np.ndarray  # columns orthonormal

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T

    def apply(self, values: np.ndarray) -> np.ndarray:
        u = self.eigenvectors
        out = (u * values) @ u.conj().T
        return (out + out.conj().T) / 2


MatrixLike = Union[np.ndarray, Spectrum]


def eigh(a) -> Spectrum:
    a = hermitian(a)
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(
            f"eigendecomposition did not converge for {a.shape[0]}x{a.shape[0]} matrix") from exc
    return Spectrum(w, v)


class SpectrumCache:
    """Thread-safe LRU cache of spectra keyed by matrix content."""

    def __init__(self, maxsize: int = 64):
        self.maxsize = maxsize
        self._data: OrderedDict[bytes, Spectrum] = OrderedDict()
        self._lock = threading.Lock()

    @staticmethod
    def key(a: np.ndarray) -> bytes:
        a = np.ascontiguousarray(a)
        h = hashlib.blake2b(a.tobytes(), digest_size=20)
        h.update(str((a.shape, a.dtype.str)).encode())
        return h.digest()

    def get(self, a) -> Spectrum:
        a = np.asarray(a)
        k = self.key(a)
        with self._lock:
            hit = self._data.get(k)
            if hit is not None:
                self._data.move_to_end(k)
                return hit
        spec = eigh(a)
        with self._lock:
            self._data[k] = spec
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)
        return spec

    def __len__(self) -> int:
        return len(self._data)

    def clear(self) -> None:
        with self._lock:
            self._data.clear()


spectrum_cache = SpectrumCache()


def spectrum_of(a: MatrixLike) -> Spectrum:
    return a if isinstance(a, Spectrum) else eigh(a)


def apply_function(a: MatrixLike, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    """Return ``U diag(fn(lambda)) U^H``."""
    spec = spectrum_of(a)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.asarray(fn(spec.eigenvalues))
    if not np.all(np.isfinite(values)):
        raise FloatingPointError(
            "function overflowed on the spectrum; use log_partition or gibbs_density, "
            "which work in the shifted log domain")
    return spec.apply(values)


def _check_beta(beta: float) -> None:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")


def log_partition_from_eigenvalues(eigenvalues: np.ndarray, beta: float) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    lam_min = lam.min()
    return float(-beta * lam_min + np.log(np.sum(np.exp(-beta * (lam - lam_min)))))


def log_partition(a: MatrixLike, beta: float) -> float:
    """``log Tr exp(-beta A)`` with the smallest eigenvalue shifted out."""
    _check_beta(beta)
    return log_partition_from_eigenvalues(spectrum_of(a).eigenvalues, beta)


def gibbs_weights(spec: Spectrum, beta: float) -> np.ndarray:
    lam = spec.eigenvalues
    w = np.exp(-beta * (lam - lam.min()))
    return w / w.sum()


def gibbs_density(h: MatrixLike, beta: float) -> np.ndarray:
    _check_beta(beta)
    spec = spectrum_of(h)
    return spec.apply(gibbs_weights(spec, beta))


def gibbs_expectation(h: MatrixLike, beta: float, a) -> float:
    """``Tr[exp(-beta H) A] / Tr[exp(-beta H)]``."""
    _check_beta(beta)
    spec = spectrum_of(h)
    a = np.asarray(a)
    if a.shape != (spec.dim, spec.dim):
        raise ValueError(f"dimension mismatch: H is {spec.dim}x{spec.dim}, A is {a.shape}")
    u = spec.eigenvectors
    diag = np.einsum("ij,ik,kj->j", u.conj(), a, u)
    return float(np.real(np.dot(gibbs_weights(spec, beta), diag)))


def check_density(rho, tol: float = NEGATIVE_EIG_TOL) -> np.ndarray:
    rho = hermitian(rho)
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValueError(f"density matrix trace {np.trace(rho).real!r} differs from 1")
    lam_min = np.linalg.eigvalsh(rho).min()
    if lam_min < -tol:
        raise ValueError(f"density matrix has negative eigenvalue {lam_min:.3e}")
    return rho


def von_neumann_entropy(rho) -> float:
    """``-Tr rho log rho`` with ``0 log 0 = 0``."""
    lam = np.linalg.eigvalsh(hermitian(rho))
    if lam.min() < -NEGATIVE_EIG_TOL:
        raise ValueError(f"invalid density matrix: eigenvalue {lam.min():.3e}")
    lam = lam[lam > ENTROPY_ZERO]
    return float(-np.sum(lam * np.log(lam)))


# -- tensor-factor manipulations ---------------------------------------------

def _n_sites(dim: int, k: int) -> int:
    n = round(np.log(dim) / np.log(k)) if dim > 1 else 0
    if k**n != dim:
        raise ValueError(f"dimension {dim} is not a power of {k}")
    return n


def _pair_view(a: np.ndarray, n: int, k: int) -> np.ndarray:
    # (row_1..row_n, col_1..col_n) -> (row_1, col_1, ..., row_n, col_n)
    t = a.reshape((k,) * (2 * n))
    order = [ax for site in range(n) for ax in (site, n + site)]
    return t.transpose(order)


def _from_pair_view(t: np.ndarray, n: int, k: int) -> np.ndarray:
    order = [2 * s for s in range(n)] + [2 * s + 1 for s in range(n)]
    return t.transpose(order).reshape(k**n, k**n)


def permute_sites(a: np.ndarray, perm, k: int = 2) -> np.ndarray:
    """Conjugate by the factor permutation: site ``perm[i]`` of the result is site ``i`` of ``a``."""
    n = len(perm)
    t = np.asarray(a).reshape((k,) * (2 * n))
    inv = np.argsort(perm)
    axes = list(inv) + [n + i for i in inv]
    return t.transpose(axes).reshape(k**n, k**n)


def symmetrize(a, n_sites: int | None = None, k: int = 2, method: str = "orbit") -> np.ndarray:
    """Average ``P_pi A P_pi^{-1}`` over all permutations of the tensor factors.

    ``method="orbit"`` averages the matrix-unit coefficients over each
    multiset class of site labels, which is the same group average computed
    without enumerating permutations.  ``method="permutations"`` enumerates
    all N! permutations (N <= 8).
    """
    a = np.asarray(a)
    if n_sites is None:
        n_sites = _n_sites(a.shape[0], k)
    n = n_sites
    if a.shape != (k**n, k**n):
        raise ValueError(f"expected a {k**n}x{k**n} matrix for {n} sites, got {a.shape}")
    if n > MAX_SYMMETRIZE_SITES:
        raise CapacityError(
            f"symmetrize supports at most {MAX_SYMMETRIZE_SITES} sites (got {n}); "
            "use the collective spin-sector path (meanfield.quantize_symbol_collective)")
    if n <= 1:
        return a.copy()
    if method == "permutations":
        if n > MAX_PERMUTATION_SITES:
            raise CapacityError(f"permutation enumeration is limited to {MAX_PERMUTATION_SITES} sites")
        out = np.zeros_like(a, dtype=np.result_type(a.dtype, float))
        count = 0
        for perm in itertools.permutations(range(n)):
            out += permute_sites(a, perm, k)
            count += 1
        return out / count
    if method != "orbit":
        raise ValueError(f"unknown method {method!r}")

    labels = k * k
    base = n + 1
    weight = base ** np.arange(labels, dtype=np.int64)
    key = weight.copy()
    for _ in range(n - 1):
        key = np.add.outer(key, weight).ravel()
    vals = _pair_view(a, n, k).reshape(-1)
    counts = np.bincount(key)
    nz = counts > 0
    if np.iscomplexobj(vals):
        sums = np.bincount(key, weights=vals.real) + 1j * np.bincount(key, weights=vals.imag)
    else:
        sums = np.bincount(key, weights=vals)
    mean = np.zeros_like(sums)
    mean[nz] = sums[nz] / counts[nz]
    out = mean[key].reshape((k,) * (2 * n))
    return _from_pair_view(out, n, k)


def embed_local(a, m_sites: int, n_sites: int, k: int = 2) -> np.ndarray:
    """``S_{M,N}(A) = S_N(A (x) I^{(x)(N-M)})``."""
    a = np.asarray(a)
    if n_sites < m_sites:
        raise ValueError("n_sites must be >= m_sites")
    if k**n_sites > MAX_EMBED_DIM:
        raise CapacityError(f"dimension {k}^{n_sites} exceeds {MAX_EMBED_DIM}")
    if a.shape != (k**m_sites, k**m_sites):
        raise ValueError(f"operator shape {a.shape} does not match {m_sites} sites")
    full = np.kron(a, np.eye(k ** (n_sites - m_sites)))
    return symmetrize(full, n_sites, k)


def reduced_density(rho, n_keep: int, n_sites: int | None = None, k: int = 2) -> np.ndarray:
    """Partial trace over the last ``N - n_keep`` tensor factors."""
    rho = np.asarray(rho)
    if n_sites is None:
        n_sites = _n_sites(rho.shape[0], k)
    if k**n_sites > MAX_EMBED_DIM:
        raise CapacityError(f"dimension {k}^{n_sites} exceeds {MAX_EMBED_DIM}")
    if not 0 <= n_keep <= n_sites:
        raise ValueError(f"n_keep must lie in [0, {n_sites}]")
    if n_keep == 0:
        return np.ones((1, 1))
    dk, dt = k**n_keep, k ** (n_sites - n_keep)
    return np.einsum("ijkj->ik", rho.reshape(dk, dt, dk, dt))
