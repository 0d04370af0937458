"""Built-in assertion battery: closed-form and oracle checks that run in seconds."""

from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from . import meanfield as mf
from . import operators as op
from . import schrodinger as sq
from . import sphere as sp
from .polynomials import X, Y, Z, Polynomial, poisson_bracket

CHECKS: list[tuple[str, Callable[[], bool]]] = []


def check(name: str):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn
    return deco


SIGMA3 = np.diag([1.0, -1.0])


@check("eigh reconstructs a random Hermitian matrix")
def _():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50))
    a = (a + a.conj().T) / 2
    return np.max(np.abs(op.eigh(a).reconstruct() - a)) <= 1e-9


@check("log_partition is overflow-safe")
def _():
    return abs(op.log_partition(np.diag([0.0, 1000.0]), 1.0)) <= 1e-12


@check("free-spin Gibbs expectation is tanh(beta B)")
def _():
    return abs(op.gibbs_expectation(-0.7 * SIGMA3, 1.3, SIGMA3) - math.tanh(1.3 * 0.7)) <= 1e-12


@check("entropy of diag(3/4, 1/4)")
def _():
    ref = -(0.75 * math.log(0.75) + 0.25 * math.log(0.25))
    return abs(op.von_neumann_entropy(np.diag([0.75, 0.25])) - ref) <= 1e-14


@check("symmetrize of sigma1 (x) I on two sites")
def _():
    s1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    a = np.kron(s1, np.eye(2))
    return np.allclose(op.symmetrize(a, 2), (a + np.kron(np.eye(2), s1)) / 2, atol=1e-15)


@check("Berezin Q(1) = I and Q((N+2) z) = diag(N - 2m)")
def _():
    ok = True
    for N in (1, 5, 16):
        ok &= np.max(np.abs(sp.berezin_quantize_sphere(N, Polynomial.constant(1.0)) - np.eye(N + 1))) <= 1e-10
        s3 = np.diag(N - 2.0 * np.arange(N + 1))
        ok &= np.max(np.abs(sp.berezin_quantize_sphere(N, (N + 2) * Z) - s3)) <= 1e-9
    return bool(ok)


@check("lower symbol of S3 is N cos(theta)")
def _():
    N, th, ph = 9, 1.1, 0.4
    s3 = np.diag(N - 2.0 * np.arange(N + 1))
    return abs(sp.lower_symbol_sphere(N, s3, th, ph) - N * math.cos(th)) <= 1e-12


@check("Poisson bracket {x, y} = z")
def _():
    return poisson_bracket(X, Y) == Z


@check("classical Gibbs <z> for h = -z is coth(beta) - 1/beta")
def _():
    return abs(sp.classical_gibbs_sphere(-1 * Z, 1.0, Z) - (1 / math.tanh(1.0) - 1.0)) <= 1e-10


@check("classical KMS identity for h = z, f = x, g = y")
def _():
    return sp.classical_kms_residual(Z, 1.0, X, Y) <= 1e-8


@check("harmonic oscillator spectrum hbar (2n + 1)")
def _():
    hbar = 0.2
    H = sq.build_hamiltonian(hbar, sq.PotentialSpec.preset("harmonic"), sq.Grid1D(8.0, 256))
    lam = np.linalg.eigvalsh(H)[:10]
    return np.max(np.abs(lam - hbar * (2 * np.arange(10) + 1))) <= 1e-8


@check("Gaussian observable quantizes to its Gaussian smoothing")
def _():
    hbar, grid = 0.2, sq.Grid1D(8.0, 128)
    q = np.diag(sq.berezin_quantize_position(hbar, lambda x: np.exp(-x**2), grid))
    ref = np.exp(-grid.x**2 / (1 + hbar)) / math.sqrt(1 + hbar)
    return np.max(np.abs(q - ref)) <= 1e-12


@check("sector multiplicities sum to 2^N")
def _():
    return all(mf.SectorDecomposition.of(N).total_dimension() == 2**N for N in range(1, 61))


@check("LMG free spin: density is -(1/beta) log(2 cosh beta B)")
def _():
    p = mf.LMGParams(0.0, 0.0, 0.8)
    ref = -math.log(2 * math.cosh(0.8 * 1.5)) / 1.5
    return all(abs(mf.local_free_energy_density(N, p, 1.5) - ref) <= 1e-12 for N in (1, 7, 64))


@check("LMG sector sum matches brute force at N = 6")
def _():
    p = mf.LMGParams(-1.0, 0.3, 0.5)
    return abs(mf.local_free_energy_density(6, p, 1.2) - mf.local_free_energy_density_bruteforce(6, p, 1.2)) <= 1e-9


@check("mean-field minimum for h0 = -z is -log(2 cosh 1)")
def _():
    res = mf.minimize_mf_free_energy(-1 * Z, 1.0)
    return abs(res.value + math.log(2 * math.cosh(1.0))) <= 1e-12 and len(res.minimizers) == 1


@check("gap equation fixed point for h0 = -B z")
def _():
    r = mf.gap_equation_solve(-0.6 * Z, 2.0, [0.3, -0.2, 0.1]).r
    return np.linalg.norm(r - [0, 0, math.tanh(1.2)]) <= 1e-10


def run_selfcheck(verbose: bool = False) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        t0 = time.perf_counter()
        try:
            ok = bool(fn())
            detail = ""
        except Exception as exc:  # noqa: BLE001 - reported as a failure
            ok, detail = False, f" ({type(exc).__name__}: {exc})"
        all_ok &= ok
        line = f"{'PASS' if ok else 'FAIL'} {name}{detail}"
        if verbose:
            line += f" [{time.perf_counter() - t0:.2f}s]"
        print(line)
    print(f"selfcheck: {'all checks passed' if all_ok else 'FAILURES'}")
    return all_ok
