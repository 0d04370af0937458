"""Real polynomials in the ambient coordinates (x, y, z).

The same type serves as a function on the sphere S^2 and as a symbol on the
Bloch ball.  Monomials are keyed by exponent triples ``(a, b, c)`` meaning
``x**a * y**b * z**c``; the text form used in config files writes the same
monomial as e.g. ``"x2y"`` for ``x**2 * y`` and ``"1"`` for the constant.
"""

from __future__ import annotations

import re
from typing import Iterable, Mapping

import numpy as np

Exponent = tuple[int, int, int]

_VARS = "xyz"
_TOKEN = re.compile(r"([xyz])(\d*)")


def parse_monomial(key: str) -> Exponent:
    """Parse ``"x2yz3"`` into ``(2, 1, 3)``; ``"1"`` and ``""`` give ``(0, 0, 0)``."""
    key = key.strip()
    if key in ("", "1"):
        return (0, 0, 0)
    exps = [0, 0, 0]
    pos = 0
    for match in _TOKEN.finditer(key):
        if match.start() != pos:
            break
        var, power = match.groups()
        exps[_VARS.index(var)] += int(power) if power else 1
        pos = match.end()
    if pos != len(key):
        raise ValueError(f"invalid monomial key {key!r}; expected e.g. 'x2y', 'z', '1'")
    return tuple(exps)  # type: ignore[return-value]


def format_monomial(exp: Exponent) -> str:
    if sum(exp) == 0:
        return "1"
    parts = []
    for var, power in zip(_VARS, exp):
        if power == 1:
            parts.append(var)
        elif power > 1:
            parts.append(f"{var}{power}")
    return "".join(parts)


class Polynomial:
    """Sparse real polynomial in x, y, z.

    Coefficients are never reduced modulo ``x**2 + y**2 + z**2 = 1``; the
    sphere relation only matters when a polynomial is evaluated.
    """

    __slots__ = ("_terms", "_derivs")

    def __init__(self, terms: Mapping[Exponent, float] | None = None):
        clean: dict[Exponent, float] = {}
        for exp, coef in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != 3 or min(exp) < 0:
                raise ValueError(f"bad exponent {exp!r}")
            coef = float(coef)
            if coef != 0.0:
                clean[exp] = clean.get(exp, 0.0) + coef
        self._terms = {e: c for e, c in clean.items() if c != 0.0}
        self._derivs: list | None = None

    # construction -----------------------------------------------------------

    @classmethod
    def constant(cls, value: float) -> "Polynomial":
        return cls({(0, 0, 0): value})

    @classmethod
    def coordinate(cls, axis: int | str) -> "Polynomial":
        if isinstance(axis, str):
            axis = _VARS.index(axis)
        exp = [0, 0, 0]
        exp[axis] = 1
        return cls({tuple(exp): 1.0})

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "Polynomial":
        terms: dict[Exponent, float] = {}
        for key, coef in data.items():
            exp = parse_monomial(key)
            terms[exp] = terms.get(exp, 0.0) + float(coef)
        return cls(terms)

    def to_dict(self) -> dict[str, float]:
        return {format_monomial(e): c for e, c in sorted(self._terms.items())}

    # inspection -------------------------------------------------------------

    @property
    def terms(self) -> dict[Exponent, float]:
        return dict(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def __iter__(self):
        return iter(sorted(self._terms.items()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, float)):
            other = Polynomial.constant(other)
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(tuple(sorted(self._terms.items())))

    def __repr__(self) -> str:
        if not self._terms:
            return "Polynomial(0)"
        body = " + ".join(f"{c:g}*{format_monomial(e)}" for e, c in sorted(self._terms.items()))
        return f"Polynomial({body})"

    # arithmetic -------------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, float)):
            other = Polynomial.constant(other)
        terms = dict(self._terms)
        for e, c in other._terms.items():
            terms[e] = terms.get(e, 0.0) + c
        return Polynomial(terms)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({e: -c for e, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, Polynomial) else -float(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return Polynomial({e: c * other for e, c in self._terms.items()})
        terms: dict[Exponent, float] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                terms[e] = terms.get(e, 0.0) + c1 * c2
        return Polynomial(terms)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = Polynomial.constant(1.0)
        for _ in range(n):
            out = out * self
        return out

    def derivative(self, axis: int) -> "Polynomial":
        terms: dict[Exponent, float] = {}
        for e, c in self._terms.items():
            if e[axis] == 0:
                continue
            d = list(e)
            d[axis] -= 1
            terms[tuple(d)] = terms.get(tuple(d), 0.0) + c * e[axis]
        return Polynomial(terms)

    def gradient(self) -> list["Polynomial"]:
        if self._derivs is None:
            self._derivs = [self.derivative(i) for i in range(3)]
        return list(self._derivs)

    def transformed(self, matrix: np.ndarray) -> "Polynomial":
        """Return ``r -> p(matrix @ r)`` as a polynomial."""
        matrix = np.asarray(matrix, dtype=float)
        images = [
            Polynomial({(1, 0, 0): matrix[i, 0], (0, 1, 0): matrix[i, 1], (0, 0, 1): matrix[i, 2]})
            for i in range(3)
        ]
        out = Polynomial()
        for e, c in self._terms.items():
            out = out + c * (images[0] ** e[0]) * (images[1] ** e[1]) * (images[2] ** e[2])
        return out

    # evaluation -------------------------------------------------------------

    def __call__(self, x, y, z):
        x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
        out = np.zeros(np.broadcast(x, y, z).shape)
        for (a, b, c), coef in self._terms.items():
            out = out + coef * x**a * y**b * z**c
        return out if out.ndim else float(out)

    def at(self, r: Iterable[float]) -> float:
        x, y, z = (float(v) for v in r)
        return float(sum(c * x**a * y**b * z**d for (a, b, d), c in self._terms.items()))

    def gradient_at(self, r: Iterable[float]) -> np.ndarray:
        return np.array([g.at(r) for g in self.gradient()])

    def hessian_at(self, r: Iterable[float]) -> np.ndarray:
        grad = self.gradient()
        return np.array([[grad[i].derivative(j).at(r) for j in range(3)] for i in range(3)])


X = Polynomial.coordinate(0)
Y = Polynomial.coordinate(1)
Z = Polynomial.coordinate(2)

# {x, y} = z, {y, z} = x, {z, x} = y
_LEVI_CIVITA = {(0, 1): (2, 1.0), (1, 0): (2, -1.0), (1, 2): (0, 1.0),
                (2, 1): (0, -1.0), (2, 0): (1, 1.0), (0, 2): (1, -1.0)}


def poisson_bracket(f: Polynomial, g: Polynomial) -> Polynomial:
    """Lie-Poisson bracket on R^3 restricted to the sphere: ``r . (grad f x grad g)``."""
    df, dg = f.gradient(), g.gradient()
    out = Polynomial()
    for (i, j), (k, sign) in _LEVI_CIVITA.items():
        if df[i].is_zero() or dg[j].is_zero():
            continue
        out = out + sign * Polynomial.coordinate(k) * df[i] * dg[j]
    return out


def monomials(max_degree: int) -> list[Exponent]:
    return [(a, b, d - a - b) for d in range(max_degree + 1)
            for a in range(d, -1, -1) for b in range(d - a, -1, -1)]


def random_polynomial(rng: np.random.Generator, max_degree: int, n_terms: int = 3,
                      scale: float = 1.0) -> Polynomial:
    """Seeded random polynomial with ``n_terms`` monomials of degree 1..max_degree."""
    pool = [e for e in monomials(max_degree) if sum(e) > 0]
    picks = rng.choice(len(pool), size=min(n_terms, len(pool)), replace=False)
    coefs = rng.uniform(-1.0, 1.0, size=len(picks)) * scale / len(picks)
    return Polynomial({pool[i]: c for i, c in zip(picks, coefs)})
