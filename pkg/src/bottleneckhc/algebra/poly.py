"""Sparse multivariate polynomials over the complex numbers."""

from __future__ import annotations

import math
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

# coefficients below this magnitude are dropped
COEF_FLOOR = 1e-300

Exponent = tuple[int, ...]


def _grlex_key(exp: Exponent) -> tuple:
    return (-sum(exp), tuple(-e for e in exp))


class Poly:
    """Immutable sparse polynomial in ``num_vars`` variables.

    Terms are stored as a mapping from exponent tuples to complex
    coefficients. Terms are kept in graded-lex order (highest total degree
    first, ties broken lexicographically with larger exponents of earlier
    variables first); this is also the summation order of :meth:`evaluate`.
    """

    __slots__ = ("num_vars", "_terms")

    def __init__(self, num_vars: int, terms: Mapping[Exponent, complex] | Iterable = ()):
        if num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exponent, complex] = {}
        for exp, c in items:
            exp = tuple(int(e) for e in exp)
            if len(exp) != num_vars:
                raise ValueError(f"exponent {exp} does not have {num_vars} entries")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent in {exp}")
            c = complex(c)
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise ValueError(f"non-finite coefficient {c}")
            acc[exp] = acc.get(exp, 0j) + c
        self.num_vars = num_vars
        self._terms = {
            e: acc[e] for e in sorted(acc, key=_grlex_key) if abs(acc[e]) >= COEF_FLOOR
        }

    # construction helpers
    @classmethod
    def constant(cls, num_vars: int, c: complex) -> "Poly":
        return cls(num_vars, {(0,) * num_vars: c})

    @classmethod
    def variable(cls, num_vars: int, index: int, coef: complex = 1.0) -> "Poly":
        exp = [0] * num_vars
        exp[index] = 1
        return cls(num_vars, {tuple(exp): coef})

    @classmethod
    def linear(cls, coefs: Sequence[complex], const: complex = 0.0) -> "Poly":
        """Affine form ``sum(coefs[i] * x_i) + const``."""
        n = len(coefs)
        terms = [(tuple(int(k == i) for k in range(n)), c) for i, c in enumerate(coefs)]
        terms.append(((0,) * n, const))
        return cls(n, terms)

    @property
    def terms(self) -> dict[Exponent, complex]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self) -> int:
        return len(self._terms)

    @property
    def degree(self) -> int:
        return max((sum(e) for e in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def degree_in(self, indices: Iterable[int]) -> int:
        """Maximum total degree in the given subset of variables."""
        idx = list(indices)
        return max((sum(e[i] for i in idx) for e in self._terms), default=0)

    # arithmetic
    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            if other.num_vars != self.num_vars:
                raise ValueError("polynomials live in different variable spaces")
            return other
        return Poly.constant(self.num_vars, complex(other))

    def __add__(self, other) -> "Poly":
        other = self._coerce(other)
        return Poly(self.num_vars, list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.num_vars, {e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = complex(other)
            return Poly(self.num_vars, {e: c * v for e, v in self._terms.items()})
        other = self._coerce(other)
        out: list = []
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                out.append((tuple(a + b for a, b in zip(e1, e2)), c1 * c2))
        return Poly(self.num_vars, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers are supported")
        result = Poly.constant(self.num_vars, 1.0)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            return NotImplemented
        return self.num_vars == other.num_vars and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.num_vars, tuple(self._terms.items())))

    def __repr__(self) -> str:
        return f"Poly({self.num_vars}, {self._terms!r})"

    def diff(self, j: int) -> "Poly":
        out = []
        for e, c in self._terms.items():
            if e[j]:
                ne = list(e)
                ne[j] -= 1
                out.append((tuple(ne), c * e[j]))
        return Poly(self.num_vars, out)

    def embed(self, num_vars: int, index_map: Sequence[int]) -> "Poly":
        """Re-express in a larger variable space; variable ``i`` becomes ``index_map[i]``."""
        out = []
        for e, c in self._terms.items():
            ne = [0] * num_vars
            for i, k in enumerate(e):
                ne[index_map[i]] += k
            out.append((tuple(ne), c))
        return Poly(num_vars, out)

    def scale_vars(self, factors: Sequence[complex]) -> "Poly":
        """The polynomial ``z -> p(diag(factors) z)``."""
        return Poly(
            self.num_vars,
            {e: c * np.prod([f**k for f, k in zip(factors, e)]) for e, c in self._terms.items()},
        )

    def evaluate(self, point: Sequence[complex]) -> complex:
        """Value at ``point``; terms summed left to right in graded-lex order."""
        if len(point) != self.num_vars:
            raise ValueError(f"point has {len(point)} coordinates, expected {self.num_vars}")
        z = [complex(v) for v in point]
        total = 0j
        for e, c in self._terms.items():
            m = c
            for zi, k in zip(z, e):
                for _ in range(k):
                    m *= zi
            total += m
        return total

    __call__ = evaluate


class PolySystem:
    """An ordered list of polynomials over named variables.

    ``declared_dim`` is the dimension of the variety the polynomials cut out,
    as supplied by the user; it fixes the codimension used when squaring.
    """

    def __init__(self, vars: Sequence[str], polys: Sequence[Poly], declared_dim: int = 0):
        self.vars = tuple(vars)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError("duplicate variable names")
        self.polys = tuple(polys)
        for p in self.polys:
            if p.num_vars != len(self.vars):
                raise ValueError("polynomial variable count does not match the registry")
        self.declared_dim = int(declared_dim)
        if not 0 <= self.declared_dim < max(len(self.vars), 1):
            raise ValueError(f"declared dimension {declared_dim} out of range for n={len(self.vars)}")

    @property
    def ambient_dim(self) -> int:
        return len(self.vars)

    @property
    def codim(self) -> int:
        return self.ambient_dim - self.declared_dim

    def __len__(self) -> int:
        return len(self.polys)

    def __iter__(self):
        return iter(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolySystem):
            return NotImplemented
        return (self.vars, self.polys, self.declared_dim) == (
            other.vars,
            other.polys,
            other.declared_dim,
        )

    def __getstate__(self):
        # cached derivatives and compiled kernels are rebuilt on demand
        return {k: v for k, v in self.__dict__.items() if k not in ("derivatives", "compiled")}

    def __repr__(self) -> str:
        return f"PolySystem(vars={self.vars}, {len(self.polys)} polys, dim={self.declared_dim})"

    @property
    def degrees(self) -> list[int]:
        return [p.degree for p in self.polys]

    @cached_property
    def derivatives(self) -> tuple[tuple[Poly, ...], ...]:
        """Symbolic partials, ``derivatives[i][j] = d polys[i] / d vars[j]``."""
        return tuple(tuple(p.diff(j) for j in range(self.ambient_dim)) for p in self.polys)

    @cached_property
    def compiled(self):
        from .compiled import CompiledSystem

        return CompiledSystem(self.polys, self.ambient_dim)

    def evaluate(self, point) -> np.ndarray:
        return np.array([p.evaluate(point) for p in self.polys], dtype=complex)

    def jacobian(self, point) -> np.ndarray:
        return jacobian(self, point)

    def with_polys(self, polys: Sequence[Poly]) -> "PolySystem":
        return PolySystem(self.vars, polys, self.declared_dim)


def evaluate(p: Poly, point: Sequence[complex]) -> complex:
    return p.evaluate(point)


def jacobian(system: PolySystem, point: Sequence[complex]) -> np.ndarray:
    """Jacobian matrix of ``system`` at ``point`` from the cached symbolic partials."""
    if len(point) != system.ambient_dim:
        raise ValueError(
            f"point has {len(point)} coordinates, expected {system.ambient_dim}"
        )
    _, jac, _ = system.compiled.evaluate(np.asarray(point, dtype=complex), True)
    return jac
