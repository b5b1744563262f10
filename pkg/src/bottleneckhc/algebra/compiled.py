"""Flattened evaluation tables for a list of polynomials and their partials."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import kernels
from .poly import Poly


@dataclass(frozen=True)
class EvalTables:
    """Monomial and term tables consumed by the evaluation kernels.

    Rows ``0..R-1`` hold the polynomials themselves, rows ``R + i*V + j``
    hold ``d p_i / d z_j``. Each row is a run of terms in
    ``term_mono``/``term_coef`` delimited by ``row_ptr``; monomials are stored
    as sparse (variable, exponent) runs delimited by ``mono_ptr``.
    """

    num_vars: int
    num_polys: int
    max_deg: np.ndarray
    mono_ptr: np.ndarray
    mono_var: np.ndarray
    mono_exp: np.ndarray
    row_ptr: np.ndarray
    term_mono: np.ndarray
    term_coef: np.ndarray

    @property
    def num_rows(self) -> int:
        return len(self.row_ptr) - 1


def build_tables(polys: Sequence[Poly], num_vars: int) -> EvalTables:
    rows = list(polys) + [p.diff(j) for p in polys for j in range(num_vars)]
    mono_index: dict[tuple, int] = {}
    row_ptr = [0]
    term_mono: list[int] = []
    term_coef: list[complex] = []
    for p in rows:
        for e, c in p.items():
            k = mono_index.setdefault(e, len(mono_index))
            term_mono.append(k)
            term_coef.append(c)
        row_ptr.append(len(term_mono))
    mono_ptr = [0]
    mono_var: list[int] = []
    mono_exp: list[int] = []
    max_deg = [0] * num_vars
    for e in mono_index:
        for v, k in enumerate(e):
            if k:
                mono_var.append(v)
                mono_exp.append(k)
                max_deg[v] = max(max_deg[v], k)
        mono_ptr.append(len(mono_var))
    return EvalTables(
        num_vars=num_vars,
        num_polys=len(polys),
        max_deg=np.array(max_deg, dtype=np.int32),
        mono_ptr=np.array(mono_ptr, dtype=np.int64),
        mono_var=np.array(mono_var, dtype=np.int32),
        mono_exp=np.array(mono_exp, dtype=np.int32),
        row_ptr=np.array(row_ptr, dtype=np.int64),
        term_mono=np.array(term_mono, dtype=np.int32),
        term_coef=np.array(term_coef, dtype=np.complex128),
    )


class CompiledSystem:
    """Fast evaluator for values, Jacobian and per-equation magnitude scale.

    The scale of equation ``i`` is ``sum |c| |z^a|`` over its terms; the
    scaled residual ``|p_i(z)| / (1 + scale_i)`` is a backward-error measure
    that stays meaningful at large coordinates.
    """

    def __init__(self, polys: Sequence[Poly], num_vars: int):
        self.num_vars = num_vars
        self.num_polys = len(polys)
        self.tables = build_tables(polys, num_vars)
        self._eval = kernels.Evaluator(self.tables)

    def evaluate(self, z: np.ndarray, want_jac: bool = True):
        """Return ``(values, jacobian or None, scale)`` at ``z``."""
        z = np.ascontiguousarray(z, dtype=np.complex128)
        if z.shape != (self.num_vars,):
            raise ValueError(f"point has shape {z.shape}, expected ({self.num_vars},)")
        return self._eval(z, want_jac)

    def values(self, z) -> np.ndarray:
        return self.evaluate(z, False)[0]

    def scaled_residual(self, z) -> float:
        vals, _, scale = self.evaluate(z, False)
        if len(vals) == 0:
            return 0.0
        return float(np.max(np.abs(vals) / (1.0 + scale)))
