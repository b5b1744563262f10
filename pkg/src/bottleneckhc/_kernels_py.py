"""Pure numpy/scipy fallback for the evaluation kernel.

Same contract as the compiled ``_kernels`` extension. Row sums go through a
CSR mat-vec, which accumulates each row's terms sequentially in storage
order (graded-lex within each polynomial).
"""

import numpy as np
import scipy.sparse as sp

IMPLEMENTATION = "python"


class Evaluator:
    def __init__(self, tables):
        V = tables.num_vars
        R = tables.num_polys
        M = len(tables.mono_ptr) - 1
        E = np.zeros((M, V), dtype=np.intp)
        for m in range(M):
            lo, hi = tables.mono_ptr[m], tables.mono_ptr[m + 1]
            E[m, tables.mono_var[lo:hi]] = tables.mono_exp[lo:hi]
        self._V = V
        self._R = R
        self._E = E
        self._cols = np.arange(V)
        self._maxdeg = int(tables.max_deg.max()) if V else 0
        rows = np.repeat(
            np.arange(tables.num_rows), np.diff(tables.row_ptr).astype(np.intp)
        )
        A = sp.csr_matrix(
            (tables.term_coef, (rows, tables.term_mono)), shape=(tables.num_rows, M)
        )
        # keep per-row storage order: coo->csr sums duplicates but preserves order otherwise
        self._A_val = A[:R]
        self._A_jac = A[R:]
        self._A_abs = abs(self._A_val)

    def _monomials(self, z):
        pw = np.empty((self._V, self._maxdeg + 1), dtype=np.complex128)
        pw[:, 0] = 1.0
        for k in range(1, self._maxdeg + 1):
            pw[:, k] = pw[:, k - 1] * z
        return pw[self._cols, self._E].prod(axis=1)

    def __call__(self, z, want_jac):
        mono = self._monomials(z)
        vals = self._A_val @ mono
        scale = self._A_abs @ np.abs(mono)
        jac = None
        if want_jac:
            jac = (self._A_jac @ mono).reshape(self._R, self._V)
        return vals, jac, scale
