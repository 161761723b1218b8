"""Block saddle-point system and its exact sparse Schur-complement solver.

Matrices are scipy CSR throughout. The block system

    [ K    B  ] [H]   [F]
    [ B^T -sM ] [m] = [G]

is reduced by eliminating m element-locally (M is block diagonal per
element because the mass space is non-conforming), giving the SPD
operator S = K + (1/s) B M^-1 B^T on the flux dofs and the
back-substitution m = M^-1 (B^T H - G) / s.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class SolverError(RuntimeError):
    def __init__(self, msg, iterate=None, residual=None):
        super().__init__(msg)
        self.iterate = iterate
        self.residual = residual


@dataclass
class BlockSystem:
    K: sp.csr_matrix              # (n_flux, n_flux), SPD
    B: sp.csr_matrix              # (n_flux, n_mass)
    M: sp.csr_matrix              # (n_mass, n_mass), SPD block diagonal
    sigma: float
    F: np.ndarray
    G: np.ndarray


def invert_mass_blocks(M: sp.spmatrix, block_slices) -> sp.csr_matrix:
    """Exact inverse of a per-element block-diagonal SPD matrix."""
    M = M.tocsr()
    data, rows, cols = [], [], []
    for t, sl in enumerate(block_slices):
        blk = M[sl, sl].toarray()
        try:
            c = np.linalg.cholesky(blk)
        except np.linalg.LinAlgError as exc:
            raise SolverError(f"mass block of element {t} is not SPD") from exc
        inv = np.linalg.inv(c)
        blk_inv = inv.T @ inv
        n = blk.shape[0]
        idx = np.arange(sl.start, sl.stop)
        rows.append(np.repeat(idx, n))
        cols.append(np.tile(idx, n))
        data.append(blk_inv.ravel())
    n = M.shape[0]
    out = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n, n),
    ).tocsr()
    out.sum_duplicates()
    return out


def schur_complement(K: sp.spmatrix, B: sp.spmatrix, M_inv: sp.spmatrix) -> sp.csr_matrix:
    """S = K + B M^-1 B^T (exact, sparse)."""
    if K.shape[0] != B.shape[0] or B.shape[1] != M_inv.shape[0]:
        raise ValueError("block dimensions do not conform")
    S = (K + B @ M_inv @ B.T).tocsr()
    S.sum_duplicates()
    return S


def cg_solve(A, rhs, tol=1e-10, max_iter=None, precond_diag=None):
    """Conjugate gradients with optional Jacobi preconditioning.

    Deterministic (x0 = 0). Raises SolverError carrying the last iterate
    and achieved residual when max_iter is exceeded.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.size
    if max_iter is None:
        max_iter = max(10 * n, 100)
    norm_rhs = np.linalg.norm(rhs)
    if norm_rhs == 0.0:
        return np.zeros(n)
    inv_d = 1.0 / precond_diag if precond_diag is not None else None
    x = np.zeros(n)
    r = rhs.copy()
    z = r * inv_d if inv_d is not None else r
    p = z.copy()
    rz = float(r @ z)
    for _ in range(max_iter):
        if np.linalg.norm(r) <= tol * norm_rhs:
            return x
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        if not np.isfinite(r).all():
            raise SolverError("non-finite values in CG iteration")
        z = r * inv_d if inv_d is not None else r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = np.linalg.norm(r) / norm_rhs
    if res <= tol:
        return x
    raise SolverError(f"CG exceeded {max_iter} iterations (residual {res:.3e})",
                      iterate=x, residual=res)


class BlockSolver:
    """Schur-complement solver reusable across time steps.

    method "direct" factorizes S once (sparse LU); "cg" runs Jacobi
    preconditioned conjugate gradients per solve. Essential flux dofs may
    be constrained to prescribed values; rows/columns are eliminated
    symmetrically.
    """

    def __init__(self, K, B, M, sigma, mass_slices, method="direct",
                 tol=1e-10, fixed_dofs=None, fixed_values=None):
        self.K, self.B, self.sigma = K.tocsr(), B.tocsr(), float(sigma)
        self.M = M.tocsr()
        self.tol = tol
        self.method = method
        self.M_inv = invert_mass_blocks(M, mass_slices)
        self.S = schur_complement(K, B, self.M_inv / self.sigma)
        n = self.S.shape[0]
        if fixed_dofs is None:
            fixed_dofs = np.empty(0, dtype=int)
            fixed_values = np.empty(0)
        self.fixed = np.asarray(fixed_dofs, dtype=int)
        self.fixed_values = np.asarray(fixed_values, dtype=float)
        free = np.ones(n, dtype=bool)
        free[self.fixed] = False
        self.free = np.nonzero(free)[0]
        self.S_ff = self.S[self.free][:, self.free].tocsc()
        self.S_fc = self.S[self.free][:, self.fixed].tocsr()
        self._lu = None
        self._diag = None

    def solve(self, F, G):
        """Return (H, m) for block right-hand sides F, G."""
        rhs = F + self.B @ (self.M_inv @ G) / self.sigma
        rhs_f = rhs[self.free]
        if self.fixed.size:
            rhs_f = rhs_f - self.S_fc @ self.fixed_values
        if self.method == "cg":
            if self._diag is None:
                self._diag = np.asarray(self.S_ff.diagonal())
            hf = cg_solve(self.S_ff, rhs_f, tol=self.tol, precond_diag=self._diag)
        else:
            if self._lu is None:
                self._lu = spla.splu(self.S_ff)
            hf = self._lu.solve(rhs_f)
        H = np.empty(self.S.shape[0])
        H[self.free] = hf
        H[self.fixed] = self.fixed_values
        m = self.M_inv @ (self.B.T @ H - G) / self.sigma
        return H, m

    def residuals(self, H, m, F, G):
        """Block-row residual norms; constrained flux rows are excluded
        (their equations are replaced by the prescribed values)."""
        r1 = (self.K @ H + self.B @ m - F)[self.free]
        r2 = self.B.T @ H - self.sigma * (self.M @ m) - G
        return np.linalg.norm(r1), np.linalg.norm(r2)


def solve_block_system(sys: BlockSystem, mass_slices, tol=1e-10, method="direct"):
    """One-shot solve of a BlockSystem; checks both block-row residuals."""
    solver = BlockSolver(sys.K, sys.B, sys.M, sys.sigma, mass_slices,
                         method=method, tol=tol)
    H, m = solver.solve(sys.F, sys.G)
    r1, r2 = solver.residuals(H, m, sys.F, sys.G)
    scale = np.linalg.norm(sys.F) + np.linalg.norm(sys.G)
    if scale > 0 and max(r1, r2) > max(tol, 1e-12) * scale * 100:
        raise SolverError(
            f"block residuals {r1:.3e}, {r2:.3e} exceed tolerance (scale {scale:.3e})"
        )
    return H, m


def dump_matrix_market(A, path):
    from scipy.io import mmwrite

    mmwrite(path, A.tocoo())
