"""Dense complex linear-algebra kernel shared by all other modules.

Everything here operates on plain ``numpy`` arrays holding complex matrices.
The vectorization convention is column-stacking throughout the package:
``vec(A X B) = kron(B.T, A) @ vec(X)``.  All matrices in scope are tiny
(at most 16x16), so the routines favour accuracy and determinism over speed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "EigenConvergenceError",
    "EigenResult",
    "MinNormSolution",
    "kron",
    "vec",
    "unvec",
    "eigendecompose",
    "expm",
    "min_norm_solve",
    "fix_phase",
]


class EigenConvergenceError(RuntimeError):
    """Eigensolver failed to reach the residual contract after refinement."""

    def __init__(self, message, matrix_norm, iterations):
        super().__init__(f"{message} (matrix_norm={matrix_norm:.3e}, iterations={iterations})")
        self.matrix_norm = matrix_norm
        self.iterations = iterations


def _as_matrix(a, name="matrix"):
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def kron(a, b):
    """Kronecker product of two complex matrices."""
    return np.kron(_as_matrix(a, "a"), _as_matrix(b, "b"))


def vec(m):
    """Column-stack a square matrix into a vector of length d**2."""
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError(f"vec requires a square matrix, got shape {m.shape}")
    return m.flatten(order="F")


def unvec(v, d):
    """Inverse of :func:`vec`; reshapes a length-d**2 vector to a d x d matrix."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 1 or v.size != d * d:
        raise ValueError(f"unvec expected a vector of length {d * d}, got shape {v.shape}")
    return v.reshape((d, d), order="F")


def fix_phase(v):
    """Normalize a vector and rotate its global phase.

    The largest-magnitude component is made real and positive; magnitude ties
    are broken by the lowest index, which keeps the output deterministic for
    golden tests.
    """
    v = np.asarray(v, dtype=complex)
    nrm = np.linalg.norm(v)
    if nrm == 0:
        return v
    v = v / nrm
    mags = np.abs(v)
    mmax = mags.max()
    k = int(np.flatnonzero(mags >= mmax * (1.0 - 1e-12))[0])
    ph = v[k] / abs(v[k])
    return v / ph


@dataclass(frozen=True)
class EigenResult:
    """Full eigendecomposition of a dense complex matrix.

    ``vectors[:, k]`` is the unit-norm, phase-fixed right eigenvector for
    ``eigenvalues[k]``; ``residual_norms[k]`` is ``||M v_k - lambda_k v_k||_2``.
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    residual_norms: np.ndarray

    def __len__(self):
        return len(self.eigenvalues)


def _sort_key(lams):
    # |Re| ascending, ties broken by Re descending then Im ascending
    return np.lexsort((lams.imag, -lams.real, np.abs(lams.real)))


def eigendecompose(m, max_refine=5):
    """All eigenvalues and right eigenvectors of a general complex matrix.

    Near an exceptional point the returned eigenvectors may be nearly
    parallel; that is reported through the residuals, not treated as an
    error.  Raises :class:`EigenConvergenceError` if the residual contract
    ``r_k <= 1e-10 * ||M||_F`` cannot be met after bounded inverse-iteration
    refinement.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise ValueError("eigendecompose requires a square matrix")
    mnorm = np.linalg.norm(m)
    try:
        lams, vs = scipy.linalg.eig(m)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise EigenConvergenceError(str(exc), mnorm, 0) from exc

    bound = 1e-10 * max(mnorm, 1e-300)
    for it in range(max_refine + 1):
        resid = np.linalg.norm(m @ vs - vs * lams[None, :], axis=0)
        bad = np.flatnonzero(resid > bound)
        if bad.size == 0:
            break
        if it == max_refine:
            raise EigenConvergenceError(
                "eigenvector residuals did not converge", mnorm, it
            )
        for k in bad:
            # one step of shifted inverse iteration; the small diagonal shift
            # keeps the solve well posed when lambda_k is (near) exact
            shift = lams[k] + 1e-13 * max(mnorm, 1.0)
            try:
                w = np.linalg.solve(m - shift * np.eye(len(m)), vs[:, k])
                vs[:, k] = w / np.linalg.norm(w)
                lams[k] = np.vdot(vs[:, k], m @ vs[:, k])
            except np.linalg.LinAlgError:
                continue

    order = _sort_key(lams)
    lams = lams[order]
    vs = vs[:, order]
    vs = np.column_stack([fix_phase(vs[:, k]) for k in range(vs.shape[1])])
    resid = np.linalg.norm(m @ vs - vs * lams[None, :], axis=0)
    return EigenResult(eigenvalues=lams, vectors=vs, residual_norms=resid)


def expm(m):
    """Matrix exponential (scaling-and-squaring with Pade approximation)."""
    return scipy.linalg.expm(_as_matrix(m))


@dataclass(frozen=True)
class MinNormSolution:
    """Minimum-norm least-squares solution of ``a @ x = b``.

    ``consistent`` is False when the residual exceeds ``1e-6 * ||b||``,
    signalling that ``b`` is (numerically) outside the range of ``a``.
    """

    x: np.ndarray
    residual: float
    consistent: bool
    rank: int


def min_norm_solve(a, b, tol=1e-9):
    """Minimum-Euclidean-norm solution of a possibly singular linear system.

    Singular values below ``tol * sigma_max`` are truncated, so for a
    consistent singular system the returned vector is the minimum-norm
    representative (orthogonal to the truncated nullspace directions).
    """
    a = _as_matrix(a, "a")
    b = np.asarray(b, dtype=complex)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"shape mismatch: a is {a.shape}, b has length {b.shape[0]}")
    u, s, vh = np.linalg.svd(a)
    if s.size == 0 or s[0] == 0.0:
        x = np.zeros(a.shape[1], dtype=complex)
        rank = 0
    else:
        keep = s > tol * s[0]
        rank = int(np.count_nonzero(keep))
        coeff = (u[:, : s.size].conj().T @ b)[keep] / s[keep]
        x = vh[keep].conj().T @ coeff
    residual = float(np.linalg.norm(a @ x - b))
    bnorm = float(np.linalg.norm(b))
    consistent = residual <= 1e-6 * bnorm if bnorm > 0 else True
    return MinNormSolution(x=x, residual=residual, consistent=consistent, rank=rank)
