"""Spectral analysis of superoperators.

Sorted eigendecompositions with eigenmatrices, steady-state extraction,
eigenvalue-branch tracking across parameter sweeps, exceptional-point
location by minimal-gap refinement, and Jordan-chain machinery for the
defective points themselves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import eigendecompose, min_norm_solve, unvec, vec  # noqa: F401 (vec used in jordan_chain)

__all__ = [
    "SpectralDecomposition",
    "BranchTrack",
    "EpEstimate",
    "JordanChainResult",
    "MatrixOperator",
    "SteadyStateError",
    "decompose",
    "steady_state",
    "sweep",
    "locate_ep",
    "jordan_chain",
    "jordan_block_size",
    "nhh_operator",
]

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class SteadyStateError(ValueError):
    """No eigenvalue close enough to zero to define a steady state."""


@dataclass(frozen=True)
class MatrixOperator:
    """Adapter presenting a plain operator to the superoperator machinery.

    Lets :func:`decompose` and :func:`locate_ep` run directly on a matrix
    such as the effective Hamiltonian (its eigen"matrices" become column
    vectors); the overlap and gap logic is unchanged.
    """

    matrix: np.ndarray

    @property
    def dim(self):
        return self.matrix.shape[0]


def nhh_operator(model):
    """The effective non-Hermitian Hamiltonian wrapped for spectral analysis."""
    from .lindblad import effective_hamiltonian

    return MatrixOperator(effective_hamiltonian(model))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues sorted by |Re| ascending (ties: Re descending, Im ascending).

    Eigenmatrices have unit Frobenius norm with the global phase fixed by the
    largest-magnitude entry.
    """

    eigenvalues: np.ndarray
    eigenmatrices: list[np.ndarray]
    residuals: np.ndarray
    source: "object"

    def __len__(self):
        return len(self.eigenvalues)


def decompose(superop):
    """Sorted spectral decomposition of a superoperator.

    Also accepts a :class:`MatrixOperator`; eigenvectors of a plain operator
    are returned as single-column matrices.
    """
    res = eigendecompose(superop.matrix)
    d = superop.dim
    n = superop.matrix.shape[0]
    if n == d * d:
        mats = [unvec(res.vectors[:, k], d) for k in range(len(res))]
    else:
        mats = [res.vectors[:, k].reshape(-1, 1) for k in range(len(res))]
    return SpectralDecomposition(
        eigenvalues=res.eigenvalues,
        eigenmatrices=mats,
        residuals=res.residual_norms,
        source=superop,
    )


def steady_state(decomposition):
    """Trace-one Hermitian steady state from the zero eigenvalue.

    Requires a trace-preserving generator (full Liouvillian or hybrid with
    q = 1); otherwise there is no eigenvalue at zero and a
    :class:`SteadyStateError` is raised.
    """
    lam0 = decomposition.eigenvalues[0]
    scale = np.linalg.norm(decomposition.source.matrix)
    if abs(lam0) > 1e-10 * max(scale, 1e-300):
        raise SteadyStateError(
            f"smallest |Re| eigenvalue {lam0} is not numerically zero "
            f"(scale {scale:.3e}); the generator does not preserve the trace"
        )
    rho = decomposition.eigenmatrices[0]
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho)
    if abs(tr) < 1e-12:
        raise SteadyStateError("zero-eigenvalue eigenmatrix is traceless")
    return rho / tr


def _overlap_matrix(mats_a, mats_b):
    n = len(mats_a)
    ov = np.empty((n, n))
    for i, a in enumerate(mats_a):
        va = np.ravel(a)
        for j, b in enumerate(mats_b):
            ov[i, j] = abs(np.vdot(va, np.ravel(b)))
    return ov


def _match_branches(prev_mats, cur_mats):
    """Permutation p with cur[p[i]] continuing branch i, by maximal overlap.

    Greedy assignment on the Frobenius-overlap matrix; if the weakest greedy
    match drops below 0.5 (heavy eigenmatrix mixing near an EP) fall back to
    a globally optimal assignment.
    """
    ov = _overlap_matrix(prev_mats, cur_mats)
    n = ov.shape[0]
    perm = np.full(n, -1)
    work = ov.copy()
    worst = 1.0
    for _ in range(n):
        i, j = np.unravel_index(np.argmax(work), work.shape)
        perm[i] = j
        worst = min(worst, ov[i, j])
        work[i, :] = -1.0
        work[:, j] = -1.0
    if worst < 0.5:
        from scipy.optimize import linear_sum_assignment

        rows, cols = linear_sum_assignment(-ov)
        perm = np.empty(n, dtype=int)
        perm[rows] = cols
    return perm


@dataclass(frozen=True)
class BranchTrack:
    """Eigenvalue branches followed continuously along a parameter grid.

    ``eigenvalues[b, k]`` is branch b at grid point k; branch identity is
    propagated between adjacent grid points by maximal eigenmatrix overlap,
    which undoes the index reshuffling a plain magnitude sort would produce.
    """

    parameter_grid: np.ndarray
    eigenvalues: np.ndarray  # (n_branches, n_points)
    eigenmatrices: list[list[np.ndarray]]  # [branch][point]
    residuals: np.ndarray  # (n_branches, n_points)

    @property
    def n_branches(self):
        return self.eigenvalues.shape[0]

    def to_rows(self, q):
        """Rows for the sweep CSV: param, q, branch, re/im lambda, residual."""
        rows = []
        for k, g in enumerate(self.parameter_grid):
            for b in range(self.n_branches):
                lam = self.eigenvalues[b, k]
                rows.append(
                    {
                        "param": float(g),
                        "q": float(q),
                        "branch": b,
                        "re_lambda": float(lam.real),
                        "im_lambda": float(lam.imag),
                        "residual": float(self.residuals[b, k]),
                    }
                )
        return rows


def sweep(model_family, grid, q, build=None):
    """Track the hybrid-generator spectrum along a parameter grid.

    ``model_family(g)`` must return the model at parameter value g; ``build``
    turns a model into the superoperator under study (defaults to the hybrid
    generator at the given q).
    """
    from .lindblad import hybrid_liouvillian

    grid = np.asarray(grid, dtype=float)
    if grid.size < 1:
        raise ValueError("sweep grid must contain at least one point")
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise ValueError("sweep grid must be strictly increasing")
    if build is None:
        build = lambda model: hybrid_liouvillian(model, q)

    decs = [decompose(build(model_family(g))) for g in grid]
    n = len(decs[0])
    lams = np.empty((n, grid.size), dtype=complex)
    resid = np.empty((n, grid.size))
    mats: list[list[np.ndarray]] = [[None] * grid.size for _ in range(n)]

    lams[:, 0] = decs[0].eigenvalues
    resid[:, 0] = decs[0].residuals
    for b in range(n):
        mats[b][0] = decs[0].eigenmatrices[b]
    prev = decs[0].eigenmatrices
    for k in range(1, grid.size):
        perm = _match_branches(prev, decs[k].eigenmatrices)
        for b in range(n):
            j = perm[b]
            lams[b, k] = decs[k].eigenvalues[j]
            resid[b, k] = decs[k].residuals[j]
            mats[b][k] = decs[k].eigenmatrices[j]
        prev = [mats[b][k] for b in range(n)]
    return BranchTrack(
        parameter_grid=grid, eigenvalues=lams, eigenmatrices=mats, residuals=resid
    )


@dataclass(frozen=True)
class EpEstimate:
    """Result of an exceptional-point search.

    ``found`` is False when no eigenvalue coalescence satisfying both the
    gap and the eigenmatrix-overlap thresholds exists in the bracket; the
    remaining fields then describe the best candidate that was examined.
    """

    found: bool
    parameter_value: float
    coalescing_branches: tuple[int, ...]
    eigenvalue_at_ep: complex
    order: int
    gap_at_ep: float
    overlap_at_ep: float

    def to_report_dict(self):
        return {
            "found": self.found,
            "param_value": self.parameter_value,
            "eigenvalue": [self.eigenvalue_at_ep.real, self.eigenvalue_at_ep.imag],
            "order": self.order,
            "gap": self.gap_at_ep,
            "overlap": self.overlap_at_ep,
            "branches": list(self.coalescing_branches),
        }


def _min_gap(eigs):
    n = len(eigs)
    gap = np.inf
    pair = (0, 1)
    for i in range(n):
        for j in range(i + 1, n):
            g = abs(eigs[i] - eigs[j])
            if g < gap:
                gap = g
                pair = (i, j)
    return gap, pair


def _golden_minimize(f, a, b, rel_tol):
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > rel_tol * max(1.0, abs(a) + abs(b)):
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def locate_ep(
    model_family,
    q,
    bracket,
    gap_tol=1e-6,
    overlap_tol=1e-4,
    scan_points=101,
    build=None,
):
    """Locate an eigenvalue coalescence of the hybrid generator in a bracket.

    A coarse scan of the minimal pairwise eigenvalue gap finds interior local
    minima (asymptotic near-crossings at the bracket edges are not candidates),
    which are then refined by golden-section minimization essentially to
    parameter machine precision.  An EP is declared only when the refined gap
    falls below ``gap_tol`` times the spectral scale AND the eigenmatrices of
    the colliding pair overlap above ``1 - overlap_tol``: an eigenvalue
    crossing without eigenvector coalescence (a diabolic point) is not an EP.
    The reported order is the Jordan block size at the coalescence, with the
    count of clustered branches available via ``coalescing_branches``.

    ``gap_tol`` may need loosening for EPs of order > 2, where the attainable
    numerical gap floor scales like ``eps**(1/order)``.
    """
    from .lindblad import hybrid_liouvillian

    if build is None:
        build = lambda model: hybrid_liouvillian(model, q)

    a, b = float(bracket[0]), float(bracket[1])
    if not b > a:
        raise ValueError(f"invalid bracket {bracket}")

    cache: dict[float, object] = {}

    def dec_at(g):
        if g not in cache:
            cache[g] = decompose(build(model_family(g)))
        return cache[g]

    def gap_at(g):
        return _min_gap(dec_at(g).eigenvalues)[0]

    xs = np.linspace(a, b, scan_points)
    gaps = np.array([gap_at(g) for g in xs])

    # interior local minima, deepest first
    idx = [
        k
        for k in range(1, scan_points - 1)
        if gaps[k] <= gaps[k - 1] and gaps[k] <= gaps[k + 1]
    ]
    idx.sort(key=lambda k: gaps[k])

    best = None
    for k in idx:
        x, gap = _golden_minimize(gap_at, xs[k - 1], xs[k + 1], rel_tol=4e-14)
        dec = dec_at(x)
        scale = max(np.max(np.abs(dec.eigenvalues)), 1e-300)
        _, (i, j) = _min_gap(dec.eigenvalues)
        ov = abs(
            np.vdot(np.ravel(dec.eigenmatrices[i]), np.ravel(dec.eigenmatrices[j]))
        )
        cand = (x, gap, (i, j), ov, dec, scale)
        if best is None or gap < best[1]:
            best = cand
        if gap < gap_tol * scale and ov > 1.0 - overlap_tol:
            lam = 0.5 * (dec.eigenvalues[i] + dec.eigenvalues[j])
            cluster = tuple(
                int(t)
                for t in np.flatnonzero(
                    np.abs(dec.eigenvalues - lam) <= max(10 * gap, 1e-5 * scale)
                )
            )
            order = jordan_block_size(build(model_family(x)), lam)
            return EpEstimate(
                found=True,
                parameter_value=float(x),
                coalescing_branches=cluster,
                eigenvalue_at_ep=complex(lam),
                order=max(order, 2),
                gap_at_ep=float(gap),
                overlap_at_ep=float(ov),
            )

    if best is None:
        # no interior local minimum at all: report the scan minimum
        k = int(np.argmin(gaps))
        dec = dec_at(xs[k])
        _, (i, j) = _min_gap(dec.eigenvalues)
        ov = abs(
            np.vdot(np.ravel(dec.eigenmatrices[i]), np.ravel(dec.eigenmatrices[j]))
        )
        best = (xs[k], gaps[k], (i, j), ov, dec, 1.0)
    x, gap, (i, j), ov, dec, _ = best
    return EpEstimate(
        found=False,
        parameter_value=float(x),
        coalescing_branches=(i, j),
        eigenvalue_at_ep=complex(0.5 * (dec.eigenvalues[i] + dec.eigenvalues[j])),
        order=1,
        gap_at_ep=float(gap),
        overlap_at_ep=float(ov),
    )


@dataclass(frozen=True)
class JordanChainResult:
    """Generalized eigenmatrix solving ``L rho~ = lambda rho~ + rho``.

    The solution family ``rho~ + c rho`` is collapsed to its minimum-norm
    representative.  ``consistent`` is False when the chain equation has no
    solution, i.e. the eigenvalue is not defective.
    """

    eigenvalue: complex
    eigenmatrix: np.ndarray
    generalized_eigenmatrix: np.ndarray
    residual: float
    consistent: bool


def jordan_chain(superop, lam, rho, tol=1e-9):
    """Solve the Jordan chain at a (near-)defective eigenvalue."""
    m = superop.matrix
    d = superop.dim
    scale = max(np.linalg.norm(m), 1.0)
    v = vec(rho)
    eig_resid = np.linalg.norm(m @ v - lam * v) / max(np.linalg.norm(v), 1e-300)
    if eig_resid > 1e-5 * scale:
        raise ValueError(
            f"(lambda, rho) is not an eigenpair: relative residual {eig_resid:.3e}"
        )
    sol = min_norm_solve(m - lam * np.eye(m.shape[0]), v, tol=tol)
    gen = unvec(sol.x, d)
    residual = float(np.linalg.norm(m @ sol.x - lam * sol.x - v))
    return JordanChainResult(
        eigenvalue=complex(lam),
        eigenmatrix=np.asarray(rho, dtype=complex),
        generalized_eigenmatrix=gen,
        residual=residual,
        consistent=residual <= 1e-8 * scale,
    )


def jordan_block_size(superop, lam, rank_tol=1e-8):
    """Largest Jordan block size of the eigenvalue ``lam``.

    Computed from the numerical ranks of successive powers of
    ``(L - lambda I)``; the size is the largest power at which the rank still
    drops.  The rank threshold for the k-th power is ``rank_tol *
    sigma_max(L - lambda I)**k`` (an exactly nilpotent power is pure rounding
    noise, so its own largest singular value must not set the scale).
    Raises if ``lam`` is not an eigenvalue (first power has full rank).
    """
    m = superop.matrix - lam * np.eye(superop.matrix.shape[0])
    n = m.shape[0]
    s1 = np.linalg.svd(m, compute_uv=False)[0]
    if s1 == 0.0:
        return 1  # L = lam * I: semisimple, all blocks trivial

    def rank_of(x, k):
        s = np.linalg.svd(x, compute_uv=False)
        return int(np.count_nonzero(s > rank_tol * s1**k))

    prev = n
    power = np.eye(n, dtype=complex)
    size = 0
    for k in range(1, n + 1):
        power = power @ m
        r = rank_of(power, k)
        if r < prev:
            size = k
            prev = r
        else:
            break
    if size == 0:
        raise ValueError(f"{lam} is not an eigenvalue of the superoperator")
    return size
