"""Self-contained dense numerics used by all certification routines.

Contents: a small simplex LP over convex-combination weights (Bland's rule,
phase-one feasibility, Farkas certificate on infeasibility), symmetric
eigendecomposition by cyclic Jacobi sweeps, positive-semidefiniteness on a
subspace, minimization of an indefinite quadratic over an affine set, and a
deterministic grid scan with multistart coordinate refinement.

Problem sizes are desk scale (dimension <= ~50, a few hundred LP variables);
everything is dense and favors exactness and auditability over speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from qpos.errors import EvaluationError, InternalCheckError, PreconditionError
from qpos.verdicts import Verdict

EPS = 1e-9          # one global tolerance on q-values and inequality decisions
RANK_TOL = 1e-10    # singular-value threshold for rank decisions
JACOBI_TOL = 1e-12  # off-diagonal mass threshold for the Jacobi sweeps


# ---------------------------------------------------------------------------
# symmetric eigendecomposition (cyclic Jacobi)
# ---------------------------------------------------------------------------

def eigh_jacobi(a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = 100):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).  Sweeps stop when
    the off-diagonal mass drops below tol relative to the matrix scale.
    """
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n == 0:
        return np.empty(0), np.empty((0, 0))
    if not np.allclose(a, a.T, atol=1e-12, rtol=0.0):
        raise ValueError("matrix must be symmetric")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = max(1.0, float(np.abs(a).max()))
    for _ in range(max_sweeps):
        off = math.sqrt(2.0 * float(np.sum(np.tril(a, -1) ** 2)))
        if off <= tol * scale:
            break
        small = tol * scale / max(1, n * n)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= small:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = a[:, p].copy()
                rot_q = a[:, q].copy()
                a[:, p] = c * rot_p - s * rot_q
                a[:, q] = s * rot_p + c * rot_q
                rot_p = a[p, :].copy()
                rot_q = a[q, :].copy()
                a[p, :] = c * rot_p - s * rot_q
                a[q, :] = s * rot_p + c * rot_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    else:
        raise InternalCheckError("Jacobi sweeps did not converge")
    w = np.diag(a).copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def singular_values(mat: np.ndarray) -> np.ndarray:
    """Singular values of a rectangular matrix via Jacobi on the Gram matrix."""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return np.empty(0)
    gram = mat.T @ mat if mat.shape[0] >= mat.shape[1] else mat @ mat.T
    w, _ = eigh_jacobi(0.5 * (gram + gram.T))
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


def has_full_column_rank(mat: np.ndarray, tol: float = RANK_TOL) -> bool:
    mat = np.asarray(mat, dtype=float)
    if mat.shape[1] == 0:
        return True
    sv = singular_values(mat)
    return sv.size >= mat.shape[1] and float(sv[mat.shape[1] - 1]) > tol


def orthonormal_columns(mat: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the column space (modified Gram-Schmidt)."""
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[0]
    cols = []
    for j in range(mat.shape[1]):
        u = mat[:, j].astype(float).copy()
        for c in cols:
            u -= (c @ u) * c
        for c in cols:  # second pass for numerical orthogonality
            u -= (c @ u) * c
        norm = float(np.linalg.norm(u))
        if norm > max(tol, tol * float(np.linalg.norm(mat[:, j]) + 1.0)):
            cols.append(u / norm)
    if not cols:
        return np.empty((n, 0))
    return np.stack(cols, axis=1)


def kernel_basis(mat: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of ker(mat) for a rectangular matrix (n columns)."""
    mat = np.asarray(mat, dtype=float)
    n = mat.shape[1]
    if mat.shape[0] == 0 or n == 0:
        return np.eye(n)
    w, vecs = eigh_jacobi(mat.T @ mat)
    svals = np.sqrt(np.clip(w, 0.0, None))  # Gram eigenvalues are squared singular values
    keep = svals <= tol * max(1.0, float(svals.max()))
    return vecs[:, keep]


# ---------------------------------------------------------------------------
# simplex LP over convex-combination weights
# ---------------------------------------------------------------------------

class LpStatus(str, Enum):
    FEASIBLE = "FEASIBLE"
    INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True)
class SimplexLp:
    """minimize costs . lam  s.t.  moments @ lam = target, sum(lam) = 1, lam >= 0."""

    costs: np.ndarray    # (m,)
    moments: np.ndarray  # (k, m), column i enters with weight lam_i
    target: np.ndarray   # (k,)

    def __post_init__(self):
        costs = np.atleast_1d(np.asarray(self.costs, dtype=float))
        moments = np.asarray(self.moments, dtype=float)
        if moments.ndim == 1:
            moments = moments.reshape(1, -1)
        target = np.atleast_1d(np.asarray(self.target, dtype=float))
        if costs.ndim != 1 or costs.size < 1:
            raise ValueError("costs must be a nonempty vector")
        if moments.shape != (target.size, costs.size):
            raise ValueError("moment matrix must be k x m")
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "moments", moments)
        object.__setattr__(self, "target", target)

    @property
    def m(self) -> int:
        return self.costs.size

    @property
    def k(self) -> int:
        return self.target.size


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    value: float | None = None
    weights: np.ndarray | None = None
    farkas: np.ndarray | None = None  # y with y.A <= 0 (columnwise), y.b > 0 on infeasibility

    @property
    def feasible(self) -> bool:
        return self.status is LpStatus.FEASIBLE


def _bland_pivot(tab, basis, ncols, allowed, cap):
    """Pivot in place until optimal; raise on cap overrun.

    Entering rule: steepest reduced cost (Dantzig) while the objective makes
    progress, switching permanently to Bland's smallest-index rule after a
    degenerate stall so cycling is impossible and the cap stays a pure bug
    signal.  The leaving row always breaks ratio ties by smallest basic index
    (the Bland tie-break)."""
    nrows = len(basis)
    basis_arr = np.asarray(basis)
    bland = False
    stall = 0
    stall_limit = 2 * nrows + 8
    prev_obj = float(tab[-1, -1])
    for _ in range(cap):
        reduced = tab[-1, :ncols]
        negative = allowed & (reduced < -1e-11)
        if not negative.any():
            return
        if bland:
            enter = int(np.argmax(negative))  # first True, i.e. smallest index
        else:
            masked = np.where(negative, reduced, 0.0)
            enter = int(np.argmin(masked))
        col = tab[:nrows, enter]
        pos = col > 1e-11
        if not pos.any():
            raise InternalCheckError("LP unbounded; impossible over the simplex")
        ratios = np.where(pos, tab[:nrows, -1] / np.where(pos, col, 1.0), np.inf)
        best = float(ratios.min())
        ties = np.where(ratios <= best + 1e-13)[0]
        leave = int(ties[np.argmin(basis_arr[ties])])
        piv = tab[leave, enter]
        tab[leave, :] /= piv
        colvals = tab[:, enter].copy()
        colvals[leave] = 0.0
        tab -= np.outer(colvals, tab[leave, :])
        basis[leave] = enter
        basis_arr[leave] = enter
        obj = float(tab[-1, -1])
        if obj < prev_obj - 1e-13 * max(1.0, abs(prev_obj)):
            stall = 0
        else:
            stall += 1
            if stall > stall_limit:
                bland = True
        prev_obj = obj
    raise InternalCheckError("simplex exceeded its iteration cap (cycling guard)")


def lp_min(lp: SimplexLp, tol: float = EPS) -> LpResult:
    """Solve the convex-combination LP with a phase-one/phase-two dense simplex.

    Bland's rule everywhere, so cycling cannot occur; the iteration cap is a
    bug signal, not an expected outcome.  On infeasibility the result carries a
    numerically verified Farkas certificate when one can be extracted.
    """
    m, k = lp.m, lp.k
    a_eq = np.vstack([lp.moments, np.ones((1, m))])
    b_eq = np.concatenate([lp.target, [1.0]])
    nrows = k + 1
    flip = b_eq < 0.0
    a_eq = a_eq.copy()
    a_eq[flip] *= -1.0
    b_eq = np.abs(b_eq)
    scale = max(1.0, float(np.abs(b_eq).max()), float(np.abs(a_eq).max()))
    cap = 100 + 10 * m * nrows

    # phase one: artificial basis, minimize sum of artificials
    ncols = m + nrows
    tab = np.zeros((nrows + 1, ncols + 1))
    tab[:nrows, :m] = a_eq
    tab[:nrows, m:ncols] = np.eye(nrows)
    tab[:nrows, -1] = b_eq
    tab[-1, :m] = -a_eq.sum(axis=0)
    tab[-1, -1] = -b_eq.sum()
    basis = list(range(m, ncols))
    allowed = np.ones(ncols, dtype=bool)
    allowed[m:] = False  # artificials never re-enter
    _bland_pivot(tab, basis, ncols, allowed, cap)
    phase1 = -tab[-1, -1]
    if phase1 > 1e-9 * scale:
        farkas = None
        # reduced cost of artificial j at optimum is 1 - y_j, so y = 1 - rc
        y = 1.0 - tab[-1, m:ncols]
        y[flip] *= -1.0
        cols_ok = float((y @ np.vstack([lp.moments, np.ones((1, m))])).max()) <= 1e-7 * scale
        orig_b = np.concatenate([lp.target, [1.0]])
        if cols_ok and float(y @ orig_b) > 1e-10:
            farkas = y
        return LpResult(LpStatus.INFEASIBLE, farkas=farkas)

    # drive artificials out of the basis where possible
    keep_rows = list(range(nrows))
    for i in range(nrows):
        if basis[i] >= m:
            piv_col = -1
            for j in range(m):
                if abs(tab[i, j]) > 1e-9:
                    piv_col = j
                    break
            if piv_col < 0:
                keep_rows.remove(i)  # redundant constraint row
                continue
            piv = tab[i, piv_col]
            tab[i, :] /= piv
            for r in range(nrows + 1):
                if r != i and abs(tab[r, piv_col]) > 0.0:
                    tab[r, :] -= tab[r, piv_col] * tab[i, :]
            basis[i] = piv_col

    # phase two on the original costs, artificial columns frozen
    rows = keep_rows
    tab2 = np.zeros((len(rows) + 1, m + 1))
    for r, i in enumerate(rows):
        tab2[r, :m] = tab[i, :m]
        tab2[r, -1] = tab[i, -1]
    basis2 = [basis[i] for i in rows]
    tab2[-1, :m] = lp.costs
    for r, bi in enumerate(basis2):
        tab2[-1, :] -= lp.costs[bi] * tab2[r, :]
    allowed2 = np.ones(m, dtype=bool)
    _bland_pivot(tab2, basis2, m, allowed2, cap)

    weights = np.zeros(m)
    for r, bi in enumerate(basis2):
        weights[bi] = tab2[r, -1]
    weights = np.clip(weights, 0.0, None)
    residual = float(np.abs(np.vstack([lp.moments, np.ones((1, m))]) @ weights
                            - np.concatenate([lp.target, [1.0]])).max())
    if residual > 1e-8 * scale:
        raise InternalCheckError(f"simplex solution violates constraints by {residual:g}")
    value = float(lp.costs @ weights)
    return LpResult(LpStatus.FEASIBLE, value=value, weights=weights)


# ---------------------------------------------------------------------------
# quadratic-form helpers
# ---------------------------------------------------------------------------

def psd_on_subspace(s_mat: np.ndarray, v_basis: np.ndarray, tol: float = EPS) -> Verdict:
    """HOLDS iff V'SV is positive semidefinite; FAILS carries an ambient witness
    direction w = V v with w'Sw < 0 re-verifying the violation."""
    s_mat = np.asarray(s_mat, dtype=float)
    v_basis = np.asarray(v_basis, dtype=float)
    if v_basis.ndim == 1:
        v_basis = v_basis.reshape(-1, 1)
    if v_basis.shape[1] == 0:
        return Verdict.holds(min_eigenvalue=0.0)
    if v_basis.shape[0] != s_mat.shape[0]:
        raise ValueError("basis rows must match the form dimension")
    if not has_full_column_rank(v_basis):
        raise ValueError("basis must have full column rank")
    m = v_basis.T @ s_mat @ v_basis
    w, vecs = eigh_jacobi(0.5 * (m + m.T))
    lam_min = float(w[0])
    if lam_min >= -tol:
        return Verdict.holds(min_eigenvalue=lam_min)
    direction = v_basis @ vecs[:, 0]
    return Verdict.fails(direction, min_eigenvalue=lam_min)


@dataclass(frozen=True)
class MinQResult:
    finite: bool
    value: float | None = None
    minimizer: np.ndarray | None = None  # t with the infimum at r - V t


def pseudo_inverse_psd(m: np.ndarray, tol: float = RANK_TOL):
    """(M+, kernel eigenvector basis) for a symmetric PSD matrix via Jacobi."""
    m = np.asarray(m, dtype=float)
    if m.shape[0] == 0:
        return np.empty((0, 0)), np.empty((0, 0))
    w, vecs = eigh_jacobi(0.5 * (m + m.T))
    scale = max(1.0, float(np.abs(w).max()))
    nz = np.abs(w) > tol * scale
    inv = np.zeros_like(w)
    inv[nz] = 1.0 / w[nz]
    return (vecs * inv) @ vecs.T, vecs[:, ~nz]


def min_q_over_affine(s_mat, r: np.ndarray, v_basis: np.ndarray,
                      range_tol: float = 1e-8) -> MinQResult:
    """inf over t of q(r - V t) for q(x) = 0.5 x'Sx, assuming V'SV is PSD.

    Expanding gives q(r) - g.t + 0.5 t'Mt with M = V'SV and g = V'Sr, so the
    infimum is q(r) - 0.5 g'M+g when g lies in range(M) and -inf otherwise.
    """
    s_mat = getattr(s_mat, "S", s_mat)
    s_mat = np.asarray(s_mat, dtype=float)
    r = np.asarray(r, dtype=float)
    v_basis = np.asarray(v_basis, dtype=float)
    if v_basis.ndim == 1:
        v_basis = v_basis.reshape(-1, 1)
    q_r = 0.5 * float(r @ s_mat @ r)
    if v_basis.shape[1] == 0:
        return MinQResult(True, q_r, np.empty(0))
    m = v_basis.T @ s_mat @ v_basis
    w, _ = eigh_jacobi(0.5 * (m + m.T))
    if w.size and float(w[0]) < -EPS * max(1.0, float(np.abs(w).max())):
        raise PreconditionError("V'SV must be positive semidefinite")
    m_plus, ker = pseudo_inverse_psd(m)
    g = v_basis.T @ (s_mat @ r)
    if ker.shape[1] > 0:
        overlap = float(np.abs(ker.T @ g).max()) if g.size else 0.0
        if overlap > range_tol * max(1.0, float(np.abs(g).max())):
            return MinQResult(False)
    t_star = m_plus @ g
    value = q_r - 0.5 * float(g @ m_plus @ g)
    return MinQResult(True, value, t_star)


# ---------------------------------------------------------------------------
# deterministic grid scan with multistart refinement
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoxGrid:
    lower: np.ndarray
    upper: np.ndarray
    pitch: float
    multistarts: int = 8

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be vectors of equal length")
        if not np.all(lower < upper):
            raise ValueError("lower must be strictly below upper componentwise")
        if not (self.pitch > 0):
            raise ValueError("pitch must be positive")
        if self.multistarts < 1:
            raise ValueError("multistart count must be positive")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return self.lower.size

    def axes(self) -> list[np.ndarray]:
        out = []
        for lo, hi in zip(self.lower, self.upper):
            count = max(1, int(round((hi - lo) / self.pitch)))
            out.append(np.linspace(lo, hi, count + 1))
        return out

    def mesh(self) -> np.ndarray:
        axes = self.axes()
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def actual_pitch(self) -> float:
        return max(float(ax[1] - ax[0]) if ax.size > 1 else float(self.upper[i] - self.lower[i])
                   for i, ax in enumerate(self.axes()))


@dataclass(frozen=True)
class GridMaxResult:
    value: float
    argmax: np.ndarray
    resolution: float


def coordinate_polish(f, x0, v0, lower, upper, step):
    """Derivative-free local refinement of a maximizer by dense coordinate
    sweeps with shrinking windows; deterministic and kink-tolerant."""
    return _coordinate_polish(f, x0, v0, lower, upper, step)


def _polish_directions(d: int) -> np.ndarray:
    """Axis directions plus pairwise diagonals (small d only); the diagonals
    keep the refinement from stalling on ridge maximizers of piecewise-linear
    objectives."""
    dirs = [np.eye(d)[i] for i in range(d)]
    if d <= 4:
        for i in range(d - 1):
            for j in range(i + 1, d):
                for sign in (1.0, -1.0):
                    u = np.zeros(d)
                    u[i] = 1.0
                    u[j] = sign
                    dirs.append(u / math.sqrt(2.0))
    return np.stack(dirs)


def _coordinate_polish(f, x0, v0, lower, upper, step):
    x = np.array(x0, dtype=float)
    best = float(v0)
    dirs = _polish_directions(x.size)
    for _ in range(2):
        for u in dirs:
            width = step
            for _ in range(3):
                pos = u > 1e-12
                neg = u < -1e-12
                thi = min(width, float(np.min(((upper - x)[pos] / u[pos]), initial=width)),
                          float(np.min(((lower - x)[neg] / u[neg]), initial=width)))
                tlo = max(-width, float(np.max(((lower - x)[pos] / u[pos]), initial=-width)),
                          float(np.max(((upper - x)[neg] / u[neg]), initial=-width)))
                if thi <= tlo:
                    break
                for t in np.linspace(tlo, thi, 17):
                    cand = x + t * u
                    val = float(f(cand))
                    if not np.isfinite(val):
                        raise EvaluationError("objective is not finite inside the box")
                    if val > best + 1e-15:
                        best = val
                        x = cand
                width /= 4.0
    return best, x


def grid_multistart_max(f: Callable[[np.ndarray], float], grid: BoxGrid,
                        f_batch: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> GridMaxResult:
    """Best value of f over the box: full grid scan, then coordinate-descent
    refinement from the top multistart cells.  Deterministic given the grid.

    This is a falsifier engine, not a prover; callers must label any HOLDS
    derived from it as grid-certified at the returned resolution.
    """
    mesh = grid.mesh()
    if f_batch is not None:
        vals = np.asarray(f_batch(mesh), dtype=float).ravel()
    else:
        vals = np.array([f(x) for x in mesh], dtype=float)
    if vals.shape[0] != mesh.shape[0]:
        raise ValueError("batch evaluator returned a wrong-sized array")
    if not np.all(np.isfinite(vals)):
        raise EvaluationError("objective is not finite on the box")
    order = np.argsort(vals, kind="stable")[::-1]
    starts = order[: grid.multistarts]
    best_val = float(vals[starts[0]])
    best_x = mesh[starts[0]].copy()
    step = grid.actual_pitch()
    for idx in starts:
        val, x = _coordinate_polish(f, mesh[idx], vals[idx], grid.lower, grid.upper, step)
        if val > best_val:
            best_val, best_x = val, x
    return GridMaxResult(best_val, best_x, step)


def golden_min(g: Callable[[float], float], lo: float, hi: float,
               tol: float = 1e-10, max_iter: int = 400):
    """Golden-section minimum of a unimodal g on [lo, hi]; returns (x, g(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = g(c), g(d)
    it = 0
    while (b - a) > tol and it < max_iter:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = g(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = g(d)
        it += 1
    xs = [(a, g(a)), (b, g(b)), (c, fc), (d, fd)]
    return min(xs, key=lambda p: p[1])
