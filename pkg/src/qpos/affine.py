"""Exact treatment of affine q-positive sets.

An affine set x0 + range(V) is q-positive iff V'SV is PSD.  Its polar has the
closed form

    b in A-pi  <=>  U0' V'S (b - x0) = 0  and  q(b - x0) - 0.5 g'M+g >= 0,

with M = V'SV, g = V'S(b - x0) and U0 a kernel basis of M: the linear system
says g lies in range(M) (else the infimum of q over the set is -inf at b), and
the residual is that infimum.  Writing w = b - x0, the residual equals
0.5 w'Nw with N = S - SV M+ V'S, which makes maximality (A-pi = A) an exact
eigenvalue question on the constrained direction space.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from qpos import numerics
from qpos.core import SsdSpace
from qpos.errors import PreconditionError
from qpos.numerics import EPS, RANK_TOL, eigh_jacobi, kernel_basis, orthonormal_columns, psd_on_subspace, pseudo_inverse_psd
from qpos.verdicts import Verdict


@dataclass(frozen=True)
class AffineSet:
    """x0 + range(V); d = 0 encodes a singleton."""

    space: SsdSpace
    x0: np.ndarray
    V: np.ndarray  # (n, d) with full column rank

    @classmethod
    def from_anchor_basis(cls, space: SsdSpace, x0, basis) -> "AffineSet":
        x0 = space.check_vector(x0)
        v = np.asarray(basis, dtype=float)
        if v.size == 0:
            v = np.empty((space.n, 0))
        if v.ndim == 1:
            v = v.reshape(-1, 1)
        if v.shape[0] != space.n:
            raise ValueError("basis rows must match the space dimension")
        if not numerics.has_full_column_rank(v, RANK_TOL):
            raise ValueError("basis columns must be linearly independent")
        x0 = x0.copy()
        v = v.copy()
        x0.flags.writeable = False
        v.flags.writeable = False
        return cls(space, x0, v)

    @property
    def dim(self) -> int:
        return self.V.shape[1]

    def contains(self, b, tol: float = 1e-8) -> bool:
        b = self.space.check_vector(b)
        w = b - self.x0
        if self.dim == 0:
            return float(np.abs(w).max()) <= tol
        t, *_ = np.linalg.lstsq(self.V, w, rcond=None)
        return float(np.abs(self.V @ t - w).max()) <= tol * max(1.0, float(np.abs(w).max()))

    def sample(self, radius: float, count: int, seed: int = 0) -> np.ndarray:
        """Deterministic parameter samples of the set inside a coefficient ball."""
        if self.dim == 0:
            return self.x0[None, :].copy()
        rng = np.random.default_rng(seed)
        t = rng.uniform(-radius, radius, size=(count, self.dim))
        return self.x0[None, :] + t @ self.V.T


def affine_is_q_positive(A: AffineSet, tol: float = EPS) -> Verdict:
    """q-positivity of an affine set reduces to V'SV being PSD."""
    return psd_on_subspace(A.space.S, A.V, tol=tol)


@dataclass(frozen=True)
class PiDescription:
    """Exact description of the polar of an affine q-positive set."""

    aset: AffineSet
    constraint_matrix: np.ndarray  # (r, n): rows R with R b = rhs required
    constraint_rhs: np.ndarray
    normal_matrix: np.ndarray      # N = S - SV M+ V'S
    direction_basis: np.ndarray    # (n, dL) orthonormal basis of ker R (directions of the constrained slab)
    feasible: bool = True          # the polar always contains A itself

    def linear_ok(self, b, tol: float = 1e-8) -> bool:
        b = self.aset.space.check_vector(b)
        if self.constraint_matrix.shape[0] == 0:
            return True
        res = self.constraint_matrix @ b - self.constraint_rhs
        return float(np.abs(res).max()) <= tol * max(1.0, float(np.abs(b).max()))

    def residual(self, b) -> float:
        b = self.aset.space.check_vector(b)
        w = b - self.aset.x0
        return 0.5 * float(w @ self.normal_matrix @ w)

    def residual_batch(self, bs: np.ndarray) -> np.ndarray:
        ws = np.asarray(bs, dtype=float) - self.aset.x0
        return 0.5 * np.einsum("ij,ij->i", ws @ self.normal_matrix, ws)

    def contains(self, b, tol: float = EPS) -> bool:
        return self.linear_ok(b) and self.residual(b) >= -tol

    def domain_equals_set(self, tol: float = 1e-8) -> bool:
        """Whether the linear constraints alone already pin down the set, i.e.
        the slab direction space equals range(V)."""
        return self.direction_basis.shape[1] == self.aset.dim


def affine_pi(A: AffineSet) -> PiDescription:
    """Closed-form polar description; cross-validated elsewhere by sampling."""
    if not affine_is_q_positive(A).ok:
        raise PreconditionError("affine set must be q-positive")
    s_mat = A.space.S
    if A.dim == 0:
        rows = np.empty((0, A.space.n))
        return PiDescription(A, rows, np.empty(0), s_mat.copy(), np.eye(A.space.n))
    m = A.V.T @ s_mat @ A.V
    m_plus, ker = pseudo_inverse_psd(0.5 * (m + m.T))
    sv = s_mat @ A.V
    normal = s_mat - sv @ m_plus @ sv.T
    rows = (ker.T @ A.V.T @ s_mat) if ker.shape[1] else np.empty((0, A.space.n))
    rhs = rows @ A.x0 if rows.shape[0] else np.empty(0)
    directions = kernel_basis(rows) if rows.shape[0] else np.eye(A.space.n)
    return PiDescription(A, rows, rhs, normal, directions)


def _split_directions(pi: PiDescription):
    """Orthonormal split of the slab direction space into range(V) and its
    complement W inside the slab."""
    A = pi.aset
    q_v = orthonormal_columns(A.V) if A.dim else np.empty((A.space.n, 0))
    q_l = pi.direction_basis
    resid = q_l - q_v @ (q_v.T @ q_l) if q_v.shape[1] else q_l
    w = orthonormal_columns(resid, tol=1e-9)
    return q_v, w


def affine_is_maximal(A: AffineSet, tol: float = EPS) -> Verdict:
    """Decide A-pi = A through the exact polar description.

    With w = b - x0 restricted to the slab directions, the polar is the cone
    {w'Nw >= 0}.  It collapses to range(V) exactly when N has no coupling
    between range(V) and its slab complement W and is negative definite on W;
    otherwise an explicit polar point outside A is produced as witness.
    """
    if not affine_is_q_positive(A).ok:
        raise PreconditionError("affine set must be q-positive")
    pi = affine_pi(A)
    q_v, w_basis = _split_directions(pi)
    n_mat = pi.normal_matrix
    d_w = w_basis.shape[1]
    if d_w == 0:
        return Verdict.holds(polar_dim=A.dim, method="exact")

    if q_v.shape[1]:
        cross = w_basis.T @ n_mat @ q_v
        if float(np.abs(cross).max()) > tol:
            i, j = np.unravel_index(int(np.abs(cross).argmax()), cross.shape)
            u = w_basis[:, i]
            v = q_v[:, j]
            c = float(u @ n_mat @ v)
            e = float(u @ n_mat @ u)
            t = (1.0 - e) / (2.0 * c)
            witness = A.x0 + t * v + u
            return _verify_polar_witness(pi, witness, tol)

    r_w = w_basis.T @ n_mat @ w_basis
    lam, vecs = eigh_jacobi(0.5 * (r_w + r_w.T))
    lam_max = float(lam[-1])
    if lam_max <= -tol:
        return Verdict.holds(polar_dim=A.dim, method="exact",
                             complement_max_eigenvalue=lam_max)
    witness = A.x0 + w_basis @ vecs[:, -1]
    return _verify_polar_witness(pi, witness, tol)


def _verify_polar_witness(pi: PiDescription, witness: np.ndarray, tol: float) -> Verdict:
    in_polar = pi.contains(witness, tol=tol)
    in_set = pi.aset.contains(witness)
    if in_polar and not in_set:
        return Verdict.fails(witness, residual=pi.residual(witness), method="exact")
    return Verdict.undecided(note="borderline polar witness did not re-verify")


def maximal_convex_affinity_falsifier(space: SsdSpace,
                                      member: Callable[[np.ndarray], bool],
                                      x0,
                                      probes: Sequence[np.ndarray],
                                      lambdas: Sequence[float] = (2.0, 3.0),
                                      tol: float = EPS) -> Verdict:
    """Contrapositive test that a claimed maximally q-positive convex set is
    affine.

    Maximality plus convexity force the translate to be a symmetric cone, so
    scaled and reflected probe points must land back in the set; each such
    point must then be q-positively related to every probe member, and the
    membership oracle must accept it.  Either failure contradicts the claim.
    """
    x0 = space.check_vector(x0)
    if not member(x0):
        raise PreconditionError("x0 must belong to the claimed set")
    members = [space.check_vector(p) for p in probes if member(np.asarray(p, dtype=float))]
    if not members:
        return Verdict.undecided(note="no probe passed the membership oracle")
    marr = np.stack(members)
    checked = 0
    for x in members:
        images = [x0 + lam * (x - x0) for lam in lambdas]
        images.append(x0 - (x - x0))
        for y in images:
            qvals = space.q_batch(y[None, :] - marr)
            worst = int(np.argmin(qvals))
            checked += 1
            if float(qvals[worst]) < -tol:
                return Verdict.fails((y, marr[worst].copy()),
                                     condition="cone/symmetry point not q-related",
                                     q=float(qvals[worst]))
            if not member(y):
                return Verdict.fails(y, condition="q-related point rejected by oracle",
                                     min_q=float(qvals[worst]))
    return Verdict.holds(resolution=float(len(members)), transforms_checked=checked,
                         note="consistent with the claim at probe resolution")
