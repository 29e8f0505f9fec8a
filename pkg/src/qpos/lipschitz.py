"""Lipschitz graphs between Euclidean spaces as q-positive sets.

The model space is H1 x H2 with pairing K^2 <x1, y1> - <x2, y2>, so
q(x1, x2) = 0.5 (K^2 |x1|^2 - |x2|^2) and a finite graph is q-positive exactly
when it is K-Lipschitz.  The representing function of a graph has a closed
form equal piece by piece to the generic max-affine construction, and scalar
McShane extensions provide the extension machinery (the vector-valued
extension theorem is used as an assumption only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from qpos.core import PointSet, SsdSpace, is_q_positive
from qpos.errors import InternalCheckError, PreconditionError
from qpos.fitzpatrick import phi_build, repr_hull_member
from qpos.numerics import EPS
from qpos.verdicts import Verdict


@dataclass(frozen=True)
class LipschitzSpace:
    K: float
    n1: int
    n2: int
    space: SsdSpace

    @classmethod
    def create(cls, K: float, n1: int, n2: int) -> "LipschitzSpace":
        if not (K > 0):
            raise ValueError("K must be positive")
        if n1 < 1 or n2 < 1:
            raise ValueError("component dimensions must be positive")
        s_mat = np.diag(np.concatenate([np.full(n1, K * K), np.full(n2, -1.0)]))
        return cls(float(K), n1, n2, SsdSpace.from_matrix(s_mat))

    @property
    def is_ssdb(self) -> bool:
        return abs(self.K - 1.0) <= 1e-12

    def split(self, b):
        b = self.space.check_vector(b)
        return b[: self.n1], b[self.n1:]


@dataclass(frozen=True)
class GraphSet:
    lspace: LipschitzSpace
    domain: np.ndarray  # (m, n1)
    values: np.ndarray  # (m, n2)

    @classmethod
    def from_data(cls, lspace: LipschitzSpace, domain, values) -> "GraphSet":
        domain = np.asarray(domain, dtype=float)
        values = np.asarray(values, dtype=float)
        if domain.ndim == 1:
            domain = domain.reshape(-1, 1)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if domain.shape[0] != values.shape[0] or domain.shape[0] < 1:
            raise ValueError("domain and value lists must be nonempty and equal length")
        if domain.shape[1] != lspace.n1 or values.shape[1] != lspace.n2:
            raise ValueError("component dimensions do not match the space")
        if domain.shape[0] > 1:
            diff = domain[:, None, :] - domain[None, :, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            np.fill_diagonal(dist, np.inf)
            if float(dist.min()) <= 1e-12:
                raise ValueError("domain points must be distinct")
        domain = domain.copy()
        values = values.copy()
        domain.flags.writeable = False
        values.flags.writeable = False
        return cls(lspace, domain, values)

    @property
    def m(self) -> int:
        return self.domain.shape[0]

    def induced_pointset(self) -> PointSet:
        return PointSet.from_points(self.lspace.space,
                                    np.hstack([self.domain, self.values]))


def lipschitz_check(g: GraphSet, tol: float = EPS) -> Verdict:
    """Pairwise |v_i - v_j| <= K |d_i - d_j| within tol; the verdict must and
    does coincide with q-positivity of the induced point set."""
    K = g.lspace.K
    verdict = None
    if g.m == 1:
        verdict = Verdict.holds(pairs=0)
    else:
        dd = g.domain[:, None, :] - g.domain[None, :, :]
        dv = g.values[:, None, :] - g.values[None, :, :]
        lhs = np.sqrt(np.einsum("ijk,ijk->ij", dv, dv))
        rhs = K * np.sqrt(np.einsum("ijk,ijk->ij", dd, dd))
        iu = np.triu_indices(g.m, k=1)
        slack = (rhs - lhs)[iu]
        worst = int(np.argmin(slack))
        if float(slack[worst]) >= -tol:
            verdict = Verdict.holds(pairs=int(slack.size), min_slack=float(slack[worst]))
        else:
            i, j = int(iu[0][worst]), int(iu[1][worst])
            verdict = Verdict.fails((np.hstack([g.domain[i], g.values[i]]),
                                     np.hstack([g.domain[j], g.values[j]])),
                                    min_slack=float(slack[worst]))
    qv = is_q_positive(g.induced_pointset(), tol=tol)
    if qv.ok != verdict.ok:
        raise InternalCheckError("Lipschitz and q-positivity verdicts disagree")
    return verdict


def phi_graph_eval(g: GraphSet, x1, x2) -> float:
    """Closed-form representing function of a finite graph:

    0.5 max_i { -K^2 |d_i - x1|^2 + |v_i - x2|^2 } + 0.5 K^2 |x1|^2 - 0.5 |x2|^2

    Must agree with the generic max-affine construction to roundoff."""
    K = g.lspace.K
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    x2 = np.atleast_1d(np.asarray(x2, dtype=float))
    if x1.shape != (g.lspace.n1,) or x2.shape != (g.lspace.n2,):
        raise ValueError("query components have wrong dimensions")
    dd = g.domain - x1
    dv = g.values - x2
    inner = -K * K * np.einsum("ij,ij->i", dd, dd) + np.einsum("ij,ij->i", dv, dv)
    return 0.5 * float(inner.max()) + 0.5 * K * K * float(x1 @ x1) - 0.5 * float(x2 @ x2)


def mcshane_extend_scalar(g: GraphSet, query) -> float:
    """Scalar inf-convolution extension min_i (v_i + K |query - d_i|); it is
    K-Lipschitz on all of H1 and restores the data on the domain."""
    if g.lspace.n2 != 1:
        raise PreconditionError("scalar extension needs a one-dimensional range")
    if not lipschitz_check(g).ok:
        raise PreconditionError("graph data must be K-Lipschitz")
    return _mcshane_upper(g, np.atleast_1d(np.asarray(query, dtype=float)))


def _query_dists(g: GraphSet, query: np.ndarray) -> np.ndarray:
    dd = g.domain - query
    return np.sqrt(np.einsum("ij,ij->i", dd, dd))


def _mcshane_upper(g: GraphSet, query: np.ndarray) -> float:
    return float(np.min(g.values[:, 0] + g.lspace.K * _query_dists(g, query)))


def _mcshane_lower(g: GraphSet, query: np.ndarray) -> float:
    return float(np.max(g.values[:, 0] - g.lspace.K * _query_dists(g, query)))


def mcshane_bracket(g: GraphSet, query):
    """(smallest, largest) K-Lipschitz extension values at the query point;
    a strict gap certifies non-uniqueness of extensions there."""
    if g.lspace.n2 != 1:
        raise PreconditionError("scalar extension needs a one-dimensional range")
    if not lipschitz_check(g).ok:
        raise PreconditionError("graph data must be K-Lipschitz")
    q = np.atleast_1d(np.asarray(query, dtype=float))
    return _mcshane_lower(g, q), _mcshane_upper(g, q)


def identity_example_check(t_grid, off_probes, tol: float = EPS) -> Verdict:
    """Two-point restriction of the identity on the real line at K = 1: its
    smallest q-representable superset is the identity graph over [0, 1].

    Expects every (t, t) with t in the grid (inside [0, 1]) to be accepted by
    the representable-hull test and every off-probe to be rejected."""
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    if t_grid.size and (t_grid.min() < -1e-12 or t_grid.max() > 1.0 + 1e-12):
        raise ValueError("grid values must lie in [0, 1]")
    lspace = LipschitzSpace.create(1.0, 1, 1)
    A = PointSet.from_points(lspace.space, [[0.0, 0.0], [1.0, 1.0]])
    phi = phi_build(A)
    for t in t_grid:
        v = repr_hull_member(A, np.array([t, t]), tol=tol, phi=phi)
        if not v.ok:
            return Verdict.fails(np.array([t, t]), expected="HOLDS", got=v.status.value)
    for probe in np.atleast_2d(np.asarray(off_probes, dtype=float)):
        v = repr_hull_member(A, probe, tol=tol, phi=phi)
        if v.ok:
            return Verdict.fails(probe.copy(), expected="FAILS", got=v.status.value)
    return Verdict.holds(grid_points=int(t_grid.size),
                         off_probes=int(np.atleast_2d(off_probes).shape[0]))


def closed_domain_repr_probe(g: GraphSet, K: float, x1, count: int = 64,
                             seed: int = 0) -> Verdict:
    """Separating construction behind representability over a closed domain.

    The graph data is K'-Lipschitz with K' < K and x1 is off the domain, so two
    K-Lipschitz extensions disagreeing at x1 exist: the inf-convolution at
    modulus K' and a re-extension through a deliberately shifted value inside
    the admissible ball of radius (K - K') dist(x1, domain).  Both restrict to
    the data and both sampled graphs stay q-positive at modulus K, certifying
    at sample resolution that no point above x1 survives in the intersection
    of extension graphs.
    """
    k_prime = g.lspace.K
    if g.lspace.n2 != 1:
        raise PreconditionError("separating construction implemented for scalar range")
    if not (K > k_prime + 1e-12):
        raise PreconditionError("need K strictly larger than the data modulus")
    if not lipschitz_check(g).ok:
        raise PreconditionError("graph data must be K'-Lipschitz")
    x1 = np.atleast_1d(np.asarray(x1, dtype=float))
    dist = float(_query_dists(g, x1).min())
    if dist <= 1e-12:
        raise PreconditionError("x1 must not be a domain point")
    radius = (K - k_prime) * dist
    base_val = _mcshane_upper(g, x1)        # K'-Lipschitz extension value
    shifted = base_val + radius
    wide = LipschitzSpace.create(K, g.lspace.n1, 1)
    ext2 = GraphSet.from_data(wide, np.vstack([g.domain, x1[None, :]]),
                              np.concatenate([g.values[:, 0], [shifted]])[:, None])
    if not lipschitz_check(ext2).ok:
        raise InternalCheckError("shifted extension lost the K-Lipschitz bound")
    rng = np.random.default_rng(seed)
    lo = np.minimum(g.domain.min(axis=0), x1) - 1.0
    hi = np.maximum(g.domain.max(axis=0), x1) + 1.0
    queries = rng.uniform(lo, hi, size=(count, g.lspace.n1))
    val1 = np.array([_mcshane_upper(g, qpt) for qpt in queries])
    val2 = np.array([_mcshane_upper(ext2, qpt) for qpt in queries])
    for dom, vals in ((queries, val1), (queries, val2)):
        sample = GraphSet.from_data(wide, dom, vals[:, None])
        if not lipschitz_check(sample).ok:
            raise InternalCheckError("sampled extension violates the K bound")
    on_domain1 = np.array([_mcshane_upper(g, d) for d in g.domain])
    on_domain2 = np.array([_mcshane_upper(ext2, d) for d in g.domain])
    restores = (np.abs(on_domain1 - g.values[:, 0]).max() <= 1e-9
                and np.abs(on_domain2 - g.values[:, 0]).max() <= 1e-9)
    gap = abs(_mcshane_upper(ext2, x1) - base_val)
    if restores and gap > 1e-12:
        return Verdict.holds(resolution=float(count), disagreement=gap,
                             radius=radius, values=(base_val, shifted))
    return Verdict.fails(x1.copy(), disagreement=gap, restores_data=restores)
