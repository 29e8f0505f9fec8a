"""Convex calculus for q-positive sets: the Fitzpatrick-type function Phi_A,
its intrinsic conjugate, the equality sets P_q, the q-subdifferential gap, and
membership in the representable hull and in G_Phi.

Phi_A(x) = q(x) - inf_a q(x - a) = max_a { pairing(x, a) - q(a) } is max-affine
for a finite set A, with piece slopes S a_i and offsets q(a_i).  The intrinsic
conjugate f@(b) = sup_c { pairing(c, b) - f(c) } of a max-affine f is computed
exactly as a small LP: minimize the convex combination of offsets whose slopes
average to S b.  LP infeasibility is exactly the complement of the weak convex
hull, which makes the domain sandwich conv A <= dom Phi_A@ <= weak-conv A an
equality test for finite A.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from qpos.core import PointSet, SsdSpace, hull_lp
from qpos.errors import PreconditionError
from qpos.numerics import EPS, SimplexLp, lp_min
from qpos.verdicts import Verdict


@dataclass(frozen=True)
class MaxAffineFn:
    """f(x) = max_i (slopes[i] . x - offsets[i]); convex and finite everywhere."""

    space: SsdSpace
    slopes: np.ndarray   # (m, n)
    offsets: np.ndarray  # (m,)

    @classmethod
    def from_pieces(cls, space: SsdSpace, slopes, offsets) -> "MaxAffineFn":
        slopes = np.asarray(slopes, dtype=float)
        if slopes.ndim == 1:
            slopes = slopes.reshape(1, -1)
        offsets = np.atleast_1d(np.asarray(offsets, dtype=float))
        if slopes.shape[0] < 1 or slopes.shape[0] != offsets.size:
            raise ValueError("need at least one piece and matching offsets")
        if slopes.shape[1] != space.n:
            raise ValueError("slope dimension does not match the space")
        slopes = slopes.copy()
        offsets = offsets.copy()
        slopes.flags.writeable = False
        offsets.flags.writeable = False
        return cls(space, slopes, offsets)

    @property
    def pieces(self) -> int:
        return self.slopes.shape[0]

    def eval(self, x) -> float:
        x = self.space.check_vector(x)
        return float(np.max(self.slopes @ x - self.offsets))

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        return np.max(xs @ self.slopes.T - self.offsets, axis=1)

    def __call__(self, x) -> float:
        return self.eval(x)


def phi_build(A: PointSet) -> MaxAffineFn:
    """Fitzpatrick-type function of a finite set: one piece per point, slope
    S a_i and offset q(a_i).  Satisfies both defining formulas identically."""
    slopes = A.points @ A.space.S
    offsets = A.space.q_batch(A.points)
    return MaxAffineFn.from_pieces(A.space, slopes, offsets)


def phi_defining_gap(A: PointSet, f: MaxAffineFn, x) -> float:
    """|max-affine value - (q(x) - min_a q(x-a))|; zero up to roundoff."""
    x = A.space.check_vector(x)
    direct = A.space.q(x) - float(np.min(A.space.q_batch(x[None, :] - A.points)))
    return abs(f.eval(x) - direct)


@dataclass(frozen=True)
class ConjugateQuery:
    """Result of one intrinsic-conjugate evaluation f@(b)."""

    f: MaxAffineFn
    b: np.ndarray
    value: float                     # +inf when the LP is infeasible
    weights: np.ndarray | None

    @property
    def finite(self) -> bool:
        return math.isfinite(self.value)


def conj_eval(f: MaxAffineFn, b) -> ConjugateQuery:
    """Intrinsic conjugate of a max-affine function at b, solved exactly as
    the LP: minimize lam . offsets  s.t.  lam . slopes = S b, lam in simplex."""
    b = f.space.check_vector(b)
    lp = SimplexLp(costs=f.offsets, moments=f.slopes.T, target=f.space.S @ b)
    res = lp_min(lp)
    if not res.feasible:
        return ConjugateQuery(f, b, math.inf, None)
    return ConjugateQuery(f, b, float(res.value), res.weights)


ValueFn = Union[MaxAffineFn, Callable[[np.ndarray], float]]


def pq_member(f: ValueFn, space: SsdSpace, b, tol: float = EPS,
              f_geq_q: str = "assumed") -> Verdict:
    """Membership of b in the equality set {f = q}.

    The caller vouches that f >= q (certified or assumed); that claim is
    recorded in the verdict metadata rather than re-proved here.
    """
    b = space.check_vector(b)
    value = f.eval(b) if isinstance(f, MaxAffineFn) else float(f(b))
    gap = value - space.q(b)
    if math.isfinite(value) and abs(gap) <= tol:
        return Verdict.holds(gap=float(gap), f_geq_q=f_geq_q)
    return Verdict.fails(b.copy(), gap=float(gap) if math.isfinite(value) else math.inf,
                         f_geq_q=f_geq_q)


def repr_hull_member(A: PointSet, b, tol: float = EPS,
                     phi: MaxAffineFn | None = None) -> Verdict:
    """Membership of b in the smallest q-representable superset of A, i.e. the
    equality set of the conjugate of Phi_A."""
    phi = phi or phi_build(A)
    cq = conj_eval(phi, b)
    qb = A.space.q(b)
    if cq.finite and abs(cq.value - qb) <= tol:
        return Verdict.holds(conj_value=cq.value, q=qb)
    gap = cq.value - qb if cq.finite else math.inf
    return Verdict.fails(np.asarray(b, dtype=float).copy(), gap=gap,
                         infeasible=not cq.finite)


def q_subdiff_check(f: MaxAffineFn, a, b, tol: float = EPS) -> Verdict:
    """Does b lie in the q-subdifferential of f at a?  HOLDS iff the
    Fenchel-Young gap f(a) + f@(b) - pairing(a, b) is <= tol (it is always
    >= -tol); the gap is returned in the metadata."""
    space = f.space
    a = space.check_vector(a)
    b = space.check_vector(b)
    cq = conj_eval(f, b)
    if not cq.finite:
        return Verdict.fails((a.copy(), b.copy()), gap=math.inf)
    gap = f.eval(a) + cq.value - space.pairing(a, b)
    if gap < -tol:
        raise AssertionError(f"Fenchel-Young violation: gap={gap:g}")
    if gap <= tol:
        return Verdict.holds(gap=float(gap))
    return Verdict.fails((a.copy(), b.copy()), gap=float(gap))


def g_phi_member(A: PointSet, b, tol: float = EPS,
                 phi: MaxAffineFn | None = None) -> Verdict:
    """Membership of b in G_Phi: 0.5 (Phi_A(b) + Phi_A@(b)) = q(b) within tol,
    equivalently b is in the q-subdifferential of Phi_A at b itself."""
    phi = phi or phi_build(A)
    cq = conj_eval(phi, b)
    qb = A.space.q(b)
    if not cq.finite:
        return Verdict.fails(np.asarray(b, dtype=float).copy(), gap=math.inf,
                             infeasible=True)
    gap = 0.5 * (phi.eval(b) + cq.value) - qb
    if abs(gap) <= tol:
        return Verdict.holds(gap=float(gap))
    return Verdict.fails(np.asarray(b, dtype=float).copy(), gap=float(gap),
                         infeasible=False)


def chain_verdicts(A: PointSet, b, tol: float = EPS,
                   phi: MaxAffineFn | None = None) -> dict:
    """All four membership layers at one probe, sharing one conjugate LP:
    point of A, representable hull, G_Phi, and polar-and-hull."""
    phi = phi or phi_build(A)
    b = A.space.check_vector(b)
    cq = conj_eval(phi, b)
    qb = A.space.q(b)
    phib = phi.eval(b)
    in_a = A.contains_point(b, tol=1e-9)
    in_hull = cq.finite
    in_repr = cq.finite and abs(cq.value - qb) <= tol
    in_g = cq.finite and abs(0.5 * (phib + cq.value) - qb) <= tol
    in_pi = phib <= qb + tol
    return {"A": in_a, "repr_hull": in_repr, "g_phi": in_g,
            "pi": in_pi, "hull": in_hull,
            "phi": phib, "conj": cq.value, "q": qb}


def check_ineq_on_hull(A: PointSet, samples: int = 400, seed: int = 0,
                       tol: float = EPS, phi: MaxAffineFn | None = None) -> Verdict:
    """Diagnostic for the propositions that share the hypothesis
    Phi_A >= q on the weak convex hull of A.

    Scans q - Phi_A over barycentric samples of conv A; when the scan certifies
    the hypothesis at its resolution, asserts the equivalence of G_Phi and
    representable-hull membership on the same samples.  A failed hypothesis
    yields UNDECIDED with the offending hull point.
    """
    phi = phi or phi_build(A)
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(A.m), size=samples) if A.m > 1 else np.ones((samples, 1))
    pts = weights @ A.points
    pts = np.vstack([A.points, pts])
    gaps = A.space.q_batch(pts) - phi.eval_batch(pts)
    worst = int(np.argmax(gaps))
    resolution = float(samples)
    if float(gaps[worst]) > tol:
        return Verdict.undecided(resolution=resolution,
                                 hypothesis="failed",
                                 witness_point=pts[worst].tolist(),
                                 gap=float(gaps[worst]))
    for x in pts:
        g = g_phi_member(A, x, tol=tol, phi=phi)
        r = repr_hull_member(A, x, tol=tol, phi=phi)
        if g.ok != r.ok:
            return Verdict.fails(x.copy(), resolution=resolution,
                                 hypothesis="grid-certified",
                                 g_phi=g.status.value, repr_hull=r.status.value)
    return Verdict.holds(resolution=resolution, hypothesis="grid-certified",
                         probes=int(pts.shape[0]))


def conj_matches_hull(A: PointSet, b, phi: MaxAffineFn | None = None) -> bool:
    """Domain sandwich at a probe: LP feasibility of the conjugate must agree
    with weak-hull membership (they share one feasibility system)."""
    phi = phi or phi_build(A)
    cq = conj_eval(phi, b)
    hull = lp_min(hull_lp(A, b)).feasible
    return cq.finite == hull
