"""Closed sets in a Euclidean space as q-positive sets.

Here q(x) = half the squared norm, so every nonempty set is q-positive and the
whole calculus runs through the exact distance function of a closed-set
descriptor: the representing function is
phi(x) = 0.5 |x|^2 - 0.5 d_A(x)^2, its conjugate and the G-membership test are
suprema of d_A(b)^2 - |b - x|^2 over b, and the closedness representation h
is another explicit supremum.  Suprema over the whole space are evaluated on a
recorded box (radius policy: 2 (|x| + descriptor extent) + 1); attainment on
the box boundary is flagged and treated as exclusion evidence, never silently
absorbed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from qpos.errors import PreconditionError
from qpos.numerics import BoxGrid, coordinate_polish
from qpos.verdicts import Verdict


class SetKind(str, Enum):
    FINITE_POINTS = "FINITE_POINTS"
    UNION_OF_SEGMENTS = "UNION_OF_SEGMENTS"
    AXIS_CROSS = "AXIS_CROSS"


@dataclass(frozen=True)
class ClosedSetDescriptor:
    """Closed set with an exact distance evaluator, one of a closed list of
    kinds; arbitrary closed sets are out of scope because exact distances are
    the foundation of every check here."""

    kind: SetKind
    dim: int
    points: np.ndarray | None = None     # (m, k) for FINITE_POINTS
    segments: np.ndarray | None = None   # (s, 2, k) for UNION_OF_SEGMENTS

    @classmethod
    def finite(cls, points) -> "ClosedSetDescriptor":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.shape[0] < 1:
            raise ValueError("need at least one point")
        pts = pts.copy()
        pts.flags.writeable = False
        return cls(SetKind.FINITE_POINTS, pts.shape[1], points=pts)

    @classmethod
    def from_segments(cls, segments) -> "ClosedSetDescriptor":
        segs = np.asarray(segments, dtype=float)
        if segs.ndim == 2:
            segs = segs.reshape(1, *segs.shape)
        if segs.ndim != 3 or segs.shape[1] != 2 or segs.shape[0] < 1:
            raise ValueError("segments must be a list of endpoint pairs")
        segs = segs.copy()
        segs.flags.writeable = False
        return cls(SetKind.UNION_OF_SEGMENTS, segs.shape[2], segments=segs)

    @classmethod
    def axis_cross(cls) -> "ClosedSetDescriptor":
        return cls(SetKind.AXIS_CROSS, 2)

    def distance_batch(self, ys: np.ndarray) -> np.ndarray:
        ys = np.asarray(ys, dtype=float)
        if ys.ndim == 1:
            ys = ys.reshape(1, -1)
        if ys.shape[1] != self.dim:
            raise ValueError("query dimension mismatch")
        if self.kind is SetKind.FINITE_POINTS:
            diff = ys[:, None, :] - self.points[None, :, :]
            return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff)).min(axis=1)
        if self.kind is SetKind.AXIS_CROSS:
            return np.abs(ys).min(axis=1)
        best = np.full(ys.shape[0], np.inf)
        for seg in self.segments:
            p, q = seg[0], seg[1]
            d = q - p
            denom = float(d @ d)
            if denom <= 1e-24:
                proj = np.tile(p, (ys.shape[0], 1))
            else:
                t = np.clip((ys - p) @ d / denom, 0.0, 1.0)
                proj = p[None, :] + t[:, None] * d[None, :]
            dist = np.sqrt(np.einsum("ij,ij->i", ys - proj, ys - proj))
            best = np.minimum(best, dist)
        return best

    def distance(self, y) -> float:
        return float(self.distance_batch(np.atleast_1d(np.asarray(y, dtype=float))[None, :])[0])

    def contains(self, y, tol: float = 1e-9) -> bool:
        return self.distance(y) <= tol

    def extent(self) -> float:
        if self.kind is SetKind.FINITE_POINTS:
            return float(np.sqrt(np.einsum("ij,ij->i", self.points, self.points)).max())
        if self.kind is SetKind.UNION_OF_SEGMENTS:
            flat = self.segments.reshape(-1, self.dim)
            return float(np.sqrt(np.einsum("ij,ij->i", flat, flat)).max())
        return 0.0


def q_norm(x) -> float:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return 0.5 * float(x @ x)


def phi_closed_eval(A: ClosedSetDescriptor, x) -> float:
    """0.5 |x|^2 - 0.5 d_A(x)^2, exact through the descriptor distance."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return q_norm(x) - 0.5 * A.distance(x) ** 2


def default_box(A: ClosedSetDescriptor, x, pitch: float = 0.05,
                multistarts: int = 6) -> BoxGrid:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    radius = 2.0 * (float(np.linalg.norm(x)) + A.extent()) + 1.0
    return BoxGrid(-radius * np.ones(A.dim), radius * np.ones(A.dim),
                   pitch=pitch * max(1.0, radius), multistarts=multistarts)


class SupEngine:
    """Shared evaluator for suprema of d_A(b)^2 - |b - x|^2 over a fixed box.

    The mesh and the squared distances are computed once; each probe costs one
    vectorized pass plus a local coordinate polish, and the probe itself is
    always injected as a candidate so the supremum is never underestimated at
    the base point."""

    def __init__(self, A: ClosedSetDescriptor, box: BoxGrid):
        self.A = A
        self.box = box
        self.mesh = box.mesh()
        self.d2 = A.distance_batch(self.mesh) ** 2
        self.pitch = box.actual_pitch()

    def _objective(self, x):
        def f(b):
            return self.A.distance(b) ** 2 - float(np.sum((b - x) ** 2))
        return f

    def sup_dist_gap(self, x, starts: int | None = None):
        """(sup, argmax, boundary_hit) for sup_b d_A(b)^2 - |b - x|^2."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        sq = np.einsum("ij,ij->i", self.mesh - x, self.mesh - x)
        vals = self.d2 - sq
        k = starts or self.box.multistarts
        order = np.argsort(vals, kind="stable")[::-1][:k]
        f = self._objective(x)
        best_val = float(self.A.distance(x) ** 2)  # candidate b = x
        best_arg = x.copy()
        for idx in order:
            val, arg = coordinate_polish(f, self.mesh[idx], float(vals[idx]),
                                         self.box.lower, self.box.upper, self.pitch)
            if val > best_val:
                best_val, best_arg = val, arg
        margin = 0.51 * self.pitch
        boundary = bool(np.any(best_arg <= self.box.lower + margin)
                        or np.any(best_arg >= self.box.upper - margin))
        return best_val, best_arg, boundary


def phi_conj_closed_eval(A: ClosedSetDescriptor, x, box: BoxGrid | None = None,
                         engine: SupEngine | None = None) -> float:
    """Conjugate of the representing function:
    0.5 |x|^2 + 0.5 sup_b { d_A(b)^2 - |x - b|^2 }, sup over the recorded box."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    engine = engine or SupEngine(A, box or default_box(A, x))
    sup, _, _ = engine.sup_dist_gap(x)
    return q_norm(x) + 0.5 * sup


def g_phi_closed_member(A: ClosedSetDescriptor, x, box: BoxGrid | None = None,
                        tol: float = 1e-6, engine: SupEngine | None = None) -> Verdict:
    """Membership in G of the representing function: the supremum of
    d_A(b)^2 - |b - x|^2 (always >= d_A(x)^2 via b = x) must not exceed
    d_A(x)^2 by more than tol."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    engine = engine or SupEngine(A, box or default_box(A, x))
    sup, arg, boundary = engine.sup_dist_gap(x)
    d2 = A.distance(x) ** 2
    gap = sup - d2
    if boundary:
        return Verdict.fails(arg, resolution=engine.pitch, gap=float(gap),
                             boundary_attained=True)
    if gap <= tol:
        return Verdict.holds(resolution=engine.pitch, gap=float(gap))
    return Verdict.fails(arg, resolution=engine.pitch, gap=float(gap),
                         boundary_attained=False)


@dataclass(frozen=True)
class HEvalResult:
    value: float
    boundary_attained: bool
    argmax: np.ndarray
    resolution: float

    @property
    def box_unbounded(self) -> bool:
        return self.boundary_attained


def closed_repr_h_eval(A: ClosedSetDescriptor, x, box: BoxGrid | None = None) -> HEvalResult:
    """Representation-of-closed-sets function
    h(x) = sup_y { q(y) + <y, x - y> + 0.5 d_A(y)^2 } on the recorded box.

    Boundary attainment means the supremum is box-truncated; callers treat
    that as exclusion evidence (the true value only grows)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    box = box or default_box(A, x)
    mesh = box.mesh()
    d2 = A.distance_batch(mesh) ** 2
    vals = mesh @ x - 0.5 * np.einsum("ij,ij->i", mesh, mesh) + 0.5 * d2

    def f(y):
        return float(y @ x) - 0.5 * float(y @ y) + 0.5 * A.distance(y) ** 2

    order = np.argsort(vals, kind="stable")[::-1][: box.multistarts]
    best_val = f(x)  # candidate y = x gives q(x) + half the squared distance
    best_arg = x.copy()
    pitch = box.actual_pitch()
    for idx in order:
        val, arg = coordinate_polish(f, mesh[idx], float(vals[idx]),
                                     box.lower, box.upper, pitch)
        if val > best_val:
            best_val, best_arg = val, arg
    margin = 0.51 * pitch
    boundary = bool(np.any(best_arg <= box.lower + margin)
                    or np.any(best_arg >= box.upper - margin))
    return HEvalResult(best_val, boundary, best_arg, pitch)


def midpoint_ball_check(A: ClosedSetDescriptor, a1, a2, tol: float = 1e-9) -> Verdict:
    """Open-ball intersection at the midpoint of two members: HOLDS iff the
    set meets the open ball of radius half their distance strictly."""
    a1 = np.atleast_1d(np.asarray(a1, dtype=float))
    a2 = np.atleast_1d(np.asarray(a2, dtype=float))
    if float(np.linalg.norm(a1 - a2)) <= 1e-12:
        raise PreconditionError("need two distinct points")
    if not (A.contains(a1) and A.contains(a2)):
        raise PreconditionError("both points must belong to the set")
    x = 0.5 * (a1 + a2)
    r = 0.5 * float(np.linalg.norm(a1 - a2))
    d = A.distance(x)
    if d < r - tol:
        return Verdict.holds(midpoint_distance=float(d), radius=r)
    return Verdict.fails(x, midpoint_distance=float(d), radius=r)


def _merged_intervals(A: ClosedSetDescriptor):
    if A.dim != 1:
        raise PreconditionError("line analysis requires dimension one")
    if A.kind is SetKind.FINITE_POINTS:
        ivals = [(float(p[0]), float(p[0])) for p in A.points]
    elif A.kind is SetKind.UNION_OF_SEGMENTS:
        ivals = [(float(min(s[0, 0], s[1, 0])), float(max(s[0, 0], s[1, 0])))
                 for s in A.segments]
    else:
        raise PreconditionError("axis cross is not a subset of the line")
    ivals.sort()
    merged = [list(ivals[0])]
    for lo, hi in ivals[1:]:
        if lo <= merged[-1][1] + 1e-12:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi])
    return merged


def line_corollary_check(A: ClosedSetDescriptor, probe_net,
                         box: BoxGrid | None = None, tol: float = 1e-6) -> Verdict:
    """On the real line, the G-set of the representing function equals the set
    itself exactly for closed convex sets.  Compares interval convexity with
    the net-sampled predicate and HOLDS when the two agree."""
    merged = _merged_intervals(A)
    convex = len(merged) == 1
    probes = np.atleast_1d(np.asarray(probe_net, dtype=float)).reshape(-1, 1)
    if box is None:
        radius = 2.0 * (float(np.abs(probes).max()) + A.extent()) + 1.0
        box = BoxGrid([-radius], [radius], pitch=min(0.02 * radius, 0.1))
    engine = SupEngine(A, box)
    extras = []
    for x in probes:
        in_g = g_phi_closed_member(A, x, engine=engine, tol=tol).ok
        in_a = A.contains(x, tol=1e-9)
        if in_g and not in_a:
            extras.append(float(x[0]))
    predicate = len(extras) == 0  # "A equals its G-set" at net resolution
    if convex == predicate:
        return Verdict.holds(resolution=engine.pitch, convex=convex,
                             g_extras=extras[:4])
    witness = np.array([extras[0]]) if extras else None
    return Verdict.fails(witness, convex=convex, g_extras=extras[:4],
                         resolution=engine.pitch)
