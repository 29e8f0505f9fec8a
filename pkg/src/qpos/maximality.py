"""Premaximality, extension continua, the third-polar identity, and the
NI-type correspondence in the finite-dimensional monotone model.

A q-positive set P is premaximal when it has exactly one maximally q-positive
superset.  Two certificates are available: the global inequality
Phi_P >= q on all of B (checked here on a user-chosen box and reported as
grid-certified, never as a proof), and an affine polar (decided exactly for
affine P).  When both fail at the chosen resolution, a sampled polar pair that
violates q-positivity witnesses non-premaximality; otherwise the report stays
UNDECIDED.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Union

import numpy as np

from qpos.affine import AffineSet, PiDescription, affine_is_q_positive, affine_pi
from qpos.core import PointSet, SsdSpace, is_q_positive, pi_member
from qpos.errors import EvaluationError, PreconditionError
from qpos.fitzpatrick import MaxAffineFn, phi_build
from qpos.numerics import (EPS, BoxGrid, GridMaxResult, eigh_jacobi, grid_multistart_max,
                           psd_on_subspace, pseudo_inverse_psd)
from qpos.verdicts import Status, Verdict, verdict_to_json


def pairwise_q(space: SsdSpace, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Matrix of q(x_i - y_j) via the expansion q(x) - pairing(x,y) + q(y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    qx = space.q_batch(xs)
    qy = space.q_batch(ys)
    return qx[:, None] - xs @ space.S @ ys.T + qy[None, :]


# ---------------------------------------------------------------------------
# Phi of an affine set (closed form)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _AffinePhiData:
    aset: AffineSet
    m_plus: np.ndarray
    ker: np.ndarray       # kernel eigenvectors of M = V'SV
    base: float           # -q(x0)
    dom_is_all: bool


def _affine_phi_data(P: AffineSet) -> _AffinePhiData:
    if not affine_is_q_positive(P).ok:
        raise PreconditionError("affine set must be q-positive")
    s_mat = P.space.S
    if P.dim == 0:
        return _AffinePhiData(P, np.empty((0, 0)), np.empty((0, 0)), -P.space.q(P.x0), True)
    m = P.V.T @ s_mat @ P.V
    m_plus, ker = pseudo_inverse_psd(0.5 * (m + m.T))
    rows = ker.T @ P.V.T @ s_mat if ker.shape[1] else np.empty((0, P.space.n))
    dom_is_all = rows.shape[0] == 0 or float(np.abs(rows).max()) <= 1e-12
    return _AffinePhiData(P, m_plus, ker, -P.space.q(P.x0), dom_is_all)


def _affine_phi_batch(data: _AffinePhiData, xs: np.ndarray) -> np.ndarray:
    P = data.aset
    xs = np.asarray(xs, dtype=float)
    base = xs @ (P.space.S @ P.x0) + data.base
    if P.dim == 0:
        return base
    c = (xs - P.x0) @ (P.space.S @ P.V)
    vals = base + 0.5 * np.einsum("ij,ij->i", c @ data.m_plus, c)
    if data.ker.shape[1]:
        off = np.abs(c @ data.ker).max(axis=1)
        scale = np.maximum(1.0, np.abs(c).max(axis=1))
        vals = np.where(off > 1e-8 * scale, np.inf, vals)
    return vals


def phi_affine_eval(P: AffineSet, x) -> float:
    """Phi_P(x) for an affine q-positive P: the concave inner maximum in
    closed form, +inf when the linear part is unbounded along ker(V'SV)."""
    data = _affine_phi_data(P)
    x = P.space.check_vector(x)
    return float(_affine_phi_batch(data, x[None, :])[0])


# ---------------------------------------------------------------------------
# premaximality report
# ---------------------------------------------------------------------------

class PremaxClass(str, Enum):
    PREMAXIMAL_VIA_202 = "PREMAXIMAL_VIA_202"
    PREMAXIMAL_VIA_AFFINE_PI = "PREMAXIMAL_VIA_AFFINE_PI"
    NOT_PREMAXIMAL = "NOT_PREMAXIMAL"
    UNDECIDED = "UNDECIDED"


@dataclass
class PremaxReport:
    classification: PremaxClass
    condition202: Verdict
    pi_positive: Verdict
    box: BoxGrid
    superset_kind: str | None = None            # "equality_set_of_phi" | "affine"
    superset_affine: AffineSet | None = None
    superset_member: Optional[Callable[[np.ndarray], bool]] = None
    dom_phi_equals_set: bool | None = None

    def to_json(self) -> dict:
        return {
            "classification": self.classification.value,
            "condition202": verdict_to_json(self.condition202),
            "pi_positive": verdict_to_json(self.pi_positive),
            "box": {"lower": self.box.lower.tolist(), "upper": self.box.upper.tolist(),
                    "pitch": self.box.pitch, "multistarts": self.box.multistarts},
            "superset_kind": self.superset_kind,
            "superset_affine": None if self.superset_affine is None else {
                "x0": self.superset_affine.x0.tolist(),
                "basis": self.superset_affine.V.tolist(),
            },
            "dom_phi_equals_set": self.dom_phi_equals_set,
        }


def _polar_pair_hunt(space: SsdSpace, candidates: np.ndarray, tol: float):
    """First pair of polar samples whose difference has negative q."""
    if candidates.shape[0] < 2:
        return None
    qmat = pairwise_q(space, candidates, candidates)
    iu = np.triu_indices(candidates.shape[0], k=1)
    vals = qmat[iu]
    worst = int(np.argmin(vals))
    if float(vals[worst]) < -tol:
        i, j = int(iu[0][worst]), int(iu[1][worst])
        return candidates[i].copy(), candidates[j].copy(), float(vals[worst])
    return None


def premax_certify(P: Union[PointSet, AffineSet], box: BoxGrid,
                   tol: float = EPS, net_limit: int = 400) -> PremaxReport:
    """Classify P as premaximal (two certificates), not premaximal (witness
    pair in the polar), or undecided at the box resolution."""
    space = P.space
    is_affine = isinstance(P, AffineSet)
    if is_affine:
        data = _affine_phi_data(P)
        phi_batch = lambda xs: _affine_phi_batch(data, xs)
        phi_scalar = lambda x: float(_affine_phi_batch(data, np.asarray(x, dtype=float)[None, :])[0])
        finite_everywhere = data.dom_is_all
    else:
        if not is_q_positive(P).ok:
            raise PreconditionError("P must be q-positive")
        phi = phi_build(P)
        phi_batch = phi.eval_batch
        phi_scalar = phi.eval
        finite_everywhere = True

    cond202 = Verdict.undecided(note="phi takes infinite values on the box")
    grid_res: GridMaxResult | None = None
    if finite_everywhere:
        gap = lambda x: space.q(x) - phi_scalar(x)
        gap_batch = lambda xs: space.q_batch(xs) - phi_batch(xs)
        try:
            grid_res = grid_multistart_max(gap, box, f_batch=gap_batch)
        except EvaluationError:
            grid_res = None
        if grid_res is not None:
            if grid_res.value <= tol:
                cond202 = Verdict.holds(resolution=grid_res.resolution,
                                        certified="grid", max_gap=grid_res.value)
            else:
                cond202 = Verdict.fails(grid_res.argmax, resolution=grid_res.resolution,
                                        max_gap=grid_res.value)

    if cond202.status is Status.HOLDS:
        member = lambda b, _phi=phi_scalar, _sp=space: abs(_phi(np.asarray(b, dtype=float))
                                                           - _sp.q(np.asarray(b, dtype=float))) <= 1e-8
        mesh = box.mesh()
        vals = np.abs(phi_batch(mesh) - space.q_batch(mesh))
        net = mesh[vals <= 1e-6][:net_limit]
        hit = _polar_pair_hunt(space, net, tol)
        pi_pos = (Verdict.fails((hit[0], hit[1]), q=hit[2]) if hit
                  else Verdict.holds(resolution=box.pitch, net_size=int(net.shape[0])))
        return PremaxReport(PremaxClass.PREMAXIMAL_VIA_202, cond202, pi_pos, box,
                            superset_kind="equality_set_of_phi", superset_member=member)

    if is_affine:
        pi = affine_pi(P)
        q_l = pi.direction_basis
        n_mat = pi.normal_matrix
        restricted = q_l.T @ n_mat @ q_l
        lam, vecs = eigh_jacobi(0.5 * (restricted + restricted.T))
        lam_min = float(lam[0]) if lam.size else 0.0
        lam_max = float(lam[-1]) if lam.size else 0.0
        polar_basis = None
        if lam_min >= -tol:
            polar_basis = q_l                       # polar is the whole constrained slab
        elif lam_max <= tol:
            polar_basis = q_l @ vecs[:, np.abs(lam) <= tol]  # polar is the zero set of a NSD form
        if polar_basis is not None:
            superset = AffineSet.from_anchor_basis(space, P.x0, polar_basis)
            pi_pos = psd_on_subspace(space.S, polar_basis, tol=tol) if polar_basis.shape[1] \
                else Verdict.holds(note="singleton polar")
            return PremaxReport(PremaxClass.PREMAXIMAL_VIA_AFFINE_PI, cond202, pi_pos, box,
                                superset_kind="affine", superset_affine=superset,
                                dom_phi_equals_set=pi.domain_equals_set() and superset.dim == P.dim)
        # mixed signature: the polar is a genuine double cone; hunt a violating pair
        plus = q_l @ vecs[:, -1]
        minus = q_l @ vecs[:, 0]
        a_big = math.sqrt(max(-lam_min / max(lam_max, tol), 0.0)) + 1.0
        cand = [P.x0 + s * (a_big * plus) + t * minus
                for s in (-1.0, 1.0) for t in (-1.0, 0.0, 1.0)]
        cand = np.stack([c for c in cand if pi.contains(c, tol=tol)])
        hit = _polar_pair_hunt(space, cand, tol)
        if hit is None:
            mesh = box.mesh()
            ok = np.array([pi.contains(x, tol=tol) for x in mesh])
            hit = _polar_pair_hunt(space, mesh[ok][:net_limit], tol)
        if hit is not None:
            return PremaxReport(PremaxClass.NOT_PREMAXIMAL, cond202,
                                Verdict.fails((hit[0], hit[1]), q=hit[2]), box)
        return PremaxReport(PremaxClass.UNDECIDED, cond202,
                            Verdict.undecided(resolution=box.pitch), box)

    # finite point set: sample the polar over the box and hunt a violating pair
    mesh = box.mesh()
    minq = pairwise_q(space, mesh, P.points).min(axis=1)
    net = mesh[minq >= -tol]
    if net.shape[0] > net_limit:
        idx = np.linspace(0, net.shape[0] - 1, net_limit).astype(int)
        net = net[idx]
    hit = _polar_pair_hunt(space, net, tol)
    if hit is not None:
        return PremaxReport(PremaxClass.NOT_PREMAXIMAL, cond202,
                            Verdict.fails((hit[0], hit[1]), q=hit[2]), box)
    return PremaxReport(PremaxClass.UNDECIDED, cond202,
                        Verdict.undecided(resolution=box.pitch, net_size=int(net.shape[0])),
                        box)


# ---------------------------------------------------------------------------
# third polar identity
# ---------------------------------------------------------------------------

def third_polar_check(A: PointSet, probes, tol: float = EPS) -> Verdict:
    """Net test of the identity polar(polar(polar(A))) = polar(A).

    A FAILS verdict would falsify a theorem and must never happen; HOLDS is
    reported at the net resolution.
    """
    probes = np.asarray(probes, dtype=float)
    if probes.ndim == 1:
        probes = probes.reshape(1, -1)
    space = A.space
    in_pi = pairwise_q(space, probes, A.points).min(axis=1) >= -tol
    net = probes[in_pi]
    if net.shape[0] == 0:
        return Verdict.undecided(note="no probe landed in the polar")
    rel_to_net = pairwise_q(space, probes, net).min(axis=1) >= -tol
    accepted = np.vstack([A.points, probes[rel_to_net]])
    # forward: every polar-net point must be q-related to every accepted
    # double-polar element
    fwd = pairwise_q(space, net, accepted)
    worst = np.unravel_index(int(np.argmin(fwd)), fwd.shape)
    if float(fwd[worst]) < -tol:
        return Verdict.fails((net[worst[0]].copy(), accepted[worst[1]].copy()),
                             q=float(fwd[worst]), direction="polar not in triple polar")
    # converse at net resolution: probes related to all accepted elements must
    # already lie in the polar
    back = pairwise_q(space, probes, accepted).min(axis=1) >= -tol
    bad = np.where(back & ~in_pi)[0]
    if bad.size:
        return Verdict.fails(probes[bad[0]].copy(),
                             direction="triple polar escaped the polar")
    return Verdict.holds(resolution=float(net.shape[0]),
                         net_size=int(net.shape[0]), accepted=int(accepted.shape[0]))


# ---------------------------------------------------------------------------
# extension continuum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExtensionFamily:
    x1: np.ndarray
    x2: np.ndarray
    lambdas: np.ndarray
    points: np.ndarray
    q_x1_x2: float
    pairwise_identity_error: float   # max |q(x_i - x_j) - (l_i - l_j)^2 q(x1 - x2)|
    min_polar_margin: float          # min over (lambda, a) of q(x_lambda - a)


def extension_continuum(A: PointSet, x1, x2, count: int) -> ExtensionFamily:
    """Equally spaced segment points between two polar elements with
    q(x1 - x2) < 0; every one extends A q-positively, and distinct points can
    never share a maximal extension because their mutual q stays negative.

    Verification is exact for finite A: along the segment, q(x_l - a) is a
    concave quadratic in l, so nonnegativity at both endpoints (given) forces
    nonnegativity on all of [0, 1].
    """
    space = A.space
    x1 = space.check_vector(x1)
    x2 = space.check_vector(x2)
    if count < 2:
        raise ValueError("need at least the two endpoints")
    if not pi_member(A, x1).ok or not pi_member(A, x2).ok:
        raise PreconditionError("x1 and x2 must lie in the polar of A")
    q12 = space.q(x1 - x2)
    if q12 >= -EPS:
        raise PreconditionError("q(x1 - x2) must be strictly negative")
    lambdas = np.linspace(0.0, 1.0, count)
    points = lambdas[:, None] * x1[None, :] + (1.0 - lambdas)[:, None] * x2[None, :]
    # concavity certificate plus explicit evaluation at every sample
    polar_vals = pairwise_q(space, points, A.points)
    margin = float(polar_vals.min())
    if margin < -EPS:
        raise PreconditionError("segment point escaped the polar; endpoints inconsistent")
    diffs_q = pairwise_q(space, points, points)
    lam_diff = lambdas[:, None] - lambdas[None, :]
    ident_err = float(np.abs(diffs_q - lam_diff ** 2 * q12).max())
    assert is_q_positive(PointSet.from_points(space, np.vstack([A.points, points[:1]]))).ok
    assert is_q_positive(PointSet.from_points(space, np.vstack([A.points, points[-1:]]))).ok
    return ExtensionFamily(x1, x2, lambdas, points, q12, ident_err, margin)


# ---------------------------------------------------------------------------
# NI-type check in the monotone model
# ---------------------------------------------------------------------------

def _swap_pairs(xs: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    k = xs.shape[1] // 2
    return np.concatenate([xs[:, k:], xs[:, :k]], axis=1)


def ni_type_check(ssdb, A: PointSet, box: BoxGrid | None, tol: float = EPS) -> Verdict:
    """NI condition for a monotone sample set: over dual-pair probes (y*, y**),
    the infimum of the coupling <a* - y*, a - y**> must never be positive.

    In the finite monotone model the embedding is the coordinate swap, so the
    infimum equals q(swap(a) - probe); the check cross-validates against the
    global-inequality verdict of the swapped set on the same grid, which must
    agree to roundoff.
    """
    if getattr(ssdb, "kind", None) != "monotone":
        raise PreconditionError("NI check requires the monotone model")
    space = ssdb.base
    if A.space.n != space.n:
        raise ValueError("point set does not live in the model space")
    if box is None:
        return Verdict.undecided(note="no probe box supplied")
    iota = _swap_pairs(A.points)
    inf_scalar = lambda b: float(pairwise_q(space, np.asarray(b, dtype=float)[None, :], iota).min())
    inf_batch = lambda xs: pairwise_q(space, xs, iota).min(axis=1)
    res = grid_multistart_max(inf_scalar, box, f_batch=inf_batch)

    phi = phi_build(PointSet.from_points(space, iota))
    gap_batch = lambda xs: space.q_batch(xs) - phi.eval_batch(xs)
    res202 = grid_multistart_max(lambda x: space.q(x) - phi.eval(x), box, f_batch=gap_batch)
    if abs(res.value - res202.value) > 1e-8 * max(1.0, abs(res.value)):
        raise AssertionError("NI and global-inequality scans disagree beyond roundoff")

    if res.value <= tol:
        return Verdict.holds(resolution=res.resolution, certified="grid",
                             max_inf=res.value, agrees_with_202=True,
                             unique_extension="polar equals the equality set of phi")
    return Verdict.fails(res.argmax, resolution=res.resolution,
                         max_inf=res.value, agrees_with_202=True)
