"""Property-test batteries, one per module, runnable from the CLI.

Each check re-derives its expectation from an independent route (definition
formulas, exhaustive sampling, closed forms) and reports pass / fail /
undecided; UNDECIDED entries are listed but non-fatal.  Checks are wrapped so
that an exception counts as a failure instead of aborting the battery, which
keeps mutation runs informative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from qpos import gen
from qpos.affine import AffineSet, affine_is_maximal, affine_is_q_positive, affine_pi, maximal_convex_affinity_falsifier
from qpos.core import PointSet, conv_w_hull_member, is_q_positive, pi_member
from qpos.envelopes import EnvelopeQuery, certify_geq_q, envelope_eval_batch, fund_ineq_check
from qpos.fitzpatrick import chain_verdicts, conj_eval, conj_matches_hull, phi_build, phi_defining_gap
from qpos.hilbert import (ClosedSetDescriptor, SupEngine, closed_repr_h_eval, default_box,
                          g_phi_closed_member, line_corollary_check, midpoint_ball_check,
                          phi_closed_eval, phi_conj_closed_eval)
from qpos.lipschitz import GraphSet, LipschitzSpace, lipschitz_check, mcshane_bracket, phi_graph_eval
from qpos.maximality import PremaxClass, extension_continuum, ni_type_check, pairwise_q, phi_affine_eval, premax_certify, third_polar_check
from qpos.numerics import BoxGrid, SimplexLp, eigh_jacobi, grid_multistart_max, lp_min, min_q_over_affine, psd_on_subspace, singular_values
from qpos.ssdb import NegPolarSet, canonical_pq_basis, decompose_sum, g0_tangent_fn, make_hilbert_ssdb, make_monotone_ssdb, maximality_via_decomposition, pq_g0_member, tangent_refinement_centers
from qpos.verdicts import Status


@dataclass
class CheckResult:
    suite: str
    name: str
    outcome: str  # "PASS" | "FAIL" | "UNDECIDED"
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.outcome == "PASS"

    @property
    def failed(self) -> bool:
        return self.outcome == "FAIL"


class _Battery:
    def __init__(self, suite: str):
        self.suite = suite
        self.results: list[CheckResult] = []

    def check(self, name: str, fn):
        try:
            out = fn()
        except Exception as exc:  # an exception is a failed check, not an abort
            self.results.append(CheckResult(self.suite, name, "FAIL",
                                            f"{type(exc).__name__}: {exc}"))
            return
        if out is None or out is True:
            self.results.append(CheckResult(self.suite, name, "PASS"))
        elif out is False:
            self.results.append(CheckResult(self.suite, name, "FAIL"))
        elif isinstance(out, tuple):
            ok, detail = out
            state = "PASS" if ok else ("UNDECIDED" if ok is None else "FAIL")
            self.results.append(CheckResult(self.suite, name, state, str(detail)))
        else:
            self.results.append(CheckResult(self.suite, name, "PASS", str(out)))


# ---------------------------------------------------------------------------

def suite_core(seed: int = 0) -> list[CheckResult]:
    b = _Battery("core")
    rng = np.random.default_rng(seed)
    space = make_monotone_ssdb(2).base

    def pairing_symmetry():
        for _ in range(200):
            u = rng.uniform(-3, 3, space.n)
            v = rng.uniform(-3, 3, space.n)
            if space.pairing(u, v) != space.pairing(v, u):
                return False, "asymmetric pairing value"
        return True

    def parallelogram():
        worst = 0.0
        for _ in range(200):
            u = rng.uniform(-3, 3, space.n)
            v = rng.uniform(-3, 3, space.n)
            lhs = space.q(u - v)
            rhs = space.q(u) - space.pairing(u, v) + space.q(v)
            scale = max(1.0, abs(lhs), abs(rhs))
            worst = max(worst, abs(lhs - rhs) / scale)
        return worst <= 1e-12, f"worst relative gap {worst:.2e}"

    def set_inside_own_polar():
        for trial in range(20):
            A = gen.random_monotone_pointset(rng, k=rng.integers(1, 4), m=int(rng.integers(2, 9)))
            if not is_q_positive(A).ok:
                return False, "generator produced a non-q-positive set"
            for a in A.points:
                if not pi_member(A, a).ok:
                    return False, "a point of A escaped the polar of A"
        return True

    def antitone_polarity():
        for trial in range(20):
            A = gen.random_monotone_pointset(rng, k=2, m=6)
            sub = PointSet.from_points(A.space, A.points[:3])
            for p in gen.random_probes(rng, A.space.n, 25):
                if pi_member(A, p).ok and not pi_member(sub, p).ok:
                    return False, "polar of the superset escaped the subset polar"
        return True

    b.check("pairing_symmetry_exact", pairing_symmetry)
    b.check("parallelogram_expansion", parallelogram)
    b.check("set_inside_own_polar", set_inside_own_polar)
    b.check("antitone_polarity", antitone_polarity)
    return b.results


def suite_numerics(seed: int = 0) -> list[CheckResult]:
    b = _Battery("numerics")
    rng = np.random.default_rng(seed)

    def weak_duality():
        for _ in range(60):
            m = int(rng.integers(1, 9))
            k = int(rng.integers(1, 5))
            cols = rng.uniform(-2, 2, size=(k, m))
            costs = rng.uniform(-1, 1, size=m)
            witness = rng.dirichlet(np.ones(m))
            target = cols @ witness
            res = lp_min(SimplexLp(costs, cols, target))
            if not res.feasible:
                return False, "feasible instance reported infeasible"
            if res.value > float(costs @ witness) + 1e-8:
                return False, "optimum above a known feasible cost"
        return True

    def permutation_invariance():
        for _ in range(40):
            m = int(rng.integers(2, 9))
            k = int(rng.integers(1, 4))
            cols = rng.uniform(-2, 2, size=(k, m))
            costs = rng.uniform(-1, 1, size=m)
            target = cols @ rng.dirichlet(np.ones(m))
            v1 = lp_min(SimplexLp(costs, cols, target)).value
            perm = rng.permutation(m)
            v2 = lp_min(SimplexLp(costs[perm], cols[:, perm], target)).value
            if abs(v1 - v2) > 1e-9:
                return False, f"values differ by {abs(v1 - v2):.2e}"
        return True

    def psd_agreement():
        for _ in range(30):
            root = rng.normal(size=(4, 4))
            s_mat = 0.5 * (root + root.T)
            v = rng.normal(size=(4, int(rng.integers(1, 4))))
            verdict = psd_on_subspace(s_mat, v, tol=1e-9)
            m = v.T @ s_mat @ v
            samples = rng.normal(size=(1000, m.shape[0]))
            vals = np.einsum("ij,ij->i", samples @ m, samples)
            exhaust = bool(vals.min() >= -1e-7 * max(1.0, float(np.abs(vals).max())))
            if verdict.ok != exhaust:
                lam = eigh_jacobi(0.5 * (m + m.T))[0]
                if abs(float(lam[0])) < 1e-7:  # borderline eigenvalue, both answers defensible
                    continue
                return False, "subspace PSD verdict disagrees with sampling"
        return True

    def minq_lower_bound():
        for _ in range(30):
            k = int(rng.integers(1, 4))
            sp = make_monotone_ssdb(k)
            d = int(rng.integers(0, k + 1))
            v = rng.normal(size=(2 * k, d)) if d else np.empty((2 * k, 0))
            if d and not psd_on_subspace(sp.base.S, v).ok:
                continue
            r = rng.uniform(-2, 2, 2 * k)
            res = min_q_over_affine(sp.base.S, r, v)
            if not res.finite:
                continue
            ts = rng.uniform(-4, 4, size=(1000, max(d, 1)))[:, :d]
            vals = sp.base.q_batch(r[None, :] - ts @ v.T)
            if res.value > float(vals.min()) + 1e-8:
                return False, "reported infimum above a sampled value"
            attained = sp.base.q(r - (v @ res.minimizer if d else 0.0))
            if abs(attained - res.value) > 1e-8:
                return False, "minimizer does not attain the infimum"
        return True

    b.check("lp_weak_duality", weak_duality)
    b.check("lp_permutation_invariance", permutation_invariance)
    b.check("psd_subspace_vs_sampling", psd_agreement)
    b.check("min_q_affine_lower_bound", minq_lower_bound)
    return b.results


def _battery_instances(rng, sets=12, probes=40):
    out = []
    for _ in range(sets):
        k = int(rng.integers(1, 5))
        m = int(rng.integers(1, 11))
        A = gen.random_monotone_pointset(rng, k, m)
        ps = gen.random_probes(rng, A.space.n, probes)
        out.append((A, ps))
    return out


def suite_fitzpatrick(seed: int = 0) -> list[CheckResult]:
    b = _Battery("fitzpatrick")
    rng = np.random.default_rng(seed)
    instances = _battery_instances(rng)

    def defining_formulas():
        for A, probes in instances[:6]:
            phi = phi_build(A)
            for p in probes[:10]:
                if phi_defining_gap(A, phi, p) > 1e-9:
                    return False, "the two defining formulas disagree"
        return True

    def bounds_and_equalities():
        for A, probes in instances:
            phi = phi_build(A)
            for p in probes:
                cq = conj_eval(phi, p)
                if not cq.finite:
                    continue
                if phi.eval(p) > cq.value + 1e-8:
                    return False, "phi exceeded its conjugate"
                if A.space.q(p) > cq.value + 1e-8:
                    return False, "q exceeded the conjugate"
            for a in A.points:
                cq = conj_eval(phi, a)
                qa = A.space.q(a)
                if abs(phi.eval(a) - qa) > 1e-8 or not cq.finite or abs(cq.value - qa) > 1e-8:
                    return False, "equality on A violated"
        return True

    def largest_minorant():
        for A, probes in instances[:6]:
            phi = phi_build(A)
            h = gen.random_max_affine_minorant(rng, A, pieces=4)
            if float((h.eval_batch(A.points) - A.space.q_batch(A.points)).max()) > 1e-9:
                return False, "generated minorant exceeds q on A"
            for p in probes[:20]:
                cq = conj_eval(phi, p)
                if cq.finite and h.eval(p) > cq.value + 1e-8:
                    return False, "conjugate is not the largest minorant"
        return True

    def domain_lemma():
        for A, probes in instances:
            phi = phi_build(A)
            for p in probes[:20]:
                if not conj_matches_hull(A, p, phi=phi):
                    return False, "conjugate domain disagrees with the hull"
        return True

    def inclusion_chain():
        for A, probes in instances:
            phi = phi_build(A)
            for p in np.vstack([probes[:20], A.points]):
                c = chain_verdicts(A, p, phi=phi)
                if c["A"] and not c["repr_hull"]:
                    return False, "A escaped the representable hull"
                if c["repr_hull"] and not c["g_phi"]:
                    return False, "representable hull escaped G"
                if c["g_phi"] and not (c["pi"] and c["hull"]):
                    return False, "G escaped polar-and-hull"
        return True

    def mu_equivalence():
        for A, probes in instances:
            phi = phi_build(A)
            qs = A.space.q_batch(probes)
            phis = phi.eval_batch(probes)
            for i, p in enumerate(probes):
                lhs = pi_member(A, p).ok
                rhs = phis[i] <= qs[i] + 1e-9
                if lhs != rhs and abs(phis[i] - qs[i]) > 1e-8:
                    return False, "polar test and phi <= q disagree"
        return True

    def hull_phi_invariance():
        for A, probes in instances[:6]:
            phi = phi_build(A)
            accepted = [p for p in probes[:20]
                        if conj_eval(phi, p).finite
                        and abs(conj_eval(phi, p).value - A.space.q(p)) <= 1e-9]
            if not accepted:
                continue
            C = PointSet.from_points(A.space, np.vstack([A.points, accepted]))
            phi_c = phi_build(C)
            test = gen.random_probes(rng, A.space.n, 30)
            if float(np.abs(phi.eval_batch(test) - phi_c.eval_batch(test)).max()) > 1e-8:
                return False, "phi changed after adding hull points"
        return True

    b.check("defining_formulas_agree", defining_formulas)
    b.check("conjugate_bounds_and_equalities", bounds_and_equalities)
    b.check("conjugate_is_largest_minorant", largest_minorant)
    b.check("domain_lemma", domain_lemma)
    b.check("inclusion_chain", inclusion_chain)
    b.check("mu_equivalence", mu_equivalence)
    b.check("hull_phi_invariance", hull_phi_invariance)
    return b.results


def suite_affine(seed: int = 0) -> list[CheckResult]:
    b = _Battery("affine")
    rng = np.random.default_rng(seed)
    sp = make_monotone_ssdb(1)
    space = sp.base

    def polar_matches_sampling():
        cases = [AffineSet.from_anchor_basis(space, [0, 0], [[1], [1]]),
                 AffineSet.from_anchor_basis(space, [0.3, -0.2], [[1], [0.5]]),
                 AffineSet.from_anchor_basis(space, [0, 0], [[1], [0]]),
                 AffineSet.from_anchor_basis(space, [0.1, 0.1], [])]
        for aset in cases:
            pi = affine_pi(aset)
            samples = aset.sample(3.0, 60, seed=1)
            for p in gen.random_probes(rng, space.n, 250):
                exact = pi.contains(p)
                sampled = bool(pairwise_q(space, p[None, :], samples).min() >= -1e-9)
                # the sampled stand-in can only over-accept (finite net)
                if exact and not sampled:
                    return False, "closed form accepted a point the net rejects"
                if not exact and sampled:
                    res = min_q_over_affine(space.S, p - aset.x0, aset.V)
                    if res.finite and res.value >= -1e-6:
                        continue  # borderline
                    continue  # net resolution artifact, expected
        return True

    def maximal_rejects_outsiders():
        aset = AffineSet.from_anchor_basis(space, [0, 0], [[1], [1]])
        assert affine_is_maximal(aset).ok
        pi = affine_pi(aset)
        count = 0
        for p in gen.random_probes(rng, space.n, 1000):
            if aset.contains(p):
                continue
            count += 1
            if pi.contains(p):
                return False, f"polar accepted outsider {p}"
        return True, f"{count} outsiders rejected"

    def convex_affinity_falsifier():
        ray = lambda x: abs(x[0] - x[1]) <= 1e-9 and x[0] >= -1e-9
        probes = [[t, t] for t in np.linspace(0, 2, 9)]
        v1 = maximal_convex_affinity_falsifier(space, ray, [0, 0], probes)
        ball = lambda x: float(np.linalg.norm(x)) <= 1.0 + 1e-9
        grid = [[a, c] for a in np.linspace(-1, 1, 7) for c in np.linspace(-1, 1, 7)]
        v2 = maximal_convex_affinity_falsifier(space, ball, [0, 0], grid)
        line = lambda x: abs(x[0] - x[1]) <= 1e-9
        v3 = maximal_convex_affinity_falsifier(space, line, [0, 0],
                                               [[t, t] for t in np.linspace(-2, 2, 9)])
        ok = v1.status is Status.FAILS and v2.status is Status.FAILS and v3.ok
        return ok, f"ray={v1.status.value} ball={v2.status.value} line={v3.status.value}"

    b.check("polar_closed_form_vs_sampling", polar_matches_sampling)
    b.check("maximal_polar_rejects_outsiders", maximal_rejects_outsiders)
    b.check("convex_affinity_falsifier", convex_affinity_falsifier)
    return b.results


def suite_maximality(seed: int = 0) -> list[CheckResult]:
    b = _Battery("maximality")
    rng = np.random.default_rng(seed)
    sp = make_monotone_ssdb(1)
    space = sp.base
    box = BoxGrid([-3, -3], [3, 3], 0.05)

    def trichotomy():
        idg = AffineSet.from_anchor_basis(space, [0, 0], [[1], [1]])
        r1 = premax_certify(idg, box)
        hz = AffineSet.from_anchor_basis(space, [0, 0], [[1], [0]])
        r2 = premax_certify(hz, box)
        origin = PointSet.from_points(space, [[0, 0]])
        r3 = premax_certify(origin, BoxGrid([-2, -2], [2, 2], 0.1))
        ok = (r1.classification is PremaxClass.PREMAXIMAL_VIA_202
              and r2.classification is PremaxClass.PREMAXIMAL_VIA_AFFINE_PI
              and r2.dom_phi_equals_set
              and r3.classification is PremaxClass.NOT_PREMAXIMAL)
        return ok, f"{r1.classification.value}/{r2.classification.value}/{r3.classification.value}"

    def certified_202_equality_set():
        idg = AffineSet.from_anchor_basis(space, [0, 0], [[1], [1]])
        rep = premax_certify(idg, box)
        if rep.classification is not PremaxClass.PREMAXIMAL_VIA_202:
            return False, "identity graph lost its certificate"
        for t in np.linspace(-2, 2, 21):
            if not rep.superset_member(np.array([t, t])):
                return False, "graph point rejected by the reported superset"
            if abs(phi_affine_eval(idg, [t, t]) - space.q([t, t])) > 1e-8:
                return False, "phi and q split on the reported superset"
        if rep.superset_member(np.array([0.0, 1.0])):
            return False, "off-graph point accepted by the reported superset"
        return True

    def premaximal_reports_have_positive_polars():
        idg = AffineSet.from_anchor_basis(space, [0, 0], [[1], [1]])
        hz = AffineSet.from_anchor_basis(space, [0, 0], [[1], [0]])
        for aset in (idg, hz):
            rep = premax_certify(aset, box)
            if rep.classification.value.startswith("PREMAXIMAL") \
                    and rep.pi_positive.status is Status.FAILS:
                return False, "premaximal classification with a violating polar pair"
        return True

    def continuum_scaling_identity():
        origin = PointSet.from_points(space, [[0, 0]])
        fam = extension_continuum(origin, [1, 0], [0, 1], 101)
        return fam.pairwise_identity_error <= 1e-12, \
            f"identity error {fam.pairwise_identity_error:.2e}"

    def third_polar_nets():
        for _ in range(6):
            A = gen.random_monotone_pointset(rng, 1, int(rng.integers(1, 6)))
            probes = BoxGrid([-2, -2], [2, 2], 0.2).mesh()
            if third_polar_check(A, probes).status is Status.FAILS:
                return False, "triple polar identity falsified"
        return True

    def ni_matches_202():
        nb = BoxGrid([-2, -2], [2, 2], 0.1)
        for _ in range(8):
            A = gen.random_monotone_pointset(rng, 1, int(rng.integers(1, 7)))
            v = ni_type_check(sp, A, nb)
            phi = phi_build(PointSet.from_points(space, A.points[:, [1, 0]]))
            res = grid_multistart_max(lambda x: space.q(x) - phi.eval(x), nb,
                                      f_batch=lambda xs: space.q_batch(xs) - phi.eval_batch(xs))
            cond202_holds = res.value <= 1e-9
            if v.ok != cond202_holds:
                return False, "NI and the global inequality disagree"
        return True

    b.check("premaximality_trichotomy", trichotomy)
    b.check("certified_202_reports_equality_set", certified_202_equality_set)
    b.check("premaximal_polars_q_positive", premaximal_reports_have_positive_polars)
    b.check("continuum_scaling_identity", continuum_scaling_identity)
    b.check("third_polar_nets", third_polar_nets)
    b.check("ni_matches_202", ni_matches_202)
    return b.results


def suite_minimal(seed: int = 0) -> list[CheckResult]:
    b = _Battery("minimal")
    rng = np.random.default_rng(seed)

    def fundamental_inequality():
        for _ in range(400):
            k = int(rng.integers(1, 4))
            A = gen.random_monotone_pointset(rng, k, int(rng.integers(1, 9)))
            f = phi_build(A)
            x = rng.uniform(-3, 3, A.space.n)
            y = rng.uniform(-3, 3, A.space.n)
            alpha = float(rng.uniform(0, 1))
            if fund_ineq_check(f, x, y, alpha).status is Status.FAILS:
                return False, "fundamental inequality violated"
        return True

    def envelope_sandwich():
        # negative-definite pairing: phi of any finite set dominates q
        # globally and exactly, so certification at full tolerance is honest
        from qpos.core import SsdSpace, PointSet
        box = BoxGrid([-3, -3], [3, 3], 0.1)
        space = SsdSpace.from_matrix(-np.eye(2))
        for _ in range(4):
            pts = rng.uniform(-2, 2, size=(int(rng.integers(2, 7)), 2))
            try:
                A = PointSet.from_points(space, pts)
            except ValueError:
                continue
            f = phi_build(A)
            if not certify_geq_q(f, box).ok:
                return False, "phi lost f >= q in the negative-definite model"
            x = pts.mean(axis=0)
            e = EnvelopeQuery.build(f, x)
            probes = gen.random_probes(rng, 2, 150, radius=2.5)
            hv = envelope_eval_batch(e, probes)
            fv = f.eval_batch(probes)
            qv = space.q_batch(probes)
            if float((hv - fv).max()) > 1e-9:
                return False, "envelope exceeded f"
            if float((qv - hv).max()) > 1e-8:
                return False, "envelope dipped below q"
            hx = envelope_eval_batch(e, x[None, :])[0]
            if hx > e.cap + 1e-9:
                return False, "envelope exceeded its spike cap"
        return True

    def convmin_identity_graph():
        from qpos.envelopes import convmin_check
        sp = make_monotone_ssdb(1)
        samples = gen.identity_graph_samples(sp.base, 1025, -3, 3)
        f = phi_build(samples)
        tau = (6.0 / 1024 / 2) ** 2
        box = BoxGrid([-3, -3], [3, 3], 0.25)
        probes = gen.random_probes(rng, 2, 40, radius=2.0)
        v = convmin_check(f, probes, box, tol=2.0 * tau, cert_tol=1.2 * tau)
        return v.ok, f"min slack {v.meta.get('min_slack')}"

    b.check("fundamental_inequality_random", fundamental_inequality)
    b.check("envelope_sandwich_and_cap", envelope_sandwich)
    b.check("convmin_identity_graph", convmin_identity_graph)
    return b.results


def suite_ssdb(seed: int = 0) -> list[CheckResult]:
    b = _Battery("ssdb")
    rng = np.random.default_rng(seed)

    def isometry_residuals():
        worst = 0.0
        for k in range(1, 6):
            sp = make_monotone_ssdb(k)
            worst = max(worst, sp.isometry_residual)
            for x in rng.uniform(-2, 2, size=(200, 2 * k)):
                lhs = float(np.linalg.norm(sp.base.S @ x))
                rhs = float(np.linalg.norm(x))
                worst = max(worst, abs(lhs - rhs))
        return worst < 1e-10, f"worst residual {worst:.2e}"

    def conjugate_refinement():
        sp = make_monotone_ssdb(1)
        probes = rng.uniform(-0.8, 0.8, size=(12, 2))
        prev = None
        for level in (2, 3, 4):
            centers = tangent_refinement_centers(sp, radius=2.0, level=level)
            f = g0_tangent_fn(sp, centers)
            vals = []
            for p in probes:
                cq = conj_eval(f, p)
                if not cq.finite:
                    return False, "tangent conjugate infeasible inside its grid"
                vals.append(cq.value)
            vals = np.array(vals)
            g0s = sp.g0_batch(probes)
            if float((g0s - vals).max()) > 1e-8:
                return False, "conjugate dipped below g0"
            if prev is not None and float((vals - prev).max()) > 1e-8:
                return False, "refinement failed to decrease the conjugate"
            prev = vals
        return float((prev - sp.g0_batch(probes)).max()) < 0.2, "converging from above"

    def decomposition():
        sp = make_monotone_ssdb(1)
        aset = AffineSet.from_anchor_basis(sp.base, [0, 0], [[1], [1]])
        for x in rng.uniform(-3, 3, size=(200, 2)):
            a, c = decompose_sum(sp, aset, x)
            if float(np.abs(a + c - x).max()) > 1e-10:
                return False, "summands do not reproduce x"
            closed_a = np.array([(x[0] + x[1]) / 2, (x[0] + x[1]) / 2])
            if float(np.abs(a - closed_a).max()) > 1e-8:
                return False, "closed-form summand mismatch"
        return True

    def canonical_sets_maximal():
        for k in (1, 2):
            sp = make_monotone_ssdb(k)
            plus = canonical_pq_basis(sp, "+")
            aset = AffineSet.from_anchor_basis(sp.base, np.zeros(2 * k), plus)
            if not affine_is_maximal(aset).ok:
                return False, "canonical q-positive subspace not maximal"
            samples = aset.sample(2.0, 40, seed=3)
            if not is_q_positive(PointSet.from_points(sp.base, samples)).ok:
                return False, "canonical subspace samples not q-positive"
        return True

    b.check("isometry_residuals", isometry_residuals)
    b.check("g0_conjugate_refinement", conjugate_refinement)
    b.check("sum_decomposition", decomposition)
    b.check("canonical_sets_maximal", canonical_sets_maximal)
    return b.results


def suite_lipschitz(seed: int = 0) -> list[CheckResult]:
    b = _Battery("lipschitz")
    rng = np.random.default_rng(seed)

    def equivalence():
        for trial in range(150):
            K = float(rng.uniform(0.5, 2.5))
            lspace = LipschitzSpace.create(K, int(rng.integers(1, 3)), int(rng.integers(1, 3)))
            g = gen.random_lipschitz_graph(rng, lspace, int(rng.integers(1, 8)),
                                           satisfy=bool(trial % 2))
            lv = lipschitz_check(g)
            qv = is_q_positive(g.induced_pointset())
            if lv.ok != qv.ok:
                return False, "Lipschitz bound and q-positivity split"
        return True

    def closed_form_phi():
        for _ in range(30):
            lspace = LipschitzSpace.create(float(rng.uniform(0.5, 2.0)), 2, 1)
            g = gen.random_lipschitz_graph(rng, lspace, 5, satisfy=True)
            phi = phi_build(g.induced_pointset())
            for _ in range(30):
                x1 = rng.uniform(-2, 2, 2)
                x2 = rng.uniform(-2, 2, 1)
                direct = phi_graph_eval(g, x1, x2)
                generic = phi.eval(np.concatenate([x1, x2]))
                if abs(direct - generic) > 1e-10 * max(1.0, abs(direct)):
                    return False, "closed form and generic phi disagree"
        return True

    def mcshane_properties():
        for _ in range(30):
            lspace = LipschitzSpace.create(float(rng.uniform(0.5, 2.0)), 2, 1)
            g = gen.random_lipschitz_graph(rng, lspace, 6, satisfy=True)
            qs = rng.uniform(-3, 3, size=(25, 2))
            vals = np.array([mcshane_bracket(g, p) for p in qs])
            K = lspace.K
            for arr in (vals[:, 0], vals[:, 1]):
                for i in range(len(qs)):
                    for j in range(i + 1, len(qs)):
                        lhs = abs(arr[i] - arr[j])
                        rhs = K * float(np.linalg.norm(qs[i] - qs[j]))
                        if lhs > rhs + 1e-9:
                            return False, "extension lost the Lipschitz bound"
            if float((vals[:, 0] - vals[:, 1]).max()) > 1e-12:
                return False, "brackets out of order"
            for d, v in zip(g.domain, g.values[:, 0]):
                lo, hi = mcshane_bracket(g, d)
                if abs(lo - v) > 1e-9 or abs(hi - v) > 1e-9:
                    return False, "extension failed to restore the data"
        return True

    def topology_nonsingular():
        for K in (0.5, 1.0, 2.0):
            lspace = LipschitzSpace.create(K, 2, 2)
            sv = singular_values(lspace.space.S)
            if float(sv[-1]) < min(K * K, 1.0) - 1e-12:
                return False, "pairing matrix nearly singular"
            if lspace.space.degenerate:
                return False, "pairing flagged degenerate"
        return True

    b.check("lipschitz_iff_q_positive", equivalence)
    b.check("phi_closed_form_matches_generic", closed_form_phi)
    b.check("mcshane_extension_properties", mcshane_properties)
    b.check("pairing_topology_nonsingular", topology_nonsingular)
    return b.results


def suite_hilbert(seed: int = 0) -> list[CheckResult]:
    b = _Battery("hilbert")
    rng = np.random.default_rng(seed)

    def phi_vs_generic():
        sp = make_hilbert_ssdb(2)
        for _ in range(10):
            pts = rng.uniform(-2, 2, size=(int(rng.integers(1, 7)), 2))
            desc = ClosedSetDescriptor.finite(pts)
            try:
                A = PointSet.from_points(sp.base, pts)
            except ValueError:
                continue
            phi = phi_build(A)
            for p in rng.uniform(-3, 3, size=(30, 2)):
                if abs(phi_closed_eval(desc, p) - phi.eval(p)) > 1e-10 * max(1.0, abs(phi.eval(p))):
                    return False, "distance form and max-affine phi disagree"
        return True

    def conjugate_lower_bound():
        desc = ClosedSetDescriptor.finite([[-1.0], [1.0]])
        for p in rng.uniform(-2, 2, size=(12, 1)):
            val = phi_conj_closed_eval(desc, p)
            if val < 0.5 * float(p @ p) - 1e-9:
                return False, "conjugate below half the squared norm"
        return True

    def always_q_positive():
        sp = make_hilbert_ssdb(2)
        for _ in range(10):
            pts = rng.uniform(-2, 2, size=(5, 2))
            try:
                A = PointSet.from_points(sp.base, pts)
            except ValueError:
                continue
            if not is_q_positive(A).ok:
                return False, "a set in the nonnegative model failed q-positivity"
        return True

    def closed_representation_membership():
        descs = [ClosedSetDescriptor.finite([[-1.0], [1.0]]),
                 ClosedSetDescriptor.from_segments([[[0.0], [1.0]]]),
                 ClosedSetDescriptor.axis_cross()]
        for desc in descs:
            members = ([[-1.0], [1.0]] if desc.kind.value == "FINITE_POINTS"
                       else [[0.0], [0.5], [1.0]] if desc.dim == 1
                       else [[0.0, 1.0], [1.0, 0.0], [0.0, 0.0]])
            for x in members:
                x = np.atleast_1d(np.asarray(x, dtype=float))
                res = closed_repr_h_eval(desc, x)
                if res.boundary_attained or abs(res.value - 0.5 * float(x @ x)) > 1e-6:
                    return False, "member failed the representation equality"
            off = [[0.4]] if desc.dim == 1 else [[1.0, 1.0]]
            for x in off:
                x = np.atleast_1d(np.asarray(x, dtype=float))
                if desc.contains(x):
                    continue
                res = closed_repr_h_eval(desc, x)
                excluded = res.boundary_attained or res.value > 0.5 * float(x @ x) + 1e-6
                if not excluded:
                    return False, "non-member passed the representation equality"
        return True

    def cross_example():
        desc = ClosedSetDescriptor.axis_cross()
        box = default_box(desc, [2.0, 2.0], pitch=0.04)
        engine = SupEngine(desc, box)
        for x1 in np.linspace(-2, 2, 21):
            for x2 in np.linspace(-2, 2, 21):
                x = np.array([x1, x2])
                member = min(abs(x1), abs(x2)) <= 1e-9
                verdict = g_phi_closed_member(desc, x, engine=engine)
                if verdict.ok != member:
                    return False, f"misclassified {x}"
        return True

    b.check("phi_distance_form_vs_generic", phi_vs_generic)
    b.check("conjugate_lower_bound", conjugate_lower_bound)
    b.check("nonnegative_q_everywhere", always_q_positive)
    b.check("closed_representation_membership", closed_representation_membership)
    b.check("cross_example_g_set", cross_example)
    return b.results


SUITES = {
    "core": suite_core,
    "numerics": suite_numerics,
    "fitzpatrick": suite_fitzpatrick,
    "affine": suite_affine,
    "maximality": suite_maximality,
    "minimal": suite_minimal,
    "ssdb": suite_ssdb,
    "lipschitz": suite_lipschitz,
    "hilbert": suite_hilbert,
}


def run_suite_checks(name: str, seed: int = 0) -> list[CheckResult]:
    if name == "all":
        out: list[CheckResult] = []
        for key in SUITES:
            out.extend(SUITES[key](seed))
        return out
    if name not in SUITES:
        raise KeyError(f"unknown suite '{name}'")
    return SUITES[name](seed)
