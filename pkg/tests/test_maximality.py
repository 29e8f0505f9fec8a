import math

import numpy as np
import pytest

from qpos.affine import AffineSet
from qpos.core import PointSet, SsdSpace
from qpos.errors import PreconditionError
from qpos.maximality import (PremaxClass, extension_continuum, ni_type_check, pairwise_q,
                             phi_affine_eval, premax_certify, third_polar_check)
from qpos.numerics import BoxGrid
from qpos.ssdb import make_hilbert_ssdb, make_monotone_ssdb
from qpos.gen import random_monotone_pointset
from qpos.verdicts import Status

SP = make_monotone_ssdb(1)
MONO = SP.base
IDG = AffineSet.from_anchor_basis(MONO, [0, 0], [[1], [1]])
HLINE = AffineSet.from_anchor_basis(MONO, [0, 0], [[1], [0]])
ORIGIN = PointSet.from_points(MONO, [[0, 0]])
BOX = BoxGrid([-3, -3], [3, 3], 0.05)


class TestPhiAffine:
    def test_identity_graph_closed_form(self):
        assert phi_affine_eval(IDG, [1, 1]) == pytest.approx(1.0)
        for x in ([0.5, -1.0], [2.0, 0.3]):
            expect = (x[0] + x[1]) ** 2 / 4.0
            assert phi_affine_eval(IDG, x) == pytest.approx(expect, abs=1e-10)

    def test_horizontal_line_domain(self):
        assert math.isinf(phi_affine_eval(HLINE, [0, 1]))
        assert phi_affine_eval(HLINE, [3.2, 0.0]) == pytest.approx(0.0, abs=1e-12)

    def test_singleton_one_piece(self):
        single = AffineSet.from_anchor_basis(MONO, [1.0, 2.0], [])
        x = np.array([0.3, -0.4])
        expect = MONO.pairing(x, [1, 2]) - MONO.q([1, 2])
        assert phi_affine_eval(single, x) == pytest.approx(expect)

    def test_precondition(self):
        anti = AffineSet.from_anchor_basis(MONO, [0, 0], [[1], [-1]])
        with pytest.raises(PreconditionError):
            phi_affine_eval(anti, [0, 0])


class TestPremaxTrichotomy:
    def test_identity_graph_via_202(self):
        rep = premax_certify(IDG, BOX)
        assert rep.classification is PremaxClass.PREMAXIMAL_VIA_202
        assert rep.condition202.ok
        assert rep.condition202.resolution is not None  # grid-certified, not proved
        assert rep.superset_member(np.array([1.7, 1.7]))
        assert not rep.superset_member(np.array([0.0, 1.0]))

    def test_horizontal_line_via_affine_polar(self):
        rep = premax_certify(HLINE, BOX)
        assert rep.classification is PremaxClass.PREMAXIMAL_VIA_AFFINE_PI
        assert rep.condition202.status is Status.UNDECIDED  # phi infinite off the line
        assert rep.dom_phi_equals_set
        sup = rep.superset_affine
        assert sup is not None and sup.dim == 1
        assert sup.contains([5.0, 0.0]) and not sup.contains([0.0, 0.5])

    def test_origin_not_premaximal(self):
        rep = premax_certify(ORIGIN, BoxGrid([-2, -2], [2, 2], 0.1))
        assert rep.classification is PremaxClass.NOT_PREMAXIMAL
        assert rep.condition202.status is Status.FAILS
        # witness of the failed inequality: q - phi = 4 at the corner
        w = rep.condition202.witness
        assert MONO.q(w) - 0.0 > 1e-9
        b1, b2 = rep.pi_positive.witness
        assert MONO.q(b1 - b2) < -1e-9      # the polar pair re-verifies

    def test_report_serializes(self):
        rep = premax_certify(IDG, BOX)
        doc = rep.to_json()
        assert doc["classification"] == "PREMAXIMAL_VIA_202"
        assert doc["condition202"]["status"] == "HOLDS"


class TestThirdPolar:
    def test_origin_grid(self):
        probes = BoxGrid([-2, -2], [2, 2], 0.1).mesh()
        assert third_polar_check(ORIGIN, probes).ok

    def test_two_point_set(self):
        A = PointSet.from_points(MONO, [[0, 0], [1, 1]])
        probes = BoxGrid([-2, -2], [2, 2], 0.2).mesh()
        assert third_polar_check(A, probes).ok

    def test_random_set_r4(self):
        rng = np.random.default_rng(23)
        A = random_monotone_pointset(rng, 2, 5)
        probes = rng.uniform(-2, 2, size=(400, 4))
        v = third_polar_check(A, probes)
        assert v.status in (Status.HOLDS, Status.UNDECIDED)


class TestExtensionContinuum:
    def test_classic_family(self):
        fam = extension_continuum(ORIGIN, [1, 0], [0, 1], 101)
        assert fam.q_x1_x2 == pytest.approx(-1.0)
        # x_lambda = (lambda, 1 - lambda) with q = lambda (1 - lambda) >= 0
        assert np.allclose(fam.points[:, 0], fam.lambdas)
        assert fam.min_polar_margin >= -1e-9
        assert fam.pairwise_identity_error <= 1e-12

    def test_endpoints_reproduced(self):
        fam = extension_continuum(ORIGIN, [1, 0], [0, 1], 11)
        assert np.allclose(fam.points[0], [0, 1])
        assert np.allclose(fam.points[-1], [1, 0])

    def test_coincident_endpoints_rejected(self):
        with pytest.raises(PreconditionError):
            extension_continuum(ORIGIN, [1, 0], [1, 0], 5)

    def test_polar_membership_required(self):
        with pytest.raises(PreconditionError):
            extension_continuum(ORIGIN, [1, -1], [0, 1], 5)


class TestNiType:
    def test_origin_fails_at_unit_probe(self):
        v = ni_type_check(SP, ORIGIN, BoxGrid([-2, -2], [2, 2], 0.25))
        assert v.status is Status.FAILS
        y = v.witness
        # the single-point infimum at the witness is positive
        assert pairwise_q(MONO, y[None, :], ORIGIN.points).min() > 1e-9

    def test_no_box_is_undecided(self):
        assert ni_type_check(SP, ORIGIN, None).status is Status.UNDECIDED

    def test_wrong_space_kind_rejected(self):
        hil = make_hilbert_ssdb(2)
        A = PointSet.from_points(hil.base, [[0, 0]])
        with pytest.raises(PreconditionError):
            ni_type_check(hil, A, BoxGrid([-1, -1], [1, 1], 0.5))

    def test_agreement_with_202_on_random_sets(self):
        rng = np.random.default_rng(31)
        box = BoxGrid([-2, -2], [2, 2], 0.1)
        from qpos.fitzpatrick import phi_build
        from qpos.numerics import grid_multistart_max
        for _ in range(8):
            A = random_monotone_pointset(rng, 1, int(rng.integers(1, 7)))
            v = ni_type_check(SP, A, box)
            swapped = PointSet.from_points(MONO, A.points[:, [1, 0]])
            phi = phi_build(swapped)
            res = grid_multistart_max(lambda x: MONO.q(x) - phi.eval(x), box,
                                      f_batch=lambda xs: MONO.q_batch(xs) - phi.eval_batch(xs))
            assert v.ok == (res.value <= 1e-9)
