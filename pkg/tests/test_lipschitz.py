import numpy as np
import pytest

from qpos.core import is_q_positive
from qpos.errors import PreconditionError
from qpos.fitzpatrick import phi_build
from qpos.gen import random_lipschitz_graph
from qpos.lipschitz import (GraphSet, LipschitzSpace, closed_domain_repr_probe,
                            identity_example_check, lipschitz_check, mcshane_bracket,
                            mcshane_extend_scalar, phi_graph_eval)
from qpos.numerics import singular_values
from qpos.verdicts import Status

LS1 = LipschitzSpace.create(1.0, 1, 1)
IDENT = GraphSet.from_data(LS1, [[0.0], [1.0]], [[0.0], [1.0]])


class TestSpace:
    def test_pairing_matrix_structure(self):
        ls = LipschitzSpace.create(2.0, 1, 1)
        assert np.allclose(ls.space.S, np.diag([4.0, -1.0]))
        assert ls.space.q([1, 3]) == pytest.approx(-2.5)

    def test_ssdb_flag_only_at_one(self):
        assert LS1.is_ssdb
        assert not LipschitzSpace.create(2.0, 1, 1).is_ssdb

    def test_never_degenerate(self):
        for K in (0.5, 1.0, 3.0):
            ls = LipschitzSpace.create(K, 2, 2)
            assert not ls.space.degenerate
            assert float(singular_values(ls.space.S)[-1]) >= min(K * K, 1.0) - 1e-12


class TestLipschitzCheck:
    def test_examples(self):
        assert lipschitz_check(IDENT).ok
        steep = GraphSet.from_data(LS1, [[0.0], [1.0]], [[0.0], [2.0]])
        assert lipschitz_check(steep).status is Status.FAILS
        wide = GraphSet.from_data(LipschitzSpace.create(2.0, 1, 1),
                                  [[0.0], [1.0]], [[0.0], [2.0]])
        assert lipschitz_check(wide).ok

    def test_equivalence_with_q_positivity(self):
        rng = np.random.default_rng(11)
        for trial in range(60):
            ls = LipschitzSpace.create(float(rng.uniform(0.5, 2.5)),
                                       int(rng.integers(1, 3)), int(rng.integers(1, 3)))
            g = random_lipschitz_graph(rng, ls, int(rng.integers(1, 7)), satisfy=bool(trial % 2))
            assert lipschitz_check(g).ok == is_q_positive(g.induced_pointset()).ok

    def test_duplicate_domain_rejected(self):
        with pytest.raises(ValueError):
            GraphSet.from_data(LS1, [[0.0], [0.0]], [[0.0], [0.1]])


class TestPhiGraph:
    def test_single_point_graph_vanishes(self):
        g = GraphSet.from_data(LS1, [[0.0]], [[0.0]])
        for x1, x2 in ([0.3], [0.9]), ([1.5], [-2.0]):
            assert phi_graph_eval(g, x1, x2) == pytest.approx(0.0, abs=1e-12)

    def test_identity_value_by_hand(self):
        assert phi_graph_eval(IDENT, [0.0], [1.0]) == pytest.approx(0.0)

    def test_matches_generic_phi(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            ls = LipschitzSpace.create(float(rng.uniform(0.5, 2.0)), 2, 2)
            g = random_lipschitz_graph(rng, ls, 5, satisfy=True)
            phi = phi_build(g.induced_pointset())
            for _ in range(30):
                x1 = rng.uniform(-2, 2, 2)
                x2 = rng.uniform(-2, 2, 2)
                direct = phi_graph_eval(g, x1, x2)
                generic = phi.eval(np.concatenate([x1, x2]))
                assert direct == pytest.approx(generic, abs=1e-10 * max(1.0, abs(generic)))


class TestMcShane:
    def test_examples(self):
        assert mcshane_extend_scalar(IDENT, [0.5]) == pytest.approx(0.5)
        assert mcshane_extend_scalar(IDENT, [2.0]) == pytest.approx(2.0)
        assert mcshane_extend_scalar(IDENT, [1.0]) == pytest.approx(1.0)  # domain point

    def test_bracket_order_and_restriction(self):
        lo, hi = mcshane_bracket(IDENT, [2.0])
        assert lo == pytest.approx(0.0) and hi == pytest.approx(2.0)
        for d, v in zip(IDENT.domain, IDENT.values[:, 0]):
            blo, bhi = mcshane_bracket(IDENT, d)
            assert blo == pytest.approx(v) and bhi == pytest.approx(v)

    def test_extension_is_lipschitz(self):
        rng = np.random.default_rng(17)
        ls = LipschitzSpace.create(1.5, 2, 1)
        g = random_lipschitz_graph(rng, ls, 6, satisfy=True)
        qs = rng.uniform(-3, 3, size=(30, 2))
        vals = np.array([mcshane_extend_scalar(g, p) for p in qs])
        for i in range(len(qs)):
            for j in range(i + 1, len(qs)):
                assert abs(vals[i] - vals[j]) <= 1.5 * np.linalg.norm(qs[i] - qs[j]) + 1e-9

    def test_vector_range_rejected(self):
        ls = LipschitzSpace.create(1.0, 1, 2)
        g = GraphSet.from_data(ls, [[0.0]], [[0.0, 0.0]])
        with pytest.raises(PreconditionError):
            mcshane_extend_scalar(g, [0.5])


class TestIdentityExample:
    def test_grid_and_off_probes(self):
        v = identity_example_check(np.linspace(0, 1, 21),
                                   [[2.0, 2.0], [-0.5, -0.5], [0.5, 0.6]])
        assert v.ok

    def test_out_of_range_grid_rejected(self):
        with pytest.raises(ValueError):
            identity_example_check([1.5], [[2.0, 2.0]])


class TestClosedDomainProbe:
    def test_separating_construction_by_hand(self):
        g = GraphSet.from_data(LipschitzSpace.create(0.5, 1, 1), [[0.0], [2.0]], [[0.0], [1.0]])
        v = closed_domain_repr_probe(g, 1.0, [1.0])
        assert v.ok
        base, shifted = v.meta["values"]
        assert base == pytest.approx(0.5)
        assert v.meta["radius"] == pytest.approx(0.5)
        assert abs(shifted - base) == pytest.approx(0.5)

    def test_domain_point_rejected(self):
        g = GraphSet.from_data(LipschitzSpace.create(0.5, 1, 1), [[0.0], [2.0]], [[0.0], [1.0]])
        with pytest.raises(PreconditionError):
            closed_domain_repr_probe(g, 1.0, [0.0])

    def test_equal_moduli_rejected(self):
        g = GraphSet.from_data(LipschitzSpace.create(0.5, 1, 1), [[0.0], [2.0]], [[0.0], [1.0]])
        with pytest.raises(PreconditionError):
            closed_domain_repr_probe(g, 0.5, [1.0])
