"""Workbench for q-positive sets in finite-dimensional symmetrically self-dual spaces.

A symmetrically self-dual (SSD) space is a real vector space with a symmetric
bilinear form, encoded here by a symmetric matrix S; q(b) = 0.5 * b'Sb is the
induced (generally indefinite) quadratic form.  The package evaluates the
Fitzpatrick-type convex calculus attached to q-positive sets, certifies
maximality and premaximality, constructs extension families and sum
decompositions, and instantiates Lipschitz-graph and closed-set models with
property-test verification at desk scale.
"""

from qpos.verdicts import Status, Verdict
from qpos.core import SsdSpace, PointSet, pairing, q_value, is_q_positive, pi_member, conv_w_hull_member
from qpos.numerics import SimplexLp, BoxGrid, lp_min, psd_on_subspace, min_q_over_affine, grid_multistart_max
from qpos.fitzpatrick import MaxAffineFn, ConjugateQuery, phi_build, conj_eval, pq_member, repr_hull_member, g_phi_member, q_subdiff_check
from qpos.affine import AffineSet, PiDescription, affine_is_q_positive, affine_pi, affine_is_maximal
from qpos.maximality import PremaxReport, ExtensionFamily, premax_certify, phi_affine_eval, third_polar_check, extension_continuum, ni_type_check
from qpos.ssdb import SsdbSpace, make_monotone_ssdb, make_hilbert_ssdb, pq_g0_member, decompose_sum
from qpos.lipschitz import LipschitzSpace, GraphSet, lipschitz_check, phi_graph_eval, mcshane_extend_scalar
from qpos.hilbert import ClosedSetDescriptor, phi_closed_eval, phi_conj_closed_eval, g_phi_closed_member

__version__ = "0.1.0"
