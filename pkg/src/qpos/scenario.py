"""Scenario loading, validation, dispatch, and report emission.

A scenario is one JSON object: a space (by kind or explicit matrix), named
sets (points / affine / graph / descriptor, with CSV payloads allowed for
point and graph data), a query list (operation + arguments + optional
expectation), a grid policy, a seed, and a tolerance.  Reports echo every
query with its verdict or value, witness, resolution and wall time, plus a
summary; identical scenario and seed reproduce the report byte for byte
except for the timing fields.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from qpos import __version__ as _version
from qpos.affine import AffineSet, affine_is_maximal, affine_is_q_positive, affine_pi
from qpos.core import PointSet, SsdSpace, conv_w_hull_member, is_q_positive, pairing, pi_member, q_value
from qpos.envelopes import EnvelopeQuery, convmin_check, envelope_eval, fund_ineq_check, minimal_selfconj_probe
from qpos.errors import PreconditionError, QposError
from qpos.fitzpatrick import check_ineq_on_hull, conj_eval, g_phi_member, phi_build, pq_member, q_subdiff_check, repr_hull_member
from qpos.hilbert import ClosedSetDescriptor, closed_repr_h_eval, g_phi_closed_member, line_corollary_check, midpoint_ball_check, phi_closed_eval, phi_conj_closed_eval
from qpos.lipschitz import GraphSet, LipschitzSpace, closed_domain_repr_probe, identity_example_check, lipschitz_check, mcshane_bracket, mcshane_extend_scalar, phi_graph_eval
from qpos.maximality import extension_continuum, ni_type_check, phi_affine_eval, premax_certify, third_polar_check
from qpos.numerics import BoxGrid, SimplexLp, lp_min, min_q_over_affine, psd_on_subspace
from qpos.ssdb import NegPolarSet, SsdbSpace, decompose_sum, make_hilbert_ssdb, make_monotone_ssdb, make_ssdb, maximality_via_decomposition, pq_g0_member
from qpos.verdicts import Verdict, verdict_to_json

SCHEMA_VERSION = 1


class ScenarioError(QposError):
    """Scenario file failed validation."""


@dataclass
class RunContext:
    space: SsdSpace | None
    ssdb: SsdbSpace | None
    lspace: LipschitzSpace | None
    sets: dict
    grid: BoxGrid | None
    tolerance: float
    seed: int

    def require_space(self) -> SsdSpace:
        if self.space is None:
            raise ScenarioError("this operation needs a space")
        return self.space

    def require_ssdb(self) -> SsdbSpace:
        if self.ssdb is None:
            raise ScenarioError("this operation needs an SSDB space (monotone/hilbert)")
        return self.ssdb

    def require_grid(self) -> BoxGrid:
        if self.grid is None:
            raise ScenarioError("this operation needs a grid policy")
        return self.grid

    def get(self, name, kind):
        if not isinstance(name, str) or name not in self.sets:
            raise ScenarioError(f"unknown set reference {name!r}")
        obj = self.sets[name]
        if not isinstance(obj, kind):
            raise ScenarioError(f"set {name!r} is not of the required kind")
        return obj


def _vec(x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise ScenarioError("expected a flat number list")
    return arr


def _mat(x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2:
        raise ScenarioError("expected a matrix (list of rows)")
    return arr


def _load_csv(base: Path, rel: str) -> np.ndarray:
    path = (base / rel).resolve()
    data = np.loadtxt(path, delimiter=",", ndmin=2)
    return data


def _build_space(spec: dict):
    kind = spec.get("kind")
    if kind == "monotone":
        sp = make_monotone_ssdb(int(spec["k"]))
        return sp.base, sp, None
    if kind == "hilbert":
        sp = make_hilbert_ssdb(int(spec["k"]))
        return sp.base, sp, None
    if kind == "lipschitz":
        ls = LipschitzSpace.create(float(spec["K"]), int(spec["n1"]), int(spec["n2"]))
        return ls.space, None, ls
    if kind == "explicit":
        base = SsdSpace.from_matrix(_mat(spec["S"]))
        ssdb = None
        if "G" in spec:
            ssdb = make_ssdb(_mat(spec["S"]), _mat(spec["G"]), kind="custom")
        return base, ssdb, None
    raise ScenarioError(f"unknown space kind {kind!r}")


def _build_set(ctx: RunContext, spec: dict, base: Path):
    kind = spec.get("type")
    if kind == "points":
        pts = _load_csv(base, spec["csv"]) if "csv" in spec else _mat(spec["points"])
        return PointSet.from_points(ctx.require_space(), pts)
    if kind == "affine":
        basis = spec.get("basis", [])
        return AffineSet.from_anchor_basis(ctx.require_space(), _vec(spec["x0"]),
                                           np.asarray(basis, dtype=float))
    if kind == "graph":
        if ctx.lspace is None:
            raise ScenarioError("graph sets need a lipschitz space")
        if "csv" in spec:
            data = _load_csv(base, spec["csv"])
            n1 = ctx.lspace.n1
            return GraphSet.from_data(ctx.lspace, data[:, :n1], data[:, n1:])
        return GraphSet.from_data(ctx.lspace, _mat(spec["domain"]), _mat(spec["values"]))
    if kind == "descriptor":
        dkind = spec.get("kind")
        if dkind == "finite":
            return ClosedSetDescriptor.finite(_mat(spec["points"]))
        if dkind == "segments":
            return ClosedSetDescriptor.from_segments(np.asarray(spec["segments"], dtype=float))
        if dkind == "axis_cross":
            return ClosedSetDescriptor.axis_cross()
        raise ScenarioError(f"unknown descriptor kind {dkind!r}")
    raise ScenarioError(f"unknown set type {kind!r}")


def _verdict_result(v: Verdict) -> dict:
    out = verdict_to_json(v)
    return out


def _value_result(value: float, **extra) -> dict:
    if isinstance(value, float) and math.isinf(value):
        body = {"value": "inf" if value > 0 else "-inf"}
    else:
        body = {"value": float(value)}
    body.update(extra)
    return body


def _phi_for(ctx, name):
    return phi_build(ctx.get(name, PointSet))


# --- operation handlers: args are JSON values, set names resolve by string --

def _op_pairing(ctx, a):
    return _value_result(pairing(ctx.require_space(), _vec(a["b"]), _vec(a["c"])))


def _op_q_value(ctx, a):
    return _value_result(q_value(ctx.require_space(), _vec(a["b"])))


def _op_is_q_positive(ctx, a):
    return _verdict_result(is_q_positive(ctx.get(a["A"], PointSet), tol=ctx.tolerance))


def _op_pi_member(ctx, a):
    return _verdict_result(pi_member(ctx.get(a["A"], PointSet), _vec(a["b"]), tol=ctx.tolerance))


def _op_hull_member(ctx, a):
    return _verdict_result(conv_w_hull_member(ctx.get(a["A"], PointSet), _vec(a["b"])))


def _op_phi_eval(ctx, a):
    return _value_result(_phi_for(ctx, a["A"]).eval(_vec(a["b"])))


def _op_phi_conj_eval(ctx, a):
    cq = conj_eval(_phi_for(ctx, a["A"]), _vec(a["b"]))
    return _value_result(cq.value)


def _op_pq_member_phi(ctx, a):
    phi = _phi_for(ctx, a["A"])
    return _verdict_result(pq_member(phi, ctx.require_space(), _vec(a["b"]),
                                     tol=ctx.tolerance, f_geq_q=a.get("f_geq_q", "assumed")))


def _op_repr_hull_member(ctx, a):
    return _verdict_result(repr_hull_member(ctx.get(a["A"], PointSet), _vec(a["b"]), tol=ctx.tolerance))


def _op_g_phi_member(ctx, a):
    return _verdict_result(g_phi_member(ctx.get(a["A"], PointSet), _vec(a["b"]), tol=ctx.tolerance))


def _op_q_subdiff_check(ctx, a):
    phi = _phi_for(ctx, a["A"])
    return _verdict_result(q_subdiff_check(phi, _vec(a["a"]), _vec(a["b"]), tol=ctx.tolerance))


def _op_check_ineq_on_hull(ctx, a):
    return _verdict_result(check_ineq_on_hull(ctx.get(a["A"], PointSet),
                                              samples=int(a.get("samples", 400)),
                                              seed=ctx.seed, tol=ctx.tolerance))


def _op_affine_is_q_positive(ctx, a):
    return _verdict_result(affine_is_q_positive(ctx.get(a["L"], AffineSet), tol=ctx.tolerance))


def _op_affine_pi_member(ctx, a):
    pi = affine_pi(ctx.get(a["L"], AffineSet))
    b = _vec(a["b"])
    ok = pi.contains(b, tol=ctx.tolerance)
    v = Verdict.holds(residual=pi.residual(b)) if ok else \
        Verdict.fails(b, residual=pi.residual(b), linear_ok=pi.linear_ok(b))
    return _verdict_result(v)


def _op_affine_is_maximal(ctx, a):
    return _verdict_result(affine_is_maximal(ctx.get(a["L"], AffineSet), tol=ctx.tolerance))


def _op_phi_affine_eval(ctx, a):
    return _value_result(phi_affine_eval(ctx.get(a["L"], AffineSet), _vec(a["x"])))


def _op_premax_certify(ctx, a):
    name = a["P"]
    obj = ctx.sets.get(name)
    if not isinstance(obj, (PointSet, AffineSet)):
        raise ScenarioError("premaximality takes a point or affine set")
    rep = premax_certify(obj, ctx.require_grid(), tol=ctx.tolerance)
    return rep.to_json()


def _op_third_polar_check(ctx, a):
    probes = _mat(a["probes"]) if "probes" in a else ctx.require_grid().mesh()
    return _verdict_result(third_polar_check(ctx.get(a["A"], PointSet), probes, tol=ctx.tolerance))


def _op_extension_continuum(ctx, a):
    fam = extension_continuum(ctx.get(a["A"], PointSet), _vec(a["x1"]), _vec(a["x2"]),
                              int(a.get("count", 11)))
    return {"lambdas": fam.lambdas.tolist(),
            "q_x1_x2": fam.q_x1_x2,
            "pairwise_identity_error": fam.pairwise_identity_error,
            "min_polar_margin": fam.min_polar_margin}


def _op_ni_type_check(ctx, a):
    return _verdict_result(ni_type_check(ctx.require_ssdb(), ctx.get(a["A"], PointSet),
                                         ctx.grid, tol=ctx.tolerance))


def _op_fund_ineq_check(ctx, a):
    phi = _phi_for(ctx, a["A"])
    return _verdict_result(fund_ineq_check(phi, _vec(a["x"]), _vec(a["y"]),
                                           float(a["alpha"]), tol=ctx.tolerance))


def _op_envelope_eval(ctx, a):
    phi = _phi_for(ctx, a["A"])
    e = EnvelopeQuery.build(phi, _vec(a["x"]))
    return _value_result(envelope_eval(e, _vec(a["y"])), cap="inf" if math.isinf(e.cap) else e.cap)


def _op_minimal_selfconj_probe(ctx, a):
    return _verdict_result(minimal_selfconj_probe(ctx.get(a["M"], PointSet), _mat(a["probes"]),
                                                  claimed_maximal=bool(a.get("claimed_maximal", False))))


def _op_convmin_check(ctx, a):
    phi = _phi_for(ctx, a["A"])
    return _verdict_result(convmin_check(phi, _mat(a["probes"]), ctx.require_grid(),
                                         tol=float(a.get("tol", 1e-6)),
                                         cert_tol=a.get("cert_tol")))


def _op_pq_g0_member(ctx, a):
    return _verdict_result(pq_g0_member(ctx.require_ssdb(), _vec(a["b"]),
                                        a.get("sign", "+"), tol=ctx.tolerance))


def _op_decompose_sum(ctx, a):
    av, cv = decompose_sum(ctx.require_ssdb(), ctx.get(a["L"], AffineSet), _vec(a["x"]))
    return {"a": av.tolist(), "c": cv.tolist()}


def _op_maximality_via_decomposition(ctx, a):
    sp = ctx.require_ssdb()
    p = _vec(a["p"]) if "p" in a else None
    C = NegPolarSet.at(sp, p)
    return _verdict_result(maximality_via_decomposition(sp, ctx.get(a["A"], PointSet),
                                                        C, _mat(a["probes"])))


def _op_lipschitz_check(ctx, a):
    return _verdict_result(lipschitz_check(ctx.get(a["G"], GraphSet), tol=ctx.tolerance))


def _op_phi_graph_eval(ctx, a):
    return _value_result(phi_graph_eval(ctx.get(a["G"], GraphSet), _vec(a["x1"]), _vec(a["x2"])))


def _op_mcshane_extend_scalar(ctx, a):
    return _value_result(mcshane_extend_scalar(ctx.get(a["G"], GraphSet), _vec(a["query"])))


def _op_mcshane_bracket(ctx, a):
    lo, hi = mcshane_bracket(ctx.get(a["G"], GraphSet), _vec(a["query"]))
    return {"lower": lo, "upper": hi}


def _op_identity_example_check(ctx, a):
    return _verdict_result(identity_example_check(_vec(a["t_grid"]), _mat(a["off_probes"]),
                                                  tol=ctx.tolerance))


def _op_closed_domain_repr_probe(ctx, a):
    return _verdict_result(closed_domain_repr_probe(ctx.get(a["G"], GraphSet), float(a["K"]),
                                                    _vec(a["x1"]), count=int(a.get("count", 64)),
                                                    seed=ctx.seed))


def _op_phi_closed_eval(ctx, a):
    return _value_result(phi_closed_eval(ctx.get(a["D"], ClosedSetDescriptor), _vec(a["x"])))


def _op_phi_conj_closed_eval(ctx, a):
    return _value_result(phi_conj_closed_eval(ctx.get(a["D"], ClosedSetDescriptor), _vec(a["x"])))


def _op_g_phi_closed_member(ctx, a):
    return _verdict_result(g_phi_closed_member(ctx.get(a["D"], ClosedSetDescriptor), _vec(a["x"]),
                                               tol=float(a.get("tol", 1e-6))))


def _op_closed_repr_h_eval(ctx, a):
    res = closed_repr_h_eval(ctx.get(a["D"], ClosedSetDescriptor), _vec(a["x"]))
    return {"value": res.value, "boundary_attained": res.boundary_attained,
            "resolution": res.resolution}


def _op_midpoint_ball_check(ctx, a):
    return _verdict_result(midpoint_ball_check(ctx.get(a["D"], ClosedSetDescriptor),
                                               _vec(a["a1"]), _vec(a["a2"])))


def _op_line_corollary_check(ctx, a):
    return _verdict_result(line_corollary_check(ctx.get(a["D"], ClosedSetDescriptor),
                                                _vec(a["probes"])))


def _op_psd_on_subspace(ctx, a):
    s_mat = ctx.require_space().S if "S" not in a else _mat(a["S"])
    return _verdict_result(psd_on_subspace(s_mat, _mat(a["V"]), tol=ctx.tolerance))


def _op_min_q_over_affine(ctx, a):
    res = min_q_over_affine(ctx.require_space().S, _vec(a["r"]), _mat(a["V"]))
    if not res.finite:
        return {"value": "MINUS_INFINITY"}
    return {"value": res.value, "minimizer": res.minimizer.tolist()}


def _op_lp_min(ctx, a):
    res = lp_min(SimplexLp(_vec(a["costs"]), _mat(a["moments"]), _vec(a["target"])))
    if not res.feasible:
        return {"status": "INFEASIBLE"}
    return {"status": "FEASIBLE", "value": res.value, "weights": res.weights.tolist()}


# argument keys whose values must name declared sets; validated before execution
_SET_REF_KEYS = {"A", "L", "G", "D", "M", "P"}

OPERATIONS = {
    "pairing": _op_pairing,
    "q_value": _op_q_value,
    "is_q_positive": _op_is_q_positive,
    "pi_member": _op_pi_member,
    "conv_w_hull_member": _op_hull_member,
    "phi_eval": _op_phi_eval,
    "phi_conj_eval": _op_phi_conj_eval,
    "pq_member_phi": _op_pq_member_phi,
    "repr_hull_member": _op_repr_hull_member,
    "g_phi_member": _op_g_phi_member,
    "q_subdiff_check": _op_q_subdiff_check,
    "check_ineq_on_hull": _op_check_ineq_on_hull,
    "affine_is_q_positive": _op_affine_is_q_positive,
    "affine_pi_member": _op_affine_pi_member,
    "affine_is_maximal": _op_affine_is_maximal,
    "phi_affine_eval": _op_phi_affine_eval,
    "premax_certify": _op_premax_certify,
    "third_polar_check": _op_third_polar_check,
    "extension_continuum": _op_extension_continuum,
    "ni_type_check": _op_ni_type_check,
    "fund_ineq_check": _op_fund_ineq_check,
    "envelope_eval": _op_envelope_eval,
    "minimal_selfconj_probe": _op_minimal_selfconj_probe,
    "convmin_check": _op_convmin_check,
    "pq_g0_member": _op_pq_g0_member,
    "decompose_sum": _op_decompose_sum,
    "maximality_via_decomposition": _op_maximality_via_decomposition,
    "lipschitz_check": _op_lipschitz_check,
    "phi_graph_eval": _op_phi_graph_eval,
    "mcshane_extend_scalar": _op_mcshane_extend_scalar,
    "mcshane_bracket": _op_mcshane_bracket,
    "identity_example_check": _op_identity_example_check,
    "closed_domain_repr_probe": _op_closed_domain_repr_probe,
    "phi_closed_eval": _op_phi_closed_eval,
    "phi_conj_closed_eval": _op_phi_conj_closed_eval,
    "g_phi_closed_member": _op_g_phi_closed_member,
    "closed_repr_h_eval": _op_closed_repr_h_eval,
    "midpoint_ball_check": _op_midpoint_ball_check,
    "line_corollary_check": _op_line_corollary_check,
    "psd_on_subspace": _op_psd_on_subspace,
    "min_q_over_affine": _op_min_q_over_affine,
    "lp_min": _op_lp_min,
}


def load_scenario(doc: dict, base: Path, tolerance_override=None,
                  pitch_override=None) -> tuple[RunContext, list]:
    if not isinstance(doc, dict):
        raise ScenarioError("scenario must be one JSON object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ScenarioError(f"unsupported schema_version {version!r}")

    space = ssdb = lspace = None
    if "space" in doc:
        if not isinstance(doc["space"], dict):
            raise ScenarioError("space must be an object")
        space, ssdb, lspace = _build_space(doc["space"])

    grid = None
    if "grid" in doc:
        g = doc["grid"]
        if not isinstance(g, dict) or "lower" not in g or "upper" not in g:
            raise ScenarioError("grid must carry lower and upper bounds")
        pitch = float(pitch_override if pitch_override is not None else g.get("pitch", 0.1))
        grid = BoxGrid(_vec(g["lower"]), _vec(g["upper"]), pitch,
                       multistarts=int(g.get("multistarts", 8)))

    tolerance = float(tolerance_override if tolerance_override is not None
                      else doc.get("tolerance", 1e-9))
    seed = int(doc.get("seed", 0))
    ctx = RunContext(space, ssdb, lspace, {}, grid, tolerance, seed)

    sets = doc.get("sets", {})
    if not isinstance(sets, dict):
        raise ScenarioError("sets must be an object of named sets")
    for name, spec in sets.items():
        if not isinstance(spec, dict):
            raise ScenarioError(f"set {name!r} must be an object")
        ctx.sets[name] = _build_set(ctx, spec, base)

    queries = doc.get("queries", [])
    if not isinstance(queries, list):
        raise ScenarioError("queries must be a list")
    for i, qry in enumerate(queries):
        if not isinstance(qry, dict) or "op" not in qry:
            raise ScenarioError(f"query {i} must be an object with an 'op'")
        if qry["op"] not in OPERATIONS:
            raise ScenarioError(f"query {i}: unknown operation {qry['op']!r}")
        if not isinstance(qry.get("args", {}), dict):
            raise ScenarioError(f"query {i}: args must be an object")
        for key in _SET_REF_KEYS & set(qry.get("args", {})):
            ref = qry["args"][key]
            if not isinstance(ref, str) or ref not in ctx.sets:
                raise ScenarioError(f"query {i}: argument {key!r} must name a declared set")
    return ctx, queries


def _numbers_close(want, got, tol) -> bool:
    if isinstance(want, bool) or isinstance(got, bool):
        return want == got
    if isinstance(want, (int, float)) and isinstance(got, (int, float)):
        return abs(float(want) - float(got)) <= tol
    if isinstance(want, list) and isinstance(got, list):
        return len(want) == len(got) and all(
            _numbers_close(w, g, tol) for w, g in zip(want, got))
    return want == got


def _expectation_ok(expect, result) -> bool:
    if not isinstance(expect, dict):
        return False
    tol = float(expect.get("tol", 1e-9))
    for key, want in expect.items():
        if key == "tol":
            continue
        if not _numbers_close(want, result.get(key), tol):
            return False
    return True


def _run_query(ctx: RunContext, qry: dict) -> dict:
    t0 = time.perf_counter()
    record = {"op": qry["op"], "args": qry.get("args", {})}
    try:
        result = OPERATIONS[qry["op"]](ctx, qry.get("args", {}))
        record["result"] = result
        record["error"] = None
    except (PreconditionError, ValueError, ScenarioError) as exc:
        record["result"] = None
        record["error"] = f"{type(exc).__name__}: {exc}"
    record["wall_ms"] = 1000.0 * (time.perf_counter() - t0)
    if "expect" in qry:
        if record["error"] is not None:
            record["expect_ok"] = bool(qry["expect"].get("error", False))
        else:
            record["expect_ok"] = _expectation_ok(qry["expect"], record["result"])
    else:
        record["expect_ok"] = None
    return record


def run_scenario_doc(doc: dict, base: Path, tolerance_override=None,
                     pitch_override=None) -> dict:
    ctx, queries = load_scenario(doc, base, tolerance_override, pitch_override)
    threads = max(1, int(os.environ.get("QPOS_THREADS", "1")))
    if threads > 1 and len(queries) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            records = list(pool.map(lambda q: _run_query(ctx, q), queries))
    else:
        records = [_run_query(ctx, q) for q in queries]
    mismatches = sum(1 for r in records if r["expect_ok"] is False)
    summary = {
        "queries": len(records),
        "errors": sum(1 for r in records if r["error"] is not None),
        "expectation_mismatches": mismatches,
        "holds": sum(1 for r in records if (r["result"] or {}).get("status") == "HOLDS"),
        "fails": sum(1 for r in records if (r["result"] or {}).get("status") == "FAILS"),
        "undecided": sum(1 for r in records if (r["result"] or {}).get("status") == "UNDECIDED"),
    }
    return {
        "schema_version": SCHEMA_VERSION,
        "environment": {"version": _version, "seed": ctx.seed,
                        "tolerance": ctx.tolerance, "threads": threads},
        "queries": records,
        "summary": summary,
    }


def validate_report(report: dict) -> None:
    """Raise ScenarioError unless the report matches the emitted schema."""
    if not isinstance(report, dict):
        raise ScenarioError("report must be an object")
    if report.get("schema_version") != SCHEMA_VERSION:
        raise ScenarioError("bad schema_version")
    env = report.get("environment")
    if not isinstance(env, dict) or not {"version", "seed", "tolerance"} <= set(env):
        raise ScenarioError("bad environment block")
    queries = report.get("queries")
    if not isinstance(queries, list):
        raise ScenarioError("bad queries block")
    for rec in queries:
        if not isinstance(rec, dict) or "op" not in rec or "wall_ms" not in rec:
            raise ScenarioError("bad query record")
        if rec.get("error") is None and not isinstance(rec.get("result"), dict):
            raise ScenarioError("query record lacks a result")
    summary = report.get("summary")
    if not isinstance(summary, dict) or "expectation_mismatches" not in summary:
        raise ScenarioError("bad summary block")


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False)
