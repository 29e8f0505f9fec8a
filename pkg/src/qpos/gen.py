"""Deterministic random-instance generators for the property batteries."""

from __future__ import annotations

import numpy as np

from qpos.core import PointSet, SsdSpace
from qpos.fitzpatrick import MaxAffineFn, phi_build
from qpos.lipschitz import GraphSet, LipschitzSpace
from qpos.numerics import eigh_jacobi
from qpos.ssdb import make_monotone_ssdb


def random_monotone_pointset(rng: np.random.Generator, k: int, m: int,
                             radius: float = 2.0) -> PointSet:
    """Exactly q-positive sample in the monotone model R^k x R^k: the graph of
    an affine map with PSD linear part, evaluated at m distinct points."""
    sp = make_monotone_ssdb(k)
    root = rng.normal(size=(k, k))
    psd = root.T @ root / max(1, k)
    shift = rng.uniform(-1.0, 1.0, size=k)
    xs = rng.uniform(-radius, radius, size=(m, k))
    # nudge apart any accidental near-duplicates
    for _ in range(8):
        diff = xs[:, None, :] - xs[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        np.fill_diagonal(dist, np.inf)
        if m == 1 or float(dist.min()) > 1e-6:
            break
        xs = rng.uniform(-radius, radius, size=(m, k))
    ys = xs @ psd.T + shift
    return PointSet.from_points(sp.base, np.hstack([xs, ys]))


def random_probes(rng: np.random.Generator, n: int, count: int,
                  radius: float = 3.0) -> np.ndarray:
    return rng.uniform(-radius, radius, size=(count, n))


def _spread_domain(rng, m, n1, radius):
    for _ in range(16):
        d = rng.uniform(-radius, radius, size=(m, n1))
        if m == 1:
            return d
        diff = d[:, None, :] - d[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        np.fill_diagonal(dist, np.inf)
        if float(dist.min()) > 1e-4:
            return d
    raise RuntimeError("could not draw distinct domain points")


def random_lipschitz_graph(rng: np.random.Generator, lspace: LipschitzSpace,
                           m: int, satisfy: bool) -> GraphSet:
    """Graph sample that satisfies (with margin) or violates (with margin) the
    K-Lipschitz bound of the given space."""
    domain = _spread_domain(rng, m, lspace.n1, 2.0)
    lin = rng.normal(size=(lspace.n2, lspace.n1))
    sv = eigh_jacobi(lin.T @ lin)[0]
    top = float(np.sqrt(max(sv[-1], 1e-12)))
    lin = lin * (0.85 * lspace.K / top)
    values = domain @ lin.T + rng.uniform(-0.05, 0.05, size=(m, lspace.n2))
    if satisfy or m == 1:
        if m > 1:
            values = domain @ lin.T  # exact contraction, margin 15 percent
        return GraphSet.from_data(lspace, domain, values)
    dd = domain[:, None, :] - domain[None, :, :]
    dv = values[:, None, :] - values[None, :, :]
    num = np.sqrt(np.einsum("ijk,ijk->ij", dv, dv))
    den = lspace.K * np.sqrt(np.einsum("ijk,ijk->ij", dd, dd))
    np.fill_diagonal(den, np.inf)
    ratio = float((num / den).max())
    center = values.mean(axis=0)
    blowup = 1.6 / ratio if ratio > 1e-9 else 2.0
    values = center + (values - center) * blowup
    return GraphSet.from_data(lspace, domain, values)


def identity_graph_samples(space: SsdSpace, count: int, lo: float = -2.0,
                           hi: float = 2.0) -> PointSet:
    ts = np.linspace(lo, hi, count)
    k = space.n // 2
    pts = np.hstack([np.tile(ts[:, None], (1, k)), np.tile(ts[:, None], (1, k))])
    return PointSet.from_points(space, pts)


class _IdentitySamplePhi(MaxAffineFn):
    """Representing function of uniform identity-graph samples on the real
    monotone model with O(1) exact evaluation.

    The generic value is max over sample t of (t (x + x*) - t^2), a concave
    parabola in t maximized over a uniform grid, so the winner is one of
    the two grid neighbors of the vertex (or a clamped endpoint).  Agrees with
    the dense max-affine evaluation to the last ulp (association order only)."""

    def eval_batch(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        ts = self.slopes[:, 0]
        lo, hi, m = ts[0], ts[-1], ts.size
        pitch = (hi - lo) / (m - 1)
        su = xs[:, 0] + xs[:, 1]
        idx = np.clip(np.floor((0.5 * su - lo) / pitch), 0, m - 2).astype(int)
        t0 = ts[idx]
        t1 = ts[idx + 1]
        return np.maximum(t0 * su - t0 * t0, t1 * su - t1 * t1)

    def eval(self, x) -> float:
        x = self.space.check_vector(x)
        return float(self.eval_batch(x[None, :])[0])


def identity_sample_phi(space: SsdSpace, count: int, lo: float = -3.0,
                        hi: float = 3.0) -> "_IdentitySamplePhi":
    """phi of uniform identity-graph samples with fast exact evaluation; the
    piece data stays the full sample grid so conjugate LPs are unchanged."""
    A = identity_graph_samples(space, count, lo, hi)
    generic = phi_build(A)
    return _IdentitySamplePhi(space, generic.slopes, generic.offsets)


def random_max_affine_minorant(rng: np.random.Generator, A: PointSet,
                               pieces: int):
    """Random pairing-continuous max-affine function majorized by q on A:
    slopes S u with offsets lifted just enough to stay below q at every point."""
    from qpos.fitzpatrick import MaxAffineFn
    space = A.space
    us = rng.uniform(-1.5, 1.5, size=(pieces, space.n))
    slopes = us @ space.S
    qa = space.q_batch(A.points)
    offsets = np.max(A.points @ slopes.T - qa[:, None], axis=0)
    offsets = offsets + rng.uniform(0.0, 0.5, size=pieces)
    return MaxAffineFn.from_pieces(space, slopes, offsets)
