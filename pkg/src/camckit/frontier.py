"""The Cahn-Hoffman image of S^1: sampling, singularities, crossings, Wulff shape.

Everything here works on the plane curve theta -> xi(theta). The rotationally
symmetric 3D integrands reduce to their profile curve (see `surfaces`).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError, ToleranceError
from .geom import (TWO_PI, hausdorff, segment_pairs_intersecting,
                   segment_intersection_point, wrap_angle)
from .integrand import Integrand

TOL_SING = 1e-10
PARAM_BISECT_TOL = 1e-13
IDENT_TOL = 1e-9


@dataclass(frozen=True)
class FrontierSample:
    """One sampled point of the Cahn-Hoffman image."""

    parameter: float
    nu: np.ndarray
    xi: np.ndarray
    A: float          # scalar operator A at the parameter (n=1)
    detA_sign: int    # 0 when |A| <= tol_sing


@dataclass(frozen=True)
class Frontier:
    """A uniformly sampled Cahn-Hoffman image with its generating integrand."""

    integrand: Integrand
    thetas: np.ndarray
    points: np.ndarray
    detA: np.ndarray
    tol_sing: float = TOL_SING

    def __len__(self) -> int:
        return len(self.thetas)

    def __getitem__(self, k: int) -> FrontierSample:
        t = self.thetas[k]
        s = 0 if abs(self.detA[k]) <= self.tol_sing else int(np.sign(self.detA[k]))
        return FrontierSample(parameter=float(t),
                              nu=np.array([np.cos(t), np.sin(t)]),
                              xi=self.points[k], A=float(self.detA[k]), detA_sign=s)

    def __iter__(self):
        return (self[k] for k in range(len(self)))


def frontier_points(integrand: Integrand, thetas: np.ndarray) -> np.ndarray:
    """xi(theta) for a batch of parameters of an n=1 integrand."""
    if integrand.n != 1:
        raise ValidationError("frontier parametrization requires n=1")
    nu = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
    return integrand.xi(nu)


def sample_frontier(integrand: Integrand, resolution: int = 1024) -> Frontier:
    """Uniform parameter sampling of the Cahn-Hoffman image."""
    if resolution < 16:
        raise ValidationError("resolution must be >= 16")
    t = np.linspace(0.0, TWO_PI, resolution, endpoint=False)
    nu = np.stack([np.cos(t), np.sin(t)], axis=-1)
    pts = integrand.xi(nu)
    detA = integrand.det_A(nu)
    return Frontier(integrand=integrand, thetas=t, points=pts, detA=detA)


# ---------------------------------------------------------------------------
# singular set
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SingularSet:
    """Roots of det A on [0, 2*pi) with their images and coincident-image pairs."""

    roots: np.ndarray                      # sorted parameters
    images: np.ndarray                     # xi at the roots
    identifications: list[tuple[int, int]]  # index pairs with coincident images
    degenerate: list[float] = field(default_factory=list)

    @property
    def corner_points(self) -> np.ndarray:
        return np.array([0.5 * (self.images[i] + self.images[j]) for i, j in self.identifications])


def _bisect_root(f, a: float, b: float, tol: float = PARAM_BISECT_TOL) -> float:
    fa = f(a)
    for _ in range(200):
        m = 0.5 * (a + b)
        if b - a <= tol:
            return m
        fm = f(m)
        if fa * fm <= 0:
            b = m
        else:
            a, fa = m, fm
    return 0.5 * (a + b)


def singular_set(integrand: Integrand, tol_sing: float = TOL_SING, grid: int = 4096) -> SingularSet:
    """Bracket and bisect the zeros of det A over one period."""
    if integrand.n != 1:
        raise ValidationError("singular_set operates on n=1 integrands; lift profiles first")
    t = np.linspace(0.0, TWO_PI, grid, endpoint=False)
    nu = np.stack([np.cos(t), np.sin(t)], axis=-1)
    d = integrand.det_A(nu)

    def detA(th):
        return float(integrand.det_A(np.array([[np.cos(th), np.sin(th)]]))[0])

    roots, degenerate = [], []
    for k in range(grid):
        k2 = (k + 1) % grid
        a, b = t[k], t[k] + TWO_PI / grid
        if d[k] == 0.0 or (abs(d[k]) <= tol_sing and d[(k - 1) % grid] * d[k2] > 0):
            # tangential zero at a grid point: report, do not drop
            degenerate.append(float(a))
            continue
        if d[k] * d[k2] < 0:
            roots.append(_bisect_root(detA, a, b))
    roots = np.array(sorted(wrap_angle(np.array(roots))))
    images = frontier_points(integrand, roots) if len(roots) else np.zeros((0, 2))
    ident = []
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if np.linalg.norm(images[i] - images[j]) <= IDENT_TOL:
                ident.append((i, j))
    return SingularSet(roots=roots, images=images, identifications=ident, degenerate=degenerate)


# ---------------------------------------------------------------------------
# self intersections
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Crossing:
    """A transverse self-crossing of the frontier, with both parameters."""

    point: np.ndarray
    params: tuple[float, float]
    inner: bool = False
    corner_coincidence: bool = False


def _bisect_side(integrand: Integrand, lo: float, hi: float, p: np.ndarray, d: np.ndarray) -> float:
    """Bisect the signed side of xi(t) against the line through p with direction d."""
    def side(th):
        x = frontier_points(integrand, np.array([th]))[0]
        return d[0] * (x[1] - p[1]) - d[1] * (x[0] - p[0])

    flo, fhi = side(lo), side(hi)
    width = hi - lo
    for _ in range(3):
        if flo * fhi <= 0:
            break
        lo, hi = lo - width, hi + width
        flo, fhi = side(lo), side(hi)
    else:
        raise ValidationError("failed to bracket a crossing; increase the sampling resolution")
    while hi - lo > PARAM_BISECT_TOL:
        m = 0.5 * (lo + hi)
        fm = side(m)
        if flo * fm <= 0:
            hi, fhi = m, fm
        else:
            lo, flo = m, fm
    return 0.5 * (lo + hi)


def _refine_crossing(integrand: Integrand, a1: float, b1: float, a2: float, b2: float,
                     rounds: int = 3) -> tuple[float, float]:
    """Alternating bisection of xi(s) = xi(t) for a transverse crossing.

    Each pass bisects one parameter against the other arc's local tangent line;
    transversality keeps the side function sign-definite, and the error
    contracts quadratically per pass.
    """
    def tangent_line(th):
        h = 1e-7
        p2 = frontier_points(integrand, np.array([th - h, th, th + h]))
        d = p2[2] - p2[0]
        nd = np.linalg.norm(d)
        if nd < 1e-14:
            raise ValidationError("crossing refinement hit a singular parameter")
        return p2[1], d / nd

    p, q = frontier_points(integrand, np.array([a2, b2]))
    s = _bisect_side(integrand, a1, b1, p, (q - p) / np.linalg.norm(q - p))
    t = 0.5 * (a2 + b2)
    for _ in range(rounds):
        p, d = tangent_line(s)
        t = _bisect_side(integrand, t - (b2 - a2), t + (b2 - a2), p, d)
        p, d = tangent_line(t)
        s = _bisect_side(integrand, s - (b1 - a1), s + (b1 - a1), p, d)
    return s, t


def self_intersections(frontier: Frontier, singular: SingularSet | None = None) -> list[Crossing]:
    """Transverse crossings of the closed frontier polyline, refined on both arcs.

    Crossings landing within IDENT_TOL of a singular-image identification point
    are tagged as corner coincidences; the four crossings closest to the origin
    are tagged inner.
    """
    if len(frontier) < 256:
        raise ValidationError("self-intersection detection needs a polyline of >= 256 samples")
    integrand = frontier.integrand
    pts = frontier.points
    n = len(pts)
    pairs = segment_pairs_intersecting(pts, skip_adjacent=1)
    if singular is None:
        singular = singular_set(integrand)
    corner_pts = singular.corner_points

    found: list[Crossing] = []
    dt = TWO_PI / n
    for i, j in pairs:
        t1a, t1b = frontier.thetas[i], frontier.thetas[i] + dt
        t2a, t2b = frontier.thetas[j], frontier.thetas[j] + dt
        p = segment_intersection_point(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n])
        seglen = min(np.linalg.norm(pts[(i + 1) % n] - pts[i]),
                     np.linalg.norm(pts[(j + 1) % n] - pts[j]))
        if seglen < 1e-12:
            raise ValidationError("nearly degenerate segments; increase the sampling resolution")
        is_corner = len(corner_pts) and np.min(np.linalg.norm(corner_pts - p, axis=1)) <= 1e-6
        if is_corner:
            # cusp-pair coincidences are owned by the singular set; chord artifacts
            # near them are not transverse crossings of smooth arcs
            continue
        s, t = _refine_crossing(integrand, t1a, t1b, t2a, t2b)
        x = frontier_points(integrand, np.array([s, t])).mean(axis=0)
        found.append(Crossing(point=x, params=(float(s), float(t))))

    # deduplicate detections of the same crossing from neighbouring segment pairs
    unique: list[Crossing] = []
    for c in sorted(found, key=lambda c: c.params):
        if all(np.linalg.norm(c.point - u.point) > 1e-7 or
               min(abs(c.params[0] - u.params[0]), abs(c.params[1] - u.params[1])) > 1e-6
               for u in unique):
            unique.append(c)
    radii = np.array([np.linalg.norm(c.point) for c in unique])
    inner_idx = set(np.argsort(radii, kind="stable")[: min(4, len(unique))]) if len(unique) else set()
    out = [Crossing(point=c.point, params=c.params, inner=bool(k in inner_idx))
           for k, c in enumerate(unique)]
    # cusp-image coincidences are self-intersections of the image too; report them
    # separately, parametrized by the two singular roots
    for i, j in singular.identifications:
        out.append(Crossing(point=0.5 * (singular.images[i] + singular.images[j]),
                            params=(float(singular.roots[i]), float(singular.roots[j])),
                            corner_coincidence=True))
    return out


# ---------------------------------------------------------------------------
# Wulff shape
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WulffShape:
    """Convex region from half-plane intersection (counterclockwise vertex ring)."""

    vertices: np.ndarray
    vertex_params: np.ndarray   # supporting normal angle of the edge leaving each vertex
    integrand: Integrand

    def support_slack(self, thetas: np.ndarray) -> np.ndarray:
        """max over vertices of <x, nu(t)> - gamma(t) per direction."""
        nu = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
        g = self.integrand.gamma(nu)
        return (self.vertices @ nu.T).max(axis=0) - g


def _clip_tracked(integrand: Integrand, thetas: np.ndarray):
    """Sutherland-Hodgman clipping with per-edge supporting-angle provenance."""
    box = 2.0 * max(1.0, float(np.max(integrand.gamma(
        np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)))))
    verts = [np.array(v) for v in [(-box, -box), (box, -box), (box, box), (-box, box)]]
    eids = [-1, -1, -1, -1]
    order = np.argsort(thetas)
    nus = np.stack([np.cos(thetas), np.sin(thetas)], axis=-1)
    gs = integrand.gamma(nus)
    for idx in order:
        nrm, h = nus[idx], gs[idx]
        d = [float(v @ nrm - h) for v in verts]
        out_v, out_e = [], []
        m = len(verts)
        for i in range(m):
            j = (i + 1) % m
            if d[i] <= 0.0:
                out_v.append(verts[i])
                out_e.append(eids[i])
                if d[j] > 0.0:
                    a = d[i] / (d[i] - d[j])
                    out_v.append(verts[i] + a * (verts[j] - verts[i]))
                    out_e.append(int(idx))
            elif d[j] <= 0.0:
                a = d[i] / (d[i] - d[j])
                out_v.append(verts[i] + a * (verts[j] - verts[i]))
                out_e.append(eids[i])
        verts, eids = out_v, out_e
        if len(verts) < 3:
            raise ValidationError("half-plane intersection collapsed; not reachable for positive gamma")
    return np.array(verts), np.array(eids)


def wulff_halfspace(integrand: Integrand, resolution: int = 4096) -> WulffShape:
    """Intersection of `resolution` supporting half-planes <x, nu> <= gamma(nu).

    Two passes: a uniform pass with half the budget finds which directions
    support final edges; the other half of the budget is spent refining inside
    those active runs. The output is still the exact intersection of
    `resolution` half-planes.
    """
    if resolution < 64:
        raise ValidationError("resolution must be >= 64")
    if integrand.n != 1:
        raise ValidationError("wulff_halfspace clips in the plane; reduce n=2 kinds to their profile")
    m1 = resolution // 2
    th1 = np.arange(m1) * TWO_PI / m1
    _, eids = _clip_tracked(integrand, th1)
    active = np.sort(np.unique(th1[eids[eids >= 0]]))
    step1 = TWO_PI / m1
    runs = []
    for k in range(len(active)):
        a = active[k]
        g = (active[(k + 1) % len(active)] - a) % TWO_PI
        if 0.0 < g <= 2.5 * step1:
            runs.append((a, g))
    extra = resolution - m1
    news = []
    if runs:
        meas = sum(g for _, g in runs)
        quota = [extra * g / meas for _, g in runs]
        ks = [int(q) for q in quota]
        for i in np.argsort([k - q for k, q in zip(ks, quota)])[: extra - sum(ks)]:
            ks[i] += 1
        for (a, g), k in zip(runs, ks):
            if k > 0:
                news.append(a + g * (np.arange(1, k + 1) / (k + 1)))
    allth = wrap_angle(np.concatenate([th1] + news)) if news else th1
    verts, eids = _clip_tracked(integrand, allth)
    eang = np.where(eids >= 0, allth[np.maximum(eids, 0)], np.nan)

    # merge consecutive collinear edges (angular tolerance 1e-8)
    edges = np.roll(verts, -1, axis=0) - verts
    ang = np.arctan2(edges[:, 1], edges[:, 0])
    keep = np.abs(np.mod(ang - np.roll(ang, 1) + np.pi, TWO_PI) - np.pi) > 1e-8
    keep |= np.linalg.norm(edges, axis=1) < 1e-14  # never drop both ends of slivers
    verts, eang = verts[keep], eang[keep]
    dif = np.linalg.norm(verts - np.roll(verts, 1, axis=0), axis=1)
    verts, eang = verts[dif > 1e-14], eang[dif > 1e-14]
    return WulffShape(vertices=verts, vertex_params=eang, integrand=integrand)


@dataclass(frozen=True)
class WulffArcs:
    """The Wulff boundary as a union of frontier arcs between crossing parameters."""

    intervals: list[tuple[float, float]]
    integrand: Integrand

    def polyline(self, per_arc: int = 4096) -> np.ndarray:
        parts = [frontier_points(self.integrand, np.linspace(a, b, per_arc))[:-1]
                 for a, b in self.intervals]
        return np.concatenate(parts)


def wulff_arcs(integrand: Integrand, singular: SingularSet, crossings: list[Crossing]) -> WulffArcs:
    """Frontier arcs delimited by the inner crossing parameters forming the Wulff boundary.

    Works for the hexic-type frontiers: each inner crossing contributes its two
    parameters; consecutive parameters around the circle bound a boundary arc
    exactly when the arc midpoint supports the convex body.
    """
    inner = [c for c in crossings if c.inner]
    if not inner:
        # embedded frontier (isotropic-like): the whole circle is the boundary
        return WulffArcs(intervals=[(0.0, TWO_PI)], integrand=integrand)
    params = np.sort(wrap_angle(np.array([p for c in inner for p in c.params])))
    intervals = []
    for k in range(len(params)):
        a = params[k]
        b = params[(k + 1) % len(params)]
        if b <= a:
            b += TWO_PI
        mid = 0.5 * (a + b)
        x = frontier_points(integrand, np.array([mid]))[0]
        # boundary arcs consist of support points: <xi(t), nu(s)> <= gamma(s) for all s
        t = np.linspace(0, TWO_PI, 720, endpoint=False)
        nu = np.stack([np.cos(t), np.sin(t)], axis=-1)
        slack = x @ nu.T - integrand.gamma(nu)
        if slack.max() <= 1e-9:
            intervals.append((float(a), float(b)))
    if not intervals:
        raise ValidationError("no supporting arcs found between the crossing parameters")
    return WulffArcs(intervals=intervals, integrand=integrand)


def wulff_dual_hausdorff(integrand: Integrand, resolution: int = 4096) -> dict:
    """Hausdorff distance between the two Wulff constructions at one resolution."""
    shape = wulff_halfspace(integrand, resolution)
    sing = singular_set(integrand)
    cross = self_intersections(sample_frontier(integrand, resolution), sing)
    arcs = wulff_arcs(integrand, sing, cross)
    dist = hausdorff(shape.vertices, arcs.polyline(per_arc=resolution))
    return {"hausdorff": dist, "halfspace": shape, "arcs": arcs}
