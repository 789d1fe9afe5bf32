"""Closed piecewise-smooth plane curves stitched from frontier arcs.

A stitched curve carries, per sample, the frontier parameter, the outward unit
normal (always +/- the parametrizing direction nu(theta)), the Cahn-Hoffman
field evaluated at that outward normal, and the measured anisotropic curvature
Lambda = -<d xi~/ds, t>. The outward-normal sign is constant on each smooth
piece (between junctions and interior cusp parameters) and is measured there
from the discrete geometry; samples near piece boundaries are excluded from
Lambda statistics because the tangent is discontinuous across them.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import MeshError, ResourceCapError, ValidationError
from .geom import (TWO_PI, dihedral_group, pointset_hausdorff, segment_pairs_intersecting,
                   signed_area, wrap_angle)
from .frontier import (SingularSet, frontier_points, sample_frontier,
                       self_intersections, singular_set)
from .integrand import Integrand

JUNCTION_TOL = 1e-9
EXCLUSION_WINDOW = 3
TOL_CAMC = 5e-3
CONGRUENCE_TOL = 1e-6


@dataclass(frozen=True)
class ArcSpec:
    """Ordered parameter intervals traversed from `a` to `b` (b < a runs backward)."""

    intervals: list[tuple[float, float]]

    def to_json(self) -> dict:
        return {"arcs": [{"from": a, "to": b} for a, b in self.intervals], "units": "radians"}

    @classmethod
    def from_json(cls, obj: dict) -> "ArcSpec":
        unknown = set(obj) - {"arcs", "units"}
        if unknown:
            raise ValidationError(f"unknown ArcSpec keys: {sorted(unknown)}")
        if obj.get("units", "radians") != "radians":
            raise ValidationError("ArcSpec units must be radians")
        try:
            ivals = [(float(e["from"]), float(e["to"])) for e in obj["arcs"]]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed ArcSpec arcs: {exc}") from exc
        if not ivals:
            raise ValidationError("ArcSpec contains no arcs")
        return cls(intervals=ivals)


@dataclass
class ClosedCurve:
    """A closed oriented polyline sampled from frontier arcs."""

    integrand: Integrand
    points: np.ndarray          # (N, 2) ring, counterclockwise
    theta: np.ndarray           # frontier parameter per sample
    arc_id: np.ndarray          # input interval each sample came from
    piece_id: np.ndarray        # smooth piece (breaks at junctions and cusps)
    breaks: list[int]           # sample indices starting each smooth piece
    junctions: list[int]        # subset of breaks where two arcs were stitched
    junction_params: list[tuple[float, float]]  # (incoming end, outgoing start) parameters
    excluded: np.ndarray        # samples left out of Lambda statistics
    self_crossing: bool
    sign: np.ndarray = None     # outward normal = sign * nu(theta), per sample
    nu_out: np.ndarray = None
    xi_tilde: np.ndarray = None
    lam: np.ndarray = None

    @property
    def n_samples(self) -> int:
        return len(self.points)

    def scaled(self, r: float) -> "ClosedCurve":
        """Homothety r * X; normals and the Cahn-Hoffman field do not move."""
        c = ClosedCurve(integrand=self.integrand, points=r * self.points, theta=self.theta,
                        arc_id=self.arc_id, piece_id=self.piece_id, breaks=self.breaks,
                        junctions=self.junctions, junction_params=self.junction_params,
                        excluded=self.excluded.copy(), self_crossing=self.self_crossing,
                        sign=self.sign, nu_out=self.nu_out, xi_tilde=self.xi_tilde)
        anisotropic_curvature_along(c)
        return c


@dataclass(frozen=True)
class CamcVerdict:
    """Classification outcome with the per-piece Lambda profile."""

    is_camc: bool
    lam: float | None
    max_deviation: float
    junction_residual: float
    tolerance: float
    profile: list[dict]

    @property
    def status(self) -> str:
        return "CAMC" if self.is_camc else "NotCAMC"


def _angdiff(a, b):
    return np.mod(a - b + np.pi, TWO_PI) - np.pi


def _is_full_period(interval) -> bool:
    return abs(abs(interval[1] - interval[0]) - TWO_PI) < 1e-9


def stitch(integrand: Integrand, arcs: ArcSpec, resolution: int = 1024,
           singular: SingularSet | None = None) -> ClosedCurve:
    """Sample the arcs, verify that they chain into a closed curve, and orient it CCW.

    Raises when consecutive arc endpoint images fail to coincide (the gap vector
    is reported). A self-crossing stitched polyline is allowed and flagged.
    """
    if resolution < 64:
        raise ValidationError("resolution per arc must be >= 64")
    if not arcs.intervals:
        raise ValidationError("empty arc specification")
    m = len(arcs.intervals)
    ts, pts = [], []
    for (a, b) in arcs.intervals:
        t = np.linspace(a, b, resolution)
        ts.append(t)
        pts.append(frontier_points(integrand, t))
    for k in range(m):
        gap = pts[(k + 1) % m][0] - pts[k][-1]
        if np.linalg.norm(gap) > JUNCTION_TOL:
            raise ValidationError(
                f"arcs do not close: interval {k} ends at {pts[k][-1]}, "
                f"next interval starts offset by gap {gap}")
    theta = np.concatenate([t[:-1] for t in ts])
    points = np.concatenate([p[:-1] for p in pts])
    aid = np.concatenate([np.full(resolution - 1, k) for k in range(m)])
    n = len(points)

    flipped = signed_area(points) < 0
    if flipped:
        theta = np.roll(theta[::-1], 1)
        points = np.roll(points[::-1], 1, axis=0)
        aid = np.roll(aid[::-1], 1)

    # junction sample indices and their exact one-sided parameters
    junctions: list[int] = []
    junction_params: list[tuple[float, float]] = []
    single_full_circle = m == 1 and _is_full_period(arcs.intervals[0])
    if not single_full_circle:
        for j in sorted(np.nonzero(aid != np.roll(aid, 1))[0].tolist()) or [0]:
            k_out = int(aid[j])
            k_in = int(aid[(j - 1) % n])
            a_out, b_out = arcs.intervals[k_out]
            a_in, b_in = arcs.intervals[k_in]
            if flipped:
                incoming, outgoing = a_in, b_out
            else:
                incoming, outgoing = b_in, a_out
            junctions.append(int(j))
            junction_params.append((float(incoming), float(outgoing)))

    # breaks: junctions plus samples nearest to interior cusp parameters
    if singular is None:
        singular = singular_set(integrand)
    breaks = set(junctions)
    cusp_hits: list[int] = []
    if len(singular.roots):
        for k, (a, b) in enumerate(arcs.intervals):
            lo, hi = (a, b) if a <= b else (b, a)
            for r in singular.roots:
                for shift in (-TWO_PI, 0.0, TWO_PI):
                    rr = r + shift
                    if lo + 1e-9 < rr < hi - 1e-9:
                        sel = np.nonzero(aid == k)[0]
                        j = sel[np.argmin(np.abs(_angdiff(theta[sel], rr)))]
                        breaks.add(int(j))
                        cusp_hits.append(int(j))
    breaks = sorted(breaks)

    piece_id = np.zeros(n, dtype=int)
    if breaks:
        marks = np.zeros(n, dtype=int)
        marks[breaks] = 1
        piece_id = np.cumsum(marks) - 1
        if breaks[0] != 0:
            piece_id[piece_id < 0] = piece_id[-1]  # the head wraps onto the tail piece

    excluded = np.zeros(n, dtype=bool)
    for j in list(junctions) + cusp_hits:
        for w in range(-EXCLUSION_WINDOW, EXCLUSION_WINDOW + 1):
            excluded[(j + w) % n] = True

    step = max(1, n // 4096)
    crossing = bool(segment_pairs_intersecting(points[::step], skip_adjacent=1))
    curve = ClosedCurve(integrand=integrand, points=points, theta=theta, arc_id=aid,
                        piece_id=piece_id, breaks=breaks, junctions=junctions,
                        junction_params=junction_params, excluded=excluded,
                        self_crossing=crossing)
    _assign_normals(curve)
    anisotropic_curvature_along(curve)
    return curve


def _assign_normals(curve: ClosedCurve) -> None:
    """Outward normal per sample: the right normal of the CCW traversal.

    Along a frontier arc the outward normal is exactly +/- nu(theta) with the
    sign constant per smooth piece; the sign is measured from the discrete
    right normal and the field then evaluated on exact directions.
    """
    p = curve.points
    tgt = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
    norms = np.linalg.norm(tgt, axis=1)
    if norms.min() < 1e-14:
        raise MeshError("zero-length segment in stitched polyline")
    right = np.stack([tgt[:, 1], -tgt[:, 0]], axis=-1) / norms[:, None]
    nu = np.stack([np.cos(curve.theta), np.sin(curve.theta)], axis=-1)
    dots = np.sum(right * nu, axis=1)
    sign = np.empty(curve.n_samples)
    for pid in np.unique(curve.piece_id):
        mask = curve.piece_id == pid
        confident = mask & (np.abs(dots) > 0.5) & ~curve.excluded
        sel = confident if confident.any() else mask
        sign[mask] = 1.0 if np.median(dots[sel]) >= 0 else -1.0
    curve.sign = sign
    curve.nu_out = sign[:, None] * nu
    curve.xi_tilde = curve.integrand.xi(curve.nu_out)


def anisotropic_curvature_along(curve: ClosedCurve) -> np.ndarray:
    """Lambda(s) = -<d xi~/ds, t(s)> by central differences along the polyline."""
    p = curve.points
    chord = np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
    if chord.min() < 1e-15:
        raise MeshError("zero-length segment in stitched polyline")
    span = np.roll(p, -1, axis=0) - np.roll(p, 1, axis=0)
    ds = chord + np.roll(chord, 1)
    t = span / np.linalg.norm(span, axis=1)[:, None]
    dxi = np.roll(curve.xi_tilde, -1, axis=0) - np.roll(curve.xi_tilde, 1, axis=0)
    curve.lam = -np.sum(dxi * t, axis=1) / ds
    return curve.lam


def _junction_residual(curve: ClosedCurve) -> float:
    """Worst mismatch of the one-sided Cahn-Hoffman limits over all junctions."""
    worst = 0.0
    n = curve.n_samples
    for j, (t_in, t_out) in zip(curve.junctions, curve.junction_params):
        s_in = curve.sign[(j - 1) % n]
        s_out = curve.sign[j % n]
        lim_in = curve.integrand.xi(s_in * np.array([np.cos(t_in), np.sin(t_in)]))
        lim_out = curve.integrand.xi(s_out * np.array([np.cos(t_out), np.sin(t_out)]))
        worst = max(worst, float(np.linalg.norm(lim_in - lim_out)))
    return worst


def classify(curve: ClosedCurve, tol_camc: float = TOL_CAMC) -> CamcVerdict:
    """CAMC iff Lambda is constant off the excluded windows and junctions match."""
    if curve.lam is None:
        anisotropic_curvature_along(curve)
    ok = ~curve.excluded
    for k in np.unique(curve.arc_id):
        if int(np.sum(ok & (curve.arc_id == k))) < 16:
            raise ValidationError("fewer than 16 usable samples on an arc; raise the resolution")
    lam_in = curve.lam[ok]
    med = float(np.median(lam_in))
    dev = float(np.max(np.abs(lam_in - med)))
    jres = _junction_residual(curve)
    is_camc = dev <= tol_camc and jres <= JUNCTION_TOL

    profile = []
    for pid in np.unique(curve.piece_id):
        sel = (curve.piece_id == pid) & ok
        if not sel.any():
            continue
        th = curve.theta[sel]
        profile.append({
            "piece": int(pid),
            "arc": int(np.bincount(curve.arc_id[sel]).argmax()),
            "theta_range": [float(th.min()), float(th.max())],
            "sign": float(np.median(curve.sign[sel])),
            "lambda_mean": float(np.mean(curve.lam[sel])),
            "lambda_dev": float(np.max(np.abs(curve.lam[sel] - np.median(curve.lam[sel])))),
        })
    return CamcVerdict(is_camc=is_camc, lam=(med if is_camc else None), max_deviation=dev,
                       junction_residual=jres, tolerance=tol_camc, profile=profile)


def energy_of_curve(curve: ClosedCurve, integrand: Integrand | None = None) -> float:
    """Trapezoidal sum of gamma(outward normal) against arclength."""
    integrand = integrand or curve.integrand
    g = integrand.gamma(curve.nu_out)
    seg = np.linalg.norm(np.roll(curve.points, -1, axis=0) - curve.points, axis=1)
    return float(np.sum(0.5 * (g + np.roll(g, -1)) * seg))


# ---------------------------------------------------------------------------
# builtin catalogue
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HexicLandmarks:
    """Cusp and crossing parameters of a hexic-type frontier, with base offset delta."""

    delta: float
    theta1: float
    rho1: float
    rho2: float

    def cusp(self, j: int) -> float:
        """theta_j for j = 1..8 in the standard labelling, shifted by delta."""
        t1 = self.theta1
        table = {1: t1, 2: np.pi / 2 - t1, 3: np.pi / 2 + t1, 4: np.pi - t1,
                 5: np.pi + t1, 6: 3 * np.pi / 2 - t1, 7: 3 * np.pi / 2 + t1, 8: -t1}
        return self.delta + table[j]


def hexic_landmarks(integrand: Integrand, resolution: int = 8192) -> HexicLandmarks:
    """Recover theta_1, rho_1, rho_2 and the rotation offset from the computed geometry."""
    sing = singular_set(integrand)
    if len(sing.roots) != 8:
        raise ValidationError(
            f"integrand has {len(sing.roots)} singular parameters; the catalogue needs the hexic pattern")
    roots = np.sort(sing.roots)
    gaps = [(roots[k], roots[(k + 1) % 8] + (TWO_PI if k == 7 else 0.0)) for k in range(8)]
    mids = np.array([0.5 * (a + b) for a, b in gaps])
    nus = np.stack([np.cos(mids), np.sin(mids)], axis=-1)
    centers = wrap_angle(mids[integrand.det_A(nus) < 0])
    delta = float(np.min(np.mod(centers + np.pi / 4, np.pi / 2))) - np.pi / 4
    theta1 = float(np.min(np.mod(roots - delta, np.pi / 2)))
    cross = self_intersections(sample_frontier(integrand, resolution), sing)
    inner = sorted(wrap_angle(np.array([p for c in cross if c.inner for p in c.params])))
    if len(inner) != 8:
        raise ValidationError(f"expected 8 inner crossing parameters, found {len(inner)}")
    rel = np.sort(np.mod(np.array(inner) - delta, np.pi / 2))
    return HexicLandmarks(delta=delta, theta1=theta1, rho1=float(rel[0]), rho2=float(rel[-1]))


def builtin_catalogue(integrand: Integrand, landmarks: HexicLandmarks | None = None) -> dict[str, ArcSpec]:
    """The named closed curves of the hexic frontier, endpoints from computed landmarks.

    Intervals are ordered (and where needed direction-reversed) so that
    consecutive arc endpoint images chain around each closed curve.
    """
    lm = landmarks or hexic_landmarks(integrand)
    t = lm.cusp
    r1, r2 = lm.rho1 + lm.delta, lm.rho2 + lm.delta
    q = np.pi / 2
    return {
        "wulff": ArcSpec([(r1 + k * q, r2 + k * q) for k in range(4)]),
        "cgamma1": ArcSpec([(t(2), t(3)), (t(8), t(1)), (t(6), t(7)), (t(4), t(5))]),
        "cgamma2": ArcSpec([(t(1), t(2)), (t(5), t(6))]),
        "cgamma3": ArcSpec([(t(1), t(8)), (t(3), r2 + q), (r1 + 2 * q, t(6))]),
        "cgamma4": ArcSpec([(t(1), r1), (r2 + 3 * q, t(8) + TWO_PI),
                            (t(3), r1 + q), (r2, t(2)),
                            (t(5), r1 + 2 * q), (r2 + q, t(4)),
                            (t(7), r1 + 3 * q), (r2 + 2 * q, t(6))]),
        "cgamma5": ArcSpec([(lm.delta - lm.rho1, lm.delta + lm.rho1)]),
    }


# ---------------------------------------------------------------------------
# enumeration of closed CAMC curves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FrontierGraph:
    """Nodes are self-intersection points of the frontier; edges the arcs between them."""

    node_points: np.ndarray                      # (M, 2)
    edges: list[tuple[int, int, float, float]]   # (node_u, node_v, param_a, param_b), a < b


def build_frontier_graph(integrand: Integrand, resolution: int = 8192) -> FrontierGraph | None:
    """Subdivide the frontier at every self-intersection parameter; None when embedded."""
    sing = singular_set(integrand)
    cross = self_intersections(sample_frontier(integrand, resolution), sing)
    params: list[float] = []
    points: list[np.ndarray] = []
    for c in cross:
        for p in c.params:
            params.append(float(wrap_angle(np.asarray(p))))
            points.append(c.point)
    if not params:
        return None
    order = np.argsort(params)
    params = [params[k] for k in order]
    points = [points[k] for k in order]
    node_pts: list[np.ndarray] = []
    node_of_param: list[int] = []
    for p in points:
        for i, q in enumerate(node_pts):
            if np.linalg.norm(p - q) < 1e-7:
                node_of_param.append(i)
                break
        else:
            node_of_param.append(len(node_pts))
            node_pts.append(p)
    edges = []
    m = len(params)
    for k in range(m):
        a = params[k]
        b = params[(k + 1) % m] + (TWO_PI if k + 1 == m else 0.0)
        edges.append((node_of_param[k], node_of_param[(k + 1) % m], float(a), float(b)))
    return FrontierGraph(node_points=np.array(node_pts), edges=edges)


def _simple_cycles(graph: FrontierGraph, cap: int) -> list[list[tuple[int, bool]]]:
    """Node-simple cycles as edge sequences (edge index, traversed forward?)."""
    adj: dict[int, list[tuple[int, bool]]] = {}
    for k, (u, v, _, _) in enumerate(graph.edges):
        adj.setdefault(u, []).append((k, True))
        adj.setdefault(v, []).append((k, False))
    out: list[list[tuple[int, bool]]] = []
    seen: set[frozenset] = set()
    counter = 0

    def walk(start: int, node: int, path: list[tuple[int, bool]], visited: set[int]):
        nonlocal counter
        for (k, fwd) in adj.get(node, ()):
            counter += 1
            if counter > cap:
                raise ResourceCapError(cap)
            u, v, _, _ = graph.edges[k]
            nxt = v if fwd else u
            if path and k == path[-1][0]:
                continue
            if nxt == start and path:
                key = frozenset(e for e, _ in path + [(k, fwd)])
                if key not in seen:
                    seen.add(key)
                    out.append(path + [(k, fwd)])
            elif nxt > start and nxt not in visited:
                walk(start, nxt, path + [(k, fwd)], visited | {nxt})

    for start in range(len(graph.node_points)):
        walk(start, start, [], {start})
    return out


@dataclass
class CamcClass:
    """One congruence class of closed CAMC subcurves of the frontier."""

    class_id: int
    curve: ClosedCurve
    verdict: CamcVerdict
    arcs: ArcSpec
    n_members: int


def enumerate_closed_camc(integrand: Integrand, resolution: int = 256,
                          cap: int = 1_000_000, tol_camc: float = TOL_CAMC,
                          graph_resolution: int = 8192) -> list[CamcClass]:
    """All closed CAMC curves contained in the frontier, up to congruence.

    Builds the self-intersection graph, enumerates node-simple cycles, stitches
    and classifies each, and merges congruent survivors under the order-8
    dihedral action (point-set tolerance CONGRUENCE_TOL).
    """
    graph = build_frontier_graph(integrand, graph_resolution)
    sing = singular_set(integrand)
    if graph is None:
        whole = stitch(integrand, ArcSpec([(0.0, TWO_PI)]), resolution=max(resolution, 512),
                       singular=sing)
        verdict = classify(whole, tol_camc)
        if not verdict.is_camc:
            return []
        return [CamcClass(class_id=0, curve=whole, verdict=verdict,
                          arcs=ArcSpec([(0.0, TWO_PI)]), n_members=1)]

    cycles = _simple_cycles(graph, cap)
    survivors: list[tuple[ArcSpec, ClosedCurve, CamcVerdict]] = []
    for cyc in cycles:
        ivals = []
        for k, fwd in cyc:
            _, _, a, b = graph.edges[k]
            ivals.append((a, b) if fwd else (b, a))
        spec = ArcSpec(ivals)
        try:
            curve = stitch(integrand, spec, resolution=max(64, resolution), singular=sing)
            verdict = classify(curve, tol_camc)
        except ValidationError:
            continue
        if verdict.is_camc:
            survivors.append((spec, curve, verdict))

    mats = dihedral_group()
    classes: list[CamcClass] = []
    reps: list[np.ndarray] = []
    key = lambda s: (len(s[0].intervals), tuple(np.round(np.array(s[0].intervals), 10).ravel()))
    for spec, curve, verdict in sorted(survivors, key=key):
        pts = curve.points
        hit = None
        for i, rp in enumerate(reps):
            if any(pointset_hausdorff(pts @ m.T, rp) <= CONGRUENCE_TOL for m in mats):
                hit = i
                break
        if hit is None:
            reps.append(pts)
            classes.append(CamcClass(class_id=len(classes), curve=curve, verdict=verdict,
                                     arcs=spec, n_members=1))
        else:
            classes[hit].n_members += 1
    return classes


def curve_to_rows(curve: ClosedCurve):
    """CSV rows (s, x, y, nu_x, nu_y, Lambda, excluded-flag)."""
    seg = np.linalg.norm(np.roll(curve.points, -1, axis=0) - curve.points, axis=1)
    s = np.concatenate([[0.0], np.cumsum(seg)[:-1]])
    return [[s[k], curve.points[k, 0], curve.points[k, 1],
             curve.nu_out[k, 0], curve.nu_out[k, 1], curve.lam[k], int(curve.excluded[k])]
            for k in range(curve.n_samples)]


def verdict_to_json(verdict: CamcVerdict) -> dict:
    return {
        "status": verdict.status,
        "lambda": verdict.lam,
        "max_deviation": verdict.max_deviation,
        "junction_residual": verdict.junction_residual,
        "tolerance": verdict.tolerance,
        "per_arc": verdict.profile,
    }


def arcspec_to_file(spec: ArcSpec, path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.to_json(), fh, indent=2, sort_keys=True)
