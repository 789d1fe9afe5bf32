"""Surfaces of revolution over profile frontier curves.

A rotationally symmetric 3D integrand is the lift of a planar profile density
(substitute nu_1^2 -> nu_1^2 + nu_2^2 in the homogeneous extension). Meshes are
built by revolving the positive-x part of a stitched profile curve about the
vertical axis: per-vertex normals rotate the profile's outward normals, the
Cahn-Hoffman field is evaluated on those exact directions, and the anisotropic
shape operator is measured with parametric finite differences.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .curves import ArcSpec, ClosedCurve, stitch
from .errors import MeshError, ValidationError
from .frontier import frontier_points
from .integrand import Integrand

AXIS_TOL = 1e-9
POLE_WINDOW = 3
ROW_WINDOW = 3
TOL_CAMC_SURFACE = 1e-2
JUNCTION_TANGENT_TOL = 1e-6


def rotational_lift(profile: Integrand) -> Integrand:
    """Lift an n=1 density to the n=2 density of its surface of revolution.

    Requires the profile polynomial to be even in its first variable (mirror
    symmetry across the rotation axis); each x^(2a) z^c monomial becomes
    (x^2 + y^2)^a z^c.
    """
    if profile.n != 1:
        raise ValidationError("rotational_lift expects an n=1 profile")
    if np.any(profile.linear):
        raise ValidationError("rotational_lift does not support a linear offset")
    mono: dict[tuple, float] = {}
    for (ex, ez), c in zip(map(tuple, profile.exps), profile.coeffs):
        if ex % 2 != 0:
            raise ValidationError(
                "profile is not symmetric across the rotation axis "
                f"(odd power x^{ex}); the lift is undefined")
        a = ex // 2
        for i in range(a + 1):
            key = (2 * i, 2 * (a - i), ez)
            mono[key] = mono.get(key, 0.0) + float(c) * comb(a, i)
    kind = {"hexic2d": "hexic3d", "hexic2d-rotated": "hexic3d-rotated",
            "isotropic": "isotropic"}.get(profile.kind, f"{profile.kind}-lift")
    return Integrand.from_polynomial(mono, n=2, kind=kind,
                                     derivative_mode=profile.derivative_mode, h=profile.h)


def profile_of(integrand3d: Integrand) -> Integrand:
    """The planar profile density of a rotationally symmetric n=2 integrand."""
    if integrand3d.n != 2:
        raise ValidationError("profile_of expects an n=2 integrand")
    mono: dict[tuple, float] = {}
    for (ex, ey, ez), c in zip(map(tuple, integrand3d.exps), integrand3d.coeffs):
        if ey == 0:
            mono[(ex, ez)] = mono.get((ex, ez), 0.0) + float(c)
    kind = {"hexic3d": "hexic2d", "hexic3d-rotated": "hexic2d-rotated",
            "isotropic": "isotropic"}.get(integrand3d.kind, f"{integrand3d.kind}-profile")
    profile = Integrand.from_polynomial(mono, n=1, kind=kind,
                                        derivative_mode=integrand3d.derivative_mode,
                                        h=integrand3d.h)
    lifted = rotational_lift(profile)
    a = dict(zip(map(tuple, lifted.exps), lifted.coeffs))
    b = dict(zip(map(tuple, integrand3d.exps), integrand3d.coeffs))
    if any(abs(a.get(k, 0.0) - b.get(k, 0.0)) > 1e-12 for k in set(a) | set(b)):
        raise ValidationError("integrand is not rotationally symmetric about the vertical axis")
    return profile


@dataclass
class SurfaceMesh:
    """Parametric quad mesh of a revolved profile chain."""

    integrand: Integrand          # the n=2 density
    profile: ClosedCurve          # the stitched profile curve the rows came from
    row_theta: np.ndarray         # profile parameter per row
    row_sign: np.ndarray          # profile outward-normal sign per row
    row_excluded: np.ndarray      # rows excluded from curvature statistics
    junction_rows: list[int]
    junction_limits: list[tuple[float, float, float, float]]  # (theta_in, sign_in, theta_out, sign_out)
    rho: np.ndarray               # (nrho,)
    X: np.ndarray                 # (R, nrho, 3)
    nu: np.ndarray                # (R, nrho, 3)
    xi_tilde: np.ndarray          # (R, nrho, 3)
    closed_in_theta: bool         # torus topology (profile loop off the axis)
    pole_start: bool
    pole_end: bool
    row_arc: np.ndarray = None    # profile arc id per row (poles borrow their neighbour's)
    scale: float = 1.0            # homothety factor relative to the frontier profile
    S: np.ndarray = None          # (R, nrho, 2, 2) parametric shape operator
    lam: np.ndarray = None
    k1: np.ndarray = None
    k2: np.ndarray = None
    H2: np.ndarray = None
    discriminant: np.ndarray = None
    excluded: np.ndarray = None   # (R, nrho) vertex mask

    @property
    def shape(self) -> tuple[int, int]:
        return self.X.shape[0], self.X.shape[1]

    def scaled(self, r: float) -> "SurfaceMesh":
        m = SurfaceMesh(integrand=self.integrand, profile=self.profile,
                        row_theta=self.row_theta, row_sign=self.row_sign,
                        row_excluded=self.row_excluded, junction_rows=self.junction_rows,
                        junction_limits=self.junction_limits, rho=self.rho, X=r * self.X,
                        nu=self.nu, xi_tilde=self.xi_tilde,
                        closed_in_theta=self.closed_in_theta,
                        pole_start=self.pole_start, pole_end=self.pole_end,
                        row_arc=self.row_arc, scale=r * self.scale)
        anisotropic_shape_operator(m)
        return m


def _axis_crossing(profile: Integrand, t_in: float, t_bracket: float) -> float:
    """Parameter with xi_x = 0 between an inside sample and a bracketing parameter."""
    lo, hi = t_in, t_bracket
    flo = frontier_points(profile, np.array([lo]))[0, 0]
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        fm = frontier_points(profile, np.array([mid]))[0, 0]
        if flo * fm <= 0:
            hi = mid
        else:
            lo, flo = mid, fm
        if abs(hi - lo) < 1e-14:
            break
    return 0.5 * (lo + hi)


def mesh_frontier_surface(integrand3d: Integrand, arcs: ArcSpec,
                          grid: tuple[int, int] = (256, 256)) -> SurfaceMesh:
    """Revolve the positive-x part of a stitched profile curve about the vertical axis.

    The profile arcs come from the planar catalogue of the 3D integrand's
    profile density. Open chains must start and end on the axis (pole rows are
    collapsed); a profile loop entirely off the axis yields a torus. A chain
    ending off the axis does not close and is rejected.
    """
    ntheta, nrho = grid
    if ntheta < 16 or nrho < 8:
        raise ValidationError("grid must be at least 16 x 8")
    profile = profile_of(integrand3d)
    curve = stitch(profile, arcs, resolution=max(64, ntheta))
    x = curve.points[:, 0]
    n = curve.n_samples
    pos = x > AXIS_TOL

    if pos.all():
        run = np.arange(n)
        closed = True
        pole_start = pole_end = False
        row_theta = curve.theta.copy()
        row_sign = curve.sign.copy()
        row_pts = curve.points.copy()
        row_excluded = curve.excluded.copy()
        row_arc = curve.arc_id.copy()
        sample_to_row = {int(s): int(s) for s in run}
    elif not pos.any():
        raise ValidationError("profile lies entirely at x <= 0; nothing to revolve")
    else:
        off = int(np.argmin(pos))  # rotate so a non-positive sample comes first
        runs, cur = [], []
        for j in ((np.arange(n) + off) % n):
            if pos[j]:
                cur.append(int(j))
            elif cur:
                runs.append(cur)
                cur = []
        if cur:
            runs.append(cur)
        if len(runs) != 1:
            raise ValidationError(
                f"profile has {len(runs)} positive-x components; revolve them separately")
        run = np.array(runs[0])
        if len(run) < 8:
            raise ValidationError("positive-x run is under 8 samples; raise the grid resolution")
        closed = False
        pole_start = pole_end = True
        first, last = int(run[0]), int(run[-1])
        # brackets one uniform parameter step beyond the run boundary, inside the same arc
        th_first = 2 * curve.theta[first] - curve.theta[int(run[1])]
        th_last = 2 * curve.theta[last] - curve.theta[int(run[-2])]
        th_a = _axis_crossing(profile, float(curve.theta[first]), float(th_first))
        th_b = _axis_crossing(profile, float(curve.theta[last]), float(th_last))
        row_theta = np.concatenate([[th_a], curve.theta[run], [th_b]])
        row_sign = np.concatenate([[curve.sign[first]], curve.sign[run], [curve.sign[last]]])
        row_pts = frontier_points(profile, row_theta)
        row_pts[0, 0] = 0.0
        row_pts[-1, 0] = 0.0
        row_excluded = np.concatenate([[True], curve.excluded[run], [True]])
        row_arc = np.concatenate([[curve.arc_id[first]], curve.arc_id[run], [curve.arc_id[last]]])
        sample_to_row = {int(s): r + 1 for r, s in enumerate(run)}

    R = len(row_theta)
    rho = np.linspace(0.0, 2 * np.pi, nrho, endpoint=False)
    cr, sr = np.cos(rho), np.sin(rho)
    px, py = row_pts[:, 0], row_pts[:, 1]
    X = np.empty((R, nrho, 3))
    X[:, :, 0] = px[:, None] * cr[None, :]
    X[:, :, 1] = px[:, None] * sr[None, :]
    X[:, :, 2] = py[:, None]

    nu2 = row_sign[:, None] * np.stack([np.cos(row_theta), np.sin(row_theta)], axis=-1)
    nu = np.empty_like(X)
    nu[:, :, 0] = nu2[:, 0][:, None] * cr[None, :]
    nu[:, :, 1] = nu2[:, 0][:, None] * sr[None, :]
    nu[:, :, 2] = nu2[:, 1][:, None]
    xi_t = integrand3d.xi(nu.reshape(-1, 3)).reshape(nu.shape)

    junction_rows, junction_limits = [], []
    for j, (t_in, t_out) in zip(curve.junctions, curve.junction_params):
        if int(j) in sample_to_row:
            r = sample_to_row[int(j)]
            junction_rows.append(int(r))
            s_in = float(curve.sign[(j - 1) % n])
            s_out = float(curve.sign[j % n])
            junction_limits.append((float(t_in), s_in, float(t_out), s_out))
    for r in junction_rows:
        for w in range(-ROW_WINDOW, ROW_WINDOW + 1):
            rr = (r + w) % R if closed else r + w
            if 0 <= rr < R:
                row_excluded[rr] = True
    if not closed:
        row_excluded[:POLE_WINDOW + 1] = True
        row_excluded[-(POLE_WINDOW + 1):] = True

    mesh = SurfaceMesh(integrand=integrand3d, profile=curve, row_theta=row_theta,
                       row_sign=row_sign, row_excluded=row_excluded,
                       junction_rows=junction_rows, junction_limits=junction_limits,
                       rho=rho, X=X, nu=nu, xi_tilde=xi_t, closed_in_theta=closed,
                       pole_start=pole_start, pole_end=pole_end, row_arc=row_arc)
    anisotropic_shape_operator(mesh)
    return mesh


def anisotropic_shape_operator(mesh: SurfaceMesh) -> None:
    """Per-vertex S = -(d xi~)(dX)^-1 in the parametric basis, plus its invariants."""
    X, xi_t = mesh.X, mesh.xi_tilde
    R, nr = mesh.shape

    def dtheta(F):
        out = np.empty_like(F)
        if mesh.closed_in_theta:
            out[:] = (np.roll(F, -1, axis=0) - np.roll(F, 1, axis=0)) / 2.0
        else:
            out[1:-1] = (F[2:] - F[:-2]) / 2.0
            out[0] = F[1] - F[0]
            out[-1] = F[-1] - F[-2]
        return out

    def drho(F):
        return (np.roll(F, -1, axis=1) - np.roll(F, 1, axis=1)) / 2.0

    Xu, Xv = dtheta(X), drho(X)
    Ku, Kv = dtheta(xi_t), drho(xi_t)
    g11 = np.sum(Xu * Xu, axis=-1)
    g12 = np.sum(Xu * Xv, axis=-1)
    g22 = np.sum(Xv * Xv, axis=-1)
    b11 = np.sum(Xu * Ku, axis=-1)
    b12 = np.sum(Xu * Kv, axis=-1)
    b21 = np.sum(Xv * Ku, axis=-1)
    b22 = np.sum(Xv * Kv, axis=-1)
    det_g = g11 * g22 - g12 * g12

    excluded = np.repeat(mesh.row_excluded[:, None], nr, axis=1)
    degenerate = det_g <= 1e-18 * np.maximum(1.0, g11 + g22) ** 2
    bad = degenerate & ~excluded
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise MeshError(f"rank-deficient tangent at non-excluded vertex ({i}, {j})")
    safe = np.where(degenerate, 1.0, det_g)

    # S = -G^{-1} B with G the parametric metric and B = J^T dXi
    s11 = -(g22 * b11 - g12 * b21) / safe
    s12 = -(g22 * b12 - g12 * b22) / safe
    s21 = -(-g12 * b11 + g11 * b21) / safe
    s22 = -(-g12 * b12 + g11 * b22) / safe
    lam = 0.5 * (s11 + s22)
    H2 = s11 * s22 - s12 * s21
    disc = lam * lam - H2
    root = np.sqrt(np.maximum(disc, 0.0))

    mesh.S = np.stack([np.stack([s11, s12], axis=-1), np.stack([s21, s22], axis=-1)], axis=-2)
    mesh.lam = np.where(degenerate, np.nan, lam)
    mesh.H2 = np.where(degenerate, np.nan, H2)
    mesh.discriminant = np.where(degenerate, np.nan, disc)
    mesh.k1 = np.where(degenerate, np.nan, lam - root)
    mesh.k2 = np.where(degenerate, np.nan, lam + root)
    mesh.excluded = excluded | degenerate


@dataclass(frozen=True)
class SurfaceVerdict:
    is_camc: bool
    lam: float | None
    max_deviation: float
    junction_residual: float
    tolerance: float
    bands: list[dict]

    @property
    def status(self) -> str:
        return "CAMC" if self.is_camc else "NotCAMC"


def classify_surface(mesh: SurfaceMesh, tol_camc: float = TOL_CAMC_SURFACE) -> SurfaceVerdict:
    """CAMC iff Lambda is constant off excluded vertices and junction circles match.

    The junction condition asks the difference of the one-sided Cahn-Hoffman
    limits to lie along the junction circle's tangent line.
    """
    ok = ~mesh.excluded
    if ok.sum() < 16:
        raise ValidationError("too few usable vertices; raise the grid resolution")
    lam_in = mesh.lam[ok]
    med = float(np.median(lam_in))
    dev = float(np.max(np.abs(lam_in - med)))

    jres = 0.0
    for (t_in, s_in, t_out, s_out) in mesh.junction_limits:
        for rho in (0.0, 1.0):
            cr, sr = np.cos(rho), np.sin(rho)

            def to3(t, s):
                nx, ny = s * np.cos(t), s * np.sin(t)
                return np.array([nx * cr, nx * sr, ny])

            d = mesh.integrand.xi(to3(t_in, s_in)) - mesh.integrand.xi(to3(t_out, s_out))
            e_rho = np.array([-sr, cr, 0.0])
            resid = d - np.dot(d, e_rho) * e_rho
            jres = max(jres, float(np.linalg.norm(resid)))
    is_camc = dev <= tol_camc and jres <= JUNCTION_TANGENT_TOL

    # band statistics over contiguous runs of rows sharing the outward sign
    bands = []
    sgn = mesh.row_sign
    starts = [0] + [r for r in range(1, len(sgn)) if sgn[r] != sgn[r - 1]] + [len(sgn)]
    for a, b in zip(starts[:-1], starts[1:]):
        sel = np.zeros_like(mesh.excluded)
        sel[a:b, :] = True
        sel &= ~mesh.excluded
        if not sel.any():
            continue
        bands.append({
            "rows": [int(a), int(b - 1)],
            "sign": float(sgn[a]),
            "theta_range": [float(mesh.row_theta[a]), float(mesh.row_theta[b - 1])],
            "lambda_mean": float(np.mean(mesh.lam[sel])),
            "lambda_dev": float(np.max(np.abs(mesh.lam[sel] - np.median(mesh.lam[sel])))),
        })
    return SurfaceVerdict(is_camc=is_camc, lam=(med if is_camc else None), max_deviation=dev,
                          junction_residual=jres, tolerance=tol_camc, bands=bands)


def energy_of_surface(mesh: SurfaceMesh, integrand: Integrand | None = None) -> float:
    """Midpoint-rule quadrature of gamma(nu) against the surface area element.

    On regular theta-cells the exact parametric element of the revolved profile
    is used, |d xi/d theta| * radius * dtheta * drho at the cell centre; the few
    cells spanning a profile junction (where the parametrization jumps) fall
    back to triangle-split chord areas.
    """
    integrand = integrand or mesh.integrand
    profile = mesh.profile.integrand
    R, nr = mesh.shape
    rows = np.arange(R if mesh.closed_in_theta else R - 1)
    next_rows = (rows + 1) % R
    regular = mesh.row_arc[rows] == mesh.row_arc[next_rows]
    drho = 2.0 * np.pi / nr
    total = 0.0

    reg = rows[regular]
    if len(reg):
        th_mid = 0.5 * (mesh.row_theta[reg] + mesh.row_theta[(reg + 1) % R])
        dth = np.abs(mesh.row_theta[(reg + 1) % R] - mesh.row_theta[reg])
        speed = np.linalg.norm(profile.xi_prime(th_mid), axis=1)
        radius = frontier_points(profile, th_mid)[:, 0]
        element = mesh.scale ** 2 * speed * np.abs(radius) * dth * drho
        sgn = mesh.row_sign[reg]
        rho_mid = mesh.rho + drho / 2.0
        nx = sgn[:, None] * np.cos(th_mid)[:, None]
        nz = sgn[:, None] * np.sin(th_mid)[:, None]
        nmid = np.stack([nx * np.cos(rho_mid)[None, :], nx * np.sin(rho_mid)[None, :],
                         np.broadcast_to(nz, (len(reg), nr))], axis=-1)
        g = integrand.gamma(nmid.reshape(-1, 3)).reshape(len(reg), nr)
        total += float(np.sum(g * element[:, None]))
    irr = rows[~regular]
    if len(irr):
        X = mesh.X
        A, B = X[irr], X[(irr + 1) % R]
        A2, B2 = np.roll(A, -1, axis=1), np.roll(B, -1, axis=1)
        t1 = 0.5 * np.linalg.norm(np.cross(B - A, A2 - A), axis=-1)
        t2 = 0.5 * np.linalg.norm(np.cross(B2 - A2, B2 - B), axis=-1)
        nsum = (mesh.nu[irr] + mesh.nu[(irr + 1) % R]
                + np.roll(mesh.nu[irr], -1, axis=1) + np.roll(mesh.nu[(irr + 1) % R], -1, axis=1))
        nmid = nsum / np.linalg.norm(nsum, axis=-1, keepdims=True)
        g = integrand.gamma(nmid.reshape(-1, 3)).reshape(t1.shape)
        total += float(np.sum(g * (t1 + t2)))
    return total


def surface_to_rows(mesh: SurfaceMesh):
    """CSV rows (i, j, theta, rho, Lambda, k1, k2, H2, excluded-flag)."""
    R, nr = mesh.shape
    return [[i, j, mesh.row_theta[i], mesh.rho[j], mesh.lam[i, j],
             mesh.k1[i, j], mesh.k2[i, j], mesh.H2[i, j], int(mesh.excluded[i, j])]
            for i in range(R) for j in range(nr)]


def surface_verdict_to_json(v: SurfaceVerdict) -> dict:
    return {
        "status": v.status,
        "lambda": v.lam,
        "max_deviation": v.max_deviation,
        "junction_residual": v.junction_residual,
        "tolerance": v.tolerance,
        "bands": v.bands,
    }
