"""Deterministic report writers: JSON/CSV with fixed float formatting, SVG figures, OBJ.

Floats are rendered with 17 significant digits and JSON keys are sorted, so
identical inputs produce byte-identical delimited output. Figures are drawn
with matplotlib onto a fixed data window and saved as SVG 1.1.
"""
from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

matplotlib.rcParams["svg.hashsalt"] = "camckit"

VIEW = 1.3  # data window [-VIEW, VIEW]^2 for curve figures


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if np.isnan(v):
            return '"nan"'
        if np.isinf(v):
            return '"inf"' if v > 0 else '"-inf"'
        return format(v, ".17g")
    raise TypeError(f"not a scalar: {type(x)}")


def _json_dumps(obj, indent=0) -> str:
    pad = "  " * indent
    pad2 = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return '"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(obj, (bool, np.bool_, int, np.integer, float, np.floating)):
        return fmt(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        inner = ",\n".join(pad2 + _json_dumps(v, indent + 1) for v in obj)
        return "[\n" + inner + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = sorted(obj.items(), key=lambda kv: kv[0])
        inner = ",\n".join(f'{pad2}"{k}": ' + _json_dumps(v, indent + 1) for k, v in items)
        return "{\n" + inner + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)}")


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        fh.write(_json_dumps(obj) + "\n")


def write_csv(path, header: list[str], rows) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) for v in row) + "\n")


def _new_axes():
    fig, ax = plt.subplots(figsize=(6, 6))
    ax.set_xlim(-VIEW, VIEW)
    ax.set_ylim(-VIEW, VIEW)
    ax.set_aspect("equal")
    ax.axhline(0, color="0.85", lw=0.6, zorder=0)
    ax.axvline(0, color="0.85", lw=0.6, zorder=0)
    return fig, ax


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def render_frontier_svg(path, frontier, singular=None, crossings=None) -> None:
    """The frontier polyline, solid where det A < 0 and dashed where det A > 0."""
    fig, ax = _new_axes()
    pts = np.vstack([frontier.points, frontier.points[:1]])
    neg = frontier.detA < 0
    for mask, style in ((neg, "-"), (~neg, "--")):
        seg = pts[:-1][mask]
        # draw as disconnected dots-in-order to keep styling simple and robust
        runs = np.split(np.nonzero(mask)[0], np.nonzero(np.diff(np.nonzero(mask)[0]) > 1)[0] + 1)
        for run in runs:
            if len(run) > 1:
                ax.plot(frontier.points[run, 0], frontier.points[run, 1], style,
                        color="tab:blue", lw=1.2)
    if singular is not None and len(singular.roots):
        ax.plot(singular.images[:, 0], singular.images[:, 1], "o", ms=5,
                color="tab:red", label="singular images")
    if crossings:
        inner = np.array([c.point for c in crossings if c.inner and not c.corner_coincidence])
        if len(inner):
            ax.plot(inner[:, 0], inner[:, 1], "s", ms=5, color="tab:green",
                    label="inner crossings")
    if (singular is not None and len(singular.roots)) or crossings:
        ax.legend(loc="upper right", fontsize=8)
    _save(fig, path)


def render_curve_svg(path, curve, title: str | None = None) -> None:
    """A stitched curve, solid on Lambda ~ -1 pieces and dashed on Lambda ~ +1 pieces."""
    fig, ax = _new_axes()
    for pid in np.unique(curve.piece_id):
        sel = curve.piece_id == pid
        lam_med = np.median(curve.lam[sel & ~curve.excluded]) if (sel & ~curve.excluded).any() else -1
        style = "-" if lam_med < 0 else "--"
        idx = np.nonzero(sel)[0]
        splits = np.nonzero(np.diff(idx) > 1)[0] + 1
        for run in np.split(idx, splits):
            ax.plot(curve.points[run, 0], curve.points[run, 1], style, color="tab:blue", lw=1.4)
    if curve.junctions:
        j = np.array(curve.junctions)
        ax.plot(curve.points[j, 0], curve.points[j, 1], "o", ms=4, color="tab:red")
    if title:
        ax.set_title(title, fontsize=9)
    _save(fig, path)


def render_wulff_svg(path, shape, arcs_polyline=None) -> None:
    fig, ax = _new_axes()
    ring = np.vstack([shape.vertices, shape.vertices[:1]])
    ax.plot(ring[:, 0], ring[:, 1], "-", color="tab:blue", lw=1.4, label="half-space clip")
    if arcs_polyline is not None:
        ax.plot(arcs_polyline[:, 0], arcs_polyline[:, 1], ":", color="tab:orange",
                lw=1.0, label="frontier arcs")
    ax.legend(loc="upper right", fontsize=8)
    _save(fig, path)


def render_classes_sheet(path, classes) -> None:
    """One panel per congruence class."""
    k = max(1, len(classes))
    cols = min(5, k)
    rows = (k + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 3 * rows), squeeze=False)
    for ax in axes.ravel():
        ax.set_xlim(-VIEW, VIEW)
        ax.set_ylim(-VIEW, VIEW)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
    for cl, ax in zip(classes, axes.ravel()):
        pts = np.vstack([cl.curve.points, cl.curve.points[:1]])
        ax.plot(pts[:, 0], pts[:, 1], "-", color="tab:blue", lw=1.1)
        ax.set_title(f"class {cl.class_id} ({len(cl.arcs.intervals)} arcs)", fontsize=8)
    _save(fig, path)


def write_obj(path, mesh) -> None:
    """Wavefront OBJ of a revolved mesh; pole rows collapse to single vertices."""
    R, nr = mesh.shape
    lines = ["# camckit surface of revolution"]
    index = np.zeros((R, nr), dtype=int)
    count = 0

    def vline(p):
        return "v " + " ".join(format(float(c), ".17g") for c in p)

    for i in range(R):
        collapse = (not mesh.closed_in_theta) and (
            (i == 0 and mesh.pole_start) or (i == R - 1 and mesh.pole_end))
        if collapse:
            count += 1
            lines.append(vline(mesh.X[i, 0]))
            index[i, :] = count
        else:
            for j in range(nr):
                count += 1
                lines.append(vline(mesh.X[i, j]))
                index[i, j] = count
    row_iter = range(R) if mesh.closed_in_theta else range(R - 1)
    for i in row_iter:
        i2 = (i + 1) % R
        for j in range(nr):
            j2 = (j + 1) % nr
            quad = [index[i, j], index[i2, j], index[i2, j2], index[i, j2]]
            uniq = list(dict.fromkeys(quad))
            if len(uniq) == 4:
                lines.append("f " + " ".join(map(str, quad)))
            elif len(uniq) == 3:
                lines.append("f " + " ".join(map(str, uniq)))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def ensure_dir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path
