"""Fixed five-view orthographic renderer emitting binary PPM (P6) images.

Views, in order: front, profile, plan, three-quarter starboard bow,
three-quarter port stern.  800x600, depth-shaded grayscale, byte-for-byte
deterministic for a given mesh.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import DomainError

WIDTH, HEIGHT = 800, 600
_MARGIN = 0.92

# (viewing direction d: from viewer toward the scene, up hint)
_VIEWS = (
    ("front", (-1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
    ("profile", (0.0, -1.0, 0.0), (0.0, 0.0, 1.0)),
    ("plan", (0.0, 0.0, -1.0), (0.0, 1.0, 0.0)),
    ("three_quarter_starboard_bow", (-1.0, -1.0, -0.5), (0.0, 0.0, 1.0)),
    ("three_quarter_port_stern", (1.0, 1.0, -0.5), (0.0, 0.0, 1.0)),
)


def _basis(direction, up_hint):
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    up = np.asarray(up_hint, dtype=float)
    right = np.cross(d, up)
    right = right / np.linalg.norm(right)
    true_up = np.cross(right, d)
    return right, true_up, -d  # screen-x, screen-y, toward-viewer


def _rasterize(mesh, direction, up_hint) -> np.ndarray:
    right, up, toward = _basis(direction, up_hint)
    v = mesh.vertices
    u_c = v @ right
    v_c = v @ up
    w_c = v @ toward

    span_u = np.ptp(u_c) or 1.0
    span_v = np.ptp(v_c) or 1.0
    scale = _MARGIN * min(WIDTH / span_u, HEIGHT / span_v)
    px = (u_c - u_c.min()) * scale
    py = (v_c - v_c.min()) * scale
    px += 0.5 * (WIDTH - px.max())
    py += 0.5 * (HEIGHT - py.max())

    w_min, w_span = w_c.min(), np.ptp(w_c) or 1.0
    shade = 0.30 + 0.65 * (w_c - w_min) / w_span  # nearer surfaces brighter

    depth = np.full((HEIGHT, WIDTH), -np.inf)
    image = np.zeros((HEIGHT, WIDTH))
    tris = mesh.faces
    xs = px[tris]
    ys = py[tris]
    ws = w_c[tris]
    ss = shade[tris]
    order = np.arange(len(tris))
    for t in order:
        x0, x1, x2 = xs[t]
        y0, y1, y2 = ys[t]
        lo_x = max(int(np.floor(min(x0, x1, x2))), 0)
        hi_x = min(int(np.ceil(max(x0, x1, x2))) + 1, WIDTH)
        lo_y = max(int(np.floor(min(y0, y1, y2))), 0)
        hi_y = min(int(np.ceil(max(y0, y1, y2))) + 1, HEIGHT)
        if lo_x >= hi_x or lo_y >= hi_y:
            continue
        area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if area == 0.0:
            continue
        gx, gy = np.meshgrid(np.arange(lo_x, hi_x) + 0.5,
                             np.arange(lo_y, hi_y) + 0.5)
        b0 = ((x1 - gx) * (y2 - gy) - (x2 - gx) * (y1 - gy)) / area
        b1 = ((x2 - gx) * (y0 - gy) - (x0 - gx) * (y2 - gy)) / area
        b2 = 1.0 - b0 - b1
        inside = (b0 >= 0) & (b1 >= 0) & (b2 >= 0)
        if not inside.any():
            continue
        w_px = b0 * ws[t, 0] + b1 * ws[t, 1] + b2 * ws[t, 2]
        s_px = b0 * ss[t, 0] + b1 * ss[t, 1] + b2 * ss[t, 2]
        tile_d = depth[lo_y:hi_y, lo_x:hi_x]
        tile_i = image[lo_y:hi_y, lo_x:hi_x]
        better = inside & (w_px > tile_d)
        tile_d[better] = w_px[better]
        tile_i[better] = s_px[better]
    # raster rows run top-down; screen y runs bottom-up
    return np.flipud(image)


def _write_ppm(path, image: np.ndarray) -> None:
    gray = np.clip(np.round(image * 255.0), 0, 255).astype(np.uint8)
    rgb = np.repeat(gray[:, :, None], 3, axis=2)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{WIDTH} {HEIGHT}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def render_views(mesh, out_dir, prefix: str = "view") -> list[str]:
    """Render the five standard views to `<out_dir>/<prefix>_1..5.ppm`."""
    if mesh.n_faces == 0:
        raise DomainError("cannot render an empty mesh")
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for i, (_, direction, up_hint) in enumerate(_VIEWS, start=1):
        image = _rasterize(mesh, direction, up_hint)
        path = os.path.join(out_dir, f"{prefix}_{i}.ppm")
        _write_ppm(path, image)
        paths.append(path)
    return paths
