"""Z-buffered software rasterizer with orthographic cameras.

Conventions: the camera sits on the unit sphere looking at the origin;
screen up is the projection of global +Z onto the image plane (+X when
the view direction is within 1e-6 of the Z axis); shading is Lambertian
with the light co-located with the camera, so a facet's intensity is the
absolute cosine between its normal and the view direction. Background is
0 and all pixel values land in [0, 1].
"""

from __future__ import annotations

import numpy as np

from .geometry import Mesh

_Z_ALIGN_EPS = 1e-6


def camera_basis(cam_position: np.ndarray):
    """Orthonormal (right, up, forward) for a camera looking at the origin."""
    cam = np.asarray(cam_position, dtype=np.float64)
    forward = -cam / np.linalg.norm(cam)
    up_hint = np.array([0.0, 0.0, 1.0])
    if abs(abs(forward @ up_hint) - 1.0) < _Z_ALIGN_EPS:
        up_hint = np.array([1.0, 0.0, 0.0])
    up = up_hint - (up_hint @ forward) * forward
    up /= np.linalg.norm(up)
    right = np.cross(forward, up)
    return right, up, forward


def render_view(mesh: Mesh, cam_position: np.ndarray, size: int) -> np.ndarray:
    """Rasterize one orthographic grayscale view of ``mesh``.

    The viewport maps camera-plane coordinates [-1, 1] onto ``size``
    pixels; meshes normalized to the unit sphere always project inside.
    Degenerate (zero-area) triangles are skipped.
    """
    right, up, forward = camera_basis(cam_position)
    image = np.zeros((size, size), dtype=np.float32)
    if len(mesh.triangles) == 0 or len(mesh.vertices) == 0:
        return image

    verts = mesh.vertices
    xs = verts @ right
    ys = verts @ up
    depth = verts @ forward

    # pixel centers: x in [-1,1] -> col, y flipped so +up is row 0
    half = size / 2.0
    px = (xs + 1.0) * half - 0.5
    py = (1.0 - ys) * half - 0.5

    zbuf = np.full((size, size), np.inf, dtype=np.float64)

    tri = mesh.triangles
    e1 = verts[tri[:, 1]] - verts[tri[:, 0]]
    e2 = verts[tri[:, 2]] - verts[tri[:, 0]]
    normals = np.cross(e1, e2)
    norm_len = np.linalg.norm(normals, axis=1)

    for t in range(len(tri)):
        if norm_len[t] == 0.0:
            continue
        i0, i1, i2 = tri[t]
        x0, x1, x2 = px[i0], px[i1], px[i2]
        y0, y1, y2 = py[i0], py[i1], py[i2]
        area = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        if area == 0.0:
            continue

        lo_c = max(int(np.ceil(min(x0, x1, x2))), 0)
        hi_c = min(int(np.floor(max(x0, x1, x2))), size - 1)
        lo_r = max(int(np.ceil(min(y0, y1, y2))), 0)
        hi_r = min(int(np.floor(max(y0, y1, y2))), size - 1)
        if lo_c > hi_c or lo_r > hi_r:
            continue

        cols = np.arange(lo_c, hi_c + 1)
        rows = np.arange(lo_r, hi_r + 1)
        cc, rr = np.meshgrid(cols, rows)

        w0 = (x1 - cc) * (y2 - rr) - (x2 - cc) * (y1 - rr)
        w1 = (x2 - cc) * (y0 - rr) - (x0 - cc) * (y2 - rr)
        w2 = (x0 - cc) * (y1 - rr) - (x1 - cc) * (y0 - rr)
        if area < 0:
            w0, w1, w2 = -w0, -w1, -w2
        inside = (w0 >= 0) & (w1 >= 0) & (w2 >= 0)
        if not inside.any():
            continue

        bary_sum = w0 + w1 + w2
        z = (w0 * depth[i0] + w1 * depth[i1] + w2 * depth[i2]) / np.where(bary_sum == 0, 1.0, bary_sum)
        shade = abs(normals[t] @ forward) / norm_len[t]

        sub_z = zbuf[lo_r : hi_r + 1, lo_c : hi_c + 1]
        win = inside & (z < sub_z)
        sub_z[win] = z[win]
        image[lo_r : hi_r + 1, lo_c : hi_c + 1][win] = shade

    return image
