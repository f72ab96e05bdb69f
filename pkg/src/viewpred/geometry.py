"""Procedural triangle meshes and the 20-camera antipodal rig.

Shapes stand in for scanned models: four tessellated primitives with a
per-instance anisotropic squash and a little vertex jitter, normalized to
the unit sphere. Cameras sit at the vertices of a regular dodecahedron,
built so each position's antipode is present by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

CLASS_NAMES = ("box", "sphere", "cylinder", "cone")

SCALE_RANGE = (0.6, 1.0)
JITTER_STD = 0.01


class ConfigError(ValueError):
    """A configuration value is outside its allowed domain."""


@dataclass
class Mesh:
    vertices: np.ndarray  # (N, 3) float64, model coordinates
    triangles: np.ndarray  # (M, 3) int vertex indices
    class_id: int

    def max_norm(self) -> float:
        return float(np.linalg.norm(self.vertices, axis=1).max())


@dataclass
class CameraRig:
    positions: np.ndarray  # (20, 3) unit vectors
    opposite: np.ndarray  # (20,) permutation, opposite[i] is i's antipode

    def __len__(self):
        return len(self.positions)


def make_dodecahedron_rig() -> CameraRig:
    """Cameras at the 20 dodecahedron vertices, normalized to unit length.

    The first 10 entries cover one vertex per antipodal pair; entries
    10..19 are their exact negations, so opposite[i] = (i + 10) mod 20.
    """
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    inv = 1.0 / phi
    half = [
        (1, 1, 1), (1, 1, -1), (1, -1, 1), (1, -1, -1),
        (0, inv, phi), (0, inv, -phi),
        (inv, phi, 0), (-inv, phi, 0),
        (phi, 0, inv), (phi, 0, -inv),
    ]
    base = np.array(half, dtype=np.float64)
    base /= np.linalg.norm(base, axis=1, keepdims=True)
    positions = np.vstack([base, -base])
    opposite = (np.arange(20) + 10) % 20
    return CameraRig(positions=positions, opposite=opposite)


def _box():
    corners = np.array(
        [[x, y, z] for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)], dtype=np.float64
    )
    quads = [
        (0, 1, 3, 2), (4, 6, 7, 5),  # x = -1, x = +1
        (0, 4, 5, 1), (2, 3, 7, 6),  # y = -1, y = +1
        (0, 2, 6, 4), (1, 5, 7, 3),  # z = -1, z = +1
    ]
    tris = []
    for a, b, c, d in quads:
        tris.append((a, b, c))
        tris.append((a, c, d))
    return corners, np.array(tris, dtype=np.int64)


def _sphere(slices=16, stacks=12):
    verts = [(0.0, 0.0, 1.0)]
    for i in range(1, stacks):
        polar = math.pi * i / stacks
        z = math.cos(polar)
        r = math.sin(polar)
        for j in range(slices):
            az = 2 * math.pi * j / slices
            verts.append((r * math.cos(az), r * math.sin(az), z))
    verts.append((0.0, 0.0, -1.0))
    south = len(verts) - 1

    def ring(i, j):
        return 1 + (i - 1) * slices + (j % slices)

    tris = []
    for j in range(slices):
        tris.append((0, ring(1, j), ring(1, j + 1)))
        tris.append((south, ring(stacks - 1, j + 1), ring(stacks - 1, j)))
    for i in range(1, stacks - 1):
        for j in range(slices):
            a, b = ring(i, j), ring(i, j + 1)
            c, d = ring(i + 1, j), ring(i + 1, j + 1)
            tris.append((a, c, b))
            tris.append((b, c, d))
    return np.array(verts, dtype=np.float64), np.array(tris, dtype=np.int64)


def _cylinder(slices=20):
    verts = []
    for z in (1.0, -1.0):
        for j in range(slices):
            az = 2 * math.pi * j / slices
            verts.append((math.cos(az), math.sin(az), z))
    top_center = len(verts)
    verts.append((0.0, 0.0, 1.0))
    bottom_center = len(verts)
    verts.append((0.0, 0.0, -1.0))

    tris = []
    for j in range(slices):
        a, b = j, (j + 1) % slices
        c, d = slices + j, slices + (j + 1) % slices
        tris.append((a, c, b))
        tris.append((b, c, d))
        tris.append((top_center, a, b))
        tris.append((bottom_center, d, c))
    return np.array(verts, dtype=np.float64), np.array(tris, dtype=np.int64)


def _cone(slices=20):
    verts = [(0.0, 0.0, 1.0)]
    for j in range(slices):
        az = 2 * math.pi * j / slices
        verts.append((math.cos(az), math.sin(az), -1.0))
    center = len(verts)
    verts.append((0.0, 0.0, -1.0))

    tris = []
    for j in range(slices):
        a, b = 1 + j, 1 + (j + 1) % slices
        tris.append((0, a, b))
        tris.append((center, b, a))
    return np.array(verts, dtype=np.float64), np.array(tris, dtype=np.int64)


_GENERATORS = (_box, _sphere, _cylinder, _cone)


def make_shape(class_id: int, seed: int) -> Mesh:
    """A jittered, anisotropically squashed instance of one base primitive.

    Deterministic in (class_id, seed); the result is normalized so the
    largest vertex norm is exactly 1.
    """
    if not 0 <= class_id < len(_GENERATORS):
        raise ConfigError(f"class_id must be in [0, {len(_GENERATORS)}), got {class_id}")
    verts, tris = _GENERATORS[class_id]()
    rng = np.random.default_rng(np.random.SeedSequence((class_id, seed)))
    scale = rng.uniform(SCALE_RANGE[0], SCALE_RANGE[1], size=3)
    verts = verts * scale
    verts = verts + rng.normal(0.0, JITTER_STD, size=verts.shape)
    verts /= np.linalg.norm(verts, axis=1).max()
    return Mesh(vertices=verts, triangles=tris, class_id=class_id)
