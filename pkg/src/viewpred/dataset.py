"""Synthetic multi-view dataset: generation, persistence and view pairing.

A dataset is a directory holding ``manifest.json`` plus one raw file per
shape. Each raw file is the shape's 20 views as little-endian float32,
laid out [view][row][col]. The manifest records shape ids, class ids,
the train/test split, the view size and the camera rig.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .geometry import CameraRig, make_dodecahedron_rig, make_shape
from .render import render_view

N_VIEWS = 20


class DatasetError(IOError):
    """Missing or inconsistent on-disk dataset."""


@dataclass
class ViewSet:
    shape_id: int
    views: np.ndarray  # (20, W, W) float32 in [0,1]
    class_id: int


@dataclass
class ViewPair:
    current_index: int
    current: np.ndarray
    opposite: np.ndarray


@dataclass
class Dataset:
    viewsets: list[ViewSet]
    rig: CameraRig
    view_size: int
    split: dict[int, str]  # shape_id -> "train" | "test"

    def class_ids(self) -> dict[int, int]:
        return {vs.shape_id: vs.class_id for vs in self.viewsets}

    def subset(self, split_name: str) -> "Dataset":
        keep = [vs for vs in self.viewsets if self.split[vs.shape_id] == split_name]
        return Dataset(
            viewsets=keep,
            rig=self.rig,
            view_size=self.view_size,
            split={vs.shape_id: split_name for vs in keep},
        )


def view_pairs(vs: ViewSet, rig: CameraRig) -> list[ViewPair]:
    """One pair per view: the view itself plus its antipodal partner."""
    return [
        ViewPair(current_index=i, current=vs.views[i], opposite=vs.views[rig.opposite[i]])
        for i in range(len(vs.views))
    ]


def generate_dataset(classes: int = 4, train_per_class: int = 8, test_per_class: int = 4,
                     view_size: int = 64, seed: int = 0) -> Dataset:
    """Render every view of every generated shape, deterministically in ``seed``.

    Shape ids are sequential; within each class the first ``train_per_class``
    instances land in the train split and the remainder in test.
    """
    rig = make_dodecahedron_rig()
    viewsets = []
    split = {}
    shape_id = 0
    for class_id in range(classes):
        for instance in range(train_per_class + test_per_class):
            instance_seed = int(np.random.SeedSequence((seed, class_id, instance)).generate_state(1)[0])
            mesh = make_shape(class_id, seed=instance_seed)
            views = np.stack([render_view(mesh, pos, view_size) for pos in rig.positions])
            viewsets.append(ViewSet(shape_id=shape_id, views=views, class_id=class_id))
            split[shape_id] = "train" if instance < train_per_class else "test"
            shape_id += 1
    return Dataset(viewsets=viewsets, rig=rig, view_size=view_size, split=split)


def _shape_filename(shape_id: int) -> str:
    return f"shape_{shape_id:04d}.f32"


def save_dataset(ds: Dataset, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {
        "view_size": ds.view_size,
        "n_views": N_VIEWS,
        "rig_positions": ds.rig.positions.tolist(),
        "rig_opposite": ds.rig.opposite.tolist(),
        "shapes": [
            {
                "shape_id": vs.shape_id,
                "class_id": vs.class_id,
                "split": ds.split[vs.shape_id],
                "file": _shape_filename(vs.shape_id),
            }
            for vs in ds.viewsets
        ],
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1, sort_keys=True))
    for vs in ds.viewsets:
        arr = np.ascontiguousarray(vs.views, dtype="<f4")
        (out / _shape_filename(vs.shape_id)).write_bytes(arr.tobytes())


def load_dataset(in_dir) -> Dataset:
    root = Path(in_dir)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise DatasetError(f"no manifest.json under {root}")
    manifest = json.loads(manifest_path.read_text())
    size = manifest["view_size"]
    rig = CameraRig(
        positions=np.array(manifest["rig_positions"], dtype=np.float64),
        opposite=np.array(manifest["rig_opposite"], dtype=np.int64),
    )
    viewsets = []
    split = {}
    for entry in manifest["shapes"]:
        blob = (root / entry["file"]).read_bytes()
        expected = manifest["n_views"] * size * size * 4
        if len(blob) != expected:
            raise DatasetError(
                f"{entry['file']}: expected {expected} bytes for "
                f"{manifest['n_views']}x{size}x{size} float32, got {len(blob)}"
            )
        views = np.frombuffer(blob, dtype="<f4").reshape(manifest["n_views"], size, size).copy()
        viewsets.append(ViewSet(shape_id=entry["shape_id"], views=views, class_id=entry["class_id"]))
        split[entry["shape_id"]] = entry["split"]
    return Dataset(viewsets=viewsets, rig=rig, view_size=size, split=split)


def manifest_hash(in_dir) -> str:
    import hashlib

    text = (Path(in_dir) / "manifest.json").read_text()
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
