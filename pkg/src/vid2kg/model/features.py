"""Per-video feature ingestion.

Feature files are JSONL with one entry per video, either a flat encoding
`{"video_id": ..., "features": [...]}` or a frame stack
`{"video_id": ..., "frames": [[...], ...]}` pooled through learnable
weights at access time.
"""

from __future__ import annotations

import json

import numpy as np

from vid2kg.dataset import video_rng
from vid2kg.errors import DataError


def pool_frames(frames, w) -> np.ndarray:
    """Weighted sum of frame vectors: sum_i w_i * frame_i."""
    frames = np.asarray(frames, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if frames.ndim != 2:
        raise DataError("frames must be a 2-d array of frame vectors")
    if w.shape != (frames.shape[0],):
        raise DataError(
            f"pooling weights have length {w.shape}, expected {frames.shape[0]}"
        )
    return frames.T @ w


class FeatureStore:
    """video_id -> encoding, some entries stored as unpooled frame stacks."""

    def __init__(self, dim: int, vectors=None, frames=None):
        self.dim = int(dim)
        self.vectors: dict[str, np.ndarray] = {}
        self.frames: dict[str, np.ndarray] = {}
        count = None
        for vid, vec in (vectors or {}).items():
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.dim,):
                raise DataError(f"feature for {vid} is not length {self.dim}")
            self.vectors[vid] = arr
        for vid, stack in (frames or {}).items():
            arr = np.asarray(stack, dtype=np.float64)
            if arr.ndim != 2 or arr.shape[1] != self.dim:
                raise DataError(f"frames for {vid} are not rows of length {self.dim}")
            if vid in self.vectors:
                raise DataError(f"duplicate feature entry for {vid}")
            if count is None:
                count = arr.shape[0]
            elif arr.shape[0] != count:
                raise DataError(
                    f"frames for {vid} have {arr.shape[0]} rows, others have {count}"
                )
            self.frames[vid] = arr
        self.frame_count = count

    def __contains__(self, video_id) -> bool:
        return video_id in self.vectors or video_id in self.frames

    def __len__(self) -> int:
        return len(self.vectors) + len(self.frames)

    def video_ids(self) -> list[str]:
        return sorted([*self.vectors, *self.frames])

    def raw_frames(self, video_id):
        """The unpooled frame stack, or None for flat entries."""
        return self.frames.get(video_id)

    def get(self, video_id, pool_weights=None) -> np.ndarray:
        if video_id in self.vectors:
            return self.vectors[video_id]
        if video_id in self.frames:
            if pool_weights is None:
                raise DataError(
                    f"feature entry for {video_id} is a frame stack; "
                    "pooling weights are required"
                )
            return pool_frames(self.frames[video_id], pool_weights)
        raise DataError(f"no feature entry for video {video_id}")


def load_features(path) -> FeatureStore:
    vectors: dict[str, list] = {}
    frames: dict[str, list] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{where}: not valid JSON: {exc}") from exc
            if not isinstance(obj, dict) or "video_id" not in obj:
                raise DataError(f"{where}: missing key 'video_id'")
            vid = obj["video_id"]
            if vid in vectors or vid in frames:
                raise DataError(f"{where}: duplicate video_id {vid!r}")
            if ("features" in obj) == ("frames" in obj):
                raise DataError(
                    f"{where}: exactly one of 'features' or 'frames' is required"
                )
            if "features" in obj:
                row = obj["features"]
                row_dim = len(row)
                vectors[vid] = row
            else:
                stack = obj["frames"]
                if not stack:
                    raise DataError(f"{where}: empty frame list")
                row_dim = len(stack[0])
                frames[vid] = stack
            if dim is None:
                dim = row_dim
            elif row_dim != dim:
                raise DataError(
                    f"{where}: feature length {row_dim} differs from earlier {dim}"
                )
    if dim is None:
        raise DataError(f"{path}: no feature entries")
    try:
        return FeatureStore(dim, vectors, frames)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_features(store: FeatureStore, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for vid in store.video_ids():
            if vid in store.vectors:
                obj = {"video_id": vid, "features": store.vectors[vid].tolist()}
            else:
                obj = {"video_id": vid, "frames": store.frames[vid].tolist()}
            fh.write(json.dumps(obj, separators=(",", ":"), ensure_ascii=False) + "\n")


class RandomFeatureStore:
    """Seeded random encodings keyed by video id; the random-encoder ablation.

    Every lookup returns the same standard-normal vector for a given
    (seed, video_id), so training over it stays deterministic.
    """

    def __init__(self, dim: int, seed: int):
        if dim < 1:
            raise DataError("feature dimension must be positive")
        self.dim = int(dim)
        self.seed = int(seed)
        self.frame_count = None

    def __contains__(self, video_id) -> bool:
        return True

    def raw_frames(self, video_id):
        return None

    def get(self, video_id, pool_weights=None) -> np.ndarray:
        return video_rng(self.seed, video_id).standard_normal(self.dim)
