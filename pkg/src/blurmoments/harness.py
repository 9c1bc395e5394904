"""Dataset generation and evaluation harness.

A dataset is a gallery of sharp class images plus blurred queries
derived from them on a fixed grid of blur settings. The manifest
records, for every file, its class label and the exact blur parameters,
so every experiment is reproducible from the manifest alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blur_synth import (LinearBlurParams, MarginError, RotationalBlurParams,
                         TimeSampling, synthesize_linear_blur,
                         synthesize_rotational_blur)
from .invariants import (FeatureVector, feature_distance, hu_invariants,
                         linear_blur_invariants, rmbmi)
from .moments import DegenerateImageError, moment_set
from .raster import Image, load_pgm, save_pgm

__all__ = [
    "DEFAULT_BLUR_GRID",
    "DatasetManifest",
    "ManifestEntry",
    "MatchResult",
    "RetrievalReport",
    "extract_features",
    "generate_dataset",
    "run_classification",
    "run_retrieval",
    "template_match",
]

FAMILY_ALIASES = {"linear": "linear_blur"}

# Displacements stay at or below 8 px and sweeps at or below 0.3 rad so
# the default grid is safe for the canonical 40 px margin corpus.
DEFAULT_BLUR_GRID = (
    {"kind": "linear", "a": 8.0, "b": 0.0, "T": 1.0},
    {"kind": "linear", "a": 5.0, "b": -5.0, "T": 1.0},
    {"kind": "linear", "a": -4.0, "b": 6.0, "T": 1.0},
    {"kind": "rotational", "omega": 0.15, "T": 1.0},
    {"kind": "rotational", "omega": -0.25, "T": 1.0},
    {"kind": "rotational", "omega": 0.3, "T": 1.0},
)


@dataclass(frozen=True)
class ManifestEntry:
    """One image of a dataset: a gallery exemplar or a blurred query."""

    id: str
    class_label: str
    path: str
    blur_kind: str = "none"
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.blur_kind not in ("none", "linear", "rotational"):
            raise ValueError(f"unknown blur kind {self.blur_kind!r}")


@dataclass(frozen=True)
class DatasetManifest:
    """All entries of a dataset plus bookkeeping about skipped images."""

    entries: tuple
    seed: int = 0
    skipped: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        object.__setattr__(self, "skipped", tuple(self.skipped))
        ids = [e.id for e in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate entry ids in manifest")

    def gallery(self) -> tuple:
        return tuple(e for e in self.entries if e.blur_kind == "none")

    def queries(self) -> tuple:
        return tuple(e for e in self.entries if e.blur_kind != "none")

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "skipped": list(self.skipped),
            "entries": [
                {
                    "id": e.id,
                    "class_label": e.class_label,
                    "path": e.path,
                    "blur_kind": e.blur_kind,
                    "params": dict(e.params),
                    "seed": e.seed,
                }
                for e in self.entries
            ],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "DatasetManifest":
        entries = tuple(
            ManifestEntry(
                id=str(item["id"]),
                class_label=str(item["class_label"]),
                path=str(item["path"]),
                blur_kind=str(item.get("blur_kind", "none")),
                params=dict(item.get("params", {})),
                seed=int(item.get("seed", 0)),
            )
            for item in obj["entries"]
        )
        return cls(entries=entries, seed=int(obj.get("seed", 0)),
                   skipped=tuple(obj.get("skipped", ())))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2,
                                         sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def _canonical_family(family: str) -> str:
    name = FAMILY_ALIASES.get(family, family)
    if name not in ("hu6", "linear_blur", "rmbmi"):
        raise ValueError(f"unknown feature family {family!r}")
    return name


def extract_features(img: Image, family: str) -> FeatureVector:
    """Feature vector of the requested family for one image."""
    name = _canonical_family(family)
    if name == "hu6":
        return hu_invariants(moment_set(img, "normalized", 3))
    if name == "linear_blur":
        return linear_blur_invariants(moment_set(img, "central", 3))
    return rmbmi(moment_set(img, "raw", 4))


def _blur_from_params(params: dict):
    kind = params.get("kind")
    rest = {k: v for k, v in params.items() if k not in ("kind", "n_samples")}
    if kind == "linear":
        return synthesize_linear_blur, LinearBlurParams(**rest)
    if kind == "rotational":
        center = rest.pop("center", (0.0, 0.0))
        return synthesize_rotational_blur, RotationalBlurParams(
            center=tuple(center), **rest)
    raise ValueError(f"unknown blur kind {kind!r}")


def generate_dataset(base_dir, out_dir, blur_grid=DEFAULT_BLUR_GRID,
                     n_samples: int = 201, seed: int = 0) -> DatasetManifest:
    """Blur every PGM under ``base_dir`` with every grid setting.

    Query images and ``manifest.json`` land in ``out_dir``. Images whose
    content would be pushed off the canvas by a setting are skipped for
    that setting and recorded in ``skipped``. The whole procedure is
    deterministic: rerunning it writes byte-identical files.
    """
    base = Path(base_dir)
    sources = sorted(base.glob("*.pgm"))
    if len(sources) < 2:
        raise ValueError(f"need at least 2 gallery images, found {len(sources)}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    sampling = TimeSampling(n_samples=n_samples)
    entries = []
    skipped = []
    for src_path in sources:
        label = src_path.stem
        entries.append(ManifestEntry(id=label, class_label=label,
                                     path=str(src_path.resolve()), seed=seed))
        img = load_pgm(src_path)
        for gi, grid_params in enumerate(blur_grid):
            synth, params = _blur_from_params(grid_params)
            try:
                blurred = synth(img, params, sampling)
            except MarginError as exc:
                skipped.append(f"{label} grid {gi}: {exc}")
                continue
            qpath = out / f"{label}__q{gi:02d}.pgm"
            save_pgm(blurred, qpath, maxval=65535)
            recorded = dict(grid_params)
            recorded["n_samples"] = n_samples
            entries.append(ManifestEntry(
                id=f"{label}__q{gi:02d}", class_label=label,
                path=str(qpath.resolve()),
                blur_kind=str(grid_params["kind"]), params=recorded,
                seed=seed))

    manifest = DatasetManifest(entries=tuple(entries), seed=seed,
                               skipped=tuple(skipped))
    manifest.save(out / "manifest.json")
    return manifest


def _check_gallery(manifest: DatasetManifest) -> tuple:
    gallery = manifest.gallery()
    if not gallery:
        raise ValueError("manifest has no gallery entries")
    labels = {e.class_label for e in gallery}
    for q in manifest.queries():
        if q.class_label not in labels:
            raise ValueError(
                f"query class {q.class_label!r} has no gallery entry")
    return gallery


def _entry_features(entry: ManifestEntry, family: str):
    try:
        return extract_features(load_pgm(entry.path), family)
    except DegenerateImageError:
        return None


@dataclass(frozen=True)
class RetrievalReport:
    """Ranking quality of blurred queries against the sharp gallery."""

    family: str
    precision_at_1: float
    precision_at_5: float
    mean_reciprocal_rank: float
    n_scored: int
    excluded: tuple
    per_query: tuple

    def to_json_dict(self) -> dict:
        return {
            "family": self.family,
            "precision_at_1": self.precision_at_1,
            "precision_at_5": self.precision_at_5,
            "mean_reciprocal_rank": self.mean_reciprocal_rank,
            "n_scored": self.n_scored,
            "excluded": list(self.excluded),
            "per_query": [dict(row) for row in self.per_query],
        }


def _ranked_gallery(query_feat, gallery_feats):
    pairs = []
    for gid, _glabel, gfeat in gallery_feats:
        pairs.append((feature_distance(query_feat, gfeat), gid))
    pairs.sort(key=lambda t: (t[0], t[1]))
    return pairs


def _score_queries(manifest: DatasetManifest, family: str):
    name = _canonical_family(family)
    gallery = _check_gallery(manifest)
    gallery_feats = []
    for entry in gallery:
        feat = _entry_features(entry, name)
        if feat is None:
            raise ValueError(f"gallery entry {entry.id!r} is degenerate")
        gallery_feats.append((entry.id, entry.class_label, feat))
    label_of = {gid: glabel for gid, glabel, _ in gallery_feats}

    scored, excluded = [], []
    for entry in manifest.queries():
        feat = _entry_features(entry, name)
        if feat is None or not any(feat.valid):
            excluded.append(entry.id)
            continue
        scored.append((entry, _ranked_gallery(feat, gallery_feats)))
    return name, label_of, scored, excluded


def run_retrieval(manifest: DatasetManifest, family: str) -> RetrievalReport:
    """Rank the gallery for every query by feature distance.

    Queries whose feature vector has no valid component are excluded
    from the averages and listed in ``excluded``.
    """
    name, label_of, scored, excluded = _score_queries(manifest, family)
    per_query = []
    hits1 = hits5 = 0
    rr_sum = 0.0
    for entry, ranking in scored:
        ranked_ids = [gid for _, gid in ranking]
        rank_of_true = next(i + 1 for i, gid in enumerate(ranked_ids)
                            if label_of[gid] == entry.class_label)
        hits1 += rank_of_true == 1
        hits5 += rank_of_true <= 5
        rr_sum += 1.0 / rank_of_true
        per_query.append({
            "query_id": entry.id,
            "class_label": entry.class_label,
            "ranked_ids": ranked_ids,
            "rank_of_true": rank_of_true,
            "top_distance": ranking[0][0],
        })
    n = len(scored)
    return RetrievalReport(
        family=name,
        precision_at_1=hits1 / n if n else 0.0,
        precision_at_5=hits5 / n if n else 0.0,
        mean_reciprocal_rank=rr_sum / n if n else 0.0,
        n_scored=n,
        excluded=tuple(excluded),
        per_query=tuple(per_query),
    )


def run_classification(manifest: DatasetManifest, family: str,
                       k: int = 1) -> float:
    """k-nearest-neighbor accuracy of the queries against the gallery.

    Vote ties break toward the tied class with the smallest mean
    distance among its voters, then lexicographically. Queries with no
    valid feature are excluded from the denominator, as in retrieval.
    """
    _name, label_of, scored, _excluded = _score_queries(manifest, family)
    n_gallery = len(label_of)
    if not 1 <= k <= n_gallery:
        raise ValueError(f"k={k} outside 1..{n_gallery} (gallery size)")

    correct = 0
    for entry, ranking in scored:
        votes: dict = {}
        for dist, gid in ranking[:k]:
            votes.setdefault(label_of[gid], []).append(dist)
        predicted = min(
            votes.items(),
            key=lambda kv: (-len(kv[1]), sum(kv[1]) / len(kv[1]), kv[0]),
        )[0]
        correct += predicted == entry.class_label
    return correct / len(scored) if scored else 0.0


@dataclass(frozen=True)
class MatchResult:
    """Best window of a sliding-window template search."""

    row: int
    col: int
    distance: float


def _circular_mask(height: int, width: int) -> np.ndarray:
    rows = np.arange(height, dtype=np.float64)[:, None] - (height - 1) / 2.0
    cols = np.arange(width, dtype=np.float64)[None, :] - (width - 1) / 2.0
    radius = min(height, width) / 2.0
    return (rows * rows + cols * cols <= radius * radius).astype(np.float64)


def template_match(scene: Image, template: Image, stride: int = 1,
                   family: str = "linear_blur") -> MatchResult:
    """Scan ``scene`` for the window closest to ``template`` in feature space.

    Rotation features are computed under a centered circular mask so a
    window sees the same support at any template orientation. Distance
    ties resolve to the topmost, then leftmost window.
    """
    name = _canonical_family(family)
    if stride < 1:
        raise ValueError("stride must be at least 1")
    th, tw = template.height, template.width
    if th > scene.height or tw > scene.width:
        raise ValueError("template larger than scene")

    mask = _circular_mask(th, tw) if name == "rmbmi" else None

    def features_of(pixels):
        arr = pixels * mask if mask is not None else pixels
        try:
            feat = extract_features(Image(arr), name)
        except DegenerateImageError:
            return None
        return feat if any(feat.valid) else None

    tfeat = features_of(template.pixels)
    if tfeat is None:
        raise ValueError("degenerate image: template has no usable features")

    best = None
    scene_px = scene.pixels
    for r0 in range(0, scene.height - th + 1, stride):
        for c0 in range(0, scene.width - tw + 1, stride):
            wfeat = features_of(scene_px[r0:r0 + th, c0:c0 + tw])
            dist = math.inf if wfeat is None else feature_distance(tfeat, wfeat)
            if best is None or dist < best.distance:
                best = MatchResult(row=r0, col=c0, distance=dist)
    return best
