"""Raw, central, and normalized geometric moments of an image.

The raw moment of order (p, q) is the sum over pixels of
``x^p * y^q * intensity`` with unit pixel area, coordinates taken from
the image's centered frame (optionally shifted to another origin).
Central moments are taken about the intensity centroid and are
translation invariant; normalized moments divide out total mass and
scale, ``eta_pq = u_pq / u00^((p+q)/2 + 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

import numpy as np

from . import _kernels
from .raster import Image

__all__ = [
    "Centroid",
    "DegenerateImageError",
    "MomentSet",
    "central_moment",
    "centroid",
    "moment_set",
    "moment_set_from_json_dict",
    "moment_set_to_json_dict",
    "normalized_central_moment",
    "raw_moment",
]

MOMENT_KINDS = ("raw", "central", "normalized")
MAX_SUPPORTED_ORDER = 8


class DegenerateImageError(ValueError):
    """Raised when an operation requires positive total mass and has none."""


@dataclass(frozen=True)
class Centroid:
    """Intensity centroid (m10/m00, m01/m00) in frame coordinates."""

    x: float
    y: float


@dataclass(frozen=True)
class MomentSet:
    """Triangular table of moments up to a maximum total order.

    ``values`` maps every index pair with p + q <= max_order to a real
    value, so it holds exactly (max_order+1)(max_order+2)/2 entries.
    ``origin`` is the frame point the moments are taken about: a fixed
    point for raw moments, the centroid for central and normalized
    kinds. For a central set the (1, 0) and (0, 1) entries are literal
    zeros by construction. A normalized set fills its below-order-2
    entries with their scale-free limits (1, 0, 0) to keep the table
    triangular.
    """

    kind: str
    max_order: int
    values: Mapping[tuple[int, int], float]
    origin: tuple[float, float]
    frame_note: str = field(default="")

    def __post_init__(self):
        if self.kind not in MOMENT_KINDS:
            raise ValueError(f"unknown moment kind {self.kind!r}")
        expected = (self.max_order + 1) * (self.max_order + 2) // 2
        if len(self.values) != expected:
            raise ValueError(
                f"moment table holds {len(self.values)} entries, "
                f"expected {expected} for max_order {self.max_order}"
            )
        object.__setattr__(self, "values", MappingProxyType(dict(self.values)))
        if self.kind in ("raw", "central") and not self.values[(0, 0)] > 0.0:
            raise ValueError(
                f"total-mass entry (0, 0) must be positive, "
                f"got {self.values[(0, 0)]!r}"
            )
        if self.kind == "central" and self.max_order >= 1:
            if self.values[(1, 0)] != 0.0 or self.values[(0, 1)] != 0.0:
                raise ValueError(
                    "central sets carry literal zero first-order entries"
                )
        if not self.frame_note:
            about = {
                "raw": f"raw moments about frame point {self.origin}",
                "central": "central moments about the intensity centroid",
                "normalized": "normalized central moments about the centroid",
            }[self.kind]
            object.__setattr__(self, "frame_note", about)

    def __getitem__(self, pq: tuple[int, int]) -> float:
        return self.values[pq]


def _index_pairs(max_order: int):
    for order in range(max_order + 1):
        for p in range(order, -1, -1):
            yield p, order - p


def _raw_table(img: Image, max_p: int, max_q: int,
               origin: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    frame = img.frame
    x = frame.x_coords() - origin[0]
    y = frame.y_coords() - origin[1]
    return _kernels.moment_table(img.pixels, x, y, max_p, max_q)


def raw_moment(img: Image, p: int, q: int) -> float:
    """Geometric moment m_pq about the frame origin.

    Parameters
    ----------
    img : Image
        Source image.
    p, q : int
        Non-negative exponents of x and y.

    Returns
    -------
    float
        Sum over pixels of ``x^p * y^q * intensity`` (unit pixel area).
    """
    if p < 0 or q < 0:
        raise ValueError("moment orders must be non-negative")
    return float(_raw_table(img, p, q)[p, q])


def centroid(img: Image) -> Centroid:
    """Intensity centroid of the image.

    Raises
    ------
    DegenerateImageError
        If the total mass m00 is not positive.
    """
    table = _raw_table(img, 1, 1)
    m00 = table[0, 0]
    if m00 <= 0.0:
        raise DegenerateImageError("degenerate image: total mass is zero")
    return Centroid(float(table[1, 0] / m00), float(table[0, 1] / m00))


def central_moment(img: Image, p: int, q: int) -> float:
    """Central moment u_pq about the centroid; (1,0) and (0,1) are 0."""
    if p < 0 or q < 0:
        raise ValueError("moment orders must be non-negative")
    if (p, q) in ((1, 0), (0, 1)):
        centroid(img)
        return 0.0
    c = centroid(img)
    return float(_raw_table(img, p, q, origin=(c.x, c.y))[p, q])


def normalized_central_moment(img: Image, p: int, q: int) -> float:
    """Normalized central moment eta_pq = u_pq / u00^((p+q)/2 + 1).

    Raises
    ------
    ValueError
        If p + q < 2; the normalization exponent is undefined below
        order 2 in this convention.
    """
    if p + q < 2:
        raise ValueError(
            "normalized moments are undefined below order 2 in this convention"
        )
    c = centroid(img)
    table = _raw_table(img, p, q, origin=(c.x, c.y))
    u00 = table[0, 0]
    return float(table[p, q] / u00 ** ((p + q) / 2.0 + 1.0))


def moment_set(img: Image, kind: str, max_order: int,
               origin: tuple[float, float] | None = None) -> MomentSet:
    """Batch evaluation of all moments with p + q <= max_order.

    Entry-by-entry consistent with the per-moment operations: each value
    is produced by the same kernel path, so e.g.
    ``moment_set(img, "raw", 4)[(2, 1)] == raw_moment(img, 2, 1)``
    exactly.

    Parameters
    ----------
    img : Image
        Source image.
    kind : {"raw", "central", "normalized"}
        Moment family.
    max_order : int
        Largest total order, at most 8.
    origin : pair of float, optional
        Frame point to take raw moments about (default: frame origin).
        Only valid for kind "raw"; central and normalized moments are
        always about the centroid.
    """
    if kind not in MOMENT_KINDS:
        raise ValueError(f"unknown moment kind {kind!r}")
    if not 0 <= max_order <= MAX_SUPPORTED_ORDER:
        raise ValueError(
            f"max_order must be in 0..{MAX_SUPPORTED_ORDER}, got {max_order}"
        )

    if kind == "raw":
        about = (0.0, 0.0) if origin is None else (float(origin[0]), float(origin[1]))
        table = _raw_table(img, max_order, max_order, origin=about)
        if table[0, 0] <= 0.0:
            raise DegenerateImageError("degenerate image: total mass is zero")
        values = {(p, q): float(table[p, q]) for p, q in _index_pairs(max_order)}
        return MomentSet("raw", max_order, values, about)

    if origin is not None:
        raise ValueError(f"{kind} moments are always about the centroid")
    c = centroid(img)
    table = _raw_table(img, max_order, max_order, origin=(c.x, c.y))
    values = {(p, q): float(table[p, q]) for p, q in _index_pairs(max_order)}
    if max_order >= 1:
        values[(1, 0)] = 0.0
        values[(0, 1)] = 0.0
    if kind == "central":
        return MomentSet("central", max_order, values, (c.x, c.y))

    u00 = values[(0, 0)]
    if u00 <= 0.0:
        raise DegenerateImageError("degenerate image: total mass is zero")
    for p, q in _index_pairs(max_order):
        if p + q >= 2:
            values[(p, q)] = values[(p, q)] / u00 ** ((p + q) / 2.0 + 1.0)
    values[(0, 0)] = 1.0
    return MomentSet("normalized", max_order, values, (c.x, c.y))


def moment_set_to_json_dict(ms: MomentSet) -> dict:
    """JSON-ready form: {kind, max_order, values: {"p,q": number}}."""
    return {
        "kind": ms.kind,
        "max_order": ms.max_order,
        "values": {f"{p},{q}": v for (p, q), v in sorted(ms.values.items())},
    }


def moment_set_from_json_dict(obj: dict,
                              origin: tuple[float, float] = (0.0, 0.0)) -> MomentSet:
    """Inverse of :func:`moment_set_to_json_dict`.

    The serialized form does not carry the origin, so raw sets default
    to the frame origin unless one is supplied.
    """
    values = {}
    for key, v in obj["values"].items():
        p_text, q_text = key.split(",")
        values[(int(p_text), int(q_text))] = float(v)
    return MomentSet(obj["kind"], int(obj["max_order"]), values, origin)
