"""Invariant feature families built from moment tables.

Three families:

* ``hu6``: the six similarity invariants of second and third order
  normalized central moments; a seventh dependent combination exists
  only to exercise its algebraic identity with the others.
* ``linear_blur``: the four third-order central moments, which ride
  through linear motion blur unchanged.
* ``rmbmi``: seven combinations of raw moments about the rotation
  pivot that are unchanged by rotational motion blur; five of them are
  ratios and get masked invalid when their denominators collapse
  (centered or symmetric content).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .moments import MomentSet

__all__ = [
    "FeatureVector",
    "feature_distance",
    "hu_dependency_residual",
    "hu_invariants",
    "linear_blur_invariants",
    "rmbmi",
]

FAMILIES = ("hu6", "linear_blur", "rmbmi")

# A ratio feature is masked invalid when its denominator magnitude is
# below this fraction of the numerator's characteristic product scale
# (moments replaced by m00 * radius^order with the RMS content radius).
DENOMINATOR_EPS = 1e-9

# Distance regularizer; keeps the relative difference finite at 0/0.
DISTANCE_EPS = 1e-12

_RESIDUAL_FLOOR = 1e-300


@dataclass(frozen=True)
class FeatureVector:
    """Ordered named feature values with a per-entry validity mask.

    Invalid entries (collapsed denominators) carry a placeholder value
    and never enter distances.
    """

    family: str
    names: tuple[str, ...]
    values: tuple[float, ...]
    valid: tuple[bool, ...]

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown feature family {self.family!r}")
        if not (len(self.names) == len(self.values) == len(self.valid)):
            raise ValueError("names, values, and validity mask differ in length")

    def as_dict(self) -> dict:
        return {
            "family": self.family,
            "names": list(self.names),
            "values": [float(v) for v in self.values],
            "valid": list(self.valid),
        }


def _require_order(ms: MomentSet, needed: int, what: str) -> None:
    if ms.max_order < needed:
        raise ValueError(
            f"insufficient order for {what}: have {ms.max_order}, need {needed}"
        )


def _hu_terms(ms: MomentSet) -> tuple[float, ...]:
    if ms.kind not in ("normalized", "central"):
        raise ValueError(
            f"normalized or central moment set required, got kind {ms.kind!r}"
        )
    _require_order(ms, 3, "similarity invariants")
    n20, n02, n11 = ms[(2, 0)], ms[(0, 2)], ms[(1, 1)]
    n30, n03 = ms[(3, 0)], ms[(0, 3)]
    n21, n12 = ms[(2, 1)], ms[(1, 2)]

    da = n30 - 3.0 * n12
    db = 3.0 * n21 - n03
    sa = n30 + n12
    sb = n21 + n03
    cube_a = sa * sa - 3.0 * sb * sb
    cube_b = 3.0 * sa * sa - sb * sb

    phi1 = n20 + n02
    phi2 = (n20 - n02) ** 2 + 4.0 * n11 * n11
    phi3 = da * da + db * db
    phi4 = sa * sa + sb * sb
    phi5 = da * sa * cube_a + db * sb * cube_b
    phi6 = (n20 - n02) * (sa * sa - sb * sb) + 4.0 * n11 * sa * sb
    phi7 = db * sa * cube_a - da * sb * cube_b
    return phi1, phi2, phi3, phi4, phi5, phi6, phi7


def hu_invariants(ms: MomentSet, include_phi7: bool = False) -> FeatureVector:
    """Similarity invariants phi1..phi6 of a normalized (or central)
    moment set.

    ``include_phi7`` appends the dependent seventh combination; it adds
    no discriminative information (see :func:`hu_dependency_residual`)
    and exists for identity testing.
    """
    phis = _hu_terms(ms)
    count = 7 if include_phi7 else 6
    names = tuple(f"phi{i}" for i in range(1, count + 1))
    return FeatureVector("hu6", names, tuple(phis[:count]), (True,) * count)


def hu_dependency_residual(ms: MomentSet) -> float:
    """Normalized residual of the identity phi7^2 = phi3 phi4^3 - phi5^2.

    The residual is |phi7^2 - (phi3 phi4^3 - phi5^2)| divided by the
    largest of the three squared terms (with a tiny floor so the
    all-zero degenerate case returns 0).
    """
    _, _, phi3, phi4, phi5, _, phi7 = _hu_terms(ms)
    lhs = phi7 * phi7
    cube_term = phi3 * phi4 ** 3
    rhs = cube_term - phi5 * phi5
    scale = max(lhs, abs(cube_term), phi5 * phi5, _RESIDUAL_FLOOR)
    return abs(lhs - rhs) / scale


def linear_blur_invariants(ms: MomentSet) -> FeatureVector:
    """The four third-order central moments (u30, u21, u12, u03).

    Linear motion blur of any velocity and exposure leaves these
    unchanged; see the propagation coefficients.
    """
    if ms.kind != "central":
        raise ValueError(f"central moment set required, got kind {ms.kind!r}")
    _require_order(ms, 3, "third-order blur invariants")
    names = ("u30", "u21", "u12", "u03")
    values = tuple(ms[(3 - k, k)] for k in range(4))
    return FeatureVector("linear_blur", names, values, (True,) * 4)


def rmbmi(ms: MomentSet) -> FeatureVector:
    """Rotational-blur invariants from raw moments about the pivot.

    The first two are plain combinations (the quadratic and quartic
    radial moments); the remaining five are ratios whose numerator and
    denominator rescale identically under a rotational sweep. Ratio
    entries are masked invalid when the denominator magnitude falls
    below ``DENOMINATOR_EPS`` times the characteristic magnitude of the
    numerator's products, which happens for centered or rotationally
    symmetric content.

    Raises
    ------
    ValueError
        Frame mismatch (non-raw input) or insufficient order.
    """
    if ms.kind != "raw":
        raise ValueError(
            f"frame mismatch: raw moments about the rotation center "
            f"required, got kind {ms.kind!r}"
        )
    _require_order(ms, 4, "rotational-blur invariants")

    m = ms.values
    m00 = m[(0, 0)]
    m10, m01 = m[(1, 0)], m[(0, 1)]
    m20, m11, m02 = m[(2, 0)], m[(1, 1)], m[(0, 2)]
    m30, m21, m12, m03 = m[(3, 0)], m[(2, 1)], m[(1, 2)], m[(0, 3)]
    m40, m31, m22, m13, m04 = (m[(4, 0)], m[(3, 1)], m[(2, 2)],
                               m[(1, 3)], m[(0, 4)])

    if m00 <= 0.0:
        raise ValueError("raw moment set has non-positive total mass")
    radius_sq = max((m20 + m02) / m00, 0.0)

    def char(order: int) -> float:
        return m00 * radius_sq ** (order / 2.0)

    r1 = m20 + m02
    r2 = m40 + 2.0 * m22 + m04

    den_lin = m10 * m10 + m01 * m01
    r3_num = m01 * m03 + m01 * m21 + m10 * m12 + m10 * m30
    r4_num = m01 * m12 + m01 * m30 - m10 * m03 - m10 * m21
    sa = m30 + m12
    sb = m21 + m03
    r5_num = sa * sa + sb * sb

    den_quad = (m20 - m02) ** 2 + 4.0 * m11 * m11
    r6_num = (m02 * m13 + m02 * m31 - m04 * m11 + m40 * m11
              - m13 * m20 - m20 * m31)

    den_cubic = (m01 * m01 * m11 - m01 * m02 * m10
                 + m01 * m10 * m20 - m10 * m10 * m11)
    r7_num = (m01 * m01 * m13 + m01 * m01 * m31 - m01 * m04 * m10
              + m01 * m10 * m40 - m10 * m10 * m13 - m10 * m10 * m31)

    entries = [
        ("rmbmi1", r1, None, None),
        ("rmbmi2", r2, None, None),
        ("rmbmi3", r3_num, den_lin, 4.0 * char(1) * char(3)),
        ("rmbmi4", r4_num, den_lin, 4.0 * char(1) * char(3)),
        ("rmbmi5", r5_num, den_lin, 8.0 * char(3) ** 2),
        ("rmbmi6", r6_num, den_quad, 6.0 * char(2) * char(4)),
        ("rmbmi7", r7_num, den_cubic, 6.0 * char(1) ** 2 * char(4)),
    ]
    names, values, valid = [], [], []
    for name, num, den, num_scale in entries:
        names.append(name)
        if den is None:
            values.append(num)
            valid.append(True)
        elif abs(den) > DENOMINATOR_EPS * num_scale and den != 0.0:
            values.append(num / den)
            valid.append(True)
        else:
            values.append(0.0)
            valid.append(False)
    return FeatureVector("rmbmi", tuple(names), tuple(values), tuple(valid))


def feature_distance(u: FeatureVector, v: FeatureVector) -> float:
    """Mean relative difference over jointly valid entries.

    Per entry: |u_i - v_i| / (|u_i| + |v_i| + eps). Returns +inf when
    no entry is jointly valid, so fully masked vectors sort last.

    Raises
    ------
    ValueError
        If the vectors belong to different families.
    """
    if u.family != v.family or u.names != v.names:
        raise ValueError(
            f"feature family mismatch: {u.family!r} vs {v.family!r}"
        )
    total = 0.0
    count = 0
    for uv, vv, uok, vok in zip(u.values, v.values, u.valid, v.valid):
        if uok and vok:
            total += abs(uv - vv) / (abs(uv) + abs(vv) + DISTANCE_EPS)
            count += 1
    if count == 0:
        return math.inf
    return total / count
