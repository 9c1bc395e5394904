"""Closed-form propagation of moments through motion blur.

Both blur kinds act linearly on moments. A linear sweep maps central
moments through coefficients

    H(p, q, i, j) = C(p,i) C(q,j) a^(p-i) b^(q-j) S,
    S = (T/2)^d / (d+1) for even gap d = p+q-i-j, else 0,

so every odd-gap coefficient vanishes and third-order central moments
ride through unchanged. A rotational sweep maps raw moments about the
pivot within each total order,

    m_pq(blurred) = sum_k m_{k, p+q-k} H(p, q, k),
    H(p, q, k) = sum_i (-1)^(k-i) C(p,i) C(q,k-i)
                 * (1 / wT) integral_0^{wT} cos^(q+2i-k) sin^(p+k-2i),

with the i-term present only when i <= p and k-i <= q. The trig power
integrals are evaluated by an exact power-reduction recurrence with a
series branch near zero sweep.
"""

from __future__ import annotations

import math
from functools import lru_cache

from .blur_synth import LinearBlurParams, RotationalBlurParams
from .moments import Centroid, MomentSet, _index_pairs

__all__ = [
    "linear_coeff",
    "predict_blurred_centroid",
    "predict_linear_blur_central_moments",
    "predict_rotational_blur_raw_moments",
    "rotational_coeff",
    "trig_moment_integral",
]

# Below this |sweep| the power-reduction recurrence loses digits to
# cancellation; the truncated series is exact to double precision there.
_SERIES_SWEEP = 1e-4


def predict_blurred_centroid(c: Centroid, params: LinearBlurParams) -> Centroid:
    """Centroid of a linearly blurred image: shifted by half the sweep."""
    return Centroid(c.x + params.a * params.T / 2.0,
                    c.y + params.b * params.T / 2.0)


@lru_cache(maxsize=None)
def _linear_coeff(p: int, q: int, i: int, j: int,
                  a: float, b: float, T: float) -> float:
    gap = p + q - i - j
    if gap % 2 == 1:
        return 0.0
    s = (T / 2.0) ** gap / (gap + 1)
    return math.comb(p, i) * math.comb(q, j) * a ** (p - i) * b ** (q - j) * s


def linear_coeff(p: int, q: int, i: int, j: int,
                 params: LinearBlurParams) -> float:
    """Weight of source central moment u_ij in blurred u_pq.

    Zero whenever the order gap p + q - i - j is odd; equal to 1 at
    (i, j) = (p, q), which is what conserves total mass.

    Raises
    ------
    ValueError
        If the indices fall outside 0 <= i <= p, 0 <= j <= q.
    """
    if not (0 <= i <= p and 0 <= j <= q):
        raise ValueError(
            f"coefficient index out of range: need 0 <= i <= p and "
            f"0 <= j <= q, got (p,q,i,j)=({p},{q},{i},{j})"
        )
    return _linear_coeff(p, q, i, j, params.a, params.b, params.T)


def predict_linear_blur_central_moments(src: MomentSet,
                                        params: LinearBlurParams,
                                        max_order: int) -> MomentSet:
    """Central moments of a linear blur of the image behind ``src``.

    Pure coefficient algebra; no raster is touched. The first-order
    entries are written as literal zeros, and all third-order entries
    pass through bit-identically because their propagation rows are
    identity rows.

    Raises
    ------
    ValueError
        If ``src`` is not a central moment set of sufficient order.
    """
    if src.kind != "central":
        raise ValueError(f"central moment set required, got kind {src.kind!r}")
    if src.max_order < max_order:
        raise ValueError(
            f"insufficient source order: have {src.max_order}, need {max_order}"
        )
    values: dict[tuple[int, int], float] = {}
    for p, q in _index_pairs(max_order):
        if (p, q) in ((1, 0), (0, 1)):
            values[(p, q)] = 0.0
            continue
        acc = 0.0
        for i in range(p + 1):
            for j in range(q + 1):
                acc += src[(i, j)] * _linear_coeff(p, q, i, j,
                                                   params.a, params.b, params.T)
        values[(p, q)] = acc
    return MomentSet(
        "central", max_order, values, src.origin,
        frame_note="central moments propagated through a linear blur",
    )


def trig_moment_integral(cos_power: int, sin_power: int, upper: float) -> float:
    """Integral of cos^c(t) sin^s(t) for t from 0 to ``upper``.

    Evaluated by the integration-by-parts power reduction, with the
    elementary base cases in numerically stable forms and a truncated
    series below |upper| = 1e-4 where the recurrence would cancel.
    The magnitude never exceeds |upper|.
    """
    if cos_power < 0 or sin_power < 0:
        raise ValueError("trig powers must be non-negative")
    return _trig_integral(int(cos_power), int(sin_power), float(upper))


def _sweep_minus_sin(u: float) -> float:
    # u - sin u; the direct difference loses digits below |u| ~ 0.1.
    if abs(u) < 0.1:
        u2 = u * u
        return u * u2 / 6.0 * (1.0 - u2 / 20.0 + u2 * u2 / 840.0
                               - u2 * u2 * u2 / 60480.0)
    return u - math.sin(u)


@lru_cache(maxsize=None)
def _trig_integral(c: int, s: int, a: float) -> float:
    if a == 0.0:
        return 0.0
    if c == 0 and s == 2:
        # (a - sin a cos a)/2 in a form that never cancels
        return _sweep_minus_sin(2.0 * a) / 4.0
    if abs(a) < _SERIES_SWEEP:
        return _trig_series(c, s, a)
    if s >= 2:
        boundary = -(math.cos(a) ** (c + 1)) * math.sin(a) ** (s - 1) / (c + s)
        return boundary + (s - 1) / (c + s) * _trig_integral(c, s - 2, a)
    if s == 1:
        cos_a = math.cos(a)
        if cos_a > 0.5:
            # 1 - cos^(c+1) via expm1/log1p to dodge the small-angle
            # cancellation; log1p argument is -2 sin^2(a/2) = cos a - 1.
            half = math.sin(a / 2.0)
            return -math.expm1((c + 1) * math.log1p(-2.0 * half * half)) / (c + 1)
        return (1.0 - cos_a ** (c + 1)) / (c + 1)
    if c == 0:
        return a
    if c == 1:
        return math.sin(a)
    boundary = math.cos(a) ** (c - 1) * math.sin(a) / c
    return boundary + (c - 1) / c * _trig_integral(c - 2, 0, a)


def _trig_series(c: int, s: int, a: float) -> float:
    # Integrand = t^s (1 + g1 t^2 + g2 t^4 + O(t^6)); the O(t^6) tail is
    # below double rounding for |a| < 1e-4 and the orders used here.
    g1 = -(c / 2.0 + s / 6.0)
    g2 = c * (3 * c - 2) / 24.0 + s * (5 * s - 2) / 360.0 + c * s / 12.0
    a2 = a * a
    return a ** (s + 1) * (1.0 / (s + 1) + g1 * a2 / (s + 3)
                           + g2 * a2 * a2 / (s + 5))


@lru_cache(maxsize=None)
def _rotational_coeff(p: int, q: int, k: int, sweep: float) -> float:
    if sweep == 0.0:
        return 1.0 if k == p else 0.0
    acc = 0.0
    for i in range(k + 1):
        if i > p or k - i > q:
            continue
        sign = -1.0 if (k - i) % 2 else 1.0
        s1 = sign * math.comb(p, i) * math.comb(q, k - i)
        s2 = _trig_integral(q + 2 * i - k, p + k - 2 * i, sweep) / sweep
        acc += s1 * s2
    return acc


def rotational_coeff(p: int, q: int, k: int,
                     params: RotationalBlurParams) -> float:
    """Weight of source raw moment m_{k, p+q-k} in blurred raw m_pq.

    At zero sweep this is the identity map weight (1 when k = p, else
    0), reached analytically rather than by dividing by the sweep.

    Raises
    ------
    ValueError
        If k falls outside 0 <= k <= p + q.
    """
    if not 0 <= k <= p + q:
        raise ValueError(
            f"coefficient index out of range: need 0 <= k <= p+q, "
            f"got (p,q,k)=({p},{q},{k})"
        )
    return _rotational_coeff(p, q, k, params.sweep)


def predict_rotational_blur_raw_moments(src: MomentSet,
                                        params: RotationalBlurParams,
                                        max_order: int) -> MomentSet:
    """Raw moments of a rotational blur of the image behind ``src``.

    The map mixes only source moments of equal total order, so each
    output entry is a fixed-order combination; total mass rides on the
    exact identity coefficient H(0, 0, 0) = 1.

    Raises
    ------
    ValueError
        If ``src`` is not a raw moment set about ``params.center`` or
        its order is insufficient.
    """
    if src.kind != "raw" or src.origin != params.center:
        raise ValueError("moments not about rotation center")
    if src.max_order < max_order:
        raise ValueError(
            f"insufficient source order: have {src.max_order}, need {max_order}"
        )
    values: dict[tuple[int, int], float] = {}
    for p, q in _index_pairs(max_order):
        order = p + q
        acc = 0.0
        for k in range(order + 1):
            acc += src[(k, order - k)] * _rotational_coeff(p, q, k, params.sweep)
        values[(p, q)] = acc
    return MomentSet(
        "raw", max_order, values, src.origin,
        frame_note="raw moments propagated through a rotational blur",
    )
