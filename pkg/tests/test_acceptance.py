"""Acceptance gates, one test per advertised guarantee.

Each test pins a tolerance (and, where promised, a runtime budget) for
one end-to-end property of the library. Loosening a bound here is an
interface change, not a test fix. Expected values come from sources
independent of the implementation: hand-expanded propagation rows,
50-digit mpmath evaluation, and rasters synthesized by time sampling.
"""

import statistics
import time
from pathlib import Path

import mpmath
import numpy as np

from blurmoments import (DatasetManifest, LinearBlurParams, MomentSet,
                         RotationalBlurParams, TimeSampling,
                         hu_dependency_residual, hu_invariants,
                         linear_blur_invariants, linear_coeff, load_pgm,
                         moment_set, predict_linear_blur_central_moments,
                         predict_rotational_blur_raw_moments, rmbmi,
                         rotational_coeff, run_retrieval,
                         synthesize_linear_blur, synthesize_rotation,
                         synthesize_rotational_blur)
from blurmoments.corpus import make_blob
from _util import max_rel_entries, rel

mpmath.mp.dps = 50


def index_pairs(max_order):
    return [(p, q) for p in range(max_order + 1)
            for q in range(max_order + 1) if p + q <= max_order]


def linear_weights_by_hand(half_a, half_b):
    """Every nonzero propagation weight through order 4, expanded by
    hand in the half-displacements A = aT/2 and B = bT/2. Source pairs
    absent from a row carry weight exactly zero."""
    A, B = half_a, half_b
    return {
        (0, 0): {(0, 0): 1.0},
        (1, 0): {(1, 0): 1.0},
        (0, 1): {(0, 1): 1.0},
        (2, 0): {(2, 0): 1.0, (0, 0): A * A / 3},
        (1, 1): {(1, 1): 1.0, (0, 0): A * B / 3},
        (0, 2): {(0, 2): 1.0, (0, 0): B * B / 3},
        (3, 0): {(3, 0): 1.0, (1, 0): A * A},
        (2, 1): {(2, 1): 1.0, (0, 1): A * A / 3, (1, 0): 2 * A * B / 3},
        (1, 2): {(1, 2): 1.0, (1, 0): B * B / 3, (0, 1): 2 * A * B / 3},
        (0, 3): {(0, 3): 1.0, (0, 1): B * B},
        (4, 0): {(4, 0): 1.0, (2, 0): 2 * A * A, (0, 0): A ** 4 / 5},
        (3, 1): {(3, 1): 1.0, (1, 1): A * A, (2, 0): A * B,
                 (0, 0): A ** 3 * B / 5},
        (2, 2): {(2, 2): 1.0, (0, 2): A * A / 3, (2, 0): B * B / 3,
                 (1, 1): 4 * A * B / 3, (0, 0): A * A * B * B / 5},
        (1, 3): {(1, 3): 1.0, (1, 1): B * B, (0, 2): A * B,
                 (0, 0): A * B ** 3 / 5},
        (0, 4): {(0, 4): 1.0, (0, 2): 2 * B * B, (0, 0): B ** 4 / 5},
    }


def rotational_weights_mp(sweep):
    """First and second order rotational rows at 50-digit precision.

    Row (p, q) maps k to the weight of source m_{k, p+q-k}.
    """
    w = mpmath.mpf(sweep)
    s, c = mpmath.sin(w), mpmath.cos(w)
    return {
        (1, 0): {1: s / w, 0: (1 - c) / w},
        (0, 1): {1: (-1 + c) / w, 0: s / w},
        (2, 0): {2: (c * s + w) / (2 * w), 1: s * s / w,
                 0: (w - c * s) / (2 * w)},
        (1, 1): {2: -s * s / (2 * w), 1: c * s / w, 0: s * s / (2 * w)},
        (0, 2): {2: (w - c * s) / (2 * w), 1: -s * s / w,
                 0: (c * s + w) / (2 * w)},
    }


def random_central_set(rng, max_order=4):
    vals = {pq: float(rng.uniform(-2, 2)) for pq in index_pairs(max_order)}
    vals[(0, 0)] = float(rng.uniform(0.5, 2.0))
    vals[(1, 0)] = vals[(0, 1)] = 0.0
    return MomentSet(kind="central", max_order=max_order, values=vals,
                     origin=(0.0, 0.0))


def random_raw_set(rng, max_order=4):
    vals = {pq: float(rng.uniform(-2, 2)) for pq in index_pairs(max_order)}
    vals[(0, 0)] = float(rng.uniform(0.5, 2.0))
    return MomentSet(kind="raw", max_order=max_order, values=vals,
                     origin=(0.0, 0.0))


def rel_errors(ms_a, ms_b):
    """Per-entry relative disagreements, skipping exact-zero pairs."""
    out = []
    for pq in ms_a.values:
        top = max(abs(ms_a[pq]), abs(ms_b[pq]))
        if top > 0.0:
            out.append(abs(ms_a[pq] - ms_b[pq]) / top)
    return out


def feature_drift(f_before, f_after):
    return max(rel(x, y) for x, y in zip(f_before.values, f_after.values))


def test_propagation_coefficients_match_hand_derived_closed_forms():
    t0 = time.perf_counter()

    rng = np.random.default_rng(41)
    for _ in range(100):
        a, b = (float(v) for v in rng.uniform(-8, 8, 2))
        T = float(rng.uniform(0.1, 3.0))
        params = LinearBlurParams(a=a, b=b, T=T)
        rows = linear_weights_by_hand(a * T / 2, b * T / 2)
        for p, q in index_pairs(4):
            for i in range(p + 1):
                for j in range(q + 1):
                    want = rows[(p, q)].get((i, j), 0.0)
                    got = linear_coeff(p, q, i, j, params)
                    if want == 0.0:
                        assert got == 0.0, (p, q, i, j)
                    else:
                        assert rel(got, want) <= 1e-12, (p, q, i, j)

    for _ in range(100):
        w = float(rng.uniform(1e-12, 1.5))
        T = float(rng.uniform(0.1, 3.0))
        params = RotationalBlurParams(omega=w / T, T=T)
        for (p, q), row in rotational_weights_mp(w).items():
            for k, want_mp in row.items():
                got = rotational_coeff(p, q, k, params)
                assert rel(got, float(want_mp)) <= 1e-12, (p, q, k)

    assert time.perf_counter() - t0 < 1.0


def test_predictions_track_rendered_blur_and_refine_with_sampling(
        oracle_products):
    t0 = time.perf_counter()

    worst = max(max_rel_entries(prod["predicted"], prod["measured"])
                for prod in oracle_products["products"])
    assert worst <= 1e-2

    # Refining the time sampling must shrink the error it controls.
    # That error is measured against the synthesizer's converged raster
    # (512 samples): the residual gap between the closed form and any
    # raster is a fixed resampling bias which, at 8 samples, happens to
    # partially cancel the discretization deficit, so the closed-form
    # gap itself is not monotone in the sample count.
    pooled = {8: [], 256: []}
    products = oracle_products["products"]
    for idx, img in enumerate(oracle_products["images"]):
        for prod in products[6 * idx: 6 * idx + 6]:
            if prod["kind"] == "linear":
                synth, kind = synthesize_linear_blur, "central"
            else:
                synth, kind = synthesize_rotational_blur, "raw"
            converged = moment_set(
                synth(img, prod["params"], TimeSampling(n_samples=512)),
                kind, 4)
            for n in pooled:
                meas = moment_set(
                    synth(img, prod["params"], TimeSampling(n_samples=n)),
                    kind, 4)
                pooled[n].extend(rel_errors(meas, converged))

    assert statistics.median(pooled[256]) < statistics.median(pooled[8])
    elapsed = time.perf_counter() - t0
    assert oracle_products["build_seconds"] + elapsed < 60.0


def test_invariant_families_hold_under_rendered_blur_and_rotation(
        oracle_products, smooth10):
    lin = [p for p in oracle_products["products"] if p["kind"] == "linear"]
    rot = [p for p in oracle_products["products"] if p["kind"] == "rotational"]
    assert len(lin) == 30 and len(rot) == 30

    worst_third_order = max(
        feature_drift(linear_blur_invariants(p["source_central"]),
                      linear_blur_invariants(p["measured"]))
        for p in lin)
    assert worst_third_order <= 1e-2

    worst_radial = 0.0
    worst_ratio = 0.0
    n_ratio_checks = 0
    for p in rot:
        before = rmbmi(p["source_raw"])
        after = rmbmi(p["measured"])
        for i in range(2):
            worst_radial = max(worst_radial,
                               rel(before.values[i], after.values[i]))
        for i in range(2, 7):
            if before.valid[i] and after.valid[i]:
                n_ratio_checks += 1
                worst_ratio = max(worst_ratio,
                                  rel(before.values[i], after.values[i]))
    assert worst_radial <= 1e-2
    assert worst_ratio <= 3e-2
    assert n_ratio_checks >= 120  # generic blobs rarely trip the masks

    rng = np.random.default_rng(59)
    angles = [float(rng.uniform(0.3, 1.25)) for _ in range(3)]
    pairs = [(img, angle) for img in smooth10 for angle in angles]
    assert len(pairs) == 30
    worst_hu = max(
        feature_drift(hu_invariants(moment_set(img, "normalized", 3)),
                      hu_invariants(moment_set(synthesize_rotation(img, angle),
                                               "normalized", 3)))
        for img, angle in pairs)
    assert worst_hu <= 1e-3


def test_exact_arithmetic_propagation_leaves_invariants_fixed():
    t0 = time.perf_counter()
    rng = np.random.default_rng(97)

    for _ in range(1000):
        src = random_central_set(rng)
        params = LinearBlurParams(a=float(rng.uniform(-8, 8)),
                                  b=float(rng.uniform(-8, 8)),
                                  T=float(rng.uniform(0.1, 3.0)))
        pred = predict_linear_blur_central_moments(src, params, 4)
        for pq in ((3, 0), (2, 1), (1, 2), (0, 3)):
            assert pred[pq] == src[pq]  # bitwise, no raster in the loop

    for _ in range(1000):
        src = random_raw_set(rng)
        params = RotationalBlurParams(omega=float(rng.uniform(-1.5, 1.5)),
                                      T=float(rng.uniform(0.1, 2.0)))
        pred = predict_rotational_blur_raw_moments(src, params, 4)
        before = rmbmi(src)
        after = rmbmi(pred)
        for i in range(2):
            assert rel(before.values[i], after.values[i]) <= 1e-12

    assert time.perf_counter() - t0 < 1.0


def test_seventh_hu_invariant_is_algebraically_dependent(blobs10):
    images = blobs10 + tuple(make_blob(seed) for seed in range(10, 20))
    for img in images:
        residual = hu_dependency_residual(moment_set(img, "normalized", 4))
        assert residual <= 1e-8


def test_rendered_blur_conserves_total_intensity(oracle_products):
    for prod in oracle_products["products"]:
        source_mass = prod["source_raw"][(0, 0)]
        assert rel(prod["blurred_m00"], source_mass) <= 1e-6


def test_canonical_retrieval_is_perfect_with_matched_family(canonical_dataset):
    t0 = time.perf_counter()
    manifest = canonical_dataset["manifest"]
    assert manifest.skipped == ()

    gallery = manifest.gallery()
    queries = manifest.queries()
    assert len(gallery) == 20 and len(queries) == 120
    lin = tuple(e for e in queries if e.blur_kind == "linear")
    rot = tuple(e for e in queries if e.blur_kind == "rotational")
    assert len(lin) == 60 and len(rot) == 60

    report_lin = run_retrieval(DatasetManifest(entries=gallery + lin),
                               "linear_blur")
    report_rot = run_retrieval(DatasetManifest(entries=gallery + rot),
                               "rmbmi")
    for report in (report_lin, report_rot):
        assert report.excluded == ()
        assert report.n_scored == 60
        assert report.precision_at_1 == 1.0

    elapsed = time.perf_counter() - t0
    assert canonical_dataset["build_seconds"] + elapsed < 120.0


def test_second_order_moments_move_exactly_as_predicted(canonical_dataset):
    manifest = canonical_dataset["manifest"]
    sources = {e.class_label: moment_set(load_pgm(Path(e.path)), "central", 2)
               for e in manifest.gallery()}

    worst_err = 0.0
    biggest_move = 0.0
    n_moved = 0
    linear_queries = [e for e in manifest.queries() if e.blur_kind == "linear"]
    assert len(linear_queries) == 60
    for entry in linear_queries:
        src = sources[entry.class_label]
        params = LinearBlurParams(a=entry.params["a"], b=entry.params["b"],
                                  T=entry.params["T"])
        pred = predict_linear_blur_central_moments(src, params, 2)
        meas = moment_set(load_pgm(Path(entry.path)), "central", 2)
        for pq in ((2, 0), (0, 2)):
            worst_err = max(worst_err, rel(pred[pq], meas[pq]))
            move = rel(src[pq], meas[pq])
            biggest_move = max(biggest_move, move)
            if move > 1e-2:
                n_moved += 1

    # the control feature really changes, and by the predicted amount
    assert worst_err <= 1e-2
    assert biggest_move > 1e-2
    assert n_moved >= 30
