import time

import pytest
from hypothesis import HealthCheck, settings

import blurmoments as bm
from blurmoments.corpus import (make_blob, make_smooth_blob,
                                write_canonical_gallery)

settings.register_profile(
    "suite",
    deadline=None,
    derandomize=True,
    suppress_health_check=(HealthCheck.too_slow,),
)
settings.load_profile("suite")

# Blur settings used by the theory-versus-raster comparisons. Linear
# displacements reach 12 px and sweeps 0.5 rad, the largest magnitudes
# the 40 px corpus margin supports with room to spare.
ORACLE_LINEAR = ((-6.0, 9.0, 1.0), (7.0, -8.0, 1.0), (4.2, -4.2, 2.0))
ORACLE_ROTATIONAL = ((0.5, 1.0), (-0.45, 1.0), (0.2, 2.0))


@pytest.fixture(scope="session")
def blobs10():
    return tuple(make_blob(seed) for seed in range(10))


@pytest.fixture(scope="session")
def smooth10():
    return tuple(make_smooth_blob(seed) for seed in range(10))


@pytest.fixture(scope="session")
def oracle_products(blobs10):
    """Synthesized blurs of ten blobs on the six oracle settings.

    Each product records the source moment tables, the blur parameters,
    the closed-form prediction, and the moments measured from the
    synthesized raster at the default 201 time samples. Several suites
    share this block, so it is built once; ``build_seconds`` lets the
    oracle suite account for the shared cost in its runtime budget.
    """
    sampling = bm.TimeSampling(n_samples=201)
    t0 = time.perf_counter()
    products = []
    for img in blobs10:
        raw0 = bm.moment_set(img, "raw", 4)
        cen0 = bm.moment_set(img, "central", 4)
        for a, b, T in ORACLE_LINEAR:
            params = bm.LinearBlurParams(a=a, b=b, T=T)
            blurred = bm.synthesize_linear_blur(img, params, sampling)
            products.append({
                "kind": "linear",
                "params": params,
                "source_raw": raw0,
                "source_central": cen0,
                "blurred_m00": bm.raw_moment(blurred, 0, 0),
                "predicted": bm.predict_linear_blur_central_moments(
                    cen0, params, 4),
                "measured": bm.moment_set(blurred, "central", 4),
            })
        for omega, T in ORACLE_ROTATIONAL:
            params = bm.RotationalBlurParams(omega=omega, T=T)
            blurred = bm.synthesize_rotational_blur(img, params, sampling)
            products.append({
                "kind": "rotational",
                "params": params,
                "source_raw": raw0,
                "source_central": cen0,
                "blurred_m00": bm.raw_moment(blurred, 0, 0),
                "predicted": bm.predict_rotational_blur_raw_moments(
                    raw0, params, 4),
                "measured": bm.moment_set(blurred, "raw", 4),
            })
    return {"products": products, "images": blobs10,
            "build_seconds": time.perf_counter() - t0}


@pytest.fixture(scope="session")
def canonical_dataset(tmp_path_factory):
    """Canonical 20-class gallery plus its default blurred query set."""
    root = tmp_path_factory.mktemp("canonical")
    base = root / "gallery"
    t0 = time.perf_counter()
    write_canonical_gallery(base, n_classes=20)
    manifest = bm.generate_dataset(base, root / "queries")
    return {"manifest": manifest, "base_dir": base,
            "build_seconds": time.perf_counter() - t0}
