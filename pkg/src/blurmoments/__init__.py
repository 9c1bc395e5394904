"""Moment features that survive linear and rotational motion blur.

The package has four layers: raster I/O and the centered coordinate
frame (`raster`), geometric moment computation (`moments`), blur
synthesis by time integration and its closed-form counterpart on
moments (`blur_synth`, `blur_theory`), and the invariant feature
families plus retrieval experiments built on them (`invariants`,
`corpus`, `harness`).

Hot kernels run through a compiled extension when it is available; set
``BLURMOMENTS_FORCE_BACKEND`` to ``python`` or ``compiled`` to pin one.
The active choice is exposed as :data:`BACKEND`.
"""

from ._kernels import BACKEND
from .blur_synth import (LinearBlurParams, MarginError, RotationalBlurParams,
                         TimeSampling, synthesize_linear_blur,
                         synthesize_rotation, synthesize_rotational_blur)
from .blur_theory import (linear_coeff, predict_blurred_centroid,
                          predict_linear_blur_central_moments,
                          predict_rotational_blur_raw_moments,
                          rotational_coeff, trig_moment_integral)
from .harness import (DatasetManifest, ManifestEntry, MatchResult,
                      RetrievalReport, extract_features, generate_dataset,
                      run_classification, run_retrieval, template_match)
from .invariants import (FeatureVector, feature_distance,
                         hu_dependency_residual, hu_invariants,
                         linear_blur_invariants, rmbmi)
from .moments import (Centroid, DegenerateImageError, MomentSet,
                      central_moment, centroid, moment_set,
                      moment_set_from_json_dict, moment_set_to_json_dict,
                      normalized_central_moment, raw_moment)
from .raster import (CoordinateFrame, Image, PgmParseError, load_pgm,
                     sample_bilinear, save_pgm)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Centroid",
    "CoordinateFrame",
    "DatasetManifest",
    "DegenerateImageError",
    "FeatureVector",
    "Image",
    "LinearBlurParams",
    "ManifestEntry",
    "MarginError",
    "MatchResult",
    "MomentSet",
    "PgmParseError",
    "RetrievalReport",
    "RotationalBlurParams",
    "TimeSampling",
    "__version__",
    "central_moment",
    "centroid",
    "extract_features",
    "feature_distance",
    "generate_dataset",
    "hu_dependency_residual",
    "hu_invariants",
    "linear_blur_invariants",
    "linear_coeff",
    "load_pgm",
    "moment_set",
    "moment_set_from_json_dict",
    "moment_set_to_json_dict",
    "normalized_central_moment",
    "predict_blurred_centroid",
    "predict_linear_blur_central_moments",
    "predict_rotational_blur_raw_moments",
    "raw_moment",
    "rmbmi",
    "rotational_coeff",
    "run_classification",
    "run_retrieval",
    "sample_bilinear",
    "save_pgm",
    "synthesize_linear_blur",
    "synthesize_rotation",
    "synthesize_rotational_blur",
    "template_match",
    "trig_moment_integral",
]
