"""Command-line interface.

Every subcommand writes its result to stdout as JSON or CSV, selected
by ``--format``. Exit codes: 0 on success, 1 on data errors (bad files,
margin violations, degenerate inputs), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from .blur_synth import (LinearBlurParams, RotationalBlurParams, TimeSampling,
                         synthesize_linear_blur, synthesize_rotation,
                         synthesize_rotational_blur)
from .blur_theory import (predict_linear_blur_central_moments,
                          predict_rotational_blur_raw_moments)
from .corpus import write_canonical_gallery
from .harness import (DEFAULT_BLUR_GRID, DatasetManifest, extract_features,
                      generate_dataset, run_classification, run_retrieval,
                      template_match)
from .moments import (moment_set, moment_set_from_json_dict,
                      moment_set_to_json_dict)
from .raster import load_pgm, save_pgm

__all__ = ["build_parser", "main"]


class _UsageError(Exception):
    """Flag combination that argparse alone cannot reject."""


def _emit_json(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _emit_csv(header, rows) -> None:
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)


def _moment_rows(ms):
    data = moment_set_to_json_dict(ms)
    for key in sorted(data["values"], key=lambda s: tuple(map(int, s.split(",")))):
        p, q = key.split(",")
        yield int(p), int(q), data["values"][key]


def _linear_params(args) -> LinearBlurParams:
    if getattr(args, "omega", None) is not None:
        raise _UsageError("--omega applies only to --kind rotational")
    return LinearBlurParams(a=args.a, b=args.b, T=args.T)


def _rotational_params(args) -> RotationalBlurParams:
    if args.omega is None:
        raise _UsageError("--kind rotational requires --omega")
    return RotationalBlurParams(omega=args.omega, T=args.T,
                                center=(args.center_x, args.center_y))


def _cmd_moments(args) -> int:
    img = load_pgm(args.image)
    ms = moment_set(img, args.kind, args.order)
    if args.format == "json":
        _emit_json(moment_set_to_json_dict(ms))
    else:
        _emit_csv(("p", "q", "value"), _moment_rows(ms))
    return 0


def _cmd_blur(args) -> int:
    img = load_pgm(args.input)
    sampling = TimeSampling(n_samples=args.samples)
    if args.kind == "linear":
        out = synthesize_linear_blur(img, _linear_params(args), sampling)
    else:
        out = synthesize_rotational_blur(img, _rotational_params(args), sampling)
    save_pgm(out, args.output, maxval=args.maxval)
    return 0


def _cmd_rotate(args) -> int:
    img = load_pgm(args.input)
    save_pgm(synthesize_rotation(img, args.angle), args.output,
             maxval=args.maxval)
    return 0


def _cmd_predict(args) -> int:
    obj = json.loads(Path(args.moments).read_text())
    order = args.order if args.order is not None else int(obj["max_order"])
    if args.kind == "linear":
        src = moment_set_from_json_dict(obj)
        pred = predict_linear_blur_central_moments(
            src, _linear_params(args), order)
    else:
        params = _rotational_params(args)
        src = moment_set_from_json_dict(obj, origin=params.center)
        pred = predict_rotational_blur_raw_moments(src, params, order)
    if args.format == "json":
        _emit_json(moment_set_to_json_dict(pred))
    else:
        _emit_csv(("p", "q", "value"), _moment_rows(pred))
    return 0


def _cmd_verify(args) -> int:
    img = load_pgm(args.image)
    sampling = TimeSampling(n_samples=args.samples)
    if args.kind == "linear":
        params = _linear_params(args)
        src = moment_set(img, "central", args.order)
        pred = predict_linear_blur_central_moments(src, params, args.order)
        blurred = synthesize_linear_blur(img, params, sampling)
        meas = moment_set(blurred, "central", args.order)
    else:
        params = _rotational_params(args)
        src = moment_set(img, "raw", args.order, origin=params.center)
        pred = predict_rotational_blur_raw_moments(src, params, args.order)
        blurred = synthesize_rotational_blur(img, params, sampling)
        meas = moment_set(blurred, "raw", args.order, origin=params.center)

    rows = []
    for (p, q), pv in sorted(pred.values.items()):
        mv = meas[(p, q)]
        scale = max(abs(pv), abs(mv))
        rel = abs(pv - mv) / scale if scale > 0.0 else 0.0
        rows.append((p, q, pv, mv, rel))
    if args.format == "json":
        _emit_json([{"p": p, "q": q, "predicted": pv, "measured": mv,
                     "rel_error": rel} for p, q, pv, mv, rel in rows])
    else:
        _emit_csv(("p", "q", "predicted", "measured", "rel_error"), rows)
    return 0


def _cmd_features(args) -> int:
    if (args.image is None) == (args.manifest is None):
        raise _UsageError("give exactly one of an image path or --manifest")
    if args.image is not None:
        feat = extract_features(load_pgm(args.image), args.family)
        if args.format == "json":
            _emit_json(feat.as_dict())
        else:
            _emit_csv(("name", "value", "valid"),
                      zip(feat.names, feat.values, (int(v) for v in feat.valid)))
        return 0

    manifest = DatasetManifest.load(args.manifest)
    feats = [(e, extract_features(load_pgm(e.path), args.family))
             for e in manifest.entries]
    if args.format == "json":
        _emit_json([{"id": e.id, "class_label": e.class_label,
                     **f.as_dict()} for e, f in feats])
    else:
        names = feats[0][1].names
        header = ("id", "class_label", *names,
                  *(f"{n}_valid" for n in names))
        _emit_csv(header, ((e.id, e.class_label, *f.values,
                            *(int(v) for v in f.valid)) for e, f in feats))
    return 0


def _cmd_dataset(args) -> int:
    base = Path(args.base_dir)
    if args.canonical > 0:
        write_canonical_gallery(base, n_classes=args.canonical)
    grid = DEFAULT_BLUR_GRID
    if args.grid is not None:
        grid = json.loads(Path(args.grid).read_text())
    manifest = generate_dataset(base, args.out_dir, blur_grid=grid,
                                n_samples=args.samples, seed=args.seed)
    summary = {
        "manifest": str(Path(args.out_dir) / "manifest.json"),
        "n_gallery": len(manifest.gallery()),
        "n_queries": len(manifest.queries()),
        "n_skipped": len(manifest.skipped),
    }
    if args.format == "json":
        _emit_json(summary)
    else:
        _emit_csv(sorted(summary), [tuple(summary[k] for k in sorted(summary))])
    return 0


def _cmd_retrieve(args) -> int:
    report = run_retrieval(DatasetManifest.load(args.manifest), args.family)
    if args.format == "json":
        _emit_json(report.to_json_dict())
    else:
        rows = [(row["query_id"], row["class_label"], row["ranked_ids"][0],
                 row["rank_of_true"], 1.0 / row["rank_of_true"])
                for row in report.per_query]
        _emit_csv(("query_id", "class_label", "top1_id", "rank_of_true",
                   "reciprocal_rank"), rows)
    return 0


def _cmd_classify(args) -> int:
    accuracy = run_classification(DatasetManifest.load(args.manifest),
                                  args.family, k=args.k)
    if args.format == "json":
        _emit_json({"family": args.family, "k": args.k, "accuracy": accuracy})
    else:
        _emit_csv(("family", "k", "accuracy"), [(args.family, args.k, accuracy)])
    return 0


def _cmd_match(args) -> int:
    result = template_match(load_pgm(args.scene), load_pgm(args.template),
                            stride=args.stride, family=args.family)
    if args.format == "json":
        _emit_json({"row": result.row, "col": result.col,
                    "distance": result.distance})
    else:
        _emit_csv(("row", "col", "distance"),
                  [(result.row, result.col, result.distance)])
    return 0


def _add_format(sp, default="json") -> None:
    sp.add_argument("--format", choices=("json", "csv"), default=default,
                    help=f"output format (default {default})")


def _add_blur_flags(sp, kind_required=True) -> None:
    sp.add_argument("--kind", choices=("linear", "rotational"),
                    required=kind_required)
    sp.add_argument("--a", type=float, default=0.0,
                    help="linear velocity, x component (px per unit time)")
    sp.add_argument("--b", type=float, default=0.0,
                    help="linear velocity, y component (px per unit time)")
    sp.add_argument("--omega", type=float, default=None,
                    help="angular velocity (rad per unit time)")
    sp.add_argument("--T", type=float, default=1.0, help="exposure time")
    sp.add_argument("--center-x", type=float, default=0.0,
                    help="rotation center x (frame coordinates)")
    sp.add_argument("--center-y", type=float, default=0.0,
                    help="rotation center y (frame coordinates)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blurmoments",
        description="Motion-blur-invariant moment features: synthesis, "
                    "closed-form prediction, and retrieval experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("moments", help="geometric moments of a PGM image")
    sp.add_argument("image")
    sp.add_argument("--kind", choices=("raw", "central", "normalized"),
                    default="raw")
    sp.add_argument("--order", type=int, default=3)
    _add_format(sp)
    sp.set_defaults(func=_cmd_moments)

    sp = sub.add_parser("blur", help="synthesize motion blur")
    sp.add_argument("input")
    sp.add_argument("output")
    _add_blur_flags(sp)
    sp.add_argument("--samples", type=int, default=201,
                    help="time samples for the exposure integral")
    sp.add_argument("--maxval", type=int, default=65535,
                    choices=(255, 65535))
    sp.set_defaults(func=_cmd_blur)

    sp = sub.add_parser("rotate", help="rotate an image about its center")
    sp.add_argument("input")
    sp.add_argument("output")
    sp.add_argument("--angle", type=float, required=True,
                    help="counterclockwise angle in radians")
    sp.add_argument("--maxval", type=int, default=65535,
                    choices=(255, 65535))
    sp.set_defaults(func=_cmd_rotate)

    sp = sub.add_parser("predict",
                        help="closed-form blurred moments from sharp moments")
    sp.add_argument("--moments", required=True,
                    help="JSON moment set (output of the moments command)")
    sp.add_argument("--order", type=int, default=None)
    _add_blur_flags(sp)
    _add_format(sp)
    sp.set_defaults(func=_cmd_predict)

    sp = sub.add_parser("verify",
                        help="synthesize, measure, and compare to prediction")
    sp.add_argument("image")
    sp.add_argument("--order", type=int, default=4)
    sp.add_argument("--samples", type=int, default=201)
    _add_blur_flags(sp)
    _add_format(sp, default="csv")
    sp.set_defaults(func=_cmd_verify)

    sp = sub.add_parser("features", help="blur-invariant feature vector")
    sp.add_argument("image", nargs="?", default=None)
    sp.add_argument("--manifest", default=None,
                    help="dataset manifest for batch extraction")
    sp.add_argument("--family", choices=("hu6", "linear", "linear_blur",
                                         "rmbmi"), required=True)
    _add_format(sp)
    sp.set_defaults(func=_cmd_features)

    sp = sub.add_parser("dataset", help="generate a blurred query dataset")
    sp.add_argument("--base-dir", required=True,
                    help="directory of sharp gallery PGMs")
    sp.add_argument("--out-dir", required=True)
    sp.add_argument("--grid", default=None,
                    help="JSON file with a list of blur settings")
    sp.add_argument("--canonical", type=int, default=0,
                    help="first write N built-in gallery images to base-dir")
    sp.add_argument("--samples", type=int, default=201)
    sp.add_argument("--seed", type=int, default=0)
    _add_format(sp)
    sp.set_defaults(func=_cmd_dataset)

    sp = sub.add_parser("retrieve", help="rank gallery for each blurred query")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--family", choices=("hu6", "linear", "linear_blur",
                                         "rmbmi"), required=True)
    _add_format(sp)
    sp.set_defaults(func=_cmd_retrieve)

    sp = sub.add_parser("classify", help="k-nearest-neighbor accuracy")
    sp.add_argument("--manifest", required=True)
    sp.add_argument("--family", choices=("hu6", "linear", "linear_blur",
                                         "rmbmi"), required=True)
    sp.add_argument("--k", type=int, default=1)
    _add_format(sp)
    sp.set_defaults(func=_cmd_classify)

    sp = sub.add_parser("match", help="sliding-window template search")
    sp.add_argument("scene")
    sp.add_argument("template")
    sp.add_argument("--stride", type=int, default=1)
    sp.add_argument("--family", choices=("hu6", "linear", "linear_blur",
                                         "rmbmi"), default="linear")
    _add_format(sp)
    sp.set_defaults(func=_cmd_match)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code is None else int(exc.code)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
