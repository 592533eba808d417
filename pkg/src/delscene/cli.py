"""Batch command-line front end.

Four subcommands cover the pipeline: `profile` scores a manifest of
images and fits the scene profile, `metrics` scores ground-truth/render
pairs, `correlate` links complexity to quality, and `compare` diffs two
serialized profiles.

Output is deterministic byte-for-byte: rows are sorted by image id,
floats are printed with 12 significant digits, and JSON keys keep a fixed
order. Worker threads only parallelize per-image work; aggregation always
happens after a stable sort, so the worker count cannot change the bytes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .dsp import (
    SceneMeta,
    check_comparability,
    classify_descriptors,
    fit_dsp,
    profile_from_dict,
    profile_histogram,
    profile_to_dict,
)
from .entropy import EntropyConfig, complexity_record
from .errors import (
    ConvergenceError,
    DegenerateSceneError,
    DelsceneError,
    EmptyMatchError,
    InsufficientDataError,
    JoinError,
    SchemaError,
)
from .imgio import load_image, load_mask, parse_manifest
from .metrics import ingest_metrics_csv, psnr, ssim
from .stats import correlation_report
from .errors import DegenerateVarianceError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

PROFILE_HIST_BINS = 20
MIN_FIT_SAMPLES = 8

_COMPLEXITY_COLUMNS = [
    ("delentropy", "delentropy"),
    ("shannon", "shannon_entropy"),
    ("glcm", "glcm_entropy"),
]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


# ---------------------------------------------------------------------------
# deterministic serialization

def _format_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return format(x, ".12g")


def _json_scalar(value) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isfinite(value):
            return _format_float(value)
        return json.dumps(_format_float(value))
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    raise TypeError(f"cannot serialize {type(value)!r}")


def _render_json(value, level: int = 0) -> str:
    pad = "  " * level
    if isinstance(value, dict):
        if not value:
            return "{}"
        parts = [
            f'{pad}  {json.dumps(str(k), ensure_ascii=False)}: {_render_json(v, level + 1)}'
            for k, v in value.items()
        ]
        return "{\n" + ",\n".join(parts) + "\n" + pad + "}"
    if isinstance(value, (list, tuple)):
        if not len(value):
            return "[]"
        scalars = all(
            not isinstance(v, (dict, list, tuple)) for v in value
        )
        if scalars:
            return "[" + ", ".join(_json_scalar(v) for v in value) + "]"
        parts = [f"{pad}  {_render_json(v, level + 1)}" for v in value]
        return "[\n" + ",\n".join(parts) + "\n" + pad + "]"
    return _json_scalar(value)


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return _format_float(value)
    return str(value)


def _render_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# profile

def _profile_entry_worker(entry, resolution, cfg):
    try:
        img = load_image(entry.image)
        if (img.width, img.height) != resolution:
            return (
                "error",
                entry.image_id,
                f"size {img.width}x{img.height} does not match manifest "
                f"resolution {resolution[0]}x{resolution[1]}",
            )
        mask = None
        if entry.mask is not None:
            mask = load_mask(entry.mask, (img.width, img.height))
        record = complexity_record(entry.image_id, img, mask, cfg)
        return ("ok", entry.image_id, record, entry.group)
    except DelsceneError as exc:
        return ("error", entry.image_id, str(exc))


def cmd_profile(args) -> int:
    manifest = parse_manifest(args.manifest)
    try:
        cfg = EntropyConfig(
            bins=args.bins, blur_sigma=args.sigma, gradient_range=args.gradient_range
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    if args.workers < 1:
        raise _UsageError(f"workers must be >= 1, got {args.workers}")

    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        results = list(
            pool.map(
                lambda e: _profile_entry_worker(e, manifest.resolution, cfg),
                manifest.entries,
            )
        )

    oks = sorted(
        (r for r in results if r[0] == "ok"), key=lambda r: r[1]
    )
    errors = sorted(
        ({"image": r[1], "error": r[2]} for r in results if r[0] == "error"),
        key=lambda e: e["image"],
    )

    records = []
    for _, image_id, record, group in oks:
        records.append(
            {
                "image_id": image_id,
                "delentropy": record.delentropy,
                "shannon_entropy": record.shannon_entropy,
                "glcm_entropy": record.glcm_entropy,
                "excluded_fraction": record.excluded_fraction,
                "group": group,
            }
        )

    warnings = []
    profile_doc = None
    histogram = None
    samples = [r["delentropy"] for r in records]
    if len(samples) >= MIN_FIT_SAMPLES:
        try:
            profile = fit_dsp(samples, ceiling=cfg.ceiling)
            profile_doc = profile_to_dict(profile, manifest.scene_id)
            histogram = [
                [center, count, density]
                for center, count, density in profile_histogram(
                    samples, PROFILE_HIST_BINS, profile
                )
            ]
        except DegenerateSceneError as exc:
            warnings.append(
                f"degenerate scene: all {exc.n} delentropy samples equal "
                f"{_format_float(exc.mu)} bits; profile fit skipped"
            )
    elif records:
        warnings.append(
            f"only {len(samples)} image(s) scored; at least {MIN_FIT_SAMPLES} "
            "are needed for a profile fit"
        )

    doc = {
        "scene_id": manifest.scene_id,
        "config": {
            "bins": cfg.bins,
            "sigma": cfg.blur_sigma,
            "gradient_range": cfg.gradient_range,
        },
        "meta": {
            "resolution": list(manifest.resolution),
            "coverage_area_km2": manifest.coverage_area_km2,
            "collection_policy": manifest.collection_policy,
        },
        "records": records,
        "profile": profile_doc,
        "histogram": histogram,
        "warnings": warnings,
        "errors": errors,
    }

    if args.format == "json":
        text = _render_json(doc) + "\n"
    else:
        with_group = any(r["group"] is not None for r in records)
        header = [
            "image_id",
            "delentropy",
            "shannon_entropy",
            "glcm_entropy",
            "excluded_fraction",
        ] + (["group"] if with_group else [])
        rows = [
            [
                r["image_id"],
                r["delentropy"],
                r["shannon_entropy"],
                r["glcm_entropy"],
                r["excluded_fraction"],
            ]
            + ([r["group"]] if with_group else [])
            for r in records
        ]
        text = _render_csv(header, rows)
    _emit(text, args.out)

    if not records:
        print("error: every manifest entry failed to decode", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


# ---------------------------------------------------------------------------
# metrics

def cmd_metrics(args) -> int:
    gt_dir = Path(args.gt)
    render_dir = Path(args.render)
    if not gt_dir.is_dir():
        raise EmptyMatchError(f"ground-truth directory not found: {gt_dir}")
    if not render_dir.is_dir():
        raise EmptyMatchError(f"render directory not found: {render_dir}")
    gt_names = {p.name for p in gt_dir.glob(args.pattern) if p.is_file()}
    render_names = {p.name for p in render_dir.glob(args.pattern) if p.is_file()}
    common = sorted(gt_names & render_names)
    if not common:
        raise EmptyMatchError(
            f"no filenames matched between {gt_dir} and {render_dir} "
            f"with pattern {args.pattern!r}"
        )
    warnings = [f"unmatched in {gt_dir}: {n}" for n in sorted(gt_names - render_names)]
    warnings += [
        f"unmatched in {render_dir}: {n}" for n in sorted(render_names - gt_names)
    ]

    records = []
    for name in common:
        reference = load_image(gt_dir / name)
        test = load_image(render_dir / name)
        records.append(
            {"image_id": name, "psnr": psnr(reference, test), "ssim": ssim(reference, test)}
        )

    doc = {"channel_mode": "luma", "records": records, "warnings": warnings}
    if args.format == "json":
        text = _render_json(doc) + "\n"
    else:
        text = _render_csv(
            ["image_id", "psnr", "ssim"],
            [[r["image_id"], r["psnr"], r["ssim"]] for r in records],
        )
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# correlate

def _float_or_none(value):
    if value is None or value == "":
        return None
    if isinstance(value, str):
        return float(value)
    return float(value)


def _load_complexity_table(path):
    """-> (rows: {image_id: {column: value}}, groups: {image_id: group})"""
    p = Path(path)
    rows = {}
    groups = {}
    if p.suffix.lower() == ".json":
        with open(p, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        for rec in doc.get("records", []):
            image_id = rec["image_id"]
            rows[image_id] = {
                col: rec.get(col) for _, col in _COMPLEXITY_COLUMNS if rec.get(col) is not None
            }
            if rec.get("group") is not None:
                groups[image_id] = rec["group"]
    else:
        with open(p, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or "image_id" not in reader.fieldnames:
                raise SchemaError(f"{path}: complexity table lacks an image_id column")
            for raw in reader:
                image_id = raw["image_id"]
                row = {}
                for _, col in _COMPLEXITY_COLUMNS:
                    value = _float_or_none(raw.get(col))
                    if value is not None:
                        row[col] = value
                rows[image_id] = row
                if raw.get("group"):
                    groups[image_id] = raw["group"]
    if not rows:
        raise SchemaError(f"{path}: complexity table has no rows")
    return rows, groups


def _metric_value(value):
    if isinstance(value, str):
        return float(value)  # "inf" round-trips through JSON as a string
    return float(value)


def _load_quality_table(path):
    """-> {image_id: {metric_name: value}}"""
    p = Path(path)
    rows = {}
    if p.suffix.lower() == ".json":
        with open(p, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        for rec in doc.get("records", []):
            metrics = {}
            for key, value in rec.items():
                if key in ("image_id", "group") or value is None:
                    continue
                if key == "external" and isinstance(value, dict):
                    for name, ext in value.items():
                        metrics[name] = _metric_value(ext)
                    continue
                metrics[key] = _metric_value(value)
            rows[rec["image_id"]] = metrics
    else:
        for record in ingest_metrics_csv(p):
            metrics = dict(record.external)
            if record.psnr is not None:
                metrics["psnr"] = record.psnr
            if record.ssim is not None:
                metrics["ssim"] = record.ssim
            rows[record.image_id] = metrics
    if not rows:
        raise SchemaError(f"{path}: quality table has no rows")
    return rows


def cmd_correlate(args) -> int:
    complexity, groups = _load_complexity_table(args.complexity)
    quality = _load_quality_table(args.quality)

    joined = sorted(set(complexity) & set(quality))
    if not joined:
        preview_c = ", ".join(sorted(complexity)[:3])
        preview_q = ", ".join(sorted(quality)[:3])
        raise JoinError(
            "no overlapping image ids between tables "
            f"(complexity has: {preview_c}; quality has: {preview_q})"
        )
    excluded_complexity = len(complexity) - len(joined)
    excluded_quality = len(quality) - len(joined)

    metric_names = sorted({name for image_id in joined for name in quality[image_id]})

    reports = []
    warnings = []
    for comp_name, comp_col in _COMPLEXITY_COLUMNS:
        for metric_name in metric_names:
            pairs = []
            for image_id in joined:
                x = complexity[image_id].get(comp_col)
                y = quality[image_id].get(metric_name)
                if x is None or y is None:
                    continue
                if not (math.isfinite(x) and math.isfinite(y)):
                    continue
                pairs.append((image_id, float(x), float(y)))
            if not pairs:
                continue
            if args.pooling == "per-scene":
                by_group = {}
                for image_id, x, y in pairs:
                    group = groups.get(image_id)
                    if group is None:
                        continue
                    by_group.setdefault(group, []).append((x, y))
                xs = [
                    sum(x for x, _ in rows) / len(rows)
                    for rows in (by_group[g] for g in sorted(by_group))
                ]
                ys = [
                    sum(y for _, y in rows) / len(rows)
                    for rows in (by_group[g] for g in sorted(by_group))
                ]
            else:
                xs = [x for _, x, _ in pairs]
                ys = [y for _, _, y in pairs]
            try:
                report = correlation_report(metric_name, comp_name, xs, ys)
            except (DegenerateVarianceError, InsufficientDataError) as exc:
                warnings.append(f"{comp_name} vs {metric_name}: {exc}")
                continue
            reports.append(
                {
                    "metric": report.metric_name,
                    "complexity": report.complexity_name,
                    "pearson_r": report.pearson_r,
                    "slope": report.model.slope,
                    "intercept": report.model.intercept,
                    "n": report.model.n,
                    "interval_width_mean": report.interval_width_mean,
                }
            )

    doc = {
        "pooling": args.pooling,
        "n_joined": len(joined),
        "excluded": {
            "complexity_only": excluded_complexity,
            "quality_only": excluded_quality,
        },
        "reports": reports,
        "warnings": warnings,
    }
    if args.format == "json":
        text = _render_json(doc) + "\n"
    else:
        header = [
            "metric",
            "complexity",
            "pearson_r",
            "slope",
            "intercept",
            "n",
            "interval_width_mean",
        ]
        text = _render_csv(header, [[r[k] for k in header] for r in reports])
    _emit(text, args.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare

def _load_profile_doc(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise SchemaError(f"profile document not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and "profile" in doc:
        profile_doc = doc["profile"]
        meta = doc.get("meta")
    else:
        profile_doc = doc
        meta = doc.get("meta") if isinstance(doc, dict) else None
    if not isinstance(profile_doc, dict):
        raise SchemaError(f"{path} does not contain a profile object")
    return profile_doc, meta


def _meta_from_doc(meta):
    if not meta or not meta.get("resolution"):
        return None
    resolution = meta["resolution"]
    if len(resolution) != 2:
        return None
    return SceneMeta(
        resolution=(int(resolution[0]), int(resolution[1])),
        coverage_area_km2=meta.get("coverage_area_km2"),
        collection_policy=meta.get("collection_policy"),
    )


def cmd_compare(args) -> int:
    doc_a, meta_a = _load_profile_doc(args.profile_a)
    doc_b, meta_b = _load_profile_doc(args.profile_b)
    profile_a = profile_from_dict(doc_a)
    profile_b = profile_from_dict(doc_b)
    class_a = classify_descriptors(profile_a.mu, profile_a.alpha, profile_a.beta_)
    class_b = classify_descriptors(profile_b.mu, profile_b.alpha, profile_b.beta_)

    comparability = None
    scene_meta_a = _meta_from_doc(meta_a)
    scene_meta_b = _meta_from_doc(meta_b)
    if scene_meta_a is not None and scene_meta_b is not None:
        report = check_comparability(scene_meta_a, scene_meta_b)
        comparability = {
            "resolution_ratio": report.resolution_ratio,
            "extent_ratio": report.extent_ratio,
            "policy_match": report.policy_match,
            "warnings": list(report.warnings),
        }

    doc = {
        "a": {
            "scene_id": doc_a.get("scene_id"),
            "mu": profile_a.mu,
            "sigma": profile_a.sigma,
            "alpha": profile_a.alpha,
            "beta": profile_a.beta_,
            "class": {
                "level": class_a.level,
                "skew": class_a.skew,
                "modality": class_a.modality,
            },
        },
        "b": {
            "scene_id": doc_b.get("scene_id"),
            "mu": profile_b.mu,
            "sigma": profile_b.sigma,
            "alpha": profile_b.alpha,
            "beta": profile_b.beta_,
            "class": {
                "level": class_b.level,
                "skew": class_b.skew,
                "modality": class_b.modality,
            },
        },
        "deltas": {
            "mu": profile_b.mu - profile_a.mu,
            "sigma": profile_b.sigma - profile_a.sigma,
            "alpha": profile_b.alpha - profile_a.alpha,
            "beta": profile_b.beta_ - profile_a.beta_,
        },
        "class_differs": {
            "level": class_a.level != class_b.level,
            "skew": class_a.skew != class_b.skew,
            "modality": class_a.modality != class_b.modality,
        },
        "comparability": comparability,
    }
    _emit(_render_json(doc) + "\n", None)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="delscene",
        description="Delentropy-based scene complexity profiling and correlation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="score a scene manifest and fit its profile")
    p.add_argument("--manifest", required=True, help="scene manifest JSON")
    p.add_argument("--bins", type=int, default=256, help="deldensity bins per axis")
    p.add_argument("--sigma", type=float, default=1.0, help="blur standard deviation")
    p.add_argument(
        "--gradient-range",
        choices=["theoretical", "per-image-max"],
        default="theoretical",
    )
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--workers", type=int, default=1, help="per-image worker threads")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("metrics", help="PSNR/SSIM between matching files of two dirs")
    p.add_argument("--gt", required=True, help="ground-truth directory")
    p.add_argument("--render", required=True, help="rendered/reconstructed directory")
    p.add_argument("--pattern", default="*", help="filename glob (default: *)")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("correlate", help="correlate complexity with quality metrics")
    p.add_argument("--complexity", required=True, help="profile output (JSON or CSV)")
    p.add_argument("--quality", required=True, help="metrics table (JSON or CSV)")
    p.add_argument("--pooling", choices=["pooled", "per-scene"], default="pooled")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("compare", help="diff two serialized scene profiles")
    p.add_argument("profile_a")
    p.add_argument("profile_b")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DelsceneError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
