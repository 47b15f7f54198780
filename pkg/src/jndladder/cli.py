"""Command-line front end: analyze -> train -> predict-ladder -> evaluate."""

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bjontegaard import bd_quality, bd_rate, curve_from_rows, read_rd_csv, storage_delta
from .complexity import complexity_from_dict, complexity_to_dict, scene_complexity
from .config import PipelineConfig, config_hash, load_config, override
from .errors import JndLadderError, MissingModelError, SchemaError
from .forest import DEFAULT_RF_PARAMS, rf_train
from .ingest import load_sidecar_metadata, parse_raw_yuv, parse_y4m, Y4M_MAGIC
from .jnd import (
    JND_FEATURE_NAMES,
    assemble_jnd_vector,
    ingest_bitstream_features,
    jnd_vector_from_dict,
    jnd_vector_to_dict,
    pooled_glcm,
)
from .ladder import (
    build_ladder,
    convex_hull_ladder,
    eliminate_representations,
    ladder_to_csv,
    ladder_to_dict,
    MeasuredRDPoint,
    predict_jnd_threshold,
)
from .modelio import load_model, save_model
from .scores import mae, r2_score
from .selection import forward_sfs, kfold_indices
from .svr import svr_train

LADDER_CSV_COLUMNS = (
    "scene_id",
    "E_Y",
    "h",
    "L_Y",
    "resolution",
    "bitrate_kbps",
    "crf",
    "vmaf",
    "psnr",
)


def _provenance(cfg: PipelineConfig) -> dict:
    return {
        "tool_version": __version__,
        "config_hash": config_hash(cfg),
        "seed": cfg.seed,
        "config": cfg.to_dict(),
    }


def _write_json(path: Path, doc: dict) -> None:
    path.write_text(json.dumps(doc, indent=2) + "\n")


def _read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}")


def _effective_config(args) -> PipelineConfig:
    cfg = load_config(getattr(args, "config", None))
    return override(
        cfg,
        seed=getattr(args, "seed", None),
        block_size=getattr(args, "block_size", None),
        patch_size=getattr(args, "patch_size", None),
        glcm_levels=getattr(args, "glcm_levels", None),
        glcm_offset=getattr(args, "glcm_offset", None),
        models_dir=getattr(args, "models", None),
        jnd_model=getattr(args, "jnd_model", None),
    )


def _threads(args) -> int:
    # worker count is an execution knob, not configuration: results are
    # thread-count independent, so it stays out of the config echo/hash
    return max(1, getattr(args, "threads", None) or 1)


def _out_dir(args) -> Path:
    out = Path(args.output_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- analyze


def cmd_analyze(args) -> int:
    cfg = _effective_config(args)
    out = _out_dir(args)
    data = Path(args.input).read_bytes()
    if data.startswith(Y4M_MAGIC):
        clip = parse_y4m(data, scene_id=Path(args.input).stem)
    else:
        if not args.meta:
            raise SchemaError(
                "input is not Y4M; raw YUV needs a --meta sidecar file"
            )
        meta = load_sidecar_metadata(Path(args.meta).read_text())
        clip = parse_raw_yuv(data, **meta)

    sc = scene_complexity(clip, block_size=cfg.block_size, threads=_threads(args))
    doc = complexity_to_dict(sc, clip, cfg.block_size)
    doc["provenance"] = _provenance(cfg)
    complexity_path = out / f"{clip.scene_id}.complexity.json"
    _write_json(complexity_path, doc)
    print(f"wrote {complexity_path}")

    if args.bitstream:
        bitstream = ingest_bitstream_features(_read_json(args.bitstream))
        levels = cfg.glcm_levels or (1 << clip.frames[0].bit_depth)
        pools = pooled_glcm(
            clip,
            patch_size=cfg.patch_size,
            offset=cfg.glcm_offset,
            levels=levels,
            threads=_threads(args),
        )
        vector = assemble_jnd_vector(sc, bitstream, pools)
        jnd_doc = jnd_vector_to_dict(
            vector, clip.scene_id, cfg.patch_size, cfg.glcm_offset, levels
        )
        jnd_doc["provenance"].update(_provenance(cfg))
        jnd_path = out / f"{clip.scene_id}.jnd.json"
        _write_json(jnd_path, jnd_doc)
        print(f"wrote {jnd_path}")
    else:
        print(
            "warning: no bitstream features supplied, JND features skipped",
            file=sys.stderr,
        )
    return 0


# ------------------------------------------------------------------ train


def _read_ladder_dataset(path) -> dict[str, dict[str, np.ndarray]]:
    """Training rows grouped by resolution; X columns are E_Y,h,L_Y,ln(bitrate)."""
    reader = csv.DictReader(io.StringIO(Path(path).read_text()))
    if reader.fieldnames is None:
        raise SchemaError(f"{path} is empty")
    missing = set(LADDER_CSV_COLUMNS) - set(reader.fieldnames)
    if missing:
        raise SchemaError(f"{path} is missing columns {sorted(missing)}")
    groups: dict[str, dict[str, list]] = {}
    for i, row in enumerate(reader, start=2):
        try:
            res = row["resolution"]
            x = [
                float(row["E_Y"]),
                float(row["h"]),
                float(row["L_Y"]),
                math.log(float(row["bitrate_kbps"])),
            ]
            rec = groups.setdefault(res, {"X": [], "vmaf": [], "crf": []})
            rec["X"].append(x)
            rec["vmaf"].append(float(row["vmaf"]))
            rec["crf"].append(float(row["crf"]))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{path} row {i}: {exc}")
    if not groups:
        raise SchemaError(f"{path} has no data rows")
    return {
        res: {key: np.asarray(val) for key, val in rec.items()}
        for res, rec in groups.items()
    }


def _cv_report_rf(X, y, folds, seed, threads):
    report = []
    for train, test in kfold_indices(len(y), folds, seed):
        model = rf_train(X[train], y[train], seed=seed, threads=threads)
        pred = model.predict_batch(X[test])
        report.append({"r2": r2_score(y[test], pred), "mae": mae(y[test], pred)})
    return report


def _cmd_train_rf(args, target: str) -> int:
    cfg = _effective_config(args)
    out = _out_dir(args)
    groups = _read_ladder_dataset(args.dataset)
    feature_names = ("E_Y", "h", "L_Y", "ln_bitrate")
    summary = {}
    for res in sorted(groups, key=lambda r: (len(r), r)):
        X = groups[res]["X"]
        y = groups[res][target]
        folds = _cv_report_rf(X, y, args.folds, cfg.seed, _threads(args))
        model = rf_train(
            X,
            y,
            seed=cfg.seed,
            feature_names=feature_names,
            target_name=target,
            resolution_tag=res,
            threads=_threads(args),
        )
        model_path = out / f"{target}_{res}.json"
        save_model(model, model_path)
        summary[res] = {
            "model_file": model_path.name,
            "n_samples": len(y),
            "folds": folds,
            "mean_r2": float(np.mean([f["r2"] for f in folds])),
            "mean_mae": float(np.mean([f["mae"] for f in folds])),
        }
        print(
            f"{target}/{res}: {len(y)} samples, "
            f"CV R2={summary[res]['mean_r2']:.4f} MAE={summary[res]['mean_mae']:.4f}"
        )
    report = {
        "kind": f"{target}-training-report",
        "hyperparameters": DEFAULT_RF_PARAMS,
        "cv_folds": args.folds,
        "resolutions": summary,
        "provenance": _provenance(cfg),
    }
    _write_json(out / f"{target}_training_report.json", report)
    return 0


def cmd_train_vmaf(args) -> int:
    return _cmd_train_rf(args, "vmaf")


def cmd_train_crf(args) -> int:
    return _cmd_train_rf(args, "crf")


def _read_jnd_dataset(path, target="c_T"):
    reader = csv.DictReader(io.StringIO(Path(path).read_text()))
    if reader.fieldnames is None:
        raise SchemaError(f"{path} is empty")
    missing = (set(JND_FEATURE_NAMES) | {target}) - set(reader.fieldnames)
    if missing:
        raise SchemaError(f"{path} is missing columns {sorted(missing)}")
    X, y = [], []
    for i, row in enumerate(reader, start=2):
        try:
            X.append([float(row[name]) for name in JND_FEATURE_NAMES])
            y.append(float(row[target]))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{path} row {i}: {exc}")
    if not X:
        raise SchemaError(f"{path} has no data rows")
    return np.asarray(X), np.asarray(y)


def cmd_train_jnd(args) -> int:
    cfg = _effective_config(args)
    out = _out_dir(args)
    X, y = _read_jnd_dataset(args.dataset)
    folds = []
    for train, test in kfold_indices(len(y), args.folds, cfg.seed):
        model = svr_train(X[train], y[train], feature_names=JND_FEATURE_NAMES)
        pred = model.predict_batch(X[test])
        folds.append({"mae": mae(y[test], pred), "r2": r2_score(y[test], pred)})
    model = svr_train(X, y, feature_names=JND_FEATURE_NAMES)
    model_path = out / "jnd_svr.json"
    save_model(model, model_path)
    mean_mae = float(np.mean([f["mae"] for f in folds]))
    for i, f in enumerate(folds, start=1):
        print(f"fold {i}: MAE={f['mae']:.4f} R2={f['r2']:.4f}")
    print(f"mean MAE={mean_mae:.4f}; wrote {model_path}")
    report = {
        "kind": "jnd-training-report",
        "cv_folds": args.folds,
        "n_samples": len(y),
        "folds": folds,
        "mean_mae": mean_mae,
        "converged": model.converged,
        "kkt_violation": model.kkt_violation,
        "provenance": _provenance(cfg),
    }
    _write_json(out / "jnd_training_report.json", report)
    return 0


def cmd_select_features(args) -> int:
    cfg = _effective_config(args)
    out = _out_dir(args)
    reader = csv.DictReader(io.StringIO(Path(args.dataset).read_text()))
    if reader.fieldnames is None:
        raise SchemaError(f"{args.dataset} is empty")
    if args.target not in reader.fieldnames:
        raise SchemaError(f"{args.dataset} has no target column {args.target!r}")
    names = [
        c for c in reader.fieldnames if c not in (args.target, "scene_id")
    ]
    X, y = [], []
    for i, row in enumerate(reader, start=2):
        try:
            X.append([float(row[c]) for c in names])
            y.append(float(row[args.target]))
        except (TypeError, ValueError) as exc:
            raise SchemaError(f"{args.dataset} row {i}: {exc}")
    selection = forward_sfs(
        np.asarray(X),
        np.asarray(y),
        k=args.k,
        feature_names=tuple(names),
        folds=args.folds,
        seed=cfg.seed,
    )
    for rank, name in enumerate(selection, start=1):
        print(f"{rank:2d}. {name}")
    _write_json(
        out / "selected_features.json",
        {
            "kind": "feature-selection",
            "k": args.k,
            "cv_folds": args.folds,
            "selection": selection,
            "provenance": _provenance(cfg),
        },
    )
    return 0


# --------------------------------------------------------------- predict


def _load_rf_models(models_dir: Path, target: str, resolutions) -> dict:
    models = {}
    for tag in resolutions:
        path = models_dir / f"{target}_{tag}.json"
        if not path.exists():
            raise MissingModelError(f"no {target} model for {tag}: {path} not found")
        models[tag] = load_model(path)
    return models


def cmd_predict_ladder(args) -> int:
    cfg = _effective_config(args)
    out = _out_dir(args)
    ladder_cfg = cfg.ladder_config()
    doc = _read_json(args.features)
    sc = complexity_from_dict(doc)
    features = (sc.E_Y, sc.h, sc.L_Y)

    if not cfg.models_dir:
        raise SchemaError("no models directory (use --models or the config file)")
    models_dir = Path(cfg.models_dir)
    vmaf_models = _load_rf_models(models_dir, "vmaf", ladder_cfg.resolutions)
    crf_models = _load_rf_models(models_dir, "crf", ladder_cfg.resolutions)
    ladder = build_ladder(
        features, ladder_cfg, vmaf_models, crf_models, scene_id=sc.scene_id
    )

    if not args.no_jnd:
        if not cfg.jnd_model:
            raise SchemaError(
                "JND elimination needs --jnd-model (or pass --no-jnd)"
            )
        if not args.jnd_features:
            raise SchemaError(
                "JND elimination needs --jnd-features (or pass --no-jnd)"
            )
        vector = jnd_vector_from_dict(_read_json(args.jnd_features))
        svr_model = load_model(cfg.jnd_model)
        threshold = predict_jnd_threshold(vector, svr_model, ladder_cfg)
        ladder = eliminate_representations(ladder, threshold, ladder_cfg.r_max)

    doc = ladder_to_dict(ladder, ladder_cfg)
    doc["provenance"] = _provenance(cfg)
    json_path = out / f"{sc.scene_id}.ladder.json"
    csv_path = out / f"{sc.scene_id}.ladder.csv"
    _write_json(json_path, doc)
    csv_path.write_text(ladder_to_csv(ladder))

    kept = len(ladder.surviving())
    eliminated = len(ladder.entries) - kept
    summary = f"scene {sc.scene_id}: {kept} kept, {eliminated} eliminated"
    if ladder.jnd_threshold is not None:
        summary += f", jnd threshold crf {ladder.jnd_threshold:.1f}"
    print(summary)
    print(f"wrote {json_path} and {csv_path}")
    return 0


def cmd_oracle_ladder(args) -> int:
    cfg = _effective_config(args)
    out = _out_dir(args)
    ladder_cfg = cfg.ladder_config()
    scenes = read_rd_csv(Path(args.rd_csv).read_text())
    column = {"vmaf": "vmaf", "psnr": "psnr_db"}[args.metric]
    for scene_id in sorted(scenes):
        points = [
            MeasuredRDPoint(
                resolution=r["resolution"],
                bitrate_kbps=r["bitrate_kbps"],
                quality=r[column],
            )
            for r in scenes[scene_id]
        ]
        hull = convex_hull_ladder(points, ladder_cfg.bitrates_kbps)
        doc = {
            "schema_version": 1,
            "kind": "oracle-ladder",
            "scene_id": scene_id,
            "metric": args.metric,
            "entries": [
                {"resolution": res, "bitrate_kbps": b, "quality": q}
                for res, b, q in hull
            ],
            "provenance": _provenance(cfg),
        }
        path = out / f"{scene_id}.oracle.json"
        _write_json(path, doc)
        print(f"wrote {path}")
    return 0


# -------------------------------------------------------------- evaluate


def cmd_evaluate(args) -> int:
    cfg = _effective_config(args)
    out = _out_dir(args)
    ref_scenes = read_rd_csv(Path(args.ref).read_text())
    test_scenes = read_rd_csv(Path(args.test).read_text())
    if set(ref_scenes) != set(test_scenes):
        only_ref = sorted(set(ref_scenes) - set(test_scenes))
        only_test = sorted(set(test_scenes) - set(ref_scenes))
        raise SchemaError(
            f"scene sets differ: only in ref {only_ref}, only in test {only_test}"
        )

    rows = []
    for scene_id in sorted(ref_scenes):
        ref_curve = curve_from_rows(ref_scenes[scene_id], args.metric)
        test_curve = curve_from_rows(test_scenes[scene_id], args.metric)
        rows.append(
            {
                "scene_id": scene_id,
                "bd_rate_pct": bd_rate(ref_curve, test_curve),
                "bd_quality": bd_quality(ref_curve, test_curve),
                "storage_delta": storage_delta(
                    [r["bitrate_kbps"] for r in ref_scenes[scene_id]],
                    [r["bitrate_kbps"] for r in test_scenes[scene_id]],
                ),
            }
        )
    means = {
        key: float(np.mean([r[key] for r in rows]))
        for key in ("bd_rate_pct", "bd_quality", "storage_delta")
    }

    header = f"{'scene':<24}{'BD-rate %':>12}{'BD-quality':>12}{'dS':>10}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(
            f"{r['scene_id']:<24}{r['bd_rate_pct']:>12.4f}"
            f"{r['bd_quality']:>12.4f}{r['storage_delta']:>10.4f}"
        )
    print(
        f"{'mean':<24}{means['bd_rate_pct']:>12.4f}"
        f"{means['bd_quality']:>12.4f}{means['storage_delta']:>10.4f}"
    )

    lines = ["scene_id,bd_rate_pct,bd_quality,storage_delta"]
    for r in rows + [{"scene_id": "mean", **means}]:
        lines.append(
            f"{r['scene_id']},{r['bd_rate_pct']!r},{r['bd_quality']!r},"
            f"{r['storage_delta']!r}"
        )
    report_path = out / "evaluation_report.csv"
    report_path.write_text("\n".join(lines) + "\n")
    print(f"wrote {report_path}")
    return 0


# ------------------------------------------------------------------ main


def _offset_pair(text: str) -> tuple[int, int]:
    try:
        dy, dx = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'dy,dx' integers")
    return dy, dx


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags override it")
    common.add_argument("--seed", type=int, help="master RNG seed")
    common.add_argument("--threads", type=int, help="worker thread count")
    common.add_argument("--output-dir", help="directory for output files")

    parser = argparse.ArgumentParser(
        prog="jndladder",
        description="Per-scene JND-aware bitrate ladder prediction",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="extract features")
    p.add_argument("input", help="Y4M file or raw planar YUV")
    p.add_argument("--meta", help="sidecar metadata JSON for raw YUV input")
    p.add_argument("--bitstream", help="bitstream features JSON (enables JND features)")
    p.add_argument("--block-size", type=int, dest="block_size")
    p.add_argument("--patch-size", type=int, dest="patch_size")
    p.add_argument("--glcm-levels", type=int, dest="glcm_levels")
    p.add_argument("--glcm-offset", type=_offset_pair, dest="glcm_offset")
    p.set_defaults(func=cmd_analyze)

    for name, fn in (("train-vmaf", cmd_train_vmaf), ("train-crf", cmd_train_crf)):
        p = sub.add_parser(name, parents=[common], help=f"train {name[6:]} models")
        p.add_argument("dataset", help="training CSV")
        p.add_argument("--folds", type=int, default=5)
        p.set_defaults(func=fn)

    p = sub.add_parser("train-jnd", parents=[common], help="train the JND threshold model")
    p.add_argument("dataset", help="JND training CSV")
    p.add_argument("--folds", type=int, default=5)
    p.set_defaults(func=cmd_train_jnd)

    p = sub.add_parser(
        "select-features", parents=[common], help="forward sequential feature selection"
    )
    p.add_argument("dataset", help="feature matrix CSV with a target column")
    p.add_argument("--k", type=int, default=15)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--target", default="c_T")
    p.set_defaults(func=cmd_select_features)

    p = sub.add_parser("predict-ladder", parents=[common], help="run the ladder predictor")
    p.add_argument("--features", required=True, help="scene-complexity JSON")
    p.add_argument("--jnd-features", help="JND feature vector JSON")
    p.add_argument("--models", help="directory with per-resolution model files")
    p.add_argument("--jnd-model", dest="jnd_model", help="JND SVR model file")
    p.add_argument("--no-jnd", action="store_true", help="skip JND elimination")
    p.set_defaults(func=cmd_predict_ladder)

    p = sub.add_parser(
        "oracle-ladder", parents=[common], help="convex-hull ladder from measured RD data"
    )
    p.add_argument("rd_csv", help="measured RD CSV")
    p.add_argument("--metric", choices=("vmaf", "psnr"), default="vmaf")
    p.set_defaults(func=cmd_oracle_ladder)

    p = sub.add_parser("evaluate", parents=[common], help="BD metrics and storage delta")
    p.add_argument("--ref", required=True, help="reference ladder RD CSV")
    p.add_argument("--test", required=True, help="test ladder RD CSV")
    p.add_argument("--metric", choices=("vmaf", "psnr"), default="vmaf")
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (JndLadderError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
