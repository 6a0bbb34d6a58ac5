"""Command-line entry point.

Subcommands:
    eval-graphic     overlap / underlay / alignment / occupancy over a corpus
    eval-content     image-dependent metrics (complexity, saliency, attention)
    fid              Fréchet distance between two LFV1 feature files
    train-pd-demo    synthetic-domain discriminator / adversarial training
    make-white-patch rasterize annotation boxes into binary PGM masks

Every run echoes its resolved configuration (including the loss-weight
defaults) into the report header, and reports are written atomically so a
failed run never leaves a partial file. All runs are deterministic given
identical inputs, seed, and flags; the default seed is 1729.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .dataio import (
    AnnotationError,
    FeatureFileError,
    RasterFormatError,
    SampleRecord,
    load_annotations,
    read_feature_file,
    read_raster,
    write_pgm,
)
from .features import (
    DEFAULT_FRECHET_EPS,
    FeatureProviderSpec,
    ProviderError,
    fid_pipeline,
    saliency_occlusion,
)
from .graphic import alignment_distance, overlap_degree, underlay_coverage
from .losses import LossWeights
from .nn import (
    SyntheticDomainConfig,
    TrainingDiverged,
    synth_dataset,
    train_adversarial,
    train_pd_only,
)
from .raster import attention_occlusion, background_complexity, make_white_patch_map
from .report import REPORT_VERSION, MetricReport

DEFAULT_SEED = 1729

#: Reports put complexity values on the 0-255 intensity scale.
COMPLEXITY_REPORT_SCALE = 255.0

GRAPHIC_METRICS = ("r_ove", "r_und", "r_ali", "r_occ")
CONTENT_METRICS = ("r_com", "r_shm", "r_sub")


class CliError(RuntimeError):
    pass


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alpha", type=float, default=2.0, help="source-domain loss weight")
    parser.add_argument("--beta", type=float, default=1.0, help="target-domain loss weight")
    parser.add_argument("--gamma", type=float, default=6.0, help="adversarial loss weight")
    parser.add_argument(
        "--smoothing", type=float, default=0.2, help="one-target label smoothing low value"
    )
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help="run seed")


def _loss_weights(args: argparse.Namespace) -> LossWeights:
    return LossWeights(
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        smoothing_low=args.smoothing,
        fake_source_target=0.2,
    )


def _weights_config(w: LossWeights) -> dict:
    return {
        "alpha": w.alpha,
        "beta": w.beta,
        "gamma": w.gamma,
        "smoothing_low": w.smoothing_low,
        "fake_source_target": w.fake_source_target,
    }


def _render_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def _write_atomic(text: str, out: str) -> None:
    out_path = Path(out)
    fd, tmp = tempfile.mkstemp(dir=out_path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _render_csv(config: dict, rows: list[dict], corpus: MetricReport, metrics: tuple[str, ...]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    header = ["id"] + list(metrics) + [f"{m}_count" for m in metrics]
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [row["id"]]
            + ["" if row[m] is None else repr(row[m]) for m in metrics]
            + ["" for _ in metrics]
        )
    corpus_dict = corpus.to_dict()
    writer.writerow(
        ["__corpus__"]
        + [
            "" if corpus_dict.get(m, {}).get("value") is None else repr(corpus_dict[m]["value"])
            for m in metrics
        ]
        + [str(corpus_dict.get(m, {}).get("count", 0)) for m in metrics]
    )
    return buf.getvalue()


def _evaluate_rows(records: list[SampleRecord], fn, workers: int | None) -> list[dict]:
    n = workers if workers is not None else (os.cpu_count() or 1)
    if n <= 1 or len(records) <= 1:
        rows = [fn(rec) for rec in records]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            rows = list(pool.map(fn, records))
    return sorted(rows, key=lambda r: r["id"])


def _emit_metric_report(
    args: argparse.Namespace, command: str, config: dict, rows: list[dict], metrics: tuple[str, ...]
) -> None:
    corpus = MetricReport.from_samples({m: [row[m] for row in rows] for m in metrics})
    if args.format == "json":
        report = {
            "report_version": REPORT_VERSION,
            "command": command,
            "config": config,
            "per_sample": rows,
            "corpus": corpus.to_dict(),
        }
        _write_atomic(_render_json(report), args.out)
    else:
        _write_atomic(_render_csv(config, rows, corpus, metrics), args.out)


def _graphic_row(rec: SampleRecord) -> dict:
    lay = rec.layout
    return {
        "id": rec.id,
        "r_ove": overlap_degree(lay),
        "r_und": underlay_coverage(lay),
        "r_ali": alignment_distance(lay),
        "r_occ": 1.0 if len(lay) >= 1 else 0.0,
    }


def cmd_eval_graphic(args: argparse.Namespace) -> int:
    records = load_annotations(args.annotations, args.images_root)
    config = {
        "command": "eval-graphic",
        "annotations": args.annotations,
        "images_root": args.images_root,
        "format": args.format,
        "workers": args.workers if args.workers is not None else "auto",
        "seed": args.seed,
        "loss_weights": _weights_config(_loss_weights(args)),
    }
    rows = _evaluate_rows(records, _graphic_row, args.workers)
    _emit_metric_report(args, "eval-graphic", config, rows, GRAPHIC_METRICS)
    return 0


def _content_row(rec: SampleRecord, provider: FeatureProviderSpec | None) -> dict:
    img = read_raster(rec.image_path)
    complexity = background_complexity(img, rec.layout)
    if complexity is not None:
        complexity *= COMPLEXITY_REPORT_SCALE

    shm = None
    if rec.saliency_path is not None:
        if provider is None:
            raise CliError(
                f"sample {rec.id!r} has a saliency map but no --provider was given (needed for r_shm)"
            )
        shm = saliency_occlusion(read_raster(rec.saliency_path), rec.layout, provider)

    sub = None
    if rec.attention_path is not None:
        attn = read_raster(rec.attention_path)
        try:
            sub = attention_occlusion(attn, rec.layout)
        except ValueError as exc:
            raise CliError(f"sample {rec.id!r}: {exc}") from None

    return {"id": rec.id, "r_com": complexity, "r_shm": shm, "r_sub": sub}


def cmd_eval_content(args: argparse.Namespace) -> int:
    records = load_annotations(args.annotations, args.images_root)
    provider = FeatureProviderSpec.parse(args.provider) if args.provider else None
    config = {
        "command": "eval-content",
        "annotations": args.annotations,
        "images_root": args.images_root,
        "provider": provider.describe() if provider else None,
        "format": args.format,
        "workers": args.workers if args.workers is not None else "auto",
        "seed": args.seed,
        "r_com_scale": COMPLEXITY_REPORT_SCALE,
        "loss_weights": _weights_config(_loss_weights(args)),
    }
    rows = _evaluate_rows(records, lambda rec: _content_row(rec, provider), args.workers)
    _emit_metric_report(args, "eval-content", config, rows, CONTENT_METRICS)
    return 0


def cmd_fid(args: argparse.Namespace) -> int:
    real = read_feature_file(args.real)
    generated = read_feature_file(args.generated)
    value = fid_pipeline(real, generated, eps=args.eps)
    print(value)
    if args.out:
        report = {
            "report_version": REPORT_VERSION,
            "command": "fid",
            "config": {
                "command": "fid",
                "real": args.real,
                "generated": args.generated,
                "eps": args.eps,
                "seed": args.seed,
                "loss_weights": _weights_config(_loss_weights(args)),
            },
            "fid": value,
            "dim": real.dim,
            "rows": {"real": real.count, "generated": generated.count},
        }
        _write_atomic(_render_json(report), args.out)
    return 0


def cmd_train_pd_demo(args: argparse.Namespace) -> int:
    weights = _loss_weights(args)
    cfg = SyntheticDomainConfig(seed=args.seed)
    data = synth_dataset(cfg)
    if args.mode == "pd-only":
        result = train_pd_only(
            data, steps=args.steps, lr=args.lr, weights=weights, seed=args.seed
        )
    else:
        result = train_adversarial(
            data, steps=args.steps, weights=weights, seed=args.seed, lr_d=args.lr
        )
    lines = [json.dumps(rec.to_dict(), sort_keys=True) for rec in result.trace]
    _write_atomic("\n".join(lines) + "\n", args.out)

    initial_gap = result.initial_gap
    final_gap = result.final_gap
    summary = {
        "report_version": REPORT_VERSION,
        "command": "train-pd-demo",
        "config": {
            "command": "train-pd-demo",
            "mode": args.mode,
            "steps": args.steps,
            "lr": args.lr,
            "seed": args.seed,
            "out": args.out,
            "image_hw": list(cfg.image_hw),
            "n_source": cfg.n_source,
            "n_target": cfg.n_target,
            "n_eval": cfg.n_eval,
            "inpaint_mode": cfg.inpaint_mode,
            "loss_weights": _weights_config(weights),
        },
        "summary": {
            "pd_params": result.pdnet.num_params,
            "final_l_pd": result.trace[-1].l_pd,
            "final_auc": result.final_auc,
            "initial_gap": initial_gap,
            "final_gap": final_gap,
            "gap_reduction": 0.0 if initial_gap == 0.0 else 1.0 - final_gap / initial_gap,
        },
    }
    print(_render_json(summary), end="")
    return 0


def cmd_make_white_patch(args: argparse.Namespace) -> int:
    records = load_annotations(args.annotations, args.images_root)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    maps = [(rec.id, make_white_patch_map(rec.layout, rec.width, rec.height)) for rec in records]
    for sid, wp in maps:
        write_pgm(wp, out_dir / f"{sid}.pgm")
    print(len(maps))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="layoutlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-graphic", help="content-agnostic layout metrics")
    p.add_argument("--annotations", required=True)
    p.add_argument("--images-root", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--workers", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_eval_graphic)

    p = sub.add_parser("eval-content", help="image-dependent layout metrics")
    p.add_argument("--annotations", required=True)
    p.add_argument("--images-root", default=None)
    p.add_argument(
        "--provider",
        default=None,
        help="feature provider: downsample[:R], gradhist, or file:PATH",
    )
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--workers", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=cmd_eval_content)

    p = sub.add_parser("fid", help="Fréchet distance between two feature files")
    p.add_argument("real", help="LFV1 feature file of the reference population")
    p.add_argument("generated", help="LFV1 feature file of the compared population")
    p.add_argument("--eps", type=float, default=DEFAULT_FRECHET_EPS)
    p.add_argument("--out", default=None)
    _add_common(p)
    p.set_defaults(func=cmd_fid)

    p = sub.add_parser("train-pd-demo", help="synthetic domain-adaptation trainer")
    p.add_argument("--mode", choices=("pd-only", "adversarial"), default="pd-only")
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--out", required=True, help="trace file (line-delimited JSON)")
    _add_common(p)
    p.set_defaults(func=cmd_train_pd_demo)

    p = sub.add_parser("make-white-patch", help="write binary box masks as PGM")
    p.add_argument("--annotations", required=True)
    p.add_argument("--images-root", default=None)
    p.add_argument("--out-dir", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_make_white_patch)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (
        AnnotationError,
        FeatureFileError,
        RasterFormatError,
        ProviderError,
        TrainingDiverged,
        CliError,
        ValueError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
