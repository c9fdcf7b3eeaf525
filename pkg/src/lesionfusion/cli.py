"""Command line entry point: ``lesionfusion <command> ...``.

Each command prints one ``key=value`` summary line on stdout and writes
diagnostics to stderr. Exit status is 0 on success, 1 on a data or I/O
error (the error class name is printed), 2 on bad arguments.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .calibration import Calibration, derive_calibration, stratified_kfold
from .color_constancy import ClipPolicy, Method, NormalizationConfig, normalize_image, read_png, write_png
from .config import RunConfig, load_run_config
from .dataset_io import (
    Label,
    ScoreTable,
    align,
    as_task,
    load_ground_truth,
    load_metadata,
    load_scores,
    to_binary,
    validate_class_counts,
    write_scores,
)
from .errors import InvalidConfig, IoFailure, LesionFusionError
from .fusion import GateConfig, run_pipeline
from .metrics import evaluate, roc_points, write_roc_csv
from .providers import EnsembleConfig, ProviderSpec, aggregate_mean, resolve_ensemble


class _Run:
    """Resolved inputs shared by all commands."""

    def __init__(self, args):
        self.args = args
        self.seed = getattr(args, "seed", None)
        self.workers = getattr(args, "workers", None) or 1
        config_path = getattr(args, "config", None)
        self.config = load_run_config(config_path) if config_path else RunConfig()
        out_dir = getattr(args, "out_dir", None) or self.config.paths.get("out_dir")
        self.out_dir = Path(out_dir) if out_dir else None
        self.inputs: list[Path] = []

    def out_path(self, explicit, default_name: str) -> Path:
        if explicit:
            path = Path(explicit)
        elif self.out_dir is not None:
            path = self.out_dir / default_name
        else:
            path = Path(default_name)
        path.parent.mkdir(parents=True, exist_ok=True)
        for src in self.inputs:
            if src.resolve() == path.resolve():
                raise InvalidConfig(f"output {path} would overwrite an input file")
        return path

    def input(self, explicit, config_key: Optional[str] = None, required=True) -> Optional[Path]:
        value = explicit or (self.config.paths.get(config_key) if config_key else None)
        if value is None:
            if required:
                raise InvalidConfig(f"missing input ({config_key or 'path'})")
            return None
        path = Path(value)
        self.inputs.append(path)
        return path

    def echo_config(self, command: str) -> None:
        if self.out_dir is None:
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        (self.out_dir / f"effective_config.{command}.json").write_text(
            self.config.to_json(), encoding="utf-8"
        )


def _summary(**fields) -> None:
    parts = []
    for k, v in fields.items():
        if isinstance(v, float):
            v = repr(v)
        parts.append(f"{k}={v}")
    print(" ".join(parts))


def _method(token: str) -> Method:
    return Method(token.replace("-", "_"))


_CLIP_ALIASES = {"clip": ClipPolicy.clip_to_one, "rescale": ClipPolicy.rescale_if_overflow}


def _clip(token: str) -> ClipPolicy:
    return _CLIP_ALIASES.get(token) or ClipPolicy(token)


# --- commands -------------------------------------------------------------


def cmd_normalize(run: _Run) -> int:
    a = run.args
    base = run.config.normalization
    config = NormalizationConfig(
        method=_method(a.method) if a.method else base.method,
        p=a.p if a.p is not None else base.p,
        clip_policy=_clip(a.clip) if a.clip else base.clip_policy,
        gamma=a.gamma if a.gamma is not None else base.gamma,
    )
    run.config.normalization = config
    src = Path(a.in_dir)
    if not src.is_dir():
        raise IoFailure(f"{src}: not a directory")
    dst = Path(a.out_dir_images) if a.out_dir_images else run.out_dir
    if dst is None:
        raise InvalidConfig("normalize needs --out or --out-dir")
    if dst.resolve() == src.resolve():
        raise InvalidConfig("output directory must differ from input directory")
    dst.mkdir(parents=True, exist_ok=True)
    files = sorted(p for p in src.iterdir() if p.suffix.lower() == ".png")

    def work(path: Path):
        try:
            write_png(normalize_image(read_png(path), config), dst / path.name)
            return None
        except LesionFusionError as exc:
            return f"{path.name}: {type(exc).__name__}: {exc}"

    if run.workers > 1:
        with ThreadPoolExecutor(max_workers=run.workers) as pool:
            results = list(pool.map(work, files))
    else:
        results = [work(p) for p in files]
    failures = [r for r in results if r is not None]
    for msg in failures:
        print(f"error: {msg}", file=sys.stderr)
    _summary(command="normalize", processed=len(files) - len(failures), failed=len(failures))
    return 1 if failures else 0


def cmd_aggregate(run: _Run) -> int:
    a = run.args
    task = as_task(a.task)
    tables = [load_scores(run.input(p), task) for p in a.inputs]
    out = run.out_path(a.out, f"scores_{task.value.lower()}.csv")
    table = aggregate_mean(tables)
    write_scores(table, out)
    _summary(command="aggregate", task=task.value, members=len(tables), n=len(table), out=out)
    return 0


def cmd_synth_scores(run: _Run) -> int:
    a = run.args
    truth = load_ground_truth(run.input(a.truth, "truth"))
    tasks = [as_task(a.task)] if a.task else [Label.MM, Label.SK]
    use_flags = a.pos_strength is not None or a.confuser_bias is not None or not run.config.providers
    base_seed = run.seed if run.seed is not None else 0
    written = []
    for task in tasks:
        if use_flags or task not in run.config.providers:
            spec = ProviderSpec(
                kind="synthetic_oracle",
                task=task,
                seed=(base_seed + (task is Label.SK)) % 2**64,
                pos_strength=a.pos_strength if a.pos_strength is not None else 0.8,
                confuser_bias=(a.confuser_bias or 0.0) if task is Label.MM else 0.0,
            )
            ensemble = EnsembleConfig([spec])
            run.config.providers[task] = ensemble
        else:
            ensemble = run.config.providers[task]
        for m in ensemble.members:
            if m.path:
                run.inputs.append(Path(m.path))
        table = resolve_ensemble(ensemble, truth, workers=run.workers)
        name = f"scores_{task.value.lower()}.csv"
        out = run.out_path(a.out if len(tasks) == 1 else None, name)
        write_scores(table, out)
        written.append(out)
    _summary(command="synth-scores", tasks=",".join(t.value for t in tasks), n=len(truth),
             out=",".join(str(p) for p in written))
    return 0


def cmd_calibrate(run: _Run) -> int:
    a = run.args
    plan = run.config.calibration
    if a.folds is not None:
        plan.folds = a.folds
    if a.holdout_fold is not None:
        plan.holdout_fold = a.holdout_fold
    if a.all:
        plan.holdout_fold = None
    if run.seed is not None:
        plan.seed = run.seed

    if plan.inline is not None and not (a.mm_scores or a.sk_scores):
        calib = plan.inline
    else:
        truth = load_ground_truth(run.input(a.truth, "truth"))
        mm = load_scores(run.input(a.mm_scores), Label.MM)
        sk = load_scores(run.input(a.sk_scores), Label.SK)
        fold_spec = None
        if plan.holdout_fold is not None:
            folds = stratified_kfold(truth, plan.folds, plan.seed)
            if not 0 <= plan.holdout_fold < folds.k:
                raise InvalidConfig(f"holdout fold {plan.holdout_fold} outside [0, {folds.k})")
            keep = set(folds.fold_ids(plan.holdout_fold))
            truth = [r for r in truth if r.id in keep]
            mm = ScoreTable(Label.MM, {i: s for i, s in mm.entries.items() if i in keep})
            sk = ScoreTable(Label.SK, {i: s for i, s in sk.entries.items() if i in keep})
            fold_spec = {"k": plan.folds, "holdout_fold": plan.holdout_fold, "seed": plan.seed}
        mm_pairs = to_binary(align(mm, truth, strict=not a.lenient), Label.MM)
        sk_pairs = to_binary(align(sk, truth, strict=not a.lenient), Label.SK)
        calib = derive_calibration(mm_pairs, sk_pairs, fold_spec)
    out = run.out_path(a.out, "calibration.json")
    calib.write(out)
    prov = calib.provenance
    _summary(command="calibrate", c_mm_tilde=calib.c_mm_tilde, c_sk=calib.c_sk,
             alpha=calib.alpha, eer_mm=prov.get("eer_mm", "na"),
             eer_sk=prov.get("eer_sk", "na"), n=prov.get("n_mm", 0), out=out)
    return 0


def cmd_fuse(run: _Run) -> int:
    a = run.args
    mm = load_scores(run.input(a.mm_scores), Label.MM)
    sk = load_scores(run.input(a.sk_scores), Label.SK)
    if a.calibration:
        calib = Calibration.read(run.input(a.calibration))
    else:
        calib = run.config.calibration.inline
    meta_path = run.input(a.metadata, "metadata", required=False)
    metadata = load_metadata(meta_path) if meta_path else []

    g = run.config.gate
    gate = GateConfig(
        enabled=(bool(meta_path) or g.enabled) and not a.no_gate,
        age_cutoff=a.gate_age if a.gate_age is not None else g.age_cutoff,
        gamma=a.gate_gamma if a.gate_gamma is not None else g.gamma,
    )
    run.config.gate = gate
    fused = run_pipeline(mm, sk, calib, metadata, gate)
    out_mm = run.out_path(a.out_mm, "fused_mm.csv")
    out_sk = run.out_path(a.out_sk, "fused_sk.csv")
    write_scores(fused.mm, out_mm)
    write_scores(fused.sk, out_sk)
    gated = sum(1 for i in sk.entries if fused.sk.entries[i] != sk.entries[i])
    clamped = sum(1 for v in fused.mm.entries.values() if v == 0.0)
    _summary(command="fuse", n=len(fused.mm), gated=gated, clamped=clamped,
             alpha=calib.alpha, out_mm=out_mm, out_sk=out_sk)
    return 0


def cmd_evaluate(run: _Run) -> int:
    a = run.args
    truth = load_ground_truth(run.input(a.truth, "truth"))
    mm = load_scores(run.input(a.mm_scores), Label.MM)
    sk = load_scores(run.input(a.sk_scores), Label.SK)
    mm_pairs = to_binary(align(mm, truth, strict=not a.lenient), Label.MM)
    sk_pairs = to_binary(align(sk, truth, strict=not a.lenient), Label.SK)
    counts = {k.value: v for k, v in validate_class_counts(truth).counts.items()}
    report = evaluate(mm_pairs, sk_pairs, counts)
    out = run.out_path(a.out, "report.json")
    report.write(out)
    if a.emit_roc:
        for task, pairs in (("mm", mm_pairs), ("sk", sk_pairs)):
            write_roc_csv(roc_points(pairs), run.out_path(f"{a.emit_roc}.{task}.csv", ""))
    _summary(command="evaluate", auc_mm=report.auc_mm, auc_sk=report.auc_sk,
             mean_auc=report.mean_auc, ap_mm=report.ap_mm, ap_sk=report.ap_sk, out=out)
    return 0


def cmd_split(run: _Run) -> int:
    a = run.args
    truth = load_ground_truth(run.input(a.truth, "truth"))
    folds = stratified_kfold(truth, a.folds, run.seed if run.seed is not None else 0)
    out = run.out_path(a.out, "folds.csv")
    lines = ["image_id,fold"] + [f"{i},{folds.assignment[i]}" for i in sorted(folds.assignment)]
    try:
        out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{out}: {exc}") from exc
    sizes = [len(folds.fold_ids(f)) for f in range(folds.k)]
    _summary(command="split", k=folds.k, n=len(truth), sizes=",".join(map(str, sizes)), out=out)
    return 0


# --- argument parsing -----------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, default) -> None:
    parser.add_argument("--seed", type=int, default=default, help="base random seed")
    parser.add_argument("--config", default=default, help="run-config JSON file")
    parser.add_argument("--out-dir", default=default, help="directory for outputs")
    parser.add_argument("--workers", type=int, default=default, help="worker threads")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lesionfusion", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    _global_options(parser, None)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", parents=[common], help="color-constancy normalize PNGs")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir_images")
    p.add_argument("--method", choices=["shades-of-gray", "gray-world", "max-rgb",
                                        "shades_of_gray", "gray_world", "max_rgb"])
    p.add_argument("--p", type=float)
    p.add_argument("--clip", choices=["clip", "rescale", "clip_to_one", "rescale_if_overflow"])
    p.add_argument("--gamma", action=argparse.BooleanOptionalAction, default=None)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("aggregate", parents=[common], help="average score tables")
    p.add_argument("--task", required=True, choices=["MM", "SK", "mm", "sk"])
    p.add_argument("--inputs", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("synth-scores", parents=[common], help="draw synthetic base scores")
    p.add_argument("--truth")
    p.add_argument("--task", choices=["MM", "SK", "mm", "sk"])
    p.add_argument("--pos-strength", type=float)
    p.add_argument("--confuser-bias", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_synth_scores)

    p = sub.add_parser("calibrate", parents=[common], help="derive EER thresholds and alpha")
    p.add_argument("--mm-scores")
    p.add_argument("--sk-scores")
    p.add_argument("--truth")
    p.add_argument("--folds", type=int)
    p.add_argument("--holdout-fold", type=int)
    p.add_argument("--all", action="store_true", help="calibrate on every sample")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("fuse", parents=[common], help="fuse SK evidence into MM scores")
    p.add_argument("--mm-scores", required=True)
    p.add_argument("--sk-scores", required=True)
    p.add_argument("--calibration")
    p.add_argument("--metadata")
    p.add_argument("--gate-age", type=int)
    p.add_argument("--gate-gamma", type=float)
    p.add_argument("--no-gate", action="store_true")
    p.add_argument("--out-mm")
    p.add_argument("--out-sk")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("evaluate", parents=[common], help="AUC, AP and mean AUC report")
    p.add_argument("--mm-scores", required=True)
    p.add_argument("--sk-scores", required=True)
    p.add_argument("--truth")
    p.add_argument("--emit-roc", metavar="PREFIX", help="write PREFIX.mm.csv and PREFIX.sk.csv")
    p.add_argument("--lenient", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("split", parents=[common], help="stratified k-fold assignment")
    p.add_argument("--truth")
    p.add_argument("--folds", type=int, required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_split)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            run = _Run(args)
            status = args.func(run)
            if status == 0:
                run.echo_config(args.command)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return status
    except LesionFusionError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
