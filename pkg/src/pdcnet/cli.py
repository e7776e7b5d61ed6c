"""Command-line interface: ``pdcnet <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime error.
Every command writes ``<output>.manifest.json`` next to its primary output.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import __version__, baseline, checkpoint, dataset, explain, model
from .chem import SmilesError
from .dataset import DataError, DataSplit
from .peptide import PeptideError
from .traineval import HpoSpace, TrainConfig, crossval, evaluate, evaluate_model, hpo_search, run_ablation, train, write_history_csv
from .traineval.metrics import MetricError

log = logging.getLogger("pdcnet")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 1, 2, 3
DATA_ERRORS = (DataError, SmilesError, PeptideError, MetricError, checkpoint.CheckpointError,
               model.MissingEmbeddingError)
INPUT_ARGS = ("input", "split", "checkpoint", "query", "reference", "peptide_table", "linker_table", "payload_table")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _dump_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_manifest(args, outputs: list, started: str) -> None:
    params = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    config_hash = hashlib.sha256(json.dumps(params, sort_keys=True, default=str).encode()).hexdigest()
    manifest = {
        "command": args.command,
        "arguments": params,
        "inputs": [str(v) for k, v in params.items() if k in INPUT_ARGS and v],
        "outputs": [str(o) for o in outputs],
        "seed": params.get("seed"),
        "config_hash": config_hash,
        "tool_version": __version__,
        "started": started,
        "finished": datetime.now(timezone.utc).isoformat(),
    }
    _dump_json(f"{outputs[0]}.manifest.json", manifest)


def _check_inputs(args) -> None:
    for name in INPUT_ARGS:
        path = getattr(args, name, None)
        if path and not Path(path).is_file():
            raise DataError(f"--{name.replace('_', '-')}: no such file: {path}")


def _tables(args) -> model.EmbeddingTables:
    return model.EmbeddingTables.load(args.peptide_table, args.linker_table, args.payload_table)


def _load_split(path) -> DataSplit:
    p = Path(path)
    if not p.exists():
        raise DataError(f"no such split file: {p}")
    return DataSplit.from_json(p.read_text(encoding="utf-8"))


def _labeled(path):
    records = dataset.read_records(path)
    if any(r.label is None for r in records):
        raise DataError(f"{path}: every record needs a label (run `curate` first)")
    return records


def _train_config(args) -> TrainConfig:
    return TrainConfig(
        max_epochs=args.epochs,
        patience=args.patience,
        lr=args.lr,
        batch_size=args.batch_size,
        seed=args.seed,
        pos_weight=args.pos_weight,
    )


def _model_config(args) -> model.ModelConfig:
    return model.ModelConfig(
        d_h=args.d_h,
        dropout=args.dropout,
        head_hidden=args.head_hidden,
        fallback_peptide_global=not args.no_fallback,
        fallback_linker=not args.no_fallback,
        fallback_payload=not args.no_fallback,
    )


# ---------------------------------------------------------------- commands


def cmd_curate(args):
    raw = dataset.read_records(args.input)
    result = dataset.curate(raw)
    labeled = dataset.label_records(result.records, args.threshold_um)
    dataset.write_records(args.out, labeled)
    report_path = args.report or f"{args.out}.report.json"
    _dump_json(report_path, {"threshold_um": args.threshold_um, "kept": len(labeled), "dropped": result.report})
    log.info("curated %d of %d records (%d positive)", len(labeled), len(raw), sum(r.label for r in labeled))
    return [args.out, report_path]


def cmd_split(args):
    records = dataset.read_records(args.input)
    sp = dataset.split(records, args.seed, stratify=args.stratify)
    args.out = args.out or str(Path(args.input).with_suffix(".split.json"))
    Path(args.out).write_text(sp.to_json() + "\n", encoding="utf-8")
    log.info("split %d records: %d/%d/%d", sp.n, len(sp.train), len(sp.val), len(sp.test))
    return [args.out]


def cmd_train(args):
    records = _labeled(args.input)
    sp = _load_split(args.split)
    net = model.PdcNet(_model_config(args), args.seed)
    res = train(net, records, sp, _train_config(args), tables=_tables(args))
    model.save_checkpoint(res.model, args.out, seed=args.seed, history=res.history_dicts(),
                          extra={"best_epoch": res.best_epoch, "stopped_early": res.stopped_early})
    outputs = [args.out]
    history_path = args.history or f"{args.out}.history.csv"
    write_history_csv(history_path, res.history)
    outputs.append(history_path)
    log.info("best epoch %d, validation AUC %.4f", res.best_epoch, res.best_val_auc)
    return outputs


def cmd_evaluate(args):
    net = model.load_checkpoint(args.checkpoint)
    records = _labeled(args.input)
    sp = _load_split(args.split) if args.split else None
    idx = getattr(sp, args.subset) if sp else tuple(range(len(records)))
    rep = evaluate_model(net, records, idx, tables=_tables(args), threshold=args.threshold)
    _dump_json(args.out, {"subset": args.subset if sp else "all", "n": len(idx), **rep.to_dict()})
    print(rep.format_row())
    return [args.out]


def cmd_predict(args):
    net = model.load_checkpoint(args.checkpoint)
    records = dataset.read_records(args.input)
    tables = _tables(args)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "score", "predicted_label", "error"])
        for r in records:
            try:
                p = net.predict_proba(model.prepare_inputs(r, net.config, tables))
                w.writerow([r.id, repr(p), int(p >= args.threshold), ""])
            except (SmilesError, PeptideError, model.MissingEmbeddingError) as exc:
                w.writerow([r.id, "", "", f"{type(exc).__name__}: {exc}"])
    return [args.out]


def cmd_crossval(args):
    records = _labeled(args.input)
    res = crossval(records, args.k, args.seed, _train_config(args), _model_config(args), _tables(args), jobs=args.jobs)
    _dump_json(args.out, res.to_dict())
    for name, s in res.summary.items():
        print(f"{name}: {s['formatted']}")
    return [args.out]


def cmd_hpo(args):
    records = _labeled(args.input)
    sp = _load_split(args.split)
    space = HpoSpace(trials=args.trials)
    res = hpo_search(space, records, sp, _train_config(args), _model_config(args), seed=args.seed,
                     tables=_tables(args), jobs=args.jobs)
    _dump_json(args.out, res.to_dict())
    outputs = [args.out]
    if args.checkpoint_out:
        model.save_checkpoint(res.best_model, args.checkpoint_out, seed=args.seed, extra={"hpo_trial": res.best_index})
        outputs.append(args.checkpoint_out)
    return outputs


def cmd_baseline(args):
    records = _labeled(args.input)
    sp = _load_split(args.split)
    feats = [baseline.featurize_baseline(r) for r in records]
    X_train = [feats[i] for i in sp.train]
    y_train = [records[i].label for i in sp.train]
    lr_model = baseline.train_lr(X_train, y_train, args.l2, args.lr, args.epochs, seed=args.seed)
    baseline.save_lr(lr_model, args.out, seed=args.seed)
    idx = getattr(sp, args.subset)
    scores = baseline.predict_lr(lr_model, [feats[i] for i in idx])
    rep = evaluate(scores, [records[i].label for i in idx])
    metrics_path = args.metrics_out or f"{args.out}.metrics.json"
    _dump_json(metrics_path, {"subset": args.subset, "n": len(idx), **rep.to_dict()})
    print(rep.format_row())
    return [args.out, metrics_path]


def cmd_similarity(args):
    queries = dataset.read_records(args.query)
    ref = dataset.ReferenceSet(dataset.read_records(args.reference))
    _dump_json(args.out, [{"id": q.id, **ref.score(q).as_dict()} for q in queries])
    return [args.out]


def cmd_explain(args):
    net = model.load_checkpoint(args.checkpoint)
    records = dataset.read_records(args.input)
    explain.write_explanations(args.out, explain.explain_records(net, records, _tables(args), args.output))
    return [args.out]


def cmd_export_features(args):
    records = dataset.read_records(args.input)
    if args.checkpoint:
        net, mode = model.load_checkpoint(args.checkpoint), "post_training"
    else:
        net, mode = model.PdcNet(_model_config(args), args.seed), "pre_training"
    explain.export_fused(net, records, args.out, args.mode or mode, _tables(args))
    return [args.out]


def cmd_ablation(args):
    records = _labeled(args.input)
    sp = _load_split(args.split)
    report = run_ablation(records, sp, _train_config(args), _model_config(args), _tables(args), args.subset, jobs=args.jobs)
    _dump_json(args.out, report)
    for name, r in report.items():
        print(f"{name:12s} AUC={r['metrics']['AUC']:.4f}  F1={r['metrics']['F1']:.4f}  MCC={r['metrics']['MCC']:.4f}")
    return [args.out]


# ---------------------------------------------------------------- parser


def _add_tables(p):
    p.add_argument("--peptide-table", help="peptide-level embedding table (JSON lines)")
    p.add_argument("--linker-table", help="linker embedding table (JSON lines)")
    p.add_argument("--payload-table", help="payload embedding table (JSON lines)")


def _add_training(p):
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--pos-weight", type=float, default=1.0)
    _add_model(p)


def _add_model(p):
    p.add_argument("--d-h", type=int, default=256, help="LSTM hidden size per direction")
    p.add_argument("--dropout", type=float, default=0.1)
    p.add_argument("--head-hidden", type=int, default=0, help="hidden units in the head (0 = single affine layer)")
    p.add_argument("--no-fallback", action="store_true", help="require every embedding to come from a table")
    _add_tables(p)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdcnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pdcnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--seed", type=int, default=1)
        return p

    p = add("curate", cmd_curate, "dedup, normalize units, filter and label raw records")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold-um", type=float, default=1.0)
    p.add_argument("--report", help="curation report path (default: <out>.report.json)")

    p = add("split", cmd_split, "seeded 8:1:1 split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", help="split file (default: <input stem>.split.json)")
    p.add_argument("--stratify", action="store_true")

    p = add("train", cmd_train, "train with validation-AUC early stopping")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--history", help="history CSV (default: <out>.history.csv)")
    _add_training(p)

    p = add("evaluate", cmd_evaluate, "ten-metric report for a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--split")
    p.add_argument("--subset", choices=("train", "val", "test"), default="test")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--out", required=True)
    _add_tables(p)

    p = add("predict", cmd_predict, "score records with a checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, default=0.5)
    _add_tables(p)

    p = add("crossval", cmd_crossval, "k-fold cross-validation")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1)
    _add_training(p)

    p = add("hpo", cmd_hpo, "random hyperparameter search")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--checkpoint-out")
    _add_training(p)

    p = add("baseline", cmd_baseline, "logistic-regression baseline")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--metrics-out")
    p.add_argument("--subset", choices=("train", "val", "test"), default="test")
    p.add_argument("--l2", type=float, default=1e-3)
    p.add_argument("--lr", type=float, default=0.5)
    p.add_argument("--epochs", type=int, default=500)

    p = add("similarity", cmd_similarity, "novelty scores of query PDCs against a reference set")
    p.add_argument("--query", required=True)
    p.add_argument("--reference", required=True)
    p.add_argument("--out", required=True)

    p = add("explain", cmd_explain, "channel Shapley values and residue attention")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--output", choices=("probability", "logit"), default="probability")
    _add_tables(p)

    p = add("export-features", cmd_export_features, "fused 1664-d features as CSV")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--checkpoint", help="trained checkpoint; omit for an untrained model")
    p.add_argument("--mode", choices=("pre_training", "post_training"))
    _add_model(p)

    p = add("ablation", cmd_ablation, "train the five channel-masked variants and compare")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--split", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--subset", choices=("train", "val", "test"), default="test")
    p.add_argument("--jobs", type=int, default=1)
    _add_training(p)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("TOOL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    started = datetime.now(timezone.utc).isoformat()
    try:
        _check_inputs(args)
        outputs = args.func(args)
    except DATA_ERRORS as exc:
        print(f"pdcnet {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:
        log.debug("runtime failure", exc_info=True)
        print(f"pdcnet {args.command}: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _write_manifest(args, outputs, started)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
