"""Command-line pipeline orchestration.

Subcommands: generate, train-lm, train-ranker, rank, eval, build-sg,
augment, agreement.  Everything reads/writes UTF-8 JSONL, all randomness
sits behind --seed, and every run writes a ``<output>.manifest.json``
recording the resolved flags, seed, input content hashes, and produced
files, so a recorded invocation can be replayed byte-identically.

Exit codes: 0 success, 1 data errors (with the offending line where known),
2 usage errors, 3 failed pipeline health check (augment emitting zero
responses for more than half of the questions).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

from . import __version__, augment as augment_mod, datasets, evalkit, ngram, ranker, stgen
from .jsonio import DataError, read_jsonl, write_jsonl
from .stgen import RuleFileInvalid
from .treebank import PTBError, parse_ptb

HEALTH_CHECK_EXIT = 3


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, datasets.UnknownResponse, RuleFileInvalid, PTBError,
            ngram.MalformedArpa, ngram.EmptyCorpus, ranker.SchemaMismatch,
            ranker.DegenerateData, ranker.NoPositive, evalkit.NoPositives) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="fluentqa",
        description="Over-generate and rank fluent answer responses for factoid questions.",
    )
    parser.add_argument("--version", action="version", version=f"fluentqa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", formatter_class=fmt,
                       help="instances JSONL -> candidate responses JSONL")
    p.add_argument("--instances", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rules", default=None, help="rules file (default: bundled)")
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("train-lm", formatter_class=fmt,
                       help="one-sentence-per-line corpus -> ARPA model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--discount", type=float, default=None,
                   help="fixed KN discount (default: estimate from counts)")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_train_lm)

    p = sub.add_parser("train-ranker", formatter_class=fmt,
                       help="labeled split JSONL -> linear model JSON + report CSV")
    p.add_argument("--train", required=True)
    p.add_argument("--loss", choices=("logistic", "softmax"), required=True)
    p.add_argument("--lm2", required=True, help="order-2 ARPA file")
    p.add_argument("--lm3", required=True, help="order-3 ARPA file")
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None, help="per-epoch loss CSV")
    p.add_argument("--learning-rate", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=50)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--batch-groups", type=int, default=32)
    p.add_argument("--neg-batch", type=int, default=50)
    p.add_argument("--decay", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_train_ranker)

    p = sub.add_parser("rank", formatter_class=fmt,
                       help="split JSONL -> scored JSONL")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--lm2", default=None)
    p.add_argument("--lm3", default=None)
    p.add_argument("--baseline", choices=("shortest", "lm"), default=None,
                   help="score with a baseline instead of a trained model")
    p.add_argument("--external-scores", default=None,
                   help="JSONL of {id, scores} replacing the model's probabilities")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_rank)

    p = sub.add_parser("eval", formatter_class=fmt,
                       help="scored JSONL with labels -> metrics JSON")
    p.add_argument("--scored", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--macro", action="store_true",
                   help="per-question averaging of Max-F1/PR-AUC instead of pooling")
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("build-sg", formatter_class=fmt,
                       help="instances + annotations -> labeled train/val/test splits")
    p.add_argument("--instances", required=True)
    p.add_argument("--annotations", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--ratios", default="2000,300,700",
                   help="relative train,val,test sizes")
    p.add_argument("--rules", default=None)
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_build_sg)

    p = sub.add_parser("augment", formatter_class=fmt,
                       help="instances + model -> ranked response triples JSONL")
    p.add_argument("--instances", required=True)
    p.add_argument("--model", default=None)
    p.add_argument("--lm2", default=None)
    p.add_argument("--lm3", default=None)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--rules", default=None)
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--external-scores", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--report", default=None, help="summary report JSON")
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_augment)

    p = sub.add_parser("agreement", formatter_class=fmt,
                       help="annotations JSONL -> annotator agreement JSON")
    p.add_argument("--annotations", required=True)
    p.add_argument("--out", default=None, help="default: print to stdout")
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_agreement)
    return parser


# ---------------------------------------------------------------------------
# shared helpers


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(primary_out, args, inputs, outputs):
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    manifest = {
        "version": __version__,
        "command": flags.pop("command"),
        "flags": flags,
        "seed": getattr(args, "seed", None),
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": [str(p) for p in outputs],
    }
    path = Path(str(primary_out) + ".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_instances(path) -> list[stgen.QAInstance]:
    instances = []
    for lineno, record in enumerate(read_jsonl(path), start=1):
        try:
            instances.append(stgen.instance_from_json(record))
        except (KeyError, ValueError) as exc:
            raise DataError(path, lineno, str(exc)) from exc
    return instances


def _candidate_from_json(record: dict) -> stgen.CandidateResponse:
    trace = record.get("trace") or ["external"]
    return stgen.CandidateResponse(
        tuple(record["tokens"]), parse_ptb(record["tree"]), frozenset(trace)
    )


def _load_split(path):
    """Split JSONL -> list of (QAInstance, candidates, labels-or-None)."""
    out = []
    for lineno, record in enumerate(read_jsonl(path), start=1):
        try:
            instance = stgen.instance_from_json(record)
            candidates = tuple(_candidate_from_json(c) for c in record["candidates"])
            labels = None
            if all("label" in c for c in record["candidates"]):
                labels = tuple(int(c["label"]) for c in record["candidates"])
        except (KeyError, ValueError) as exc:
            raise DataError(path, lineno, str(exc)) from exc
        out.append((instance, candidates, labels))
    return out


def _split_to_json(instance, candidates, labels) -> dict:
    return stgen.instance_to_json(instance) | {
        "candidates": [
            {
                "tokens": list(c.tokens),
                "tree": c.derived_tree.to_ptb(),
                "trace": sorted(c.trace),
                "label": int(label),
            }
            for c, label in zip(candidates, labels)
        ]
    }


def _load_lms(args):
    if not args.lm2 or not args.lm3:
        raise DataError(args.infile if hasattr(args, "infile") else "-", 0,
                        "--lm2 and --lm3 are required for feature extraction")
    return ngram.read_arpa(args.lm2), ngram.read_arpa(args.lm3)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_generate(args) -> int:
    rules = stgen.load_rules(args.rules)
    instances = _load_instances(args.instances)
    records = []
    for instance in instances:
        output = stgen.generate(instance, rules=rules, cap=args.cap)
        records.append(stgen.candidates_to_json(instance, output))
    write_jsonl(args.out, records)
    inputs = [args.instances] + ([args.rules] if args.rules else [])
    _write_manifest(args.out, args, inputs, [args.out])
    return 0


def _cmd_train_lm(args) -> int:
    with open(args.corpus, encoding="utf-8") as f:
        corpus = [line.strip() for line in f if line.strip()]
    model = ngram.train(corpus, args.order, discount=args.discount)
    ngram.write_arpa(model, args.out)
    _write_manifest(args.out, args, [args.corpus], [args.out])
    return 0


def _train_config(args) -> ranker.TrainConfig:
    return ranker.TrainConfig(
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        l2=args.l2,
        batch_groups=args.batch_groups,
        seed=args.seed,
        neg_batch=args.neg_batch,
        decay=args.decay,
    )


def _cmd_train_ranker(args) -> int:
    lm2, lm3 = ngram.read_arpa(args.lm2), ngram.read_arpa(args.lm3)
    rows = _load_split(args.train)
    groups = []
    for instance, candidates, labels in rows:
        if labels is None:
            raise DataError(args.train, 0, f"question {instance.id!r} lacks labels")
        groups.append(ranker.featurize(ranker.LabeledGroup(instance, candidates, labels), lm2, lm3))
    config = _train_config(args)
    trainer = ranker.train_logistic if args.loss == "logistic" else ranker.train_softmax
    model = trainer(groups, config)
    ranker.save_model(model, args.out)
    outputs = [args.out, str(Path(args.out).with_suffix(".schema.json"))]
    if args.report:
        with open(args.report, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["epoch", "loss"])
            for i, loss in enumerate(model.training_curve, start=1):
                writer.writerow([i, repr(loss)])
        outputs.append(args.report)
    _write_manifest(args.out, args, [args.train, args.lm2, args.lm3], outputs)
    return 0


def _cmd_rank(args) -> int:
    rows = _load_split(args.infile)
    external = None
    if args.external_scores:
        external = {}
        for lineno, record in enumerate(read_jsonl(args.external_scores), start=1):
            try:
                external[str(record["id"])] = [float(s) for s in record["scores"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(args.external_scores, lineno, str(exc)) from exc

    model = lm2 = lm3 = None
    if args.baseline is None and external is None:
        if not args.model:
            raise DataError(args.infile, 0, "--model, --baseline, or --external-scores required")
        model = ranker.load_model(args.model)
        lm2, lm3 = _load_lms(args)
    elif args.baseline == "lm":
        if not args.lm3:
            raise DataError(args.infile, 0, "--lm3 is required for the lm baseline")
        lm3 = ngram.read_arpa(args.lm3)

    records = []
    for instance, candidates, labels in rows:
        tokens = [c.tokens for c in candidates]
        probs = None
        if args.baseline == "shortest":
            scores = [float(-len(t)) for t in tokens]
        elif args.baseline == "lm":
            scores = [ngram.sequence_score(lm3, t).normalized for t in tokens]
        elif external is not None:
            if instance.id not in external:
                raise DataError(args.external_scores, 0, f"no scores for question {instance.id!r}")
            scores = external[instance.id]
            if len(scores) != len(candidates):
                raise DataError(args.external_scores, 0,
                                f"question {instance.id!r}: score count mismatch")
            probs = scores
        else:
            group = ranker.featurize(
                ranker.LabeledGroup(instance, candidates, tuple(0 for _ in candidates)),
                lm2, lm3,
            )
            ranking = ranker.rank(model, group)
            scores = [float(s) for s in ranking.scores]
            probs = [float(p) for p in ranking.probabilities]
        entry = {"id": instance.id, "candidates": []}
        for i, c in enumerate(candidates):
            cand = {"tokens": list(c.tokens), "score": scores[i]}
            if probs is not None:
                cand["probability"] = probs[i]
            if labels is not None:
                cand["label"] = labels[i]
            entry["candidates"].append(cand)
        records.append(entry)
    write_jsonl(args.out, records)
    inputs = [args.infile] + [p for p in (args.model, args.lm2, args.lm3, args.external_scores) if p]
    _write_manifest(args.out, args, inputs, [args.out])
    return 0


def _cmd_eval(args) -> int:
    groups = []
    for lineno, record in enumerate(read_jsonl(args.scored), start=1):
        try:
            cands = record["candidates"]
            groups.append(
                evalkit.ScoredGroup(
                    tuple(float(c.get("probability", c["score"])) for c in cands),
                    tuple(int(c["label"]) for c in cands),
                    tuple(tuple(c["tokens"]) for c in cands),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise DataError(args.scored, lineno, str(exc)) from exc
    report = evalkit.metrics_report(groups, macro=args.macro)
    Path(args.out).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    _write_manifest(args.out, args, [args.scored], [args.out])
    return 0


def _cmd_build_sg(args) -> int:
    try:
        ratios = tuple(int(x) for x in args.ratios.split(","))
        if len(ratios) != 3:
            raise ValueError
    except ValueError:
        print("error: --ratios must be three comma-separated integers", file=sys.stderr)
        return 2
    rules = stgen.load_rules(args.rules)
    instances = _load_instances(args.instances)
    annotations = []
    for lineno, record in enumerate(read_jsonl(args.annotations), start=1):
        try:
            annotations.append(datasets.AnnotationRecord.from_json(record))
        except KeyError as exc:
            raise DataError(args.annotations, lineno, f"missing field {exc}") from exc

    kept, drops = datasets.filter_instances(instances)
    pairs = [(inst, stgen.generate(inst, rules=rules, cap=args.cap)) for inst in kept]
    split_pairs = datasets.make_splits(pairs, ratios=ratios, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = []
    summary = {"dropped": dict(sorted(drops.items())), "splits": {}}
    for kind in datasets.SPLIT_KINDS:
        split = datasets.build_labels(split_pairs[kind], annotations, kind)
        path = out_dir / f"{kind}.jsonl"
        write_jsonl(
            path,
            [_split_to_json(g.instance, g.candidates, g.labels) for g in split.groups],
        )
        outputs.append(path)
        summary["splits"][kind] = {
            "questions": len(split.groups),
            "positives": sum(sum(g.labels) for g in split.groups),
            "candidates": sum(len(g.labels) for g in split.groups),
        }
    summary_path = out_dir / "summary.json"
    summary_path.write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    outputs.append(summary_path)
    inputs = [args.instances, args.annotations] + ([args.rules] if args.rules else [])
    _write_manifest(out_dir / "splits", args, inputs, outputs)
    return 0


def _cmd_augment(args) -> int:
    instances = _load_instances(args.instances)
    kept, _ = datasets.filter_instances(instances, allow_fallback=True)
    rules = stgen.load_rules(args.rules)
    external = None
    if args.external_scores:
        external = {}
        for lineno, record in enumerate(read_jsonl(args.external_scores), start=1):
            try:
                external[str(record["id"])] = [float(s) for s in record["scores"]]
            except (KeyError, TypeError, ValueError) as exc:
                raise DataError(args.external_scores, lineno, str(exc)) from exc
    model = lm2 = lm3 = None
    if external is None:
        if not args.model:
            raise DataError(args.instances, 0, "--model or --external-scores required")
        model = ranker.load_model(args.model)
        lm2, lm3 = _load_lms(args)
    run = augment_mod.augment(
        kept, model, lm2, lm3,
        threshold=args.threshold, top_k=args.top_k, rules=rules, cap=args.cap,
        external_scores=external,
    )
    write_jsonl(args.out, run.records)
    outputs = [args.out]
    report = augment_mod.augment_report(run)
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        outputs.append(args.report)
    inputs = [args.instances] + [
        p for p in (args.model, args.lm2, args.lm3, args.rules, args.external_scores) if p
    ]
    _write_manifest(args.out, args, inputs, outputs)
    if run.n_instances and run.n_empty > run.n_instances / 2:
        print(
            f"health check failed: {run.n_empty}/{run.n_instances} questions "
            "emitted no response",
            file=sys.stderr,
        )
        return HEALTH_CHECK_EXIT
    return 0


def _cmd_agreement(args) -> int:
    annotations = []
    for lineno, record in enumerate(read_jsonl(args.annotations), start=1):
        try:
            ann = datasets.AnnotationRecord.from_json(record)
        except KeyError as exc:
            raise DataError(args.annotations, lineno, f"missing field {exc}") from exc
        annotations.append((ann.annotator_id, ann.question_id,
                            datasets.normalize_response(ann.response)))
    score = evalkit.annotator_agreement(annotations)
    payload = {"agreement": score, "annotations": len(annotations),
               "annotators": len({a for a, _, _ in annotations})}
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        _write_manifest(args.out, args, [args.annotations], [args.out])
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
