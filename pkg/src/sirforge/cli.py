"""Command-line entry point: the pipeline as composable subcommands.

Every stage reads/writes JSONL so stages can be re-run or swapped
independently, and every run drops a <out>.manifest.json with input
hashes, config snapshot, seed, and tool version. Exit codes: 0 success,
1 validation/usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from sirforge import __version__
from sirforge.errors import SirforgeError
from sirforge.jsonl import read_jsonl, require_fields, write_jsonl
from sirforge.manifest import build_manifest, sha256_file, write_manifest
from sirforge.sir import (
    Language,
    SourceUnit,
    build_sir,
    default_rule_table,
    load_rule_table,
    parse_source,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # validation errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _rule_table(args, lang: str):
    if getattr(args, "rules", None):
        return load_rule_table(args.rules, lang)
    return default_rule_table(lang)


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------


def cmd_sir(args) -> int:
    lang = Language.parse(args.lang)
    table = _rule_table(args, lang.value)
    records = []
    skips = []
    for lineno, record in read_jsonl(args.infile):
        pair_id = str(record.get("id", lineno))
        text = record.get(lang.value)
        if not isinstance(text, str) or not text.strip():
            skips.append({"id": pair_id, "reason": f"missing {lang.value!r} field"})
            continue
        unit = SourceUnit(lang, text, origin=pair_id)
        try:
            ast = parse_source(unit)
            if ast.has_error():
                skips.append({"id": pair_id, "reason": "AST contains ERROR nodes"})
                continue
            sir = build_sir(ast, table)
        except SirforgeError as exc:
            skips.append({"id": pair_id, "reason": str(exc)})
            continue
        records.append(
            {
                "origin": pair_id,
                "language": lang.value,
                "sir_text": sir.linearized,
                "node_spans": {str(i): list(span) for i, span in sir.source_span_index.items()},
            }
        )
    write_jsonl(args.out, records)
    _write_skips(args.out, skips)
    manifest = build_manifest(
        "sir",
        {"lang": lang.value, "rules_version": table.version},
        [args.infile],
        ruleset_hash=table.content_hash,
    )
    write_manifest(args.out, manifest)
    print(f"sir: wrote {len(records)} records, skipped {len(skips)}")
    return 0


def cmd_segment(args) -> int:
    from sirforge.corpus import build_corpus

    table = _rule_table(args, "python")
    build = build_corpus(
        [(args.infile, args.dataset)],
        table,
        valid_frac=args.valid_frac,
        leakage_threshold=args.leakage_threshold,
        seed=args.seed,
        apply_leakage=not args.no_leakage,
    )
    write_jsonl(args.out, build.records)
    _write_skips(args.out, build.skips)
    manifest = build_manifest(
        "segment",
        {
            "dataset": args.dataset,
            "valid_frac": args.valid_frac,
            "leakage_threshold": args.leakage_threshold,
            "no_leakage": args.no_leakage,
            "stats": build.stats,
        },
        [args.infile],
        seed=args.seed,
        ruleset_hash=table.content_hash,
    )
    write_manifest(args.out, manifest)
    print(f"segment: {build.stats}")
    return 0


def cmd_dedup(args) -> int:
    seen = set()
    records = []
    dropped = 0
    for _, record in read_jsonl(args.infile):
        key = (record.get("python"), record.get("java"))
        if key in seen:
            dropped += 1
            continue
        seen.add(key)
        records.append(record)
    write_jsonl(args.out, records)
    write_manifest(args.out, build_manifest("dedup", {"dropped": dropped}, [args.infile]))
    print(f"dedup: kept {len(records)}, dropped {dropped}")
    return 0


def cmd_train_matcher(args) -> int:
    from sirforge.matcher import (
        AlignmentBatch,
        EncoderConfig,
        MatchModel,
        TrainConfig,
        save_model,
        train,
        train_tokenizer,
    )
    from sirforge.matcher.train import retrieval_top1

    batches = []
    skipped = 0
    texts = []
    for _, record in read_jsonl(args.infile):
        sir_nodes, snippets = _aligned_statements(record)
        if sir_nodes is None or len(sir_nodes) < 2:
            skipped += 1
            continue
        texts.extend(sir_nodes)
        texts.extend(snippets)
        batches.append(AlignmentBatch.from_statements(sir_nodes, snippets))
    if not batches:
        raise SirforgeError("no trainable records (need equal statement counts >= 2)")

    tokenizer = train_tokenizer(texts, vocab_size=args.vocab_size)
    config = EncoderConfig(
        layers=args.layers,
        heads=args.heads,
        model_dim=args.dim,
        ffn_dim=args.ffn_dim,
        max_seq=args.max_seq,
        dtype=args.dtype,
    )
    model = MatchModel(config, tokenizer, seed=args.seed)
    n_val = max(1, int(round(len(batches) * args.val_frac))) if len(batches) > 1 else 0
    val_batches = batches[:n_val]
    train_batches = batches[n_val:] or batches
    cfg = TrainConfig(
        epochs=args.epochs, lr=args.lr, seed=args.seed,
        log_path=str(args.out) + ".metrics.jsonl",
    )
    result = train(model, train_batches, cfg, val_batches=val_batches or None)
    model_hash = save_model(model, args.out, metadata={"records": len(batches)})
    final = result.metrics[-1] if result.metrics else {}
    manifest = build_manifest(
        "train-matcher",
        {
            "encoder": config.to_dict(),
            "epochs": args.epochs,
            "lr": args.lr,
            "vocab_size": args.vocab_size,
            "batches": len(train_batches),
            "skipped_records": skipped,
            "final_metrics": final,
        },
        [args.infile],
        seed=args.seed,
        model_hash=model_hash,
    )
    write_manifest(args.out, manifest)
    top1 = final.get("val_top1")
    loss_txt = f"{final['loss']:.4f}" if "loss" in final else "n/a"
    print(f"train-matcher: {len(train_batches)} batches, final loss {loss_txt}"
          f"{f', val top1 {top1:.3f}' if top1 is not None else ''}")
    return 0


def _aligned_statements(record) -> tuple[list[str] | None, list[str] | None]:
    """Index-aligned (sir_node_texts, target_snippets) from a corpus record."""
    from sirforge.corpus import statement_sir_texts

    segments = record.get("segments") or []
    sources = [s for s in segments if s.get("side") == "source"]
    targets = [s for s in segments if s.get("side") == "target"]
    if not sources or len(sources) != len(targets):
        return None, None
    try:
        sir_nodes = statement_sir_texts(record["python"], _DEFAULT_PY_TABLE())
    except SirforgeError:
        return None, None
    if len(sir_nodes) != len(sources):
        return None, None
    data = record["java"].encode("utf-8")
    snippets = [
        data[seg["start"] : seg["end"]].decode("utf-8", "replace")
        for seg in sorted(targets, key=lambda s: s["index"])
    ]
    return sir_nodes, snippets


_PY_TABLE_CACHE = {}


def _DEFAULT_PY_TABLE():
    if "py" not in _PY_TABLE_CACHE:
        _PY_TABLE_CACHE["py"] = default_rule_table("python")
    return _PY_TABLE_CACHE["py"]


def cmd_augment(args) -> int:
    from sirforge.augment import AugmentConfig, CandidateSet, augment_corpus
    from sirforge.corpus import statement_sir_texts
    from sirforge.matcher import load_model

    model = load_model(args.model)
    model_hash = sha256_file(args.model)
    table = _rule_table(args, "python")
    cfg = AugmentConfig(
        tau_norm=args.tau_norm, threshold=args.threshold, one_to_one=args.one_to_one
    )

    def candidate_sets():
        for _, record in read_jsonl(args.infile):
            pair_id = str(record.get("id"))
            try:
                sir_nodes = statement_sir_texts(record["python"], table)
            except (SirforgeError, KeyError) as exc:
                yield None, {"id": pair_id, "reason": str(exc)}
                continue
            data = record["java"].encode("utf-8")
            targets = sorted(
                (s for s in record.get("segments", []) if s.get("side") == "target"),
                key=lambda s: s["index"],
            )
            candidates = [
                data[s["start"] : s["end"]].decode("utf-8", "replace") for s in targets
            ]
            if not candidates:
                yield None, {"id": pair_id, "reason": "no target segments"}
                continue
            yield CandidateSet(pair_id, sir_nodes, candidates), {
                "dataset": record.get("dataset", "unknown")
            }

    usable = []
    pre_skips = []
    for cset, context in candidate_sets():
        if cset is None:
            pre_skips.append(context)
        else:
            usable.append((cset, context))
    records, stats, skips = augment_corpus(
        model, usable, cfg, model_hash=model_hash, ruleset_hash=table.content_hash
    )
    skips = pre_skips + skips
    write_jsonl(args.out, records)
    _write_skips(args.out, skips)
    stats_path = args.stats or str(args.out) + ".stats.json"
    Path(stats_path).write_text(json.dumps(stats.to_dict(), indent=2) + "\n", encoding="utf-8")
    manifest = build_manifest(
        "augment",
        {"threshold": args.threshold, "tau_norm": args.tau_norm, "one_to_one": args.one_to_one,
         "stats": stats.to_dict()},
        [args.infile, args.model],
        ruleset_hash=table.content_hash,
        model_hash=model_hash,
    )
    write_manifest(args.out, manifest)
    print(f"augment: emitted {stats.pairs_emitted} pairs from {stats.nodes_seen} nodes "
          f"(discard rate {stats.discard_rate:.2%})")
    return 0


def cmd_emit_instructions(args) -> int:
    from sirforge.instruct import (
        Stage,
        default_template,
        load_template,
        render_stage1,
        render_stage2,
        split,
    )

    stage = Stage.SYNTAX_AWARE if args.stage == 1 else Stage.CODE_GEN
    template = (
        load_template(args.template, stage) if args.template else default_template(stage)
    )
    context_by_id = {}
    if args.corpus:
        for _, rec in read_jsonl(args.corpus):
            context_by_id[str(rec.get("id"))] = rec.get("python_sir", "")

    rendered = []
    for _, record in read_jsonl(args.infile):
        if stage is Stage.SYNTAX_AWARE:
            function_sir = context_by_id.get(str(record.get("function_id")))
            rec = render_stage1(
                template,
                record,
                function_sir=function_sir,
                include_function_context=not args.no_context,
            )
        else:
            rec = render_stage2(template, record)
        rendered.append(rec)

    valid_size = args.valid_size
    train_recs, valid_recs = split(rendered, stage, valid_size=valid_size, seed=args.seed)
    out_records = [dict(r.to_dict(), split="train") for r in train_recs]
    out_records += [dict(r.to_dict(), split="valid") for r in valid_recs]
    write_jsonl(args.out, out_records)
    manifest = build_manifest(
        "emit-instructions",
        {"stage": stage.value, "valid_size": valid_size, "context": not args.no_context,
         "train": len(train_recs), "valid": len(valid_recs)},
        [args.infile] + ([args.corpus] if args.corpus else []),
        seed=args.seed,
    )
    write_manifest(args.out, manifest)
    print(f"emit-instructions: train {len(train_recs)}, valid {len(valid_recs)}")
    return 0


def cmd_score(args) -> int:
    from sirforge.evalkit import codebleu

    weights = tuple(float(w) for w in args.weights.split(","))
    records = []
    totals = []
    for lineno, record in read_jsonl(args.infile):
        rec_id = str(record.get("id", lineno))
        require_fields(record, ("candidate", "reference"), lineno)
        report = codebleu(record["candidate"], record["reference"], args.lang, weights)
        row = {"id": rec_id, **report.to_dict()}
        records.append(row)
        totals.append(report.total)
    write_jsonl(args.out, records)
    mean_total = sum(totals) / len(totals) if totals else 0.0
    manifest = build_manifest(
        "score", {"lang": args.lang, "weights": list(weights), "mean_total": mean_total},
        [args.infile],
    )
    write_manifest(args.out, manifest)
    print(f"score: {len(records)} pairs, mean CodeBLEU {mean_total:.4f}")
    return 0


def cmd_confusion(args) -> int:
    from sirforge.evalkit import detect_confusion

    records = []
    flagged = 0
    for lineno, record in read_jsonl(args.infile):
        rec_id = str(record.get("id", lineno))
        require_fields(record, ("candidate", "source"), lineno)
        source = SourceUnit(Language.parse(args.source_lang), record["source"])
        verdict = detect_confusion(record["candidate"], source, args.target_lang)
        flagged += int(verdict.flagged)
        records.append({"id": rec_id, **verdict.to_dict()})
    write_jsonl(args.out, records)
    manifest = build_manifest(
        "confusion",
        {"source_lang": args.source_lang, "target_lang": args.target_lang, "flagged": flagged},
        [args.infile],
    )
    write_manifest(args.out, manifest)
    print(f"confusion: flagged {flagged}/{len(records)}")
    return 0


def cmd_eval(args) -> int:
    from sirforge.evalkit import parse_eval_config, run_many

    cfg = parse_eval_config(args.config)
    if args.jobs:
        cfg.jobs = args.jobs
    items = []
    ids = []
    for lineno, record in read_jsonl(args.infile):
        ids.append(str(record.get("id", lineno)))
        require_fields(record, ("candidate",), lineno)
        source = None
        if record.get("source"):
            source = SourceUnit(Language.parse(args.source_lang), record["source"])
        items.append((record["candidate"], record.get("tests", ""), source))
    results = run_many(items, cfg, target_lang=args.target_lang)
    records = [{"id": rid, **res.to_dict()} for rid, res in zip(ids, results)]
    write_jsonl(args.out, records)
    manifest = build_manifest(
        "eval",
        {"config": str(args.config), "jobs": cfg.jobs, "target_lang": args.target_lang},
        [args.infile, args.config],
    )
    write_manifest(args.out, manifest)
    passed = sum(1 for r in results if r.verdict.value == "Pass")
    print(f"eval: {passed}/{len(results)} Pass")
    return 0


def cmd_report(args) -> int:
    from sirforge.evalkit import render_table, summarize
    from sirforge.evalkit.confusion import ConfusionReason, ConfusionVerdict
    from sirforge.evalkit.harness import TranslationResult, Verdict

    results = []
    for lineno, record in read_jsonl(args.infile):
        confusion = None
        if record.get("confusion"):
            c = record["confusion"]
            confusion = ConfusionVerdict(
                flagged=bool(c.get("flagged")),
                reasons={ConfusionReason(r) for r in c.get("reasons", [])},
                evidence=c.get("evidence", []),
            )
        results.append(
            TranslationResult(
                verdict=Verdict(record["verdict"]),
                logs=record.get("logs", ""),
                confusion=confusion,
            )
        )
    report = summarize(results)
    Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    write_manifest(args.out, build_manifest("report", {}, [args.infile]))
    print(render_table(report))
    return 0


def _write_skips(out_path, skips) -> None:
    if skips:
        write_jsonl(str(out_path) + ".skips.jsonl", skips)


# ---------------------------------------------------------------------------
# argument wiring
# ---------------------------------------------------------------------------


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sirforge", description=__doc__)
    parser.add_argument("--version", action="version", version=f"sirforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        return p

    p = add("sir", cmd_sir, "build SIR representations from code records")
    p.add_argument("--lang", required=True, choices=["python", "java"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rules", help="rule file (defaults to the packaged ruleset)")

    p = add("segment", cmd_segment, "ingest, dedup, split, filter, and segment a corpus")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--dataset", default="Other")
    p.add_argument("--valid-frac", type=float, default=0.2)
    p.add_argument("--leakage-threshold", type=float, default=0.9)
    p.add_argument("--no-leakage", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rules")

    p = add("dedup", cmd_dedup, "drop exact duplicate (python, java) records")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)

    p = add("train-matcher", cmd_train_matcher, "train the contrastive matching model")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--lr", type=float, default=1e-4)
    p.add_argument("--vocab-size", type=int, default=2000)
    p.add_argument("--layers", type=int, default=4)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--ffn-dim", type=int, default=1024)
    p.add_argument("--max-seq", type=int, default=256)
    p.add_argument("--dtype", default="float32", choices=["float32", "float64"])
    p.add_argument("--val-frac", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)

    p = add("augment", cmd_augment, "mine fine-grained pairs with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--threshold", type=float, default=0.85)
    p.add_argument("--tau-norm", type=float, default=0.1)
    p.add_argument("--one-to-one", action="store_true")
    p.add_argument("--stats")
    p.add_argument("--rules")

    p = add("emit-instructions", cmd_emit_instructions, "render instruction-tuning records")
    p.add_argument("--stage", type=int, required=True, choices=[1, 2])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--corpus", help="segmented corpus for stage-1 function context")
    p.add_argument("--template")
    p.add_argument("--valid-size", type=int, default=None)
    p.add_argument("--no-context", action="store_true")
    p.add_argument("--seed", type=int, default=0)

    p = add("score", cmd_score, "CodeBLEU-score candidate/reference pairs")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--lang", default="java", choices=["python", "java"])
    p.add_argument("--weights", default="0.25,0.25,0.25,0.25")

    p = add("confusion", cmd_confusion, "detect syntactic confusion in candidates")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--source-lang", default="python")
    p.add_argument("--target-lang", default="java")

    p = add("eval", cmd_eval, "compile/run candidates against tests")
    p.add_argument("--config", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    p.add_argument("--source-lang", default="python")
    p.add_argument("--target-lang", default="java")

    p = add("report", cmd_report, "aggregate evaluation results")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except SirforgeError as exc:
        print(f"sirforge {args.command}: {exc}", file=sys.stderr)
        return 1
    except (KeyError, ValueError, OSError) as exc:
        print(f"sirforge {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
