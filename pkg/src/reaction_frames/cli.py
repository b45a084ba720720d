"""Single command-line entry point wiring the whole pipeline.

Subcommands: ingest, split, postprocess, stats, mask, train, generate,
classify, nn-baseline, evaluate, serve-study, report. Every command that
writes outputs also drops a resolved-config snapshot next to them, and all
randomness flows from one root --seed expanded per stage.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import __version__
from .schema import (
    Dimension,
    FREE_TEXT_DIMENSIONS,
    GoldLabel,
    PerceivedLabel,
    Record,
    Topic,
    compute_stats,
    read_jsonl,
    record_to_dict,
    split_by_date,
    write_jsonl,
)
from .evaluation import (
    HUMAN_GOLD_F1_REFERENCE,
    ClassificationEvalRow,
    GenerationEvalRow,
    UNPARSEABLE,
    bleu4,
    greedy_match_corpus,
    human_eval_report,
    macro_prf,
)


def _write_snapshot(out_path: Path, args: argparse.Namespace) -> None:
    resolved = {k: str(v) if isinstance(v, Path) else v for k, v in vars(args).items() if k != "func"}
    resolved["version"] = __version__
    snapshot = out_path.with_name(out_path.stem + ".config.json")
    snapshot.write_text(json.dumps(resolved, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# -- ingest --


def cmd_ingest(args) -> int:
    from .ingestion import IngestReport, build_corpus, load_exclusions, load_rows

    rows = load_rows(args.source, kind=args.format, columns=json.loads(Path(args.columns).read_text()) if args.columns else None)
    report = IngestReport()
    records = build_corpus(
        rows,
        topic=Topic(args.topic),
        aggregator=args.format == "aggregator",
        exclusions=load_exclusions(args.exclude),
        report=report,
    )
    write_jsonl(args.out, records)
    _write_snapshot(Path(args.out), args)
    print(
        f"kept {report.kept} records "
        f"(discarded {report.discarded}, filtered {report.filtered_out}, "
        f"excluded {report.excluded}, duplicates {report.duplicates}, "
        f"errors {len(report.errors)})"
    )
    for error in report.errors[:20]:
        print(f"  {error}", file=sys.stderr)
    return 0


def cmd_split(args) -> int:
    records = read_jsonl(args.input)
    out = split_by_date(records, dev_fraction=args.dev_fraction, seed=args.seed)
    write_jsonl(args.out, out)
    _write_snapshot(Path(args.out), args)
    counts = {}
    for record in out:
        counts[record.headline.split.value] = counts.get(record.headline.split.value, 0) + 1
    print(json.dumps(counts))
    return 0


def cmd_postprocess(args) -> int:
    from .postprocess import EmotionLexicon, load_blocklist, postprocess_corpus

    records = read_jsonl(args.input)
    lexicon = EmotionLexicon.load(args.emotion_lexicon)
    cleaned, report = postprocess_corpus(
        records,
        lexicon=lexicon,
        seed=args.seed,
        blocklist=load_blocklist(args.misspelling_blocklist),
    )
    write_jsonl(args.out, cleaned)
    _write_snapshot(Path(args.out), args)
    print(report.summary())
    return 0


def cmd_stats(args) -> int:
    records = read_jsonl(args.input)
    by_split: dict[str, list[Record]] = {}
    for record in records:
        key = record.headline.split.value if record.headline.split else "unsplit"
        by_split.setdefault(key, []).append(record)
    rows = {}
    for split in sorted(by_split):
        stats = compute_stats(by_split[split])
        rows[split] = {
            "headlines": stats.headlines,
            "unique_intents": stats.unique_intents,
            "unique_perceptions": stats.unique_perceptions,
            "unique_actions": stats.unique_actions,
            "total_pairs": stats.total_pairs,
        }
    text = json.dumps(rows, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        _write_snapshot(Path(args.out), args)
    return 0


def cmd_mask(args) -> int:
    from .keyphrases import domain_specific, mask_text, textrank_keyphrases

    records = read_jsonl(args.input)
    domains = [Topic(d.strip()) for d in args.domains.split(",")]
    if len(domains) != 2:
        print("mask expects exactly two --domains", file=sys.stderr)
        return 2
    sets = {}
    for domain in domains:
        texts = [r.headline.text for r in records if r.headline.topic is domain]
        if not texts:
            print(f"no records for domain {domain.value}", file=sys.stderr)
            return 2
        sets[domain] = textrank_keyphrases(
            texts, top_n=args.candidates, window=args.window, domain=domain.value
        )
    specific_a, specific_b = domain_specific(sets[domains[0]], sets[domains[1]], top=args.top)
    specific = {domains[0]: specific_a, domains[1]: specific_b}

    masked = []
    for record in records:
        phrases = specific.get(record.headline.topic)
        if phrases is None:
            masked.append(record)
            continue
        text = mask_text(record.headline.text, phrases.texts())
        masked.append(
            Record(
                headline=dataclasses.replace(record.headline, text=text),
                frame=record.frame,
            )
        )
    write_jsonl(args.out, masked)
    if args.keyphrases_out:
        payload = {
            domain.value: {
                "all": list(map(list, sets[domain].phrases)),
                "domain_specific": list(map(list, specific[domain].phrases)),
            }
            for domain in domains
        }
        Path(args.keyphrases_out).write_text(json.dumps(payload, indent=2), encoding="utf-8")
    _write_snapshot(Path(args.out), args)
    print(
        f"masked {sum(1 for a, b in zip(records, masked) if a.headline.text != b.headline.text)}"
        f" of {len(records)} headlines"
    )
    return 0


# -- modeling commands --


def _parse_dims(raw: str) -> list[Dimension]:
    return [Dimension(d.strip()) for d in raw.split(",")]


def _load_train_config(path, overrides: dict):
    from .modeling import TrainConfig

    doc = json.loads(Path(path).read_text(encoding="utf-8")) if path else {}
    doc.update({k: v for k, v in overrides.items() if v is not None})
    allowed = {f for f in TrainConfig.__dataclass_fields__}
    adapter = doc.pop("adapter", "tiny_joint")
    model_args = {k: doc.pop(k) for k in ("embedding_dim", "hidden_dim") if k in doc}
    unknown = set(doc) - allowed
    if unknown:
        raise SystemExit(f"unknown config keys: {sorted(unknown)}")
    return TrainConfig(**doc), adapter, model_args


def cmd_train(args) -> int:
    from .modeling import (
        EncodingMode,
        TinyClassifier,
        TinyEncDecLM,
        TinyJointLM,
        Vocab,
        examples_from_records,
        train,
    )

    config, adapter_kind, model_args = _load_train_config(
        args.config, {"seed": args.seed}
    )
    train_records = read_jsonl(args.input)
    dev_records = read_jsonl(args.dev) if args.dev else []
    texts = [r.headline.text for r in train_records + dev_records]
    for record in train_records + dev_records:
        if record.frame:
            for dim in FREE_TEXT_DIMENSIONS:
                texts.extend(record.frame.free_text(dim))
    vocab = Vocab.from_texts(texts)

    if args.task == "classify":
        adapter = TinyClassifier(vocab, seed=config.seed, **model_args)
        make = lambda records: [
            (r.headline.text, r.headline.gold_label.value) for r in records
        ]
        train_examples = make(train_records)
        dev_examples = make(dev_records)
    else:
        dims = _parse_dims(args.dims) if args.dims else list(Dimension)
        if adapter_kind == "tiny_encdec":
            adapter = TinyEncDecLM(vocab, seed=config.seed, **model_args)
            mode = EncodingMode.INPUT_OUTPUT
        else:
            adapter = TinyJointLM(vocab, seed=config.seed, **model_args)
            mode = EncodingMode.JOINT_SEQUENCE
        train_examples = examples_from_records(train_records, dims, mode=mode)
        dev_examples = examples_from_records(dev_records, dims, mode=mode)

    result = train(adapter, train_examples, dev_examples or None, config)
    out = Path(args.out)
    adapter.save(out)
    _write_snapshot(out / "run", args)
    (out / "history.json").write_text(
        json.dumps(
            {
                "dev_losses": result.dev_losses,
                "best_epoch": result.best_epoch,
                "best_dev_loss": result.best_dev_loss,
                "stopped_early": result.stopped_early,
            },
            indent=2,
        ),
        encoding="utf-8",
    )
    print(
        f"trained {adapter_kind} for {len(result.dev_losses)} epochs; "
        f"best dev loss {result.best_dev_loss:.4f} at epoch {result.best_epoch}"
    )
    return 0


def cmd_generate(args) -> int:
    from .modeling import GenerationConfig, ParseError, load_adapter, predict_dimension

    adapter = load_adapter(args.model)
    config = GenerationConfig(beam_size=args.beam, max_length=args.max_length, seed=args.seed)
    dimension = Dimension(args.dim)
    records = read_jsonl(args.input)
    out_path = Path(args.out)
    with out_path.open("w", encoding="utf-8") as fh:
        for record in records:
            force = record.headline.topic if args.force_topic else None
            row = {"headline_id": record.headline.id, "dimension": dimension.value}
            try:
                pred = predict_dimension(
                    adapter, record.headline.text, dimension, config, force_topic=force
                )
                row.update(
                    {
                        "topic": pred.topic.value,
                        "text": pred.text,
                        "empty": pred.empty,
                        "truncated": pred.truncated,
                    }
                )
            except ParseError as exc:
                row.update({"error": str(exc)})
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")
    _write_snapshot(out_path, args)
    print(f"wrote {out_path}")
    return 0


def cmd_classify(args) -> int:
    from .modeling import classify, load_adapter

    adapter = load_adapter(args.model)
    records = read_jsonl(args.input)
    out_path = Path(args.out)
    with out_path.open("w", encoding="utf-8") as fh:
        for record in records:
            probs = classify(adapter, record.headline.text)
            predicted = max(probs, key=lambda label: (probs[label], label))
            fh.write(
                json.dumps(
                    {
                        "headline_id": record.headline.id,
                        "dimension": Dimension.GOLD_LABEL.value,
                        "text": predicted,
                        "probabilities": probs,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )
    _write_snapshot(out_path, args)
    print(f"wrote {out_path}")
    return 0


def cmd_nn_baseline(args) -> int:
    from .modeling import HashedNgramEmbedder, NearestNeighborIndex

    train_records = [r for r in read_jsonl(args.train) if r.frame is not None]
    index = NearestNeighborIndex(train_records, HashedNgramEmbedder())
    records = read_jsonl(args.input)
    rows = []
    for record in records:
        neighbor = index.query(record.headline.text)
        frame = neighbor.frame
        for dimension in FREE_TEXT_DIMENSIONS:
            values = frame.free_text(dimension)
            if not values:
                continue
            rows.append(
                {
                    "headline_id": record.headline.id,
                    "dimension": dimension.value,
                    "text": values[0],
                    "values": list(values),
                    "neighbor_id": neighbor.headline.id,
                }
            )
    if args.out:
        out_path = Path(args.out)
        with out_path.open("w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        _write_snapshot(out_path, args)
        print(f"wrote {out_path}")
    else:
        for row in rows:
            print(json.dumps(row, ensure_ascii=False))
    return 0


# -- evaluation --


def _load_preds(path) -> list[dict]:
    rows = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                rows.append(json.loads(line))
    return rows


def _evaluate_generation(preds, gold_records) -> dict:
    from .modeling import HashedNgramEmbedder

    gold = {r.headline.id: r.frame for r in gold_records if r.frame is not None}
    by_dim: dict[str, list[GenerationEvalRow]] = {}
    skipped = 0
    for row in preds:
        frame = gold.get(row["headline_id"])
        dimension = Dimension(row["dimension"])
        if frame is None or "text" not in row:
            skipped += 1
            continue
        references = frame.free_text(dimension)
        if not references:
            skipped += 1
            continue
        by_dim.setdefault(dimension.value, []).append(
            GenerationEvalRow(
                headline_id=row["headline_id"],
                dimension=dimension.value,
                candidate=row["text"],
                references=tuple(references),
            )
        )
    embedder = HashedNgramEmbedder()
    report = {
        "task": "generation",
        "bleu_level": "corpus",
        "skipped_rows": skipped,
        "dimensions": {},
    }
    for dimension, rows in sorted(by_dim.items()):
        report["dimensions"][dimension] = {
            "rows": len(rows),
            "bleu4": bleu4(rows),
            "embed_match_f": 100.0 * greedy_match_corpus(rows, embedder),
        }
    return report


def _evaluate_classification(preds, gold_records) -> dict:
    from .modeling import decode_categorical

    gold = {r.headline.id: r.frame for r in gold_records if r.frame is not None}
    by_dim: dict[str, list[ClassificationEvalRow]] = {}
    skipped = 0
    for row in preds:
        frame = gold.get(row["headline_id"])
        dimension = Dimension(row["dimension"])
        if frame is None:
            skipped += 1
            continue
        if dimension is Dimension.SPREAD:
            gold_value = frame.spread
        elif dimension is Dimension.PERCEIVED_LABEL:
            if frame.perceived_label is PerceivedLabel.UNSURE:
                skipped += 1
                continue
            gold_value = frame.perceived_label.value
        elif dimension is Dimension.GOLD_LABEL:
            gold_value = frame.gold_label.value
        else:
            skipped += 1
            continue
        decoded = decode_categorical(row.get("text", ""), dimension)
        if decoded is not UNPARSEABLE and dimension is not Dimension.SPREAD:
            decoded = decoded.value
        by_dim.setdefault(dimension.value, []).append(
            ClassificationEvalRow(
                headline_id=row["headline_id"], predicted=decoded, gold=gold_value
            )
        )
    report = {
        "task": "classification",
        "human_gold_f1_reference": HUMAN_GOLD_F1_REFERENCE,
        "skipped_rows": skipped,
        "dimensions": {},
    }
    for dimension, rows in sorted(by_dim.items()):
        precision, recall, f1 = macro_prf(rows)
        unparseable = sum(1 for r in rows if r.predicted is UNPARSEABLE)
        report["dimensions"][dimension] = {
            "rows": len(rows),
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "unparseable": unparseable,
        }
    return report


def cmd_evaluate(args) -> int:
    report: dict
    if args.task == "human":
        from .study import load_journal

        rows = load_journal(args.preds)
        if not rows:
            print("no judgements in journal", file=sys.stderr)
            return 2
        report = {"task": "human", **human_eval_report(rows)}
    else:
        if not args.gold:
            print("--gold is required for generation/classification", file=sys.stderr)
            return 2
        preds = _load_preds(args.preds)
        gold_records = read_jsonl(args.gold)
        if args.task == "generation":
            report = _evaluate_generation(preds, gold_records)
        else:
            report = _evaluate_classification(preds, gold_records)
    out_path = Path(args.report)
    out_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    _write_snapshot(out_path, args)
    print(f"wrote {out_path}")
    return 0


def _render_table(headers: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    for row in rows:
        lines.append("  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)))
    return "\n".join(lines)


def cmd_report(args) -> int:
    doc = json.loads(Path(args.report).read_text(encoding="utf-8"))
    task = doc.get("task")
    if task == "generation":
        rows = [
            [dim, f"{vals['bleu4']:.2f}", f"{vals['embed_match_f']:.2f}", str(vals["rows"])]
            for dim, vals in sorted(doc["dimensions"].items())
        ]
        print(_render_table(["dimension", "BLEU-4", "EmbedMatch-F", "rows"], rows))
    elif task == "classification":
        rows = [
            [
                dim,
                f"{vals['precision']:.2f}",
                f"{vals['recall']:.2f}",
                f"{vals['f1']:.2f}",
                str(vals["unparseable"]),
            ]
            for dim, vals in sorted(doc["dimensions"].items())
        ]
        print(_render_table(["dimension", "P", "R", "F1", "unparseable"], rows))
        print(f"\nhuman gold-label F1 reference: {doc['human_gold_f1_reference']}")
    elif task == "human":
        rows = []
        for model, vals in sorted(doc["models"].items()):
            corr = vals.get("corr_with_label")
            corr_q = vals.get("corr_with_label_quality_ge_3")
            rows.append(
                [
                    model,
                    f"{vals['quality_mean']:.2f}",
                    f"{vals['plus_trust_pct']:.2f}",
                    f"{vals['minus_trust_pct']:.2f}",
                    f"{corr['r']:.2f}" if corr else "-",
                    f"{corr_q['r']:.2f}" if corr_q else "-",
                    f"{vals['socially_acceptable_pct']:.2f}",
                ]
            )
        print(
            _render_table(
                ["model", "quality", "+trust%", "-trust%", "corr", "corr(q>=3)", "acceptable%"],
                rows,
            )
        )
        for notice in doc.get("notices", []):
            print(f"note: {notice}")
    else:
        print(json.dumps(doc, indent=2))
    return 0


def cmd_serve_study(args) -> int:
    import uvicorn

    from .service import create_app
    from .study import SamplingConfig, load_study_items

    app = create_app(
        load_study_items(args.items),
        args.journal,
        SamplingConfig(queue_size=args.queue_size, seed=args.seed),
    )
    if args.static:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=args.static, html=True), name="ui")
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rframes", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="convert a raw export to a corpus file")
    p.add_argument("--source", required=True)
    p.add_argument("--format", required=True, choices=["aggregator", "claims"])
    p.add_argument("--topic", required=True, choices=[t.value for t in Topic])
    p.add_argument("--exclude", default=None, help="phrase-list file for keyword false hits")
    p.add_argument("--columns", default=None, help="JSON column-mapping file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("split", help="assign date-based train/dev/test splits")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--dev-fraction", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("postprocess", help="clean annotations")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emotion-lexicon", default=None)
    p.add_argument("--misspelling-blocklist", default=None)
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("stats", help="dataset statistics per split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("mask", help="mask domain-specific keyphrases")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--domains", default="covid,climate")
    p.add_argument("--top", type=int, default=100)
    p.add_argument("--candidates", type=int, default=400, help="keyphrases ranked per domain before the set difference")
    p.add_argument("--window", type=int, default=4)
    p.add_argument("--out", required=True)
    p.add_argument("--keyphrases-out", default=None)
    p.set_defaults(func=cmd_mask)

    p = sub.add_parser("train", help="train an adapter")
    p.add_argument("--task", required=True, choices=["generate", "classify"])
    p.add_argument("--dims", default=None, help="comma-separated dimensions")
    p.add_argument("--config", default=None, help="JSON hyperparameter file")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--dev", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("generate", help="decode one dimension for each headline")
    p.add_argument("--model", required=True)
    p.add_argument("--dim", required=True, choices=[d.value for d in Dimension])
    p.add_argument("--beam", type=int, default=3)
    p.add_argument("--max-length", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force-topic", action="store_true")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("classify", help="predict gold labels with a classifier adapter")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("nn-baseline", help="retrieval baseline over the training corpus")
    p.add_argument("--train", required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_nn_baseline)

    p = sub.add_parser("evaluate", help="score predictions against gold annotations")
    p.add_argument("--task", required=True, choices=["generation", "classification", "human"])
    p.add_argument("--preds", required=True)
    p.add_argument("--gold", default=None)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("report", help="render an evaluation report as text tables")
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("serve-study", help="run the A/B trust study service")
    p.add_argument("--items", required=True)
    p.add_argument("--journal", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--queue-size", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--static", default=None, help="directory with the built study UI")
    p.set_defaults(func=cmd_serve_study)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
