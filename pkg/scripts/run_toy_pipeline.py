"""End-to-end pipeline demo on a synthetic corpus.

Builds a tiny annotated corpus, cleans it, extracts and masks
domain-specific keyphrases, trains the toy generation and classification
adapters, decodes predictions and prints evaluation reports. Everything
runs on CPU in about a minute; outputs land in scripts/_toy_run/.
"""
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "tests"))

from conftest import toy_records  # reuses the memorizable fixture corpus
from reaction_frames.cli import main
from reaction_frames.schema import write_jsonl

OUT = pathlib.Path(__file__).resolve().parent / "_toy_run"


def run(argv):
    print(f"$ rframes {' '.join(str(a) for a in argv)}")
    code = main([str(a) for a in argv])
    if code != 0:
        raise SystemExit(code)


def main_demo():
    OUT.mkdir(exist_ok=True)
    corpus = OUT / "annotated.jsonl"
    write_jsonl(corpus, toy_records())

    clean = OUT / "clean.jsonl"
    run(["postprocess", "--in", corpus, "--out", clean, "--seed", 0])
    run(["stats", "--in", clean])

    masked = OUT / "masked.jsonl"
    run([
        "mask", "--in", clean, "--domains", "covid,climate",
        "--top", 100, "--out", masked, "--keyphrases-out", OUT / "keyphrases.json",
    ])

    config = OUT / "train_config.json"
    config.write_text(json.dumps({
        "adapter": "tiny_joint",
        "learning_rate": 8e-3,
        "batch_size": 24,
        "max_epochs": 200,
        "patience": 200,
        "hidden_dim": 64,
    }, indent=2))
    model = OUT / "model"
    run([
        "train", "--task", "generate",
        "--dims", "writer_intent,reader_perception,reader_action",
        "--config", config, "--in", clean, "--out", model, "--seed", 0,
    ])

    preds = OUT / "preds.jsonl"
    run([
        "generate", "--model", model, "--dim", "writer_intent", "--beam", 3,
        "--max-length", 40, "--in", clean, "--out", preds, "--force-topic",
    ])
    report = OUT / "generation_report.json"
    run(["evaluate", "--task", "generation", "--preds", preds, "--gold", clean, "--report", report])
    run(["report", "--report", report])

    clf_config = OUT / "clf_config.json"
    clf_config.write_text(json.dumps({
        "adapter": "tiny_classifier",
        "learning_rate": 5e-3,
        "batch_size": 8,
        "max_epochs": 150,
        "patience": 150,
    }, indent=2))
    clf = OUT / "classifier"
    run(["train", "--task", "classify", "--config", clf_config, "--in", clean, "--out", clf, "--seed", 0])
    clf_preds = OUT / "clf_preds.jsonl"
    run(["classify", "--model", clf, "--in", clean, "--out", clf_preds])
    clf_report = OUT / "classification_report.json"
    run(["evaluate", "--task", "classification", "--preds", clf_preds, "--gold", clean, "--report", clf_report])
    run(["report", "--report", clf_report])

    run(["nn-baseline", "--train", clean, "--in", clean, "--out", OUT / "nn_preds.jsonl"])
    print(f"\nartifacts in {OUT}")


if __name__ == "__main__":
    main_demo()
