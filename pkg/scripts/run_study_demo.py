"""Scripted A/B trust study demo.

Builds an item pool where real headlines get supportive implications and
misinfo headlines get debunking ones, simulates three raters whose trust
shifts track the gold label, and prints the aggregated study report.

To run the interactive version instead:

    rframes serve-study --items scripts/_study_run/items.jsonl \
        --journal scripts/_study_run/journal.jsonl --static frontend/dist
"""
import json
import pathlib

from reaction_frames.schema import GoldLabel
from reaction_frames.study import SamplingConfig, StudyService, make_study_item
from reaction_frames.cli import main as cli_main

OUT = pathlib.Path(__file__).resolve().parent / "_study_run"


def build_items():
    items = []
    for i in range(6):
        items.append(
            make_study_item(
                headline_id=f"real-{i}",
                headline_text=f"verified report number {i} on mask usage",
                implication=f"the guidance in report {i} is well supported",
                model_id="toy-joint",
                gold_label=GoldLabel.REAL,
            )
        )
        items.append(
            make_study_item(
                headline_id=f"misinfo-{i}",
                headline_text=f"shocking claim number {i} about vaccines",
                implication=f"claim {i} contradicts the published evidence",
                model_id="toy-joint",
                gold_label=GoldLabel.MISINFO,
            )
        )
    return items


def main():
    OUT.mkdir(exist_ok=True)
    journal = OUT / "journal.jsonl"
    if journal.exists():
        journal.unlink()
    items = build_items()
    with (OUT / "items.jsonl").open("w", encoding="utf-8") as fh:
        for item in items:
            fh.write(
                json.dumps(
                    {
                        "headline_id": item.headline_id,
                        "headline_text": item.headline_text,
                        "implication_text": item.implication_text,
                        "model_id": item.model_id,
                        "gold_label": item.gold_label.value,
                    }
                )
                + "\n"
            )

    service = StudyService(items, journal)
    for rater, jitter in (("w1", 0), ("w2", 0), ("w3", 1)):
        session = service.create_session(rater, SamplingConfig(queue_size=8, seed=42))
        for state in session.queue:
            hid = state.item.headline_id
            service.submit_pre_rating(session.session_id, hid, 3)
            gold = state.item.gold_label
            post = 3 + (1 if gold is GoldLabel.REAL else -1)
            if jitter and hid.endswith("0"):
                post = 3  # one rater shrugs at one headline
            service.submit_post_rating(
                session.session_id,
                hid,
                post,
                quality=4,
                acceptability="majority",
                perceived_label=gold.value,
            )

    report_path = OUT / "human_report.json"
    cli_main(["evaluate", "--task", "human", "--preds", str(journal), "--report", str(report_path)])
    cli_main(["report", "--report", str(report_path)])


if __name__ == "__main__":
    main()
