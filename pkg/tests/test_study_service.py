import json

import pytest
from fastapi.testclient import TestClient

from reaction_frames.schema import GoldLabel
from reaction_frames.service import create_app
from reaction_frames.study import (
    ExhaustedError,
    IMPLICATION_TEMPLATE,
    PhaseError,
    SamplingConfig,
    StudyService,
    ValidationError,
    load_journal,
    make_study_item,
)


def make_pool(n_real=4, n_misinfo=4, models=("t5-base",)):
    items = []
    idx = 0
    for model in models:
        for i in range(n_real):
            items.append(
                make_study_item(
                    headline_id=f"r{i}",
                    headline_text=f"real headline {i}",
                    implication=f"implication {idx} is fine",
                    model_id=model,
                    gold_label=GoldLabel.REAL,
                )
            )
            idx += 1
        for i in range(n_misinfo):
            items.append(
                make_study_item(
                    headline_id=f"m{i}",
                    headline_text=f"misinfo headline {i}",
                    implication=f"implication {idx} misleads",
                    model_id=model,
                    gold_label=GoldLabel.MISINFO,
                )
            )
            idx += 1
    return items


@pytest.fixture()
def service(tmp_path):
    return StudyService(make_pool(), tmp_path / "journal.jsonl")


class TestTemplate:
    def test_template_applied_once(self):
        item = make_study_item("h1", "text", "masks help", "m", GoldLabel.REAL)
        assert item.implication_text == "The writer is implying that masks help"
        again = make_study_item("h1", "text", item.implication_text, "m", GoldLabel.REAL)
        assert again.implication_text == item.implication_text

    def test_empty_implication_rejected(self):
        with pytest.raises(ValidationError):
            make_study_item("h1", "text", "  ", "m", GoldLabel.REAL)


class TestSampling:
    def test_queue_balanced_by_gold_label(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=4, seed=0))
        labels = [s.item.gold_label for s in session.queue]
        assert labels.count(GoldLabel.REAL) == 2
        assert labels.count(GoldLabel.MISINFO) == 2

    def test_same_seed_same_queue(self, tmp_path):
        service_a = StudyService(make_pool(), tmp_path / "a.jsonl")
        service_b = StudyService(make_pool(), tmp_path / "b.jsonl")
        queue_a = [
            s.item.headline_id
            for s in service_a.create_session("w1", SamplingConfig(queue_size=6, seed=9)).queue
        ]
        queue_b = [
            s.item.headline_id
            for s in service_b.create_session("w1", SamplingConfig(queue_size=6, seed=9)).queue
        ]
        assert queue_a == queue_b

    def test_balanced_across_models(self, tmp_path):
        service = StudyService(
            make_pool(models=("t5-base", "gpt2-large")), tmp_path / "j.jsonl"
        )
        session = service.create_session("w1", SamplingConfig(queue_size=8, seed=1))
        models = [s.item.model_id for s in session.queue]
        assert models.count("t5-base") == 4
        assert models.count("gpt2-large") == 4

    def test_rater_never_sees_judged_headline_again(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        state = session.queue[0]
        headline_id = state.item.headline_id
        service.submit_pre_rating(session.session_id, headline_id, 4)
        service.submit_post_rating(session.session_id, headline_id, 3, 4, "majority")
        follow_up = service.create_session("w1", SamplingConfig(queue_size=8, seed=0))
        assert headline_id not in [s.item.headline_id for s in follow_up.queue]

    def test_items_capped_at_three_unique_raters(self, tmp_path):
        service = StudyService(make_pool(n_real=1, n_misinfo=0), tmp_path / "j.jsonl")
        for rater in ("w1", "w2", "w3"):
            session = service.create_session(rater, SamplingConfig(queue_size=1, seed=0))
            hid = session.queue[0].item.headline_id
            service.submit_pre_rating(session.session_id, hid, 3)
            service.submit_post_rating(session.session_id, hid, 3, 3, "majority")
        with pytest.raises(ExhaustedError):
            service.create_session("w4", SamplingConfig(queue_size=1, seed=0))

    def test_exhausted_pool_errors(self, tmp_path):
        service = StudyService(make_pool(n_real=1, n_misinfo=1), tmp_path / "j.jsonl")
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        for state in session.queue:
            hid = state.item.headline_id
            service.submit_pre_rating(session.session_id, hid, 3)
            service.submit_post_rating(session.session_id, hid, 3, 3, "majority")
        with pytest.raises(ExhaustedError):
            service.create_session("w1", SamplingConfig(queue_size=2, seed=0))


class TestPhaseMachine:
    def test_pre_reveals_implication(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        state = session.queue[0]
        before = service.next_item(session.session_id)
        assert "implication_text" not in before
        view = service.submit_pre_rating(session.session_id, state.item.headline_id, 4)
        assert view["implication_text"] == state.item.implication_text

    def test_second_pre_rating_is_phase_error(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        hid = session.queue[0].item.headline_id
        service.submit_pre_rating(session.session_id, hid, 4)
        with pytest.raises(PhaseError):
            service.submit_pre_rating(session.session_id, hid, 2)

    def test_post_before_pre_is_phase_error(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        hid = session.queue[0].item.headline_id
        with pytest.raises(PhaseError):
            service.submit_post_rating(session.session_id, hid, 2, 4, "majority")

    def test_likert_range_validated(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        hid = session.queue[0].item.headline_id
        with pytest.raises(ValidationError):
            service.submit_pre_rating(session.session_id, hid, 6)
        service.submit_pre_rating(session.session_id, hid, 4)
        with pytest.raises(ValidationError):
            service.submit_post_rating(session.session_id, hid, 2, 0, "majority")
        with pytest.raises(ValidationError):
            service.submit_post_rating(session.session_id, hid, 2, 4, "centrist")

    def test_post_persists_trust_shift(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        hid = session.queue[0].item.headline_id
        service.submit_pre_rating(session.session_id, hid, 4)
        judgement = service.submit_post_rating(session.session_id, hid, 2, 4, "majority")
        assert judgement.post_trust - judgement.pre_trust == -2
        rows = load_journal(service.journal_path)
        assert len(rows) == 1
        assert rows[0].pre_trust == 4 and rows[0].post_trust == 2

    def test_unknown_headline_is_validation_error(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        with pytest.raises(ValidationError):
            service.submit_pre_rating(session.session_id, "nope", 3)


class TestResultsAndReplay:
    def _run_scripted(self, service):
        # w1 rates everything: real headlines gain a point, misinfo loses one
        session = service.create_session("w1", SamplingConfig(queue_size=8, seed=0))
        for state in session.queue:
            hid = state.item.headline_id
            gold = state.item.gold_label
            service.submit_pre_rating(session.session_id, hid, 3)
            post = 4 if gold is GoldLabel.REAL else 2
            service.submit_post_rating(
                session.session_id, hid, post, 4, "majority",
                perceived_label=gold.value,
            )
        return session

    def test_scripted_fixture_gives_perfect_correlation(self, service):
        self._run_scripted(service)
        report = service.results()
        model = report["models"]["t5-base"]
        assert model["corr_with_label"]["r"] == pytest.approx(1.0)
        assert model["plus_trust_pct"] == pytest.approx(50.0)
        assert model["minus_trust_pct"] == pytest.approx(50.0)

    def test_replaying_journal_reproduces_results(self, service, tmp_path):
        self._run_scripted(service)
        report = service.results()
        replayed = StudyService(make_pool(), service.journal_path)
        assert replayed.results() == report

    def test_single_judgement_omits_correlation(self, service):
        session = service.create_session("w1", SamplingConfig(queue_size=2, seed=0))
        hid = session.queue[0].item.headline_id
        service.submit_pre_rating(session.session_id, hid, 3)
        service.submit_post_rating(session.session_id, hid, 4, 4, "majority")
        report = service.results()
        assert report["models"]["t5-base"]["corr_with_label"] is None
        assert report["notices"]

    def test_filter_by_model(self, tmp_path):
        service = StudyService(
            make_pool(models=("t5-base", "gpt2-large")), tmp_path / "j.jsonl"
        )
        session = service.create_session("w1", SamplingConfig(queue_size=4, seed=0))
        for state in session.queue:
            hid = state.item.headline_id
            service.submit_pre_rating(session.session_id, hid, 3)
            service.submit_post_rating(session.session_id, hid, 3, 3, "fringe")
        report = service.results(model_id="t5-base")
        assert list(report["models"]) == ["t5-base"]

    def test_rater_accuracy_in_results(self, service):
        self._run_scripted(service)
        report = service.results()
        accuracy = report["rater_accuracy"]["raters"]["w1"]
        assert accuracy["accuracy"] == 1.0
        assert not accuracy["below_gate"]

    def test_empty_results_error(self, service):
        with pytest.raises(ValidationError):
            service.results()


class TestHttpSurface:
    @pytest.fixture()
    def client(self, tmp_path):
        app = create_app(make_pool(), tmp_path / "journal.jsonl")
        return TestClient(app)

    def _start(self, client, queue_size=2):
        response = client.post("/sessions", json={"rater_id": "w1", "queue_size": queue_size, "seed": 0})
        assert response.status_code == 200
        return response.json()["session_id"]

    def test_full_flow(self, client):
        session_id = self._start(client)
        item = client.get(f"/sessions/{session_id}/next").json()
        assert "implication_text" not in item
        hid = item["headline_id"]

        revealed = client.post(
            f"/sessions/{session_id}/items/{hid}/pre", json={"trust": 4}
        )
        assert revealed.status_code == 200
        assert revealed.json()["implication_text"].startswith("The writer is implying that")

        done = client.post(
            f"/sessions/{session_id}/items/{hid}/post",
            json={"trust": 2, "quality": 5, "acceptability": "majority"},
        )
        assert done.status_code == 200
        follow = client.get(f"/sessions/{session_id}/next").json()
        assert follow["headline_id"] != hid

    def test_post_before_pre_maps_to_409_phase_error(self, client):
        session_id = self._start(client)
        hid = client.get(f"/sessions/{session_id}/next").json()["headline_id"]
        response = client.post(
            f"/sessions/{session_id}/items/{hid}/post",
            json={"trust": 2, "quality": 5, "acceptability": "majority"},
        )
        assert response.status_code == 409
        assert response.json()["code"] == "PhaseError"

    def test_out_of_range_trust_maps_to_422(self, client):
        session_id = self._start(client)
        hid = client.get(f"/sessions/{session_id}/next").json()["headline_id"]
        response = client.post(f"/sessions/{session_id}/items/{hid}/pre", json={"trust": 9})
        assert response.status_code == 422
        assert response.json()["code"] == "ValidationError"

    def test_unknown_session_is_404(self, client):
        response = client.get("/sessions/sX/next")
        assert response.status_code == 404

    def test_exhausted_maps_to_409(self, tmp_path):
        app = create_app(make_pool(n_real=1, n_misinfo=0), tmp_path / "j.jsonl")
        client = TestClient(app)
        session_id = self._start(client, queue_size=1)
        item = client.get(f"/sessions/{session_id}/next").json()
        client.post(f"/sessions/{session_id}/items/{item['headline_id']}/pre", json={"trust": 3})
        client.post(
            f"/sessions/{session_id}/items/{item['headline_id']}/post",
            json={"trust": 3, "quality": 3, "acceptability": "fringe"},
        )
        response = client.post("/sessions", json={"rater_id": "w1"})
        assert response.status_code == 409
        assert response.json()["code"] == "Exhausted"

    def test_results_endpoint(self, client):
        session_id = self._start(client)
        item = client.get(f"/sessions/{session_id}/next").json()
        hid = item["headline_id"]
        client.post(f"/sessions/{session_id}/items/{hid}/pre", json={"trust": 3})
        client.post(
            f"/sessions/{session_id}/items/{hid}/post",
            json={"trust": 4, "quality": 4, "acceptability": "majority"},
        )
        report = client.get("/results").json()
        assert "t5-base" in report["models"]
