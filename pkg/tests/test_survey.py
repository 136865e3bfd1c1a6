"""Survey plan, store, statistics and HTTP API tests."""

import json

import numpy as np
import pytest
from fastapi.testclient import TestClient
from scipy import stats as scipy_stats

from echoaug.server import create_app
from echoaug.survey import (
    DuplicateResponseError,
    ResponseStore,
    SurveyPlan,
    SurveyResponse,
    binomial_test,
    build_plan,
    summarize,
)


def make_pools(tmp_path, n_real=60, n_synth=50):
    real_dir = tmp_path / "real"
    synth_dir = tmp_path / "synth"
    real_dir.mkdir(exist_ok=True)
    synth_dir.mkdir(exist_ok=True)
    real, synth = {}, {}
    for i in range(n_real):
        p = real_dir / f"r{i:03d}.png"
        p.write_bytes(b"\x89PNG real " + str(i).encode())
        real[p.stem] = str(p)
    for i in range(n_synth):
        p = synth_dir / f"s{i:03d}.png"
        p.write_bytes(b"\x89PNG synth " + str(i).encode())
        synth[p.stem] = str(p)
    return real, synth


class TestBuildPlan:
    def test_composition(self, tmp_path):
        real, synth = make_pools(tmp_path)
        plan = build_plan(real, synth, np.random.default_rng(0))
        kinds = [p.kind for p in plan.pairs]
        assert kinds.count("real_vs_synth") == 45
        assert kinds.count("real_real") == 5

    def test_no_image_reuse(self, tmp_path):
        real, synth = make_pools(tmp_path)
        plan = build_plan(real, synth, np.random.default_rng(1))
        used = [i for p in plan.pairs for i in (p.left_id, p.right_id)]
        assert len(used) == len(set(used)) == 100

    def test_side_assignment_balanced(self, tmp_path):
        real, synth = make_pools(tmp_path)
        lefts = 0
        total = 0
        for seed in range(200):
            plan = build_plan(real, synth, np.random.default_rng(seed))
            for p in plan.pairs:
                if p.kind == "real_vs_synth":
                    total += 1
                    lefts += p.synth_side == "left"
        assert 0.45 <= lefts / total <= 0.55

    def test_deterministic(self, tmp_path):
        real, synth = make_pools(tmp_path)
        a = build_plan(real, synth, np.random.default_rng(3))
        b = build_plan(real, synth, np.random.default_rng(3))
        assert a.pairs == b.pairs and a.images == b.images

    def test_insufficient_pools(self, tmp_path):
        real, synth = make_pools(tmp_path, n_real=54, n_synth=50)
        with pytest.raises(ValueError):
            build_plan(real, synth, np.random.default_rng(0))
        real, synth = make_pools(tmp_path, n_real=60, n_synth=44)
        with pytest.raises(ValueError):
            build_plan(real, synth, np.random.default_rng(0))

    def test_json_roundtrip(self, tmp_path):
        real, synth = make_pools(tmp_path)
        plan = build_plan(real, synth, np.random.default_rng(5), seed=5)
        path = tmp_path / "plan.json"
        plan.save(path)
        back = SurveyPlan.load(path)
        assert back.pairs == plan.pairs
        assert back.images == plan.images
        assert back.seed == 5

    def test_opaque_ids_hide_provenance(self, tmp_path):
        real, synth = make_pools(tmp_path)
        plan = build_plan(real, synth, np.random.default_rng(7))
        for image_id in plan.images:
            assert "real" not in image_id and "synth" not in image_id
            assert image_id.startswith("img")


def seeded_plan(tmp_path, seed=0):
    real, synth = make_pools(tmp_path)
    return build_plan(real, synth, np.random.default_rng(seed), seed=seed)


def response(pid, group, idx, selection, tag="texture_speckle", text="grainy"):
    return SurveyResponse(
        participant_id=pid, group=group, pair_index=idx, selection=selection,
        tag=tag, explanation=text,
    )


class TestResponseStore:
    def test_record_and_progress(self, tmp_path):
        store = ResponseStore(tmp_path / "r.ndjson")
        progress = store.record(response("p1", "engineer", 0, "left"))
        assert progress["answered"] == [0]
        assert progress["next_unanswered"] == 1
        assert progress["total"] == 50

    def test_duplicate_rejected(self, tmp_path):
        store = ResponseStore(tmp_path / "r.ndjson")
        store.record(response("p1", "engineer", 3, "left"))
        with pytest.raises(DuplicateResponseError):
            store.record(response("p1", "engineer", 3, "right"))

    def test_group_pinned(self, tmp_path):
        store = ResponseStore(tmp_path / "r.ndjson")
        store.record(response("p1", "engineer", 0, "left"))
        with pytest.raises(ValueError):
            store.record(response("p1", "cardiologist", 1, "left"))

    def test_validation(self, tmp_path):
        store = ResponseStore(tmp_path / "r.ndjson")
        with pytest.raises(ValueError):
            store.record(response("p1", "plumber", 0, "left"))
        with pytest.raises(ValueError):
            store.record(response("p1", "engineer", 99, "left"))
        with pytest.raises(ValueError):
            store.record(response("p1", "engineer", 0, "middle"))
        with pytest.raises(ValueError):
            store.record(response("p1", "engineer", 0, "left", tag="other", text=" "))

    def test_persistence_across_reopen(self, tmp_path):
        path = tmp_path / "r.ndjson"
        store = ResponseStore(path)
        store.record(response("p1", "engineer", 0, "left"))
        store.record(response("p1", "engineer", 1, "right"))
        reopened = ResponseStore(path)
        assert len(reopened.responses()) == 2
        with pytest.raises(DuplicateResponseError):
            reopened.record(response("p1", "engineer", 0, "left"))


class TestBinomialTest:
    def test_even_split_two_sided_one(self):
        assert binomial_test(50, 100).p_two_sided == pytest.approx(1.0)

    def test_symmetry(self):
        a = binomial_test(30, 100)
        b = binomial_test(70, 100)
        assert a.p_two_sided == pytest.approx(b.p_two_sided, rel=1e-12)

    def test_matches_scipy_exact(self):
        for k, n in ((86, 135), (168, 315), (0, 10), (10, 10), (7, 13)):
            mine = binomial_test(k, n)
            assert mine.p_two_sided == pytest.approx(
                scipy_stats.binomtest(k, n, 0.5).pvalue, rel=1e-12
            )
            assert mine.p_one_sided_greater == pytest.approx(
                scipy_stats.binomtest(k, n, 0.5, alternative="greater").pvalue, rel=1e-12
            )

    def test_reproduces_reported_survey_p_values(self):
        # cardiologists: 63.7% of 135 trials -> 86 correct, P ~ 0.09%
        one_sided = binomial_test(86, 135).p_one_sided_greater
        assert abs(one_sided - 0.0009) / 0.0009 <= 0.10
        # other groups: 53.3% of 315 trials -> 168 correct, P ~ 24.6%
        two_sided = binomial_test(168, 315).p_two_sided
        assert abs(two_sided - 0.246) / 0.246 <= 0.10

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            binomial_test(-1, 10)
        with pytest.raises(ValueError):
            binomial_test(11, 10)


def answer_with_accuracy(store, plan, pid, group, n_correct, rng):
    """Answer all 50 pairs hitting an exact correct count on informative pairs."""
    informative = [i for i, p in enumerate(plan.pairs) if p.kind == "real_vs_synth"]
    correct_set = set(rng.permutation(informative)[:n_correct].tolist())
    for idx, pair in enumerate(plan.pairs):
        if pair.kind == "real_real":
            selection = "left" if rng.random() < 0.5 else "right"
        elif idx in correct_set:
            selection = pair.synth_side
        else:
            selection = "left" if pair.synth_side == "right" else "right"
        store.record(response(pid, group, idx, selection))


class TestSummarize:
    def test_perfect_participant(self, tmp_path):
        plan = seeded_plan(tmp_path)
        store = ResponseStore(tmp_path / "r.ndjson")
        answer_with_accuracy(store, plan, "ace", "engineer", 45, np.random.default_rng(0))
        summary = summarize(store, plan)
        assert summary.by_group["engineer"].accuracy == 1.0
        assert summary.overall.n_trials == 45

    def test_reproduces_reported_survey_numbers(self, tmp_path):
        # 3 cardiologists totalling 86/135; 4 researchers 96/180 and
        # 3 engineers 72/315-180 totalling 168/315; overall 254/450
        plan = seeded_plan(tmp_path)
        store = ResponseStore(tmp_path / "r.ndjson")
        rng = np.random.default_rng(1)
        for pid, count in (("c1", 29), ("c2", 29), ("c3", 28)):
            answer_with_accuracy(store, plan, pid, "cardiologist", count, rng)
        for pid, count in (("r1", 24), ("r2", 24), ("r3", 24), ("r4", 24)):
            answer_with_accuracy(store, plan, pid, "clinical_researcher", count, rng)
        for pid, count in (("e1", 24), ("e2", 24), ("e3", 24)):
            answer_with_accuracy(store, plan, pid, "engineer", count, rng)
        summary = summarize(store, plan)
        card = summary.by_group["cardiologist"]
        assert card.n_correct == 86 and card.n_trials == 135
        assert card.accuracy == pytest.approx(0.637, abs=5e-4)
        others = summary.non_cardiologists
        assert others.n_correct == 168 and others.n_trials == 315
        assert others.accuracy == pytest.approx(0.533, abs=5e-4)
        assert summary.overall.accuracy == pytest.approx(0.564, abs=5e-4)
        assert abs(card.p_one_sided - 0.0009) / 0.0009 <= 0.10
        assert abs(others.p_two_sided - 0.246) / 0.246 <= 0.10

    def test_decoys_excluded_from_accuracy(self, tmp_path):
        plan = seeded_plan(tmp_path)
        store = ResponseStore(tmp_path / "r.ndjson")
        answer_with_accuracy(store, plan, "p", "engineer", 20, np.random.default_rng(2))
        summary = summarize(store, plan)
        assert summary.overall.n_trials == 45  # not 50
        assert sum(v["left"] + v["right"] for v in summary.decoy_selections.values()) == 5

    def test_summary_recomputable_from_raw(self, tmp_path):
        plan = seeded_plan(tmp_path)
        path = tmp_path / "r.ndjson"
        store = ResponseStore(path)
        answer_with_accuracy(store, plan, "p", "engineer", 31, np.random.default_rng(3))
        fresh = summarize(ResponseStore(path), plan)
        cached = summarize(store, plan)
        assert fresh == cached
        assert fresh.by_group["engineer"].n_correct == 31


@pytest.fixture
def api(tmp_path):
    plan = seeded_plan(tmp_path)
    store = ResponseStore(tmp_path / "responses.ndjson")
    app = create_app(plan, store)
    return TestClient(app), plan, store


class TestApi:
    def test_pair_payload_is_blinded(self, api):
        client, plan, _ = api
        for idx in range(50):
            payload = client.get(f"/api/pair/{idx}").json()
            assert set(payload) == {"index", "total", "left", "right"}
            text = json.dumps(payload)
            assert "synth" not in text and "kind" not in text

    def test_image_serving(self, api):
        client, plan, _ = api
        payload = client.get("/api/pair/0").json()
        image = client.get(payload["left"])
        assert image.status_code == 200
        assert image.content.startswith(b"\x89PNG")

    def test_unknown_pair_and_image(self, api):
        client, _, _ = api
        assert client.get("/api/pair/50").status_code == 404
        assert client.get("/api/image/zzz").status_code == 404
        assert client.get("/api/image/..%2Fplan").status_code == 404

    def test_response_flow(self, api):
        client, _, _ = api
        body = {
            "participant_id": "p1",
            "group": "engineer",
            "pair_index": 0,
            "selection": "left",
            "tag": "anatomy",
            "explanation": "odd valve",
        }
        first = client.post("/api/response", json=body)
        assert first.status_code == 200
        assert first.json()["answered"] == [0]
        duplicate = client.post("/api/response", json=body)
        assert duplicate.status_code == 409
        bad = dict(body, pair_index=1, group="plumber")
        assert client.post("/api/response", json=bad).status_code == 400

    def test_progress_resume(self, api):
        client, _, _ = api
        for idx in (0, 1, 3):
            client.post("/api/response", json={
                "participant_id": "p2", "group": "engineer", "pair_index": idx,
                "selection": "right", "tag": "artifact", "explanation": "",
            })
        progress = client.get("/api/progress/p2").json()
        assert progress["answered"] == [0, 1, 3]
        assert progress["next_unanswered"] == 2
        assert progress["complete"] is False

    def test_summary_endpoint(self, api):
        client, plan, store = api
        answer_with_accuracy(store, plan, "p3", "cardiologist", 30, np.random.default_rng(4))
        summary = client.get("/api/summary").json()
        assert summary["by_group"]["cardiologist"]["n_correct"] == 30
        assert summary["n_informative"] == 45
