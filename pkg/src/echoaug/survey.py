"""Blinded realism survey: plan construction, response store, statistics.

Participants see 50 image pairs, 45 with one synthetic image and 5
decoys with two real images (unknown to them), and must pick the
synthetic side plus an explanation. Accuracy is computed over the 45
informative pairs per evaluator group and tested against random
guessing with an exact binomial test.
"""

import json
import threading
import time
from dataclasses import asdict, dataclass
from math import comb
from pathlib import Path

N_PAIRS = 50
N_DECOYS = 5
N_INFORMATIVE = N_PAIRS - N_DECOYS

GROUPS = ("cardiologist", "clinical_researcher", "engineer")
SIDES = ("left", "right")
EXPLANATION_TAGS = ("anatomy", "texture_speckle", "sector_border", "artifact", "other")


class DuplicateResponseError(ValueError):
    """The participant already answered this pair."""


@dataclass
class SurveyPair:
    left_id: str
    right_id: str
    kind: str  # "real_vs_synth" | "real_real"
    synth_side: str  # "left" | "right" | "none"


@dataclass
class SurveyPlan:
    pairs: list
    images: dict  # opaque image id -> path on the serving host
    seed: int = None

    def __post_init__(self):
        kinds = [p.kind for p in self.pairs]
        if len(self.pairs) != N_PAIRS:
            raise ValueError(f"plan must have {N_PAIRS} pairs, got {len(self.pairs)}")
        if kinds.count("real_vs_synth") != N_INFORMATIVE or kinds.count("real_real") != N_DECOYS:
            raise ValueError(
                f"plan must contain {N_INFORMATIVE} real-vs-synth and {N_DECOYS} real-real pairs"
            )
        used = [i for p in self.pairs for i in (p.left_id, p.right_id)]
        if len(used) != len(set(used)):
            raise ValueError("an image is reused within the plan")
        for p in self.pairs:
            if (p.kind == "real_real") != (p.synth_side == "none"):
                raise ValueError("synth_side must be 'none' exactly for real_real pairs")

    def to_json(self):
        return json.dumps(
            {"seed": self.seed, "pairs": [asdict(p) for p in self.pairs], "images": self.images},
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(
            pairs=[SurveyPair(**p) for p in data["pairs"]],
            images=data["images"],
            seed=data.get("seed"),
        )

    def save(self, path):
        Path(path).write_text(self.to_json(), encoding="utf-8")

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


def build_plan(real_pool, synth_pool, rng, seed=None):
    """Assemble a 45 + 5 survey plan from image pools.

    ``real_pool`` and ``synth_pool`` map source ids to file paths. Image
    ids in the plan are opaque (randomly assigned) so no identifier
    leaks which side is synthetic. Deterministic under the rng.
    """
    n_real_needed = N_INFORMATIVE + 2 * N_DECOYS
    if len(real_pool) < n_real_needed:
        raise ValueError(f"need at least {n_real_needed} real images, got {len(real_pool)}")
    if len(synth_pool) < N_INFORMATIVE:
        raise ValueError(f"need at least {N_INFORMATIVE} synthetic images, got {len(synth_pool)}")

    real_keys = sorted(real_pool)
    synth_keys = sorted(synth_pool)
    real_pick = [real_keys[i] for i in rng.permutation(len(real_keys))[:n_real_needed]]
    synth_pick = [synth_keys[i] for i in rng.permutation(len(synth_keys))[:N_INFORMATIVE]]

    paths = [real_pool[k] for k in real_pick] + [synth_pool[k] for k in synth_pick]
    opaque = [f"img{i:03d}" for i in rng.permutation(len(paths))]
    images = dict(zip(opaque, [str(p) for p in paths]))
    real_ids = opaque[:n_real_needed]
    synth_ids = opaque[n_real_needed:]

    pairs = []
    for i in range(N_INFORMATIVE):
        synth_left = bool(rng.random() < 0.5)
        left, right = (synth_ids[i], real_ids[i]) if synth_left else (real_ids[i], synth_ids[i])
        pairs.append(
            SurveyPair(
                left_id=left,
                right_id=right,
                kind="real_vs_synth",
                synth_side="left" if synth_left else "right",
            )
        )
    for i in range(N_DECOYS):
        a = real_ids[N_INFORMATIVE + 2 * i]
        b = real_ids[N_INFORMATIVE + 2 * i + 1]
        pairs.append(SurveyPair(left_id=a, right_id=b, kind="real_real", synth_side="none"))

    order = rng.permutation(N_PAIRS)  # randomize decoy positions
    return SurveyPlan(pairs=[pairs[i] for i in order], images=images, seed=seed)


@dataclass
class SurveyResponse:
    participant_id: str
    group: str
    pair_index: int
    selection: str
    tag: str
    explanation: str = ""
    timestamp: float = None

    def validate(self, n_pairs=N_PAIRS):
        if not self.participant_id:
            raise ValueError("participant_id is required")
        if self.group not in GROUPS:
            raise ValueError(f"group must be one of {GROUPS}, got {self.group!r}")
        if not 0 <= self.pair_index < n_pairs:
            raise ValueError(f"unknown pair index {self.pair_index}")
        if self.selection not in SIDES:
            raise ValueError(f"selection must be 'left' or 'right', got {self.selection!r}")
        if self.tag not in EXPLANATION_TAGS:
            raise ValueError(f"tag must be one of {EXPLANATION_TAGS}, got {self.tag!r}")
        if self.tag == "other" and not self.explanation.strip():
            raise ValueError("tag 'other' requires explanation text")
        return self


class ResponseStore:
    """Append-only newline-delimited response log.

    Simple, auditable and crash-safe; duplicates are rejected, a
    participant's group is pinned by their first response. Writes are
    serialized with a lock; reads snapshot the in-memory index.
    """

    def __init__(self, path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._responses = {}
        self._groups = {}
        if self.path.exists():
            for line in self.path.read_text(encoding="utf-8").splitlines():
                if line.strip():
                    self._index(SurveyResponse(**json.loads(line)))

    def _index(self, response):
        self._responses[(response.participant_id, response.pair_index)] = response
        self._groups.setdefault(response.participant_id, response.group)

    def record(self, response):
        response.validate()
        with self._lock:
            key = (response.participant_id, response.pair_index)
            if key in self._responses:
                raise DuplicateResponseError(
                    f"{response.participant_id} already answered pair {response.pair_index}"
                )
            pinned = self._groups.get(response.participant_id)
            if pinned is not None and pinned != response.group:
                raise ValueError(
                    f"participant {response.participant_id} is registered as {pinned}"
                )
            if response.timestamp is None:
                response.timestamp = time.time()
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(asdict(response), sort_keys=True) + "\n")
                fh.flush()
            self._index(response)
        return self.progress(response.participant_id)

    def responses(self):
        with self._lock:
            return list(self._responses.values())

    def progress(self, participant_id):
        with self._lock:
            answered = sorted(
                idx for pid, idx in self._responses.keys() if pid == participant_id
            )
        unanswered = [i for i in range(N_PAIRS) if i not in set(answered)]
        return {
            "participant_id": participant_id,
            "answered": answered,
            "next_unanswered": unanswered[0] if unanswered else None,
            "total": N_PAIRS,
            "complete": not unanswered,
        }


@dataclass
class BinomialTest:
    k: int
    n: int
    p_two_sided: float
    p_one_sided_greater: float


def binomial_test(k, n):
    """Exact binomial test against chance (p0 = 0.5).

    Two-sided p-value sums the probabilities of all outcomes no more
    likely than the observed one; the one-sided value is P(X >= k).
    Computed with exact integer tail sums.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    weights = [comb(n, i) for i in range(n + 1)]
    total = 2**n
    observed = weights[k]
    two = sum(w for w in weights if w <= observed) / total
    one = sum(weights[k:]) / total
    return BinomialTest(k=k, n=n, p_two_sided=min(two, 1.0), p_one_sided_greater=one)


@dataclass
class GroupStats:
    n_trials: int
    n_correct: int
    accuracy: float = None
    p_two_sided: float = None
    p_one_sided: float = None


@dataclass
class SurveySummary:
    n_pairs: int
    n_informative: int
    n_participants: int
    overall: GroupStats
    by_group: dict
    non_cardiologists: GroupStats
    decoy_selections: dict
    tag_tallies: dict


def _stats(n_correct, n_trials):
    if n_trials == 0:
        return GroupStats(n_trials=0, n_correct=0)
    test = binomial_test(n_correct, n_trials)
    return GroupStats(
        n_trials=n_trials,
        n_correct=n_correct,
        accuracy=n_correct / n_trials,
        p_two_sided=test.p_two_sided,
        p_one_sided=test.p_one_sided_greater,
    )


def summarize(store, plan):
    """Accuracy, binomial p-values and explanation tallies from raw responses.

    Decoy (real-real) pairs never enter accuracy denominators; their
    selections are tallied separately. Recomputed from the store on
    every call, so the persisted log is the single source of truth.
    """
    responses = store.responses()
    correct = {g: 0 for g in GROUPS}
    trials = {g: 0 for g in GROUPS}
    decoy_selections = {}
    tag_tallies = {"correct": {}, "incorrect": {}, "decoy": {}}

    for resp in responses:
        pair = plan.pairs[resp.pair_index]
        if pair.kind == "real_real":
            slot = decoy_selections.setdefault(resp.pair_index, {"left": 0, "right": 0})
            slot[resp.selection] += 1
            bucket = "decoy"
        else:
            trials[resp.group] += 1
            if resp.selection == pair.synth_side:
                correct[resp.group] += 1
                bucket = "correct"
            else:
                bucket = "incorrect"
        tag_tallies[bucket][resp.tag] = tag_tallies[bucket].get(resp.tag, 0) + 1

    by_group = {g: _stats(correct[g], trials[g]) for g in GROUPS}
    others = [g for g in GROUPS if g != "cardiologist"]
    return SurveySummary(
        n_pairs=N_PAIRS,
        n_informative=N_INFORMATIVE,
        n_participants=len({r.participant_id for r in responses}),
        overall=_stats(sum(correct.values()), sum(trials.values())),
        by_group=by_group,
        non_cardiologists=_stats(
            sum(correct[g] for g in others), sum(trials[g] for g in others)
        ),
        decoy_selections=decoy_selections,
        tag_tallies=tag_tallies,
    )


def summary_to_dict(summary):
    return asdict(summary)
