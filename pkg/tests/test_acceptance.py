"""Acceptance gate: one test per criterion, at the stated tolerance.

Each test prints a single pass line so the suite doubles as a checklist:

    pytest tests/test_acceptance.py -v -s
"""

from __future__ import annotations

import hashlib
import itertools
import json
import random
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import PIPELINE_FIXTURES, UMLS_FIXTURES, CountingUmlsProvider
from umlsqa.cli import EXIT_OK, main
from umlsqa.dataset import QARecord, load_corpus
from umlsqa.extraction import (
    ExtractionMode,
    build_extraction_prompt,
    extract_terms,
    parse_extraction_output,
)
from umlsqa.metrics import greedy_match_scores, lcs_length, rouge_l, rouge_n, tokenize
from umlsqa.metrics.bertscore import bertscore
from umlsqa.pipeline import Augmentation, Providers, SystemConfig, run_experiment
from umlsqa.providers import OrthogonalStubEmbedder, QueueChatProvider, RuleChatProvider
from umlsqa.review import (
    AUGMENTED,
    BASELINE,
    Dimension,
    Judgment,
    ReviewStore,
    assign_blinding,
    create_app,
    slot_a_role,
)
from umlsqa.umls import FileCache, FixtureUmlsProvider, UmlsClient

FIXED_QUESTION = "I have PAD. Do I need to worry about my risk of stroke?"

# Golden digests of the two frozen extraction prompt templates rendered
# with FIXED_QUESTION. Any template drift fails here first.
GOLDEN_DIGESTS = {
    ExtractionMode.DIRECT: "e6226af582bcefecef2355a36660c6e66b6c164d41b7298c8a466aaaa6e09128",
    ExtractionMode.INDIRECT: "7edd7da1cf80dcbfb9a638f1f2043cf66efdaa571a077ce9e7660e44875e21ea",
}


def done(name: str):
    print(f"[acceptance] {name}: PASS")


# -- criterion 1: ROUGE oracle suite -------------------------------------------


def brute_force_lcs(a, b):
    short, long_ = (a, b) if len(a) <= len(b) else (b, a)
    for size in range(len(short), 0, -1):
        for combo in itertools.combinations(short, size):
            it = iter(long_)
            if all(tok in it for tok in combo):
                return size
    return 0


def test_rouge_oracle_suite():
    seq = tokenize("managing blood pressure lowers stroke risk")
    assert rouge_n(seq, seq, 1).f1 == 1.0
    assert rouge_n(seq, seq, 2).f1 == 1.0
    assert rouge_l(seq, seq).f1 == 1.0

    disjoint = (tokenize("alpha beta gamma"), tokenize("delta epsilon zeta"))
    assert rouge_n(*disjoint, 1).f1 == 0.0
    assert rouge_n(*disjoint, 2).f1 == 0.0
    assert rouge_l(*disjoint).f1 == 0.0

    score = rouge_n(tokenize("the cat sat"), tokenize("the cat"), 1)
    assert score.f1 == pytest.approx(0.8, abs=1e-9)

    rng = random.Random(20170104)
    started = time.perf_counter()
    for _ in range(500):
        a = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
        b = [rng.choice("abcd") for _ in range(rng.randint(0, 8))]
        assert lcs_length(a, b) == brute_force_lcs(a, b)
    elapsed = time.perf_counter() - started
    assert elapsed < 10.0, f"LCS oracle comparison took {elapsed:.1f}s"
    done("ROUGE oracle suite")


# -- criterion 2: BERTScore greedy matching -------------------------------------


def test_bertscore_greedy_oracles():
    rng = np.random.default_rng(20170104)
    for _ in range(500):
        sim = rng.uniform(-1.0, 1.0, size=(rng.integers(1, 21), rng.integers(1, 21)))
        fast_p, fast_r = greedy_match_scores(sim)
        rows, cols = sim.shape
        direct_p = sum(max(sim[i, j] for j in range(cols)) for i in range(rows)) / rows
        direct_r = sum(max(sim[i, j] for i in range(rows)) for j in range(cols)) / cols
        assert abs(fast_p - direct_p) <= 1e-12
        assert abs(fast_r - direct_r) <= 1e-12

    vocab = ["pain", "fever", "dose", "rash", "chronic", "acute", "mild", "severe"]
    word_rng = random.Random(42)
    embedder = OrthogonalStubEmbedder()
    for _ in range(100):
        cand = [word_rng.choice(vocab) for _ in range(word_rng.randint(1, 12))]
        ref = [word_rng.choice(vocab) for _ in range(word_rng.randint(1, 12))]
        score = bertscore(cand, ref, embedder)
        ref_set, cand_set = set(ref), set(cand)
        p = sum(1.0 for t in cand if t in ref_set) / len(cand)
        r = sum(1.0 for t in ref if t in cand_set) / len(ref)
        f1 = 2 * p * r / (p + r) if p + r else 0.0
        assert (score.precision, score.recall, score.f1) == (p, r, f1)
    done("BERTScore greedy matching oracles")


# -- criterion 3: win-rate reproduction ------------------------------------------

# per-dimension (augmented, tie, baseline) outcome counts over the
# 20-question physician-review set, and the percentages they must
# de-blind to
TARGET_OUTCOME_COUNTS = {
    Dimension.FACTUALITY: (8, 6, 6),   # 40 / 30 / 30
    Dimension.RELEVANCE: (5, 12, 3),   # 25 / 60 / 15
    Dimension.READABILITY: (8, 3, 9),  # 40 / 15 / 45
    Dimension.COMPLETENESS: (11, 5, 4),  # 55 / 25 / 20
}
TARGET_PERCENTAGES = {
    "Factuality": [40, 30, 30],
    "Relevance": [25, 60, 15],
    "Readability": [40, 15, 45],
    "Completeness": [55, 25, 20],
}


def test_win_rate_reproduction(tmp_path, capsys):
    seed = 42
    questions = [QARecord(id=f"q{i:02d}", question_text=f"Physician question {i}?")
                 for i in range(1, 21)]
    pairs = assign_blinding([(q, f"augmented reply {q.id}", f"plain reply {q.id}")
                             for q in questions], seed=seed)
    store_dir = tmp_path / "store"
    store = ReviewStore.create(store_dir, pairs, {AUGMENTED: "sysA", BASELINE: "sysB"}, seed=seed)

    outcomes = {
        dim: [AUGMENTED] * a + ["tie"] * t + [BASELINE] * b
        for dim, (a, t, b) in TARGET_OUTCOME_COUNTS.items()
    }
    for i, q in enumerate(questions):
        role = slot_a_role(seed, q.id)
        verdicts = {}
        for dim in Dimension:
            wanted = outcomes[dim][i]
            if wanted == "tie":
                verdicts[dim.value] = "tie"
            else:
                verdicts[dim.value] = "slot_a" if wanted == role else "slot_b"
        store.record_judgment(Judgment.from_wire("physician-1", q.id, verdicts))

    out_path = tmp_path / "summary.json"
    code = main(["review", "report", "--store", str(store_dir), "--out", str(out_path)])
    captured = capsys.readouterr()
    assert code == EXIT_OK
    summary = json.loads(out_path.read_text())
    assert summary["question_count"] == 20
    for name, expected in TARGET_PERCENTAGES.items():
        assert summary["dimensions"][name]["rounded"] == expected, name
    assert "Completeness" in captured.out and "55" in captured.out
    done("win-rate reproduction (physician-evaluation percentages)")


# -- criterion 4: blinding safety --------------------------------------------------


def test_blinding_safety_property(tmp_path):
    rng = random.Random(1717)
    vocab = ["relief", "symptom", "clinic", "advice", "tablet", "checkup", "rest"]
    forbidden_global = ["hidden_assignment", "slot_a_role", "augmented", "baseline", "system"]

    sessions = 0
    for store_idx in range(20):
        labels = [f"model-{rng.getrandbits(32):08x}", f"model-{rng.getrandbits(32):08x}"]
        n_questions = rng.randint(3, 6)
        questions = [
            QARecord(
                id=f"s{store_idx}-q{i}",
                question_text=" ".join(rng.choices(vocab, k=6)) + "?",
            )
            for i in range(n_questions)
        ]
        pairs = assign_blinding(
            [(q, " ".join(rng.choices(vocab, k=10)), " ".join(rng.choices(vocab, k=10)))
             for q in questions],
            seed=rng.randint(0, 10**6),
        )
        store = ReviewStore.create(
            tmp_path / f"store-{store_idx}", pairs,
            systems={AUGMENTED: labels[0], BASELINE: labels[1]},
            seed=store_idx,
        )
        client = TestClient(create_app(store, admin_token="adm"))
        forbidden = forbidden_global + labels

        for session_idx in range(50):
            token = f"rev-{store_idx}-{session_idx}"
            headers = {"X-Review-Token": token}
            bodies = []

            resp = client.get("/api/session", headers=headers)
            assert resp.status_code == 200
            bodies.append(resp.text)
            qid = rng.choice(resp.json()["pending"])

            resp = client.get(f"/api/pairs/{qid}", headers=headers)
            assert resp.status_code == 200
            bodies.append(resp.text)

            verdicts = {dim.value: rng.choice(["slot_a", "tie", "slot_b"]) for dim in Dimension}
            resp = client.post(
                "/api/judgments", headers=headers,
                json={"question_id": qid, "verdicts": verdicts},
            )
            assert resp.status_code == 200
            bodies.append(resp.text)

            resp = client.get("/api/progress", headers=headers)
            bodies.append(resp.text)

            blob = "\n".join(bodies)
            for needle in forbidden:
                assert needle not in blob, f"blinding leak: {needle!r}"
            sessions += 1

    assert sessions == 1000
    done("blinding safety over 1,000 randomized sessions")


# -- criterion 5: pipeline determinism ----------------------------------------------


def test_pipeline_determinism(tmp_path):
    digests = set()
    for run_idx in range(3):
        out = tmp_path / f"run-{run_idx}" / "answers.jsonl"
        code = main([
            "pipeline", "run",
            "--config", str(PIPELINE_FIXTURES / "experiment.yaml"),
            "--corpus", str(PIPELINE_FIXTURES / "corpus10.jsonl"),
            "--out", str(out),
        ])
        assert code == EXIT_OK
        digests.add(hashlib.sha256(out.read_bytes()).hexdigest())
    assert len(digests) == 1, "answer-set files differ across identical runs"

    counting = CountingUmlsProvider(FixtureUmlsProvider(UMLS_FIXTURES))
    providers = Providers(
        extraction=RuleChatProvider.from_file(PIPELINE_FIXTURES / "extraction_script.json"),
        generation=RuleChatProvider.from_file(PIPELINE_FIXTURES / "generation_script.json"),
        umls=UmlsClient(counting),
    )
    baseline_only = [SystemConfig(model_id="chatgpt-3.5", augmentation=Augmentation.NONE)]
    corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")
    run_experiment(corpus, baseline_only, providers, tmp_path / "baseline.jsonl")
    assert counting.total_calls == 0, "baseline config touched the UMLS provider"
    done("pipeline determinism + baseline UMLS bypass")


# -- criterion 6: UMLS contracts on recorded fixtures ---------------------------------


def test_umls_contracts_on_fixtures(tmp_path):
    client = UmlsClient(FixtureUmlsProvider(UMLS_FIXTURES))

    assert client.link_concept("Addison Disease") == ("C0001403", "Addison Disease")

    raw = json.loads(
        next(UMLS_FIXTURES.glob("relations__c0001403__*.json")).read_text()
    )["response"]
    assert len(raw) > 100
    assert len(client.fetch_relations("C0001403", cap=25)) == 25

    # hand-applied priority oracle over the recorded definition fixture:
    # English candidates in response order are NCI then MSH; the default
    # priority list [MSH, NCI, ICF] therefore selects the MSH entry.
    raw_defs = json.loads(
        next(UMLS_FIXTURES.glob("definitions__c0001403__*.json")).read_text()
    )["response"]
    by_source = {d["rootSource"]: d["value"] for d in raw_defs}
    definition = client.fetch_definition("C0001403")
    assert definition.source_vocabulary == "MSH"
    assert definition.text == by_source["MSH"]

    counting = CountingUmlsProvider(FixtureUmlsProvider(UMLS_FIXTURES))
    cached = UmlsClient(counting, cache=FileCache(tmp_path / "cache"))
    for _ in range(4):
        cached.link_concept("stroke")
        cached.fetch_definition("C0038454")
        cached.fetch_relations("C0038454")
    assert counting.calls[("search", "stroke")] == 1
    assert counting.calls[("definitions", "C0038454")] == 1
    assert counting.calls[("relations", "C0038454")] == 1
    done("UMLS contracts on recorded fixtures")


# -- criterion 7: prompt fidelity -------------------------------------------------------

WRAPPED_TERMS = ["Atrial Fibrillation", "Heart Failure"]
_OBJ = json.dumps({"medical terminologies": WRAPPED_TERMS})
ADVERSARIAL_WRAPPINGS = [
    _OBJ,
    f"```\n{_OBJ}\n```",
    f"```json\n{_OBJ}\n```",
    f"Sure, here are the terminologies:\n{_OBJ}",
    f"{_OBJ}\nLet me know if you need anything else!",
    f"Here you go: {_OBJ} -- hope that helps.",
    f"Note {{this is prose}} and then {_OBJ}",
    f"   \n\n  {_OBJ}  \n\n",
    f"﻿{_OBJ}",
    f"```JSON\r\n{_OBJ}\r\n```",
    f"The answer, in JSON format, is as follows:\n\n```json\n{_OBJ}\n```\n\nAnything else?",
    json.dumps({"medical terminologies": WRAPPED_TERMS, "note": "extra key ignored"}),
    json.dumps({"medical terminologies": WRAPPED_TERMS}, indent=4),
    f"As requested:\n\n{json.dumps({'medical terminologies': WRAPPED_TERMS}, indent=2)}\n\nDone.",
    f"I found 2 terminologies. {_OBJ} They appear verbatim in the question.",
    f"question was about hearts => {_OBJ}",
    f"*** OUTPUT ***\n{_OBJ}\n*** END ***",
    f"{{\n  \"medical terminologies\": [\"Atrial Fibrillation\",\n      \"Heart Failure\"]\n}}",
    f"Output: {_OBJ}",
    f"<answer>{_OBJ}</answer>",
]


def test_prompt_fidelity():
    for mode, expected in GOLDEN_DIGESTS.items():
        prompt = build_extraction_prompt(FIXED_QUESTION, mode)
        assert hashlib.sha256(prompt.encode("utf-8")).hexdigest() == expected, mode

    assert len(ADVERSARIAL_WRAPPINGS) == 20
    for raw in ADVERSARIAL_WRAPPINGS:
        assert parse_extraction_output(raw) == WRAPPED_TERMS, raw

    llm = QueueChatProvider(['{"medical terminologies": ["x", "X", "x ", " X  "]}'])
    terms = extract_terms("anything?", ExtractionMode.DIRECT, llm)
    assert [t.surface for t in terms] == ["x"]
    done("prompt fidelity (golden digests, 20 adversarial wrappings, dedup)")


# -- criterion 8: Table-3-shaped report ---------------------------------------------------


def test_table3_shaped_report(tmp_path, capsys):
    corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")
    answers_path = tmp_path / "identity.jsonl"
    with open(answers_path, "w", encoding="utf-8") as fp:
        for config_id in ("chatgpt-3.5", "chatgpt-3.5+direct-umls"):
            for rec in corpus.records:
                fp.write(json.dumps({
                    "question_id": rec.id,
                    "config_id": config_id,
                    "answer_text": rec.reference_answers[0],
                }) + "\n")

    code = main([
        "metrics", "score",
        "--answers", str(answers_path),
        "--corpus", str(PIPELINE_FIXTURES / "corpus10.jsonl"),
        "--out", str(tmp_path / "report"),
    ])
    captured = capsys.readouterr()
    assert code == EXIT_OK
    lines = captured.out.splitlines()
    assert lines[0].split() == ["Config", "R-1", "R-2", "R-L", "P", "R", "F1"]
    config_rows = [l for l in lines if l.startswith("chatgpt-3.5")]
    assert len(config_rows) == 2
    for row in config_rows:
        assert row.split()[1:4] == ["100.00", "100.00", "100.00"]
    done("Table-3-shaped report with identity scores")
