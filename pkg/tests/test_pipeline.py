from __future__ import annotations

import json
import re

import pytest

from conftest import PIPELINE_FIXTURES, UMLS_FIXTURES, CountingUmlsProvider
from umlsqa.dataset import QARecord, load_corpus
from umlsqa.errors import ProviderError, ValidationError
from umlsqa.pipeline import (
    Augmentation,
    GenerationParams,
    GenerationError,
    Providers,
    SystemConfig,
    build_augmented_prompt,
    answer_question,
    load_answer_set,
    run_experiment,
)
from umlsqa.providers import QueueChatProvider, RuleChatProvider
from umlsqa.umls import ConceptRecord, Definition, FixtureUmlsProvider, Relation, UmlsClient

RELATION_LINE = re.compile(r"^- (?P<label>.+?) → (?P<related>.+)$")


def make_concept(n_relations=2, with_definition=True):
    return ConceptRecord(
        cui="C0001403",
        preferred_name="Addison Disease",
        definition=Definition(text="An adrenal disease.", source_vocabulary="MSH")
        if with_definition
        else None,
        relations=tuple(
            Relation(
                label=f"label_{i}",
                related_name=f"Related {i}",
                related_cui=None,
                source_vocabulary="MSH",
            )
            for i in range(n_relations)
        ),
    )


def fixture_providers(extraction=None, generation=None, umls_provider=None):
    return Providers(
        extraction=extraction
        or RuleChatProvider.from_file(PIPELINE_FIXTURES / "extraction_script.json"),
        generation=generation
        or RuleChatProvider.from_file(PIPELINE_FIXTURES / "generation_script.json"),
        umls=UmlsClient(umls_provider or FixtureUmlsProvider(UMLS_FIXTURES)),
    )


class TestPromptBuilding:
    def test_empty_concepts_gives_baseline_without_knowledge_block(self):
        prompt = build_augmented_prompt("Is this serious?", [])
        assert "Medical knowledge:" not in prompt
        assert "Question: Is this serious?" in prompt
        assert prompt.endswith("Answer:")

    def test_definition_and_relation_line_counts(self):
        prompt = build_augmented_prompt("Q?", [make_concept(n_relations=2)])
        lines = prompt.splitlines()
        assert sum(1 for l in lines if l.startswith("Definition (")) == 1
        assert sum(1 for l in lines if RELATION_LINE.match(l)) == 2

    def test_same_inputs_same_bytes(self):
        concepts = [make_concept(3)]
        assert build_augmented_prompt("Q?", concepts) == build_augmented_prompt("Q?", concepts)

    def test_concepts_render_in_extraction_order(self):
        first = make_concept()
        second = ConceptRecord(cui="C0038454", preferred_name="Cerebrovascular accident")
        prompt = build_augmented_prompt("Q?", [first, second])
        assert prompt.index("Addison Disease") < prompt.index("Cerebrovascular accident")

    def test_char_budget_drops_relations_last_first(self):
        concept = make_concept(n_relations=10)
        full = build_augmented_prompt("Q?", [concept])
        trimmed = build_augmented_prompt("Q?", [concept], char_budget=220)
        assert "Definition (MSH)" in trimmed  # definition survives
        kept = [m["related"] for m in map(RELATION_LINE.match, trimmed.splitlines()) if m]
        assert kept == [f"Related {i}" for i in range(len(kept))]  # prefix of original order
        assert len(kept) < 10
        assert len(full) > len(trimmed)

    def test_relation_lines_biject_with_concept_relations(self):
        concepts = [make_concept(4), make_concept(0, with_definition=False)]
        object.__setattr__(concepts[1], "cui", "C0038454")  # second concept distinct
        prompt = build_augmented_prompt("Q?", concepts)
        rendered = [
            (m["label"], m["related"])
            for m in map(RELATION_LINE.match, prompt.splitlines())
            if m
        ]
        declared = [(r.label, r.related_name) for c in concepts for r in c.relations]
        assert rendered == declared


class TestAnswerQuestion:
    def test_baseline_bypasses_umls_and_extraction(self):
        counting = CountingUmlsProvider(FixtureUmlsProvider(UMLS_FIXTURES))
        extraction = QueueChatProvider([])  # would raise if ever called
        generation = QueueChatProvider(["scripted answer"])
        providers = Providers(extraction=extraction, generation=generation,
                              umls=UmlsClient(counting))
        record = QARecord(id="q1", question_text="Is hypertension dangerous?")
        config = SystemConfig(model_id="m", augmentation=Augmentation.NONE)
        answer = answer_question(record, config, providers)
        assert answer.answer_text == "scripted answer"
        assert answer.extracted_terms == [] and answer.concepts == []
        assert "Medical knowledge:" not in answer.final_prompt
        assert counting.total_calls == 0
        assert extraction.calls == 0

    def test_addison_question_links_c0001403(self):
        providers = fixture_providers()
        record = QARecord(id="q01", question_text="What are the symptoms of Addison Disease?")
        config = SystemConfig(model_id="m", augmentation=Augmentation.DIRECT_UMLS)
        answer = answer_question(record, config, providers)
        assert [c.cui for c in answer.concepts] == ["C0001403"]
        assert not answer.degraded
        assert "### Addison Disease (C0001403)" in answer.final_prompt

    def test_two_surfaces_one_concept(self):
        # extraction returns "Addison Disease" and "Addison's disease";
        # both link to C0001403 and the concept renders once
        providers = fixture_providers()
        record = QARecord(id="q01", question_text="What are the symptoms of Addison Disease?")
        config = SystemConfig(model_id="m", augmentation=Augmentation.DIRECT_UMLS)
        answer = answer_question(record, config, providers)
        assert len(answer.extracted_terms) == 2
        assert len(answer.concepts) == 1

    def test_unmappable_terms_degrade_to_baseline(self):
        extraction = QueueChatProvider(['{"medical terminologies": ["frobnication"]}'])
        providers = fixture_providers(extraction=extraction)
        record = QARecord(id="q8", question_text="Is frobnication syndrome a real diagnosis?")
        config = SystemConfig(model_id="m", augmentation=Augmentation.DIRECT_UMLS)
        answer = answer_question(record, config, providers)
        assert answer.degraded
        assert "Medical knowledge:" not in answer.final_prompt
        assert [t.surface for t in answer.extracted_terms] == ["frobnication"]

    def test_generation_failure_carries_partial_provenance(self):
        providers = fixture_providers(generation=QueueChatProvider([]))
        record = QARecord(id="q01", question_text="What are the symptoms of Addison Disease?")
        config = SystemConfig(model_id="m", augmentation=Augmentation.DIRECT_UMLS)
        with pytest.raises(GenerationError) as err:
            answer_question(record, config, providers)
        provenance = err.value.provenance
        assert provenance["concepts"][0]["cui"] == "C0001403"
        assert provenance["final_prompt"]

    def test_augmented_config_without_umls_provider_rejected(self):
        providers = Providers(
            extraction=QueueChatProvider(['{"medical terminologies": ["stroke"]}']),
            generation=QueueChatProvider(["x"]),
            umls=None,
        )
        record = QARecord(id="q", question_text="stroke?")
        config = SystemConfig(model_id="m", augmentation=Augmentation.DIRECT_UMLS)
        with pytest.raises(ValidationError):
            answer_question(record, config, providers)

    def test_relation_cap_honored_in_provenance(self):
        providers = fixture_providers()
        record = QARecord(id="q01", question_text="What are the symptoms of Addison Disease?")
        config = SystemConfig(model_id="m", augmentation=Augmentation.DIRECT_UMLS, relation_cap=5)
        answer = answer_question(record, config, providers)
        assert len(answer.concepts[0].relations) == 5


def three_configs():
    generation = GenerationParams(temperature=0.0, max_output_tokens=512, seed=7)
    return [
        SystemConfig(model_id="chatgpt-3.5", augmentation=Augmentation.NONE, generation=generation),
        SystemConfig(model_id="chatgpt-3.5", augmentation=Augmentation.DIRECT_UMLS, generation=generation),
        SystemConfig(model_id="chatgpt-3.5", augmentation=Augmentation.INDIRECT_UMLS, generation=generation),
    ]


class TestRunExperiment:
    def test_full_grid_produces_records_times_configs(self, tmp_path):
        corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")
        out = tmp_path / "answers.jsonl"
        run_experiment(corpus, three_configs(), fixture_providers(), out)
        answers = load_answer_set(out)
        assert len(answers) == 30
        keys = [(a["question_id"], a["config_id"]) for a in answers]
        assert keys == sorted(keys)
        assert (out.parent / "answers.jsonl.manifest.json").exists()

    def test_rerun_makes_zero_provider_calls(self, tmp_path):
        corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")
        out = tmp_path / "answers.jsonl"
        run_experiment(corpus, three_configs(), fixture_providers(), out)

        extraction = RuleChatProvider.from_file(PIPELINE_FIXTURES / "extraction_script.json")
        generation = RuleChatProvider.from_file(PIPELINE_FIXTURES / "generation_script.json")
        counting = CountingUmlsProvider(FixtureUmlsProvider(UMLS_FIXTURES))
        providers = Providers(extraction=extraction, generation=generation,
                              umls=UmlsClient(counting))
        before = load_answer_set(out)
        run_experiment(corpus, three_configs(), providers, out)
        assert extraction.calls == 0 and generation.calls == 0 and counting.total_calls == 0
        assert load_answer_set(out) == before

    def test_single_record_single_config(self, tmp_path):
        corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")
        sub = type(corpus)(name="one", records=corpus.records[:1])
        out = tmp_path / "one.jsonl"
        run_experiment(sub, three_configs()[:1], fixture_providers(), out)
        assert len(load_answer_set(out)) == 1

    def test_interrupt_then_resume_equals_uninterrupted(self, tmp_path):
        corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")
        clean = tmp_path / "clean.jsonl"
        run_experiment(corpus, three_configs(), fixture_providers(), clean)

        class InterruptingGeneration:
            concurrency_safe = True

            def __init__(self, inner, after):
                self.inner, self.remaining = inner, after

            def describe(self):
                return self.inner.describe()

            def complete(self, messages, **kwargs):
                if self.remaining == 0:
                    raise KeyboardInterrupt
                self.remaining -= 1
                return self.inner.complete(messages, **kwargs)

        resumed = tmp_path / "resumed.jsonl"
        inner = RuleChatProvider.from_file(PIPELINE_FIXTURES / "generation_script.json")
        providers = fixture_providers(generation=InterruptingGeneration(inner, after=7))
        with pytest.raises(KeyboardInterrupt):
            run_experiment(corpus, three_configs(), providers, resumed)
        assert 0 < len(load_answer_set(resumed)) < 30

        run_experiment(corpus, three_configs(), fixture_providers(), resumed)
        assert resumed.read_bytes() == clean.read_bytes()

    def test_partial_failures_recorded_and_completed_on_rerun(self, tmp_path):
        corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")
        clean = tmp_path / "clean.jsonl"
        run_experiment(corpus, three_configs(), fixture_providers(), clean)

        class FlakyGeneration:
            concurrency_safe = True

            def __init__(self, inner):
                self.inner = inner

            def describe(self):
                return self.inner.describe()

            def complete(self, messages, **kwargs):
                if "5 mg Zolmitriptan tablets" in messages[-1]["content"]:
                    raise ProviderError("transient outage")
                return self.inner.complete(messages, **kwargs)

        out = tmp_path / "flaky.jsonl"
        inner = RuleChatProvider.from_file(PIPELINE_FIXTURES / "generation_script.json")
        run_experiment(corpus, three_configs(), fixture_providers(generation=FlakyGeneration(inner)), out)
        manifest = json.loads((tmp_path / "flaky.jsonl.manifest.json").read_text())
        assert len(manifest["failed"]) == 3  # q09 under each config
        assert len(load_answer_set(out)) == 27

        run_experiment(corpus, three_configs(), fixture_providers(), out)
        assert out.read_bytes() == clean.read_bytes()

    def test_all_items_failing_raises_with_manifest(self, tmp_path):
        corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")

        class DownGeneration:
            concurrency_safe = True

            def describe(self):
                return "chat:down"

            def complete(self, messages, **kwargs):
                raise ProviderError("endpoint unreachable")

        out = tmp_path / "down.jsonl"
        with pytest.raises(ProviderError, match="all 30"):
            run_experiment(corpus, three_configs(), fixture_providers(generation=DownGeneration()), out)
        manifest = json.loads((tmp_path / "down.jsonl.manifest.json").read_text())
        assert len(manifest["failed"]) == 30

    def test_parallel_run_matches_serial_bytes(self, tmp_path):
        corpus = load_corpus(PIPELINE_FIXTURES / "corpus10.jsonl")
        serial = tmp_path / "serial.jsonl"
        parallel = tmp_path / "parallel.jsonl"
        run_experiment(corpus, three_configs(), fixture_providers(), serial, max_workers=1)
        run_experiment(corpus, three_configs(), fixture_providers(), parallel, max_workers=4)
        assert serial.read_bytes() == parallel.read_bytes()

    def test_empty_corpus_rejected(self, tmp_path):
        from umlsqa.dataset import Corpus

        with pytest.raises(ValidationError):
            run_experiment(Corpus(name="empty"), three_configs(), fixture_providers(),
                           tmp_path / "x.jsonl")


def test_config_invariants():
    with pytest.raises(ValidationError):
        SystemConfig(model_id="m", augmentation=Augmentation.NONE, relation_cap=0)
    assert SystemConfig(model_id="m", augmentation=Augmentation.NONE).config_id == "m"
    assert (
        SystemConfig(model_id="m", augmentation=Augmentation.DIRECT_UMLS).config_id
        == "m+direct-umls"
    )
