"""Experiment configuration: YAML file -> configs and providers.

Precedence is flags > environment > config file, applied centrally here
(CLI flags arrive as ``overrides``). Credentials never live in the
config file; it names the environment variable to read instead.

Example::

    experiment:
      relation_cap: 25
      workers: 1
      generation: {temperature: 0.0, max_output_tokens: 512, seed: 7}
      configs:
        - {model_id: chatgpt-3.5, augmentation: none}
        - {model_id: chatgpt-3.5, augmentation: direct-umls}
        - {model_id: chatgpt-3.5, augmentation: indirect-umls}
    providers:
      extraction_chat: {kind: scripted, script: extraction_script.json}
      generation_chat: {kind: http, base_url: "https://...", model: gpt-x,
                        api_key_env: CHAT_API_KEY}
      umls: {kind: fixtures, fixture_dir: fixtures/umls, cache_dir: .umls-cache}

Chat provider kinds: ``http`` and ``scripted`` (substring-rule script
file, deterministic). UMLS kinds: ``http`` and ``fixtures``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ValidationError
from .pipeline import Augmentation, GenerationParams, Providers, SystemConfig
from .providers import ChatProvider, HttpChatProvider, RuleChatProvider
from .umls import FileCache, FixtureUmlsProvider, HttpUmlsProvider, UmlsClient


@dataclass
class ExperimentSpec:
    configs: list[SystemConfig]
    providers: Providers
    workers: int = 1


def load_experiment(path: str | Path, overrides: dict | None = None) -> ExperimentSpec:
    """Parse a YAML experiment config into configs + constructed providers."""
    path = Path(path)
    if not path.exists():
        raise ValidationError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fp:
            raw = yaml.safe_load(fp) or {}
    except yaml.YAMLError as exc:
        raise ValidationError(f"{path}: malformed YAML: {exc}") from exc
    overrides = overrides or {}

    experiment = raw.get("experiment", {})
    provider_spec = raw.get("providers", {})
    base_dir = path.parent

    generation = GenerationParams(
        temperature=float(experiment.get("generation", {}).get("temperature", 0.0)),
        max_output_tokens=experiment.get("generation", {}).get("max_output_tokens"),
        seed=experiment.get("generation", {}).get("seed"),
    )
    relation_cap = int(experiment.get("relation_cap", 25))
    char_budget = int(experiment.get("concept_char_budget", 4000))

    configs = []
    for entry in experiment.get("configs", []):
        try:
            augmentation = Augmentation(entry.get("augmentation", "none"))
        except ValueError:
            raise ValidationError(
                f"unknown augmentation {entry.get('augmentation')!r}; expected one of "
                f"{[a.value for a in Augmentation]}"
            ) from None
        configs.append(
            SystemConfig(
                model_id=entry["model_id"],
                augmentation=augmentation,
                relation_cap=int(entry.get("relation_cap", relation_cap)),
                generation=generation,
                concept_char_budget=int(entry.get("concept_char_budget", char_budget)),
            )
        )
    if not configs:
        raise ValidationError(f"{path}: experiment.configs must declare at least one config")

    needs_umls = any(c.augmentation is not Augmentation.NONE for c in configs)
    umls_client = _build_umls(provider_spec.get("umls", {}), base_dir, overrides, relation_cap) if (
        needs_umls or provider_spec.get("umls")
    ) else None

    providers = Providers(
        extraction=_build_chat(provider_spec.get("extraction_chat", {}), base_dir, "extraction_chat"),
        generation=_build_chat(provider_spec.get("generation_chat", {}), base_dir, "generation_chat"),
        umls=umls_client,
    )

    workers = int(overrides.get("workers") or os.environ.get("UMLSQA_WORKERS") or experiment.get("workers", 1))
    return ExperimentSpec(configs=configs, providers=providers, workers=workers)


def _build_chat(spec: dict, base_dir: Path, name: str) -> ChatProvider:
    kind = spec.get("kind")
    if kind == "scripted":
        script = spec.get("script")
        if not script:
            raise ValidationError(f"{name}: scripted chat provider requires a script file")
        return RuleChatProvider.from_file(_resolve(base_dir, script))
    if kind == "http":
        if not spec.get("base_url") or not spec.get("model"):
            raise ValidationError(f"{name}: http chat provider requires base_url and model")
        return HttpChatProvider(
            base_url=spec["base_url"],
            model=spec["model"],
            api_key_env=spec.get("api_key_env", "CHAT_API_KEY"),
        )
    raise ValidationError(f"{name}: unknown or missing chat provider kind {kind!r}")


def _build_umls(spec: dict, base_dir: Path, overrides: dict, relation_cap: int) -> UmlsClient:
    cache_dir = overrides.get("umls_cache_dir") or spec.get("cache_dir")
    cache = FileCache(_resolve(base_dir, cache_dir)) if cache_dir else None
    priority = tuple(spec.get("definition_priority", ("MSH", "NCI", "ICF")))
    kind = spec.get("kind")
    if kind == "fixtures":
        fixture_dir = overrides.get("umls_fixture_dir") or spec.get("fixture_dir")
        if not fixture_dir:
            raise ValidationError("umls: fixtures provider requires fixture_dir")
        provider = FixtureUmlsProvider(_resolve(base_dir, fixture_dir))
    elif kind == "http":
        base_url = (
            overrides.get("umls_base_url")
            or os.environ.get("UMLS_BASE_URL")
            or spec.get("base_url", "https://uts-ws.nlm.nih.gov/rest")
        )
        provider = HttpUmlsProvider(base_url=base_url)
    else:
        raise ValidationError(f"umls: unknown or missing provider kind {kind!r}")
    return UmlsClient(
        provider, cache=cache, definition_priority=priority, relation_cap=relation_cap
    )


def _resolve(base_dir: Path, value: str | Path) -> Path:
    p = Path(value)
    return p if p.is_absolute() else base_dir / p
