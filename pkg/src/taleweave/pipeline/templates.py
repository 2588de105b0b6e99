"""Prompt templates: versioned locale files with declared slots.

Templates are data, not code — one document per agent per locale under
``pipeline/locales/``. Rendering fails loudly when a required slot is
unbound, and a template may not reference slots it does not declare.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..docio import decode_document
from ..errors import ValidationFailure
from ..providers.types import AgentRole


@dataclass(frozen=True)
class PromptTemplate:
    agent: AgentRole
    template_text: str
    required_slots: tuple[str, ...]
    locale: str = "en"

    def placeholders(self) -> set[str]:
        names = set()
        for _, field_name, _, _ in string.Formatter().parse(self.template_text):
            if field_name:
                names.add(field_name)
        return names

    def __post_init__(self):
        undeclared = self.placeholders() - set(self.required_slots)
        if undeclared:
            raise ValidationFailure(
                f"{self.agent.value} template references undeclared slots: {sorted(undeclared)}"
            )

    def render(self, **slots: str) -> str:
        missing = [name for name in self.required_slots if name not in slots]
        if missing:
            raise ValidationFailure(
                f"{self.agent.value} template is missing required slots: {missing}"
            )
        return self.template_text.format(**slots)


TEMPLATE_AGENTS = (
    AgentRole.OUTLINE,
    AgentRole.CHARACTER,
    AgentRole.QUESTION,
    AgentRole.WRITING,
    AgentRole.DRAWING,
    AgentRole.REFLECTION,
    AgentRole.ANALYSIS,
)


def _locale_dir(locale: str):
    return resources.files("taleweave.pipeline").joinpath("locales", locale)


def load_template(agent: AgentRole, locale: str = "en") -> PromptTemplate:
    path = _locale_dir(locale).joinpath(f"{agent.value}.json")
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ValidationFailure(f"no {locale} template for agent {agent.value}") from None
    doc = decode_document(text, expected_kind="prompt_template")
    return PromptTemplate(
        agent=AgentRole(doc["agent"]),
        template_text=doc["template_text"],
        required_slots=tuple(doc["required_slots"]),
        locale=doc.get("locale", locale),
    )


def load_templates(locale: str = "en") -> dict[AgentRole, PromptTemplate]:
    return {agent: load_template(agent, locale) for agent in TEMPLATE_AGENTS}


def load_templates_from_dir(directory: Path | str) -> dict[AgentRole, PromptTemplate]:
    """Load overrides from a plain directory (same file naming as locales/)."""
    directory = Path(directory)
    templates = {}
    for agent in TEMPLATE_AGENTS:
        path = directory / f"{agent.value}.json"
        if not path.is_file():
            raise ValidationFailure(f"template directory is missing {path.name}")
        doc = decode_document(path.read_text(encoding="utf-8"), expected_kind="prompt_template")
        templates[agent] = PromptTemplate(
            agent=AgentRole(doc["agent"]),
            template_text=doc["template_text"],
            required_slots=tuple(doc["required_slots"]),
            locale=doc.get("locale", "custom"),
        )
    return templates
