from .agents import AgentPipeline, AgentTrace, repair_paragraphs
from .templates import PromptTemplate, load_template, load_templates

__all__ = [
    "AgentPipeline",
    "AgentTrace",
    "PromptTemplate",
    "load_template",
    "load_templates",
    "repair_paragraphs",
]
