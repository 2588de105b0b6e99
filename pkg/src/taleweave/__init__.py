"""TaleWeave: a deterministic engine for expert-authored, child-co-created stories."""

__version__ = "0.1.0"
