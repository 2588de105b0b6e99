from .types import (
    AgentRole,
    BackendKind,
    ImageLayout,
    ImageRequest,
    ImageResult,
    ProviderConfig,
    RemoteEndpoints,
    TextRequest,
    TextResult,
)
from .gateway import ProviderGateway
from .cassette import Cassette
from .config import load_provider_config

__all__ = [
    "AgentRole",
    "BackendKind",
    "Cassette",
    "ImageLayout",
    "ImageRequest",
    "ImageResult",
    "ProviderConfig",
    "ProviderGateway",
    "RemoteEndpoints",
    "TextRequest",
    "TextResult",
    "load_provider_config",
]
