from .base import DistanceBackend
from .graph_backend import GraphBackend
from .fast_march import FastMarchBackend, triangle_update

from src.errors import BackendError

BACKENDS = {
    "graph": GraphBackend,
    "fast_march": FastMarchBackend,
}


def get_backend(name: str) -> DistanceBackend:
    """Instantiate a distance backend by name."""
    if name not in BACKENDS:
        raise BackendError(f"Unknown backend: {name} (choose from {sorted(BACKENDS)})")
    return BACKENDS[name]()


__all__ = ["DistanceBackend", "GraphBackend", "FastMarchBackend", "triangle_update", "get_backend"]
