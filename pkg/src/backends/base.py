"""
Abstract base class for distance backends in horolab.

A backend turns a manifold and a source node set into per-node distances and
certifies where the truncated computation equals the value on the untruncated
surface.
"""

import time
from abc import ABC, abstractmethod
from typing import Any, Dict, Sequence

import numpy as np


class DistanceBackend(ABC):
    """Abstract base class for distance solvers."""

    name: str = "base"

    def __init__(self, **kwargs):
        """
        Initialize the backend.

        Args:
            **kwargs: Backend-specific configuration
        """
        self.config = kwargs

    @abstractmethod
    def solve(self, manifold, sources: Sequence[int]) -> np.ndarray:
        """
        Distance from every node to the source set.

        Args:
            manifold: DiscreteManifold
            sources: Nonempty array of node ids

        Returns:
            Array of length N, exactly 0 on the sources

        Raises:
            BackendError: If the backend cannot run on this manifold
        """
        pass

    def error_factor(self, manifold) -> float:
        """Factor by which the backend may underestimate a path length."""
        return 1.0

    def reliable(self, manifold, values: np.ndarray, sources: Sequence[int]) -> np.ndarray:
        """
        Nodes whose value cannot be shortened by leaving the window.

        A path from p to the sources that touches the truncation boundary is
        at least margin(p) + min over sources of margin(k) long.

        Args:
            manifold: DiscreteManifold
            values: Output of solve()
            sources: Source node ids

        Returns:
            Boolean mask of length N
        """
        margin = manifold.margin
        source_margin = float(np.min(margin[np.asarray(sources)]))
        if not np.isfinite(source_margin):
            return np.ones(values.shape, dtype=bool)
        return values < (margin + source_margin) / self.error_factor(manifold)

    def solve_with_metadata(self, manifold, sources: Sequence[int]) -> Dict[str, Any]:
        """
        Solve and return values with reliability and timing.

        Returns:
            Dictionary containing:
                - values: distances
                - reliable: reliability mask
                - metadata: backend name, source count, solve time
        """
        start_time = time.time()
        values = self.solve(manifold, sources)
        end_time = time.time()
        return {
            "values": values,
            "reliable": self.reliable(manifold, values, sources),
            "metadata": {
                "backend": self.name,
                "sources": len(sources),
                "solve_time": end_time - start_time,
            },
        }

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name='{self.name}')"
