"""
Distance Model Factory.

This module implements the Factory pattern to decouple distance model
creation from the accessibility engine; `distance_mode` in the run
configuration is just a key in this registry.
"""

from typing import Dict, Type

from core.base import BaseDistanceModel
from core.errors import DistanceModelError


class DistanceModelFactory:
    """
    Factory class for creating distance model instances.

    Attributes:
        _models: Registry mapping mode identifiers to their classes

    Example:
        >>> model = DistanceModelFactory.create_model("euclidean")
        >>> pairs = model.catchment_pairs(demand_xy, supply_xy, cutoff=1609.0)
    """

    _models: Dict[str, Type[BaseDistanceModel]] = {}

    @classmethod
    def _ensure_default_models(cls) -> None:
        """
        Ensure default models are registered.

        Called lazily to avoid circular imports.
        """
        if "euclidean" not in cls._models or "network" not in cls._models:
            from accessibility.distances import EuclideanDistanceModel, NetworkDistanceModel

            cls._models.setdefault("euclidean", EuclideanDistanceModel)
            cls._models.setdefault("network", NetworkDistanceModel)

    @classmethod
    def register_model(cls, mode: str, model_class: Type[BaseDistanceModel]) -> None:
        """
        Register a new distance model.

        Raises:
            TypeError: If model_class does not inherit from BaseDistanceModel
            ValueError: If mode is already registered
        """
        if not issubclass(model_class, BaseDistanceModel):
            raise TypeError(
                f"Distance model must inherit from BaseDistanceModel, "
                f"got {type(model_class).__name__}"
            )

        if mode in cls._models:
            raise ValueError(
                f"Distance mode '{mode}' is already registered. "
                f"Use a different name or unregister it first."
            )

        cls._models[mode] = model_class

    @classmethod
    def unregister_model(cls, mode: str) -> None:
        """
        Raises:
            KeyError: If mode is not registered
        """
        if mode not in cls._models:
            raise KeyError(f"Distance mode '{mode}' is not registered")

        del cls._models[mode]

    @classmethod
    def create_model(cls, mode: str, **kwargs) -> BaseDistanceModel:
        """
        Create a distance model instance.

        Args:
            mode: Registered identifier ("network" or "euclidean" by default)
            **kwargs: Passed to the model's __init__

        Raises:
            ValueError: If mode is not registered
            DistanceModelError: If the model constructor fails (a RuntimeError)
        """
        cls._ensure_default_models()

        model_class = cls._models.get(mode)

        if not model_class:
            available = ", ".join(sorted(cls._models))
            raise ValueError(f"Unknown distance mode: '{mode}'. Available modes: {available}")

        try:
            return model_class(**kwargs)
        except (TypeError, ValueError) as e:
            raise DistanceModelError(f"Failed to create distance model '{mode}': {e}") from e

    @classmethod
    def list_modes(cls) -> list[str]:
        cls._ensure_default_models()
        return sorted(cls._models)

    @classmethod
    def is_registered(cls, mode: str) -> bool:
        cls._ensure_default_models()
        return mode in cls._models
