"""Utility functions for lpvkit."""

from typing import Callable, TypeVar
from functools import wraps

import numpy as np

from .errors import LpvKitError, SimulationError


T = TypeVar('T')


def handle_numerical_errors(context: str) -> Callable:
    """
    Decorator to handle numerical errors gracefully.

    Converts low-level numpy exceptions into lpvkit errors that name the failing operation.
    Errors that already are lpvkit errors pass through unchanged.

    Args:
        context: Name of the operation for error messages

    Returns:
        Decorated function that handles numerical errors
    """
    def decorator(func: Callable[..., T]) -> Callable[..., T]:
        @wraps(func)
        def wrapper(*args, **kwargs) -> T:
            try:
                return func(*args, **kwargs)
            except LpvKitError:
                raise
            except np.linalg.LinAlgError as e:
                raise LpvKitError(f"{context}: linear algebra failure: {e}") from e
            except FloatingPointError as e:
                raise SimulationError(f"{context}: numerical overflow or invalid value ({e})") from e
        return wrapper
    return decorator
