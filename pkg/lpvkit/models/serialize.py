"""Model files: JSON text with a representation-kind header."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Union

from ..errors import LpvKitError, SerializationError
from .io import LpvIoModel
from .lfr import LpvLfrModel
from .ss import LpvSsModel

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

# lpvkit.ident registers the identification template kind.
_KINDS: dict[str, type] = {
    "lpvio": LpvIoModel,
    "lpvss": LpvSsModel,
    "lpvlfr": LpvLfrModel,
}


def register_kind(kind: str, cls: type) -> None:
    """Make another serializable class loadable through :func:`load_model`."""
    _KINDS[kind] = cls


def kind_of(model: Any) -> str:
    for kind, cls in _KINDS.items():
        if type(model) is cls:
            return kind
    raise SerializationError(f"{type(model).__name__} cannot be saved as a model file")


def model_to_text(model: Any) -> str:
    document = {"kind": kind_of(model), "version": FORMAT_VERSION, "model": model.to_dict()}
    return json.dumps(document, indent=2)


def model_from_text(text: str) -> Any:
    try:
        document = json.loads(text)
        cls = _KINDS[document["kind"]]
        return cls.from_dict(document["model"])
    except LpvKitError:
        raise
    except (ValueError, KeyError, TypeError) as e:
        raise SerializationError(f"Malformed model file: {e}") from e


def save_model(model: Any, path: Union[str, Path]) -> None:
    """
    Write a model to a JSON file.

    Raises:
        SerializationError: If the model uses custom basis functions or is of an unknown kind
    """
    Path(path).write_text(model_to_text(model), encoding="utf-8")
    logger.info(f"Saved {kind_of(model)} model to {path}")


def load_model(path: Union[str, Path]) -> Any:
    """
    Read a model written by :func:`save_model`.

    Raises:
        SerializationError: If the file is malformed
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SerializationError(f"Cannot read model file {path}: {e}") from e
    return model_from_text(text)
