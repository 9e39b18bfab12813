"""
Versioned, checksummed model container.

A model file is a single UTF-8 JSON object::

    {"checksum": "sha256:<hex>", "format": "contact-complexity-model",
     "payload": {...}, "version": 1}

The checksum covers the canonical encoding of ``payload`` (sorted keys,
compact separators). Floats are written in their shortest round-trip form,
so save -> load -> save reproduces the file byte for byte.
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from .errors import ChecksumError, ModelFileError, ModelVersionError
from .gbdt import Ensemble
from .quantiles import QuantileMap
from .scoring import ComplexityModel
from .textfeat import Vocabulary
from .utils.config import ComplexityConfig

logger = logging.getLogger(__name__)

FORMAT_NAME = "contact-complexity-model"
FORMAT_VERSION = 1

PathLike = Union[str, Path]


def _canonical(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def payload_checksum(payload: Dict[str, Any]) -> str:
    return "sha256:" + hashlib.sha256(_canonical(payload).encode("utf-8")).hexdigest()


def model_to_payload(model: ComplexityModel) -> Dict[str, Any]:
    return {
        "classes": list(model.classes),
        "complexity": model.config.model_dump(mode="json"),
        "ensemble": model.expert.to_dict(),
        "quantile_maps": {
            "L": model.qmap_L.to_dict(),
            "E": model.qmap_E.to_dict(),
            "S": model.qmap_S.to_dict(),
            "C": model.qmap_C.to_dict(),
        },
        "vocabulary": model.vocabulary.to_dict(),
    }


def payload_to_model(payload: Dict[str, Any]) -> ComplexityModel:
    maps = payload["quantile_maps"]
    return ComplexityModel(
        expert=Ensemble.from_dict(payload["ensemble"]),
        vocabulary=Vocabulary.from_dict(payload["vocabulary"]),
        qmap_L=QuantileMap.from_dict(maps["L"]),
        qmap_E=QuantileMap.from_dict(maps["E"]),
        qmap_S=QuantileMap.from_dict(maps["S"]),
        qmap_C=QuantileMap.from_dict(maps["C"]),
        config=ComplexityConfig(**payload["complexity"]),
        classes=tuple(payload["classes"]),
    )


def _container(model: ComplexityModel) -> Dict[str, Any]:
    payload = model_to_payload(model)
    return {
        "checksum": payload_checksum(payload),
        "format": FORMAT_NAME,
        "payload": payload,
        "version": FORMAT_VERSION,
    }


def dumps_model(model: ComplexityModel) -> str:
    """Serialized model file content."""
    return _canonical(_container(model)) + "\n"


def loads_model(text: str) -> ComplexityModel:
    """
    Parse model file content.

    Raises:
        ModelFileError: If the content is not a model container
        ModelVersionError: If the format version is not supported
        ChecksumError: If the payload does not match its checksum
    """
    try:
        container = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFileError(f"model file is not valid JSON: {e.msg}") from e
    if not isinstance(container, dict) or container.get("format") != FORMAT_NAME:
        raise ModelFileError("not a contact-complexity model file")
    if container.get("version") != FORMAT_VERSION:
        raise ModelVersionError(
            f"unsupported model file version {container.get('version')!r} "
            f"(this build reads version {FORMAT_VERSION})"
        )
    payload = container.get("payload")
    if not isinstance(payload, dict) or payload_checksum(payload) != container.get("checksum"):
        raise ChecksumError("model file checksum does not match its content")
    try:
        return payload_to_model(payload)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelFileError(f"model file payload is malformed: {e}") from e


def save_model(model: ComplexityModel, path: PathLike) -> str:
    """
    Write a model file.

    Returns:
        The payload checksum
    """
    container = _container(model)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(_canonical(container) + "\n")
    checksum = container["checksum"]
    logger.info("Saved model to %s (%s)", path, checksum)
    return checksum


def load_model(path: PathLike) -> ComplexityModel:
    """Read and verify a model file."""
    with open(path, "r", encoding="utf-8") as f:
        model = loads_model(f.read())
    logger.info("Loaded model from %s", path)
    return model
