"""
Unit tests for the model file container.
"""

import json

import pytest

from contact_complexity.errors import ChecksumError, ModelFileError, ModelVersionError
from contact_complexity.modelfile import (
    FORMAT_NAME,
    FORMAT_VERSION,
    dumps_model,
    load_model,
    loads_model,
    payload_checksum,
    save_model,
)
from contact_complexity.scoring import batch_score


class TestSaveLoad:
    """Test writing and reading model files."""

    @pytest.mark.unit
    def test_loaded_model_scores_identically(self, small_model, small_corpus, temp_dir):
        """Test that a reloaded model reproduces every score exactly."""
        path = temp_dir / "model.json"
        save_model(small_model, path)
        loaded = load_model(path)

        original = batch_score(small_model, small_corpus[:30])
        restored = batch_score(loaded, small_corpus[:30])
        assert [r.model_dump() for r in restored] == [r.model_dump() for r in original]
        assert loaded.classes == small_model.classes
        assert loaded.config == small_model.config

    @pytest.mark.unit
    def test_resave_is_byte_identical(self, small_model, temp_dir):
        """Test that save -> load -> save reproduces the file."""
        first = temp_dir / "a.json"
        second = temp_dir / "b.json"
        checksum = save_model(small_model, first)
        assert save_model(load_model(first), second) == checksum
        assert first.read_bytes() == second.read_bytes()

    @pytest.mark.unit
    def test_container_layout(self, small_model):
        """Test the outer keys and checksum format."""
        container = json.loads(dumps_model(small_model))

        assert sorted(container) == ["checksum", "format", "payload", "version"]
        assert container["format"] == FORMAT_NAME
        assert container["version"] == FORMAT_VERSION
        assert container["checksum"].startswith("sha256:")
        assert container["checksum"] == payload_checksum(container["payload"])
        assert sorted(container["payload"]["quantile_maps"]) == ["C", "E", "L", "S"]


class TestCorruption:
    """Test rejection of damaged or foreign files."""

    @pytest.mark.unit
    @pytest.mark.edge
    def test_tampered_payload(self, small_model):
        """Test that any payload change breaks the checksum."""
        container = json.loads(dumps_model(small_model))
        container["payload"]["complexity"]["w"] = 7.0
        with pytest.raises(ChecksumError):
            loads_model(json.dumps(container))

    @pytest.mark.unit
    @pytest.mark.edge
    def test_flipped_byte(self, small_model):
        """Test a single changed digit inside a stored float."""
        text = dumps_model(small_model)
        pos = text.index('"learning_rate":') + len('"learning_rate":')
        digit = text[pos + 2]
        flipped = text[: pos + 2] + ("7" if digit != "7" else "3") + text[pos + 3 :]
        with pytest.raises(ChecksumError):
            loads_model(flipped)

    @pytest.mark.unit
    @pytest.mark.edge
    def test_unsupported_version(self, small_model):
        """Test the version check."""
        container = json.loads(dumps_model(small_model))
        container["version"] = FORMAT_VERSION + 1
        with pytest.raises(ModelVersionError, match="version"):
            loads_model(json.dumps(container))

    @pytest.mark.unit
    @pytest.mark.edge
    @pytest.mark.parametrize("text", ["", "not json", "[]", '{"format": "other"}'])
    def test_not_a_model(self, text):
        """Test foreign content."""
        with pytest.raises(ModelFileError):
            loads_model(text)

    @pytest.mark.unit
    @pytest.mark.edge
    def test_malformed_payload_with_valid_checksum(self):
        """Test a payload that passes the checksum but cannot be decoded."""
        payload = {"classes": []}
        container = {
            "checksum": payload_checksum(payload),
            "format": FORMAT_NAME,
            "payload": payload,
            "version": FORMAT_VERSION,
        }
        with pytest.raises(ModelFileError, match="malformed"):
            loads_model(json.dumps(container))

    @pytest.mark.unit
    def test_error_hierarchy(self):
        """Test that checksum and version errors are model file errors."""
        assert issubclass(ChecksumError, ModelFileError)
        assert issubclass(ModelVersionError, ModelFileError)
