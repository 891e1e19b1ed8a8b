"""Shared fixtures: fixture corpus paths, a mock client, and a config factory."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from triplex.corpus import PreprocessConfig
from triplex.llmclient import EndpointConfig, make_client
from triplex.prompting import default_example_bank

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def golden_dir() -> Path:
    return GOLDEN


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return FIXTURES / "corpus"


@pytest.fixture(scope="session")
def corpus_with_errors_dir() -> Path:
    return FIXTURES / "corpus_with_errors"


@pytest.fixture(scope="session")
def parse_sample_text() -> str:
    return (FIXTURES / "parse_sample.txt").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def bank():
    return default_example_bank()


@pytest.fixture()
def mock_client():
    return make_client(EndpointConfig(seed=42), backend="mock")


@pytest.fixture()
def small_chunks_config() -> PreprocessConfig:
    return PreprocessConfig(max_chunk_chars=600)


@pytest.fixture()
def config_file(tmp_path: Path, corpus_dir: Path):
    """Factory writing a pipeline config JSON into ``tmp_path``.

    Keyword arguments shallow-merge into the default sections, so
    ``config_file(corpus={"limit": 2})`` keeps the default source_dir.
    """

    def make(**overrides) -> Path:
        config = {
            "corpus": {"source_dir": str(corpus_dir), "max_chunk_chars": 600},
            "output_dir": str(tmp_path / "out"),
            "endpoint": {"seed": 42},
            "eval": {"seed": 42},
        }
        for key, value in overrides.items():
            if isinstance(value, dict) and isinstance(config.get(key), dict):
                config[key] = {**config[key], **value}
            else:
                config[key] = value
        path = tmp_path / "config.json"
        path.write_text(json.dumps(config, indent=2), encoding="utf-8")
        return path

    return make
