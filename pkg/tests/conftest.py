"""Shared fixtures. The scripts/ modules import each other by bare name."""

import os
import sys

import pytest

REPO_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(REPO_DIR, "scripts"))

CONFIGS_DIR = os.path.join(REPO_DIR, "configs")


@pytest.fixture
def configs_dir():
    return CONFIGS_DIR


@pytest.fixture
def write_config(tmp_path):
    """Write a YAML document to tmp_path and return its path."""

    def _write(text, name="run.yaml"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return _write


@pytest.fixture(autouse=True)
def _clean_environment(monkeypatch):
    monkeypatch.delenv("SENSING_SEED", raising=False)
    monkeypatch.delenv("SENSING_WORKERS", raising=False)
