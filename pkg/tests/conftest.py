"""Shared fixtures for the pseudorefine test suite."""

import logging

import numpy as np
import pytest

from pseudorefine.utils.logging import HANDLER_NAME


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    """Run inside an empty directory so no stray config file is picked up."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("PSEUDOREFINE_LOG_LEVEL", raising=False)
    return tmp_path


@pytest.fixture(autouse=True)
def detach_cli_logging():
    """Drop the handler a CLI run installs so it never outlives the test's streams."""
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler.get_name() == HANDLER_NAME:
            root.removeHandler(handler)
