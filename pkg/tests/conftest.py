"""Pytest configuration and shared fixtures."""

import numpy as np
import pytest
from dotenv import load_dotenv


@pytest.fixture(scope="session", autouse=True)
def env():
    """Load environment variables from .env file."""
    load_dotenv("tests/.env")


@pytest.fixture
def rng():
    """Seeded generator, fresh for every test."""
    return np.random.default_rng(20240917)
