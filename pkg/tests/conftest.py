import json

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from polyineq import cli

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def full_audit(tmp_path_factory):
    """One run of ``audit --suite full --seed 42`` through the CLI, shared by tests."""
    out = tmp_path_factory.mktemp("audit") / "full.jsonl"
    code = cli.main(["audit", "--suite", "full", "--seed", "42", "--output", str(out)])
    lines = out.read_text().splitlines()
    return code, [json.loads(line) for line in lines], out.read_bytes()
