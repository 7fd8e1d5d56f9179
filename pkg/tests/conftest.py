import random

import pytest

import clusterlab_config as cc
from laurent import LaurentPoly
from quiver import Quiver, tilde_A_canonical


@pytest.fixture
def x():
    """coordinates x1, x2 of the rank 2 ring"""
    return LaurentPoly.coordinates(2)


@pytest.fixture
def kronecker():
    return tilde_A_canonical(1, 1)


@pytest.fixture
def a2():
    return Quiver.from_arrows(2, [(0, 1)])


@pytest.fixture
def rng():
    return random.Random(2024)


@pytest.fixture
def lab_config(tmp_path, monkeypatch):
    """quiet configuration file selected through the environment"""
    path = tmp_path / "config.yaml"
    path.write_text("log:\n  level: warning\nlimits:\n  node_limit: 5000\n  depth: 2\n")
    monkeypatch.setenv(cc.ClusterLabConfig.ENVIRONMENT_VARIABLE, str(path))
    cc.ClusterLabConfig.reset()
    yield path
    cc.ClusterLabConfig.reset()
