from __future__ import annotations

import importlib

import pytest

from fairboard import synthgen
from fairboard.kernels import _numpy as kernels_numpy
from fairboard.runs import discover_runs


def _available_backends():
    backends = [kernels_numpy]
    try:
        backends.append(importlib.import_module("fairboard.kernels._numba"))
    except ImportError:
        pass
    return backends


@pytest.fixture(params=_available_backends(), ids=lambda m: m.NAME)
def kernel_backend(request):
    return request.param


@pytest.fixture(scope="session")
def case_logdir(tmp_path_factory):
    """One shared logdir with every built-in scenario generated once."""
    root = tmp_path_factory.mktemp("scenarios")
    for scenario in ("baseline", "mitigated", "lr_compare", "table2", "detection"):
        synthgen.generate(scenario, root)
    return root


@pytest.fixture(scope="session")
def case_catalog(case_logdir):
    return discover_runs(case_logdir)


@pytest.fixture(scope="session")
def case_client(case_logdir):
    from fastapi.testclient import TestClient

    from fairboard.server import create_app

    app = create_app(str(case_logdir), rescan_secs=30.0, seed=0)
    with TestClient(app) as client:
        yield client
