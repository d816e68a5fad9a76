import re

import numpy as np
import pytest

from pipeopt import kernels
from pipeopt.data import ColumnSchema, TabularDataset

_ACCEPTANCE: dict[int, tuple[str, str]] = {}
_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.outcome != "passed":
        n = int(m.group(1))
        # a failure in any phase sticks
        if _ACCEPTANCE.get(n, ("", "passed"))[1] == "passed":
            _ACCEPTANCE[n] = (m.group(2).replace("_", " "), report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, outcome = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if outcome == 'passed' else 'FAIL'}  {title}")


@pytest.fixture(params=sorted(kernels.available_backends()))
def backend(request):
    return kernels.available_backends()[request.param]


def make_ds(values, labels, kinds=None, categories=None):
    values = np.asarray(values, dtype=float)
    kinds = kinds or ["numeric"] * values.shape[1]
    categories = categories or {}
    schema = tuple(
        ColumnSchema(f"f{j}", k, tuple(categories.get(j, ()))) for j, k in enumerate(kinds)
    )
    return TabularDataset(schema, values, labels, np.arange(len(labels)))


@pytest.fixture
def small_numeric():
    rng = np.random.default_rng(7)
    X = rng.normal(size=(120, 4))
    y = (X[:, 0] + 0.3 * rng.normal(size=120) > 0.9).astype(np.int8)
    return make_ds(X, y)
