import numpy as np
import pytest

from eigenprob import datasets
from eigenprob.estimation import HyperParams
from eigenprob.model import EigenModel
from eigenprob.schema import AttributeSpec, Schema, load_dataset


@pytest.fixture(scope="session")
def tennis():
    return datasets.playtennis()


@pytest.fixture(scope="session")
def tennis_model(tennis):
    return EigenModel.from_dataset(tennis, HyperParams(5.0, 6.0))


@pytest.fixture(scope="session")
def tennis_numeric():
    return datasets.playtennis_numeric()


@pytest.fixture(scope="session")
def credit():
    return datasets.australian()


@pytest.fixture(scope="session")
def credit_model(credit):
    return EigenModel.from_dataset(credit, HyperParams(6.0, 9.0))


def discrete_schema(*specs):
    return Schema(tuple(AttributeSpec(name, "discrete", tuple(vals)) for name, vals in specs))


def make_dataset(schema, rows):
    text = ",".join(schema.names) + "\n" + "\n".join(",".join(map(str, r)) for r in rows) + "\n"
    return load_dataset(text, schema)


@pytest.fixture
def contrarian():
    """Five identical rows and one row disagreeing on every attribute."""
    schema = discrete_schema(("a", "xy"), ("b", "xy"), ("c", "xy"))
    return make_dataset(schema, [("x", "x", "x")] * 5 + [("y", "y", "y")])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_VERDICTS = []


@pytest.fixture
def verdict():
    """Record a criterion's PASS/FAIL line for the summary, then assert it."""
    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _VERDICTS.append(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_VERDICTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
