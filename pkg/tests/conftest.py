from ipaddress import IPv4Address

import pytest
from hypothesis import HealthCheck, settings

import xdnp
from xdnp.analyzer import compile_policy
from xdnp.model import Condition, Connector, Drop, Field, Forward, Policy, Rule

settings.register_profile("default", max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("fast", max_examples=20)
settings.load_profile("default")

DEMO_POLICY = Policy("Demo", [
    Rule([Condition(Field.DST_IP, IPv4Address("10.0.0.2")),
          Condition(Field.SRC_IP, IPv4Address("192.168.0.1"), Connector.OR)], Forward(1)),
    Rule([Condition(Field.SRC_PORT, 23)], Drop()),
])


@pytest.fixture
def demo_path():
    return str(xdnp.demo_path())


@pytest.fixture
def demo_source(demo_path):
    with open(demo_path, encoding="utf-8") as fh:
        return fh.read()


@pytest.fixture
def demo_policy():
    return DEMO_POLICY


@pytest.fixture
def demo_cp():
    return compile_policy(DEMO_POLICY)


# Acceptance criteria record one line each here; printed in the summary.
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
