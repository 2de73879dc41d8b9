"""Suite-wide fixtures: egress guard, shared catalog/plan fixtures, and the
acceptance-criteria summary printed at the end of the run."""

from __future__ import annotations

import socket
import time

import pytest

from planglow.model import BackgroundLevel, LearnerProfile
from planglow.pipeline import PromptBundle, content_plan_id, create_plan
from planglow.resources import MockCatalog
from planglow.testing import (
    build_catalog_records,
    build_plan,
    scripted_provider,
    scripted_clock,
    transcript_for_generation,
)

SUITE_STARTED_AT = time.monotonic()

ACCEPTANCE_LINES: list[str] = []

_ACCEPTANCE_PREFIX = "test_acceptance_"


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call":
        return
    name = report.location[2]
    if not name.startswith(_ACCEPTANCE_PREFIX):
        return
    rest = name[len(_ACCEPTANCE_PREFIX) :]
    number, _, slug = rest.partition("_")
    status = "PASS" if report.passed else "FAIL"
    ACCEPTANCE_LINES.append(
        f"ACCEPTANCE {number} {status} - {slug.replace('_', ' ')}"
    )


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(autouse=True)
def no_network_egress(monkeypatch):
    """Hard guard: the suite must never open a network connection."""

    def blocked(self, *args, **kwargs):
        raise RuntimeError("network egress blocked by test guard")

    monkeypatch.setattr(socket.socket, "connect", blocked)
    monkeypatch.setattr(socket.socket, "connect_ex", blocked)
    yield


@pytest.fixture(scope="session")
def bundle() -> PromptBundle:
    return PromptBundle()


@pytest.fixture(scope="session")
def records():
    return build_catalog_records(50)


@pytest.fixture(scope="session")
def catalog(records):
    return MockCatalog(records)


@pytest.fixture(scope="session")
def golden_profile() -> LearnerProfile:
    return LearnerProfile(
        subject="GraphQL",
        goal="deploy a website",
        background_level=BackgroundLevel.NOVICE,
        duration_weeks=2,
        daily_minutes=60,
    )


@pytest.fixture(scope="session")
def golden_plan(golden_profile, records, catalog, bundle):
    """The plan the scripted golden-path run produces."""
    entries = transcript_for_generation(golden_profile, build_plan(golden_profile, records), bundle=bundle)
    plan, _trace, _repl = create_plan(
        golden_profile,
        scripted_provider(entries),
        catalog,
        bundle=bundle,
        clock=scripted_clock,
        id_factory=content_plan_id,
    )
    return plan
