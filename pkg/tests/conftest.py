import json
import os

import pytest
from hypothesis import HealthCheck, settings

from xaskey.config import load_config
from xaskey.deformation import DeformedSystem
from xaskey.families import ParamSet

settings.register_profile(
    "xaskey", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("xaskey")

CH = ParamSet("cH", (0.7, 1.2 + 0.3j))
W = ParamSet("W", (0.3, 0.5, 1.1, 1.7))
AW = ParamSet("AW", (0.7, 0.6, 0.2, 0.1), 0.5)
ORIGINAL = {"cH": CH, "W": W, "AW": AW}
ELLS = {"cH": 2, "W": 1, "AW": 2}


@pytest.fixture(params=["cH", "W", "AW"])
def family(request):
    return request.param


@pytest.fixture
def original(family):
    return ORIGINAL[family]


@pytest.fixture
def deformed(family):
    return DeformedSystem(ORIGINAL[family], ELLS[family]).certified()


@pytest.fixture(scope="session")
def default_config():
    return load_config()


@pytest.fixture(scope="session")
def suite_run(tmp_path_factory):
    """One CLI run of the bundled suite, shared by the CLI, golden and acceptance tests."""
    from xaskey.cli import main

    out = tmp_path_factory.mktemp("reports")
    os.environ.pop("XASKEY_CONFIG", None)
    code = main(["verify", "--out-dir", str(out), "--jobs", str(min(4, os.cpu_count() or 1))])
    return code, out


@pytest.fixture(scope="session")
def suite_reports(suite_run):
    from xaskey.verify import IdentityReport

    _, out = suite_run
    reps = []
    for f in sorted(out.glob("*.json")):
        reps += [IdentityReport.from_json(r) for r in json.loads(f.read_text())["reports"]]
    return reps


@pytest.fixture(autouse=True)
def _no_env_config(monkeypatch):
    monkeypatch.delenv("XASKEY_CONFIG", raising=False)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
