import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from twistlab.curve import WeierstrassCurve, build_profile  # noqa: E402
from twistlab.lmfdb import fetch_curve  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def profile_for(label):
    rec = fetch_curve(label, offline=True)
    return build_profile(rec.curve(), mu2=rec.mu2, lambda2=rec.lambda2, label=rec.label,
                         rank=rec.rank, root_number=rec.root_number)


@pytest.fixture(scope="session")
def e53():
    return profile_for("53a1")


@pytest.fixture(scope="session")
def e15():
    return profile_for("15a7")


@pytest.fixture(scope="session")
def e17():
    return profile_for("17a4")


@pytest.fixture
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("TWISTLAB_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.delenv("TWISTLAB_OFFLINE", raising=False)
    return tmp_path / "cache"


def curve(ainvs):
    return WeierstrassCurve.from_ainvs(ainvs)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
