import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from wavehide.imageio import Image, read_pgm, write_pgm

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# 512x512 grayscale photographs bundled with scikit-image
SKIMAGE_NATURAL = ("camera", "moon", "brick", "grass", "gravel")


def natural_corpus() -> dict:
    """512x512 natural images: RDH_NATURAL_DIR/*.pgm if set, else scikit-image samples.

    Every image goes through a PGM write/read so the corpus exercises the
    same container as user-supplied files.
    """
    out = {}
    src = os.environ.get("RDH_NATURAL_DIR")
    if src:
        for p in sorted(Path(src).glob("*.pgm")):
            img = read_pgm(p.read_bytes())
            if (img.width, img.height) == (512, 512):
                out[p.stem] = img
        return out
    try:
        from skimage import data
    except ImportError:
        return out
    for name in SKIMAGE_NATURAL:
        try:
            px = np.asarray(getattr(data, name)())
        except Exception:
            continue
        if px.shape == (512, 512) and px.dtype == np.uint8:
            out[name] = read_pgm(write_pgm(Image(px)))
    return out


@pytest.fixture(scope="session")
def naturals():
    corpus = natural_corpus()
    if not corpus:
        pytest.skip("no natural 512x512 images (set RDH_NATURAL_DIR or install scikit-image)")
    return corpus


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# ---- acceptance reporting -------------------------------------------------

def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion")
    config._criteria = []


@pytest.fixture
def note(request):
    """Attach a detail line to the acceptance summary of the current test."""
    lines = []
    request.node._notes = lines
    return lines.append


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when != "call" and not (rep.when == "setup" and rep.skipped):
        return
    status = "PASS" if rep.passed else "SKIP" if rep.skipped else "FAIL"
    item.config._criteria.append((mark.args[0], mark.args[1], item.name, status, getattr(item, "_notes", [])))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    rows = getattr(config, "_criteria", [])
    if not rows:
        return
    grouped = {}
    for num, title, name, status, notes in rows:
        grouped.setdefault(num, (title, []))[1].append((name, status, notes))
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(grouped):
        title, tests = grouped[num]
        statuses = {s for _, s, _ in tests}
        status = "FAIL" if "FAIL" in statuses else "PASS" if "PASS" in statuses else "SKIP"
        failed = [n for n, s, _ in tests if s == "FAIL"]
        suffix = f" (failing: {', '.join(failed)})" if failed else ""
        tr.write_line(f"[{status}] criterion {num}: {title}{suffix}")
        for name, _, notes in sorted(tests):
            for line in notes:
                tr.write_line(f"        {line}")
