import random
import time
from pathlib import Path

import hypothesis
import pytest
from hypothesis import strategies as st

from clomgraph.model import (
    DEFAULT_LOCATIONS,
    ClothConfig,
    GraspBinding,
    GraspGeometry,
    GraspType,
    GraspUnit,
    SceneState,
    Segment,
    Shape,
    Trial,
)

hypothesis.settings.register_profile("ci", max_examples=200, deadline=None)
hypothesis.settings.register_profile("fast", max_examples=20, deadline=None)
hypothesis.settings.load_profile("ci")

DATA = Path(__file__).resolve().parent.parent / "data"
PAPERLIKE = DATA / "paperlike"


# --- random generators (plain RNG for the bulk acceptance loops) ---------


def random_geometry(rng: random.Random) -> GraspGeometry:
    return GraspGeometry(rng.choice(list(Shape)), rng.random() < 0.3)


def random_unit(rng: random.Random) -> GraspUnit:
    n = rng.choice((1, 2, 2))
    return GraspUnit(tuple(random_geometry(rng) for _ in range(n)))


def random_binding(rng: random.Random, locations=DEFAULT_LOCATIONS) -> GraspBinding:
    return GraspBinding(
        rng.choice(locations),
        rng.choice((None, None, 1, 2, 3)),
        rng.choice((None, "LH", "RH")),
    )


def random_state(rng: random.Random, locations=DEFAULT_LOCATIONS) -> SceneState:
    units = tuple(random_unit(rng) for _ in range(rng.randint(1, 4)))
    bindings = tuple(random_binding(rng, locations) for _ in range(rng.randint(0, 3)))
    return SceneState(GraspType(units), bindings, rng.choice(list(ClothConfig)))


def random_trial(rng: random.Random, pool, labels, subject="s01", index=1, task="t") -> Trial:
    n = rng.randint(2, 10)
    states = [rng.choice(pool)]
    while len(states) < n:
        s = rng.choice(pool)
        if s != states[-1]:
            states.append(s)
    t = 0.0
    segs = []
    for i, s in enumerate(states):
        segs.append(Segment(round(t, 3), s, rng.choice(labels) if i < n - 1 else None))
        t += rng.uniform(0.5, 3.0)
    return Trial(subject, task, index, tuple(segs))


# --- hypothesis strategies -------------------------------------------------

geometries = st.builds(GraspGeometry, st.sampled_from(list(Shape)), st.booleans())
units = st.lists(geometries, min_size=1, max_size=2).map(lambda g: GraspUnit(tuple(g)))
bindings = st.builds(
    GraspBinding,
    st.sampled_from(DEFAULT_LOCATIONS),
    st.one_of(st.none(), st.integers(1, 4)),
    st.sampled_from([None, "LH", "RH"]),
)
states = st.builds(
    SceneState,
    st.lists(units, min_size=1, max_size=4).map(lambda u: GraspType(tuple(u))),
    st.lists(bindings, max_size=3).map(tuple),
    st.sampled_from(list(ClothConfig)),
)


# --- acceptance reporting --------------------------------------------------

_ACCEPTANCE: dict = {}
SUITE_BUDGET_S = 120.0
_STARTED = time.monotonic()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "acceptance", None)
    if marker and (report.when == "call" or report.outcome != "passed"):
        number, title = marker
        prev = _ACCEPTANCE.get(number, (title, True))
        _ACCEPTANCE[number] = (title, prev[1] and report.outcome == "passed")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("acceptance")
    if marker:
        outcome.get_result().acceptance = tuple(marker.args)


def pytest_sessionfinish(session, exitstatus):
    # The end-to-end criterion also bounds the wall time of the whole suite.
    if 10 in _ACCEPTANCE:
        elapsed = time.monotonic() - _STARTED
        if elapsed > SUITE_BUDGET_S:
            title, _ = _ACCEPTANCE[10]
            _ACCEPTANCE[10] = (f"{title} [suite took {elapsed:.0f} s > {SUITE_BUDGET_S:.0f} s]", False)
            session.exitstatus = pytest.ExitCode.TESTS_FAILED


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    terminalreporter.write_line(f"suite wall time {time.monotonic() - _STARTED:.1f} s (budget {SUITE_BUDGET_S:.0f} s)")
    for number in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[number]
        terminalreporter.write_line(f"AC{number:>2} {'PASS' if ok else 'FAIL'}  {title}")
