import numpy as np
import pytest

from swarmctl.simworld import WorldView
from swarmctl.tasks import ScenarioSpec, Task


def make_world(positions, velocities=None, groups=None, goals=None, search_grid=None, step=0):
    pos = np.asarray(positions, dtype=float).reshape(-1, 2)
    n = len(pos)
    return WorldView(ids=np.arange(n),
                     groups=np.zeros(n, int) if groups is None else groups,
                     positions=pos,
                     velocities=np.zeros((n, 2)) if velocities is None else velocities,
                     goals=goals, search_grid=search_grid, step=step)


def make_scenario(**kw):
    kw.setdefault("task", Task.FLOCKING)
    kw.setdefault("n_agents", 2)
    return ScenarioSpec(**kw)


# -- acceptance reporting: one PASS/FAIL line per criterion in the summary ------

def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = marker.args
    detail = dict(item.user_properties).get("detail", "")
    item.config._criteria[number] = (title, rep.passed, detail)


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_criteria", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, ok, detail = results[number]
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {title}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
