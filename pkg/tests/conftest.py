import pytest
from hypothesis import HealthCheck, settings

from loewner.demos import demo_catalog
from loewner.fields import make_field
from loewner.suite import CheckPlan, run_checks

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def demo_reports():
    """name -> {report name: PropertyReport} for every catalog entry."""
    out = {}
    for d in demo_catalog():
        reps = run_checks(make_field(d.field), CheckPlan.from_demo(d))
        out[d.name] = {r.name: r for r in reps}
    return out


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
