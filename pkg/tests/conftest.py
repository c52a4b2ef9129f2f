import pytest
from hypothesis import HealthCheck, settings

from ppreflect.fincat import coproduct_presheaf, yoneda
from ppreflect.samples import delta_op, delta_op_cones

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def W():
    return delta_op()


@pytest.fixture(scope="session")
def cones():
    return delta_op_cones()


@pytest.fixture(scope="session")
def S(W):
    y1 = yoneda(W, "1")
    F, _, _ = coproduct_presheaf(y1, y1, name="y(1)+y(1)")
    return F


@pytest.fixture(scope="session")
def R(W, cones, S):
    from ppreflect.completion import reflect
    from ppreflect.deduction import Budget
    return reflect(W, cones, S, budget=Budget(size=5))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            for name, value in getattr(rep, "user_properties", ()):
                if name == "acceptance":
                    lines.append(value)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
