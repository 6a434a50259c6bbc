import time

import pytest

import udwchain as u
from udwchain.chain import generate_thermal_coefficients

# ---------------------------------------------------------------------------
# acceptance reporting: one PASS/FAIL line per criterion in the summary
# ---------------------------------------------------------------------------

_ACCEPTANCE: list[tuple[str, str, str]] = []


def record_criterion(name: str, passed: bool, detail: str = ""):
    _ACCEPTANCE.append((name, "PASS" if passed else "FAIL", detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}" + (f"  [{detail}]" if detail else ""))


# ---------------------------------------------------------------------------
# shared expensive artifacts
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def vacuum_limit_coeffs_250():
    """Thermal pipeline at beta = 1e8 L, N = 250, 300 digits (vacuum surrogate).

    Also records the generation wall time for the runtime acceptance check.
    """
    t0 = time.time()
    coeffs = generate_thermal_coefficients(1.0, 1e8, 250, 300)
    coeffs.provenance["generation_seconds"] = time.time() - t0
    return coeffs


@pytest.fixture(scope="session")
def thermal_coeffs_2pi_150():
    """beta = 2 pi L, N = 150, 300 digits."""
    import math
    return generate_thermal_coefficients(1.0, 2 * math.pi, 150, 300)


@pytest.fixture(scope="session")
def thermal_coeffs_20pi_150():
    """beta = 20 pi L (aL = 0.1), N = 150, 300 digits."""
    import math
    return generate_thermal_coefficients(1.0, 20 * math.pi, 150, 300)
