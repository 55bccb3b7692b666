from fractions import Fraction

import pytest

from yamabe_spectra import build_model, neutral_fixture, sphere_hemisphere_model
from yamabe_spectra.spectra import hemisphere_neumann_spectrum, interval_neumann_spectrum, sphere_spectrum

# filled by test_acceptance, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


def all_fixtures():
    """(name, model, window) for every shipped or test model."""
    return [
        ("S2 x hemisphere", sphere_hemisphere_model(), (Fraction(1, 20), Fraction(20))),
        ("neutral", neutral_fixture(False), (Fraction(1, 2), Fraction(2))),
        ("neutral hf", neutral_fixture(True), (Fraction(1, 2), Fraction(2))),
        ("S3 x hemisphere", build_model(sphere_spectrum(3, 10), hemisphere_neumann_spectrum(10)),
         (Fraction(1, 10), Fraction(10))),
        ("S2 x interval", build_model(sphere_spectrum(2, 4), interval_neumann_spectrum(8)),
         (Fraction(1, 4), Fraction(30))),
    ]


@pytest.fixture
def sh_model():
    return sphere_hemisphere_model()
