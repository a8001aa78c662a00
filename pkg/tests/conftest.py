import math

import numpy as np
import pytest

from linkforge.geometry import Linkage
from linkforge.quad_moduli import build_oval

REF_SIDES = (6.0, 6.5, 6.2, 5.8)
GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0

# Critical points of t/x + 1/y (t = 2) on REF_SIDES, computed independently in
# 30-digit arithmetic from the vertex-angle parametrization (no cubic):
# (x, y, E, type) sorted by x.
REF_CRITICAL_T_ON_X = (
    (0.5035353874343536, 3.2400591741816376, 4.280551818331291, "maximum"),
    (1.2472150267038449, 0.583028954446643, 3.3187534082671126, "minimum"),
    (4.112778257957387, 0.3045586184759996, 3.7697294487377664, "maximum"),
    (9.588874983829587, 7.608658270631539, 0.34000425888151664, "minimum"),
)
# Same oracle for 1/x + t/y.
REF_CRITICAL_T_ON_Y = (
    (4.82432956268794, 0.3001837457557217, 6.869868615138813, "maximum"),
    (7.6188675420077585, 9.573804363483724, 0.34015647267759147, "minimum"),
)


@pytest.fixture(scope="session")
def ref_linkage():
    return Linkage(REF_SIDES)


@pytest.fixture(scope="session")
def ref_model(ref_linkage):
    return build_oval(ref_linkage)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one verdict line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
