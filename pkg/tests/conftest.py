import json
import os
import subprocess
import sys
import textwrap
import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", message="The TBB threading layer")

from knotdist.curve import PolygonalCurve, regular_polygon  # noqa: E402
from knotdist.knots import TorusParams, torus_knot  # noqa: E402

SQUARE = PolygonalCurve([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]])


@pytest.fixture(scope="session")
def square():
    return SQUARE


@pytest.fixture(scope="session")
def trefoil():
    return torus_knot(TorusParams(2.0, 0.5, 2, 3, 600))


@pytest.fixture(scope="session")
def circle1024():
    return regular_polygon(1024)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


_THREADS_SCRIPT = textwrap.dedent("""
    import json, warnings
    warnings.filterwarnings("ignore")
    from knotdist.knots import torus_knot, TorusParams
    from knotdist.distortion import distortion_certified
    c = torus_knot(TorusParams(2.0, 0.5, 2, 3, {n}))
    out = []
    for jobs in (1, 2, 4):
        b = distortion_certified(c, 1e-6, jobs=jobs)
        out.append([b.lo, b.hi, list(b.witness), b.cells])
    print(json.dumps(out))
""")


def run_thread_comparison(n):
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    res = subprocess.run([sys.executable, "-c", _THREADS_SCRIPT.format(n=n)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


# one line per acceptance criterion, printed after the run whatever the capture mode
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
