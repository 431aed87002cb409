import mpmath as mp
import numpy as np
import pytest
from hypothesis import strategies as st

from noisygt import NoisyChannel

mp.mp.dps = 50


def mp_kl(p, q):
    p, q = mp.mpf(p), mp.mpf(q)
    a = 0 if p == 0 else p * mp.log(p / q)
    b = 0 if p == 1 else (1 - p) * mp.log((1 - p) / (1 - q))
    return a + b


@st.composite
def channels(draw, lo=1e-3):
    """Valid channels with p01 + p10 < 1, kept away from the degenerate boundary."""
    p01 = draw(st.floats(lo, 0.45))
    p10 = draw(st.floats(lo, 0.45))
    return NoisyChannel(p01, p10)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria report: one line per criterion in the terminal summary
_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """``criterion(k, ok, detail)`` records the outcome line for acceptance criterion ``k``."""
    def record(k, ok, detail=""):
        line = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _ACCEPTANCE[k] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
