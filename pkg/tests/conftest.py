import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from heatsteer.field import ScalarField2D, split_field, partition  # noqa: E402

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"


@pytest.fixture(scope="session", autouse=True)
def warm_kernel():
    # first call JIT-compiles the sweep kernel; keep that out of timed tests
    f = ScalarField2D.uniform(4, 4, north=1.0)
    split_field(f, partition(4, 1))[0].sweep()


def acceptance(name: str):
    """Context manager printing one pass/fail line per criterion.

    Writes to the real stdout so the line survives pytest's capture.
    """
    import contextlib

    def emit(verdict: str) -> None:
        sys.__stdout__.write(f"[ACCEPTANCE] {name}: {verdict}\n")
        sys.__stdout__.flush()

    @contextlib.contextmanager
    def cm():
        try:
            yield
        except BaseException:
            emit("FAIL")
            raise
        emit("PASS")

    return cm()
