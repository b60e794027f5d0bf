"""Shared fixtures: real logs produced by the installed simulator CLI.

The logs are generated by shelling out to `quadtrack`, because the CSV
file is the only interface between the two packages and the tests
should exercise exactly that boundary.  Short runs with the fast
observer preset keep the fixtures quick; figure structure does not
depend on run length.
"""

import shutil
import subprocess

import numpy as np
import pytest

from quadplots.schema import LOG_HEADER


def _generate(scenario: str, out_dir) -> str:
    exe = shutil.which("quadtrack")
    if exe is None:
        raise RuntimeError(
            "quadtrack CLI not found on PATH; install the simulator "
            "package before running this suite"
        )
    proc = subprocess.run(
        [exe, "run", "--scenario", scenario, "--preset", "fast",
         "--t-final", "2.0", "--out", str(out_dir)],
        capture_output=True, text=True,
    )
    if proc.returncode != 0:
        raise RuntimeError(
            "quadtrack run failed (exit %d):\n%s" % (proc.returncode, proc.stderr)
        )
    return str(out_dir / "log.csv")


@pytest.fixture(scope="session")
def periodic_log(tmp_path_factory):
    return _generate("periodic", tmp_path_factory.mktemp("periodic"))


@pytest.fixture(scope="session")
def polynomial_log(tmp_path_factory):
    return _generate("polynomial", tmp_path_factory.mktemp("polynomial"))


@pytest.fixture()
def zero_log(tmp_path):
    """Synthetic log: linear time column, every signal identically zero."""
    n = 50
    data = np.zeros((n, len(LOG_HEADER)))
    data[:, 0] = np.linspace(0.0, 1.0, n)
    data[:, LOG_HEADER.index("env_ok")] = 1.0
    path = tmp_path / "zero.csv"
    lines = [",".join(LOG_HEADER)]
    lines += [",".join("%.17g" % v for v in row) for row in data]
    path.write_text("\n".join(lines) + "\n")
    return str(path)
