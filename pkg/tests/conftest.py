import json
import time
from pathlib import Path

import pytest

from workcap.capacitance import OptimizerConfig, sweep
from workcap.channels import make_depolarizing, make_mad, make_qubit_ad, make_remad
from workcap.qops import Hamiltonian

FIXTURES = Path(__file__).parent / "fixtures"
GAMMAS = (0.3, 0.2, 0.6)
QUBIT_PARAMS = tuple(round(0.1 * k, 1) for k in range(1, 10))

# acceptance outcomes, printed in the terminal summary
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def qutrit_h():
    return Hamiltonian.from_eigenvalues([0.0, 1.0, 2.0])


@pytest.fixture(scope="session")
def qubit_h():
    return Hamiltonian.from_eigenvalues([0.0, 1.0])


@pytest.fixture(scope="session")
def qutrit_sweeps(qutrit_h):
    """32-interval sweeps of MAD and ReMAD at the reference damping rates, with wall time."""
    out = {}
    for name, make in (("mad", make_mad), ("remad", make_remad)):
        t0 = time.perf_counter()
        s = sweep(make(GAMMAS), qutrit_h, 32, OptimizerConfig())
        out[name] = (s, time.perf_counter() - t0)
    return out


@pytest.fixture(scope="session")
def qubit_sweeps(qubit_h):
    """16-interval sweeps for qubit amplitude damping and depolarizing over a parameter grid."""
    t0 = time.perf_counter()
    out = {}
    for p in QUBIT_PARAMS:
        out[("amplitude_damping", p)] = sweep(make_qubit_ad(p), qubit_h, 16)
        out[("depolarizing", p)] = sweep(make_depolarizing(2, p), qubit_h, 16)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def mad_oracle():
    return json.loads((FIXTURES / "mad_oracle.json").read_text())
