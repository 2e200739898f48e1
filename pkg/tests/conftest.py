import pytest
from hypothesis import HealthCheck, settings

from femoracle.circuit import Circuit, run_batch

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def run_cases(circuit: Circuit, cases: list[dict]) -> list[dict]:
    """Simulate register assignments in one bit-sliced batch, decode per register."""
    outs = run_batch(circuit, [circuit.pack(v) for v in cases])
    return [circuit.unpack(o) for o in outs]


def ancillas_clean(circuit: Circuit, values: dict, skip=()) -> bool:
    return all(values[r.name] == 0 for r in circuit.ancilla_registers() if r.name not in skip)


@pytest.fixture
def cases():
    return run_cases
