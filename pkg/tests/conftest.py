import pytest

from faultdiag import datagen


def tiny_spec(n_healthy=400, n_unlabeled_healthy=50, duration=60):
    """Small dataset layout: two unlabeled faults, two held-out faults."""
    faults = [
        datagen.FaultSpec(1, "Fan", "Efficiency", 1.0, "S1", "D_U", duration),
        datagen.FaultSpec(2, "LPC", "Efficiency", 1.0, "S2", "D_U", duration),
        datagen.FaultSpec(3, "HPC", "Efficiency", 1.0, "S1", "D_T", duration),
        datagen.FaultSpec(4, "HPT", "Efficiency", 1.0, "S2", "D_T", duration),
    ]
    return datagen.GenerationSpec(
        healthy_seconds=n_healthy,
        unlabeled_healthy_seconds=n_unlabeled_healthy,
        validation_fraction=0.06,
        faults=faults,
    )


@pytest.fixture(scope="session")
def tiny_dataset():
    return datagen.generate(tiny_spec(), seed=1)
