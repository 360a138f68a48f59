from pathlib import Path

import pytest

from explicable.pddl import load_task, parse_domain
from explicable.rover import RoverProblem, build_tasks, domain_text

DATA = Path(__file__).parent / "data"


def read(name):
    return (DATA / name).read_text()


@pytest.fixture(scope="session")
def blocks_task():
    return load_task(read("blocksworld.pddl"), read("blocksworld-p01.pddl"))


@pytest.fixture(scope="session")
def rover_domain():
    return parse_domain(domain_text())


def rover(width, height, rover, resources=(), storages=(), observations=(), hidden=()):
    """Hand-placed rover instance (cells are row-major indices)."""
    return build_tasks(RoverProblem(width, height, rover, tuple(resources), tuple(storages),
                                    tuple(observations), tuple(hidden)))


@pytest.fixture(scope="session")
def small_model():
    """CRF trained on 60 labeled rover plans; enough structure for decoding tests."""
    from explicable.crf import TrainConfig, train
    from explicable.rover import RoverConfig, gen_dataset, record_dataset
    recs = gen_dataset(RoverConfig(max_hidden=3), 60, 0)
    return train(record_dataset(recs), TrainConfig(max_iterations=100))
