import pytest

from llmcd.datasets import load_dataset


@pytest.fixture(scope="session")
def karate():
    """(graph, ground-truth partition) of the real karate-club network."""
    return load_dataset("karate")


@pytest.fixture(scope="session")
def karate_graph(karate):
    return karate[0]


@pytest.fixture(scope="session")
def karate_truth(karate):
    return karate[1]
