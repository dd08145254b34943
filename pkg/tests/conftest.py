import numpy as np
import pytest

from elastonet import ElastodynamicNetwork, Node, Spring, assemble


@pytest.fixture
def single_spring_terminals():
    """One unit spring between two massless terminals along x, d=2."""
    nodes = (
        Node((0.0, 0.0), 0.0, True),
        Node((1.0, 0.0), 0.0, True),
    )
    return ElastodynamicNetwork(2, nodes, (Spring(0, 1, 1.0),))


@pytest.fixture
def collinear_chain():
    """Three collinear nodes, unit springs, massless interior middle node."""
    nodes = (
        Node((0.0, 0.0), 0.0, True),
        Node((1.0, 0.0), 0.0, False),
        Node((2.0, 0.0), 0.0, True),
    )
    return ElastodynamicNetwork(2, nodes, (Spring(0, 1, 1.0), Spring(1, 2, 1.0)))


@pytest.fixture
def terminal_plus_mass():
    """One terminal and one massive interior node, k = m = 1, undamped."""
    nodes = (
        Node((0.0, 0.0), 0.0, True),
        Node((1.0, 0.0), 1.0, False),
    )
    return ElastodynamicNetwork(2, nodes, (Spring(0, 1, 1.0),))


def axial_block(scale=1.0):
    """Stiffness pattern of a unit x-direction spring between two nodes."""
    return scale * np.array(
        [
            [1.0, 0.0, -1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [-1.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
        ]
    )


@pytest.fixture
def assembled_chain(collinear_chain):
    return assemble(collinear_chain)
