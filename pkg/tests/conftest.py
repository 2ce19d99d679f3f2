import math

import pytest

import cylpot as cp


@pytest.fixture(scope="session")
def arc_small():
    base = cp.build_arc(math.pi, 101)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def arc_fine():
    base = cp.build_arc(math.pi, 2000)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def arc_sym():
    # Odd interior count keeps a fixed node on the reflection axis.
    base = cp.build_arc(math.pi, 2001)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def cap_hemi4():
    base = cp.build_cap(4, math.pi / 2, 2000)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def cap_hemi3():
    base = cp.build_cap(3, math.pi / 2, 2000)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def cap_hemi5():
    base = cp.build_cap(5, math.pi / 2, 2000)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def cap_small():
    base = cp.build_cap(4, 2 * math.pi / 5, 301)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def chain_default():
    base = cp.build_chain(cp.default_chain_spec(), d=4)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def one_node():
    base = cp.build_graph(edges=[], mass=[1.0], dirichlet_leak=[2.5], d=2, b=0.0)
    return base, cp.decompose(base)


@pytest.fixture(scope="session")
def one_node_drift():
    base = cp.build_graph(edges=[], mass=[1.0], dirichlet_leak=[3.0], d=4, b=2.0)
    return base, cp.decompose(base)
