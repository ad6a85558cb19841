import pytest

from prewet import oracle, transfer
from prewet.model import lazy_srw, linear_potential, make_spec


@pytest.fixture(scope="session")
def lazy():
    return lazy_srw()


@pytest.fixture(scope="session")
def lin():
    return linear_potential()


@pytest.fixture(scope="session")
def canonical_spec(lazy, lin):
    """The N=6 bridge every engine is checked against: lazy SRW, V=|x|,
    lambda=0.3, boundary 0 -> 1, K=6."""
    return make_spec(lazy, lin, 0.3, 6, a=0, b=1, K=6, tail_tolerance=1e-6)


@pytest.fixture(scope="session")
def canonical_law(canonical_spec):
    return oracle.enumerate_paths(canonical_spec)


@pytest.fixture(scope="session")
def canonical_tables(canonical_spec):
    return transfer.build_tables(canonical_spec, check_truncation=False)
