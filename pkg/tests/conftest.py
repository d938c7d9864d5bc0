import pytest

from brentlab.acceptance import AcceptanceContext


@pytest.fixture(scope="session")
def ctx():
    return AcceptanceContext()


@pytest.fixture(scope="session")
def solved_xi(ctx):
    return ctx.xi


@pytest.fixture(scope="session")
def xi(solved_xi):
    return solved_xi[0]


@pytest.fixture(scope="session")
def solved_F(ctx):
    return ctx.F


@pytest.fixture(scope="session")
def F(solved_F):
    return solved_F[0]
