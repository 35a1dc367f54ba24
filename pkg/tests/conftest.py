import pytest

from fareyquot.projections import derive_constants
from fareyquot.quotient import build_ball
from fareyquot.rewriting import knuth_bendix, presentation_sl2


@pytest.fixture(scope="session")
def oracle7():
    return knuth_bendix(presentation_sl2(7), max_rules=20000)


@pytest.fixture(scope="session")
def ledger7():
    return derive_constants(2, K=7, bgitC=3, lox_bounds=(2, 2),
                            theta_provenance="derived-by-search (doubled)")


@pytest.fixture(scope="session")
def ball7(oracle7):
    return build_ball(oracle7, 5)
