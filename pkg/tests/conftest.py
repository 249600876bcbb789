import numpy as np
import pytest

from crashnet.network import FailureSpec, FinancialNetwork


@pytest.fixture
def toy2():
    """Hand-checkable 2-institution network.

    (I - C) = [[1, -0.2], [-0.3, 1]], det 0.94, income D p = (6, 4).
    """
    return FinancialNetwork(
        ownership=np.array([[0.6], [0.4]]),
        cross_holdings=np.array([[0.0, 0.2], [0.3, 0.0]]),
        self_ownership=np.array([0.7, 0.8]),
        prices=np.array([10.0]),
    )


@pytest.fixture
def single():
    """One institution, one asset worth 10: v = D p = 10 exactly."""
    return FinancialNetwork(
        ownership=np.array([[1.0]]),
        cross_holdings=np.array([[0.0]]),
        self_ownership=np.array([1.0]),
        prices=np.array([10.0]),
    )


def random_multilinear(rng, nvars, max_order, density=0.6):
    """Random pseudo-Boolean polynomial for round-trip/gadget tests."""
    from itertools import combinations

    from crashnet.hubo import BinaryPolynomial

    terms = {}
    for order in range(max_order + 1):
        for key in combinations(range(nvars), order):
            if order <= 1 or rng.random() < density:
                terms[frozenset(key)] = float(rng.normal())
    return BinaryPolynomial(terms)
