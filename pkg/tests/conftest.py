"""Shared truncations for fsmodel tests."""

from fractions import Fraction

import pytest

from fsmodel.cdl import Depth, TruncatedCompactum, load_compactum, truncate


def fixture_truncation(
    name: str, depth: str, delta: Fraction = Fraction(1, 16)
) -> TruncatedCompactum:
    return truncate(load_compactum(f"fixture:{name}"), Depth.parse(depth), delta)


@pytest.fixture(scope="session")
def comb8() -> TruncatedCompactum:
    """Comb with eight horizontals and teeth down to denominator 256."""
    return fixture_truncation("comb", "8")


@pytest.fixture(scope="session")
def comb4() -> TruncatedCompactum:
    return fixture_truncation("comb", "4")


@pytest.fixture(scope="session")
def theta() -> TruncatedCompactum:
    return fixture_truncation("theta", "1")


@pytest.fixture(scope="session")
def square() -> TruncatedCompactum:
    return fixture_truncation("square", "1")


@pytest.fixture(scope="session")
def box() -> TruncatedCompactum:
    return fixture_truncation("box", "1")


@pytest.fixture(scope="session")
def cantor6() -> TruncatedCompactum:
    return fixture_truncation("cantor", "6")


@pytest.fixture(scope="session")
def arccomb5() -> TruncatedCompactum:
    return fixture_truncation("arccomb", "5")
