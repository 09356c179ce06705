"""Shared fixtures: bundled database assets at two lifetimes.

The session-scoped bundles are for read-only tests (loading and fitting once
keeps the suite fast); anything that mutates a store or its value index must
take the function-scoped ``fresh_*`` variants.
"""

from __future__ import annotations

import pytest

from nlq.dialogue import bundled_assets


@pytest.fixture(scope="session")
def hotel_assets():
    return bundled_assets("hotel")


@pytest.fixture(scope="session")
def products_assets():
    return bundled_assets("products")


@pytest.fixture(scope="session")
def employees_assets():
    return bundled_assets("employees")


@pytest.fixture
def fresh_hotel_assets():
    return bundled_assets("hotel")


@pytest.fixture
def fresh_products_assets():
    return bundled_assets("products")
