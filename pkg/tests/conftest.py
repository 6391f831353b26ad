import numpy as np
import pytest

from msslab.satake import FormSpec, build_coefficient_table


@pytest.fixture(scope="session")
def synthetic_form():
    return FormSpec(n=3, source="synthetic", seed=1001, theta_assumed=0.0, label="test-n3")


@pytest.fixture(scope="session")
def small_table(synthetic_form):
    """Tempered synthetic n=3 table with M = 2*10^5 (fast to build)."""
    return build_coefficient_table(synthetic_form, 200_000)


@pytest.fixture(scope="session")
def degenerate_table():
    form = FormSpec(n=3, source="degenerate", seed=0, label="ones")
    return build_coefficient_table(form, 50_000)


@pytest.fixture(scope="session")
def unit_table():
    """Table with A(1) = 1 the only nonzero entry below m = 2."""
    form = FormSpec(n=3, source="degenerate", seed=0, label="unit")
    table = build_coefficient_table(form, 1)
    return table
