import numpy as np
import pytest

from cornergrowth.suite import CHECKS, property_suite, run_check


@pytest.mark.parametrize("name", list(CHECKS))
def test_each_check_passes_on_random_instances(name):
    tally = run_check(name, 200, seed=3)
    assert tally.violations == 0 and tally.first_failure is None
    assert tally.instances == 200


def test_suite_is_deterministic():
    a = property_suite(20, seed=5)
    b = property_suite(20, seed=5)
    assert a == b
    assert [t.name for t in a] == list(CHECKS)


def test_suite_rejects_unknown_checks():
    with pytest.raises(ValueError):
        property_suite(1, names=["no-such-check"])


def test_checks_take_a_generator():
    rng = np.random.default_rng(0)
    assert all(fn(rng) for fn in CHECKS.values())
