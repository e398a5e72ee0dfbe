"""Acceptance battery: every exit criterion at its stated tolerance.

One test per criterion; each prints its pass/fail line so `pytest -v -s`
doubles as the acceptance report.  The same checks back `hslpp verify-all`.
"""

import numpy as np
import pytest

from halfspace_lpp import acceptance


@pytest.mark.parametrize(
    "index,check",
    list(enumerate(acceptance.ALL_CHECKS)),
    ids=[f.__name__ for f in acceptance.ALL_CHECKS],
)
def test_acceptance_criterion(index, check):
    # the seed derivation matches acceptance.run_all, so pytest and the
    # verify-all CLI execute the identical battery
    rng = np.random.default_rng([acceptance.DEFAULT_SEED, index])
    res = check(rng)
    print(res.line())
    assert res.passed, res.details
