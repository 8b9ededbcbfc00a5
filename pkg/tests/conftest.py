import numpy as np
import pytest

from misid_richness.io import WEED_SURVEY, parse_incidence_csv

# Frequency counts of the weed survey, k = 1..12. The singleton count is 19,
# the value consistent with S_obs = 74 in the published estimate table; the
# separate frequency table lists 18 there (and would sum to 73).
WEED_Q = (19, 9, 12, 8, 6, 4, 1, 4, 3, 3, 2, 3)
WEED_Q_TABLE = (18, 9, 12, 8, 6, 4, 1, 4, 3, 3, 2, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def weed_matrix():
    return parse_incidence_csv(WEED_SURVEY)


def pytest_terminal_summary(terminalreporter):
    import sys

    acc = sys.modules.get("test_acceptance")
    if acc is None or not acc.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(acc.RESULTS):
        checks = acc.RESULTS[crit]
        ok = all(c[1] for c in checks)
        failed = [name for name, good, _ in checks if not good]
        tail = f" (failed: {', '.join(failed)})" if failed else ""
        terminalreporter.write_line(
            f"criterion {crit}: {'PASS' if ok else 'FAIL'} [{len(checks)} checks]{tail}"
        )
