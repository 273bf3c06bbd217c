"""Every acceptance check at its stated tolerance, one PASS/FAIL line each.

Checks known to miss their target are marked strict xfail: they must keep
failing for the suite to stay green, so a silent fix or regression shows up.
The analysis of each miss lives in the decision log next to the package.
"""
import pytest

from gkpforge import validation as V

KNOWN_MISSES = {
    "c07x": "row-4 literal protocol heralds with probability ~1e-16, far below the 0.4% target",
    "c09": "at g=4 a finite comb reaches 0.73/0.96, below 0.97/0.99 (passes at g=sqrt(pi/2), see c09b)",
    "c10": "sigma=30 comb gives 0.997, above the 0.98 +- 0.01 band (0.98 is reached near sigma=11)",
    "c12": "delta-optimized |0> fidelity peaks at Ne=2 then falls as the envelope turns anisotropic",
}


def _params():
    out = []
    for cid, name, tier, _ in V.CHECKS:
        marks = [pytest.mark.slow] if tier == "extended" else []
        if cid in KNOWN_MISSES:
            marks.append(pytest.mark.xfail(reason=KNOWN_MISSES[cid], strict=True))
        out.append(pytest.param(cid, id=f"{cid}-{name}", marks=marks))
    return out


@pytest.mark.parametrize("cid", _params())
def test_acceptance(cid, acceptance_log):
    result = V.run_check(cid)
    line = V.format_result(result)
    print(line)
    acceptance_log.append(line)
    assert result.passed, line
