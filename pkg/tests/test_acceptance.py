"""Spec acceptance criteria 1-11. Each test prints one PASS/FAIL line (also repeated in the run summary).

Criterion 7 is asserted literally and is expected to fail: toric L=5 has no
pair of plaquettes with disjoint Gamma^(4) balls, and the per-sample 99%
weight threshold does not hold at this size (see /root/notes/decisions.md).
"""
import time

import pytest
from threadpoolctl import threadpool_limits

from ssexpand import experiments

SEED = 0
_RESULTS: dict[int, experiments.Experiment] = {}
_TIMES: dict[int, float] = {}
BUDGET_S = {1: 10, 2: 60, 3: 300, 4: 600, 5: 120, 6: 900, 7: 1800, 8: 1, 9: 300, 10: 1200}


def _run(number: int) -> tuple[experiments.Experiment, float]:
    t0 = time.perf_counter()
    exp = experiments.run(number, seed=SEED, workers=1)
    elapsed = time.perf_counter() - t0
    _RESULTS[number] = exp
    _TIMES[number] = elapsed
    return exp, elapsed


@pytest.mark.parametrize("number", range(1, 11))
def test_criterion(number, criterion):
    exp, elapsed = _run(number)
    in_time = elapsed < BUDGET_S[number]
    criterion(number, exp.passed and in_time, f"{exp.detail} [{elapsed:.1f}s, budget {BUDGET_S[number]}s]")
    assert exp.passed, exp.detail
    assert in_time, f"took {elapsed:.1f}s, budget {BUDGET_S[number]}s"


def test_criterion_11_determinism(criterion):
    mismatched = []
    t_rerun = 0.0
    for number in experiments.RANDOMIZED:
        if number not in _RESULTS:
            _run(number)
    experiments.css_suite.cache_clear()  # the rerun regenerates the random CSS suite too
    t_ref = sum(_TIMES[n] for n in experiments.RANDOMIZED)
    for number in experiments.RANDOMIZED:
        t0 = time.perf_counter()
        with threadpool_limits(8):
            again = experiments.run(number, seed=SEED, workers=8)
        t_rerun += time.perf_counter() - t0
        if again.canonical() != _RESULTS[number].canonical():
            mismatched.append(number)
    in_time = t_rerun < 2 * t_ref
    ok = not mismatched and in_time
    criterion(11, ok, f"criteria {list(experiments.RANDOMIZED)} rerun with 8 workers: "
                      f"{'byte-identical' if not mismatched else f'mismatch in {mismatched}'} "
                      f"[rerun {t_rerun:.1f}s vs reference {t_ref:.1f}s, budget 2x]")
    assert not mismatched, mismatched
    assert in_time
