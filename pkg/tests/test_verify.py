import numpy as np
import pytest

from bjlab.verify import COLUMNS, LEMMAS, check_tuple, verify_bounds


@pytest.mark.parametrize("d", [2, 3])
def test_random_tuples_respect_bounds(d):
    rows = verify_bounds(d, trials=10, seed=11)
    assert len(rows) == 10 * len(LEMMAS)
    assert all(r["pass"] for r in rows), [r for r in rows if not r["pass"]]
    assert all(tuple(r) == COLUMNS for r in rows)


def test_bj_tuples_satisfy_hypotheses():
    rng = np.random.default_rng(5)
    for _ in range(10):
        r = check_tuple("bj", 2, rng)
        assert r["R"] >= 2 + 3 * r["absx"]
        assert 8 * (r["R"] + r["absx"]) * r["absxi"] <= 1


def test_rows_are_seeded():
    a = verify_bounds(2, trials=3, seed=4, lemmas=("cos", "wtau_x0"))
    b = verify_bounds(2, trials=3, seed=4, lemmas=("cos", "wtau_x0"))
    assert a == b
    assert verify_bounds(2, trials=3, seed=5, lemmas=("cos",)) != a[:3]


def test_unknown_lemma_rejected():
    with pytest.raises(ValueError, match="unknown lemma"):
        check_tuple("nope", 2, np.random.default_rng(0))
