import itertools
import json
import math

import pytest
from hypothesis import given, strategies as st

from odometer_oe import INFINITY, BaseSequence, InvalidSequence, SupernaturalNumber, chunk_stream, valuation
from odometer_oe.supernatural import is_prime, supernatural_of_prefix


def repeated_division(k, q):
    r = 0
    while k % q == 0:
        k //= q
        r += 1
    return r


@pytest.mark.parametrize("k,q,expected", [(12, 2, 2), (1, 7, 0), (27, 3, 3)])
def test_valuation_examples(k, q, expected):
    assert valuation(k, q) == expected == repeated_division(k, q)


def test_valuation_rejects_bad_input():
    with pytest.raises(ValueError):
        valuation(12, 4)
    with pytest.raises(ValueError):
        valuation(0, 2)


def test_is_prime_matches_sieve():
    limit = 5000
    sieve = [True] * limit
    sieve[0] = sieve[1] = False
    for i in range(2, limit):
        if sieve[i]:
            for j in range(i * i, limit, i):
                sieve[j] = False
    assert [is_prime(i) for i in range(limit)] == sieve


@given(st.integers(1, 10**6), st.integers(1, 10**6), st.sampled_from([2, 3, 5, 7, 11, 13]))
def test_valuation_is_additive(a, b, q):
    assert valuation(a * b, q) == valuation(a, q) + valuation(b, q)


def test_prefix_examples():
    seq = BaseSequence([1, 1, 2, 3, 8, 27])
    sn, flags = supernatural_of_prefix(seq, "odd")
    assert sn == SupernaturalNumber({2: 3}) and flags == {2: "at-least"}
    sn, flags = supernatural_of_prefix(seq, "even")
    assert sn == SupernaturalNumber({3: 3}) and flags == {3: "at-least"}
    for parity in ("odd", "even"):
        assert supernatural_of_prefix(BaseSequence([1, 1]), parity)[0] == SupernaturalNumber()
    assert supernatural_of_prefix(seq, "odd", complete=True)[1] == {2: "exact"}


def test_prefix_is_monotone():
    ks = [1, 1, 2, 3, 8, 27, 224, 6075]
    prev = {}
    for depth in range(0, len(ks) - 1):
        sn, _ = supernatural_of_prefix(BaseSequence(ks[: depth + 2]), "odd")
        assert all(sn[q] >= r for q, r in prev.items())
        prev = sn.as_dict()


def test_chunk_stream_examples():
    assert list(chunk_stream(SupernaturalNumber({2: 2, 3: 1}))) == [2, 3, 2]
    assert list(itertools.islice(chunk_stream(SupernaturalNumber({2: INFINITY})), 5)) == [2] * 5
    both = SupernaturalNumber.parse("2^inf*3^inf")
    assert list(itertools.islice(chunk_stream(both), 6)) == [2, 3, 2, 3, 2, 3]
    # reproducible: a pure function of the number
    assert list(itertools.islice(chunk_stream(both), 6)) == list(itertools.islice(chunk_stream(both), 6))


@given(st.dictionaries(st.sampled_from([2, 3, 5, 7, 11]), st.integers(0, 6), max_size=5))
def test_chunk_stream_product_is_formal_product(exps):
    sn = SupernaturalNumber(exps)
    stream = list(chunk_stream(sn))
    assert math.prod(stream) == sn.value()
    for q, r in sn.exponents:
        assert stream.count(q) == r


def test_supernatural_invariants_and_json():
    with pytest.raises(ValueError):
        SupernaturalNumber({4: 1})
    sn = SupernaturalNumber({2: INFINITY, 3: 2, 5: 0})
    assert sn.as_dict() == {2: INFINITY, 3: 2}
    assert sn.to_json() == {"2": "inf", "3": 2}
    assert SupernaturalNumber.from_json(json.loads(json.dumps(sn.to_json()))) == sn
    assert SupernaturalNumber.parse("2^inf*3^2") == sn
    assert SupernaturalNumber.parse('{"2": "inf", "3": 2}') == sn
    assert sn.admits(2**40 * 9) and not sn.admits(27) and not sn.admits(10)


def test_base_sequence_invariants():
    good = BaseSequence([1, 1, 2, 3, 8, 27])
    assert good.violations() == []
    assert good.k(-1) == good.k(0) == 1 and good.k(4) == 27
    assert BaseSequence.from_json(good.to_json()) == good
    assert good.to_json() == ["1", "1", "2", "3", "8", "27"]
    bad = BaseSequence([1, 1, 2, 3, 4, 27])
    assert "k_{n+1} > k_{n-1}k_n fails at n=2" in bad.violations()
    with pytest.raises(InvalidSequence):
        bad.validate()
    with pytest.raises(InvalidSequence):
        BaseSequence([1, 2, 3])
    assert "k_n | k_{n+2} fails at n=1" in BaseSequence([1, 1, 2, 3, 9]).violations()
