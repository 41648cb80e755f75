import pytest
from hypothesis import given, strategies as st

from kolmolab.complexity import (
    ABOVE_BOUND, ComplexityTable, TableKey, TableStore, all_strings,
)
from kolmolab.machine import MachineConfig, Mode
from kolmolab.lambalgen import (
    DecoderCostModel, EmptyQualifyingSet, WrongIndexWidth, accounting_length,
    compute_d0, deficiency_sets, p1_candidates, p1_decode, p2_decode,
    plain_random_strings, structural_checks, verify_theorem2, verify_theorem3,
    weak_k_random_strings,
)
from kolmolab.soi import Bounds, Lab, RankOutOfRange


class SyntheticTable(ComplexityTable):
    """Hand-written table; not produced by the machine, so exempt from its counting bound."""


class FakeStore(TableStore):
    """Hand-built tables keyed by condition; anything else is empty."""

    def __init__(self, tables):
        super().__init__()
        self.tables = tables

    def get(self, condition, mode, max_len, cfg=None):
        key = TableKey(condition, Mode(mode), max_len, cfg or MachineConfig(mode))
        return SyntheticTable(key, self.tables.get(condition, {}))


def fake_lab(pairs, max_len=4):
    """Prefix-free lab at n = 2 whose K(.|n) table is ``pairs``."""
    return Lab(Bounds(max_len=max_len), Mode.PREFIX_FREE, FakeStore({"10": pairs}))


def test_compute_d0_examples():
    assert compute_d0(2, DecoderCostModel(10, 12)) == 36
    assert compute_d0(0) == 2 * (4 + 16)
    with pytest.raises(ValueError):
        compute_d0(-1)


@given(st.integers(0, 200), st.integers(0, 100), st.integers(0, 100))
def test_compute_d0_properties(c, c1, c2):
    d0 = compute_d0(c, DecoderCostModel(c1, c2))
    assert d0 % 2 == 0
    assert d0 == compute_d0(c, DecoderCostModel(c2, c1))
    assert d0 >= 2 * (c + 4)


def test_accounting_length():
    assert accounting_length(8, 1, 16) == 7 + 0 + 4 + 16
    assert accounting_length(8, 4, 0) == 4 + 4 + 4


def test_random_strings_real_machine():
    b = Bounds.covering(3)
    assert plain_random_strings(3, 3, b) == all_strings(3)
    strict = plain_random_strings(3, 0, b)
    assert strict == [x for x in all_strings(3) if Lab(b).given_len(x, 3) >= 3]
    assert set(strict) <= set(plain_random_strings(3, 1, b))
    pf = weak_k_random_strings(3, 0, Bounds.covering(3, Mode.PREFIX_FREE))
    assert pf == all_strings(3)
    with pytest.raises(ValueError):
        plain_random_strings(3, -1, b)
    with pytest.raises(ValueError):
        weak_k_random_strings(3, -1, b)


def test_above_bound_counts_as_random():
    lab = Lab(Bounds(max_len=0))
    assert plain_random_strings(3, 0, lab) == all_strings(3)


def test_p2_decoder_on_synthetic_table():
    lab = fake_lab({"0000": 1, "0001": 1, "0100": 3})
    ds = deficiency_sets(2, 1, lab)
    assert ds.A["00"] == ["00", "01"] and ds.A["01"] == ["00"]
    assert ds.F == ["00"] and ds.pair_count == 3
    assert p2_decode(2, 1, "0", lab) == "00"
    with pytest.raises(RankOutOfRange):
        p2_decode(2, 1, "1", lab)
    with pytest.raises(WrongIndexWidth):
        p2_decode(2, 1, "00", lab)
    with pytest.raises(WrongIndexWidth):
        p2_decode(2, 3, "", lab)


def test_p1_decoder_on_synthetic_table():
    lab = fake_lab({"0000": 1, "0001": 2, "0010": 3})
    assert p1_candidates("00", 1, lab) == ["00", "01"]
    assert p1_decode("00", 1, "1", lab) == "01"
    assert p1_candidates("11", 1, lab) == []
    with pytest.raises(RankOutOfRange):
        p1_decode("11", 1, "0", lab)
    with pytest.raises(WrongIndexWidth):
        p1_decode("00", 1, "", lab)


def test_F_is_not_nested_in_general():
    # one pair per row: u joins F(d) only once 2^d >= 2^n
    lab = fake_lab({"1011": 0})
    assert deficiency_sets(2, 1, lab).F == []
    assert deficiency_sets(2, 2, lab).F == ["10"]
    rep = structural_checks(2, [0], lab, DecoderCostModel())
    assert rep.summary["F_nesting_breaks"] >= 1
    assert rep.passed


def test_case_b_reached_on_synthetic_table():
    # x = 00 has three cheap partners; y = 10 sits beyond the 1-bit p1 index
    lab = fake_lab({"0000": 2, "0001": 2, "0010": 2})
    rep = structural_checks(2, [0], lab, DecoderCostModel())
    cases = rep.summary["cases"]
    assert cases["b"] >= 1 and cases["b_x_in_F"] == cases["b"]
    assert cases["b_p2_decodable"] >= 1
    assert rep.passed


def test_structural_checks_have_teeth():
    # free decoders make both guards hold, which the table above contradicts
    lab = fake_lab({"0000": 2, "0001": 2, "0010": 2})
    rep = structural_checks(2, [0], lab, DecoderCostModel(-40, -40))
    assert not rep.passed
    assert any("p1 describes" in f for f in rep.failures)
    assert any("both guards" in f for f in rep.failures)


def test_program_counting_violation_detected():
    lab = fake_lab({u + v: 0 for u in all_strings(2) for v in all_strings(2)})
    rep = structural_checks(2, [0], lab, DecoderCostModel())
    assert any("program counting" in f for f in rep.failures)


def test_theorem2_n3_fit():
    rep = verify_theorem2(3, range(0, 4), Bounds.covering(6))
    assert rep.summary["fit"] == [0.0, -1.0]
    assert all(r["D"] == -1 for r in rep.records)
    assert verify_theorem2(3, range(0, 4), Bounds.covering(6), pin=(0.0, -1.0)).passed


def test_theorem2_empty_qualifying():
    store = FakeStore({})
    lab = Lab(Bounds(max_len=0), Mode.PLAIN, store)
    # everything is above bound, hence random; a zero bound keeps D defined
    rep = verify_theorem2(1, [0], lab)
    assert rep.records[0]["qualifying_pairs"] == 4

    class NoneRandom(FakeStore):
        def get(self, condition, mode, max_len, cfg=None):
            key = TableKey(condition, Mode(mode), max_len, cfg or MachineConfig(mode))
            return SyntheticTable(key, {s: 0 for n in range(3) for s in all_strings(n)})

    with pytest.raises(EmptyQualifyingSet):
        verify_theorem2(2, [0], Lab(Bounds(max_len=4), Mode.PLAIN, NoneRandom({})))


def test_theorem3_structural_n3():
    rep = verify_theorem3(3, range(0, 4), Bounds.covering(6, Mode.PREFIX_FREE))
    s = rep.summary["structural"]
    assert s["violations"] == 0
    # at this scale F(d) is empty for every d and only case (a) occurs
    assert s["p2_round_trips"] == 0 and s["p1_round_trips"] == 72
    assert s["cases"]["a"] == 768 and s["cases"]["b"] == 0
    assert rep.summary["fit"] == [0.0, -5.0]
    assert rep.passed
