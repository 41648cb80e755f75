import math

import pytest
from hypothesis import given, strategies as st

from kolmolab.codes import (
    LambdaRecord, MalformedPair, TrailingBits, UnexpectedEnd, decode_lambda,
    encode_lambda, log2_floor, pack_condition, sd_decode, sd_encode,
    unpack_condition,
)

bits = st.text(alphabet="01", max_size=12)


@pytest.mark.parametrize("d, code", [(0, "0001"), (2, "110001"), (5, "11001101")])
def test_sd_encode_examples(d, code):
    assert sd_encode(d) == code


def test_sd_decode_examples():
    assert sd_decode("11001101") == (5, 8)
    assert sd_decode("0001" + "1111") == (0, 4)
    with pytest.raises(MalformedPair):
        sd_decode("10")
    with pytest.raises(UnexpectedEnd):
        sd_decode("1100")


def test_sd_round_trip_to_2_pow_20():
    for d in range(2 ** 20 + 1):
        c = sd_encode(d)
        assert sd_decode(c) == (d, len(c))


def test_sd_length_bound():
    for d in range(1, 4097):
        assert len(sd_encode(d)) <= 2 * math.floor(math.log2(d)) + 4
    assert len(sd_encode(0)) == 4
    # equality exactly at every d >= 1
    assert all(len(sd_encode(d)) == 2 * log2_floor(d) + 4 for d in range(1, 4097))


def test_sd_image_prefix_free():
    # in a sorted list, a prefix of any later word is a prefix of its successor
    words = sorted(sd_encode(d) for d in range(2 ** 12 + 1))
    assert len(set(words)) == len(words)
    for a, b in zip(words, words[1:]):
        assert not b.startswith(a)


@given(st.integers(min_value=0, max_value=10 ** 9), bits)
def test_sd_decode_leaves_trailing_bits(d, tail):
    c = sd_encode(d)
    assert sd_decode(c + tail) == (d, len(c))


def test_pack_examples():
    assert pack_condition(["01"]) == "01"
    assert pack_condition(["01", "1"]) == "1100010111011"
    assert pack_condition([]) == ""


def test_unpack_examples():
    assert unpack_condition("1100010111011", 2) == ["01", "1"]
    assert unpack_condition("01", 1) == ["01"]
    with pytest.raises(UnexpectedEnd):
        unpack_condition("01", 2)
    with pytest.raises(TrailingBits):
        unpack_condition("1100010111011" + "0", 2)


@given(st.lists(bits, min_size=0, max_size=4))
def test_pack_round_trip(items):
    assert unpack_condition(pack_condition(items), len(items)) == items


def test_encode_lambda_examples():
    assert encode_lambda(LambdaRecord(0, 6, 6, 2, 0)) == "0001" + "11110001" + "11110001" + "110001" + "0"
    assert len(encode_lambda(LambdaRecord(0, 6, 6, 2, 0))) == 27
    assert encode_lambda(LambdaRecord(0, 0, 0, 1, 0)) == "0001" * 3 + "1101" + "0"
    r = LambdaRecord(3, 10, 9, 4, 1)
    assert decode_lambda(encode_lambda(r)) == (r, len(encode_lambda(r)))


def test_decode_lambda_trailing_and_truncated():
    r = LambdaRecord(3, 10, 9, 4, 1)
    code = encode_lambda(r)
    got, used = decode_lambda(code + "0101")
    assert got == r and used == len(code) and (code + "0101")[used:] == "0101"
    with pytest.raises(UnexpectedEnd):
        decode_lambda(code[:-1])
    with pytest.raises(UnexpectedEnd):
        decode_lambda("0001")


records = st.builds(LambdaRecord, st.integers(0, 300), st.integers(0, 300),
                    st.integers(0, 300), st.integers(1, 300), st.integers(0, 1))


@given(records)
def test_lambda_round_trip_and_length(r):
    code = encode_lambda(r)
    assert decode_lambda(code) == (r, len(code))
    lg = log2_floor
    assert len(code) == sum(2 * lg(v) + 4 for v in (r.delta_n, r.t_x, r.t_y, r.w)) + 1
    assert len(code) <= 2 * lg(r.w) + 2 * lg(r.t_x) + 2 * lg(r.t_y) + 2 * lg(r.delta_n) + 17


@given(records, records)
def test_lambda_injective(r1, r2):
    if r1 != r2:
        assert encode_lambda(r1) != encode_lambda(r2)


@given(records, st.integers(0, 3))
def test_lambda_length_monotone_in_field_width(r, which):
    fields = [r.delta_n, r.t_x, r.t_y, r.w]
    bigger = list(fields)
    bigger[which] = 2 * fields[which] + 1
    r2 = LambdaRecord(*bigger, r.b)
    assert len(encode_lambda(r2)) >= len(encode_lambda(r))


def test_lambda_rejects_nonpositive_w():
    with pytest.raises(ValueError):
        LambdaRecord(0, 1, 1, 0, 0)
