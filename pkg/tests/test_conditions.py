import json
import math
from itertools import permutations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from taulab import matgroup
from taulab.algebra import LaurentPoly, Scalar, det, poly_det
from taulab.conditions import (
    ArrayFormatError,
    CoefficientArray,
    Condition,
    condition_eval,
    conjugate,
    moment_matrix,
    pair_variables,
    product_condition_eval,
    random_array,
    shift,
    shift_field_expand,
)
from taulab.tau import tau_hankel

ZW = ("z", "w")


def mono(k, l, c=1):
    return LaurentPoly.monomial(ZW, (k, l), c)


class TestShift:
    def test_zero_shift_is_identity(self):
        arr = random_array(2, 1)
        assert shift(arr, (1, 0), 0, 0) == arr

    def test_singleton_relabel(self):
        q = Scalar(5, 3)
        arr = CoefficientArray.from_block({(0, 0): q})
        assert shift(arr, "10", 1, 0).blocks[(1, 0)] == {(-1, 0): q}

    def test_unknown_block(self):
        with pytest.raises(KeyError):
            shift(random_array(2, 0), (2, 0), 1, 0)

    @given(st.integers(0, 50), st.tuples(*[st.integers(-3, 3)] * 4))
    def test_is_an_action(self, seed, s):
        arr = random_array(3, seed, (2, 2))
        a, b, c, d = s
        assert shift(shift(arr, (2, 1), a, b), (2, 1), c, d) == shift(arr, (2, 1), a + c, b + d)

    @given(st.integers(0, 200), st.integers(0, 3), st.integers(-2, 2), st.integers(-2, 2))
    def test_shifted_hankel(self, seed, k, alpha, beta):
        """Shifting the block by (-beta, alpha) turns the plain Hankel determinant into the shifted one."""
        arr = random_array(2, seed, (3, 3))
        assert tau_hankel(shift(arr, (1, 0), -beta, alpha), k) == tau_hankel(arr, k, alpha, beta)

    def test_conjugation_moves_indices(self):
        arr = CoefficientArray(3, {(1, 0): {(0, 0): 1}, (2, 0): {(0, 0): 2}, (2, 1): {(0, 0): 3}})
        out = conjugate(arr, (1, 0, 0))
        # the translation of component 0 raises j in blocks sourced at 0
        assert out.blocks[(1, 0)] == {(0, -1): 1}
        assert out.blocks[(2, 0)] == {(0, -1): 2}
        assert out.blocks[(2, 1)] == {(0, 0): 3}
        out = conjugate(arr, (0, 0, 1))
        assert out.blocks[(2, 0)] == {(1, 0): 2}
        assert out.blocks[(2, 1)] == {(1, 0): 3}


class TestConditions:
    arr = random_array(2, 3, (3, 3))
    c = Condition(arr)

    def test_constant(self):
        assert condition_eval(self.c, mono(0, 0)) == self.arr.get((1, 0), 0, 0)

    def test_negative_moment(self):
        assert condition_eval(self.c, mono(-1, 1)) == 0

    def test_linearity_example(self):
        f = mono(1, 2, 2) + mono(3, 0)
        assert condition_eval(self.c, f) == 2 * self.arr.get((1, 0), 1, 2) + self.arr.get((1, 0), 3, 0)

    def test_negative_raw_entries_cut(self):
        arr = CoefficientArray.from_block({(-1, 0): 4, (0, 0): 1})
        assert condition_eval(Condition(arr), mono(-1, 0)) == 0

    @given(st.integers(3, 6), st.integers(0, 6))
    def test_outside_support_vanishes(self, k, l):
        assert condition_eval(self.c, mono(k, l) + mono(l, k)) == 0

    @given(st.dictionaries(st.tuples(st.integers(-1, 3), st.integers(-1, 3)), st.integers(-5, 5), max_size=5),
           st.dictionaries(st.tuples(st.integers(-1, 3), st.integers(-1, 3)), st.integers(-5, 5), max_size=5))
    def test_linear(self, f, g):
        f, g = LaurentPoly(ZW, f), LaurentPoly(ZW, g)
        assert condition_eval(self.c, f + g) == condition_eval(self.c, f) + condition_eval(self.c, g)

    def test_needs_one_pair(self):
        with pytest.raises(ValueError):
            condition_eval(self.c, LaurentPoly.constant(pair_variables(2)))


class TestProductConditions:
    arr = random_array(2, 11, (4, 4))

    def test_single_factor_reduces(self):
        f = mono(1, 2, 3) + mono(0, 0)
        assert product_condition_eval([Condition(self.arr)], f) == condition_eval(Condition(self.arr), f)

    def test_monomial(self):
        V = pair_variables(2)
        f = LaurentPoly.monomial(V, {"z1": 1, "w1": 1, "z2": 2})
        c = self.arr.blocks[(1, 0)]
        assert product_condition_eval([Condition(self.arr)] * 2, f) == c[(1, 1)] * c[(2, 0)]

    def test_count_mismatch(self):
        with pytest.raises(ValueError):
            product_condition_eval([Condition(self.arr)], LaurentPoly.constant(pair_variables(2)))

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_vandermonde_moments(self, k):
        """prod c_i (det V_z det V_w) = k! det of the moment matrix."""
        V = pair_variables(k)
        zs, ws = V[0::2], V[1::2]
        vz = poly_det([[LaurentPoly.monomial(V, {z: r}) for z in zs] for r in range(k)])
        vw = poly_det([[LaurentPoly.monomial(V, {w: r}) for w in ws] for r in range(k)])
        lhs = product_condition_eval([Condition(self.arr)] * k, vz * vw)
        assert lhs == math.factorial(k) * det(moment_matrix(self.arr, k))
        assert det(moment_matrix(self.arr, k)) == tau_hankel(self.arr, k)

    def test_two_point_expansion(self):
        V = pair_variables(2)
        vz = LaurentPoly.monomial(V, {"z2": 1}) - LaurentPoly.monomial(V, {"z1": 1})
        vw = LaurentPoly.monomial(V, {"w2": 1}) - LaurentPoly.monomial(V, {"w1": 1})
        c = self.arr.blocks[(1, 0)]
        expect = 2 * (c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)])
        assert product_condition_eval([Condition(self.arr)] * 2, vz * vw) == expect

    @given(st.integers(0, 100), st.permutations(range(3)),
           st.dictionaries(st.tuples(*[st.integers(0, 2)] * 6), st.integers(-3, 3), max_size=6))
    def test_permutation_symmetric(self, seed, perm, terms):
        arr = random_array(3, seed, (3, 3))
        cs = [Condition(arr, b) for b in ((1, 0), (2, 0), (2, 1))]
        V = pair_variables(3)
        f = LaurentPoly(V, terms)
        permuted = {}
        for exps, c in f.terms.items():
            new = [0] * 6
            for dst, src in enumerate(perm):
                new[2 * dst], new[2 * dst + 1] = exps[2 * src], exps[2 * src + 1]
            permuted[tuple(new)] = c
        g = LaurentPoly(V, permuted)
        assert product_condition_eval([cs[p] for p in perm], g) == product_condition_eval(cs, f)


def field_det(arr, k, zfield, wfield, order):
    """The determinant of the moment matrix with every entry replaced by its two-variable shift-field series."""
    rows = [[LaurentPoly.zero(ZW) for _ in range(k)] for _ in range(k)]
    for m, am in shift_field_expand(arr, (1, 0), zfield[0], zfield[1], order):
        for p, amp in shift_field_expand(am, (1, 0), wfield[0], wfield[1], order):
            for i in range(k):
                for j in range(k):
                    v = amp.get((1, 0), j, i)
                    if v:
                        rows[i][j] = rows[i][j] + mono(-m, -p, v)
    return LaurentPoly.constant(ZW) if k == 0 else poly_det(rows)


class TestShiftFields:
    arr = random_array(2, 5, (3, 3))

    def test_plus_has_two_terms(self):
        for order in (1, 2, 5):
            terms = shift_field_expand(self.arr, (1, 0), (1, 0), "+", order)
            assert [m for m, _ in terms] == [0, 1]
            assert terms[1][1] == shift(self.arr, (1, 0), 1, 0).scaled(-1)

    def test_minus_order_zero(self):
        assert shift_field_expand(self.arr, (1, 0), (0, 1), "-", 0) == [(0, self.arr)]

    def test_minus_order_two(self):
        terms = shift_field_expand(self.arr, (1, 0), (1, 0), "-", 2)
        assert [m for m, _ in terms] == [0, 1, 2]
        assert terms[2][1] == shift(self.arr, (1, 0), 2, 0)

    def test_negative_order(self):
        with pytest.raises(ValueError):
            shift_field_expand(self.arr, (1, 0), (1, 0), "-", -1)

    @pytest.mark.parametrize("direction", [(1, 0), (0, 1), (-1, 0), (0, -1)])
    def test_plus_inverts_minus(self, direction):
        """Coefficients of (1 - S/y)(sum S^m y^-m) vanish at every order 1..N."""
        order = 4
        plus = dict(shift_field_expand(self.arr, (1, 0), direction, "+", order))
        minus = dict(shift_field_expand(self.arr, (1, 0), direction, "-", order))
        for m in range(1, order + 1):
            head = minus[m].blocks[(1, 0)]
            tail = shift(minus[m - 1], (1, 0), *direction).scaled(-1).blocks[(1, 0)]
            assert plus[1] == shift(CoefficientArray(2, {(1, 0): self.arr.blocks[(1, 0)]}), (1, 0), *direction).scaled(-1)
            total = {key: head.get(key, 0) + tail.get(key, 0) for key in set(head) | set(tail)}
            assert not any(total.values())

    @pytest.mark.parametrize("seed", range(4))
    def test_fields_reproduce_gauss_coefficients(self, seed):
        """h10 and h01 coefficients come from shift fields applied to neighbouring taus."""
        arr = random_array(2, seed, (3, 3))
        for k in (1, 2):
            t = tau_hankel(arr, k)
            if not t:
                continue
            h = matgroup.h_table(arr, (k,), (0, 0))
            up = field_det(arr, k + 1, ((1, 0), "-"), ((0, 1), "-"), 2)
            down = field_det(arr, k - 1, ((1, 0), "+"), ((0, 1), "+"), 2)
            for i in range(3):
                for j in range(3):
                    assert h.get(1, 0, i, j) == up.coefficient({"z": -i, "w": -j}) / t
                    assert h.get(0, 1, i, j) == down.coefficient({"w": -i, "z": -j}) / t


class TestJson:
    def test_roundtrip(self):
        arr = random_array(3, 9, (2, 3))
        assert CoefficientArray.from_json(arr.to_json()) == arr

    def test_byte_stable(self):
        a = random_array(2, 7, (3, 3))
        text = a.to_json()
        assert CoefficientArray.from_json(text).to_json() == text

    def test_sorted_layout(self):
        obj = json.loads(random_array(3, 1, (2, 2)).to_json())
        assert [b["pair"] for b in obj["blocks"]] == ["10", "20", "21"]
        ij = [(e["i"], e["j"]) for e in obj["blocks"][0]["entries"]]
        assert ij == sorted(ij)

    @pytest.mark.parametrize("text", [
        "not json",
        '{"n": 2}',
        '{"n": 1, "blocks": []}',
        '{"n": 2, "blocks": [{"pair": "10", "entries": [{"i": 0.5, "j": 0, "num": 1, "den": 1}]}]}',
        '{"n": 2, "blocks": [{"pair": "01", "entries": []}]}',
        '{"n": 2, "blocks": [{"pair": "10", "entries": [{"i": 0, "j": 0, "num": 1, "den": 0}]}]}',
        '{"n": 2, "loop": true, "blocks": []}',
    ])
    def test_malformed(self, text):
        with pytest.raises(ArrayFormatError):
            CoefficientArray.from_json(text)

    def test_upper_blocks_rejected(self):
        with pytest.raises((ValueError, KeyError)):
            CoefficientArray(2, {(0, 1): {(0, 0): 1}})
