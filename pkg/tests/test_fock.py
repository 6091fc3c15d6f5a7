import random
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from taulab.algebra import Scalar, det, vandermonde, vandermonde_product
from taulab.conditions import CoefficientArray, random_array
from taulab.fock import (
    FockVector,
    Window,
    WindowOverflow,
    annihilate,
    apply_group_element,
    correlation,
    create,
    field_at,
    pairing,
    q_op,
    t_op,
    tau_fock,
    tau_fock_many,
    translation_degree,
    translation_vacuum,
    wedge_op,
)

from fock_helpers import apply_word, random_vector, random_word

seeds = st.integers(0, 10_000)
W2 = Window(2, 4)
W3 = Window(3, 4)


def e(v, a, k, b, l):
    """The Lie algebra generator ``E_ab^{k,l}`` acting as create(a, k) after annihilate(b, l)."""
    return create(annihilate(v, b, l), a, k)


class TestWedges:
    def test_create_present_factor(self):
        assert create(FockVector.vacuum(W2), 0, 0).is_zero()

    def test_annihilate_then_create(self):
        v0 = FockVector.vacuum(W2)
        assert create(annihilate(v0, 0, 0), 0, 0) == v0

    def test_out_of_window(self):
        with pytest.raises(WindowOverflow):
            create(FockVector.vacuum(W2), 0, -5)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            wedge_op(FockVector.vacuum(W2), 0, 0, "swap")

    def test_orthonormal(self):
        v0 = FockVector.vacuum(W2)
        other = create(v0, 1, -1)
        assert pairing(v0, v0) == 1
        assert pairing(v0, other) == 0
        assert pairing(other, other) == 1

    @pytest.mark.parametrize("win", [W2, Window(3, 2)])
    def test_clifford_relations(self, win):
        labels = [(a, k) for a in range(win.n) for k in range(-win.K, win.K)]
        vecs = [random_vector(win, s) for s in range(3)]
        for v in vecs:
            for (a, k), (b, l) in product(labels, repeat=2):
                anti = create(annihilate(v, b, l), a, k) + annihilate(create(v, a, k), b, l)
                assert anti == (v if (a, k) == (b, l) else FockVector(win, {}))
                assert (create(create(v, b, l), a, k) + create(create(v, a, k), b, l)).is_zero()
                assert (annihilate(annihilate(v, b, l), a, k) + annihilate(annihilate(v, a, k), b, l)).is_zero()

    @given(seeds, seeds, st.integers(0, 1), st.integers(-4, 3))
    def test_adjointness(self, s1, s2, a, k):
        v, w = random_vector(W2, s1), random_vector(W2, s2)
        assert pairing(create(v, a, k), w) == pairing(v, annihilate(w, a, k))

    @given(seeds, seeds)
    def test_grading(self, s1, s2):
        v, w = random_vector(W3, s1, terms=1), random_vector(W3, s2, terms=1)
        if v.degrees() != w.degrees():
            assert pairing(v, w) == 0

    def test_operator_degrees(self):
        v0 = FockVector.vacuum(W3)
        assert create(v0, 2, -1).degrees() == {(0, 0, 1)}
        assert annihilate(v0, 1, 0).degrees() == {(0, -1, 0)}


class TestTranslations:
    def test_q_zero_is_identity(self):
        v = random_vector(W2, 1)
        assert q_op(v, 1, 0) == v

    @pytest.mark.parametrize("a", [0, 1, 2])
    @pytest.mark.parametrize("k", [-3, -2, -1, 1, 2, 3])
    def test_q_power_on_vacuum(self, a, k):
        """Positive powers stack creators below zero, negative ones remove the lowest nonnegative labels."""
        win = Window(3, 5)
        v0 = FockVector.vacuum(win)
        if k > 0:
            word = [("create", a, -l) for l in range(k, 0, -1)]
        else:
            word = [("annihilate", a, l - 1) for l in range(-k, 0, -1)]
        assert q_op(v0, a, k) == apply_word(v0, word)

    @pytest.mark.parametrize("beta,gamma", [(b, g) for b in range(-2, 3) for g in range(-2, 3)])
    def test_two_component_vacuum_product(self, beta, gamma):
        win = Window(2, 5)
        v0 = FockVector.vacuum(win)

        def stack(a, m):
            if m >= 0:
                return [("create", a, -l) for l in range(m, 0, -1)]
            return [("annihilate", a, l - 1) for l in range(-m, 0, -1)]

        expect = apply_word(v0, stack(1, beta) + stack(0, gamma))
        assert q_op(q_op(v0, 0, gamma), 1, beta) == expect
        sign = -1 if (beta * gamma) % 2 else 1
        assert q_op(q_op(v0, 0, gamma), 1, beta) == apply_word(v0, stack(0, gamma) + stack(1, beta)).scale(sign)

    @given(seeds, seeds, st.integers(0, 2), st.integers(-2, 2))
    def test_q_unitary(self, s1, s2, a, m):
        win = Window(3, 5)
        v, w = random_vector(win, s1, reach=2), random_vector(win, s2, reach=2)
        assert pairing(q_op(v, a, m), w) == pairing(v, q_op(w, a, -m))

    @given(seeds, seeds, st.integers(1, 2), st.integers(-2, 2))
    def test_t_unitary(self, s1, s2, i, m):
        win = Window(3, 6)
        v, w = random_vector(win, s1, reach=2), random_vector(win, s2, reach=2)
        assert pairing(t_op(v, i, m), w) == pairing(v, t_op(w, i, -m))

    @given(seeds, st.integers(0, 2), st.integers(0, 2))
    def test_q_anticommute(self, seed, a, b):
        v = random_vector(Window(3, 5), seed, reach=2)
        lhs = q_op(q_op(v, b, 1), a, 1)
        rhs = q_op(q_op(v, a, 1), b, 1)
        assert lhs == (rhs if a == b else rhs.scale(-1))

    @given(seeds, st.integers(1, 2), st.integers(0, 2), st.sampled_from([1, -1]))
    def test_t_commutes_or_anticommutes_with_q(self, seed, i, b, m):
        v = random_vector(Window(3, 6), seed, reach=2)
        lhs = t_op(q_op(v, b, m), i, 1)
        rhs = q_op(t_op(v, i, 1), b, m)
        if b in (i, i - 1):
            assert lhs == rhs.scale(-1)
        else:
            assert lhs == rhs

    @pytest.mark.parametrize("m", [-3, -2, -1, 0, 1, 2, 3])
    @pytest.mark.parametrize("i", [1, 2])
    def test_t_power_formula(self, i, m):
        win = Window(3, 7)
        v = random_vector(win, 17 + m, reach=2)
        sign = -1 if (m * (m - 1) // 2) % 2 else 1
        assert t_op(v, i, m) == q_op(q_op(v, i - 1, -m), i, m).scale(sign)

    @given(seeds, st.integers(0, 1), st.integers(0, 1), st.integers(-3, 2), st.sampled_from(["create", "annihilate"]))
    def test_field_translation_commutation(self, seed, a, b, k, kind):
        """Coefficientwise: a fermion of the translated component moves one power, others anticommute."""
        win = Window(2, 6)
        v = random_vector(win, seed, reach=2)
        lhs = wedge_op(q_op(v, b, 1), a, k, kind)
        if a == b:
            rhs = q_op(wedge_op(v, a, k + 1, kind), b, 1)
        else:
            rhs = q_op(wedge_op(v, a, k, kind), b, 1).scale(-1)
        assert lhs == rhs

    @pytest.mark.parametrize("kind,power", [("+", 1), ("-", -1)])
    def test_fields_at_points(self, kind, power):
        """<w, psi(z) Q v> = z^(+-1) <Q^-1 w, psi(z) v> with fields summed at a rational point."""
        win = Window(2, 6)
        z = Scalar(3, 2)
        for seed in range(4):
            v, w = random_vector(win, seed, reach=2), random_vector(win, seed + 50, reach=2)
            lhs = pairing(w, field_at(q_op(v, 0, 1), 0, z, kind))
            rhs = pairing(q_op(w, 0, -1), field_at(v, 0, z, kind)) * z ** power
            assert lhs == rhs
            other = pairing(w, field_at(q_op(v, 1, 1), 0, z, kind))
            assert other == -pairing(q_op(w, 1, -1), field_at(v, 0, z, kind))

    def test_translation_vacuum(self):
        assert translation_vacuum(3, [0, 0]) == FockVector.vacuum(Window(3, 2))
        win = Window(2, 4)
        t = translation_vacuum(2, [1], win)
        assert t == q_op(q_op(FockVector.vacuum(win), 0, -1), 1, 1)
        for k in range(4):
            t = translation_vacuum(2, [k], Window(2, 6))
            assert pairing(t, t) == 1 and len(t.terms) == 1

    def test_translation_order(self):
        """T^k v0 is T_1^k1 ... T_{n-1}^k_{n-1} v0 with the rightmost factor applied first."""
        win = Window(3, 6)
        v0 = FockVector.vacuum(win)
        assert translation_vacuum(3, [1, 2], win) == t_op(t_op(v0, 2, 2), 1, 1)

    @pytest.mark.parametrize("kv,deg", [([1], (-1, 1)), ([2], (-2, 2)), ([1, 0], (-1, 1, 0)), ([0, 1], (0, -1, 1)), ([2, 1], (-2, 1, 1))])
    def test_translation_degree(self, kv, deg):
        assert translation_degree(len(kv) + 1, kv) == deg


def field_word(win, comp, kind, points):
    """psi(z_k) ... psi(z_1) v0 with z_1 acting first."""
    v = FockVector.vacuum(win)
    for z in points:
        v = field_at(v, comp, z, kind)
    return v


class TestCorrelations:
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    @pytest.mark.parametrize("kind,power", [("+", 1), ("-", -1)])
    def test_vandermonde_single_component(self, k, kind, power):
        rng = random.Random(k)
        pts = [Scalar(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(k)]
        win = Window(1, k + 2)
        got = pairing(q_op(FockVector.vacuum(win), 0, power * k), field_word(win, 0, kind, pts))
        assert got == vandermonde_product(pts)

    @pytest.mark.parametrize("alpha", [-2, -1, 0, 1, 2])
    def test_reduction_to_one_component(self, alpha):
        rng = random.Random(alpha)
        for _ in range(5):
            word = random_word(rng, 1, rng.randint(1, 4), 3)
            one = [(kind, 0, k) for kind, _, k in word]
            big = pairing(q_op(FockVector.vacuum(Window(2, 5)), 1, alpha), apply_word(FockVector.vacuum(Window(2, 5)), word))
            small = pairing(q_op(FockVector.vacuum(Window(1, 5)), 0, alpha), apply_word(FockVector.vacuum(Window(1, 5)), one))
            assert big == small

    @given(seeds, st.integers(-2, 2), st.integers(-2, 2))
    def test_factorization(self, seed, alpha, beta):
        rng = random.Random(seed)
        win = Window(2, 5)
        v0 = FockVector.vacuum(win)
        m1 = random_word(rng, 1, rng.randint(0, 3), 3)
        m0 = random_word(rng, 0, rng.randint(0, 3), 3)
        lhs = pairing(q_op(q_op(v0, 0, beta), 1, alpha), apply_word(v0, m1 + m0))
        rhs = pairing(q_op(v0, 1, alpha), apply_word(v0, m1)) * pairing(q_op(v0, 0, beta), apply_word(v0, m0))
        assert lhs == rhs

    def test_correlation_examples(self):
        assert correlation(1, [(Scalar(5), Scalar(-2))]) == 1
        assert correlation(2, [(1, 1), (2, 3)]) == 2
        assert correlation(2, [(1, 1), (1, 3)]) == 0

    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_correlation_is_vandermonde_product(self, k):
        rng = random.Random(100 + k)
        zs = [Scalar(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(k)]
        ws = [Scalar(rng.randint(-9, 9), rng.randint(1, 4)) for _ in range(k)]
        assert correlation(k, list(zip(zs, ws))) == det(vandermonde(zs)) * det(vandermonde(ws))

    def test_correlation_point_count(self):
        with pytest.raises(ValueError):
            correlation(2, [(1, 1)])

    @pytest.mark.parametrize("alpha,beta", [(a, b) for a in range(-2, 3) for b in range(-2, 3)])
    def test_e10_conjugation(self, alpha, beta):
        """Q0^b Q1^-a E10^{k,l} Q1^a Q0^-b = (-1)^(a+b) E10^{k+a, l-b} on random vectors."""
        win = Window(2, 7)
        sign = -1 if (alpha + beta) % 2 else 1
        for seed in range(3):
            v = random_vector(win, seed, reach=2)
            for k, l in product(range(-2, 2), repeat=2):
                inner = q_op(q_op(v, 0, -beta), 1, alpha)
                lhs = q_op(q_op(e(inner, 1, k, 0, l), 1, -alpha), 0, beta)
                assert lhs == e(v, 1, k + alpha, 0, l - beta).scale(sign)


class TestGroupElements:
    def test_zero_array_is_identity(self):
        v = random_vector(W2, 4)
        assert apply_group_element(v, CoefficientArray.zero(2)) == v

    def test_single_moment(self):
        q = Scalar(-7, 3)
        arr = CoefficientArray.from_block({(0, 0): q})
        win = Window(2, 3)
        gv = apply_group_element(FockVector.vacuum(win), arr)
        assert pairing(translation_vacuum(2, [1], win), gv) == q
        assert pairing(FockVector.vacuum(win), gv) == 1

    def test_single_generator_acts_as_creation_after_annihilation(self):
        arr = CoefficientArray.from_block({(1, 2): 1})
        win = Window(2, 4)
        v0 = FockVector.vacuum(win)
        assert apply_group_element(v0, arr) == v0 + e(v0, 1, -2, 0, 2)

    def test_two_component_block_is_exponential(self):
        """For two components the element is exp of its generator, whose square vanishes."""
        arr = random_array(2, 8, (2, 2))
        win = Window(2, 5)
        v = random_vector(win, 8, reach=2)
        gen = FockVector(win, {})
        for (a, b), i, j, x in arr.entries():
            gen = gen + e(v, a, -i - 1, b, j).scale(x)
        gen2 = FockVector(win, {})
        for (a, b), i, j, x in arr.entries():
            gen2 = gen2 + e(gen, a, -i - 1, b, j).scale(x)
        expect = v + gen + gen2.scale(Scalar(1, 2))
        assert apply_group_element(v, arr) == expect

    def test_three_component_product(self):
        """I + C + D + E acts on wedges through its action on each factor."""
        arr = CoefficientArray(3, {(1, 0): {(0, 0): 2}, (2, 1): {(0, 0): 3}, (2, 0): {(0, 1): 5}})
        win = Window(3, 3)
        v0 = FockVector.vacuum(win)
        # every source label of the vacuum is replaced by its image under g:
        # e_0 -> e_0 + 2 e_1 z^-1, e_0 z -> e_0 z + 5 e_2 z^-1, e_1 -> e_1 + 3 e_2 z^-1
        x = [(2, (1, -1, 0, 0)), (5, (2, -1, 0, 1)), (3, (2, -1, 1, 0))]
        expect = v0
        for c, (a, k, b, l) in x:
            expect = expect + e(expect, a, k, b, l).scale(c)
        gv = apply_group_element(v0, arr)
        assert gv == expect
        assert len(gv.terms) == 6

    def test_negative_translation_vanishes(self):
        arr = random_array(2, 2)
        assert tau_fock(arr, (-1,)) == 0
        assert tau_fock(random_array(3, 2, (2, 2)), (-1, 1)) == 0

    def test_normalization(self):
        assert tau_fock(CoefficientArray.zero(3), (0, 0)) == 1
        arr = random_array(2, 6)
        assert tau_fock(arr, (0,), (2, -1)) == 1
        assert tau_fock(arr, (1,)) == arr.get((1, 0), 0, 0)

    @pytest.mark.parametrize("seed", range(4))
    def test_window_doubling(self, seed):
        arr = random_array(3, seed, (2, 2), origin=(-1, -1))
        kvs = [(k, l) for k in range(3) for l in range(3 - k)]
        sv = (1, -1, 0)
        base = tau_fock_many(arr, kvs, sv)
        from taulab.fock import auto_window

        K = auto_window(arr, kvs, sv)
        assert tau_fock_many(arr, kvs, sv, K=2 * K) == base

    @pytest.mark.parametrize("seed", range(3))
    def test_alpha_independence_at_zero_k(self, seed):
        arr = random_array(3, seed, (2, 2))
        vals = {tau_fock(arr, (0, 1), (a, 0, 0)) for a in range(-2, 3)}
        assert len(vals) == 1
