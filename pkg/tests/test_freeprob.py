import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ptlab.errors import ArgumentError
from ptlab.freeprob import (
    MomentFunctional,
    adjoint_letter,
    circular_moment,
    cumulants_from_moments,
    free_product_functional,
    haar_unitary_moment,
    limit_functional,
    marchenko_pastur_moment,
    mixed_word_limit,
    moments_from_cumulants,
    narayana,
    nongamma_limit_moment,
    positivity_support_check,
    pt_limit_cumulants,
    pt_limit_moments,
    semicircle_moments,
)

F = Fraction
A1, As = ("A", "1"), ("A", "*")


def words(alphabet, max_len):
    for n in range(1, max_len + 1):
        yield from itertools.product(alphabet, repeat=n)


def random_table(alphabet, max_len, seed):
    rng = random.Random(seed)
    return {w: F(rng.randint(-9, 9), rng.randint(1, 6)) for w in words(alphabet, max_len)}


def self_adjoint_phi(m1, m2):
    return lambda w: {1: m1, 2: m2}[len(w)]


# --- transforms -----------------------------------------------------------


def test_low_order_cumulants_match_formulas():
    t = random_table("xyz", 3, 1)
    phi = t.__getitem__
    assert cumulants_from_moments(phi, "x") == t[("x",)]
    assert cumulants_from_moments(phi, "xy") == t[("x", "y")] - t[("x",)] * t[("y",)]
    x, y, z = ("x",), ("y",), ("z",)
    k3 = (t[("x", "y", "z")] - t[("x", "y")] * t[z] - t[("x", "z")] * t[y] - t[x] * t[("y", "z")]
          + 2 * t[x] * t[y] * t[z])
    assert cumulants_from_moments(phi, "xyz") == k3


def test_semicircle_cumulants():
    cat = [1, 0, 1, 0, 2, 0, 5, 0, 14]
    phi = lambda w: cat[len(w)]  # noqa: E731
    ks = [cumulants_from_moments(phi, "s" * n) for n in range(1, 9)]
    assert ks == [0, 1, 0, 0, 0, 0, 0, 0]


def test_moments_from_cumulants_examples():
    kappa = lambda w: {2: 1}.get(len(w), 0)  # noqa: E731
    assert moments_from_cumulants(kappa, "aaaa") == 2
    c = F(3, 7)
    kappa = lambda w: c if len(w) == 1 else 0  # noqa: E731
    assert moments_from_cumulants(kappa, "aaa") == c**3


@pytest.mark.parametrize("seed", range(3))
def test_round_trip_exact_to_length_6(seed):
    t = random_table("ab", 6, seed)
    phi = t.__getitem__
    cache = {}
    kappa = {w: cumulants_from_moments(phi, w, cache) for w in t}
    for w, v in t.items():
        assert moments_from_cumulants(kappa.__getitem__, w) == v
    # and the other way round
    k2 = random_table("ab", 5, seed + 10)
    m2 = {w: moments_from_cumulants(k2.__getitem__, w) for w in k2}
    assert all(cumulants_from_moments(m2.__getitem__, w) == v for w, v in k2.items())


def test_missing_moment_raises():
    phi = MomentFunctional({(A1,): 1})
    with pytest.raises(ArgumentError):
        cumulants_from_moments(phi, (A1, A1))
    with pytest.raises(ArgumentError):
        cumulants_from_moments(phi, ())


def test_moment_functional_adjoint():
    phi = MomentFunctional({(A1, A1): complex(1, 2)}, adjoint=adjoint_letter)
    assert phi((As, As)) == complex(1, -2)
    assert adjoint_letter(("A", "G", "1")) == ("A", "G", "*")


# --- partial-transpose limits ---------------------------------------------


def test_pt_limit_cumulant_examples():
    phi = self_adjoint_phi(F(1), F(5, 4))
    assert pt_limit_cumulants(phi, (A1,)) == 1
    assert pt_limit_cumulants(phi, (A1, A1)) == F(1, 4)
    assert pt_limit_cumulants(phi, (A1, As, A1)) == 0


def test_pt_limit_moment_examples():
    phi = self_adjoint_phi(F(1), F(5, 4))
    assert pt_limit_moments(phi, (A1,)) == 1
    assert pt_limit_moments(phi, (A1,) * 2) == F(5, 4)
    assert pt_limit_moments(phi, (A1,) * 3) == F(7, 4)
    assert pt_limit_moments(phi, (A1,) * 4) == F(21, 8)
    v = F(2, 3)
    assert pt_limit_moments(self_adjoint_phi(0, v), (A1,) * 4) == 2 * v * v


def two_matrix_phi(seed):
    # arbitrary rank-one and rank-two limits for two matrices, with conjugate symmetry left out
    rng = random.Random(seed)
    letters = [(r, nu) for r in "AB" for nu in "1*"]
    t = {(x,): F(rng.randint(-5, 5), rng.randint(1, 4)) for x in letters}
    t.update({(x, y): F(rng.randint(-5, 5), rng.randint(1, 4)) for x in letters for y in letters})
    return t.__getitem__, letters


@pytest.mark.parametrize("seed", range(3))
def test_pt_moments_consistent_with_cumulants(seed):
    phi, letters = two_matrix_phi(seed)
    kappa = lambda w: pt_limit_cumulants(phi, w)  # noqa: E731
    for n in range(1, 6):
        for w in itertools.product(letters, repeat=n):
            assert pt_limit_moments(phi, w) == moments_from_cumulants(kappa, w)


@pytest.mark.parametrize("m1,m2", [(F(1), F(5, 4)), (F(0), F(1)), (F(-2), F(7)), (F(3, 2), F(9, 4))])
def test_self_adjoint_gives_translated_semicircle(m1, m2):
    phi = self_adjoint_phi(m1, m2)
    for n in range(1, 7):
        assert pt_limit_moments(phi, (A1,) * n) == semicircle_moments(m1, m2 - m1 * m1, n)


def test_r_diagonal_input_gives_circular():
    c = F(3, 5)
    table = {(A1,): 0, (As,): 0, (A1, A1): 0, (As, As): 0, (A1, As): c, (As, A1): c}
    phi = table.__getitem__
    for n in range(1, 7):
        for w in itertools.product((A1, As), repeat=n):
            assert pt_limit_moments(phi, w) == circular_moment([nu for _, nu in w], c)


# --- mixed words -----------------------------------------------------------


def wishart_phi(lam):
    return free_product_functional({"A": lambda flags: marchenko_pastur_moment(len(flags), lam),
                                    "B": lambda flags: marchenko_pastur_moment(len(flags), lam)})


def test_mixed_word_examples():
    phi = wishart_phi(F(1, 4))
    # no partial-transpose letters: plain moment
    assert mixed_word_limit(phi, (("A", "I", "1"), ("A", "I", "1"))) == F(5, 4)
    assert mixed_word_limit(phi, (("A", "G", "1"), ("A", "I", "1"))) == 1
    assert mixed_word_limit(phi, (("A", "G", "1"), ("A", "G", "*"))) == phi((A1, As))
    assert mixed_word_limit(phi, ()) == 1


def test_all_gamma_word_reduces_to_pt_limit():
    phi = wishart_phi(F(1, 3))
    for n in range(1, 6):
        for flags in itertools.product("1*", repeat=n):
            gw = tuple(("A", "G", f) for f in flags)
            pw = tuple(("A", f) for f in flags)
            assert mixed_word_limit(phi, gw) == pt_limit_moments(phi, pw)


def test_limit_freeness_cumulants_vanish():
    phi = wishart_phi(F(1, 4))
    lim = limit_functional(phi)
    g = ("A", "G", "1")
    for other in (("A", "I", "1"), ("A", "T", "1"), ("A", "L", "1"), ("B", "G", "1")):
        assert cumulants_from_moments(lim, (g, other)) == 0
        assert cumulants_from_moments(lim, (g, other, g)) == 0
    assert cumulants_from_moments(lim, (g, ("A", "G", "*"))) == F(1, 4)


def test_nongamma_families():
    phi = wishart_phi(F(1, 4))
    # A and A^T are free with equal laws
    assert nongamma_limit_moment(phi, (("A", "I", "1"), ("A", "T", "1"))) == 1
    assert nongamma_limit_moment(phi, (("A", "T", "1"),) * 3) == marchenko_pastur_moment(3, F(1, 4))
    # A^L follows the partial-transpose law of A^T
    assert nongamma_limit_moment(phi, (("A", "L", "1"),) * 4) == semicircle_moments(1, F(1, 4), 4)
    with pytest.raises(ArgumentError):
        nongamma_limit_moment(phi, (("A", "G", "1"),))


# --- explicit laws ---------------------------------------------------------


def test_semicircle_examples():
    assert semicircle_moments(0, 1, 4) == 2
    assert semicircle_moments(1, F(1, 4), 2) == F(5, 4)
    assert semicircle_moments(1, F(1, 4), 4) == F(21, 8)
    with pytest.raises(ArgumentError):
        semicircle_moments(0, -1, 2)


def test_positivity_examples():
    v = positivity_support_check(1, 1.25)
    assert v.support == (0.0, 2.0) and v.positive
    assert not positivity_support_check(1, 1.5).positive
    v = positivity_support_check(0, 1)
    assert v.support == (-2.0, 2.0) and not v.positive
    with pytest.raises(ArgumentError):
        positivity_support_check(1, 0.5)


def test_marchenko_pastur_and_narayana():
    lam = F(1, 4)
    assert [marchenko_pastur_moment(k, lam) for k in range(5)] == [1, 1, 1 + lam, 1 + 3 * lam + lam**2,
                                                                   1 + 6 * lam + 6 * lam**2 + lam**3]
    assert sum(narayana(5, j) for j in range(1, 6)) == 42


def test_free_product_functional():
    semi = lambda flags: semicircle_moments(0, 1, len(flags))  # noqa: E731
    phi = free_product_functional({"a": semi, "b": semi})
    a, b = ("a", "1"), ("b", "1")
    assert phi((a, a, b, b)) == 1
    assert phi((a, b, a, b)) == 0
    with pytest.raises(ArgumentError):
        phi((("c", "1"),))


def test_haar_and_circular():
    assert haar_unitary_moment("1*1*") == 1
    assert haar_unitary_moment("11") == 0
    assert circular_moment("1*") == 1
    assert circular_moment("11**") == 1
    assert circular_moment("1*1*") == 2
    assert circular_moment("1**1") == 1


@settings(max_examples=30, deadline=None)
@given(st.lists(st.sampled_from([A1, As]), min_size=1, max_size=5), st.integers(1, 8), st.integers(0, 6))
def test_pt_limit_is_polynomial_in_rank_two_data(w, num, shift):
    # scaling the matrix by c scales every limit moment by c^len
    c = F(num, 3)
    base = {(A1,): F(1), (As,): F(1), (A1, A1): F(shift + 1), (As, As): F(shift + 1),
            (A1, As): F(shift + 2), (As, A1): F(shift + 2)}
    scaled = {k: v * c ** len(k) for k, v in base.items()}
    assert pt_limit_moments(scaled.__getitem__, w) == c ** len(w) * pt_limit_moments(base.__getitem__, w)
