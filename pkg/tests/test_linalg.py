import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mctwist.linalg import (FiniteComplex, SparseMatrix, homology_dims,
                            kernel_dim, rank, verify_complex)


def mk(rows, cols, data):
    m = SparseMatrix(rows, cols)
    for (r, c), v in data.items():
        m[r, c] = v
    return m


def test_rank_identity():
    assert rank(mk(2, 2, {(0, 0): 1, (1, 1): 1})) == 2


def test_rank_zero_matrix():
    assert rank(SparseMatrix(3, 4)) == 0


def test_rank_dependent_rows():
    # [[1,2],[2,4]] has rank 1
    assert rank(mk(2, 2, {(0, 0): 1, (0, 1): 2, (1, 0): 2, (1, 1): 4})) == 1


def test_rank_fractional_entries():
    m = mk(2, 3, {(0, 0): Fraction(1, 2), (0, 2): Fraction(1, 6),
                  (1, 0): Fraction(1, 3), (1, 2): Fraction(1, 9)})
    # second row is 2/3 of the first
    assert rank(m) == 1


def test_rank_against_sympy_oracle():
    import sympy
    rng = random.Random(20260819)
    for _ in range(40):
        rows = rng.randint(1, 7)
        cols = rng.randint(1, 7)
        m = SparseMatrix(rows, cols)
        sm = sympy.zeros(rows, cols)
        for r in range(rows):
            for c in range(cols):
                if rng.random() < 0.6:
                    v = Fraction(rng.randint(-6, 6), rng.choice([1, 1, 2, 3, 6]))
                    m[r, c] = v
                    sm[r, c] = sympy.Rational(v.numerator, v.denominator)
        assert rank(m) == sm.rank()


coeffs = st.fractions(min_value=-5, max_value=5, max_denominator=6)


@st.composite
def matrices(draw, max_dim=5):
    rows = draw(st.integers(1, max_dim))
    cols = draw(st.integers(1, max_dim))
    m = SparseMatrix(rows, cols)
    for r in range(rows):
        for c in range(cols):
            if draw(st.booleans()):
                m[r, c] = draw(coeffs)
    return m


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_rank_transpose_invariant(m):
    assert rank(m) == rank(m.transpose())


@given(matrices())
@settings(max_examples=60, deadline=None)
def test_rank_bounds_and_kernel(m):
    r = rank(m)
    assert 0 <= r <= min(m.rows, m.cols)
    assert kernel_dim(m) == m.cols - r


@given(matrices(), st.randoms(use_true_random=False))
@settings(max_examples=40, deadline=None)
def test_rank_row_permutation_invariant(m, rng):
    perm = list(range(m.rows))
    rng.shuffle(perm)
    p = SparseMatrix(m.rows, m.cols)
    for (r, c), v in m.entries.items():
        p[perm[r], c] = v
    assert rank(p) == rank(m)


def test_compose_shapes_and_values():
    a = mk(2, 3, {(0, 0): 1, (1, 2): 2})
    b = mk(3, 2, {(0, 1): Fraction(1, 2), (2, 0): 3})
    ab = a.compose(b)
    assert ab.rows == 2 and ab.cols == 2
    assert ab[0, 1] == Fraction(1, 2)
    assert ab[1, 0] == 6
    with pytest.raises(ValueError):
        b.compose(a.transpose())


def test_verify_complex_passes_two_step():
    c = FiniteComplex({0: 1, 1: 1}, {0: mk(1, 1, {(0, 0): 1})})
    assert verify_complex(c).ok


def test_verify_complex_catches_d2():
    ident = mk(1, 1, {(0, 0): 1})
    c = FiniteComplex({0: 1, 1: 1, 2: 1}, {0: ident, 1: mk(1, 1, {(0, 0): 1})})
    rep = verify_complex(c)
    assert not rep.ok
    assert rep.failures == [(0, 0)]


def test_homology_two_step_identity_is_acyclic():
    c = FiniteComplex({0: 1, 1: 1}, {0: mk(1, 1, {(0, 0): 1})})
    assert homology_dims(c) == {0: 0, 1: 0}


def test_homology_kernel_example():
    # 0 -> Q^2 -> Q -> 0 with boundary (1 1): dims (1, 0)
    c = FiniteComplex({0: 2, 1: 1}, {0: mk(1, 2, {(0, 0): 1, (0, 1): 1})})
    assert homology_dims(c) == {0: 1, 1: 0}


def test_homology_rejects_non_complex():
    ident = mk(1, 1, {(0, 0): 1})
    c = FiniteComplex({0: 1, 1: 1, 2: 1}, {0: ident, 1: ident})
    with pytest.raises(ValueError):
        homology_dims(c)


def random_block_complex(rng):
    """Block sum of identity pairs and lone generators, then a basis shuffle.

    Returns the complex together with its known homology.
    """
    degrees = range(0, 4)
    dims = {w: 0 for w in degrees}
    pairs = []   # (w, index in degree w, index in degree w+1)
    lone = {w: 0 for w in degrees}
    for w in range(0, 3):
        for _ in range(rng.randint(0, 3)):
            pairs.append((w, dims[w], dims[w + 1]))
            dims[w] += 1
            dims[w + 1] += 1
    for w in degrees:
        extra = rng.randint(0, 2)
        lone[w] += extra
        dims[w] += extra
    perms = {w: rng.sample(range(d), d) for w, d in dims.items() if d}
    boundaries = {}
    for w, i, j in pairs:
        b = boundaries.setdefault(w, SparseMatrix(dims[w + 1], dims[w]))
        b[perms[w + 1][j], perms[w][i]] = rng.choice([1, -1, 2, Fraction(1, 3)])
    dims = {w: d for w, d in dims.items() if d}
    return FiniteComplex(dims, boundaries), {w: lone[w] for w in dims}


def test_homology_of_shuffled_block_complexes():
    rng = random.Random(7)
    for _ in range(25):
        c, expected = random_block_complex(rng)
        got = homology_dims(c)
        assert got == expected
        euler_h = sum((-1) ** w * d for w, d in got.items())
        euler_c = sum((-1) ** w * d for w, d in c.dims.items())
        assert euler_h == euler_c


def test_boundary_shape_validation():
    with pytest.raises(ValueError):
        FiniteComplex({0: 2, 1: 1}, {0: mk(2, 2, {(0, 0): 1})})
