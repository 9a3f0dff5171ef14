from fractions import Fraction

import pytest

from mctwist.engine import (Bounds, d_squared_report, differential,
                            enumerate_basis, truncate)
from mctwist.presets import (PhiRule, adjoin_m, alpha_element, carrier_kind,
                             hat_homotopy, identity_rule, make_Ainfty,
                             make_Linfty, make_MC, make_Tw, make_ainfty,
                             make_hat, make_linfty, make_zero,
                             operad_map_apply, phi_identity, phi_symmetrize,
                             power_homotopy, preset, root_chain,
                             shuffle_permutations, twist_by_unary,
                             tw_automorphism)
from mctwist.trees import Element, act, compose, is_leaf, single

B = Bounds(4, 4, 3)


def gen(p, name):
    return p.generator_element(name)


def test_shuffle_permutations():
    assert sorted(shuffle_permutations(1, 1)) == [(1, 2), (2, 1)]
    got = sorted(shuffle_permutations(2, 1))
    assert got == [(1, 2, 3), (1, 3, 2), (2, 3, 1)]
    assert len(list(shuffle_permutations(3, 2))) == 10


def test_planar_cobar_examples():
    p = make_Ainfty("planar", B)
    assert differential(p, gen(p, "m1")).terms == {
        ("m1", ("m1", 1)): Fraction(1)}
    assert differential(p, gen(p, "m2")).terms == {
        ("m1", ("m2", 1, 2)): Fraction(1),
        ("m2", ("m1", 1), 2): Fraction(1),
        ("m2", 1, ("m1", 2)): Fraction(1)}


def test_weight_two_unary_slice():
    p = make_Ainfty("planar", Bounds(1, 3, 0))
    sl = enumerate_basis(p, 1, 2, 0)
    assert sl.basis == [("m1", ("m1", 1))]
    # the two Leibniz terms of the square cancel
    assert differential(p, single(p.table, ("m1", ("m1", 1)))).is_zero()


def test_shuffle_cobar_d_m2():
    p = make_Linfty(B)
    assert differential(p, gen(p, "m2")).terms == {
        ("m1", ("m2", 1, 2)): Fraction(1),
        ("m2", ("m1", 1), 2): Fraction(1),
        ("m2", 1, ("m1", 2)): Fraction(1)}


def test_symmetric_generator_invariance():
    p = make_Linfty(B)
    assert act(p.table, (2, 1), gen(p, "m2")) == gen(p, "m2")


def test_free_action_mode_distinguishes_labelings():
    p = make_Ainfty("symmetric", B)
    assert act(p.table, (2, 1), gen(p, "m2")) != gen(p, "m2")
    assert d_squared_report(p.with_bounds(Bounds(3, 3, 0))).ok


def test_min_arity_quotients():
    a = make_ainfty(B)
    assert "m1" not in a.table and "m2" in a.table
    assert differential(a, gen(a, "m2")).is_zero()
    l = make_linfty(B)
    d3 = differential(l, gen(l, "m3"))
    # the shuffle image of m3 with the unary generator removed
    assert set(d3.terms.values()) == {Fraction(1)}
    assert all(nd[0] == "m2" for nd in d3.terms)
    assert len(d3.terms) == 3


def test_mc_dx_values():
    L = preset("L-script", Bounds(4, 4, 2))
    assert differential(L, gen(L, "x")).terms == {
        ("m1", ("x",)): Fraction(1),
        ("m2", ("x",), ("x",)): Fraction(1, 2)}
    A = preset("A-script", Bounds(4, 4, 3))
    assert differential(A, gen(A, "x")).terms == {
        ("m1", ("x",)): Fraction(1),
        ("m2", ("x",), ("x",)): Fraction(1),
        ("m3", ("x",), ("x",), ("x",)): Fraction(1)}


def test_mc_of_zero_operad():
    p = make_MC(make_zero(B))
    assert differential(p, gen(p, "x")).is_zero()
    assert d_squared_report(p).ok


def test_adjoin_m_rule():
    q = adjoin_m(make_zero(Bounds(1, 5, 0)))
    dm = differential(q, gen(q, "m"))
    assert dm.terms == {("m", ("m", 1)): Fraction(-1)}
    assert differential(q, dm).is_zero()
    # weight slices of the unary component are the pure powers
    for w in range(1, 5):
        sl = enumerate_basis(q, 1, w, 0)
        assert len(sl.basis) == 1 and sl.basis[0][0] == "m"


def test_hat_power_rule():
    h = make_hat(make_zero(Bounds(1, 6, 0)))
    assert differential(h, gen(h, "m")).terms == {
        ("m", ("m", 1)): Fraction(1)}
    power = gen(h, "m")
    for r in range(1, 5):
        d = differential(h, power)
        if r % 2 == 1:
            assert len(d.terms) == 1 and set(d.terms.values()) == {
                Fraction(1)}
            assert root_chain(next(iter(d.terms)))[0] == r + 1
        else:
            assert d.is_zero()
        power = compose(h.table, gen(h, "m"), 1, power)


def test_twist_by_zero_is_identity():
    p = make_Ainfty("planar", Bounds(3, 3, 0))
    t = twist_by_unary(p, Element.zero(1))
    for name in ("m1", "m2", "m3"):
        assert t.diff_image(name) == p.diff_image(name)


def test_twist_rejects_non_square_zero_element():
    p = make_Ainfty("planar", Bounds(3, 3, 0))
    with pytest.raises(ValueError):
        twist_by_unary(p, gen(p, "m1"))


def test_hat_of_min_arity_two_shuffle_family_matches_full_family():
    bounds = Bounds(4, 3, 0)
    h = make_hat(make_linfty(bounds))
    L = make_Linfty(bounds)

    def rename(nd):
        if is_leaf(nd):
            return nd
        return ("m1" if nd[0] == "m" else nd[0], *map(rename, nd[1:]))

    pairs = [("m", "m1"), ("m2", "m2"), ("m3", "m3"), ("m4", "m4")]
    for hname, lname in pairs:
        img = h.diff_image(hname)
        renamed = Element(img.arity,
                          {rename(nd): c for nd, c in img.terms.items()})
        assert renamed == L.diff_image(lname), hname


def test_phi_identity_chain_map():
    l = make_linfty(Bounds(4, 3, 0))
    phi = phi_identity(l, l)
    assert phi.factors_through_min2
    assert phi.chain_failures() == []
    L = make_Linfty(Bounds(4, 3, 0))
    phiL = phi_identity(L, L)
    assert not phiL.factors_through_min2
    assert phiL.chain_failures() == []


def test_phi_symmetrize_chain_map():
    L = make_Linfty(Bounds(4, 3, 0))
    A = make_Ainfty("symmetric", Bounds(4, 3, 0))
    phi = phi_symmetrize(L, A)
    img = phi.image("m2")
    assert img.terms == {("m2", 1, 2): Fraction(1),
                         ("m2", 2, 1): Fraction(1)}
    assert phi.chain_failures() == []


def test_operad_map_apply_respects_composition():
    # identity assignment: applying it is the identity on elements
    L = make_Linfty(Bounds(4, 3, 0))
    e = differential(L, gen(L, "m3"))
    out = operad_map_apply(L.table, lambda g: gen(L, g), e)
    assert out == e


def test_tw_generator_values():
    L = preset("L-script", Bounds(4, 4, 2))
    assert tw_automorphism(L, gen(L, "x")).terms == {("x",): Fraction(-1)}
    assert tw_automorphism(L, gen(L, "m1")).terms == {
        ("m1", 1): Fraction(1),
        ("m2", 1, ("x",)): Fraction(1),
        ("m3", 1, ("x",), ("x",)): Fraction(1, 2)}
    A = preset("A-script", Bounds(4, 4, 2))
    assert tw_automorphism(A, gen(A, "m1")).terms == {
        ("m1", 1): Fraction(1),
        ("m2", 1, ("x",)): Fraction(1),
        ("m2", ("x",), 1): Fraction(1),
        ("m3", 1, ("x",), ("x",)): Fraction(1),
        ("m3", ("x",), 1, ("x",)): Fraction(1),
        ("m3", ("x",), ("x",), 1): Fraction(1)}


def test_tw_involution_small():
    for name in ("L-script", "A-script"):
        p = preset(name, Bounds(3, 3, 2))
        for g in ("x", "m1", "m2"):
            once = tw_automorphism(p, gen(p, g))
            assert tw_automorphism(p, once) == gen(p, g), (name, g)


def test_tw_chain_map_small():
    for name in ("L-script", "A-script"):
        p = preset(name, Bounds(3, 3, 3))
        for g in ("x", "m1", "m2"):
            lhs = tw_automorphism(p, differential(p, gen(p, g)))
            rhs = differential(p, tw_automorphism(p, gen(p, g)))
            assert lhs == rhs, (name, g)


def test_alpha_values_and_mc_property():
    lmc = preset("mc:linfty", Bounds(4, 4, 1))
    a = alpha_element(lmc)
    assert a.terms == {("m2", 1, ("x",)): Fraction(-1)}
    amc = preset("mc:ainfty", Bounds(4, 4, 1))
    b = alpha_element(amc)
    assert b.terms == {("m2", 1, ("x",)): Fraction(-1),
                       ("m2", ("x",), 1): Fraction(-1)}
    for p in (preset("mc:linfty", Bounds(4, 4, 3)),
              preset("mc:ainfty", Bounds(4, 4, 3))):
        al = alpha_element(p)
        # the square has x-degree up to 2K; the identity lives in the
        # truncated quotient
        res = truncate(p, differential(p, al) + compose(p.table, al, 1, al))
        assert res.is_zero(), p.name


def test_alpha_requires_factoring_rule():
    with pytest.raises(ValueError):
        alpha_element(preset("L-script", Bounds(3, 3, 2)))


def test_tw_op_of_zero_is_mc_of_zero():
    t = make_Tw(make_zero(B))
    m = make_MC(make_zero(B))
    assert t.diff_image("x") == m.diff_image("x")


def test_tw_op_twists_the_mc_generator():
    t = preset("tw-op:linfty", Bounds(3, 3, 2))
    m = preset("mc:linfty", Bounds(3, 3, 2))
    al = alpha_element(m)
    want = truncate(m, m.diff_image("x")
                    + compose(m.table, al, 1, gen(m, "x")))
    assert t.diff_image("x") == want


def test_hat_homotopy_examples():
    h = make_hat(make_ainfty(Bounds(3, 4, 0)))
    m2 = gen(h, "m2")
    mm2 = compose(h.table, gen(h, "m"), 1, m2)
    assert hat_homotopy(h, mm2) == m2
    assert hat_homotopy(h, m2).is_zero()
    with pytest.raises(ValueError):
        hat_homotopy(h, gen(h, "m"))
    lhs = differential(h, hat_homotopy(h, mm2)) + hat_homotopy(
        h, differential(h, mm2))
    assert lhs == mm2


def test_hat_homotopy_contracts_small_slice():
    h = make_hat(make_ainfty(Bounds(3, 3, 0)))
    for w in range(1, 3):
        for t in enumerate_basis(h, 2, w, 0).basis:
            e = single(h.table, t)
            got = differential(h, hat_homotopy(h, e)) + hat_homotopy(
                h, differential(h, e))
            assert got == e, t


def test_power_homotopy_identity():
    h = make_hat(make_zero(Bounds(1, 6, 0)))
    power = gen(h, "m")
    for r in range(1, 5):
        got = differential(h, power_homotopy(h, power)) + power_homotopy(
            h, differential(h, power))
        assert got == power, r
        power = compose(h.table, gen(h, "m"), 1, power)


def test_carrier_kind():
    assert carrier_kind(make_Linfty(B)) == "L"
    assert carrier_kind(make_Ainfty("planar", B)) == "A"
    assert carrier_kind(make_Ainfty("symmetric", B)) == "A"


def test_registry_round_trip():
    small = Bounds(3, 3, 2)
    for name in ("Ainfty", "Ainfty-sym", "Linfty", "ainfty", "linfty",
                 "L-script", "A-script", "hat:ainfty", "hat:linfty",
                 "mc:linfty", "mc:ainfty:id", "tw-op:linfty",
                 "tw-op:ainfty:id"):
        p = preset(name, small)
        assert p.bounds == small
        assert d_squared_report(p).ok, name


def test_registry_errors():
    with pytest.raises(KeyError):
        preset("no-such", B)
    with pytest.raises(KeyError):
        preset("mc:linfty:sym", B)
    with pytest.raises(ValueError):
        preset("tw-op:Linfty", Bounds(3, 3, 2))  # rule does not factor
