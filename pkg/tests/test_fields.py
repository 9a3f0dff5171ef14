import random
from fractions import Fraction as F
from math import comb

import pytest

from mctwist.algebras import (DgSpace, EndoMap, InftyStructure, endo_zero,
                              mc_residual, relation_residual, space_diff,
                              twist_structure, v_add, v_scale, v_sub)
from mctwist.coeffs import NilCdga
from mctwist.engine import Bounds
from mctwist.fields import (block_module, block_transport, build_tilde,
                            delta_field, embed_structure, extension_from_map,
                            field_bracket, field_coords, field_endo,
                            field_labels, field_parity, include_point,
                            induced_structure, mc_pair_check, split_element,
                            tw_on_tilde)
from mctwist.presets import make_Ainfty, twist_by_unary

G = NilCdga.ground()


def rand_structure(kind, space, coeffs, bound, rng, density=0.7):
    from itertools import combinations_with_replacement, product
    pip = space.pi_parities
    maps = {}
    for n in range(1, bound + 1):
        if kind == "L":
            keys = [k for k in combinations_with_replacement(range(space.dim), n)
                    if all(not (a == b and pip[a] % 2)
                           for a, b in zip(k, k[1:]))]
        else:
            keys = list(product(range(space.dim), repeat=n))
        tab = {}
        for key in keys:
            want = (sum(pip[i] for i in key) + 1) % 2
            val = {}
            for mono in [()] + list(coeffs.basis()):
                for vt in range(space.dim):
                    if (coeffs.mono_parity(mono) + pip[vt]) % 2 != want:
                        continue
                    if rng.random() < density:
                        val[(mono, vt)] = F(rng.choice([-2, -1, 1, 2, 3]))
            if val:
                tab[key] = val
        if tab:
            maps[n] = tab
    return InftyStructure(kind, space, coeffs, bound, maps)


def rand_even_elt(space, coeffs, rng, density=0.8):
    pip = space.pi_parities
    out = {}
    for mono in [()] + list(coeffs.basis()):
        for i in range(space.dim):
            if (coeffs.mono_parity(mono) + pip[i]) % 2 != 0:
                continue
            if rng.random() < density:
                out[(mono, i)] = F(rng.choice([-2, -1, 1, 2]))
    return out


# ---------------------------------------------------------------------------
# insertion brackets against the classical one-variable oracle


def test_symmetric_bracket_one_variable_oracle():
    # On a single odd vector the arity-n symmetric field e_n satisfies
    # [e_n, e_m] = (C(n+m-1, m) - C(n+m-1, n)) e_{n+m-1}: substituting into
    # the first slot of e_n leaves n-1 slots to merge with e_m's m slots.
    V1 = DgSpace(("v",), (1,))
    for n in (1, 2, 3):
        for m in (1, 2, 3):
            en = field_endo(V1, G, "c", ((0,) * n, 0))
            em = field_endo(V1, G, "c", ((0,) * m, 0))
            br = field_bracket("c", en, em)
            val = br.table.get((0,) * (n + m - 1), {}).get(((), 0), 0)
            assert val == comb(n + m - 1, m) - comb(n + m - 1, n)


def test_planar_bracket_one_variable_oracle():
    # The planar flavor gives the Witt relations on the nose:
    # [t_n, t_m] = (n - m) t_{n+m-1}.
    V1 = DgSpace(("v",), (1,))
    for n in (1, 2, 3):
        for m in (1, 2, 3):
            tn = field_endo(V1, G, "a", ((0,) * n, 0))
            tm = field_endo(V1, G, "a", ((0,) * m, 0))
            br = field_bracket("a", tn, tm)
            val = br.table.get((0,) * (n + m - 1), {}).get(((), 0), 0)
            assert val == n - m


# ---------------------------------------------------------------------------
# labels, coordinates, validation


def test_field_labels_shape():
    V = DgSpace(("u", "w"), (0, 1))  # pip = (1, 0)
    labs_c = field_labels(V, "c", 3)
    # sorted keys, no repeated odd entries: (0,0) is out, (1,1) stays
    assert ((0, 0), 0) not in labs_c and ((1, 1), 0) in labs_c
    assert all(key == tuple(sorted(key)) for key, _ in labs_c)
    labs_a = field_labels(V, "a", 3)
    assert ((0, 0), 0) in labs_a and ((1, 0), 1) in labs_a
    assert len(set(labs_a)) == len(labs_a)
    # parity is the total shifted parity of inputs and target
    assert field_parity(V, ((0,), 0)) == 0      # pip 1 + pip 1
    assert field_parity(V, ((0,), 1)) == 1


def test_field_coords_roundtrip():
    V = DgSpace(("u", "w"), (0, 1))
    A = NilCdga(("e1", "t"), (1, 0), 2)
    rng = random.Random(11)
    for kind in ("c", "a"):
        labs = field_labels(V, kind, 3)
        coords = {lab: F(rng.randint(-3, 3)) for lab in labs
                  if rng.random() < 0.6}
        coords = {k: c for k, c in coords.items() if c}
        # coordinates are recovered arity by arity within a parity class
        # (a single map carries one arity and one parity)
        by_arity = {}
        for lab, c in coords.items():
            by_arity.setdefault((len(lab[0]), field_parity(V, lab)),
                                {})[lab] = c
        for (arity, _), part in by_arity.items():
            acc = None
            for lab, c in part.items():
                e = field_endo(V, A, kind, lab)
                scaled = EndoMap(
                    e.parities, A, e.arity, e.parity,
                    {k: {kk: cc * c for kk, cc in v.items()}
                     for k, v in e.table.items()})
                acc = scaled if acc is None else acc.add(scaled)
            assert field_coords(V, kind, 4, acc) == part


def test_field_coords_rejections():
    V = DgSpace(("u", "w"), (0, 1))
    with pytest.raises(ValueError):
        field_coords(V, "c", 3, endo_zero(V.pi_parities, G, 0, 1))
    # a lopsided table is not in the span of symmetric fields
    lop = EndoMap(V.pi_parities, G, 2, 1, {(0, 1): {((), 0): F(1)}})
    with pytest.raises(ValueError):
        field_coords(V, "c", 4, lop)
    # beyond the bound the coordinates are empty (truncation)
    e = field_endo(V, G, "c", ((1, 1, 1), 0))
    assert field_coords(V, "c", 3, e) == {}


def test_delta_field_is_the_differential():
    V = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    delta = delta_field(V, G)
    assert delta.arity == 1 and delta.parity == 1
    assert delta.apply([{((), 0): F(1)}]) == {((), 1): F(1)}
    assert delta.apply([{((), 1): F(1)}]) == {}


# ---------------------------------------------------------------------------
# the big complex: relations hold identically within the bound


@pytest.mark.parametrize("kind", ["c", "a"])
@pytest.mark.parametrize("bound", [2, 3])
def test_tilde_relations_vanish(kind, bound):
    V = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    tilde = build_tilde(kind, V, bound)
    assert relation_residual(tilde.structure).ok


def test_tilde_relations_vanish_three_dim():
    V3 = DgSpace(("x", "y", "z"), (0, 1, 0),
                 d={0: {1: F(1)}, 2: {1: F(-2)}})
    for kind in ("c", "a"):
        tilde = build_tilde(kind, V3, 3)
        assert relation_residual(tilde.structure).ok


def test_tilde_relations_vanish_c_bound_four():
    V = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    tilde = build_tilde("c", V, 4)
    assert relation_residual(tilde.structure).ok


def test_embed_induced_roundtrip():
    V = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    A = NilCdga(("e1", "t"), (1, 0), 3)
    rng = random.Random(5)
    for kind, flav in (("L", "c"), ("A", "a")):
        s = rand_structure(kind, V, A, 2, rng)
        tilde = build_tilde(flav, V, 3, A)
        g = embed_structure(tilde, s)
        back = induced_structure(tilde, g)
        assert back.maps == s.maps
        with pytest.raises(ValueError):
            induced_structure(tilde, v_add(g, include_point(tilde,
                                                            {((), 0): F(1)})))


# ---------------------------------------------------------------------------
# one Maurer-Cartan equation against two classical ones


def test_mc_pair_honest_pair():
    # [a, b] = b with a central-free even basis; e1 (x) a is Maurer-Cartan.
    V = DgSpace(("a", "b"), (0, 0))
    A = NilCdga(("e1", "e2"), (1, 1), 3)
    s = InftyStructure("L", V, A, 2, {2: {(0, 1): {((), 1): F(1)}}})
    assert relation_residual(s).ok
    xi = {((0,), 0): F(1)}
    rep = mc_pair_check(V, A, s, xi)
    assert rep.pair_ok and rep.classical_ok and rep.ok
    # a near miss fails on both sides, still coordinate for coordinate
    near = {((0,), 1): F(1), ((1,), 0): F(1)}
    rep2 = mc_pair_check(V, A, s, near)
    assert not rep2.pair_ok and not rep2.classical_ok and rep2.ok
    assert rep2.mc == {((0, 1), 1): F(1)}


@pytest.mark.parametrize("kind,flav", [("L", "c"), ("A", "a")])
def test_mc_pair_random_structures_match_coordinatewise(kind, flav):
    V = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    A = NilCdga(("e1", "t"), (1, 0), 3)
    rng = random.Random(20260819)
    tilde = build_tilde(flav, V, 3, A)
    for _ in range(3):
        s = rand_structure(kind, V, A, 2, rng)
        xi = rand_even_elt(V, A, rng)
        rep = mc_pair_check(V, A, s, xi, tilde=tilde)
        assert rep.pair_ok == rep.classical_ok
        assert rep.c_part_matches_relations
        assert rep.v_part_matches_mc
        assert rep.ok


def test_mc_pair_rejects_foreign_structure():
    V = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    V2 = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    A = NilCdga(("e1",), (1,), 2)
    s = InftyStructure("L", V2, A, 1, {1: {(1,): {((0,), 1): F(1)}}})
    with pytest.raises(ValueError):
        mc_pair_check(V, A, s, {})


# ---------------------------------------------------------------------------
# the twisting morphism of the big complex


def test_tw_on_honest_pair_gives_twisted_pair():
    V = DgSpace(("a", "b"), (0, 0))
    A = NilCdga(("e1", "e2"), (1, 1), 3)
    s = InftyStructure("L", V, A, 2, {2: {(0, 1): {((), 1): F(1)}}})
    xi = {((0,), 0): F(1)}
    tilde = build_tilde("c", V, 3, A)
    eta = v_add(embed_structure(tilde, s), include_point(tilde, xi))
    image = tw_on_tilde(tilde, eta)
    c_img, v_img = split_element(tilde, image)
    assert v_img == v_scale(xi, -1)
    assert induced_structure(tilde, c_img).maps == twist_structure(s, xi).maps
    assert tw_on_tilde(tilde, image) == eta


@pytest.mark.parametrize("kind,flav", [("L", "c"), ("A", "a")])
def test_tw_matches_structure_twist_on_random_data(kind, flav):
    # no Maurer-Cartan assumption: the morphism and the twist agree on all
    # even elements, and applying it twice gives the identity
    V = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    A = NilCdga(("e1", "e2", "t"), (1, 1, 0), 3)
    rng = random.Random(7)
    tilde = build_tilde(flav, V, 4, A)
    for _ in range(2):
        s = rand_structure(kind, V, A, 3, rng, density=0.5)
        xi = rand_even_elt(V, A, rng)
        eta = v_add(embed_structure(tilde, s), include_point(tilde, xi))
        image = tw_on_tilde(tilde, eta)
        c_img, v_img = split_element(tilde, image)
        assert v_img == v_scale(xi, -1)
        want = embed_structure(tilde, twist_structure(s, xi, check=False))
        assert c_img == want
        assert tw_on_tilde(tilde, image) == eta


def test_tw_rejects_odd_elements():
    V = DgSpace(("u", "w"), (0, 1), d={0: {1: F(1)}})
    tilde = build_tilde("c", V, 3)
    with pytest.raises(ValueError):
        tw_on_tilde(tilde, include_point(tilde, {((), 0): F(1)}))


# ---------------------------------------------------------------------------
# semidirect structures from driven field families


def test_extension_semidirect_action_and_constant():
    U = DgSpace(("a", "b"), (0, 0))
    I = DgSpace(("c",), (0,))
    mU = InftyStructure("L", U, G, 2, {2: {(0, 1): {((), 1): F(1)}}})
    f = {
        1: {(0,): {((0,), 0): F(3)}},     # first generator acts by 3 id
        2: {(0, 1): {((), 0): F(5)}},     # constant term on the pair
    }
    S = extension_from_map(f, U, I, 3, mU=mU)
    assert relation_residual(S).ok
    assert S.maps[2][(0, 2)] == {((), 2): F(3)}
    assert S.maps[2][(0, 1)] == {((), 1): F(1), ((), 2): F(5)}


def test_extension_action_axiom_has_teeth():
    # [a, b] = b forces the second generator to act trivially when the
    # first acts by a scalar; a nonzero action on b must fail.
    U = DgSpace(("a", "b"), (0, 0))
    I = DgSpace(("c",), (0,))
    mU = InftyStructure("L", U, G, 2, {2: {(0, 1): {((), 1): F(1)}}})
    f_bad = {
        1: {(0,): {((0,), 0): F(3)}, (1,): {((0,), 0): F(1)}},
    }
    S_bad = extension_from_map(f_bad, U, I, 3, mU=mU)
    rep = relation_residual(S_bad)
    assert not rep.ok
    assert all(len(key) == 3 for _, key, _ in rep.failures)


def test_extension_constant_term_condition_has_teeth():
    # [x, y] = y: a constant term on (x, z) is compatible, one on (y, z)
    # violates the arity-3 relation through the bracket.
    U3 = DgSpace(("x", "y", "z"), (0, 0, 0))
    I = DgSpace(("c",), (0,))
    mU3 = InftyStructure("L", U3, G, 2, {2: {(0, 1): {((), 1): F(1)}}})
    S_pos = extension_from_map({2: {(0, 2): {((), 0): F(1)}}},
                               U3, I, 3, mU=mU3)
    assert relation_residual(S_pos).ok
    S_neg = extension_from_map({2: {(1, 2): {((), 0): F(1)}}},
                               U3, I, 3, mU=mU3)
    assert not relation_residual(S_neg).ok


def test_extension_validates_and_truncates():
    U = DgSpace(("a",), (0,))
    I = DgSpace(("c",), (0,))
    with pytest.raises(ValueError):
        extension_from_map({2: {(0,): {((), 0): F(1)}}}, U, I, 3)
    S = extension_from_map({1: {(0,): {((0, 0, 0), 0): F(1)}}}, U, I, 2)
    assert 4 not in S.maps  # the arity-4 component fell outside the bound


# ---------------------------------------------------------------------------
# deformed differentials on A (x) V


def test_block_module_positive():
    A1 = NilCdga(("eps",), (1,), 1)
    V2 = DgSpace(("v0", "v1"), (0, 0))
    xi = EndoMap((0, 0), A1, 1, 1, {(1,): {((0,), 0): F(1)}})
    mod = block_module(A1, V2, xi)
    assert mod.dfun({((), 1): F(1)}) == {((0,), 0): F(1)}
    assert mod.dfun(mod.dfun({((), 1): F(1)})) == {}


def test_block_module_rejects_exact_coefficient():
    A2 = NilCdga(("eps", "u"), (1, 0), 2, d_gens={0: {(1,): F(1)}})
    V1 = DgSpace(("v",), (0,))
    xi = EndoMap((0,), A2, 1, 1, {(0,): {((0,), 0): F(1)}})
    with pytest.raises(ValueError):
        block_module(A2, V1, xi)


def test_block_module_rejects_noncommuting_pieces():
    A3 = NilCdga(("e1", "e2"), (1, 1), 2)
    V2 = DgSpace(("v0", "v1"), (0, 0))
    xi = EndoMap((0, 0), A3, 1, 1, {(0,): {((0,), 1): F(1)},
                                    (1,): {((1,), 0): F(1)}})
    with pytest.raises(ValueError):
        block_module(A3, V2, xi)


def test_block_module_validates_xi_shape():
    A1 = NilCdga(("eps",), (1,), 1)
    V2 = DgSpace(("v0", "v1"), (0, 0))
    with pytest.raises(ValueError):  # shifted parities are the wrong carrier
        block_module(A1, V2, EndoMap((1, 1), A1, 1, 1, {}))
    with pytest.raises(ValueError):  # even maps cannot deform d
        block_module(A1, V2, EndoMap((0, 0), A1, 1, 0, {}))
    with pytest.raises(ValueError):  # each entry must flip total parity
        block_module(A1, V2, EndoMap((0, 0), A1, 1, 1,
                                     {(0,): {((), 1): F(1)}}))


def _pq_twisted():
    A = NilCdga(("eps",), (1,), 2)
    space = DgSpace(("p", "q"), (0, 0))
    tab2 = {(0, 0): {((), 0): F(1)}, (0, 1): {((), 1): F(1)}}
    s = InftyStructure("A", space, A, 3, {2: tab2})
    t = twist_structure(s, {((0,), 1): F(1)})
    return A, space, s, t


def test_block_transport_of_twisted_structure():
    A, space, s, t = _pq_twisted()
    assert t.maps[1]  # the deformed differential is nonzero
    p = make_Ainfty("planar", Bounds(3, 3, 0))
    rho = {f"m{n}": t.endo(n) for n in range(1, 4)}
    dfun = lambda e: space_diff(space, A, e)
    u = p.generator_element("m1").scale(-1)
    rep = block_transport(p, rho, dfun, u, gens=("m1", "m2", "m3"))
    assert rep.ok and rep.transported_exactly
    # the shifted differential genuinely differs from the base one
    uend = t.endo(1)
    assert uend.apply([{((), 0): F(1)}]) != {}


def test_block_transport_is_exact_even_on_failures():
    A, space, s, t = _pq_twisted()
    p = make_Ainfty("planar", Bounds(3, 3, 0))
    pip = space.pi_parities
    bad_m1 = EndoMap(pip, A, 1, 1, {(1,): {((0,), 0): F(1)}})
    rho = {"m1": bad_m1, "m2": s.endo(2), "m3": endo_zero(pip, A, 3, 1)}
    dfun = lambda e: space_diff(space, A, e)
    u = p.generator_element("m1").scale(-1)
    rep = block_transport(p, rho, dfun, u, gens=("m1", "m2", "m3"))
    assert rep.base_failures and rep.twisted_failures
    assert rep.transported_exactly and not rep.ok


def test_block_transport_rejects_wrong_twist_orientation():
    p = make_Ainfty("planar", Bounds(3, 3, 0))
    with pytest.raises(ValueError):
        twist_by_unary(p, p.generator_element("m1"))
