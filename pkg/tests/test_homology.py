"""Betti tables and certificates.

Expected homology dimensions are derived independently: the arity-n homology
of the binary-tree complex equals the target operad dimension (n! with free
labels, 1 planar), concentrated in top weight n-1; hat-presentations and the
arity-0 bracket span are acyclic away from the identity.
"""

from fractions import Fraction

import pytest

from mctwist.engine import Bounds
from mctwist.homology import (BettiTable, betti, betti_words, compare_theorem,
                              certificate_names, hat_contraction,
                              hat_contraction_failures, render_betti,
                              render_certificate, twisted_d_squared_failures,
                              word_d_squared_failures, word_homotopy_failures)
from mctwist.presets import preset
from mctwist.trees import single
from mctwist.words import ASS, LIE


def test_betti_planar_quotient_is_one_dimensional():
    t = betti(preset("ainfty", Bounds(3, 3, 0)), [2, 3])
    assert t.total(2) == 1
    assert t.total(3) == 1
    assert t.entries[(3, 2)] == 1          # concentrated in top weight


def test_betti_free_action_quotient_matches_word_counts():
    t = betti(preset("ainfty-sym", Bounds(3, 3, 0)), [2, 3])
    assert t.total(2) == 2
    assert t.total(3) == 6
    assert t.flags[(2, 1)] == "interior"


def test_betti_shuffle_quotient_matches_bracket_counts():
    t = betti(preset("linfty", Bounds(4, 4, 0)), [2, 3, 4])
    assert t.total(2) == 1
    assert t.total(3) == 2
    assert t.total(4) == 6                 # (n-1)!


def _broken_presentation():
    # d(q) = p, d(p) = p o p, so d(d(q)) = p o p != 0
    from mctwist.engine import OperadPresentation
    from mctwist.trees import PLANAR, Generator, compose

    def mk_gens(_):
        return [Generator("p", 1, 1, PLANAR), Generator("q", 1, 0, PLANAR)]

    def mk_diff(pres, g):
        pp = pres.generator_element("p")
        return pp if g == "q" else compose(pres.table, pp, 1, pp)

    return OperadPresentation("broken", Bounds(1, 3, 0), mk_gens, mk_diff)


def test_betti_requires_square_zero():
    with pytest.raises(ValueError):
        betti(_broken_presentation(), [1])
    t = betti(preset("Ainfty", Bounds(2, 2, 0)), [2])   # honest input passes
    assert (2, 1) in t.entries


def test_rank_bound_skips_and_flags():
    t = betti(preset("linfty", Bounds(3, 3, 0)), [2, 3], rank_bound=2)
    # arity 3 touches a 3x1 and a 0x3 boundary map: both beyond the cap
    assert (3, 1) not in t.entries and (3, 2) not in t.entries
    assert t.flags[(3, 1)] == "rank-bound-exceeded"
    assert t.flags[(3, 2)] == "rank-bound-exceeded"
    # the small arity-2 component is still computed
    assert t.entries[(2, 1)] == 1
    assert "rank-bound-exceeded" in render_betti(t)


def test_betti_words_arity_zero_bracket_span_vanishes():
    t = betti_words(LIE, [0], 3)
    assert t.entries[(0, 0)] == 0
    assert t.entries[(0, 1)] == 0
    assert t.entries[(0, 2)] == 0
    assert t.mode == "xdeg-graded"


def test_render_betti_deterministic():
    t = betti_words(ASS, [1, 2], 3)
    out = render_betti(t)
    assert out == render_betti(t)
    assert "betti[1,0]=1" in out
    assert "betti[2,0]=2" in out
    assert "boundary-affected" in out


def test_hat_contraction_small_windows():
    checked, failures = hat_contraction_failures(
        preset("hat:ainfty", Bounds(3, 3, 0)))
    assert failures == [] and checked == 40
    checked, failures = hat_contraction_failures(
        preset("hat:mc:linfty", Bounds(3, 3, 2)))
    assert failures == [] and checked == 514
    checked, failures = hat_contraction_failures(
        preset("hat:mc:ainfty", Bounds(3, 3, 2)))
    assert failures == []


def test_hat_contraction_rejects_identity():
    p = preset("hat:ainfty", Bounds(2, 2, 0))
    with pytest.raises(ValueError):
        hat_contraction(p, single(p.table, 1))


def test_word_reports():
    checked, failures = word_d_squared_failures(ASS, 3, 3)
    assert failures == [] and checked > 50
    checked, failures = word_homotopy_failures(LIE, 3, 3)
    assert failures == []
    checked, failures = twisted_d_squared_failures(LIE, 3, 2)
    assert failures == []


def test_certificates_pass_at_small_windows():
    assert compare_theorem("hat-acyclic", arity=3, weight=3).ok
    assert compare_theorem("l-script-acyclic", arity=3, weight=3, xdeg=2).ok
    assert compare_theorem("a-script-acyclic", arity=3, weight=3, xdeg=2).ok
    assert compare_theorem("ass-mc-quasi", n=2, x=3).ok
    assert compare_theorem("lie-mc-quasi", n=3, x=3).ok
    assert compare_theorem("tw-lie", n=3, x=2).ok
    assert compare_theorem("tw-ass", n=3, x=2).ok


def test_certificate_render_contract():
    r = compare_theorem("tw-lie", n=2, x=1)
    out = render_certificate(r)
    assert "certificate=tw-lie" in out
    assert "result=PASS" in out
    assert f"checked={r.checked}" in out
    assert render_certificate(r) == out


def test_unknown_certificate():
    with pytest.raises(KeyError):
        compare_theorem("no-such-theorem")
    assert "hat-acyclic" in certificate_names()
