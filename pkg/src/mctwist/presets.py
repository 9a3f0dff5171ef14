"""Standard presentations and the constructions connecting them.

Families built here:
  * planar and labeled ("symmetric-mode") cobar families with generators
    m1, m2, ... of arity n, all odd;
  * the fully-symmetric shuffle-cobar family;
  * minimum-arity-2 quotients of either;
  * the master-equation adjunction: an even arity-0 generator x with
    d(x) = sum_n c_n phi(m_n)(x,...,x), where c_n = 1/n! over a fully
    symmetric carrier and c_n = 1 over a planar carrier (the planar rule is
    the shadow of the symmetric one: all n! labelings agree once every slot
    holds x);
  * twisting the differential by an odd unary element u with
    d(u) + u o u = 0:  d^u(g) = d(g) + u o_1 g - (-1)^{|g|} sum_i g o_i u;
  * the contractible hull: adjoin an odd unary m with d(m) = -m o m, then
    twist by m (so the new rule is d^m(m) = +m o m), plus the explicit
    contracting homotopy on trees with a non-m vertex below the root chain;
  * the arity-wise twisting endomorphism: x -> -x and m_n -> insertions of
    x into higher generators, extended multiplicatively over trees.

Generator names are m1, m2, ... in every family; parities: m_n odd, x even,
m odd.  All parametric CLI names resolve through preset().
"""

import itertools
import math
from fractions import Fraction

from .engine import (Bounds, OperadPresentation, differential,
                     quotient_by_generators, truncate)
from .trees import (FREE, PLANAR, SYMMETRIC, Element, Generator, act,
                    compose, compose_many, element, element_str, is_leaf,
                    leaf_labels, relabel, single, term_parity, term_str)


def _m(n):
    return f"m{n}"


def shuffle_permutations(p, q):
    """Permutations of 1..p+q increasing on the first p and the last q slots."""
    for first in itertools.combinations(range(1, p + q + 1), p):
        rest = [j for j in range(1, p + q + 1) if j not in first]
        yield (*first, *rest)


def cobar_rule(p, name):
    """d(m_n) = sum_k sum_i m_k o_i m_(n-k+1), unit coefficients; over a
    fully-symmetric carrier the slot sum becomes the shuffle sum."""
    g = p.table[name]
    n = g.arity
    out = Element.zero(n)
    for k in range(1, n + 1):
        j = n - k + 1
        if _m(k) not in p.table or _m(j) not in p.table:
            continue
        outer = p.generator_element(_m(k))
        inner = p.generator_element(_m(j))
        if g.symmetry == SYMMETRIC:
            base = compose(p.table, outer, 1, inner)
            for sh in shuffle_permutations(j, k - 1):
                out = out + act(p.table, sh, base)
        else:
            for i in range(1, k + 1):
                out = out + compose(p.table, outer, i, inner)
    return out


def _cobar_family(symmetry, min_arity=1):
    def mk_gens(max_arity):
        return [Generator(_m(n), n, 1, symmetry)
                for n in range(min_arity, max_arity + 1)]
    return mk_gens


def make_Ainfty(mode, bounds, name=None):
    """Planar cobar family; mode "symmetric" keeps the same rule on freely
    labeled trees (no identifications)."""
    if mode not in ("planar", "symmetric"):
        raise ValueError(f"unknown mode {mode!r}")
    symmetry = PLANAR if mode == "planar" else FREE
    default = "Ainfty" if mode == "planar" else "Ainfty-sym"
    return OperadPresentation(name or default, bounds,
                              _cobar_family(symmetry), cobar_rule)


def make_Linfty(bounds, name=None):
    """Shuffle-cobar family on fully-symmetric generators."""
    return OperadPresentation(name or "Linfty", bounds,
                              _cobar_family(SYMMETRIC), cobar_rule)


def _renamed(p, name):
    return OperadPresentation(name, p.bounds, p._mk_generators, p._mk_diff)


def make_ainfty(bounds, name=None):
    return _renamed(quotient_by_generators(make_Ainfty("planar", bounds),
                                           ["m1"]), name or "ainfty")


def make_linfty(bounds, name=None):
    return _renamed(quotient_by_generators(make_Linfty(bounds), ["m1"]),
                    name or "linfty")


def make_zero(bounds, name="zero"):
    return OperadPresentation(name, bounds, lambda ma: [],
                              lambda p, g: Element.zero(0))


def identity_rule(pres, n):
    """phi(m_n) = m_n when present, zero otherwise."""
    nm = _m(n)
    return pres.generator_element(nm) if nm in pres.table else None


def carrier_kind(p):
    """\"L\" over a fully-symmetric carrier, \"A\" otherwise."""
    for g in p.table.values():
        if g.arity > 0 and g.symmetry == SYMMETRIC:
            return "L"
    return "A"


def make_MC(p, phi=None, kind=None, name=None):
    """Adjoin the even arity-0 generator x with

        d(x) = sum_{n>=1} c_n phi(m_n) o (x,...,x),

    truncated at the x-degree bound; c_n = 1/n! when kind is "L" and 1 when
    kind is "A" (default: inferred from the carrier symmetry).  phi is a rule
    (presentation, n) -> Element or None; default is the identity rule."""
    if "x" in p.table:
        raise ValueError("generator x already present")
    if kind is None:
        kind = carrier_kind(p)
    if kind not in ("L", "A"):
        raise ValueError(f"unknown kind {kind!r}")
    rule = identity_rule if phi is None else phi
    base_gens, base_diff = p._mk_generators, p._mk_diff

    def mk_gens(max_arity):
        return [*base_gens(max_arity), Generator("x", 0, 0, SYMMETRIC)]

    def mk_diff(pres, gname):
        if gname != "x":
            return base_diff(pres, gname)
        x = pres.generator_element("x")
        out = Element.zero(0)
        for n in range(1, pres.bounds.xdeg + 1):
            img = rule(pres, n)
            if img is None or img.is_zero():
                continue
            c = Fraction(1) if kind == "A" else Fraction(1, math.factorial(n))
            out = out + compose_many(pres.table, img, [x] * n).scale(c)
        return out

    return OperadPresentation(name or f"mc:{p.name}", p.bounds,
                              mk_gens, mk_diff)


def adjoin_m(p, name=None):
    """Free extension by an odd unary m with d(m) = -m o m."""
    if "m" in p.table:
        raise ValueError("generator m already present")
    base_gens, base_diff = p._mk_generators, p._mk_diff

    def mk_gens(max_arity):
        return [*base_gens(max_arity), Generator("m", 1, 1, PLANAR)]

    def mk_diff(pres, gname):
        if gname == "m":
            return single(pres.table, ("m", ("m", 1)), -1)
        return base_diff(pres, gname)

    return OperadPresentation(name or f"{p.name}[m]", p.bounds,
                              mk_gens, mk_diff)


def _unary_odd(p, u):
    if u.arity != 1:
        raise ValueError(f"twisting element has arity {u.arity}")
    for nd in u.terms:
        if term_parity(nd, p.table) != 1:
            raise ValueError("twisting element must be odd")


def twist_by_unary(p, u, check=True, name=None):
    """New differential d^u(g) = d(g) + u o_1 g - (-1)^{|g|} sum_i g o_i u.

    u is an odd arity-1 Element over p's table, or a callable
    presentation -> Element (re-evaluated when bounds change, so that
    bound-dependent tails stay consistent under widening).  The square-zero
    precondition d(u) + u o_1 u = 0 is verified within bounds."""
    u_fn = u if callable(u) else (lambda pres, _u=u: truncate(pres, _u))
    if check:
        uu = u_fn(p)
        _unary_odd(p, uu)
        res = truncate(p, differential(p, uu) + compose(p.table, uu, 1, uu))
        if not res.is_zero():
            raise ValueError("twisting element fails d(u) + u o u = 0: "
                             + element_str(res))
    base_gens, base_diff = p._mk_generators, p._mk_diff

    def mk_diff(pres, gname):
        uu = u_fn(pres)
        g = pres.table[gname]
        ge = pres.generator_element(gname)
        out = base_diff(pres, gname) + compose(pres.table, uu, 1, ge)
        sgn = 1 if g.parity else -1
        for i in range(1, g.arity + 1):
            out = out + compose(pres.table, ge, i, uu).scale(sgn)
        return out

    return OperadPresentation(name or f"{p.name}^u", p.bounds,
                              base_gens, mk_diff)


def make_hat(p, name=None):
    """Adjoin m and twist by it; the twisted rule gives d^m(m) = +m o m."""
    q = adjoin_m(p)
    return twist_by_unary(q, lambda pres: pres.generator_element("m"),
                          name=name or f"hat:{p.name}")


def root_chain(nd):
    """(r, subtree) where r is the maximal run of m's from the root."""
    r = 0
    while not is_leaf(nd) and nd[0] == "m":
        r += 1
        nd = nd[1]
    return r, nd


def hat_homotopy(p, e):
    """Strip one root m from terms with an odd root chain; zero on even
    chains.  Every term must have a non-m vertex below the chain (the
    complement of the pure powers and of the identity)."""
    pairs = []
    for nd, c in e.terms.items():
        r, rest = root_chain(nd)
        if is_leaf(rest):
            raise ValueError(f"term {term_str(nd)} outside the complement")
        if r % 2 == 1:
            pairs.append((c, nd[1]))
    return element(p.table, e.arity, pairs)


def power_homotopy(p, e):
    """Companion homotopy on the pure powers m^r (r >= 1): strip one m from
    even powers, zero on odd powers."""
    pairs = []
    for nd, c in e.terms.items():
        r, rest = root_chain(nd)
        if not (is_leaf(rest) and r >= 1):
            raise ValueError(f"term {term_str(nd)} is not a pure power")
        if r % 2 == 0:
            pairs.append((c, nd[1]))
    return element(p.table, e.arity, pairs)


def operad_map_apply(target_table, gen_image, e):
    """Extend a parity-preserving generator assignment multiplicatively over
    tree terms.  gen_image(name) -> Element over target_table."""
    def node_image(nd):
        if is_leaf(nd):
            return single(target_table, 1)
        args, glob = [], []
        for child in nd[1:]:
            labs = sorted(leaf_labels(child))
            sig = [0] * (max(labs) if labs else 0)
            for r, lab in enumerate(labs, 1):
                sig[lab - 1] = r
            args.append(node_image(relabel(child, sig)))
            glob.extend(labs)
        out = compose_many(target_table, gen_image(nd[0]), args)
        if glob != list(range(1, len(glob) + 1)):
            out = act(target_table, tuple(glob), out)
        return out

    out = Element.zero(e.arity)
    for nd, c in e.terms.items():
        out = out + node_image(nd).scale(c)
    return out


def _tw_gen_image(p, kind, cache, gname):
    if gname in cache:
        return cache[gname]
    if gname == "x":
        img = p.generator_element("x").scale(-1)
    elif gname == "m":
        raise ValueError("the twisting endomorphism is not defined on m")
    else:
        n = p.table[gname].arity
        x = p.generator_element("x")
        pairs = []
        out = Element.zero(n)
        for i in range(0, p.bounds.xdeg + 1):
            nm = _m(n + i)
            if nm not in p.table:
                continue
            if kind == "L":
                big = p.generator_element(nm)
                out = out + compose_many(p.table, big, [x] * i).scale(
                    Fraction(1, math.factorial(i)))
            else:
                for slots in itertools.combinations(range(n + i), i):
                    lab = itertools.count(1)
                    children = [("x",) if s in slots else next(lab)
                                for s in range(n + i)]
                    pairs.append((1, (nm, *children)))
        if pairs:
            out = out + element(p.table, n, pairs)
        img = truncate(p, out)
    cache[gname] = img
    return img


def tw_automorphism(p, e, kind=None):
    """x -> -x, m_n -> x-insertions into higher generators (1/i! over a
    fully-symmetric carrier; every ordered insertion pattern with unit
    coefficient over a planar carrier), extended multiplicatively."""
    if "x" not in p.table:
        raise ValueError("presentation has no generator x")
    if kind is None:
        kind = carrier_kind(p)
    cache = {}
    img = operad_map_apply(p.table, lambda g: _tw_gen_image(p, kind, cache, g),
                           e)
    return truncate(p, img)


def alpha_element(p, phi=None):
    """The canonical odd unary element

        alpha = - sum_{n>=1} c_n phi(m_{n+1}) o (x,...,x, open slot)

    (c_n as in make_MC).  Requires the rule to vanish on m_1; with the
    default identity rule this means the carrier has no m1."""
    if "x" not in p.table:
        raise ValueError("presentation has no generator x")
    kind = carrier_kind(p)
    if phi is None:
        if "m1" in p.table:
            raise ValueError("identity rule does not vanish on m1; "
                             "alpha needs a rule factoring through the "
                             "minimum-arity-2 quotient")
        rule = identity_rule
    else:
        img1 = phi(p, 1)
        if img1 is not None and not img1.is_zero():
            raise ValueError("rule does not vanish on m1")
        rule = phi
    x = p.generator_element("x")
    out = Element.zero(1)
    for n in range(1, p.bounds.xdeg + 1):
        img = rule(p, n + 1)
        if img is None or img.is_zero():
            continue
        if kind == "L":
            out = out + compose_many(p.table, img, [x] * n).scale(
                Fraction(-1, math.factorial(n)))
        else:
            for j in range(1, n + 2):
                filled = img
                for i in range(n + 1, 0, -1):
                    if i != j:
                        filled = compose(p.table, filled, i, x)
                out = out - filled
    return truncate(p, out)


def make_Tw(p, phi=None, name=None):
    """MC adjunction followed by twisting with alpha."""
    mc = make_MC(p, phi=phi, name=f"mc:{p.name}")
    return twist_by_unary(mc, lambda pres: alpha_element(pres, phi),
                          name=name or f"tw-op:{p.name}")


class PhiRule:
    """A generator assignment between presentations, with validation.

    rule(name) -> Element over target's table (None means zero); images must
    preserve arity and parity.  chain_failures() lists the generators where
    d_target(phi(g)) differs from phi(d_source(g)) within bounds."""

    def __init__(self, source, target, rule, factors_through_min2,
                 name="phi"):
        self.source = source
        self.target = target
        self.rule = rule
        self.factors_through_min2 = factors_through_min2
        self.name = name
        self._cache = {}

    def image(self, gname):
        if gname not in self._cache:
            g = self.source.table[gname]
            img = self.rule(gname)
            if img is None:
                img = Element.zero(g.arity)
            if img.arity != g.arity:
                raise ValueError(f"image of {gname} has arity {img.arity}")
            for nd in img.terms:
                if term_parity(nd, self.target.table) != g.parity:
                    raise ValueError(f"image of {gname} changes parity")
            self._cache[gname] = img
        return self._cache[gname]

    def apply(self, e):
        return operad_map_apply(self.target.table, self.image, e)

    def chain_failures(self, max_arity=None):
        cap = self.source.bounds.arity if max_arity is None else max_arity
        fails = []
        for gname in sorted(self.source.table):
            if self.source.table[gname].arity > cap:
                continue
            lhs = differential(self.target, self.image(gname))
            rhs = self.apply(
                differential(self.source,
                             self.source.generator_element(gname)))
            if lhs != rhs:
                fails.append((gname, element_str(lhs - rhs)))
        return fails


def phi_identity(source, target):
    """m_n -> m_n by name."""
    def rule(gname):
        if gname in target.table:
            return target.generator_element(gname)
        return None
    return PhiRule(source, target, rule, "m1" not in source.table,
                   name="id")


def phi_symmetrize(source, target):
    """m_n -> the sum of all n! leaf relabelings of the planar m_n, unit
    coefficients; target must carry a free action."""
    def rule(gname):
        if gname not in target.table:
            return None
        base = target.generator_element(gname)
        n = target.table[gname].arity
        out = Element.zero(n)
        for sig in itertools.permutations(range(1, n + 1)):
            out = out + act(target.table, sig, base)
        return out
    return PhiRule(source, target, rule, "m1" not in source.table,
                   name="sym")


_PHI_TAGS = ("id",)


def preset(name, bounds):
    """Resolve a preset name, including the parametric forms
    hat:<preset>, mc:<preset>[:<phi>], tw-op:<preset>[:<phi>]."""
    simple = {
        "Ainfty": lambda b: make_Ainfty("planar", b),
        "Ainfty-sym": lambda b: make_Ainfty("symmetric", b),
        "Linfty": make_Linfty,
        "ainfty": make_ainfty,
        "ainfty-sym": lambda b: _renamed(
            quotient_by_generators(make_Ainfty("symmetric", b), ["m1"]),
            "ainfty-sym"),
        "linfty": make_linfty,
        "L-script": lambda b: make_MC(make_Linfty(b), name="L-script"),
        "A-script": lambda b: make_MC(make_Ainfty("planar", b),
                                      name="A-script"),
    }
    if name in simple:
        return simple[name](bounds)
    head, sep, rest = name.partition(":")
    if not sep:
        raise KeyError(f"unknown preset {name!r}")
    if head == "hat":
        return make_hat(preset(rest, bounds), name=name)
    if head in ("mc", "tw-op"):
        inner, _, tag = rest.partition(":")
        if tag and tag not in _PHI_TAGS:
            raise KeyError(f"unknown phi tag {tag!r} (supported: id)")
        base = preset(inner, bounds)
        if head == "mc":
            return make_MC(base, name=name)
        return make_Tw(base, name=name)
    raise KeyError(f"unknown preset {name!r}")
