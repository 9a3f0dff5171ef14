"""Formal vector fields on a shifted space and the big complexes they span.

A vector field of arity n on the shifted space PiV is a multilinear map
(PiV)^{(x) n} -> PiV with n >= 1 (fields vanish at the origin; constant
terms are out of scope).  Symmetric fields ("c" flavor) are the
coordinates of coderivations of the cofree cocommutative coalgebra on
PiV, raw fields ("a" flavor) those of the cotensor coalgebra.  The
insertion product feeds the second field through slots of the first, and
[f, g] = f*g - (-1)^{|f||g|} g*f turns each flavor into a graded Lie
algebra; d_V acts through the bracket with delta = d_V-as-a-field.  A
bounded structure on V is the same thing as an odd field family g with
[delta, g] + (1/2)[g, g] = 0; this module realizes the dictionary
explicitly:

* the big complex on W = fields (+) V whose kind-L structure relations
  hold identically within the arity bound, and whose Maurer-Cartan
  elements are exactly pairs (structure on V, MC element of it);
* the twisting morphism of the big complex, sending a Maurer-Cartan
  pair (m, xi) to (m^xi, -xi) by partial application of the fields;
* structures on U (+) I induced by a family of fields on I driven by U
  (semidirect data with "cocycle" constant terms allowed);
* Block differentials d_A + d_V + xi on A (x) V and the transport of
  algebra structures along a unary twist of an operad presentation.

Conventions.  Fields are EndoMap values over the shifted parities of the
base, so all Koszul signs ride on EndoMap.compose/act/apply.  The big
structure's bracket piece carries the dg-Lie shift sign
m~_2(Pi u, Pi v) = (-1)^{|u|} Pi [u, v] (|u| the field parity), its
pairing piece puts the field in the first slot with no extra sign:
m~_n(Pi e, w_1, .., w_{n-1}) = Pi e(w_1, .., w_{n-1}), and the induced
differential on the field summand is -[delta, -].  With those choices
the structure relations of the big complex hold identically, and they
are forced by the relation checks in the test suite.  The dictionary
between structure coordinates and field coordinates is not the identity:
each component rides with the sign (-1)^{|e|+1} of its basis field (see
_dict_sign), which makes the field part of the big residual match the
relation failures and its V part match the classical residual
coefficient for coefficient, with no leftover factors.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import (combinations, combinations_with_replacement,
                       permutations, product)
from math import factorial

from .algebras import (DgSpace, EndoMap, InftyStructure, RelationReport,
                       basis_elt, chain_residual, elt_parity, endo_zero,
                       eval_element, koszul_sort, mc_residual,
                       relation_residual, space_diff, v_add, v_sub)
from .coeffs import NilCdga
from .presets import twist_by_unary


# ---------------------------------------------------------------------------
# Field labels and their EndoMap realizations.

def _no_odd_repeat(key, pip):
    return not any(a == b and pip[a] for a, b in zip(key, key[1:]))


def field_labels(space, kind, bound):
    """All labels (inputs, target) of fields with 1 <= arity < bound.

    "c" labels are sorted index tuples without repeated odd entries, "a"
    labels raw tuples; the target ranges over the whole basis.
    """
    pip = space.pi_parities
    dim = space.dim
    labels = []
    for n in range(1, bound):
        if kind == "c":
            keys = [k for k in combinations_with_replacement(range(dim), n)
                    if _no_odd_repeat(k, pip)]
        else:
            keys = list(product(range(dim), repeat=n))
        for key in keys:
            for t in range(dim):
                labels.append((key, t))
    return tuple(labels)


def field_parity(space, label):
    key, t = label
    pip = space.pi_parities
    return (sum(pip[i] for i in key) + pip[t]) % 2


def field_endo(space, coeffs, kind, label):
    """The basis field with the given label, as an EndoMap."""
    key, t = label
    pip = space.pi_parities
    table = {}
    if kind == "c":
        for tt in set(permutations(key)):
            _, sign = koszul_sort(tt, pip)
            table[tt] = {((), t): Fraction(sign)}
    else:
        table[tuple(key)] = {((), t): Fraction(1)}
    return EndoMap(pip, coeffs, len(key), field_parity(space, label), table)


def field_coords(space, kind, bound, endo):
    """Coordinates of an EndoMap in the field basis; {} above the bound.

    Values must be scalar (no coefficient part), and in the "c" flavor the
    map must genuinely be symmetric; anything outside the span of the
    in-bound basis fields is rejected rather than silently dropped.
    """
    if endo.arity >= bound:
        return {}
    if endo.arity == 0:
        raise ValueError("constant fields are out of scope")
    pip = space.pi_parities
    coords = {}
    for tt, val in endo.table.items():
        if kind == "c":
            key, _ = koszul_sort(tt, pip)
            if key != tt:
                continue
            if not _no_odd_repeat(key, pip):
                raise ValueError(
                    "not symmetric: nonzero on a repeated odd input")
        else:
            key = tt
        for (mono, t), c in val.items():
            if mono != ():
                raise ValueError("field coordinates must be scalar")
            coords[(key, t)] = c
    recon = {}
    for (key, t), c in coords.items():
        if kind == "c":
            for tt in set(permutations(key)):
                _, sign = koszul_sort(tt, pip)
                recon[tt] = v_add(recon.get(tt, {}), {((), t): c * sign})
        else:
            recon[key] = v_add(recon.get(key, {}), {((), t): c})
    recon = {tt: val for tt, val in recon.items() if val}
    if recon != endo.table:
        raise ValueError("map does not lie in the span of the field basis")
    return coords


# ---------------------------------------------------------------------------
# Insertion products and the field bracket.

def planar_star(f, g):
    """Sum of the planar insertions of g into each slot of f."""
    out = None
    for i in range(1, f.arity + 1):
        piece = f.compose(i, g)
        out = piece if out is None else out.add(piece)
    if out is None:
        return endo_zero(f.parities, f.coeffs, max(f.arity + g.arity - 1, 0),
                         (f.parity + g.parity) % 2)
    return out


def symmetric_star(f, g):
    """Sum over the ways to feed a block of the inputs through g into f.

    Realized as f o_1 g followed by the permutations that scatter the
    block: for each choice P of |g| input positions, the summand sends
    (x_1..x_n) to +- f(g(x_P), x_rest) with both blocks in input order.
    """
    if f.arity == 0:
        return endo_zero(f.parities, f.coeffs, max(g.arity - 1, 0),
                         (f.parity + g.parity) % 2)
    h = f.compose(1, g)
    n, k = h.arity, g.arity
    out = None
    for P in combinations(range(1, n + 1), k):
        rest = tuple(q for q in range(1, n + 1) if q not in P)
        piece = h.act(P + rest)
        out = piece if out is None else out.add(piece)
    return out


def field_bracket(kind, f, g):
    """[f, g] = f*g - (-1)^{|f||g|} g*f in the chosen flavor."""
    star = symmetric_star if kind == "c" else planar_star
    sign = -1 if (f.parity * g.parity) % 2 else 1
    return star(f, g).sub(star(g, f).scale(sign))


def delta_field(space, coeffs):
    """d_V as an arity-1 field on the shifted space."""
    table = {(j,): {((), i): c for i, c in col.items()}
             for j, col in space.d.items()}
    return EndoMap(space.pi_parities, coeffs, 1, 1, table)


# ---------------------------------------------------------------------------
# The big complex on fields (+) V.

@dataclass
class TildeComplex:
    """Fields on PiV adjoined to V, carrying the pairing structure."""

    kind: str                 # "c" or "a": flavor of the field coordinates
    base: DgSpace             # V
    bound: int                # arity bound of the big structure
    labels: tuple             # field labels, in basis order
    label_index: dict         # label -> basis index in the big space
    space: DgSpace            # W = fields (+) V
    structure: InftyStructure  # kind L on W

    @property
    def v_offset(self):
        return len(self.labels)

    def __repr__(self):
        return (f"TildeComplex({self.kind!r}, dim V={self.base.dim}, "
                f"bound={self.bound}, {len(self.labels)} fields)")


def _label_name(space, label):
    key, t = label
    inside = ",".join(space.names[i] for i in key)
    return f"e({inside}->{space.names[t]})"


def build_tilde(kind, space, bound, coeffs=None):
    """The structure on fields (+) V whose MC elements are pairs.

    The differential is [delta, -] on fields and d_V on V; m~_2 restricted
    to fields is the shifted bracket, and for every n the pairing
    m~_n(Pi e, w_1..w_{n-1}) = Pi e(w_1..w_{n-1}) pairs an (n-1)-ary field
    with inputs from V ("a"-flavor pairings are symmetrized over the
    orderings of the w's).  All other components vanish.
    """
    if kind not in ("c", "a"):
        raise ValueError("flavor is 'c' or 'a'")
    if bound < 2:
        raise ValueError("arity bound below 2 leaves no fields")
    if coeffs is None:
        coeffs = NilCdga.ground()
    ground = NilCdga.ground()
    labels = field_labels(space, kind, bound)
    label_index = {lab: k for k, lab in enumerate(labels)}
    off = len(labels)
    names = [_label_name(space, lab) for lab in labels] + list(space.names)
    parities = ([field_parity(space, lab) for lab in labels]
                + list(space.parities))
    fields = [field_endo(space, ground, kind, lab) for lab in labels]
    delta = delta_field(space, ground)

    d = {}
    for k, e in enumerate(fields):
        col = {label_index[lab]: -c
               for lab, c in field_coords(
                   space, kind, bound, field_bracket(kind, delta, e)).items()}
        if col:
            d[k] = col
    for j, col in space.d.items():
        d[off + j] = {off + i: c for i, c in col.items()}
    big = DgSpace(names, parities, d)

    maps = {n: {} for n in range(1, bound + 1)}
    pip_big = big.pi_parities
    for i in range(off):
        for j in range(i, off):
            if i == j and pip_big[i]:
                continue  # [e, e] = 0 for even fields, by symmetry
            br = field_bracket(kind, fields[i], fields[j])
            sign = -1 if parities[i] % 2 else 1
            val = {((), label_index[lab]): c * sign
                   for lab, c in field_coords(space, kind, bound, br).items()}
            if val:
                maps[2][(i, j)] = val
    for lab, k in label_index.items():
        key, t = lab
        n = len(key) + 1
        if kind == "c":
            sym = fields[k]
        else:
            sym = None
            for sigma in permutations(range(1, len(key) + 1)):
                piece = fields[k].act(sigma)
                sym = piece if sym is None else sym.add(piece)
        for S in combinations_with_replacement(range(space.dim), n - 1):
            val = sym.value(S)
            if not val:
                continue
            wkey = (k,) + tuple(off + s for s in S)
            entry = {((), off + vt): c for (_, vt), c in val.items()}
            maps[n][wkey] = v_add(maps[n].get(wkey, {}), entry)

    struct = InftyStructure("L", big, coeffs, bound, maps)
    return TildeComplex(kind, space, bound, labels, label_index, big, struct)


def build_tilde_c(space, bound, coeffs=None):
    """Symmetric-flavor big complex; its MC pairs are kind-L structures."""
    return build_tilde("c", space, bound, coeffs)


def build_tilde_a(space, bound, coeffs=None):
    """Planar-flavor big complex; its MC pairs are kind-A structures."""
    return build_tilde("a", space, bound, coeffs)


# ---------------------------------------------------------------------------
# The dictionary between structures on V and field elements.

def _check_dictionary(tilde, s):
    want = "L" if tilde.kind == "c" else "A"
    if s.kind != want:
        raise ValueError(f"a {tilde.kind!r}-flavor complex encodes "
                         f"kind-{want} structures, not kind-{s.kind}")
    if s.space is not tilde.base:
        raise ValueError("structure lives on a different space")
    if s.coeffs is not tilde.structure.coeffs:
        raise ValueError("structure uses different coefficients")
    if s.max_arity > tilde.bound - 1:
        raise ValueError(
            f"structure arity {s.max_arity} exceeds the field bound "
            f"{tilde.bound - 1}")


def _dict_sign(tilde, label):
    """Sign (-1)^{|e|+1} mediating structure and field coordinates.

    Odd basis fields carry their structure coefficients unchanged; even
    ones flip.  The same sign converts relation failures into the field
    coordinates of the big residual, so it appears in embed_structure,
    induced_structure and _relation_coords alike.  It is forced by
    requiring the V part of the big residual to equal the classical
    Maurer-Cartan residual coefficient for coefficient.
    """
    return 1 if field_parity(tilde.base, label) % 2 else -1


def embed_structure(tilde, s):
    """A structure on V as an element supported on the field part."""
    _check_dictionary(tilde, s)
    out = {}
    for n in range(1, s.max_arity + 1):
        for key, val in s.maps[n].items():
            for (mono, vt), c in val.items():
                sign = _dict_sign(tilde, (key, vt))
                out = v_add(out,
                            {(mono, tilde.label_index[(key, vt)]): c * sign})
    return out


def induced_structure(tilde, g):
    """The structure on V read off a pure-field element (embed's inverse)."""
    maps = {}
    off = tilde.v_offset
    for (mono, k), c in g.items():
        if k >= off:
            raise ValueError("element has components along V")
        key, vt = tilde.labels[k]
        n = len(key)
        maps.setdefault(n, {}).setdefault(key, {})
        maps[n][key] = v_add(maps[n][key],
                             {(mono, vt): c * _dict_sign(tilde, (key, vt))})
    kind = "L" if tilde.kind == "c" else "A"
    return InftyStructure(kind, tilde.base, tilde.structure.coeffs,
                          tilde.bound - 1, maps)


def include_point(tilde, xi):
    """An element of A (x) PiV as an element of the big space."""
    return {(m, i + tilde.v_offset): c for (m, i), c in xi.items()}


def split_element(tilde, elt):
    """(field part, V part) of a big-space element, V part shifted down."""
    off = tilde.v_offset
    c_part = {k: v for k, v in elt.items() if k[1] < off}
    v_part = {(m, i - off): c for (m, i), c in elt.items() if i >= off}
    return c_part, v_part


# ---------------------------------------------------------------------------
# One Maurer-Cartan equation against two classical ones.

def _relation_coords(tilde, report):
    """Relation failures written in field coordinates of the big space."""
    pip = tilde.base.pi_parities
    out = {}
    for _, key, elem in report.failures:
        if tilde.kind == "c":
            srt, _ = koszul_sort(key, pip)
            if srt != key:
                continue  # transported copies of the sorted representative
        for (mono, vt), c in elem.items():
            sign = _dict_sign(tilde, (key, vt))
            out = v_add(out,
                        {(mono, tilde.label_index[(key, vt)]): c * sign})
    return out


@dataclass
class McPairReport:
    """The big-complex residual of (structure, point) split and compared."""

    structure: InftyStructure
    point: dict
    tilde: TildeComplex
    combined_residual: dict
    c_part: dict
    v_part: dict
    relations: RelationReport
    mc: dict

    @property
    def pair_ok(self):
        return not self.combined_residual

    @property
    def classical_ok(self):
        return self.relations.ok and not self.mc

    @property
    def c_part_matches_relations(self):
        return self.c_part == _relation_coords(self.tilde, self.relations)

    @property
    def v_part_matches_mc(self):
        return self.v_part == self.mc

    @property
    def ok(self):
        """The two sides agree coordinate by coordinate, not just as bits."""
        return (self.pair_ok == self.classical_ok
                and self.c_part_matches_relations
                and self.v_part_matches_mc)

    def __repr__(self):
        return (f"McPairReport(pair_ok={self.pair_ok}, "
                f"classical_ok={self.classical_ok}, ok={self.ok})")


def mc_pair_check(space, coeffs, s, xi, tilde=None):
    """Check that one element of the big complex encodes a classical pair.

    The element g + xi (structure embedded, point included) is fed to the
    big Maurer-Cartan residual; the field part of the result must match
    the structure-relation failures of s and the V part must match the
    classical residual of xi, coefficient for coefficient.  Passing a
    prebuilt big complex avoids rebuilding it across many candidates.
    """
    if s.space is not space or s.coeffs is not coeffs:
        raise ValueError("structure must live on the given space "
                         "and coefficients")
    if tilde is None:
        tilde = build_tilde("c" if s.kind == "L" else "a", space,
                            s.max_arity + 1, coeffs)
    _check_dictionary(tilde, s)
    eta = v_add(embed_structure(tilde, s), include_point(tilde, xi))
    combined = mc_residual(tilde.structure, eta)
    c_part, v_part = split_element(tilde, combined)
    return McPairReport(s, xi, tilde, combined, c_part, v_part,
                        relation_residual(s), mc_residual(s, xi))


# ---------------------------------------------------------------------------
# The twisting morphism of the big complex.

def tw_on_tilde(tilde, eta):
    """Image of an even big-space element under the twisting morphism.

    Writing eta = g + xi, each field component of g is partially applied
    to copies of xi -- through the leading slots with coefficient 1/j! in
    the "c" flavor, through every slot pattern with unit coefficients in
    the "a" flavor -- and the point maps to -xi.  On a Maurer-Cartan pair
    (m, xi) this lands on (m^xi, -xi) exactly, m^xi being the twist of m.
    """
    coeffs = tilde.structure.coeffs
    if elt_parity(eta, tilde.space.pi_parities, coeffs) == 1:
        raise ValueError("the twisting morphism acts on even elements")
    off = tilde.v_offset
    c_part, xi = split_element(tilde, eta)
    out = {(m, i + off): -c for (m, i), c in xi.items()}
    dim = tilde.base.dim
    for (mono, k), c0 in c_part.items():
        out = v_add(out, {(mono, k): c0})
        if not xi:
            continue
        key, t = tilde.labels[k]
        e = field_endo(tilde.base, coeffs, tilde.kind, (key, t))
        n = e.arity
        for j in range(1, n):
            if tilde.kind == "c":
                patterns = [tuple(range(j))]
                coef = Fraction(1, factorial(j))
                tails = list(combinations_with_replacement(range(dim), n - j))
            else:
                patterns = list(combinations(range(n), j))
                coef = Fraction(1)
                tails = list(product(range(dim), repeat=n - j))
            for pat in patterns:
                rest = [q for q in range(n) if q not in pat]
                for tail in tails:
                    ins = [None] * n
                    for q in pat:
                        ins[q] = xi
                    for q, b in zip(rest, tail):
                        ins[q] = basis_elt(b)
                    val = e.apply(ins)
                    for (m2, vt), c2 in val.items():
                        lab2 = tilde.label_index.get((tail, vt))
                        if lab2 is None:
                            continue  # repeated odd inputs carry nothing
                        prod = coeffs.mul_mono(mono, m2)
                        if prod is None:
                            continue
                        m3, s3 = prod
                        # Absorbing point monomials into the field label
                        # moves them across one parity shift; the walk and
                        # product-order differences cancel pairwise.
                        if coeffs.mono_parity(m2) % 2:
                            s3 = -s3
                        out = v_add(out, {(m3, lab2): c0 * c2 * coef * s3})
    return out


# ---------------------------------------------------------------------------
# Structures on U (+) I from a family of fields on I driven by U.

def extension_from_map(f, U, I, bound, mU=None, coeffs=None):
    """The structure on U (+) I built from U-indexed fields on I.

    ``f[k]`` maps sorted tuples of shifted-U basis indices (length k) to
    field coordinates {(key_I, target_I): c} over I, where key_I is a
    sorted tuple of shifted-I indices, possibly empty: the empty key is
    the constant ("cocycle") term.  The resulting kind-L maps are

        m_{k+l}(u_1..u_k, x_1..x_l) = (field at f_k(u's))(x_1..x_l)

    extended by the given structure mU on all-U inputs.  The relation
    report of the result is empty exactly when f satisfies the truncated
    compatibility conditions (action axioms, cocycle identities, ...), so
    building and checking is the honest verification path.
    """
    if coeffs is None:
        coeffs = NilCdga.ground()
    dimU = U.dim
    names = list(U.names) + list(I.names)
    parities = list(U.parities) + list(I.parities)
    d = {j: dict(col) for j, col in U.d.items()}
    for j, col in I.d.items():
        d[dimU + j] = {dimU + i: c for i, c in col.items()}
    big = DgSpace(names, parities, d)

    maps = {}

    def put(n, key, val):
        maps.setdefault(n, {}).setdefault(key, {})
        maps[n][key] = v_add(maps[n][key], val)

    for k, table in (f or {}).items():
        for ukey, coords in table.items():
            if len(ukey) != k:
                raise ValueError(f"key {ukey} under f[{k}] has wrong length")
            for (ikey, t), c in coords.items():
                n = k + len(ikey)
                if n > bound:
                    continue
                wkey = tuple(ukey) + tuple(dimU + i for i in ikey)
                put(n, wkey, {((), dimU + t): c})
    if mU is not None:
        if mU.kind != "L" or mU.space is not U:
            raise ValueError("mU must be a kind-L structure on the first "
                             "summand")
        for n in range(1, min(mU.max_arity, bound) + 1):
            for key, val in mU.maps[n].items():
                put(n, key, dict(val))
    return InftyStructure("L", big, coeffs, bound, maps)


# ---------------------------------------------------------------------------
# Block differentials on A (x) V and transport along unary operad twists.

@dataclass
class BlockModule:
    """A (x) V with the deformed differential d_A + d_V + xi."""

    space: DgSpace
    coeffs: NilCdga
    xi: EndoMap

    def dfun(self, elt):
        return v_add(space_diff(self.space, self.coeffs, elt),
                     self.xi.apply([elt]))

    def basis(self):
        return [(mono, i) for mono in self.coeffs.basis(with_unit=True)
                for i in range(self.space.dim)]

    def __repr__(self):
        return (f"BlockModule(dim V={self.space.dim}, "
                f"{len(self.xi.table)} xi columns)")


def block_module(coeffs, space, xi):
    """Verify that d_A + d_V + xi squares to zero and wrap it up.

    ``xi`` is an odd unary EndoMap over the plain (unshifted) parities of
    V with coefficients in A.  Squaring to zero of the total differential
    on every basis element of A (x) V is exactly the Maurer-Cartan
    property of xi inside A (x) End(V); failures raise.
    """
    if xi.parities != space.parities or xi.arity != 1 or xi.parity % 2 != 1:
        raise ValueError("xi must be an odd unary map over the plain "
                         "parities of V")
    for (j,), val in xi.table.items():
        for (mono, i), _ in val.items():
            have = (coeffs.mono_parity(mono) + space.parities[i]) % 2
            if have == space.parities[j]:
                raise ValueError("xi must flip total parity in every entry")
    mod = BlockModule(space, coeffs, xi)
    for mono, i in mod.basis():
        e = {(mono, i): Fraction(1)}
        if mod.dfun(mod.dfun(e)):
            raise ValueError(
                f"total differential does not square to zero on "
                f"{coeffs.mono_str(mono)} (x) {space.names[i]}")
    return mod


@dataclass
class BlockTransportReport:
    """Relation failures before and after a unary twist of the operad."""

    base_failures: list
    twisted_failures: list

    @property
    def ok(self):
        return not self.base_failures and not self.twisted_failures

    @property
    def transported_exactly(self):
        return self.base_failures == self.twisted_failures

    def __repr__(self):
        return (f"BlockTransportReport(base={len(self.base_failures)}, "
                f"twisted={len(self.twisted_failures)}, "
                f"exact={self.transported_exactly})")


def block_transport(p, rho, dfun, u, gens=None):
    """Same structure maps over the twisted operad and shifted differential.

    ``u`` is a unary Maurer-Cartan element of the presentation p (checked
    by the twist); the twisted presentation acts through the unchanged rho
    over e -> dfun(e) - rho(u)(e).  The failure lists coincide term by
    term: the twist transports algebra structures without touching the
    maps, and in particular one side satisfies its relations exactly when
    the other does.
    """
    base = chain_residual(p, rho, dfun, gens=gens)
    ptw = twist_by_unary(p, u)
    uend = eval_element(rho, u, arity=1)
    twisted = chain_residual(
        ptw, rho, lambda e: v_sub(dfun(e), uend.apply([e])), gens=gens)
    return BlockTransportReport(base, twisted)
