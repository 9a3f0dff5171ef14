"""Fixture manifests for arity-bounded structures, and a random sampler.

A fixture is a JSON manifest carrying one structure over nilpotent
coefficients: basis names and parities of the underlying space, its
differential entries, the coefficient generators with their differential,
the structure maps as sparse coefficient lists, and optionally a
Maurer-Cartan element.  Every number is an exact rational rendered as
``p`` or ``p/q``; list orderings are fixed by sorting, so equal fixtures
serialize to identical bytes and a twist/untwist round trip through the
serializer is the identity on the file.

The sampler produces honest data only: candidate structures are kept when
``relation_residual`` is empty, and Maurer-Cartan elements are found by
solving the master equation order by order in coefficient weight — the
weight-w component of the residual is linear in the weight-w component of
the element, so each step is one exact linear solve plus a random kernel
vector.  Attempts whose obstruction is nonzero are discarded, never
patched.
"""

import json
import random
import re
from dataclasses import dataclass
from fractions import Fraction

from .algebras import (DgSpace, InftyStructure, mc_residual,
                       relation_residual, space_diff, symmetrize_structure,
                       v_add)
from .coeffs import NilCdga
from .linalg import SparseMatrix, nullspace, solve_particular

FORMAT = "mctwist-fixture-1"

_FRACTION = re.compile(r"-?\d+(/[1-9]\d*)?$")


def frac_str(c):
    c = Fraction(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def parse_frac(text):
    if not isinstance(text, str) or not _FRACTION.match(text):
        raise ValueError(f"not an exact rational: {text!r}")
    return Fraction(text)


@dataclass
class Fixture:
    """One serializable structure with an optional Maurer-Cartan element."""
    structure: InftyStructure
    mc: dict = None
    name: str = ""


# --------------------------------------------------------------- elements

def element_entries(coeffs, space, elt):
    """Element of A (x) PiV as sorted [monomial names, basis name, coeff]."""
    rows = []
    for (mono, i) in sorted(elt):
        rows.append([[coeffs.names[g] for g in mono], space.names[i],
                     frac_str(elt[(mono, i)])])
    return rows


def element_from_entries(coeffs, space, rows):
    if not isinstance(rows, list):
        raise ValueError("element entries must form a list")
    out = {}
    for row in rows:
        if not (isinstance(row, list) and len(row) == 3):
            raise ValueError(f"element entry {row!r} is not "
                             "[monomial, basis name, coefficient]")
    for mono_names, vname, text in rows:
        if not isinstance(mono_names, list):
            raise ValueError(f"monomial {mono_names!r} must list "
                             "generator names")
        mono = _mono_index(coeffs, mono_names)
        nz = coeffs.normalize(mono)
        if nz is None:
            raise ValueError(f"monomial {'.'.join(mono_names) or '1'} "
                             "vanishes in the coefficient algebra")
        mono, sign = nz
        key = (mono, _space_index(space, vname))
        tot = out.get(key, Fraction(0)) + sign * parse_frac(text)
        if tot:
            out[key] = tot
        else:
            out.pop(key, None)
    return out


def _mono_index(coeffs, names):
    try:
        return tuple(coeffs.index(nm) for nm in names)
    except ValueError:
        raise ValueError(f"unknown coefficient generator in {names!r}") \
            from None


def _space_index(space, name):
    try:
        return space.index(name)
    except ValueError:
        raise ValueError(f"unknown basis vector {name!r}") from None


# --------------------------------------------------------------- manifests

def to_manifest(f):
    s = f.structure
    coeffs, space = s.coeffs, s.space
    space_doc = {
        "basis": [[n, p] for n, p in zip(space.names, space.parities)],
        "d": [[space.names[j], space.names[i], frac_str(c)]
              for j in sorted(space.d)
              for i, c in sorted(space.d[j].items())],
    }
    coeff_doc = {
        "generators": [[n, p] for n, p in zip(coeffs.names, coeffs.parities)],
        "weight_bound": coeffs.weight_bound,
        "d": [[coeffs.names[g],
               [coeffs.names[i] for i in mono], frac_str(c)]
              for g in sorted(coeffs.d_gens)
              for mono, c in sorted(coeffs.d_gens[g].items())],
    }
    maps_doc = []
    for n in sorted(s.maps):
        for t in sorted(s.maps[n]):
            maps_doc.append([n, [space.names[i] for i in t],
                             element_entries(coeffs, space, s.maps[n][t])])
    doc = {
        "format": FORMAT,
        "name": f.name,
        "kind": s.kind,
        "max_arity": s.max_arity,
        "space": space_doc,
        "coeffs": coeff_doc,
        "maps": maps_doc,
    }
    if f.mc is not None:
        doc["mc"] = element_entries(coeffs, space, f.mc)
    return doc


def _field(doc, key, kind, where):
    if not isinstance(doc, dict) or key not in doc:
        raise ValueError(f"{where} is missing the field {key!r}")
    val = doc[key]
    if not isinstance(val, kind):
        raise ValueError(f"{where}.{key} has the wrong shape")
    return val


def _named_pairs(rows, where):
    names, parities = [], []
    for row in rows:
        if not (isinstance(row, list) and len(row) == 2
                and isinstance(row[0], str) and row[1] in (0, 1)):
            raise ValueError(f"{where} entries are [name, parity]")
        names.append(row[0])
        parities.append(row[1])
    return names, parities


def from_manifest(doc):
    if _field(doc, "format", str, "manifest") != FORMAT:
        raise ValueError(f"unsupported fixture format {doc['format']!r}")
    kind = _field(doc, "kind", str, "manifest")
    max_arity = _field(doc, "max_arity", int, "manifest")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ValueError("manifest.name must be a string")

    cdoc = _field(doc, "coeffs", dict, "manifest")
    gnames, gparities = _named_pairs(
        _field(cdoc, "generators", list, "coeffs"), "coeffs.generators")
    weight = _field(cdoc, "weight_bound", int, "coeffs")
    lookup = {n: i for i, n in enumerate(gnames)}
    d_gens = {}
    for row in _field(cdoc, "d", list, "coeffs"):
        if not (isinstance(row, list) and len(row) == 3):
            raise ValueError("coeffs.d entries are "
                             "[generator, monomial, coefficient]")
        gen, mono_names, text = row
        if gen not in lookup or not isinstance(mono_names, list):
            raise ValueError(f"coeffs.d entry {row!r} names an unknown "
                             "generator or a malformed monomial")
        mono = tuple(lookup[nm] for nm in mono_names if nm in lookup)
        if len(mono) != len(mono_names):
            raise ValueError(f"unknown generator in monomial {mono_names!r}")
        img = d_gens.setdefault(lookup[gen], {})
        img[mono] = img.get(mono, Fraction(0)) + parse_frac(text)
    coeffs = NilCdga(gnames, gparities, weight, d_gens or None)

    sdoc = _field(doc, "space", dict, "manifest")
    vnames, vparities = _named_pairs(
        _field(sdoc, "basis", list, "space"), "space.basis")
    vlookup = {n: i for i, n in enumerate(vnames)}
    d = {}
    for row in _field(sdoc, "d", list, "space"):
        if not (isinstance(row, list) and len(row) == 3
                and row[0] in vlookup and row[1] in vlookup):
            raise ValueError(f"space.d entry {row!r} is not "
                             "[source, target, coefficient]")
        col = d.setdefault(vlookup[row[0]], {})
        i = vlookup[row[1]]
        col[i] = col.get(i, Fraction(0)) + parse_frac(row[2])
    space = DgSpace(vnames, vparities, d or None)

    maps = {}
    for row in _field(doc, "maps", list, "manifest"):
        if not (isinstance(row, list) and len(row) == 3
                and isinstance(row[0], int) and isinstance(row[1], list)):
            raise ValueError(f"maps entry {row!r} is not "
                             "[arity, inputs, value]")
        n, input_names, value = row
        t = tuple(_space_index(space, nm) for nm in input_names)
        if len(t) != n:
            raise ValueError(f"map of arity {n} lists {len(t)} inputs")
        val = element_from_entries(coeffs, space, value)
        table = maps.setdefault(n, {})
        if t in table:
            raise ValueError(f"duplicate map entry for arity {n} at {t}")
        if val:
            table[t] = val
    structure = InftyStructure(kind, space, coeffs, max_arity, maps)

    mc = None
    if doc.get("mc") is not None:
        mc = element_from_entries(coeffs, space, doc["mc"])
    return Fixture(structure, mc, name)


def dumps_fixture(f):
    return json.dumps(to_manifest(f), indent=1, sort_keys=True) + "\n"


def loads_fixture(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"fixture is not valid JSON: {exc}") from None
    return from_manifest(doc)


def save_fixture(path, f):
    with open(path, "w") as fh:
        fh.write(dumps_fixture(f))


def load_fixture(path):
    with open(path) as fh:
        return loads_fixture(fh.read())


# ----------------------------------------------------- Maurer-Cartan solve

def solve_mc(s, rng=None):
    """An exact Maurer-Cartan element of s, or None when obstructed.

    The element is built weight component by weight component: the
    residual of a partial solution through weight w-1 starts in weight w,
    and adding a weight-w component changes that leading term linearly
    (every term of the master equation touching the new component more
    than once, or together with lower-weight components, lands strictly
    deeper in the filtration).  Each step therefore solves one linear
    system; a random kernel vector is mixed in for genericity.
    """
    rng = rng or random.Random(0)
    coeffs, space = s.coeffs, s.space
    pip = space.pi_parities
    even, odd = {}, {}
    for w in range(1, coeffs.weight_bound + 1):
        for mono in coeffs.monomials(w):
            for i in range(space.dim):
                par = (coeffs.mono_parity(mono) + pip[i]) % 2
                (even if par == 0 else odd).setdefault(w, []).append((mono, i))

    def linear_part(key):
        e = {key: Fraction(1)}
        out = space_diff(space, coeffs, e)
        if s.maps[1]:
            out = v_add(out, s.apply(1, [e]))
        return out

    xi = {}
    for w in range(1, coeffs.weight_bound + 1):
        cols = even.get(w, [])
        rows = odd.get(w, [])
        row_ix = {key: r for r, key in enumerate(rows)}
        residual = mc_residual(s, xi)
        if any(len(key[0]) < w for key in residual):
            return None
        lead = {k: v for k, v in residual.items() if len(k[0]) == w}
        if any(key not in row_ix for key in lead):
            return None
        mat = SparseMatrix(len(rows), len(cols))
        for c, key in enumerate(cols):
            for out_key, v in linear_part(key).items():
                if len(out_key[0]) == w:
                    mat[row_ix[out_key], c] = v
        rhs = [-lead.get(key, Fraction(0)) for key in rows]
        vec = solve_particular(mat, rhs)
        if vec is None:
            return None
        for basis_vec in nullspace(mat):
            c = rng.choice((-1, 0, 0, 1))
            if c:
                vec = [a + c * b for a, b in zip(vec, basis_vec)]
        step = {key: vec[c] for c, key in enumerate(cols) if vec[c]}
        xi = v_add(xi, step)
    if mc_residual(s, xi):
        return None
    return xi


# ------------------------------------------------------------- the sampler

def _coefficient(rng):
    return Fraction(rng.choice((-2, -1, 1, 1, 2, 3)))


def _random_space(rng):
    dim = rng.randint(1, 3)
    names = ("u", "v", "w")[:dim]
    parities = tuple(rng.randint(0, 1) for _ in range(dim))
    d = None
    arrows = [(j, i) for j in range(dim) for i in range(dim)
              if parities[i] != parities[j]]
    if arrows and rng.random() < 0.5:
        j, i = rng.choice(arrows)
        d = {j: {i: _coefficient(rng)}}
    return DgSpace(names, parities, d)


def _random_coeffs(rng):
    style = rng.randrange(4)
    if style == 0:
        return NilCdga(("e",), (1,), rng.choice((2, 3)))
    if style == 1:
        return NilCdga(("e", "t"), (1, 0), 3)
    if style == 2:
        return NilCdga(("e", "t"), (1, 0), 3,
                       d_gens={0: {(1, 1): _coefficient(rng)}})
    return NilCdga(("e", "t"), (1, 0), 3,
                   d_gens={0: {(1,): _coefficient(rng)}})


def _value_candidates(space, coeffs, want, min_weight):
    pip = space.pi_parities
    out = []
    for mono in coeffs.basis():
        if len(mono) < min_weight:
            continue
        for i in range(space.dim):
            if (coeffs.mono_parity(mono) + pip[i]) % 2 == want:
                out.append((mono, i))
    return out


def _random_table(rng, kind, space, coeffs, max_arity):
    """A sparse structure-map candidate; honesty is checked by the caller."""
    pip = space.pi_parities
    dim = space.dim
    maps = {}
    for _ in range(rng.randint(1, 3)):
        n = rng.randint(1, max_arity)
        t = tuple(sorted(rng.randrange(dim) for _ in range(n)))
        if kind == "L" and any(a == b and pip[a]
                               for a, b in zip(t, t[1:])):
            continue
        want = (sum(pip[i] for i in t) + 1) % 2
        # weight >= 2 values make the quadratic relation terms vanish by
        # nilpotency, so sparse candidates survive the relation gate often;
        # lighter values fail more but twist less trivially
        floor = 1 if (n == 1 or rng.random() < 0.3) else 2
        pool = _value_candidates(space, coeffs, want, floor)
        if not pool:
            continue
        key = rng.choice(pool)
        entry = maps.setdefault(n, {})
        entry[t] = v_add(entry.get(t, {}), {key: _coefficient(rng)})
    return maps


def _unary_table(rng, space, coeffs):
    """An arity-1 candidate; the relation gate enforces the square-zero
    condition on the total differential."""
    pip = space.pi_parities
    table = {}
    for _ in range(rng.randint(1, 2)):
        i = rng.randrange(space.dim)
        pool = _value_candidates(space, coeffs, (pip[i] + 1) % 2, 1)
        if pool:
            key = rng.choice(pool)
            table[(i,)] = v_add(table.get((i,), {}),
                                {key: _coefficient(rng)})
    return {1: table}


def _strict_product(rng, space, coeffs):
    """m_2 from a one-entry associative product v_a v_b = c v_c."""
    pip = space.pi_parities
    dim = space.dim
    triples = [(a, b, c) for a in range(dim) for b in range(dim)
               for c in range(dim)
               if c not in (a, b)
               and pip[c] == (pip[a] + pip[b] + 1) % 2]
    if not triples:
        return None
    a, b, c = rng.choice(triples)
    sign = -1 if space.parities[a] else 1
    return {2: {(a, b): {((), c): Fraction(sign) * _coefficient(rng)}}}


def _candidate(rng):
    kind = rng.choice(("A", "L"))
    space = _random_space(rng)
    coeffs = _random_coeffs(rng)
    max_arity = rng.randint(2, 4)
    style = rng.random()
    if style < 0.1:
        maps = {}
    elif style < 0.35:
        maps = _strict_product(rng, space, coeffs)
        if maps is None:
            maps = _random_table(rng, "A", space, coeffs, max_arity)
        if kind == "L":
            flat = InftyStructure("A", space, coeffs, max_arity, maps)
            return symmetrize_structure(flat)
        return InftyStructure("A", space, coeffs, max_arity, maps)
    elif style < 0.55:
        maps = _unary_table(rng, space, coeffs)
    else:
        maps = _random_table(rng, kind, space, coeffs, max_arity)
    return InftyStructure(kind, space, coeffs, max_arity, maps)


def random_fixture(seed, name=None, want=None):
    """One honest fixture: relations verified, Maurer-Cartan element exact.

    Draws candidates until a structure passes its relation check, the
    order-by-order solve yields a nonzero Maurer-Cartan element, and the
    optional ``want`` predicate accepts the result.
    """
    rng = random.Random(seed)
    while True:
        s = _candidate(rng)
        if not relation_residual(s).ok:
            continue
        xi = solve_mc(s, rng)
        if not xi:
            continue
        f = Fixture(s, xi, name or f"sample-{seed}")
        if want is None or want(f):
            return f


def _twist_moves(f):
    from .algebras import twist_structure
    return twist_structure(f.structure, f.mc) != f.structure


def _has_unary(f):
    return bool(f.structure.maps[1])


def fixture_battery(count=20, seed=20260819):
    """A deterministic list of honest fixtures for the twisting checks.

    Every other fixture is required to move under twisting and every
    fourth to carry an arity-1 component, so the battery cannot
    degenerate into examples where the checks hold vacuously.
    """
    out = []
    for i in range(count):
        want = None
        if i % 2 == 1:
            want = _twist_moves
        elif i % 4 == 2:
            want = _has_unary
        out.append(random_fixture((seed, i), name=f"sample-{i:02d}",
                                  want=want))
    return out
