"""Free dg operads from presentations: differentials as odd derivations,
basis enumeration, truncation bounds, quotients, and finite complexes.

A presentation carries two closures: one materializing the (possibly
arity-indexed) generator family up to a given arity, and one producing the
differential image of a named generator, truncated to the presentation's
bounds.  All differentials extend generator rules as odd derivations with the
pre-order Koszul sign; terms beyond the weight bound W or the x-degree bound K
are discarded, which is a genuine quotient of complexes because d raises
weight by exactly one and never lowers x-degree.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .linalg import FiniteComplex, SparseMatrix
from .trees import (PLANAR, Element, canonicalize, element, element_str,
                    is_leaf, iter_vertices, single, skey, term_parity,
                    term_str, term_weight, term_xdeg, vertex_substitutions)


@dataclass(frozen=True)
class Bounds:
    """Truncation bounds: max arity N, max weight W, max xdeg K."""
    arity: int
    weight: int
    xdeg: int

    def max_generator_arity(self):
        # a tree with w vertices and n + k leaves uses generators of arity
        # at most n + k + w - 1
        return max(self.arity + self.xdeg + self.weight - 1, self.arity, 1)

    def widened(self):
        """One extra weight step and two x-steps, for d^2 reporting."""
        return Bounds(self.arity, self.weight + 1, self.xdeg + 2)


class OperadPresentation:
    """A free dg operad given by generators and a differential rule.

    mk_generators(max_arity) yields the Generator family up to that arity;
    mk_diff(presentation, name) returns d(generator) as an Element truncated
    to presentation.bounds.  Presentations are immutable; rebinding bounds
    returns a fresh instance sharing the closures.
    """

    def __init__(self, name, bounds, mk_generators, mk_diff):
        self.name = name
        self.bounds = bounds
        self._mk_generators = mk_generators
        self._mk_diff = mk_diff
        self.table = {}
        for g in mk_generators(bounds.max_generator_arity()):
            if g.name in self.table:
                raise ValueError(f"duplicate generator {g.name}")
            self.table[g.name] = g
        self._images = {}

    def with_bounds(self, bounds):
        return OperadPresentation(self.name, bounds, self._mk_generators,
                                  self._mk_diff)

    def diff_image(self, name):
        if name not in self._images:
            if name not in self.table:
                raise KeyError(f"unknown generator {name}")
            img = self._mk_diff(self, name)
            g = self.table[name]
            if img.arity != g.arity:
                raise ValueError(f"d({name}) has arity {img.arity}")
            for nd in img.terms:
                if term_parity(nd, self.table) == g.parity:
                    raise ValueError(f"d({name}) is not parity-reversing")
            self._images[name] = truncate(self, img)
        return self._images[name]

    def image_pairs(self):
        out = {}
        for name in self.table:
            img = self.diff_image(name)
            if not img.is_zero():
                out[name] = list((c, nd) for nd, c in img.terms.items())
        return out

    def generator_element(self, name):
        g = self.table[name]
        node = (name,) if g.arity == 0 else (name, *range(1, g.arity + 1))
        return single(self.table, node)

    def __repr__(self):
        return f"OperadPresentation({self.name!r}, {self.bounds})"


def truncate(p, e):
    """Drop terms beyond the weight/xdeg bounds (quotient conventions)."""
    b = p.bounds
    keep = {nd: c for nd, c in e.terms.items()
            if term_weight(nd, p.table) <= b.weight
            and term_xdeg(nd, p.table) <= b.xdeg}
    return Element(e.arity, keep)


def check_bounds(p, e):
    b = p.bounds
    if e.arity > b.arity:
        raise ValueError(f"arity {e.arity} exceeds bound {b.arity}")
    for nd in e.terms:
        if (term_weight(nd, p.table) > b.weight
                or term_xdeg(nd, p.table) > b.xdeg):
            raise ValueError(f"term {term_str(nd)} out of bounds {b}")


def differential(p, e):
    """Extend the generator rule to e as an odd derivation, then truncate."""
    check_bounds(p, e)
    images = p.image_pairs()
    pairs = []
    for nd, c in e.terms.items():
        for c2, nd2 in vertex_substitutions(nd, p.table, images):
            pairs.append((c * c2, nd2))
    return truncate(p, element(p.table, e.arity, pairs))


@dataclass
class DSquaredReport:
    presentation: str
    bounds: Bounds
    failures: list  # (generator name, residual in element grammar)

    @property
    def ok(self):
        return not self.failures


def d_squared_report(p):
    """Check d(d(g)) = 0 per generator, with bounds widened one weight step
    and two x-steps so truncation cannot hide a failure below the bounds."""
    wide = p.with_bounds(p.bounds.widened())
    failures = []
    for name in sorted(wide.table):
        if wide.table[name].arity > p.bounds.arity:
            continue
        dd = differential(wide, differential(wide, wide.generator_element(name)))
        if not dd.is_zero():
            failures.append((name, element_str(dd)))
    return DSquaredReport(p.name, p.bounds, failures)


@dataclass
class GradedSlice:
    arity: int
    weight: int
    xdeg: int
    basis: list  # canonical terms, deterministic order


def compositions(total, parts):
    """All tuples of `parts` naturals summing to total."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in compositions(total - first, parts - 1):
            yield (first, *rest)


def _leaf_splits(leaves, parts, planar):
    """Ordered splits of the label tuple into `parts` blocks (empty allowed);
    planar mode keeps blocks consecutive."""
    n = len(leaves)
    if planar:
        for cuts in itertools.combinations_with_replacement(range(n + 1),
                                                            parts - 1):
            pos = (0, *cuts, n)
            yield tuple(leaves[pos[i]:pos[i + 1]] for i in range(parts))
    else:
        for assign in itertools.product(range(parts), repeat=n):
            blocks = [[] for _ in range(parts)]
            for lab, b in zip(leaves, assign):
                blocks[b].append(lab)
            yield tuple(tuple(b) for b in blocks)


def _enum_slice(p, leaves, w, k, memo):
    key = (leaves, w, k)
    if key in memo:
        return memo[key]
    out = set()
    if w == 0:
        if k == 0 and len(leaves) == 1:
            out.add(leaves[0])
        elif k == 1 and not leaves:
            for g in p.table.values():
                if g.arity == 0:
                    out.add((g.name,))
    else:
        for g in p.table.values():
            a = g.arity
            # every child subtree contains at least one leaf or arity-0 vertex
            if a == 0 or a > len(leaves) + k:
                continue
            for lsplit in _leaf_splits(leaves, a, g.symmetry == PLANAR):
                for wsplit in compositions(w - 1, a):
                    for ksplit in compositions(k, a):
                        childsets = [
                            _enum_slice(p, lsplit[i], wsplit[i], ksplit[i],
                                        memo)
                            for i in range(a)]
                        if not all(childsets):
                            continue
                        for combo in itertools.product(*childsets):
                            s, cn = canonicalize((g.name, *combo), p.table)
                            if s != 0:
                                out.add(cn)
    memo[key] = out
    return out


def enumerate_basis(p, n, w, k):
    """All canonical terms with the given arity, weight, xdeg; sorted."""
    b = p.bounds
    if n > b.arity or w > b.weight or k > b.xdeg:
        raise ValueError(f"slice ({n},{w},{k}) outside bounds {b}")
    nodes = _enum_slice(p, tuple(range(1, n + 1)), w, k, {})
    return GradedSlice(n, w, k, sorted(nodes, key=skey))


def truncated_complex(p, n):
    """Weight-graded complex of the arity-n component, xdeg <= K collapsed."""
    b = p.bounds
    slices = {}
    for w in range(b.weight + 1):
        basis = []
        for k in range(b.xdeg + 1):
            basis.extend(enumerate_basis(p, n, w, k).basis)
        basis.sort(key=skey)
        if basis:
            slices[w] = basis
    boundaries = {}
    for w, basis in slices.items():
        target = slices.get(w + 1, [])
        index = {t: i for i, t in enumerate(target)}
        mat = SparseMatrix(len(target), len(basis))
        for j, t in enumerate(basis):
            for nd, c in differential(p, single(p.table, t)).terms.items():
                mat[index[nd], j] = c
        if target:
            boundaries[w] = mat
        elif not mat.is_zero():
            raise AssertionError("differential escapes the enumerated basis")
    dims = {w: len(bs) for w, bs in slices.items()}
    labels = {w: [term_str(t) for t in bs] for w, bs in slices.items()}
    return FiniteComplex(dims, boundaries, labels)


def quotient_by_generators(p, names):
    """Delete generators; keep the differential when it descends.

    Descent condition: every term of d(killed) must itself contain a killed
    generator (the span of trees through killed generators is then a
    differential ideal).  The rule for survivors deletes killed terms.
    """
    names = frozenset(names)
    unknown = names - set(p.table)
    if unknown:
        raise ValueError(f"unknown generators {sorted(unknown)}")
    for nm in sorted(names):
        for nd in p.diff_image(nm).terms:
            if not any(v in names for v in iter_vertices(nd)):
                raise ValueError(
                    f"differential does not descend: d({nm}) contains "
                    f"{term_str(nd)} with no killed generator")

    parent_gens, parent_diff, parent_name = (p._mk_generators, p._mk_diff,
                                             p.name)
    parents = {}

    def mk_gens(max_arity):
        return [g for g in parent_gens(max_arity) if g.name not in names]

    def mk_diff(pres, gname):
        if pres.bounds not in parents:
            parents[pres.bounds] = OperadPresentation(
                parent_name, pres.bounds, parent_gens, parent_diff)
        img = parents[pres.bounds].diff_image(gname)
        kept = {nd: c for nd, c in img.terms.items()
                if not any(v in names for v in iter_vertices(nd))}
        return Element(img.arity, kept)

    label = f"{p.name}/({','.join(sorted(names))})"
    return OperadPresentation(label, p.bounds, mk_gens, mk_diff)
