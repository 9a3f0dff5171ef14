"""Finite-dimensional homotopy-algebra structures with nilpotent coefficients.

Everything lives over a finite based dg space V and a truncated
graded-commutative coefficient algebra A (``coeffs.NilCdga``).  Elements of
A (x) PiV are dicts keyed by (monomial, basis index); multilinear operations
(PiV)^{(x)n} -> A (x) PiV are ``EndoMap`` tables over basis index tuples.
Structures of kind "L" store symmetric maps (values on sorted index tuples,
looked up through stable-sort Koszul transport; a tuple repeating an odd
slot supports only the zero value); kind "A" stores raw tables.

Sign conventions, fixed once and validated by the classical fixtures in the
test suite:

* all parities are those of the SHIFTED space PiV (a basis vector of parity
  p in V has parity 1-p in PiV), and structure maps are odd;
* scalars move out of a multilinear map A-linearly: pulling the coefficient
  a off input slot s costs (-1)^{|a| * (1 + |x_1| + ... + |x_{s-1}|)}, the
  1 accounting for the odd map itself;
* composition at slot i costs (-1)^{|g| * (|x_1| + ... + |x_{i-1}|)} and a
  permutation acts by (f.sigma)(x_1..x_n) = koszul(sigma; x) *
  f(x_{sigma(1)}, ..., x_{sigma(n)}), matching the relabeling action of the
  tree engine (machine-checked: tree evaluation is a map of operads);
* the structure relation is eval(cobar image of the n-th generator)
  PLUS the Hom-complex differential [d, mu_n] = 0.  The engine's cobar
  images are all-plus sums, so the whole relation is the vanishing of one
  plus-signed expression, the same convention as the master equation below.
  Both the orientation and the desuspension sign were pinned on classical
  fixtures: the shifted product of a dg algebra is mu_2(Pi u, Pi v) =
  (-1)^{|u|_V} Pi(u v) (the unsigned variant fails, and for the shifted
  commutator of a dg Lie algebra the unsigned variant is not even
  Koszul-symmetric); with D = left multiplication by a square-zero odd
  element and mu_1 = left multiplication by an odd h with h^2 = 1, the
  plus orientation passes and the minus orientation fails.

The master-equation residual of xi is D(xi) + sum_i c_i mu_i(xi, ..., xi)
with c_i = 1/i! in the L case and c_i = 1 in the A case; twisting inserts
copies of xi in front (L, with 1/i!) or across all order-preserving
interleavings (A, unit coefficients).  All series stop at the structure's
arity bound, so every identity here is an exact statement about bounded
structures, not an approximation.
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from math import factorial

from .coeffs import NilCdga, a_add, a_scale
from .engine import Bounds
from .presets import make_Ainfty, make_Linfty
from .trees import is_leaf, leaf_labels

__all__ = [
    "DgSpace",
    "EndoMap",
    "InftyStructure",
    "RelationReport",
    "basis_elt",
    "bracket_with_d",
    "chain_residual",
    "elt_parity",
    "endo_identity",
    "eval_element",
    "eval_term",
    "koszul_sort",
    "mc_residual",
    "relation_residual",
    "space_diff",
    "symmetrize_structure",
    "twist_structure",
    "v_add",
    "v_scale",
    "v_sub",
]


class DgSpace:
    """Finite based graded vector space with an odd square-zero differential.

    ``parities`` are the parities in V itself; the shifted parities used by
    structure maps are their flips.  ``d`` maps a basis index to the column
    of its differential, d(v_j) = sum_i d[j][i] * v_i.
    """

    def __init__(self, names, parities, d=None):
        self.names = tuple(names)
        self.parities = tuple(int(p) for p in parities)
        if len(self.names) != len(self.parities):
            raise ValueError("one parity per basis vector")
        if len(set(self.names)) != len(self.names):
            raise ValueError("basis names must be distinct")
        self.d = {}
        for j, col in (d or {}).items():
            col = {i: Fraction(c) for i, c in col.items() if c}
            if not col:
                continue
            for i in col:
                if self.parities[i] == self.parities[j]:
                    raise ValueError(f"d({self.names[j]}) must flip parity")
            self.d[j] = col
        for j in self.d:
            acc = {}
            for i, c in self.d[j].items():
                for k, c2 in self.d.get(i, {}).items():
                    acc[k] = acc.get(k, 0) + c * c2
            if any(acc.values()):
                raise ValueError(f"d(d({self.names[j]})) is nonzero")

    @property
    def dim(self):
        return len(self.names)

    def pi_parity(self, i):
        return self.parities[i] ^ 1

    @property
    def pi_parities(self):
        return tuple(p ^ 1 for p in self.parities)

    def index(self, name):
        return self.names.index(name)

    def __repr__(self):
        basis = ", ".join(f"{n}{'~' if p else ''}"
                          for n, p in zip(self.names, self.parities))
        return f"DgSpace([{basis}])"


# ---------------------------------------------------------------------------
# Elements of A (x) PiV: dict[(monomial, basis index) -> Fraction].

v_add = a_add
v_scale = a_scale


def v_sub(x, y):
    return a_add(x, a_scale(y, -1))


def basis_elt(i):
    return {((), i): Fraction(1)}


def elt_parity(elt, parities, coeffs):
    """Parity of a homogeneous element; None for zero; error when mixed."""
    seen = None
    for (mono, i), _ in elt.items():
        p = (coeffs.mono_parity(mono) + parities[i]) % 2
        if seen is None:
            seen = p
        elif seen != p:
            raise ValueError("element is not parity-homogeneous")
    return seen


def space_diff(space, coeffs, elt):
    """Total differential d_A (x) id + id (x) d_V on A (x) V elements.

    The same formula serves the shifted and unshifted pictures: the sign
    (-1)^{|mono|} comes from the odd d crossing the coefficient.
    """
    out = {}
    for (mono, i), c in elt.items():
        da = coeffs.differential({mono: c})
        for m2, c2 in da.items():
            key = (m2, i)
            tot = out.get(key, 0) + c2
            if tot:
                out[key] = tot
            else:
                out.pop(key, None)
        sign = -1 if coeffs.mono_parity(mono) else 1
        for j, cj in space.d.get(i, {}).items():
            key = (mono, j)
            tot = out.get(key, 0) + c * cj * sign
            if tot:
                out[key] = tot
            else:
                out.pop(key, None)
    return out


def koszul_sort(t, parities):
    """Stable-sort an index tuple; (sorted tuple, Koszul sign)."""
    out = list(t)
    sign = 1
    for i in range(1, len(out)):
        j = i
        while j > 0 and out[j - 1] > out[j]:
            if parities[out[j - 1]] and parities[out[j]]:
                sign = -sign
            out[j - 1], out[j] = out[j], out[j - 1]
            j -= 1
    return tuple(out), sign


def _apply_walk(parities, coeffs, parity, value_fn, inputs):
    """Shared evaluation core: the scalar-moving signs of a multilinear map.

    Walks the product of the inputs' terms, moving each coefficient out to
    the left with the sign (-1)^{|a| * (parity + crossed slot parities)},
    then multiplies by the value of ``value_fn`` on the basis index tuple.
    """
    out = {}
    stack = [((), 1, (), Fraction(1))]
    for inp in inputs:
        nxt = []
        for mono_acc, sgn, idxs, coeff in stack:
            for (mono, i), c in inp.items():
                if coeffs.mono_parity(mono) % 2:
                    before = parity + sum(parities[j] for j in idxs)
                    sgn2 = sgn * (-1 if before % 2 else 1)
                else:
                    sgn2 = sgn
                prod = coeffs.mul_mono(mono_acc, mono)
                if prod is None:
                    continue
                m2, s2 = prod
                nxt.append((m2, sgn2 * s2, idxs + (i,), coeff * c))
        stack = nxt
    for mono_acc, sgn, idxs, coeff in stack:
        for (vm, vi), vc in value_fn(idxs).items():
            prod = coeffs.mul_mono(mono_acc, vm)
            if prod is None:
                continue
            m2, s2 = prod
            key = (m2, vi)
            tot = out.get(key, 0) + coeff * vc * sgn * s2
            if tot:
                out[key] = tot
            else:
                out.pop(key, None)
    return out


class EndoMap:
    """Multilinear map (graded span)^{(x) arity} -> A (x) span, as a table.

    ``parities`` is the parity vector of the inputs (and of the output basis);
    ``table`` maps input index tuples to elements.  Tables are raw: symmetry,
    when wanted, is the caller's concern.
    """

    def __init__(self, parities, coeffs, arity, parity, table):
        self.parities = tuple(parities)
        self.coeffs = coeffs
        self.arity = int(arity)
        self.parity = int(parity)
        self.table = {}
        for t, val in table.items():
            val = {k: Fraction(c) for k, c in val.items() if c}
            if not val:
                continue
            if len(t) != self.arity:
                raise ValueError(f"key {t} has wrong arity")
            self.table[tuple(t)] = val

    def value(self, t):
        return self.table.get(tuple(t), {})

    def is_zero(self):
        return not self.table

    def apply(self, inputs):
        """Evaluate on elements of A (x) span, with the scalar-moving signs."""
        if len(inputs) != self.arity:
            raise ValueError("wrong number of inputs")
        return _apply_walk(self.parities, self.coeffs, self.parity,
                           self.value, inputs)

    def compose(self, i, g):
        """Partial composition self o_i g with the slot-crossing sign."""
        if not 1 <= i <= self.arity:
            raise ValueError(f"slot {i} outside 1..{self.arity}")
        if g.parities != self.parities or g.coeffs is not self.coeffs:
            raise ValueError("composition across different carriers")
        n = g.arity
        dim = len(self.parities)
        arity = self.arity + n - 1
        table = {}
        for t in product(range(dim), repeat=arity):
            pre, mid, post = t[:i - 1], t[i - 1:i - 1 + n], t[i - 1 + n:]
            val_g = g.value(mid)
            if not val_g:
                continue
            crossed = sum(self.parities[j] for j in pre)
            sign = -1 if (g.parity * crossed) % 2 else 1
            ins = ([basis_elt(j) for j in pre] + [val_g]
                   + [basis_elt(j) for j in post])
            val = self.apply(ins)
            if sign < 0:
                val = v_scale(val, -1)
            if val:
                table[t] = val
        return EndoMap(self.parities, self.coeffs, arity,
                       (self.parity + g.parity) % 2, table)

    def act(self, sigma):
        """Right action: (f.sigma)(x_1..x_n) = koszul * f(x_{s(1)},..)."""
        if sorted(sigma) != list(range(1, self.arity + 1)):
            raise ValueError("not a permutation")
        inv = [0] * self.arity
        for p, q in enumerate(sigma):
            inv[q - 1] = p
        table = {}
        for s, val in self.table.items():
            t = tuple(s[inv[q]] for q in range(self.arity))
            sign = 1
            for p in range(self.arity):
                for q in range(p + 1, self.arity):
                    if sigma[p] > sigma[q]:
                        if self.parities[s[p]] and self.parities[s[q]]:
                            sign = -sign
            table[t] = v_scale(val, sign)
        return EndoMap(self.parities, self.coeffs, self.arity, self.parity,
                       table)

    def add(self, other):
        if (other.arity != self.arity
                or other.parities != self.parities):
            raise ValueError("cannot add maps of different shapes")
        if self.table and other.table and other.parity != self.parity:
            raise ValueError("cannot add maps of different parities")
        table = dict(self.table)
        for t, val in other.table.items():
            table[t] = v_add(table.get(t, {}), val)
        parity = self.parity if self.table else other.parity
        return EndoMap(self.parities, self.coeffs, self.arity, parity, table)

    def scale(self, c):
        return EndoMap(self.parities, self.coeffs, self.arity, self.parity,
                       {t: v_scale(val, c) for t, val in self.table.items()})

    def sub(self, other):
        return self.add(other.scale(-1))

    def __eq__(self, other):
        return (isinstance(other, EndoMap) and self.arity == other.arity
                and self.parities == other.parities
                and self.table == other.table)

    def __repr__(self):
        return (f"EndoMap(arity={self.arity}, parity={self.parity}, "
                f"{len(self.table)} entries)")


def endo_zero(parities, coeffs, arity, parity=1):
    return EndoMap(parities, coeffs, arity, parity, {})


def endo_identity(parities, coeffs):
    table = {(j,): basis_elt(j) for j in range(len(parities))}
    return EndoMap(parities, coeffs, 1, 0, table)


# ---------------------------------------------------------------------------
# Evaluating tree elements of the operad engine against a representation.

def eval_term(rho, node):
    """Image of one tree term under the representation rho (name -> EndoMap).

    The planar backbone folds through slot composition, leftmost child
    first: with the engine's pre-order sign convention that order is
    sign-free, because everything after a not-yet-expanded slot is a bare
    leaf.  The leaf labeling then acts as a permutation.  Bare-leaf terms
    evaluate to the identity map.
    """
    some = next(iter(rho.values()))
    if is_leaf(node):
        return endo_identity(some.parities, some.coeffs)

    def planar(nd):
        f = rho[nd[0]]
        slot = 1
        for child in nd[1:]:
            if is_leaf(child):
                slot += 1
                continue
            g = planar(child)
            f = f.compose(slot, g)
            slot += g.arity
        return f

    folded = planar(node)
    labels = leaf_labels(node)
    if labels == list(range(1, len(labels) + 1)):
        return folded
    return folded.act(tuple(labels))


def eval_element(rho, elem, arity=None):
    """Image of an engine Element (or raw term dict) under rho."""
    terms = elem.terms if hasattr(elem, "terms") else elem
    if arity is None and hasattr(elem, "arity"):
        arity = elem.arity
    some = next(iter(rho.values()))
    out = None
    for node, coeff in terms.items():
        piece = eval_term(rho, node).scale(coeff)
        out = piece if out is None else out.add(piece)
    if out is None:
        if arity is None:
            raise ValueError("empty element with unknown arity")
        return endo_zero(some.parities, some.coeffs, arity)
    return out


def bracket_with_d(dfun, f):
    """Hom-complex differential [d, f] for a total differential d.

    ``dfun`` is the full (not necessarily A-linear) odd differential on
    A (x) span, as a callable on elements; f is evaluated A-linearly.
    """
    dim = len(f.parities)
    table = {}
    for t in product(range(dim), repeat=f.arity):
        val = dfun(f.value(t)) if f.value(t) else {}
        inner_sign = 1 if f.parity % 2 else -1
        for i in range(f.arity):
            di = dfun(basis_elt(t[i]))
            if not di:
                continue
            crossed = sum(f.parities[j] for j in t[:i])
            s = inner_sign * (-1 if crossed % 2 else 1)
            ins = [basis_elt(j) for j in t[:i]] + [di] \
                + [basis_elt(j) for j in t[i + 1:]]
            val = v_add(val, v_scale(f.apply(ins), s))
        if val:
            table[t] = val
    return EndoMap(f.parities, f.coeffs, f.arity, (f.parity + 1) % 2, table)


def chain_residual(p, rho, dfun, gens=None):
    """Failures of rho to satisfy the structure relations over (A (x) V, d).

    For each generator g the residual is eval(d_p(g)) + [d, rho(g)], the
    all-plus convention matching the engine's cobar differential; returns
    a list of (generator, input tuple, residual element).
    """
    failures = []
    names = gens if gens is not None else sorted(
        p.table, key=lambda n: (p.table[n].arity, n))
    for name in names:
        if name not in rho:
            raise KeyError(f"representation misses generator {name}")
        g = p.table[name]
        lhs = eval_element(rho, p.diff_image(name), arity=g.arity)
        rhs = bracket_with_d(dfun, rho[name])
        res = lhs.add(rhs)
        for t in sorted(res.table):
            failures.append((name, t, res.table[t]))
    return failures


# ---------------------------------------------------------------------------
# Bounded structures.

class InftyStructure:
    """Arity-bounded structure of kind "L" or "A" on a dg space.

    ``maps`` hands in, per arity, a dict from input index tuples to
    elements of A (x) PiV; maps of kind "L" are normalized onto sorted
    tuples and must be consistent under Koszul transport.  Operations of
    every arity in 1..max_arity exist, defaulting to zero.
    """

    def __init__(self, kind, space, coeffs, max_arity, maps):
        if kind not in ("L", "A"):
            raise ValueError("kind is 'L' or 'A'")
        self.kind = kind
        self.space = space
        self.coeffs = coeffs
        self.max_arity = int(max_arity)
        if self.max_arity < 1:
            raise ValueError("arity bound must be positive")
        pip = space.pi_parities
        self.maps = {}
        for n, entries in (maps or {}).items():
            if not 1 <= n <= self.max_arity:
                raise ValueError(f"map arity {n} outside 1..{self.max_arity}")
            table = {}
            for t, val in entries.items():
                t = tuple(t)
                if len(t) != n:
                    raise ValueError(f"entry {t} has wrong arity")
                val = {k: Fraction(c) for k, c in val.items() if c}
                want = (sum(pip[j] for j in t) + 1) % 2
                for (mono, vi), _ in val.items():
                    have = (coeffs.mono_parity(mono) + pip[vi]) % 2
                    if have != want:
                        raise ValueError(
                            f"value of m_{n}{t} has parity {have}, "
                            f"expected {want}")
                if self.kind == "L":
                    key, sign = koszul_sort(t, pip)
                    if self._odd_repeat(key):
                        if val:
                            raise ValueError(
                                f"m_{n}{t} repeats an odd slot; only the "
                                f"zero value is symmetric")
                        continue
                    val = v_scale(val, sign)
                else:
                    key = t
                if key in table:
                    if table[key] != val:
                        raise ValueError(
                            f"conflicting entries for m_{n}{key}")
                    continue
                if val:
                    table[key] = val
            self.maps[n] = table
        for n in range(1, self.max_arity + 1):
            self.maps.setdefault(n, {})

    def _odd_repeat(self, t):
        pip = self.space.pi_parities
        return any(a == b and pip[a] for a, b in zip(t, t[1:]))

    def value(self, n, t):
        """m_n on a basis index tuple, transporting symmetry in kind L."""
        t = tuple(t)
        if self.kind == "L":
            key, sign = koszul_sort(t, self.space.pi_parities)
            if self._odd_repeat(key):
                return {}
            val = self.maps[n].get(key, {})
            return v_scale(val, sign)
        return self.maps[n].get(t, {})

    def endo(self, n):
        """Dense EndoMap of m_n over shifted parities."""
        pip = self.space.pi_parities
        table = {}
        for t in product(range(self.space.dim), repeat=n):
            val = self.value(n, t)
            if val:
                table[t] = val
        return EndoMap(pip, self.coeffs, n, 1, table)

    def apply(self, n, inputs):
        """Evaluate m_n on elements without materializing a dense table."""
        if len(inputs) != n:
            raise ValueError("wrong number of inputs")
        return _apply_walk(self.space.pi_parities, self.coeffs, 1,
                           lambda t: self.value(n, t), inputs)

    def is_formal(self):
        """True when every value lies in the augmentation ideal."""
        return all((mono != ()) for table in self.maps.values()
                   for val in table.values() for (mono, _) in val)

    def __eq__(self, other):
        return (isinstance(other, InftyStructure)
                and self.kind == other.kind
                and self.space is other.space
                and self.coeffs is other.coeffs
                and self.max_arity == other.max_arity
                and self.maps == other.maps)

    def __repr__(self):
        sizes = {n: len(t) for n, t in self.maps.items() if t}
        return (f"InftyStructure({self.kind!r}, dim={self.space.dim}, "
                f"R={self.max_arity}, entries={sizes})")


@dataclass
class RelationReport:
    structure: InftyStructure
    failures: list  # (generator name, input tuple, residual element)

    @property
    def ok(self):
        return not self.failures


def _structure_preset(kind, max_arity):
    b = Bounds(max_arity, 2, 0)
    if kind == "L":
        return make_Linfty(b)
    return make_Ainfty("planar", b)


def relation_residual(s):
    """Structure-relation failures within the arity bound.

    The relation at arity n equates the image of the cobar differential of
    the n-th generator with the Hom-complex differential of m_n; residuals
    are reported per generator and basis tuple.
    """
    p = _structure_preset(s.kind, s.max_arity)
    rho = {f"m{n}": s.endo(n) for n in range(1, s.max_arity + 1)}
    dfun = lambda e: space_diff(s.space, s.coeffs, e)
    gens = [f"m{n}" for n in range(1, s.max_arity + 1)]
    return RelationReport(s, chain_residual(p, rho, dfun, gens=gens))


def mc_residual(s, xi):
    """Master-equation residual D(xi) + sum_i c_i m_i(xi,...,xi)."""
    pip = s.space.pi_parities
    if elt_parity(xi, pip, s.coeffs) == 1:
        raise ValueError("Maurer-Cartan candidates are even")
    out = space_diff(s.space, s.coeffs, xi)
    for i in range(1, s.max_arity + 1):
        if not s.maps[i]:
            continue
        c = Fraction(1, factorial(i)) if s.kind == "L" else Fraction(1)
        out = v_add(out, v_scale(s.apply(i, [xi] * i), c))
    return out


def twist_structure(s, xi, check=True):
    """Twisted structure: copies of the Maurer-Cartan element inserted.

    Kind L inserts i leading copies with coefficient 1/i!; kind A sums over
    all order-preserving interleavings with unit coefficients.  Within the
    arity bound the formulas are exact, so twisting by the negated element
    restores the original on the nose.
    """
    if check:
        r = mc_residual(s, xi)
        if r:
            raise ValueError(f"twisting by a non-MC element: residual {r}")
    dim = s.space.dim
    maps = {}
    for n in range(1, s.max_arity + 1):
        table = {}
        for t in product(range(dim), repeat=n):
            if s.kind == "L":
                key, _ = koszul_sort(t, s.space.pi_parities)
                if key != t:
                    continue
            val = {}
            for i in range(0, s.max_arity - n + 1):
                if not s.maps[n + i]:
                    continue
                base = [basis_elt(j) for j in t]
                if s.kind == "L":
                    ins = [xi] * i + base
                    val = v_add(val, v_scale(s.apply(n + i, ins),
                                             Fraction(1, factorial(i))))
                else:
                    for pos in combinations(range(n + i), i):
                        ins = []
                        src = iter(base)
                        for q in range(n + i):
                            ins.append(xi if q in pos else next(src))
                        val = v_add(val, s.apply(n + i, ins))
            if val:
                table[t] = val
        maps[n] = table
    return InftyStructure(s.kind, s.space, s.coeffs, s.max_arity, maps)


def symmetrize_structure(s):
    """View a kind-A structure as kind L by summing over permutations."""
    if s.kind != "A":
        raise ValueError("only kind-A structures symmetrize")
    maps = {}
    for n in range(1, s.max_arity + 1):
        e = s.endo(n)
        if e.is_zero():
            continue
        acc = None
        for sigma in permutations(range(1, n + 1)):
            piece = e.act(sigma)
            acc = piece if acc is None else acc.add(piece)
        maps[n] = dict(acc.table)
    return InftyStructure("L", s.space, s.coeffs, s.max_arity, maps)
