"""Tree monomials for free operads with exact Koszul-sign bookkeeping.

A term is a nested tuple ``(name, child, ...)`` whose children are leaf labels
(positive integers) or further tuples; an arity-0 generator appears as the
1-tuple ``('x',)``.  The bare integer ``1`` is the identity term (arity 1, no
vertices).  All signs come from one rule: a term is linearized as its pre-order
generator word, and any rearrangement contributes -1 for every pair of odd
symbols that crosses.
"""

from dataclasses import dataclass
from fractions import Fraction

PLANAR = "planar"
FREE = "free-action"
SYMMETRIC = "fully-symmetric"


@dataclass(frozen=True)
class Generator:
    name: str
    arity: int
    parity: int  # 0 even, 1 odd
    symmetry: str = SYMMETRIC

    def __post_init__(self):
        if self.arity < 0 or self.parity not in (0, 1):
            raise ValueError(f"bad generator {self.name}")
        if self.symmetry not in (PLANAR, FREE, SYMMETRIC):
            raise ValueError(f"unknown symmetry mode {self.symmetry!r}")


def is_leaf(node):
    return isinstance(node, int)


def leaf_labels(node):
    """Leaf labels in pre-order."""
    if is_leaf(node):
        return [node]
    out = []
    stack = [node]
    while stack:
        nd = stack.pop()
        if is_leaf(nd):
            out.append(nd)
        else:
            stack.extend(reversed(nd[1:]))
    return out


def arity_of(node):
    return len(leaf_labels(node))


def validate_term(node, table, arity=None):
    """Raise ValueError unless node is a well-formed term over table."""
    def go(nd):
        if is_leaf(nd):
            if nd < 1:
                raise ValueError(f"leaf labels must be positive, got {nd}")
            return
        if not nd or not isinstance(nd, tuple):
            raise ValueError(f"malformed node {nd!r}")
        gen = table.get(nd[0])
        if gen is None:
            raise ValueError(f"unknown generator {nd[0]!r}")
        if len(nd) - 1 != gen.arity:
            raise ValueError(
                f"{nd[0]} has arity {gen.arity} but {len(nd) - 1} children")
        for c in nd[1:]:
            go(c)
    go(node)
    lv = leaf_labels(node)
    if sorted(lv) != list(range(1, len(lv) + 1)):
        raise ValueError(f"leaf labels {sorted(lv)} are not 1..{len(lv)}")
    if arity is not None and len(lv) != arity:
        raise ValueError(f"term has arity {len(lv)}, expected {arity}")


def iter_vertices(node):
    """Generator names in pre-order (the generator word)."""
    if is_leaf(node):
        return
    yield node[0]
    for c in node[1:]:
        yield from iter_vertices(c)


def term_parity(node, table):
    return sum(table[g].parity for g in iter_vertices(node)) & 1


def term_weight(node, table):
    """Number of positive-arity generator vertices (arity-0 marks count as xdeg)."""
    return sum(1 for g in iter_vertices(node) if table[g].arity > 0)


def term_xdeg(node, table):
    return sum(1 for g in iter_vertices(node) if table[g].arity == 0)


def skey(node):
    """Total structural order on terms (leaves before vertices)."""
    if is_leaf(node):
        return (0, node)
    return (1, node[0], tuple(skey(c) for c in node[1:]))


def _leaf_sign_data(node, table):
    """(odd generators strictly before each leaf in pre-order, total odd count)."""
    before = {}
    count = 0

    def go(nd):
        nonlocal count
        if is_leaf(nd):
            before[nd] = count
            return
        count += table[nd[0]].parity
        for c in nd[1:]:
            go(c)

    go(node)
    return before, count


def child_key(node):
    lv = leaf_labels(node)
    if lv:
        return (0, min(lv), skey(node))
    return (1, skey(node))


def canonicalize(node, table):
    """Sort children of fully-symmetric vertices; return (sign, term).

    sign is +1/-1, or 0 with term None when the term self-cancels (two equal
    adjacent odd subtrees under a fully-symmetric vertex).
    """
    if is_leaf(node):
        return 1, node
    gen = table[node[0]]
    sign = 1
    kids = []
    for c in node[1:]:
        s, k = canonicalize(c, table)
        if s == 0:
            return 0, None
        sign *= s
        kids.append(k)
    if gen.symmetry == SYMMETRIC and len(kids) > 1:
        order = sorted(range(len(kids)), key=lambda i: child_key(kids[i]))
        pars = [term_parity(k, table) for k in kids]
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                if order[a] > order[b] and pars[order[a]] and pars[order[b]]:
                    sign = -sign
        kids = [kids[i] for i in order]
        for a in range(len(kids) - 1):
            if kids[a] == kids[a + 1] and term_parity(kids[a], table):
                return 0, None
    return sign, (node[0], *kids)


class Element:
    """Formal rational combination of canonical terms of one arity."""

    __slots__ = ("arity", "terms")

    def __init__(self, arity, terms=None):
        self.arity = arity
        self.terms = dict(terms) if terms else {}

    @classmethod
    def zero(cls, arity):
        return cls(arity)

    def is_zero(self):
        return not self.terms

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: skey(kv[0]))

    def __eq__(self, other):
        return (isinstance(other, Element) and self.arity == other.arity
                and self.terms == other.terms)

    def __add__(self, other):
        if self.arity != other.arity:
            raise ValueError("arity mismatch")
        terms = dict(self.terms)
        for nd, c in other.terms.items():
            v = terms.get(nd, Fraction(0)) + c
            if v:
                terms[nd] = v
            else:
                terms.pop(nd, None)
        return Element(self.arity, terms)

    def __neg__(self):
        return Element(self.arity, {nd: -c for nd, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, k):
        k = Fraction(k)
        if not k:
            return Element.zero(self.arity)
        return Element(self.arity, {nd: k * c for nd, c in self.terms.items()})

    def __rmul__(self, k):
        return self.scale(k)

    def __repr__(self):
        return f"Element({self.arity}, {element_str(self)!r})"


def element(table, arity, pairs):
    """Build an Element from (coeff, raw node) pairs, canonicalizing each term."""
    terms = {}
    for coeff, node in pairs:
        coeff = Fraction(coeff)
        if not coeff:
            continue
        s, cn = canonicalize(node, table)
        if s == 0:
            continue
        v = terms.get(cn, Fraction(0)) + s * coeff
        if v:
            terms[cn] = v
        else:
            terms.pop(cn, None)
    return Element(arity, terms)


def single(table, node, coeff=1):
    return element(table, arity_of(node), [(coeff, node)])


def shift_leaves(node, delta):
    if is_leaf(node):
        return node + delta
    return (node[0], *(shift_leaves(c, delta) for c in node[1:]))


def graft(f, i, g):
    """Replace leaf i of f by g (leaves i..i+arity(g)-1), shifting later leaves."""
    m = arity_of(g)
    g2 = shift_leaves(g, i - 1)

    def go(nd):
        if is_leaf(nd):
            if nd < i:
                return nd
            if nd == i:
                return g2
            return nd + m - 1
        return (nd[0], *(go(c) for c in nd[1:]))

    return go(f)


def compose_nodes(f, i, g, table):
    """(sign, raw node) for grafting g at leaf i of f.

    Start order is f's word followed by g's; g's word moves left past every
    odd generator of f strictly after leaf i in pre-order.  This is the unique
    sign making composition a chain map for the pre-order Leibniz derivation.
    """
    sign = 1
    if term_parity(g, table):
        before, total = _leaf_sign_data(f, table)
        if (total - before[i]) & 1:
            sign = -1
    return sign, graft(f, i, g)


def compose(table, f, i, g):
    """f o_i g, bilinear in both arguments, result canonical."""
    if not 1 <= i <= f.arity:
        raise ValueError(f"slot {i} out of range for arity {f.arity}")
    pairs = []
    for fn, fc in f.terms.items():
        for gn, gc in g.terms.items():
            s, nd = compose_nodes(fn, i, gn, table)
            pairs.append((s * fc * gc, nd))
    return element(table, f.arity + g.arity - 1, pairs)


def compose_many(table, f, args):
    """f o (g_1 x ... x g_k) in the first k slots, filling the last slot first."""
    if len(args) > f.arity:
        raise ValueError("too many arguments")
    out = f
    for i in range(len(args), 0, -1):
        out = compose(table, out, i, args[i - 1])
    return out


def relabel(node, sigma):
    """Leaf j -> sigma[j-1]."""
    if is_leaf(node):
        return sigma[node - 1]
    return (node[0], *(relabel(c, sigma) for c in node[1:]))


def act(table, sigma, e):
    """Relabel leaves through the permutation sigma (a tuple of images of 1..n)."""
    if sorted(sigma) != list(range(1, e.arity + 1)):
        raise ValueError(f"not a permutation of 1..{e.arity}: {sigma}")
    return element(table, e.arity,
                   [(c, relabel(nd, sigma)) for nd, c in e.terms.items()])


def plug(rep, blocks):
    """Replace numbered leaf j of rep by blocks[j-1] (blocks keep their labels)."""
    if is_leaf(rep):
        return blocks[rep - 1]
    return (rep[0], *(plug(c, blocks) for c in rep[1:]))


def _graft_all_sign(rep, block_parities, table):
    """Koszul sign for interleaving rep's generator word with the child blocks.

    Start order: rep's word, then blocks in slot order.  Block j lands at leaf
    j of rep, crossing every odd generator of rep strictly after leaf j in
    pre-order; when rep's leaves are not in increasing pre-order, odd blocks
    also cross each other (one inversion of the leaf sequence per pair).
    """
    before, total = _leaf_sign_data(rep, table)
    e = 0
    for j, p in enumerate(block_parities, start=1):
        if p:
            e += total - before[j]
    seq = leaf_labels(rep)
    for a in range(len(seq)):
        if not block_parities[seq[a] - 1]:
            continue
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b] and block_parities[seq[b] - 1]:
                e += 1
    return -1 if e & 1 else 1


def vertex_substitutions(node, table, images):
    """Single-vertex substitution terms of a derivation.

    images maps a generator name to a list of (coeff, replacement node) of the
    same arity.  Returns raw (coeff, node) pairs for
    sum over vertices v of +/- (node with the generator at v replaced),
    with the derivation sign (-1)^(odd generators before v) and the
    interleaving sign of _graft_all_sign.
    """
    out = []

    def walk(nd, before, rebuild):
        if is_leaf(nd):
            return before
        gen = table[nd[0]]
        blocks = nd[1:]
        for coeff, rep in images.get(nd[0], ()):
            s = _graft_all_sign(rep, [term_parity(b, table) for b in blocks],
                                table)
            if before & 1:
                s = -s
            out.append((coeff * s, rebuild(plug(rep, blocks))))
        cnt = before + gen.parity
        for idx, ch in enumerate(blocks):
            def rb(sub, idx=idx):
                return rebuild((nd[0], *blocks[:idx], sub, *blocks[idx + 1:]))
            cnt = walk(ch, cnt, rb)
        return cnt

    walk(node, 0, lambda s: s)
    return out


# ---------------------------------------------------------------------------
# term / element grammar:  (m2 (m2 1 2) 3)   and   -1/2 * (m2 1 2) + 1 * (x)


def term_str(node):
    if is_leaf(node):
        return str(node)
    if len(node) == 1:
        return f"({node[0]})"
    return "(" + node[0] + " " + " ".join(term_str(c) for c in node[1:]) + ")"


def _tokenize(text):
    return text.replace("(", " ( ").replace(")", " ) ").split()


def parse_term(text, table=None, arity=None):
    toks = _tokenize(text)
    pos = 0

    def next_node():
        nonlocal pos
        if pos >= len(toks):
            raise ValueError("unexpected end of term")
        t = toks[pos]
        pos += 1
        if t == ")":
            raise ValueError("unexpected ')'")
        if t != "(":
            try:
                return int(t)
            except ValueError:
                raise ValueError(f"expected leaf number or '(', got {t!r}") from None
        if pos >= len(toks):
            raise ValueError("unclosed '('")
        name = toks[pos]
        if name in ("(", ")"):
            raise ValueError("missing generator name")
        pos += 1
        kids = []
        while pos < len(toks) and toks[pos] != ")":
            kids.append(next_node())
        if pos >= len(toks):
            raise ValueError("unclosed '('")
        pos += 1
        return (name, *kids)

    node = next_node()
    if pos != len(toks):
        raise ValueError(f"trailing input: {' '.join(toks[pos:])}")
    if table is not None:
        validate_term(node, table, arity)
    return node


def element_str(e):
    if e.is_zero():
        return "0"
    return " + ".join(f"{c} * {term_str(nd)}" for nd, c in e.sorted_terms())


def parse_element(text, table, arity=None):
    text = text.strip()
    if text == "0":
        if arity is None:
            raise ValueError("cannot infer arity of the zero element")
        return Element.zero(arity)
    pairs = []
    for chunk in _split_top(text):
        if "*" in chunk:
            cs, ts = chunk.split("*", 1)
            coeff = Fraction(cs.strip())
        else:
            coeff, ts = Fraction(1), chunk
        node = parse_term(ts.strip(), table)
        pairs.append((coeff, node))
    arities = {arity_of(nd) for _, nd in pairs}
    if len(arities) != 1:
        raise ValueError(f"mixed arities {sorted(arities)} in element")
    n = arities.pop()
    if arity is not None and n != arity:
        raise ValueError(f"element has arity {n}, expected {arity}")
    for _, nd in pairs:
        validate_term(nd, table)
    return element(table, n, pairs)


def _split_top(text):
    """Split on '+' outside parentheses."""
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0:
            yield text[start:i]
            start = i + 1
    yield text[start:]
