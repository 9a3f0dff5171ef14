"""Word and bracket models with explicit bases and a contracting homotopy.

Two models over the alphabet {x, a1, ..., an}, with x odd and every a_i even
(word parity = number of x's mod 2):

  * associative words: arbitrary sequences containing each a_i exactly once
    and k >= 0 copies of x; composition is splicing;
  * left-normed bracket monomials: a word s1.s2...sL denotes the bracket
    [s1,[s2,[...[s_{L-1},sL]...]]]; the basis consists of words ending with
    the highest a-letter (for n >= 1) plus the arity-0 span {x, x.x}.

Normalizations fixed here once:
  * the arity-0 differential is d(x) = 1/2 (x.x) in the bracket model and
    d(x) = x.x in the associative model; inside longer bracket monomials the
    graded Jacobi identity doubles the inserted square, so the differential
    of any monomial is the integer "cluster rule": one term per odd maximal
    x-run, inserting one x there, with sign (-1)^{# x's strictly before the
    run}.
  * composition carries the sign (-1)^{|g| * (# x's strictly before the
    substituted slot)}; bracket-model results are straightened.
  * the tree-to-word image of a binary-vertex tree multiplies the
    straightened bracket by sgn(pre-order leaf sequence) and by
    (-1)^{# numbered leaves before v in pre-order} for every non-root binary
    vertex v (the desuspension twist); trees with a vertex of arity >= 3 map
    to zero.
"""

import itertools
from fractions import Fraction

from .engine import compositions
from .trees import is_leaf

LIE = "lie"
ASS = "ass"


def _add(out, word, coeff):
    v = out.get(word, Fraction(0)) + coeff
    if v:
        out[word] = v
    else:
        out.pop(word, None)


def combo_scale(combo, c):
    c = Fraction(c)
    return {w: v * c for w, v in combo.items()} if c else {}


def combo_sub(a, b):
    out = dict(a)
    for w, c in b.items():
        _add(out, w, -c)
    return out


def word_arity(word):
    return sum(1 for s in word if s != "x")


def word_xcount(word):
    return sum(1 for s in word if s == "x")


def word_parity(word):
    return word_xcount(word) & 1


def validate_word(model, word):
    if model not in (LIE, ASS):
        raise ValueError(f"unknown model {model!r}")
    if not word:
        raise ValueError("empty word")
    labels = []
    for s in word:
        if s == "x":
            continue
        if not (s.startswith("a") and s[1:].isdigit() and int(s[1:]) >= 1):
            raise ValueError(f"bad symbol {s!r}")
        labels.append(int(s[1:]))
    n = len(labels)
    if sorted(labels) != list(range(1, n + 1)):
        raise ValueError(f"labels {labels} are not 1..{n} exactly once")
    if model == LIE:
        if n == 0:
            if word not in (("x",), ("x", "x")):
                raise ValueError("arity-0 bracket span is {x, x.x}")
        elif word[-1] != f"a{n}":
            raise ValueError(f"bracket monomial must end with a{n}")
    return n


def lie_monomials(n, k):
    """Basis words with n slot letters and k x's (a_n last, an x-run before
    each slot letter); n = 0 gives the special span."""
    if n == 0:
        return [("x",)] if k == 1 else ([("x", "x")] if k == 2 else [])
    out = []
    for sigma in itertools.permutations(range(1, n)):
        order = (*sigma, n)
        for runs in compositions(k, n):
            word = []
            for r, a in zip(runs, order):
                word.extend(["x"] * r)
                word.append(f"a{a}")
            out.append(tuple(word))
    return out


def ass_words(n, k):
    """All arrangements of a1..an (each once) and k x's; n = 0 gives the
    pure powers."""
    if n == 0:
        return [("x",) * k] if k >= 1 else []
    out = []
    for xpos in itertools.combinations(range(n + k), k):
        for perm in itertools.permutations(range(1, n + 1)):
            it = iter(perm)
            word = tuple("x" if i in xpos else f"a{next(it)}"
                         for i in range(n + k))
            out.append(word)
    return out


def lie_dim(n):
    return len(lie_monomials(n, 0))


def ass_dim(n):
    return len(ass_words(n, 0))


def word_differential(model, word):
    """The cluster rule: one term per odd maximal x-run (insert one x there,
    sign (-1)^{# x's before the run}); bracket arity-0 special case
    d(x) = 1/2 x.x."""
    validate_word(model, word)
    if model == LIE and word == ("x",):
        return {("x", "x"): Fraction(1, 2)}
    out = {}
    xs_before = 0
    i = 0
    while i < len(word):
        if word[i] != "x":
            i += 1
            continue
        j = i
        while j < len(word) and word[j] == "x":
            j += 1
        run = j - i
        if run % 2 == 1:
            _add(out, word[:j] + ("x",) + word[j:],
                 Fraction(-1 if xs_before % 2 else 1))
        xs_before += run
        i = j
    return out


def combo_differential(model, combo):
    out = {}
    for w, c in combo.items():
        for w2, c2 in word_differential(model, w).items():
            _add(out, w2, c * c2)
    return out


def homotopy_s(model, word):
    """Delete one x from the first x-run when that run is even (zero when
    odd); bracket arity-0 special case s(x.x) = 2x.  Errors on x-free
    input."""
    validate_word(model, word)
    if "x" not in word:
        raise ValueError(f"word {word} contains no x")
    if model == LIE and word == ("x", "x"):
        return {("x",): Fraction(2)}
    if model == LIE and word == ("x",):
        return {}
    i = word.index("x")
    j = i
    while j < len(word) and word[j] == "x":
        j += 1
    if (j - i) % 2 == 1:
        return {}
    return {word[:i] + word[i + 1:]: Fraction(1)}


def combo_homotopy(model, combo):
    out = {}
    for w, c in combo.items():
        for w2, c2 in homotopy_s(model, w).items():
            _add(out, w2, c * c2)
    return out


# ---------------------------------------------------------------- brackets

def bracket_of_word(word):
    """Right-nested bracket expression of a left-normed word."""
    if len(word) == 1:
        return word[0]
    return ("br", word[0], bracket_of_word(word[1:]))


def _pure_x(word):
    return all(s == "x" for s in word)


def _dead(word):
    # x-powers of length >= 3 vanish identically ([x,[x,x]] = 0 for odd x)
    return _pure_x(word) and len(word) > 2


def _norm_bracket(U, V):
    """[U, V] as a combination of words ending with V's last letter, by
    peeling U's head letter through the graded Jacobi identity."""
    if len(U) == 1:
        W = (U[0], *V)
        return {} if _dead(W) else {W: Fraction(1)}
    u, Up = U[0], U[1:]
    out = {}
    for W, c in _norm_bracket(Up, V).items():
        if not _dead((u, *W)):
            _add(out, (u, *W), c)
    sgn = 1 if (word_parity((u,)) and word_parity(Up)) else -1
    for W, c in _norm_bracket(Up, (u, *V)).items():
        _add(out, W, Fraction(sgn) * c)
    return out


def _bracket_words(U, V):
    """Orient so the globally highest a-letter ends the second argument,
    then expand."""
    lu = [s for s in U if s != "x"]
    lv = [s for s in V if s != "x"]
    if lu and (not lv or int(U[-1][1:]) > int(V[-1][1:])):
        # [U,V] = -(-1)^{|U||V|} [V,U]
        sgn = 1 if (word_parity(U) and word_parity(V)) else -1
        return combo_scale(_bracket_words(V, U), sgn)
    return _norm_bracket(U, V)


def straighten(expr):
    """Rewrite a bracket expression into the left-normed basis."""
    if isinstance(expr, str):
        return {(expr,): Fraction(1)}
    _, left, right = expr
    out = {}
    for U, cu in straighten(left).items():
        for V, cv in straighten(right).items():
            for W, cw in _bracket_words(U, V).items():
                _add(out, W, cu * cv * cw)
    return out


# ------------------------------------------------------------- composition

def _relabel_word(word, offset, threshold=0):
    out = []
    for s in word:
        if s == "x":
            out.append(s)
        else:
            t = int(s[1:])
            out.append(f"a{t + offset}" if t > threshold else s)
    return tuple(out)


def word_compose(model, f_word, i, g_word):
    """Substitute g into slot i of f; sign (-1)^{|g| * (# x's before the
    slot)}; bracket results are straightened."""
    m = validate_word(model, f_word)
    n = validate_word(model, g_word)
    if not 1 <= i <= m:
        raise ValueError(f"slot {i} out of range for arity {m}")
    pos = f_word.index(f"a{i}")
    sign = Fraction(-1 if (word_parity(g_word)
                           and f_word[:pos].count("x") % 2) else 1)
    g_rel = _relabel_word(g_word, i - 1)
    f_rel = _relabel_word(f_word, n - 1, threshold=i)
    slot = f"a{i}"
    if model == ASS:
        spliced = f_rel[:pos] + g_rel + f_rel[pos + 1:]
        return {spliced: sign}

    def subst(e):
        if isinstance(e, str):
            return bracket_of_word(g_rel) if e == slot else e
        return ("br", subst(e[1]), subst(e[2]))

    return combo_scale(straighten(subst(bracket_of_word(f_rel))), sign)


def combo_compose(model, f_combo, i, g_combo):
    out = {}
    for fw, fc in f_combo.items():
        for gw, gc in g_combo.items():
            for w, c in word_compose(model, fw, i, gw).items():
                _add(out, w, fc * gc * c)
    return out


def alpha_word(model):
    """The canonical unary twisting element of each model."""
    if model == LIE:
        return {("x", "a1"): Fraction(1)}
    return {("x", "a1"): Fraction(1), ("a1", "x"): Fraction(-1)}


def twisted_differential(model, u_combo, combo, arity):
    """d(g) + u o_1 g - (-1)^{|u||g|} sum_i g o_i u, with word parities."""
    pars = {word_parity(w) for w in u_combo}
    if pars != {1}:
        raise ValueError("twisting element must be odd and homogeneous")
    out = combo_differential(model, combo)
    for w, c in combo_compose(model, u_combo, 1, combo).items():
        _add(out, w, c)
    for w, c in combo.items():
        sgn = Fraction(1 if word_parity(w) else -1)
        for i in range(1, arity + 1):
            for w2, c2 in combo_compose(model, {w: c}, i, u_combo).items():
                _add(out, w2, sgn * c2)
    return out


def mc_defect(model, u_combo):
    """d(u) + u o_1 u for a unary combination; zero iff u twists."""
    out = combo_differential(model, u_combo)
    for w, c in combo_compose(model, u_combo, 1, u_combo).items():
        _add(out, w, c)
    return out


# ------------------------------------------------------- tree-to-word maps

def tree_to_word_image(model, node, coeff=Fraction(1)):
    """Image of one tree term under the map sending the binary generator to
    the two-letter word, every higher generator to zero, and the arity-0
    generator to x.  See the module docstring for the sign normalization."""
    leaves = []
    vertex_signs = [1]

    def build(nd, at_root):
        if is_leaf(nd):
            leaves.append(nd)
            return f"slot{nd}"
        name = nd[0]
        if name == "x":
            return "x"
        if len(nd) != 3:
            return None
        if not at_root:
            vertex_signs[0] *= (-1) ** len(leaves)
        left = build(nd[1], False)
        if left is None:
            return None
        right = build(nd[2], False)
        return None if right is None else ("br", left, right)

    expr = build(node, True)
    if expr is None:
        return {}
    inv = sum(1 for p in range(len(leaves)) for q in range(p + 1, len(leaves))
              if leaves[p] > leaves[q])
    total = coeff * vertex_signs[0] * (-1 if inv % 2 else 1)

    def rename(e):
        if isinstance(e, str):
            return f"a{int(e[4:])}" if e.startswith("slot") else e
        return ("br", rename(e[1]), rename(e[2]))

    expr = rename(expr)
    if model == ASS:
        def flatten(e):
            return (e,) if isinstance(e, str) else flatten(e[1]) + flatten(e[2])
        return {flatten(expr): total}
    return combo_scale(straighten(expr), total)


def element_to_word_image(model, elem):
    out = {}
    for node, c in elem.terms.items():
        for w, c2 in tree_to_word_image(model, node, c).items():
            _add(out, w, c2)
    return out


def generator_word_image(model, gname):
    """x -> x, binary generator -> two-letter word, higher -> zero."""
    if gname == "x":
        return {("x",): Fraction(1)}
    if gname == "m2":
        return {("a1", "a2"): Fraction(1)}
    return {}


def projection_chain_failures(model, presentation, max_arity=None):
    """Check d_word(image(g)) == image(d_tree(g)) on every generator of a
    twisted-by-x presentation; returns the list of offending generators."""
    bad = []
    for gname, gen in sorted(presentation.table.items()):
        if max_arity is not None and gen.arity > max_arity:
            continue
        lhs = combo_differential(model, generator_word_image(model, gname))
        rhs = element_to_word_image(model, presentation.diff_image(gname))
        if combo_sub(lhs, rhs):
            bad.append(gname)
    return bad


# ------------------------------------------------- bracket-model specifics

def sign_flip_map(combo):
    """The involution multiplying each word by (-1)^{length-1} (binary
    generator to its negative, x fixed, extended multiplicatively)."""
    return {w: c * (-1 if (len(w) - 1) % 2 else 1) for w, c in combo.items()}


def jacobi_certificate():
    """Straighten [x,[a1,a2]] - [[x,a1],a2] - [a1,[x,a2]]; empty iff the
    substitution rule satisfies the graded Jacobi identity."""
    t1 = straighten(("br", "x", ("br", "a1", "a2")))
    t2 = straighten(("br", ("br", "x", "a1"), "a2"))
    t3 = straighten(("br", "a1", ("br", "x", "a2")))
    return combo_sub(combo_sub(t1, t2), t3)


def flip_intertwine_failures(model=LIE):
    """Check flip(d^alpha(g)) == d(flip(g)) on the generating words; the flip
    sends the binary word to its negative and fixes x, so it carries the
    twisted differential to the plain one."""
    alpha = alpha_word(model)
    bad = []
    for word, arity in ((("x",), 0), (("a1", "a2"), 2)):
        combo = {word: Fraction(1)}
        lhs = sign_flip_map(twisted_differential(model, alpha, combo, arity))
        rhs = combo_differential(model, sign_flip_map(combo))
        if combo_sub(lhs, rhs):
            bad.append(word)
    return bad


def word_basis(model, n, k):
    return lie_monomials(n, k) if model == LIE else ass_words(n, k)


def word_complex(model, n, k_max):
    """The fixed-slot-count complex graded by the number of x's, as a
    FiniteComplex (d from k_max out of the window is omitted, so the top
    degree is boundary-affected)."""
    from .linalg import FiniteComplex, SparseMatrix
    basis = {k: word_basis(model, n, k) for k in range(k_max + 1)}
    dims = {k: len(b) for k, b in basis.items()}
    boundaries = {}
    for k in range(k_max):
        index = {w: i for i, w in enumerate(basis[k + 1])}
        m = SparseMatrix(dims[k + 1], dims[k])
        for col, w in enumerate(basis[k]):
            for w2, c in word_differential(model, w).items():
                m[index[w2], col] = c
        boundaries[k] = m
    labels = {k: [word_str(w) for w in b] for k, b in basis.items()}
    return FiniteComplex(dims, boundaries, labels)


# ----------------------------------------------------------------- grammar

def word_str(word):
    return ".".join(word)


def parse_word(text):
    parts = text.strip().split(".")
    if not all(parts):
        raise ValueError(f"malformed word {text!r}")
    return tuple(parts)


def parse_bracket(text):
    """Recursive descent for expressions like [x,[a1,a2]]."""
    s = text.replace(" ", "")
    pos = 0

    def expr():
        nonlocal pos
        if pos < len(s) and s[pos] == "[":
            pos += 1
            left = expr()
            if pos >= len(s) or s[pos] != ",":
                raise ValueError(f"expected ',' at {pos} in {text!r}")
            pos += 1
            right = expr()
            if pos >= len(s) or s[pos] != "]":
                raise ValueError(f"expected ']' at {pos} in {text!r}")
            pos += 1
            return ("br", left, right)
        start = pos
        while pos < len(s) and s[pos] not in "[],":
            pos += 1
        if start == pos:
            raise ValueError(f"empty symbol at {pos} in {text!r}")
        return s[start:pos]

    out = expr()
    if pos != len(s):
        raise ValueError(f"trailing input at {pos} in {text!r}")
    return out


def bracket_str(expr):
    if isinstance(expr, str):
        return expr
    return f"[{bracket_str(expr[1])},{bracket_str(expr[2])}]"
