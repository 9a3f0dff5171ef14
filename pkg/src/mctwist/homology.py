"""Betti tables and theorem certificates over the truncated complexes.

Acyclicity and quasi-isomorphism statements are certified primarily by exact
homotopy identities (dH + Hd = id checked on explicit bases) and secondarily
by interior-window Betti numbers; weight/x truncation can create spurious
homology at the boundary of the window, so a Betti entry at weight w counts
as theorem-relevant only when 1 <= w and w + 1 <= W.
"""

from dataclasses import dataclass, field

from .engine import (Bounds, d_squared_report, differential, enumerate_basis,
                     truncated_complex)
from .linalg import rank
from .presets import hat_homotopy, power_homotopy, preset, root_chain
from .trees import Element, is_leaf, single, term_str
from . import words
from .words import (ASS, LIE, alpha_word, ass_dim, combo_differential,
                    combo_homotopy, combo_scale, combo_sub,
                    flip_intertwine_failures, homotopy_s, jacobi_certificate,
                    lie_dim, mc_defect, twisted_differential, word_basis,
                    word_complex, word_differential, word_str)


@dataclass
class BettiTable:
    """Homology dimensions per (arity, grading) with window provenance."""
    presentation: str
    bounds: Bounds
    entries: dict                 # (arity, degree) -> dim H
    flags: dict                   # (arity, degree) -> window flag
    rank_bound: int = None
    mode: str = "weight-graded"   # or "xdeg-graded" for the word models

    def total(self, arity):
        return sum(v for (n, _), v in self.entries.items() if n == arity)


def betti(p, arities, rank_bound=None, verify=True):
    """Homology dimensions of the truncated arity components.

    Requires d^2 = 0 (checked unless verify=False).  rank_bound caps the
    matrix size fed to exact elimination; slices whose boundary maps exceed
    it are skipped and flagged instead of computed.
    """
    if verify:
        rep = d_squared_report(p)
        if not rep.ok:
            names = [g for g, _ in rep.failures]
            raise ValueError(f"d^2 != 0 for {p.name} at {names}")
    entries, flags = {}, {}
    W = p.bounds.weight
    for n in arities:
        cx = truncated_complex(p, n)
        ranks = {}
        for w, b in cx.boundaries.items():
            if rank_bound is not None and max(b.rows, b.cols) > rank_bound:
                ranks[w] = None
            else:
                ranks[w] = rank(b)
        for w, dim in sorted(cx.dims.items()):
            r_out = ranks.get(w, 0)
            r_in = ranks.get(w - 1, 0)
            if r_out is None or r_in is None:
                flags[(n, w)] = "rank-bound-exceeded"
                continue
            entries[(n, w)] = dim - r_out - r_in
            flags[(n, w)] = ("interior" if 1 <= w <= W - 1
                             else "boundary-affected")
    return BettiTable(p.name, p.bounds, entries, flags, rank_bound)


def betti_words(model, n_values, k_max):
    """Homology of the word-model complexes, graded by the number of x's."""
    entries, flags = {}, {}
    for n in n_values:
        cx = word_complex(model, n, k_max)
        ranks = {k: rank(b) for k, b in cx.boundaries.items()}
        for k, dim in sorted(cx.dims.items()):
            entries[(n, k)] = dim - ranks.get(k, 0) - ranks.get(k - 1, 0)
            flags[(n, k)] = ("interior" if k + 1 <= k_max
                             else "boundary-affected")
    bounds = Bounds(arity=max(n_values), weight=0, xdeg=k_max)
    return BettiTable(f"words:{model}", bounds, entries, flags,
                      mode="xdeg-graded")


def render_betti(t):
    """Plain-text table plus key=value lines (stable ordering)."""
    deg = "weight" if t.mode == "weight-graded" else "xdeg"
    lines = [f"betti table: {t.presentation}",
             f"bounds: arity<={t.bounds.arity} weight<={t.bounds.weight} "
             f"xdeg<={t.bounds.xdeg}",
             f"grading: {t.mode}"]
    if t.rank_bound is not None:
        lines.append(f"rank bound: {t.rank_bound}")
    lines.append(f"{'arity':>6} {deg:>6} {'dim H':>6}  window")
    for key in sorted(t.flags):
        n, w = key
        dim = t.entries[key] if key in t.entries else "-"
        lines.append(f"{n:>6} {w:>6} {dim:>6}  {t.flags[key]}")
    lines.append("")
    for key in sorted(t.entries):
        lines.append(f"betti[{key[0]},{key[1]}]={t.entries[key]}")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- contractions

def _strip_homotopy(p, nd, coeff):
    """Dispatch one basis term to the root-strip or pure-power homotopy."""
    r, rest = root_chain(nd)
    term = single(p.table, nd, coeff)
    if is_leaf(rest):
        if r == 0:
            raise ValueError("the identity term lies outside the complement")
        return power_homotopy(p, term)
    return hat_homotopy(p, term)


def hat_contraction(p, e):
    """The contracting homotopy of a hat-presentation, defined on the
    complement of the identity."""
    out = Element.zero(e.arity)
    for nd, c in e.terms.items():
        out = out + _strip_homotopy(p, nd, c)
    return out


def hat_contraction_failures(p, max_arity=None, max_weight=None,
                             max_xdeg=None):
    """Check dH + Hd = id on every basis term except the bare identity leaf,
    in an ambient presentation one weight step wider (the homotopy pulls
    weight-(W+1) differential terms back into the window)."""
    b = p.bounds
    N = b.arity if max_arity is None else max_arity
    W = b.weight if max_weight is None else max_weight
    K = b.xdeg if max_xdeg is None else max_xdeg
    amb = p.with_bounds(Bounds(N, W + 1, K))
    checked, failures = 0, []
    for n in range(N + 1):
        for w in range(W + 1):
            for k in range(K + 1):
                for nd in enumerate_basis(amb, n, w, k).basis:
                    if is_leaf(nd):
                        continue
                    e = single(amb.table, nd)
                    total = (differential(amb, hat_contraction(amb, e))
                             + hat_contraction(amb, differential(amb, e)))
                    checked += 1
                    if total + e.scale(-1) != Element.zero(e.arity):
                        failures.append(term_str(nd))
    return checked, failures


def word_d_squared_failures(model, n_max, k_max):
    checked, failures = 0, []
    for n in range(n_max + 1):
        for k in range(k_max + 1):
            for mono in word_basis(model, n, k):
                dd = combo_differential(model, word_differential(model, mono))
                checked += 1
                if dd:
                    failures.append(word_str(mono))
    return checked, failures


def word_homotopy_failures(model, n_max, k_max):
    """ds + sd = id on every monomial containing at least one x."""
    checked, failures = 0, []
    for n in range(n_max + 1):
        for k in range(1, k_max + 1):
            for mono in word_basis(model, n, k):
                total = combo_sub(
                    combo_differential(model, homotopy_s(model, mono)),
                    combo_scale(combo_homotopy(
                        model, word_differential(model, mono)), -1))
                checked += 1
                if total != {mono: 1}:
                    failures.append(word_str(mono))
    return checked, failures


def twisted_d_squared_failures(model, n_max, k_max):
    """(d^alpha)^2 = 0 on every basis monomial in the window."""
    alpha = alpha_word(model)
    checked, failures = 0, []
    for n in range(n_max + 1):
        for k in range(k_max + 1):
            for mono in word_basis(model, n, k):
                once = twisted_differential(model, alpha, {mono: 1}, n)
                checked += 1
                if twisted_differential(model, alpha, once, n):
                    failures.append(word_str(mono))
    return checked, failures


# ------------------------------------------------------------- certificates

@dataclass
class CertificateReport:
    name: str
    window: str
    checked: int
    failures: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.failures


def render_certificate(r):
    lines = [f"certificate: {r.name}",
             f"range: {r.window}",
             *r.notes,
             "",
             f"certificate={r.name}",
             f"range={r.window}",
             f"checked={r.checked}",
             f"failures={len(r.failures)}"]
    for f in r.failures[:20]:
        lines.append(f"failure={f}")
    lines.append(f"result={'PASS' if r.ok else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _acyclicity_certificate(name, preset_name, N, W, K):
    base = preset(preset_name, Bounds(N, W, K))
    checked, failures = hat_contraction_failures(base, N, W, K)
    window = f"preset={preset_name} arity<={N} weight<={W} xdeg<={K}"
    return CertificateReport(
        name, window, checked, failures,
        notes=["identity dH + Hd = id on every basis term outside the "
               "identity span"])


def _mc_quasi_certificate(name, model, n_max, k_max):
    checked, failures = word_homotopy_failures(model, n_max, k_max)
    notes = ["identity ds + sd = id on x-containing monomials"]
    dim_of = lie_dim if model == LIE else ass_dim
    table = betti_words(model, range(n_max + 1), k_max)
    for n in range(n_max + 1):
        for k in range(k_max):
            want = dim_of(n) if k == 0 else 0
            got = table.entries[(n, k)] if (n, k) in table.entries else 0
            if got != want:
                failures.append(f"dim H[n={n},k={k}]={got} expected {want}")
        checked += k_max
    notes.append("interior homology window matches the target operad "
                 "dimension in x-degree 0 and vanishes above")
    window = f"model={model} n<={n_max} x<={k_max}"
    return CertificateReport(name, window, checked, sorted(failures), notes)


def _tw_certificate(name, model, n_max, k_max):
    failures = []
    checked = 1
    if model == LIE and jacobi_certificate():
        failures.append("jacobi residual nonzero")
    gen_fail = flip_intertwine_failures(model)
    checked += 2
    failures.extend(f"generator {'.'.join(w)}" for w in gen_fail)
    if mc_defect(model, alpha_word(model)):
        failures.append("twisting element fails its defining equation")
    checked += 1
    sq_checked, sq_fail = twisted_d_squared_failures(model, n_max, k_max)
    checked += sq_checked
    failures.extend(f"(d^a)^2 != 0 on {w}" for w in sq_fail)
    window = f"model={model} n<={n_max} x<={k_max}"
    return CertificateReport(
        name, window, checked, failures,
        notes=["substitution straightens to zero (Jacobi), the sign flip "
               "intertwines the twisted and plain differentials on the "
               "generators, and the twisted differential squares to zero "
               "on the window" if model == LIE else
               "the sign flip intertwines the twisted and plain "
               "differentials on the generators and the twisted "
               "differential squares to zero on the window"])


_DEFAULTS = {
    "hat-acyclic": dict(arity=4, weight=4, xdeg=0),
    "l-script-acyclic": dict(arity=4, weight=4, xdeg=3),
    "a-script-acyclic": dict(arity=4, weight=4, xdeg=3),
    "ass-mc-quasi": dict(n=3, x=4),
    "lie-mc-quasi": dict(n=3, x=4),
    "tw-lie": dict(n=4, x=2),
    "tw-ass": dict(n=4, x=2),
}


def certificate_names():
    return sorted(_DEFAULTS)


def compare_theorem(name, arity=None, weight=None, xdeg=None, n=None, x=None):
    """Run the named certificate; keyword overrides adjust the window."""
    if name not in _DEFAULTS:
        raise KeyError(f"unknown certificate {name!r} "
                       f"(supported: {', '.join(certificate_names())})")
    w = dict(_DEFAULTS[name])
    for key, val in (("arity", arity), ("weight", weight), ("xdeg", xdeg),
                     ("n", n), ("x", x)):
        if val is not None and key in w:
            w[key] = val
    if name == "hat-acyclic":
        return _acyclicity_certificate(name, "hat:ainfty",
                                       w["arity"], w["weight"], w["xdeg"])
    if name == "l-script-acyclic":
        return _acyclicity_certificate(name, "hat:mc:linfty",
                                       w["arity"], w["weight"], w["xdeg"])
    if name == "a-script-acyclic":
        return _acyclicity_certificate(name, "hat:mc:ainfty",
                                       w["arity"], w["weight"], w["xdeg"])
    if name == "ass-mc-quasi":
        return _mc_quasi_certificate(name, ASS, w["n"], w["x"])
    if name == "lie-mc-quasi":
        return _mc_quasi_certificate(name, LIE, w["n"], w["x"])
    if name == "tw-lie":
        return _tw_certificate(name, LIE, w["n"], w["x"])
    return _tw_certificate(name, ASS, w["n"], w["x"])
