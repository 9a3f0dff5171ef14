"""Nilpotent graded-commutative coefficient algebras with exact arithmetic.

A coefficient algebra is free graded-commutative on finitely many named
generators, truncated by total word length: any product of more than
``weight_bound`` generators is zero.  The augmentation ideal is therefore
nilpotent, so every master-equation or twisting series evaluated over such
an algebra is a finite sum.

Elements are dicts mapping normal-form monomials to rationals.  A monomial
is a tuple of generator indices sorted ascending; sorting pays a sign for
every transposition of two odd generators, and an odd generator appearing
twice kills the monomial.  The unit is the empty monomial ``()``;
``ground()`` gives the coefficient algebra with no generators at all,
used for structures with plain rational values.

The differential is specified on generators (values must lie in the
augmentation ideal) and extends as an odd derivation.  Checking d(d(g)) = 0
on generators settles it everywhere: d*d is an even derivation, and the
truncation ideal is stable under d because d never shortens a monomial.
"""

from fractions import Fraction

__all__ = [
    "NilCdga",
    "a_add",
    "a_scale",
    "a_sub",
]


def a_add(x, y):
    out = dict(x)
    for k, c in y.items():
        c2 = out.get(k, 0) + c
        if c2:
            out[k] = c2
        else:
            out.pop(k, None)
    return out


def a_scale(x, c):
    c = Fraction(c)
    if not c:
        return {}
    return {k: v * c for k, v in x.items()}


def a_sub(x, y):
    return a_add(x, a_scale(y, -1))


class NilCdga:
    """Free graded-commutative algebra on named generators, truncated."""

    def __init__(self, names, parities, weight_bound, d_gens=None):
        self.names = tuple(names)
        self.parities = tuple(int(p) for p in parities)
        self.weight_bound = int(weight_bound)
        if len(self.names) != len(self.parities):
            raise ValueError("one parity per generator")
        if len(set(self.names)) != len(self.names):
            raise ValueError("generator names must be distinct")
        if any(p not in (0, 1) for p in self.parities):
            raise ValueError("parities are 0 or 1")
        if self.weight_bound < 0:
            raise ValueError("weight bound must be nonnegative")
        if self.names and self.weight_bound < 1:
            raise ValueError("weight bound must be positive with generators")
        self.d_gens = {}
        for i, img in (d_gens or {}).items():
            img = {m: Fraction(c) for m, c in img.items() if c}
            if not img:
                continue
            for m, _ in img.items():
                if m == ():
                    raise ValueError("differential must land in the "
                                     "augmentation ideal")
                if self.mono_parity(m) == self.parities[i]:
                    raise ValueError(f"d({self.names[i]}) must flip parity")
            self.d_gens[i] = img
        for i in self.d_gens:
            if self.differential(self.d_gens[i]):
                raise ValueError(f"d(d({self.names[i]})) is nonzero")

    @classmethod
    def ground(cls):
        return cls((), (), 0)

    def index(self, name):
        return self.names.index(name)

    def mono_parity(self, mono):
        return sum(self.parities[i] for i in mono) % 2

    def normalize(self, seq):
        """Sort a generator-index sequence; (monomial, sign) or None."""
        if len(seq) > self.weight_bound:
            return None
        out = list(seq)
        sign = 1
        for i in range(1, len(out)):
            j = i
            while j > 0 and out[j - 1] > out[j]:
                if self.parities[out[j - 1]] and self.parities[out[j]]:
                    sign = -sign
                out[j - 1], out[j] = out[j], out[j - 1]
                j -= 1
        for a, b in zip(out, out[1:]):
            if a == b and self.parities[a]:
                return None
        return tuple(out), sign

    def mul_mono(self, a, b):
        return self.normalize(a + b)

    def mul(self, x, y):
        out = {}
        for ma, ca in x.items():
            for mb, cb in y.items():
                nz = self.mul_mono(ma, mb)
                if nz is None:
                    continue
                m, s = nz
                c = out.get(m, 0) + ca * cb * s
                if c:
                    out[m] = c
                else:
                    out.pop(m, None)
        return out

    def unit(self):
        return {(): Fraction(1)}

    def differential(self, x):
        """Odd-derivation extension of the generator images."""
        out = {}
        for mono, coeff in x.items():
            sign = 1
            for pos, gen in enumerate(mono):
                img = self.d_gens.get(gen)
                if img:
                    head = {mono[:pos]: Fraction(sign)}
                    tail = {mono[pos + 1:]: Fraction(1)}
                    piece = self.mul(self.mul(head, img), tail)
                    out = a_add(out, a_scale(piece, coeff))
                if self.parities[gen]:
                    sign = -sign
        return out

    def monomials(self, length):
        """All normal-form monomials of the given word length."""
        if length == 0:
            yield ()
            return
        if length > self.weight_bound:
            return

        def rec(start, left):
            if left == 0:
                yield ()
                return
            for g in range(start, len(self.names)):
                for rest in rec(g + 1 if self.parities[g] else g, left - 1):
                    yield (g,) + rest

        yield from rec(0, length)

    def basis(self, with_unit=False):
        """Normal-form monomials of the augmentation ideal, by length."""
        out = [()] if with_unit else []
        for length in range(1, self.weight_bound + 1):
            out.extend(self.monomials(length))
        return out

    def mono_str(self, mono):
        return "1" if mono == () else ".".join(self.names[i] for i in mono)

    def __repr__(self):
        gens = ", ".join(f"{n}{'~' if p else ''}"
                         for n, p in zip(self.names, self.parities))
        return f"NilCdga([{gens}], weight<={self.weight_bound})"
