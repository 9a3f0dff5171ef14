"""Exact rational linear algebra and homology of finite based chain complexes.

Matrices are sparse maps of column vectors over Fraction; rank is computed by
fraction-free (Bareiss) elimination on integer rows so coefficients like 1/n!
never blow up mid-elimination.  Complexes are graded by an integer degree and
the boundary raises the degree by one.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm

Rational = Fraction


class SparseMatrix:
    """rows x cols rational matrix, acting on column vectors (Q^cols -> Q^rows).

    Zero entries are never stored.
    """

    def __init__(self, rows, cols, entries=None):
        self.rows = rows
        self.cols = cols
        self.entries = {}
        if entries:
            for (r, c), v in entries.items():
                self[r, c] = v

    def __getitem__(self, rc):
        return self.entries.get(rc, Fraction(0))

    def __setitem__(self, rc, v):
        r, c = rc
        if not (0 <= r < self.rows and 0 <= c < self.cols):
            raise IndexError(f"entry {rc} outside {self.rows}x{self.cols}")
        v = Fraction(v)
        if v == 0:
            self.entries.pop(rc, None)
        else:
            self.entries[rc] = v

    def __eq__(self, other):
        return (isinstance(other, SparseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.entries == other.entries)

    def is_zero(self):
        return not self.entries

    def transpose(self):
        t = SparseMatrix(self.cols, self.rows)
        for (r, c), v in self.entries.items():
            t.entries[(c, r)] = v
        return t

    def compose(self, other):
        """self @ other as linear maps: (self.compose(other))(v) = self(other(v))."""
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch: {self.rows}x{self.cols} after {other.rows}x{other.cols}")
        by_row = {}
        for (k, c), v in other.entries.items():
            by_row.setdefault(k, []).append((c, v))
        out = SparseMatrix(self.rows, other.cols)
        acc = {}
        for (r, k), u in self.entries.items():
            for c, v in by_row.get(k, ()):
                acc[(r, c)] = acc.get((r, c), Fraction(0)) + u * v
        for rc, v in acc.items():
            if v != 0:
                out.entries[rc] = v
        return out

    def apply(self, vec):
        """Apply to a dense column vector (list of Fractions)."""
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        out = [Fraction(0)] * self.rows
        for (r, c), v in self.entries.items():
            if vec[c]:
                out[r] += v * vec[c]
        return out

    def __repr__(self):
        return f"SparseMatrix({self.rows}x{self.cols}, {len(self.entries)} entries)"


def rank(m):
    """Rank over Q by fraction-free Gaussian elimination.

    Each row is first scaled to integers (rank-invariant), then Bareiss
    elimination keeps every intermediate value an exact integer.
    """
    if not m.entries:
        return 0
    rows = {}
    for (r, c), v in m.entries.items():
        rows.setdefault(r, {})[c] = v
    mat = []
    for r, row in rows.items():
        scale = lcm(*(v.denominator for v in row.values()))
        dense = [0] * m.cols
        for c, v in row.items():
            dense[c] = int(v * scale)
        mat.append(dense)
    nr, nc = len(mat), m.cols
    rk = 0
    prev = 1
    row = 0
    for col in range(nc):
        piv = None
        for i in range(row, nr):
            if mat[i][col]:
                piv = i
                break
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        pv = mat[row][col]
        for i in range(row + 1, nr):
            if not any(mat[i][col:]):
                continue
            mi = mat[i][col]
            for j in range(col + 1, nc):
                mat[i][j] = (pv * mat[i][j] - mi * mat[row][j]) // prev
            mat[i][col] = 0
        prev = pv
        rk += 1
        row += 1
        if row == nr:
            break
    return rk


def kernel_dim(m):
    return m.cols - rank(m)


def _rref(m, rhs=None):
    """Row-reduce a dense copy of m (augmented by rhs when given).

    Returns (mat, vec, pivots) where pivots maps pivot column -> row.
    """
    mat = [[m[r, c] for c in range(m.cols)] for r in range(m.rows)]
    vec = [Fraction(x) for x in rhs] if rhs is not None else None
    pivots = {}
    row = 0
    for col in range(m.cols):
        piv = next((i for i in range(row, m.rows) if mat[i][col]), None)
        if piv is None:
            continue
        mat[row], mat[piv] = mat[piv], mat[row]
        if vec is not None:
            vec[row], vec[piv] = vec[piv], vec[row]
        pv = mat[row][col]
        mat[row] = [x / pv for x in mat[row]]
        if vec is not None:
            vec[row] /= pv
        for i in range(m.rows):
            if i != row and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[row])]
                if vec is not None:
                    vec[i] -= f * vec[row]
        pivots[col] = row
        row += 1
        if row == m.rows:
            break
    return mat, vec, pivots


def solve_particular(m, rhs):
    """One exact solution of m x = rhs, or None when inconsistent."""
    if len(rhs) != m.rows:
        raise ValueError("right-hand side length mismatch")
    mat, vec, pivots = _rref(m, rhs)
    pivot_rows = set(pivots.values())
    for i in range(m.rows):
        if i not in pivot_rows and vec[i]:
            return None
    x = [Fraction(0)] * m.cols
    for col, row in pivots.items():
        x[col] = vec[row]
    return x


def nullspace(m):
    """Basis of ker(m) as dense rational column vectors."""
    mat, _, pivots = _rref(m)
    basis = []
    for free in range(m.cols):
        if free in pivots:
            continue
        v = [Fraction(0)] * m.cols
        v[free] = Fraction(1)
        for col, row in pivots.items():
            v[col] = -mat[row][free]
        basis.append(v)
    return basis


@dataclass
class FiniteComplex:
    """Chain complex with finitely many nonzero components; d raises degree by 1.

    dims[w] is the dimension of the degree-w component; boundaries[w] is the
    matrix of d restricted to degree w (shape dims[w+1] x dims[w]).  Missing
    boundaries are zero maps.  labels optionally names the basis per degree.
    """
    dims: dict
    boundaries: dict
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for w, b in self.boundaries.items():
            if b.cols != self.dims.get(w, 0) or b.rows != self.dims.get(w + 1, 0):
                raise ValueError(
                    f"boundary at degree {w} has shape {b.rows}x{b.cols}, "
                    f"expected {self.dims.get(w + 1, 0)}x{self.dims.get(w, 0)}")

    def degrees(self):
        return sorted(self.dims)


@dataclass
class ComplexReport:
    failures: list  # (degree, first offending basis index)

    @property
    def ok(self):
        return not self.failures


def verify_complex(c):
    """Check that adjacent boundaries compose to zero; report first offender per degree."""
    failures = []
    for w in sorted(c.boundaries):
        nxt = c.boundaries.get(w + 1)
        if nxt is None:
            continue
        prod = nxt.compose(c.boundaries[w])
        if not prod.is_zero():
            bad = min(col for (_, col) in prod.entries)
            failures.append((w, bad))
    return ComplexReport(failures)


def homology_dims(c):
    """dim H_w = dim ker(d_w) - rank(d_{w-1}) for every degree with a component."""
    rep = verify_complex(c)
    if not rep.ok:
        raise ValueError(f"not a complex: d^2 != 0 at {rep.failures}")
    ranks = {w: rank(b) for w, b in c.boundaries.items()}
    out = {}
    for w, dim in c.dims.items():
        out[w] = dim - ranks.get(w, 0) - ranks.get(w - 1, 0)
    return out
