"""Exact linear algebra over the rationals or a prime field.

Scalars are ``fractions.Fraction`` over the rationals and plain ints in
``range(p)`` over a prime field.  Elimination is deterministic: pivots
are chosen column by column from the left, taking the first row with a
nonzero entry in the pivot column.
"""

from __future__ import annotations

import heapq
from fractions import Fraction


class Field:
    """The rationals (``characteristic == 0``) or integers mod a prime."""

    def __init__(self, characteristic: int = 0):
        if characteristic < 0:
            raise ValueError("characteristic must be 0 or a prime")
        if characteristic:
            if characteristic < 2 or any(
                characteristic % q == 0 for q in range(2, int(characteristic**0.5) + 1)
            ):
                raise ValueError("characteristic must be 0 or a prime")
        self.characteristic = characteristic

    # -- scalar construction -------------------------------------------------
    def coerce(self, value):
        if self.characteristic:
            if isinstance(value, Fraction):
                num = value.numerator % self.characteristic
                den = value.denominator % self.characteristic
                return (num * self._inv_int(den)) % self.characteristic
            return int(value) % self.characteristic
        if isinstance(value, Fraction):
            return value
        return Fraction(value)

    @property
    def zero(self):
        return self.coerce(0)

    @property
    def one(self):
        return self.coerce(1)

    # -- arithmetic -----------------------------------------------------------
    def add(self, a, b):
        if self.characteristic:
            return (a + b) % self.characteristic
        return a + b

    def sub(self, a, b):
        if self.characteristic:
            return (a - b) % self.characteristic
        return a - b

    def mul(self, a, b):
        if self.characteristic:
            return (a * b) % self.characteristic
        return a * b

    def neg(self, a):
        if self.characteristic:
            return (-a) % self.characteristic
        return -a

    def _inv_int(self, a):
        a %= self.characteristic
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.characteristic - 2, self.characteristic)

    def inv(self, a):
        if self.characteristic:
            return self._inv_int(a)
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / Fraction(a)

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a):
        if self.characteristic:
            return a % self.characteristic == 0
        return a == 0

    def sign_pow(self, exponent: int):
        """(-1) ** exponent as a field element."""
        return self.coerce(-1 if exponent % 2 else 1)

    # -- misc -----------------------------------------------------------------
    def __repr__(self):
        if self.characteristic:
            return f"Field(GF({self.characteristic}))"
        return "Field(QQ)"

    def __eq__(self, other):
        return isinstance(other, Field) and other.characteristic == self.characteristic

    def __hash__(self):
        return hash(("Field", self.characteristic))


QQ = Field(0)


def GF(p: int) -> Field:
    return Field(p)


def field_from_name(name: str) -> Field:
    """Parse 'QQ', 'Q', 'GF(7)', 'F7' or a bare prime."""
    name = name.strip()
    if name in ("QQ", "Q", "0"):
        return QQ
    if name.upper().startswith("GF(") and name.endswith(")"):
        return GF(int(name[3:-1]))
    if name.upper().startswith("F"):
        return GF(int(name[1:]))
    return GF(int(name))


class Matrix:
    """Dense matrix with entries in a fixed field; rows act on the left."""

    def __init__(self, field: Field, rows: int, cols: int, entries=None):
        self.field = field
        self.rows = rows
        self.cols = cols
        if entries is None:
            z = field.zero
            self.entries = [[z] * cols for _ in range(rows)]
        else:
            if len(entries) != rows or any(len(r) != cols for r in entries):
                raise ValueError("entry shape mismatch")
            self.entries = [[field.coerce(x) for x in row] for row in entries]

    @classmethod
    def from_rows(cls, field: Field, rows_data):
        rows_data = [list(r) for r in rows_data]
        nrows = len(rows_data)
        ncols = len(rows_data[0]) if rows_data else 0
        return cls(field, nrows, ncols, rows_data)

    @classmethod
    def identity(cls, field: Field, n: int):
        m = cls(field, n, n)
        for i in range(n):
            m.entries[i][i] = field.one
        return m

    def copy(self):
        return Matrix(self.field, self.rows, self.cols, [row[:] for row in self.entries])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __setitem__(self, ij, value):
        i, j = ij
        self.entries[i][j] = self.field.coerce(value)

    def transpose(self):
        return Matrix(
            self.field,
            self.cols,
            self.rows,
            [[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)],
        )

    def matmul(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in matmul")
        f = self.field
        out = Matrix(f, self.rows, other.cols)
        for i in range(self.rows):
            row = self.entries[i]
            for k in range(self.cols):
                a = row[k]
                if f.is_zero(a):
                    continue
                orow = other.entries[k]
                trow = out.entries[i]
                for j in range(other.cols):
                    trow[j] = f.add(trow[j], f.mul(a, orow[j]))
        return out

    def apply_row(self, vec):
        """Row vector times matrix."""
        if len(vec) != self.rows:
            raise ValueError("vector length mismatch")
        f = self.field
        out = [f.zero] * self.cols
        for i, a in enumerate(vec):
            if f.is_zero(a):
                continue
            row = self.entries[i]
            for j in range(self.cols):
                out[j] = f.add(out[j], f.mul(a, row[j]))
        return out

    def add_matrix(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        f = self.field
        return Matrix(
            f,
            self.rows,
            self.cols,
            [
                [f.add(self.entries[i][j], other.entries[i][j]) for j in range(self.cols)]
                for i in range(self.rows)
            ],
        )

    def scale(self, c) -> "Matrix":
        f = self.field
        c = f.coerce(c)
        return Matrix(
            f,
            self.rows,
            self.cols,
            [[f.mul(c, x) for x in row] for row in self.entries],
        )

    def is_zero(self):
        f = self.field
        return all(f.is_zero(x) for row in self.entries for x in row)

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, {self.field})"


def _rref(field: Field, mat):
    """Reduced row echelon form in place; returns list of pivot columns.

    Deterministic: scan columns left to right, take the first not-yet-used
    row with a nonzero entry in that column.
    """
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    pivots = []
    pivot_row = 0
    for col in range(ncols):
        sel = None
        for r in range(pivot_row, nrows):
            if not field.is_zero(mat[r][col]):
                sel = r
                break
        if sel is None:
            continue
        mat[pivot_row], mat[sel] = mat[sel], mat[pivot_row]
        inv = field.inv(mat[pivot_row][col])
        mat[pivot_row] = [field.mul(inv, x) for x in mat[pivot_row]]
        for r in range(nrows):
            if r != pivot_row and not field.is_zero(mat[r][col]):
                c = mat[r][col]
                prow = mat[pivot_row]
                mat[r] = [field.sub(x, field.mul(c, p)) for x, p in zip(mat[r], prow)]
        pivots.append(col)
        pivot_row += 1
        if pivot_row == nrows:
            break
    return pivots


def rank(field: Field, matrix: Matrix) -> int:
    mat = [row[:] for row in matrix.entries]
    return len(_rref(field, mat))


def solve_linear(field: Field, matrix: Matrix, rhs):
    """Solve A x = b for a column vector x.

    ``matrix`` is rows x cols, ``rhs`` has length rows.  Returns a
    particular solution (length cols) with free variables set to zero,
    or ``None`` when the system is inconsistent.
    """
    nrows, ncols = matrix.rows, matrix.cols
    if len(rhs) != nrows:
        raise ValueError("rhs length mismatch")
    aug = [matrix.entries[i][:] + [field.coerce(rhs[i])] for i in range(nrows)]
    pivots = _rref(field, aug)
    if ncols in pivots:
        return None
    sol = [field.zero] * ncols
    for r, col in enumerate(pivots):
        sol[col] = aug[r][ncols]
    return sol


def kernel_basis(field: Field, matrix: Matrix):
    """Basis of {x : A x = 0}, x a column vector of length cols.

    Deterministic: one basis vector per free column, in increasing
    column order, with that free variable set to one.
    """
    nrows, ncols = matrix.rows, matrix.cols
    mat = [row[:] for row in matrix.entries]
    pivots = _rref(field, mat)
    pivot_set = set(pivots)
    free_cols = [c for c in range(ncols) if c not in pivot_set]
    basis = []
    for fc in free_cols:
        vec = [field.zero] * ncols
        vec[fc] = field.one
        for r, pc in enumerate(pivots):
            vec[pc] = field.neg(mat[r][fc])
        basis.append(vec)
    return basis


def row_space_coordinates(field: Field, basis_rows, vector):
    """Coordinates of ``vector`` in the span of ``basis_rows`` or None.

    ``basis_rows`` is a list of equal-length row vectors.  Solves
    sum_i c_i basis_rows[i] = vector.
    """
    if not basis_rows:
        return [] if all(field.is_zero(field.coerce(v)) for v in vector) else None
    a = Matrix.from_rows(field, basis_rows).transpose()
    return solve_linear(field, a, [field.coerce(v) for v in vector])


def sparse_rank(field: Field, rows):
    """Rank of a matrix given as row dicts ``{column_key: coefficient}``.

    Gaussian elimination with greedy fill-minimizing pivoting: repeatedly
    pick the shortest live row, and within it the column hitting the
    fewest other rows.  On the sparse differentials arising from string
    categories this stays near-linear where dense elimination is cubic.
    """
    live = {}
    col_rows = {}
    for i, r in enumerate(rows):
        r = {c: field.coerce(v) for c, v in r.items() if not field.is_zero(field.coerce(v))}
        if not r:
            continue
        live[i] = r
        for c in r:
            col_rows.setdefault(c, set()).add(i)

    heap = [(len(r), i) for i, r in live.items()]
    heapq.heapify(heap)

    rnk = 0
    while live:
        # shortest live row, via a lazily updated heap
        while True:
            ln, i = heapq.heappop(heap)
            if i in live and len(live[i]) == ln:
                break
        row = live.pop(i)
        # pivot column touching the fewest other rows
        col = min(row, key=lambda c: len(col_rows[c]))
        pv = row[col]
        inv = field.inv(pv)
        victims = col_rows.pop(col)
        victims.discard(i)
        for c in row:
            if c != col:
                col_rows[c].discard(i)
        for j in victims:
            other = live[j]
            factor = field.mul(other[col], inv)
            del other[col]
            for c, v in row.items():
                if c == col:
                    continue
                new = field.sub(other.get(c, field.zero), field.mul(factor, v))
                if field.is_zero(new):
                    if c in other:
                        del other[c]
                        col_rows[c].discard(j)
                else:
                    if c not in other:
                        col_rows.setdefault(c, set()).add(j)
                    other[c] = new
            if not other:
                del live[j]
            else:
                heapq.heappush(heap, (len(other), j))
        rnk += 1
    return rnk
