"""Scalar backends and the dense matrix kernel.

Every structure in this package is generic over one of two scalar backends:

* ``ExactBackend`` -- Gaussian rationals ``a + b*i`` with arbitrary-precision
  rational parts.  All arithmetic and all rank decisions are exact.
* ``FloatBackend`` -- ``complex128`` arithmetic.  Rank decisions follow a
  single rule: a pivot counts when its magnitude exceeds ``eps`` times the
  largest entry magnitude of the matrix being reduced.

Matrices are stored as numpy arrays, ``dtype=object`` holding
:class:`GaussianRational` entries on the exact backend and ``complex128`` on
the floating one, so the higher-level code is written once.  The only
backend-sensitive primitives live here: zero tests, pivot selection and the
reduced row echelon form that every subspace computation reduces to.
"""

import numbers

import numpy as np
from gmpy2 import mpq

from .errors import DimensionMismatchError, NilpotencyError


class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if isinstance(re, type(mpq())) else mpq(re)
        self.im = im if isinstance(im, type(mpq())) else mpq(im)

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, numbers.Integral):
            return GaussianRational(int(other))
        if isinstance(other, type(mpq())):
            return GaussianRational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def __abs__(self):
        # Only used for diagnostics and pivot heuristics; exactness is not
        # needed there.
        return abs(complex(self))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return "%s*i" % self.im
        return "(%s%s%s*i)" % (self.re, "+" if self.im > 0 else "-", abs(self.im))


def _parse_rational(text):
    """Parse ``"p/q"`` or ``"p"`` into an exact rational."""
    return mpq(text)


class Backend:
    """Common interface of the two scalar backends."""

    exact = False

    def scalar(self, value):
        raise NotImplementedError

    def conj(self, s):
        raise NotImplementedError

    # -- matrix constructors ------------------------------------------------

    def matrix(self, rows):
        rows = [[self.scalar(x) for x in row] for row in rows]
        return Mat(self, np.array(rows, dtype=self._dtype).reshape(
            len(rows), len(rows[0]) if rows else 0))

    def zeros(self, m, n):
        if self.exact:
            # GaussianRational is immutable, so sharing the zero entry is safe
            data = np.full((m, n), GaussianRational(0), dtype=object)
            return Mat(self, data)
        return Mat(self, np.zeros((m, n), dtype=complex))

    def identity(self, n):
        m = self.zeros(n, n)
        for i in range(n):
            m.a[i, i] = self.one
        return m

    def from_columns(self, n, columns):
        """Build an ``n x len(columns)`` matrix from column vectors."""
        m = self.zeros(n, len(columns))
        for j, col in enumerate(columns):
            if len(col) != n:
                raise DimensionMismatchError(
                    "column of length %d in a space of dimension %d" % (len(col), n))
            for i, x in enumerate(col):
                m.a[i, j] = self.scalar(x)
        return m


class ExactBackend(Backend):
    """Gaussian-rational arithmetic; every zero test is exact."""

    exact = True
    _dtype = object
    eps = None

    def __repr__(self):
        return "ExactBackend()"

    @property
    def zero(self):
        return GaussianRational(0)

    @property
    def one(self):
        return GaussianRational(1)

    @property
    def i(self):
        return GaussianRational(0, 1)

    def scalar(self, value):
        if isinstance(value, GaussianRational):
            return value
        if isinstance(value, numbers.Integral):
            return GaussianRational(int(value))
        if isinstance(value, type(mpq())):
            return GaussianRational(value)
        if isinstance(value, str):
            return GaussianRational(_parse_rational(value))
        if isinstance(value, tuple) and len(value) == 2:
            re, im = value
            return GaussianRational(
                re if not isinstance(re, str) else _parse_rational(re),
                im if not isinstance(im, str) else _parse_rational(im))
        if isinstance(value, float):
            if value != int(value):
                raise TypeError(
                    "refusing to coerce non-integral float %r into the exact "
                    "backend; pass a rational string instead" % value)
            return GaussianRational(int(value))
        if isinstance(value, complex):
            return self.scalar(value.real) + self.i * self.scalar(value.imag)
        raise TypeError("cannot coerce %r to a Gaussian rational" % (value,))

    def conj(self, s):
        return s.conjugate()

    def is_zero_scalar(self, s, _threshold=None):
        return not bool(s)


class FloatBackend(Backend):
    """complex128 arithmetic with a relative tolerance for rank decisions."""

    exact = False
    _dtype = complex

    def __init__(self, eps=1e-9):
        self.eps = float(eps)

    def __repr__(self):
        return "FloatBackend(eps=%g)" % self.eps

    zero = 0j
    one = 1.0 + 0j
    i = 1j

    def scalar(self, value):
        if isinstance(value, str):
            return complex(float(_parse_rational(value)))
        if isinstance(value, tuple) and len(value) == 2:
            re, im = value
            re = float(_parse_rational(re)) if isinstance(re, str) else float(re)
            im = float(_parse_rational(im)) if isinstance(im, str) else float(im)
            return complex(re, im)
        if isinstance(value, GaussianRational):
            return complex(value)
        if isinstance(value, type(mpq())):
            return complex(float(value))
        return complex(value)

    def conj(self, s):
        return s.conjugate()

    def is_zero_scalar(self, s, threshold=0.0):
        return abs(s) <= threshold


#: module-level default instances; structures remember which one they carry
EXACT = ExactBackend()
FLOAT = FloatBackend()


def float_backend(eps=1e-9):
    """A floating backend with the given rank tolerance."""
    return FloatBackend(eps)


class Mat:
    """Dense matrix over a fixed backend.

    This is a thin wrapper over a numpy array (``object`` entries on the
    exact backend) providing exactly the operations the subspace layer needs.
    """

    __slots__ = ("backend", "a")

    def __init__(self, backend, a):
        self.backend = backend
        self.a = a

    # -- basic structure ----------------------------------------------------

    @property
    def shape(self):
        return self.a.shape

    @property
    def nrows(self):
        return self.a.shape[0]

    @property
    def ncols(self):
        return self.a.shape[1]

    def copy(self):
        return Mat(self.backend, self.a.copy())

    def __getitem__(self, idx):
        out = self.a[idx]
        if isinstance(out, np.ndarray):
            if out.ndim != 2:
                raise IndexError("index a Mat with 2-d slices or scalar pairs")
            return Mat(self.backend, out)
        return out

    def col(self, j):
        return Mat(self.backend, self.a[:, j:j + 1].copy())

    def take_columns(self, indices):
        return Mat(self.backend, self.a[:, list(indices)].copy())

    def take_rows(self, indices):
        return Mat(self.backend, self.a[list(indices), :].copy())

    # -- arithmetic ----------------------------------------------------------

    def _check(self, other):
        if self.backend is not other.backend:
            raise DimensionMismatchError("matrices from different backends")

    def __add__(self, other):
        self._check(other)
        return Mat(self.backend, self.a + other.a)

    def __sub__(self, other):
        self._check(other)
        return Mat(self.backend, self.a - other.a)

    def __neg__(self):
        return Mat(self.backend, -self.a)

    def __matmul__(self, other):
        self._check(other)
        if self.ncols != other.nrows:
            raise DimensionMismatchError(
                "cannot multiply %s by %s" % (self.shape, other.shape))
        return Mat(self.backend, np.dot(self.a, other.a))

    def scale(self, s):
        s = self.backend.scalar(s)
        return Mat(self.backend, self.a * s)

    def conj(self):
        if self.backend.exact:
            out = np.empty(self.a.shape, dtype=object)
            for i in range(self.nrows):
                for j in range(self.ncols):
                    out[i, j] = self.a[i, j].conjugate()
            return Mat(self.backend, out)
        return Mat(self.backend, np.conj(self.a))

    @property
    def T(self):
        return Mat(self.backend, self.a.T.copy())

    @staticmethod
    def hstack(mats):
        backend = mats[0].backend
        return Mat(backend, np.hstack([m.a for m in mats]))

    # -- predicates ----------------------------------------------------------

    def max_abs(self):
        if self.a.size == 0:
            return 0.0
        return max(abs(x) for x in self.a.flat)

    def is_zero(self, tol=None):
        if self.backend.exact:
            return all(not bool(x) for x in self.a.flat)
        if tol is None:
            tol = self.backend.eps
        return self.max_abs() <= tol

    def eq(self, other, tol=None):
        self._check(other)
        if self.shape != other.shape:
            return False
        return (self - other).is_zero(tol)

    def to_lists(self):
        return [[self.a[i, j] for j in range(self.ncols)] for i in range(self.nrows)]

    def __repr__(self):
        return "Mat(%s, %r)" % (self.backend, self.a)


# ---------------------------------------------------------------------------
# echelon kernel
# ---------------------------------------------------------------------------

def rref(m):
    """Reduced row echelon form with deterministic pivoting.

    Columns are scanned left to right; within a column the pivot is the first
    admissible row on the exact backend and the row of largest magnitude on
    the floating one.  On the floating backend an entry is admissible as a
    pivot only when its magnitude exceeds ``eps`` times the largest entry
    magnitude of the input matrix, which is the single rank rule used
    throughout the package.

    Returns
    -------
    (Mat, list of int)
        The reduced form and the pivot column indices.
    """
    backend = m.backend
    a = m.a.copy()
    nr, nc = a.shape
    if backend.exact:
        threshold = None
    else:
        threshold = backend.eps * m.max_abs()
    pivots = []
    r = 0
    for c in range(nc):
        if r >= nr:
            break
        # pivot selection
        piv = -1
        if backend.exact:
            for i in range(r, nr):
                if bool(a[i, c]):
                    piv = i
                    break
        else:
            col = np.abs(a[r:, c])
            i = int(np.argmax(col)) + r if col.size else -1
            if i >= 0 and abs(a[i, c]) > threshold:
                piv = i
        if piv < 0:
            continue
        if piv != r:
            a[[r, piv], :] = a[[piv, r], :]
        a[r, :] = a[r, :] / a[r, c]
        for i in range(nr):
            if i != r:
                x = a[i, c]
                if backend.exact:
                    if bool(x):
                        a[i, :] = a[i, :] - a[r, :] * x
                else:
                    if x != 0:
                        a[i, :] = a[i, :] - a[r, :] * x
        pivots.append(c)
        r += 1
    return Mat(backend, a), pivots


def rank(m):
    return len(rref(m)[1])


def column_space_basis(m):
    """Canonical basis of the column space, as columns.

    The reduced row echelon form of the transpose is canonical on the exact
    backend, so two subspaces are equal iff their bases are identical there.
    Pivot indices come out in ascending row order.
    """
    r, pivots = rref(m.T)
    basis = r.a[: len(pivots), :].T.copy()
    return Mat(m.backend, basis), pivots


def kernel_basis(m):
    """Basis of the right kernel, as columns of an ``ncols x k`` matrix."""
    backend = m.backend
    r, pivots = rref(m)
    nc = m.ncols
    free = [j for j in range(nc) if j not in pivots]
    out = backend.zeros(nc, len(free))
    for k, j in enumerate(free):
        out.a[j, k] = backend.one
        for i, pc in enumerate(pivots):
            out.a[pc, k] = -r.a[i, j]
    return out


def solve(a, b):
    """Solve ``a @ x = b`` for all columns of ``b``.

    Returns ``None`` when the system is inconsistent at the backend's rank
    tolerance; when the solution is not unique an arbitrary representative
    (free coordinates set to zero) is returned.
    """
    backend = a.backend
    aug = Mat.hstack([a, b])
    r, pivots = rref(aug)
    na = a.ncols
    # inconsistent iff a pivot lands in the b-block
    for c in pivots:
        if c >= na:
            return None
    x = backend.zeros(na, b.ncols)
    for i, c in enumerate(pivots):
        for j in range(b.ncols):
            x.a[c, j] = r.a[i, na + j]
    return x


def inverse(a):
    if a.nrows != a.ncols:
        raise DimensionMismatchError("cannot invert a non-square matrix")
    x = solve(a, a.backend.identity(a.nrows))
    if x is None or rank(a) != a.nrows:
        raise DimensionMismatchError("matrix is singular at the backend tolerance")
    return x


def mat_power(a, k):
    out = a.backend.identity(a.nrows)
    for _ in range(k):
        out = out @ a
    return out


def exp_series(a, scale, order):
    """``sum_{j<=order} (scale*a)^j / j!`` for a square matrix."""
    backend = a.backend
    scaled = a.scale(scale)
    term = backend.identity(a.nrows)
    total = term
    for j in range(1, order + 1):
        term = (term @ scaled).scale(backend.scalar(1) / backend.scalar(j))
        total = total + term
    return total


def nilpotency_order(a, tol=None):
    """Smallest ``k`` with ``a^k = 0``, or raise if ``a^dim != 0``."""
    n = a.nrows
    if n == 0:
        return 0
    p = a.backend.identity(n)
    for k in range(n + 1):
        if p.is_zero(tol):
            return k
        p = p @ a
    raise NilpotencyError("operator is not nilpotent: A^dim != 0")
