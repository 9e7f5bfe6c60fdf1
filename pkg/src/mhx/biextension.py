"""Biextension structures, designated Betti generators and the height.

A biextension carries graded pieces Q(0), H, Q(1) at weights 0, -1, -2 and
two designated rational generators: a lift ``one`` of the canonical generator
of the weight-0 piece and the generator ``one_dual`` of the bottom line.  Its
height is read off the splitting operator through

    delta(one) = (height / 2pi) * one_dual ,

which is well defined because ``delta`` of a three-step structure shifts the
weight grading by exactly two, so it kills ``W_{-1}`` and the value on
``one`` does not depend on the chosen lift.

Normalization facts derived once from the two-step model (see
``tests/test_biextension.py`` for the derivations):

* the two-step structure with ``F^0 = span(one + z*one_dual)`` has
  ``delta(one) = Im(z) * one_dual`` and height ``2*pi*Im(z)``;
* the four-point model on the projective line stores the period
  ``z = log(CR) / (2*pi*i)`` with ``CR = ((r-p)(s-q)) / ((r-q)(s-p))``, so
  its height equals ``-log|CR|`` (the constant relating height to
  ``log|CR|`` is minus one);
* the dual biextension carries the negated class, so
  ``height(dual(B)) = -height(B)`` and the double dual restores the height.
"""

import cmath
import math

from gmpy2 import mpq

from .backend import FLOAT, Mat
from .errors import (
    DegenerateConfigurationError,
    NumericalError,
    ShapeError,
)
from .linalg import Filtration, Space
from .mhs import delta, dual, is_split, tate_twist, validate

TWO_PI = 2.0 * math.pi


class Biextension:
    """A validated biextension with designated Betti generators."""

    __slots__ = ("mhs", "one", "one_dual")

    def __init__(self, mhs, one, one_dual):
        self.mhs = mhs
        self.one = one
        self.one_dual = one_dual

    @property
    def backend(self):
        return self.mhs.backend

    def middle_dim(self):
        return self.mhs.dim - 2

    def __repr__(self):
        return "Biextension(middle dim %d)" % self.middle_dim()


def _as_column(backend, space, v):
    if isinstance(v, Mat):
        return v
    return backend.from_columns(space.dim, [v])


def as_biextension(m, one, one_dual):
    """Validate the biextension shape and the designated generators.

    Checks graded dimensions (1, h, 1) at weights (0, -1, -2), Tate-ness of
    the two end pieces, and that ``one_dual`` spans ``W_{-2}`` while the
    class of ``one`` spans the weight-0 graded piece.

    Raises
    ------
    ShapeError
        Naming the offending weight.
    """
    backend = m.backend
    space = m.space
    one = _as_column(backend, space, one)
    one_dual = _as_column(backend, space, one_dual)

    dims = m.graded_dims()
    for k, d in dims.items():
        if k not in (0, -1, -2):
            raise ShapeError("nonzero graded piece at weight %d" % k)
    if dims.get(0, 0) != 1:
        raise ShapeError("weight 0 graded piece must be a line (got %d)"
                         % dims.get(0, 0))
    if dims.get(-2, 0) != 1:
        raise ShapeError("weight -2 graded piece must be a line (got %d)"
                         % dims.get(-2, 0))

    if not one.eq(one.conj()):
        raise ShapeError("generator 'one' must be rational")
    if not one_dual.eq(one_dual.conj()):
        raise ShapeError("generator 'one_dual' must be rational")
    if not (space.subspace(one_dual) == m.W.at(-2)):
        raise ShapeError("'one_dual' must span the weight -2 step")
    if m.W.at(-1).contains_vector(one) or not m.W.at(0).contains_vector(one):
        raise ShapeError("'one' must lift the weight 0 generator")

    # Tate-ness of the ends
    if not m.F.at(-1).contains(m.W.at(-2)):
        raise ShapeError("weight -2 piece is not Q(1) (fails F^{-1})")
    if m.F.at(0).intersect(m.W.at(-2)).dim != 0:
        raise ShapeError("weight -2 piece is not Q(1) (meets F^0)")
    if not m.F.at(0).add(m.W.at(-1)).contains_vector(one):
        raise ShapeError("weight 0 piece is not Q(0) (one is not in F^0 mod W_{-1})")
    return Biextension(m, one, one_dual)


def height_coefficient(b):
    """The coefficient ``c`` in ``delta(one) = c * one_dual`` (a real scalar)."""
    split = delta(b.mhs)
    img = split.delta.mat @ b.one
    coeff = b.mhs.W.at(-2).coordinates_of(img)
    c = coeff.a[0, 0]
    resid = img - b.one_dual.scale(c)
    if not resid.is_zero(None if b.backend.exact else 1e-10 * max(
            1.0, split.delta.max_entry())):
        raise NumericalError("delta(one) is not a multiple of one_dual")
    if b.backend.exact:
        if c.im != 0:
            raise NumericalError("height coefficient is not real")
        return c.re
    if abs(c.imag) > 1e-10 * max(1.0, abs(c)):
        raise NumericalError("height coefficient is not real")
    return c.real


def height(b):
    """The archimedean height ``2*pi * coefficient``; zero iff R-split."""
    return TWO_PI * float(height_coefficient(b))


def is_r_split(b):
    return is_split(b.mhs)


def two_step_structure(backend, z):
    """Graded Q(0), Q(1) on two dimensions with ``F^0 = span(e1 + z e2)``."""
    space = Space(backend, 2)
    w = Filtration(space, "inc", {
        -3: space.zero_subspace(),
        -2: space.subspace([[0, 1]]),
        -1: space.subspace([[0, 1]]),
        0: space.full_subspace(),
    })
    f0 = space.subspace(backend.from_columns(
        2, [[backend.one, backend.scalar(z)]]))
    f = Filtration(space, "dec", {
        -1: space.full_subspace(),
        0: f0,
        1: space.zero_subspace(),
    })
    return validate(space, w, f)


def two_step_biextension(backend, z):
    m = two_step_structure(backend, z)
    return as_biextension(m, m.space.basis_vector(0), m.space.basis_vector(1))


def dual_biextension(b):
    """The dual structure twisted by Q(1), with induced generators.

    ``one`` of the dual is the coordinate functional dual to ``one_dual``
    (normalized to pair to 1); ``one_dual`` of the dual is the annihilator of
    ``W_{-1}`` normalized against ``one``.  With these conventions the
    extension class negates, so the height changes sign and the double dual
    restores it.
    """
    m = b.mhs
    backend = b.backend
    d = tate_twist(dual(m), 1)
    space = d.space

    # functional dual to one_dual: unit at its pivot coordinate
    pivot = None
    for i in range(m.dim):
        x = b.one_dual.a[i, 0]
        if (bool(x) if backend.exact else abs(x) > (backend.eps or 0)):
            pivot = i
            break
    if pivot is None:
        raise ShapeError("one_dual is zero")
    one_new = backend.zeros(m.dim, 1)
    one_new.a[pivot, 0] = backend.scalar(1) / b.one_dual.a[pivot, 0]

    # annihilator of W_{-1}, normalized to pair to 1 against one
    from .backend import kernel_basis
    ann = kernel_basis(m.W.at(-1).basis.T)
    if ann.ncols != 1:
        raise ShapeError("weight -1 step has no one-dimensional annihilator")
    pairing = (ann.T @ b.one).a[0, 0]
    if (not bool(pairing)) if backend.exact else abs(pairing) <= (backend.eps or 0):
        raise ShapeError("annihilator does not pair with one")
    dual_new = ann.scale(backend.scalar(1) / pairing)
    return as_biextension(d, one_new, dual_new)


def extension_class(m):
    """Period of a structure with two one-dimensional Tate graded pieces.

    The Betti frame is deterministic: the bottom generator is the echelon
    basis of the lower weight step and the lift of the top generator is the
    distinguished basis vector at the echelon-free index.  The period ``z``
    is defined by ``F-generator = lift + z * bottom`` and is well defined
    modulo rational multiples of the bottom generator, i.e. modulo the
    rational ambiguity lattice.
    """
    dims = m.graded_dims()
    weights = sorted(dims)
    if len(weights) != 2 or any(dims[w] != 1 for w in weights) \
            or weights[1] - weights[0] != 2:
        raise ShapeError(
            "extension classes need two Tate lines two weights apart, got %s"
            % dims)
    w_low, w_high = weights
    if w_low % 2 or w_high % 2:
        raise ShapeError("Tate pieces must sit in even weights")
    grading = m.bigrading()
    expected = {(w_high // 2, w_high // 2), (w_low // 2, w_low // 2)}
    if set(grading) != expected:
        raise ShapeError("graded pieces are not Tate lines: %s" % set(grading))

    backend = m.backend
    low = m.W.at(w_low)
    free = [i for i in range(m.dim) if i not in low.pivots]
    lift = m.space.basis_vector(free[0])
    f_line = m.F.at(w_high // 2)
    if f_line.dim != 1:
        raise ShapeError("top Hodge step is not a line")
    frame = m.space.subspace(Mat.hstack([lift, low.basis]))
    coords = frame.coordinates_of(f_line.basis)
    alpha = coords.a[0, 0]
    beta = coords.a[1, 0]
    if (not bool(alpha)) if backend.exact else abs(alpha) <= (backend.eps or 0):
        raise ShapeError("Hodge line does not project onto the top piece")
    return ExtensionClass(backend, beta / alpha)


class ExtensionClass:
    """A period modulo the rational ambiguity lattice.

    On the exact backend equality is decided completely (the difference must
    be real, hence rational).  On the floating backend the real part of the
    difference is reduced modulo 1 before comparison, so rational shifts
    beyond integers are not identified there.
    """

    __slots__ = ("backend", "value")

    def __init__(self, backend, value):
        self.backend = backend
        self.value = value

    def __repr__(self):
        return "ExtensionClass(%r)" % (self.value,)

    def __eq__(self, other):
        if isinstance(other, ExtensionClass):
            other = other.value
        diff = self.value - self.backend.scalar(other)
        if self.backend.exact:
            return diff.im == 0
        eps = self.backend.eps
        if abs(diff.imag) > eps:
            return False
        frac = diff.real - round(diff.real)
        return abs(frac) <= eps

    def __hash__(self):
        raise TypeError("extension classes are not hashable")


#: flag value for the point at infinity on the projective line
INFINITY = object()


def _is_infinity(p):
    return p is INFINITY


def cross_ratio(p, q, r, s):
    """``((r-p)(s-q)) / ((r-q)(s-p))`` with symbolic cancellation at infinity.

    All four points must be pairwise distinct; at most one may be the
    INFINITY flag.
    """
    pts = [p, q, r, s]
    inf_count = sum(1 for x in pts if _is_infinity(x))
    if inf_count > 1:
        raise DegenerateConfigurationError("at most one point may be infinite")
    finite = [complex(x) for x in pts if not _is_infinity(x)]
    for i in range(len(finite)):
        for j in range(i + 1, len(finite)):
            if finite[i] == finite[j]:
                raise DegenerateConfigurationError("coincident points")
    if inf_count == 0:
        p, q, r, s = (complex(x) for x in pts)
        num = (r - p) * (s - q)
        den = (r - q) * (s - p)
    elif _is_infinity(p):
        q, r, s = complex(q), complex(r), complex(s)
        num, den = (s - q), (r - q)
    elif _is_infinity(q):
        p, r, s = complex(p), complex(r), complex(s)
        num, den = (r - p), (s - p)
    elif _is_infinity(r):
        p, q, s = complex(p), complex(q), complex(s)
        num, den = (s - q), (s - p)
    else:
        p, q, r = complex(p), complex(q), complex(r)
        num, den = (r - p), (r - q)
    if num == 0 or den == 0:
        raise DegenerateConfigurationError("degenerate cross-ratio")
    return num / den


def p1_four_points(p, q, r, s, backend=FLOAT):
    """The rank-two model of the projective line with four marked points.

    The Betti frame is (relative path class, loop class); the normalized
    logarithmic form gives the period ``z = log(CR) / (2 pi i)`` on the
    principal branch, so ``height = 2 pi Im(z) = -log|CR|``.
    """
    if backend.exact:
        raise ShapeError("the four-point model needs the floating backend "
                         "(its period is transcendental)")
    cr = cross_ratio(p, q, r, s)
    z = cmath.log(cr) / (2j * math.pi)
    return two_step_biextension(backend, z)


def moebius(point, a, b, c, d):
    """Apply ``t -> (a t + b) / (c t + d)`` respecting the infinity flag."""
    if a * d - b * c == 0:
        raise DegenerateConfigurationError("singular Moebius transformation")
    if _is_infinity(point):
        if c == 0:
            return INFINITY
        return a / c
    t = complex(point)
    den = c * t + d
    if den == 0:
        return INFINITY
    return (a * t + b) / den
