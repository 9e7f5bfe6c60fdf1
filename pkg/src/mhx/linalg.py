"""Subspaces, filtrations and linear maps over a fixed rational structure.

A :class:`Space` is a plain coordinate space with a distinguished basis of its
rational form; complex conjugation is entrywise conjugation in that basis.
:class:`Subspace` values are immutable and carry a canonical reduced basis, so
equality on the exact backend is literal basis identity while the floating
backend falls back to mutual containment at the backend tolerance.
"""

from .backend import (
    Mat,
    column_space_basis,
    exp_series,
    inverse,
    kernel_basis,
    nilpotency_order,
    rank,
    solve,
)
from .errors import DimensionMismatchError, FiltrationError, NilpotencyError


class Space:
    """A rational coordinate space of a fixed dimension over a backend."""

    __slots__ = ("backend", "dim")

    def __init__(self, backend, dim):
        if dim < 0:
            raise DimensionMismatchError("negative dimension")
        self.backend = backend
        self.dim = int(dim)

    def __eq__(self, other):
        return (isinstance(other, Space) and other.backend is self.backend
                and other.dim == self.dim)

    def __hash__(self):
        return hash((id(self.backend), self.dim))

    def __repr__(self):
        return "Space(dim=%d, %r)" % (self.dim, self.backend)

    # -- constructors --------------------------------------------------------

    def subspace(self, generators):
        """Span of the given generators (a Mat of columns, or column lists)."""
        if not isinstance(generators, Mat):
            generators = self.backend.from_columns(self.dim, generators)
        if generators.nrows != self.dim:
            raise DimensionMismatchError(
                "generators have %d coordinates in a space of dimension %d"
                % (generators.nrows, self.dim))
        basis, pivots = column_space_basis(generators)
        return Subspace(self, basis, pivots)

    def zero_subspace(self):
        return self.subspace(self.backend.zeros(self.dim, 0))

    def full_subspace(self):
        return self.subspace(self.backend.identity(self.dim))

    def basis_vector(self, i):
        v = self.backend.zeros(self.dim, 1)
        v.a[i, 0] = self.backend.one
        return v


class Subspace:
    """Immutable subspace with a canonical reduced column basis."""

    __slots__ = ("space", "basis", "pivots")

    def __init__(self, space, basis, pivots):
        self.space = space
        self.basis = basis
        self.pivots = tuple(pivots)

    @property
    def dim(self):
        return self.basis.ncols

    @property
    def backend(self):
        return self.space.backend

    def __repr__(self):
        return "Subspace(dim=%d of %d)" % (self.dim, self.space.dim)

    def _check_same_space(self, other):
        if self.space != other.space:
            raise DimensionMismatchError("subspaces of different spaces")

    # -- predicates -----------------------------------------------------------

    def contains_vector(self, v):
        if not isinstance(v, Mat):
            v = self.backend.from_columns(self.space.dim, [v])
        if self.dim == 0:
            return v.is_zero()
        return rank(Mat.hstack([self.basis, v])) == self.dim

    def contains(self, other):
        """Whether ``other`` is contained in this subspace."""
        self._check_same_space(other)
        if other.dim == 0:
            return True
        if other.dim > self.dim:
            return False
        return rank(Mat.hstack([self.basis, other.basis])) == self.dim

    def __eq__(self, other):
        if not isinstance(other, Subspace):
            return NotImplemented
        self._check_same_space(other)
        if self.dim != other.dim:
            return False
        if self.backend.exact:
            return self.basis.eq(other.basis)
        return self.contains(other) and other.contains(self)

    def __hash__(self):
        return hash((self.space, self.dim))

    # -- lattice operations ----------------------------------------------------

    def intersect(self, other):
        """Intersection ``self ∩ other``."""
        self._check_same_space(other)
        if self.dim == 0 or other.dim == 0:
            return self.space.zero_subspace()
        k = kernel_basis(Mat.hstack([self.basis, other.basis]))
        if k.ncols == 0:
            return self.space.zero_subspace()
        coeffs = k.take_rows(range(self.dim))
        return self.space.subspace(self.basis @ coeffs)

    def add(self, other):
        """Smallest subspace containing both operands."""
        self._check_same_space(other)
        return self.space.subspace(Mat.hstack([self.basis, other.basis]))

    __and__ = intersect
    __or__ = add

    def conj(self):
        """Entrywise conjugation in the distinguished basis."""
        return self.space.subspace(self.basis.conj())

    def coordinates_of(self, vectors):
        """Express columns of ``vectors`` in this subspace's basis.

        Raises if some column does not lie in the subspace.
        """
        if not isinstance(vectors, Mat):
            vectors = self.backend.from_columns(self.space.dim, vectors)
        x = solve(self.basis, vectors)
        if x is None:
            raise DimensionMismatchError("vector outside the subspace")
        return x


def intersect(a, b):
    return a.intersect(b)


def sum_subspaces(a, b):
    return a.add(b)


def quotient_map(space, sub):
    """Quotient of a space by a subspace, with the projection map.

    The section follows the deterministic complement rule: the complement is
    spanned by the distinguished basis vectors not matched to pivot rows of
    the subspace's echelon basis, in ascending index order.

    Returns
    -------
    (Space, LinearMap)
        The quotient space and the projection onto it.
    """
    if sub.space != space:
        raise DimensionMismatchError("subspace of a different space")
    n = space.dim
    backend = space.backend
    free = [i for i in range(n) if i not in sub.pivots]
    q_space = Space(backend, n - sub.dim)
    if sub.dim == 0:
        return q_space, LinearMap(space, q_space, backend.identity(n))
    if q_space.dim == 0:
        return q_space, LinearMap(space, q_space, backend.zeros(0, n))
    section = backend.zeros(n, len(free))
    for j, i in enumerate(free):
        section.a[i, j] = backend.one
    change = inverse(Mat.hstack([sub.basis, section]))
    proj = change.take_rows(range(sub.dim, n))
    return q_space, LinearMap(space, q_space, proj)


class LinearMap:
    """A linear map between two spaces, stored in distinguished bases."""

    __slots__ = ("source", "target", "mat")

    def __init__(self, source, target, mat):
        if not isinstance(mat, Mat):
            mat = source.backend.matrix(mat)
        if mat.shape != (target.dim, source.dim):
            raise DimensionMismatchError(
                "matrix of shape %s for a map %d -> %d"
                % (mat.shape, source.dim, target.dim))
        self.source = source
        self.target = target
        self.mat = mat

    @property
    def backend(self):
        return self.source.backend

    def __repr__(self):
        return "LinearMap(%d -> %d)" % (self.source.dim, self.target.dim)

    @classmethod
    def identity(cls, space):
        return cls(space, space, space.backend.identity(space.dim))

    @classmethod
    def zero(cls, source, target=None):
        target = target or source
        return cls(source, target, source.backend.zeros(target.dim, source.dim))

    # -- algebra -----------------------------------------------------------------

    def compose(self, other):
        """``self ∘ other``."""
        if other.target != self.source:
            raise DimensionMismatchError("maps are not composable")
        return LinearMap(other.source, self.target, self.mat @ other.mat)

    def __matmul__(self, other):
        return self.compose(other)

    def __add__(self, other):
        if self.source != other.source or self.target != other.target:
            raise DimensionMismatchError("maps with different end spaces")
        return LinearMap(self.source, self.target, self.mat + other.mat)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, s):
        return LinearMap(self.source, self.target, self.mat.scale(s))

    def conj(self):
        return LinearMap(self.source, self.target, self.mat.conj())

    def power(self, k):
        if self.source != self.target:
            raise DimensionMismatchError("powers need an endomorphism")
        out = LinearMap.identity(self.source)
        for _ in range(k):
            out = self @ out
        return out

    # -- actions -----------------------------------------------------------------

    def apply(self, vectors):
        if not isinstance(vectors, Mat):
            vectors = self.backend.from_columns(self.source.dim, [vectors])
        return self.mat @ vectors

    def image_of(self, sub):
        if sub.space != self.source:
            raise DimensionMismatchError("subspace of a different space")
        return self.target.subspace(self.mat @ sub.basis)

    def image(self):
        return self.target.subspace(self.mat)

    def kernel(self):
        return self.source.subspace(kernel_basis(self.mat))

    def preimage_of(self, sub):
        """Full preimage ``{v : f(v) in sub}``."""
        if sub.space != self.target:
            raise DimensionMismatchError("subspace of a different space")
        _, proj = quotient_map(self.target, sub)
        return (proj @ self).kernel()

    def restrict(self, source_sub, target_sub):
        """Matrix of the restriction in the given subspace bases."""
        img = self.mat @ source_sub.basis
        return target_sub.coordinates_of(img)

    def is_zero(self, tol=None):
        return self.mat.is_zero(tol)

    def max_entry(self):
        return self.mat.max_abs()

    def is_real(self, tol=None):
        return (self.mat - self.mat.conj()).is_zero(tol)


def conjugate(x):
    """Entrywise conjugation of a Subspace or LinearMap; an involution."""
    return x.conj()


def exp_nilpotent(a, scale=1):
    """Exponential ``exp(scale * A)`` of a nilpotent map.

    The series is truncated at the nilpotency order, so the result is exact
    on the exact backend whenever ``scale`` is Gaussian rational.

    Raises
    ------
    NilpotencyError
        If ``A^dim != 0``.
    """
    if a.source != a.target:
        raise NilpotencyError("exp needs an endomorphism")
    order = nilpotency_order(a.mat)
    m = exp_series(a.mat, a.backend.scalar(scale), max(order - 1, 0))
    return LinearMap(a.source, a.target, m)


class Filtration:
    """An increasing or decreasing filtration by subspaces.

    Parameters
    ----------
    space : Space
    direction : str
        ``"inc"`` or ``"dec"``.
    steps : dict
        Map from integer index to Subspace on the declared support
        ``[lo, hi]``.  Increasing filtrations must reach the whole space at
        ``hi``; decreasing ones must start at the whole space at ``lo``.
        Outside the support the filtration is extended by ``0`` and the full
        space in the appropriate directions.
    """

    __slots__ = ("space", "direction", "steps", "lo", "hi")

    def __init__(self, space, direction, steps):
        if direction not in ("inc", "dec"):
            raise FiltrationError("direction must be 'inc' or 'dec'")
        if not steps:
            raise FiltrationError("a filtration needs at least one step")
        self.space = space
        self.direction = direction
        self.lo = min(steps)
        self.hi = max(steps)
        full = space.full_subspace()
        levels = {}
        prev = None
        for k in range(self.lo, self.hi + 1):
            cur = steps.get(k)
            if cur is None:
                # missing intermediate steps repeat the previous one
                cur = prev
                if cur is None:
                    raise FiltrationError("missing lowest step %d" % k)
            if cur.space != space:
                raise FiltrationError("step %d lives in a different space" % k)
            if prev is not None:
                lower, upper = (prev, cur) if direction == "inc" else (cur, prev)
                if not upper.contains(lower):
                    raise FiltrationError(
                        "containment chain violated at index %d" % k)
            levels[k] = cur
            prev = cur
        if direction == "inc" and levels[self.hi] != full:
            raise FiltrationError("increasing filtration must exhaust the space")
        if direction == "dec" and levels[self.lo] != full:
            raise FiltrationError("decreasing filtration must start at the space")
        self.steps = levels

    def at(self, k):
        """Step ``k``, extended by 0 / full space outside the support."""
        if k < self.lo:
            return (self.space.zero_subspace() if self.direction == "inc"
                    else self.space.full_subspace())
        if k > self.hi:
            return (self.space.full_subspace() if self.direction == "inc"
                    else self.space.zero_subspace())
        return self.steps[k]

    def __repr__(self):
        dims = {k: self.steps[k].dim for k in sorted(self.steps)}
        return "Filtration(%s, %s)" % (self.direction, dims)

    def __eq__(self, other):
        if not isinstance(other, Filtration):
            return NotImplemented
        if self.direction != other.direction or self.space != other.space:
            return False
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        return all(self.at(k) == other.at(k) for k in range(lo, hi + 1))

    # -- derived filtrations ---------------------------------------------------

    def shift(self, d):
        """Reindexed filtration ``k -> k - d`` (step ``k`` becomes ``k + d``)."""
        return Filtration(self.space, self.direction,
                          {k + d: s for k, s in self.steps.items()})

    def conj(self):
        return Filtration(self.space, self.direction,
                          {k: s.conj() for k, s in self.steps.items()})

    def map_image(self, f, target_space=None):
        """Image filtration ``k -> f(F_k)`` under an invertible map."""
        target_space = target_space or f.target
        return Filtration(target_space, self.direction,
                          {k: f.image_of(s) for k, s in self.steps.items()})

    def graded_dims(self):
        """Dimensions of the graded pieces, as a dict over the support."""
        out = {}
        for k in range(self.lo, self.hi + 1):
            if self.direction == "inc":
                out[k] = self.at(k).dim - self.at(k - 1).dim
            else:
                out[k] = self.at(k).dim - self.at(k + 1).dim
        return {k: v for k, v in out.items() if v}

    def support_range(self):
        return self.lo, self.hi
