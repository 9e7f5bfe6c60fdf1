"""Mixed Hodge structures on finite-dimensional spaces.

A structure is a rational weight filtration ``W`` together with a decreasing
Hodge filtration ``F`` on the complexification.  Validation computes the
canonical bigrading

    I^{a,b} = F^a ∩ W_{a+b} ∩ ( conj(F^b) ∩ W_{a+b} + conj(U^{b-1}_{a+b-2}) ),
    U^r_s  = sum_{j>=0} F^{r-j} ∩ W_{s-j},

and checks that it is a direct-sum decomposition reconstructing both
filtrations.  The grading operator ``Y`` acts on ``I^{p,q}`` by ``p+q``; the
real splitting operator ``delta`` is the unique solution of

    conj(Y) = Ad(exp(-2i*delta)) Y

inside the bidegree-lowering algebra, computed by a triangular recursion over
the eigencomponents of ``ad(Y)`` and always re-verified against the defining
equation afterwards.
"""

from .backend import Mat, inverse, rank
from .errors import (
    DimensionMismatchError,
    NotMixedHodgeError,
    NotMorphismError,
    NumericalError,
)
from .exterior import derivation_matrix, wedge_basis_matrix, wedge_tuples
from .linalg import Filtration, LinearMap, Space, exp_nilpotent, quotient_map

#: residual bound for mandatory verification steps on the floating backend
VERIFY_TOL = 1e-10


def _tol(backend, scale=1.0):
    if backend.exact:
        return None
    return VERIFY_TOL * max(1.0, scale)


class MixedHodgeStructure:
    """A validated mixed Hodge structure; construct via :func:`validate`."""

    __slots__ = ("space", "W", "F", "_splitting")

    def __init__(self, space, W, F):
        self.space = space
        self.W = W
        self.F = F
        self._splitting = None

    @property
    def backend(self):
        return self.space.backend

    @property
    def dim(self):
        return self.space.dim

    def graded_dims(self):
        return self.W.graded_dims()

    def splitting(self):
        if self._splitting is None:
            self._splitting = _compute_bigrading(self)
        return self._splitting

    def bigrading(self):
        return self.splitting().bigrading

    def __repr__(self):
        return "MixedHodgeStructure(dim=%d, weights=%s)" % (
            self.dim, self.graded_dims())


class DeligneSplitting:
    """Bigrading, grading operator and (optionally) the splitting operator."""

    __slots__ = ("mhs", "bigrading", "Y", "delta", "delta_components",
                 "_basis", "_basis_inv", "_types")

    def __init__(self, mhs, bigrading, Y, basis, basis_inv, types):
        self.mhs = mhs
        self.bigrading = bigrading
        self.Y = Y
        self.delta = None
        self.delta_components = None
        self._basis = basis
        self._basis_inv = basis_inv
        self._types = types

    def eigenvalues(self):
        return sorted({a + b for (a, b) in self.bigrading})

    def projector(self, weight):
        """Projection onto the ``Y = weight`` eigenspace."""
        backend = self.mhs.backend
        n = self.mhs.dim
        d = backend.zeros(n, n)
        for j, (a, b) in enumerate(self._types):
            if a + b == weight:
                d.a[j, j] = backend.one
        return LinearMap(self.mhs.space, self.mhs.space,
                         self._basis @ d @ self._basis_inv)

    def shift_component(self, op, j):
        """``ad(Y)``-eigencomponent of ``op`` shifting the grading by ``-j``."""
        backend = self.mhs.backend
        out = backend.zeros(self.mhs.dim, self.mhs.dim)
        eigs = self.eigenvalues()
        total = LinearMap(self.mhs.space, self.mhs.space, out)
        for k in eigs:
            if k - j in eigs or j == 0:
                total = total + (self.projector(k - j) @ op @ self.projector(k))
        return total

    def is_split(self):
        """Split over R: ``conj(I^{a,b}) = I^{b,a}`` for all pairs."""
        for (a, b), sub in self.bigrading.items():
            other = self.bigrading.get((b, a))
            if other is None:
                return False
            if not (sub.conj() == other):
                return False
        return True


def _u_space(M, r, s):
    """``U^r_s = sum_j F^{r-j} ∩ W_{s-j}`` (finite sum)."""
    total = M.space.zero_subspace()
    j = 0
    while True:
        if s - j < M.W.lo:
            break
        term = M.F.at(r - j).intersect(M.W.at(s - j))
        total = total.add(term)
        if r - j <= M.F.lo:
            # F is the whole space from here down; later terms are contained
            # in this one
            break
        j += 1
    return total


def _compute_bigrading(M):
    """Compute the bigrading, verify it, and assemble the grading operator."""

    backend = M.backend
    space = M.space
    n = space.dim
    bigrading = {}
    f_lo, f_hi = M.F.lo, M.F.hi
    w_lo, w_hi = M.W.lo, M.W.hi
    pieces = []
    for a in range(f_lo, f_hi + 1):
        for b in range(w_lo - f_hi, w_hi - f_lo + 1):
            fw = M.F.at(a).intersect(M.W.at(a + b))
            if fw.dim == 0:
                continue
            inner = M.F.at(b).conj().intersect(M.W.at(a + b))
            inner = inner.add(_u_space(M, b - 1, a + b - 2).conj())
            sub = fw.intersect(inner)
            if sub.dim:
                bigrading[(a, b)] = sub
                pieces.append(((a, b), sub))

    # direct sum check, reporting the first offending bidegree
    pieces.sort(key=lambda p: (-(p[0][0] + p[0][1]), -p[0][0]))
    cols = []
    types = []
    total_dim = 0
    for (a, b), sub in pieces:
        cols.append(sub.basis)
        types.extend([(a, b)] * sub.dim)
        total_dim += sub.dim
        stacked = Mat.hstack(cols)
        if rank(stacked) != total_dim:
            raise NotMixedHodgeError(
                "bigrading fails to be a direct sum at I^(%d,%d)" % (a, b),
                level=(a, b))
    if total_dim != n:
        raise NotMixedHodgeError(
            "bigrading spans %d of %d dimensions" % (total_dim, n),
            level=None)

    # reconstruction of both filtrations
    for p in range(f_lo, f_hi + 1):
        s = space.zero_subspace()
        for (a, b), sub in bigrading.items():
            if a >= p:
                s = s.add(sub)
        if not (s == M.F.at(p)):
            raise NotMixedHodgeError(
                "Hodge filtration not reconstructed at level %d" % p,
                level=("F", p))
    for k in range(w_lo, w_hi + 1):
        s = space.zero_subspace()
        for (a, b), sub in bigrading.items():
            if a + b <= k:
                s = s.add(sub)
        if not (s == M.W.at(k)):
            raise NotMixedHodgeError(
                "weight filtration not reconstructed at level %d" % k,
                level=("W", k))

    if n:
        basis = Mat.hstack(cols)
        basis_inv = inverse(basis)
        d = backend.zeros(n, n)
        for j, (a, b) in enumerate(types):
            d.a[j, j] = backend.scalar(a + b)
        y = LinearMap(space, space, basis @ d @ basis_inv)
    else:
        basis = backend.zeros(0, 0)
        basis_inv = backend.zeros(0, 0)
        y = LinearMap(space, space, backend.zeros(0, 0))
    return DeligneSplitting(M, bigrading, y, basis, basis_inv, types)


def validate(space, W, F):
    """Validate ``(W, F)`` as a mixed Hodge structure.

    Parameters
    ----------
    space : Space
    W : Filtration
        Increasing, generated by rational vectors.
    F : Filtration
        Decreasing, on the complexification.

    Returns
    -------
    MixedHodgeStructure

    Raises
    ------
    NotMixedHodgeError
        With the first offending bidegree when the bigrading fails.
    """
    if W.direction != "inc" or F.direction != "dec":
        raise NotMixedHodgeError("W must be increasing and F decreasing")
    if W.space != space or F.space != space:
        raise DimensionMismatchError("filtrations on a different space")
    for k, sub in W.steps.items():
        if not (sub.conj() == sub):
            raise NotMixedHodgeError(
                "weight filtration is not rational at level %d" % k,
                level=("W", k))
    M = MixedHodgeStructure(space, W, F)
    M.splitting()  # force verification
    return M


def deligne_bigrading(M):
    """The Deligne splitting of ``M`` (without the delta operator)."""
    return M.splitting()


def is_split(M):
    return M.splitting().is_split()


def delta(M):
    """Compute the real splitting operator and its eigencomponents.

    Solves ``conj(Y) = Ad(exp(-2i delta)) Y`` component by component in
    increasing shift ``j >= 2``, correcting for the higher-order terms of the
    exponential, then verifies the defining equation, the realness of the
    solution and its membership in the bidegree-lowering algebra.

    Returns
    -------
    DeligneSplitting
        The cached splitting of ``M`` with ``delta`` and
        ``delta_components`` filled in.

    Raises
    ------
    NumericalError
        If mandatory verification fails (a tolerance problem on the float
        backend; never expected on the exact one).
    """
    split = M.splitting()
    if split.delta is not None:
        return split
    backend = M.backend
    space = M.space
    y = split.Y
    ybar = y.conj()
    eigs = split.eigenvalues()
    jmax = (max(eigs) - min(eigs)) if eigs else 0
    minus_2i = backend.scalar((0, -2)) if backend.exact else -2j

    d = LinearMap.zero(space)
    components = {}
    for j in range(2, jmax + 1):
        ad = _adjoint_exp(d, minus_2i, y)
        resid = ybar - ad
        rj = split.shift_component(resid, j)
        # the linear term of Ad(exp(-2i delta)) Y at shift j is -2i*j*delta_{-j}
        denom = backend.scalar((0, -2 * j)) if backend.exact else -2j * j
        dj = rj.scale(backend.scalar(1) / denom)
        if not dj.is_zero(0.0 if not backend.exact else None):
            components[j] = dj
            d = d + dj

    split.delta = d
    split.delta_components = components
    _verify_delta(split)
    return split


def _adjoint_exp(d, scale, y):
    """``Ad(exp(scale * d)) y`` computed by matrix conjugation."""
    scale = d.backend.scalar(scale)
    return exp_nilpotent(d, scale) @ y @ exp_nilpotent(d, -scale)


def _verify_delta(split):
    M = split.mhs
    backend = M.backend
    y = split.Y
    minus_2i = backend.scalar((0, -2)) if backend.exact else -2j
    lhs = y.conj()
    rhs = _adjoint_exp(split.delta, minus_2i, y)
    tol = _tol(backend, y.max_entry())
    if not (lhs - rhs).is_zero(tol):
        raise NumericalError(
            "delta does not satisfy its defining equation "
            "(max residual %.3e)" % float((lhs - rhs).max_entry()))
    if not split.delta.is_real(tol):
        raise NumericalError("delta is not real")
    # membership in the bidegree-lowering algebra
    for (c, dd), sub in split.bigrading.items():
        img_mat = split.delta.mat @ sub.basis
        if img_mat.is_zero(tol):
            # an all-noise image must not be promoted to a direction by the
            # relative rank rule
            continue
        img = M.space.subspace(img_mat)
        if img.dim == 0:
            continue
        target = M.space.zero_subspace()
        for (a, b), other in split.bigrading.items():
            if a < c and b < dd:
                target = target.add(other)
        if not target.contains(img):
            raise NumericalError(
                "delta image of I^(%d,%d) leaves the lowering algebra" % (c, dd))


def delta_split(M):
    """The structure ``(exp(-i delta) F, W)``, split over R."""
    split = delta(M)
    backend = M.backend
    minus_i = backend.scalar((0, -1)) if backend.exact else -1j
    e = exp_nilpotent(split.delta, minus_i)
    return validate(M.space, M.W, M.F.map_image(e))


class MHSMorphism:
    """A verified morphism of mixed Hodge structures."""

    __slots__ = ("source", "target", "map")

    def __init__(self, source, target, map_):
        self.source = source
        self.target = target
        self.map = map_

    def __repr__(self):
        return "MHSMorphism(%d -> %d)" % (self.source.dim, self.target.dim)


def check_morphism(f, A, B, check_delta=True):
    """Verify that ``f`` is a morphism of mixed Hodge structures.

    Beyond filtration compatibility this asserts strictness with respect to
    both filtrations and the commutation ``f ∘ delta_A = delta_B ∘ f``; a
    failure of either is an internal-consistency error since both follow for
    true morphisms.

    Raises
    ------
    NotMorphismError
        Naming the violated filtration level.
    """
    if not isinstance(f, LinearMap):
        f = LinearMap(A.space, B.space, f)
    backend = A.backend
    tol = _tol(backend, max(1.0, f.max_entry()))
    if not f.is_real(tol):
        raise NotMorphismError("morphisms must be rational on the underlying spaces")
    lo = min(A.W.lo, B.W.lo)
    hi = max(A.W.hi, B.W.hi)
    for k in range(lo, hi + 1):
        if not B.W.at(k).contains(f.image_of(A.W.at(k))):
            raise NotMorphismError("weight filtration violated at level %d" % k)
    lo = min(A.F.lo, B.F.lo)
    hi = max(A.F.hi, B.F.hi)
    for p in range(lo, hi + 1):
        if not B.F.at(p).contains(f.image_of(A.F.at(p))):
            raise NotMorphismError("Hodge filtration violated at level %d" % p)

    image = f.image()
    for k in range(B.W.lo, B.W.hi + 1):
        got = f.image_of(A.W.at(k))
        expected = image.intersect(B.W.at(k))
        if not (got == expected):
            raise NumericalError("morphism is not W-strict at level %d" % k)
    for p in range(B.F.lo, B.F.hi + 1):
        got = f.image_of(A.F.at(p))
        expected = image.intersect(B.F.at(p))
        if not (got == expected):
            raise NumericalError("morphism is not F-strict at level %d" % p)

    if check_delta:
        da = delta(A).delta
        db = delta(B).delta
        comm = (f @ da) - (db @ f)
        if not comm.is_zero(_tol(backend, max(1.0, f.max_entry()))):
            raise NumericalError(
                "delta does not commute with a verified morphism "
                "(max entry %.3e)" % float(comm.max_entry()))
    return MHSMorphism(A, B, f)


# ---------------------------------------------------------------------------
# functorial constructions
# ---------------------------------------------------------------------------

def sub_mhs(M, sub):
    """Induced structure on a rational subspace.

    Returns ``(structure, inclusion)``; raises ``NotMixedHodgeError`` when the
    induced filtrations do not form a mixed Hodge structure (the subspace is
    not a subobject).
    """
    if not (sub.conj() == sub):
        raise NotMixedHodgeError("subspace is not rational")
    space = Space(M.backend, sub.dim)
    inc = LinearMap(space, M.space, sub.basis)
    w_steps = {}
    for k in range(M.W.lo, M.W.hi + 1):
        inter = M.W.at(k).intersect(sub)
        w_steps[k] = space.subspace(sub.coordinates_of(inter.basis))
    f_steps = {}
    for p in range(M.F.lo, M.F.hi + 1):
        inter = M.F.at(p).intersect(sub)
        f_steps[p] = space.subspace(sub.coordinates_of(inter.basis))
    w = Filtration(space, "inc", w_steps)
    f = Filtration(space, "dec", f_steps)
    return validate(space, w, f), inc


def quotient_mhs(M, sub):
    """Quotient structure by a rational subspace; returns (structure, projection)."""
    if not (sub.conj() == sub):
        raise NotMixedHodgeError("subspace is not rational")
    q_space, proj = quotient_map(M.space, sub)
    w_steps = {k: proj.image_of(M.W.at(k)) for k in range(M.W.lo, M.W.hi + 1)}
    f_steps = {p: proj.image_of(M.F.at(p)) for p in range(M.F.lo, M.F.hi + 1)}
    w = Filtration(q_space, "inc", w_steps)
    f = Filtration(q_space, "dec", f_steps)
    return validate(q_space, w, f), proj


def graded_piece(M, n):
    """The pure structure of weight ``n`` on ``W_n / W_{n-1}``."""
    if M.W.at(n).dim == M.W.at(n - 1).dim:
        space = Space(M.backend, 0)
        w = Filtration(space, "inc", {n: space.full_subspace()})
        f = Filtration(space, "dec", {0: space.full_subspace()})
        return validate(space, w, f)
    step, inc = sub_mhs(M, M.W.at(n))
    lower = step.space.subspace(M.W.at(n).coordinates_of(M.W.at(n - 1).basis))
    piece, _ = quotient_mhs(step, lower)
    return piece


def direct_sum(A, B):
    """Block direct sum; returns (structure, include_A, include_B)."""
    backend = A.backend
    n, m = A.dim, B.dim
    space = Space(backend, n + m)
    inc_a = backend.zeros(n + m, n)
    inc_b = backend.zeros(n + m, m)
    for i in range(n):
        inc_a.a[i, i] = backend.one
    for i in range(m):
        inc_b.a[n + i, i] = backend.one
    ia = LinearMap(A.space, space, inc_a)
    ib = LinearMap(B.space, space, inc_b)

    def glue(fa, fb, lo, hi, direction):
        steps = {}
        for k in range(lo, hi + 1):
            steps[k] = ia.image_of(fa.at(k)).add(ib.image_of(fb.at(k)))
        return Filtration(space, direction, steps)

    w = glue(A.W, B.W, min(A.W.lo, B.W.lo), max(A.W.hi, B.W.hi), "inc")
    f = glue(A.F, B.F, min(A.F.lo, B.F.lo), max(A.F.hi, B.F.hi), "dec")
    return validate(space, w, f), ia, ib


def tate_twist(M, a):
    """Twist by Q(a): weights shift by ``-2a``, Hodge levels by ``-a``."""
    w = M.W.shift(-2 * a)
    f = M.F.shift(-a)
    return validate(M.space, w, f)


def _annihilator(space, sub):
    """Functionals vanishing on ``sub``, as a subspace of the dual space."""
    from .backend import kernel_basis
    if sub.dim == 0:
        return space.full_subspace()
    return space.subspace(kernel_basis(sub.basis.T))


def dual(M):
    """Dual structure: weights and Hodge indices are negated."""
    space = Space(M.backend, M.dim)
    w_steps = {}
    for k in range(-M.W.hi - 1, -M.W.lo + 1):
        w_steps[k] = _annihilator(space, M.W.at(-k - 1))
    f_steps = {}
    for p in range(-M.F.hi, 1 - M.F.lo + 1):
        f_steps[p] = _annihilator(space, M.F.at(1 - p))
    w = Filtration(space, "inc", w_steps)
    f = Filtration(space, "dec", f_steps)
    return validate(space, w, f)


def _adapted_basis(filtration):
    """A basis with a definite filtration level for each vector.

    Returns ``(matrix, levels)``; for increasing filtrations the level of a
    vector ``v`` is the smallest ``k`` with ``v in W_k``, for decreasing ones
    the largest ``p`` with ``v in F^p``.
    """
    space = filtration.space
    collected = []
    levels = []
    current = space.zero_subspace()
    indices = (range(filtration.lo, filtration.hi + 1)
               if filtration.direction == "inc"
               else range(filtration.hi, filtration.lo - 1, -1))
    for k in indices:
        step = filtration.at(k)
        for j in range(step.dim):
            v = step.basis.col(j)
            if not current.contains_vector(v):
                collected.append(v)
                levels.append(k)
                current = current.add(space.subspace(v))
    return Mat.hstack(collected) if collected else space.backend.zeros(space.dim, 0), levels


def exterior_power(M, k):
    """The induced structure on the ``k``-th exterior power.

    The filtrations are generated by wedges of filtration-adapted basis
    vectors, with levels adding up.
    """
    n = M.dim
    if k > n:
        raise DimensionMismatchError("exterior power beyond the dimension")
    backend = M.backend
    tuples = wedge_tuples(n, k)
    space = Space(backend, len(tuples))

    wb, w_levels = _adapted_basis(M.W)
    fb, f_levels = _adapted_basis(M.F)

    from itertools import combinations

    def filtered_spans(basis, levels, direction):
        # map: level bound -> generating wedge columns
        combos = list(combinations(range(len(levels)), k))
        wedges = wedge_basis_matrix(basis, k)
        sums = {}
        for idx, sel in enumerate(combos):
            total = sum(levels[i] for i in sel)
            sums.setdefault(total, []).append(idx)
        steps = {}
        keys = sorted(sums)
        acc = []
        if direction == "inc":
            for key in keys:
                acc.extend(sums[key])
                steps[key] = space.subspace(wedges.take_columns(acc))
        else:
            for key in reversed(keys):
                acc.extend(sums[key])
                steps[key] = space.subspace(wedges.take_columns(acc))
        return steps

    w_steps = filtered_spans(wb, w_levels, "inc")
    f_steps = filtered_spans(fb, f_levels, "dec")
    w = Filtration(space, "inc", w_steps)
    f = Filtration(space, "dec", f_steps)
    return validate(space, w, f)


def induced_derivation(f, k):
    """Leibniz action of an endomorphism on the ``k``-th exterior power."""
    space = Space(f.backend, len(wedge_tuples(f.source.dim, k)))
    return LinearMap(space, space, derivation_matrix(f.mat, k))
