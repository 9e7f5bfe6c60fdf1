"""Weight filtrations attached to nilpotent endomorphisms.

``weight_filtration`` builds the unique increasing filtration centred at
``c`` with ``N W_l ⊆ W_{l-2}`` and ``N^a : Gr_{c+a} ≅ Gr_{c-a}``, using the
classical kernel/image formula

    W(N)_{c+j} = sum_a  Ker N^{j+a+1} ∩ Im N^a .

``relative_weight_filtration`` builds the filtration M(N, W) that induces on
each ``Gr^W_k`` the monodromy filtration of the induced operator centred at
``k`` (the centering convention of this package) and satisfies
``N M_l ⊆ M_{l-2}``.  Construction never replaces verification: every result
is passed through the defining-property verifier, and a candidate that fails
it is reported as non-existent rather than patched.
"""

import numpy as np

from .backend import Mat, inverse, rank
from .errors import NilpotencyError, NonExistenceError, NumericalError, ShapeError
from .exterior import wedge_tuples
from .linalg import Filtration, LinearMap, Space, quotient_map
from .mhs import _adapted_basis, induced_derivation


class NilpotentOperator:
    """A rational nilpotent endomorphism with its nilpotency order."""

    __slots__ = ("map", "order")

    def __init__(self, map_):
        if not isinstance(map_, LinearMap):
            raise ShapeError("expected a LinearMap")
        if map_.source != map_.target:
            raise ShapeError("nilpotent operators are endomorphisms")
        if not map_.is_real():
            raise ShapeError("nilpotent operators must be rational")
        from .backend import nilpotency_order
        self.map = map_
        self.order = nilpotency_order(map_.mat)  # raises NilpotencyError

    @property
    def space(self):
        return self.map.source

    @property
    def backend(self):
        return self.map.backend

    def power(self, k):
        return self.map.power(k)

    def __repr__(self):
        return "NilpotentOperator(dim=%d, order=%d)" % (
            self.space.dim, self.order)


class WeightFiltrationResult:
    __slots__ = ("filtration", "center")

    def __init__(self, filtration, center):
        self.filtration = filtration
        self.center = center

    def __repr__(self):
        return "WeightFiltrationResult(center=%d, dims=%s)" % (
            self.center, self.filtration.graded_dims())


class RelativeWeightFiltration:
    __slots__ = ("filtration", "N", "W")

    def __init__(self, filtration, n, w):
        self.filtration = filtration
        self.N = n
        self.W = w

    def __repr__(self):
        return "RelativeWeightFiltration(dims=%s)" % (
            self.filtration.graded_dims(),)


def weight_filtration(n_op, center=0):
    """The monodromy weight filtration of ``n_op`` centred at ``center``.

    The construction is the standard two-sided kernel/image formula; the
    result is always passed through :func:`verify_weight_filtration`, whose
    failure would indicate a solver bug.
    """
    if not isinstance(n_op, NilpotentOperator):
        n_op = NilpotentOperator(n_op)
    space = n_op.space
    k = n_op.order
    if k <= 1:
        filt = Filtration(space, "inc", {center - 1: space.zero_subspace(),
                                         center: space.full_subspace()})
        result = WeightFiltrationResult(filt, center)
    else:
        powers = [LinearMap.identity(space).mat]
        for _ in range(k + 1):
            powers.append(powers[-1] @ n_op.map.mat)

        def ker(m_exp):
            if m_exp <= 0:
                return space.zero_subspace()
            if m_exp >= k:
                return space.full_subspace()
            return LinearMap(space, space, powers[m_exp]).kernel()

        def img(m_exp):
            if m_exp <= 0:
                return space.full_subspace()
            if m_exp >= k:
                return space.zero_subspace()
            return space.subspace(powers[m_exp])

        steps = {}
        for j in range(-k, k):
            total = space.zero_subspace()
            for a in range(0, k + 1):
                total = total.add(ker(j + a + 1).intersect(img(a)))
            steps[center + j] = total
        steps[center + k - 1] = space.full_subspace()
        result = WeightFiltrationResult(Filtration(space, "inc", steps), center)
    report = verify_weight_filtration(result, n_op)
    if not report.ok:
        raise NumericalError(
            "constructed weight filtration fails its defining conditions: %s"
            % report.failures())
    return result


class VerificationReport:
    """Per-condition, per-index outcome of a filtration verification."""

    def __init__(self):
        self.entries = {}

    def record(self, key, ok):
        self.entries[key] = bool(ok)

    @property
    def ok(self):
        return all(self.entries.values())

    def failures(self):
        return sorted(k for k, v in self.entries.items() if not v)

    def __repr__(self):
        return "VerificationReport(ok=%s, failures=%s)" % (
            self.ok, self.failures())


def _scale_tol(backend, *mats):
    """Absolute zero-threshold proportional to the operands' magnitude."""
    if backend.exact:
        return None
    scale = 1.0
    for m in mats:
        scale = max(scale, m.max_abs())
    return backend.eps * scale


def _clean(mat, tol):
    """Zero out float entries below ``tol`` so noise cannot gain rank."""
    if mat.backend.exact or tol is None:
        return mat
    out = mat.copy()
    out.a[np.abs(out.a) <= tol] = 0
    return out


def _graded_iso_rank(n_op, filt, src, dst, power):
    """Rank of the induced map Gr_src -> Gr_dst of ``N^power``.

    Also returns the two graded dimensions, so the caller can decide
    isomorphy; well-definedness (killing the lower step) is checked too.
    """
    space = filt.space
    backend = space.backend
    _, proj = quotient_map(space, filt.at(dst - 1))
    np_mat = n_op.power(power).mat
    tol = _scale_tol(backend, np_mat, proj.mat)
    cols = _clean(proj.mat @ (np_mat @ filt.at(src).basis), tol)
    inside = proj.image_of(filt.at(dst))
    ok_target = cols.is_zero(tol) or inside.contains(space_sub(proj.target, cols))
    lower = proj.mat @ (np_mat @ filt.at(src - 1).basis)
    ok_defined = lower.is_zero(tol) if lower.ncols else True
    r = rank(cols) if cols.ncols and not cols.is_zero(tol) else 0
    d_src = filt.at(src).dim - filt.at(src - 1).dim
    d_dst = filt.at(dst).dim - filt.at(dst - 1).dim
    return r, d_src, d_dst, ok_defined and ok_target


def space_sub(space, cols):
    return space.subspace(cols)


def verify_weight_filtration(result, n_op):
    """Check both defining conditions of a centred weight filtration."""
    filt, c = result.filtration, result.center
    report = VerificationReport()
    lo, hi = filt.lo, filt.hi
    for l in range(lo, hi + 1):
        ok = filt.at(l - 2).contains(
            space_sub(filt.space, n_op.map.mat @ filt.at(l).basis))
        report.record(("N_lowers_by_two", l), ok)
    max_a = max(hi - c, c - lo) + 1
    for a in range(0, max_a + 1):
        r, d_src, d_dst, ok_def = _graded_iso_rank(n_op, filt, c + a, c - a, a)
        report.record(("graded_iso", a), ok_def and d_src == d_dst == r)
    return report


def verify_relative(m_filt, n_op, w_filt):
    """Verify the defining conditions of a relative weight filtration.

    Returns a :class:`VerificationReport` with one boolean per condition per
    index ``(k, l)``: ``N M_l ⊆ M_{l-2}`` and the induced
    ``N^l : Gr^M_{k+l} Gr^W_k -> Gr^M_{k-l} Gr^W_k`` isomorphisms.
    """
    if isinstance(m_filt, RelativeWeightFiltration):
        m_filt = m_filt.filtration
    report = VerificationReport()
    space = m_filt.space
    for l in range(m_filt.lo, m_filt.hi + 1):
        ok = m_filt.at(l - 2).contains(
            space_sub(space, n_op.map.mat @ m_filt.at(l).basis))
        report.record(("N_lowers_by_two", l), ok)
    # induced filtration on each Gr^W_k must be the monodromy filtration of
    # the induced operator centred at k
    for k in range(w_filt.lo, w_filt.hi + 1):
        d_k = w_filt.at(k).dim - w_filt.at(k - 1).dim
        if d_k == 0:
            continue
        _, proj = quotient_map(space, w_filt.at(k - 1))
        target = proj.image_of(w_filt.at(k))
        # induced operator on the graded piece, in target coordinates; lifts
        # of the graded basis are solved for inside W_k
        gr_space = Space(space.backend, target.dim)
        try:
            from .backend import solve
            step_basis = w_filt.at(k).basis
            coeff = solve(proj.mat @ step_basis, target.basis)
            lifts = step_basis @ coeff
            cols = proj.mat @ (n_op.map.mat @ lifts)
            n_bar = LinearMap(gr_space, gr_space, target.coordinates_of(cols))
            m_bar_steps = {}
            for l in range(m_filt.lo - 1, m_filt.hi + 1):
                sub = m_filt.at(l).intersect(w_filt.at(k))
                img = proj.image_of(sub)
                m_bar_steps[l] = gr_space.subspace(
                    target.coordinates_of(img.basis))
            m_bar = Filtration(gr_space, "inc", m_bar_steps)
        except Exception:
            report.record(("induced_filtration", k), False)
            continue
        try:
            n_bar_op = NilpotentOperator(n_bar)
        except NilpotencyError:
            report.record(("induced_nilpotent", k), False)
            continue
        for l in range(0, n_bar_op.order + 1):
            r, d_src, d_dst, ok_def = _graded_iso_rank(
                n_bar_op, m_bar, k + l, k - l, l)
            report.record(("graded_iso", k, l),
                          ok_def and d_src == d_dst == r)
    return report


def _check_preserves(n_op, w_filt):
    for k in range(w_filt.lo, w_filt.hi + 1):
        step = w_filt.at(k)
        if not step.contains(space_sub(w_filt.space,
                                       n_op.map.mat @ step.basis)):
            raise ShapeError("operator does not preserve the weight filtration "
                             "at level %d" % k)


def relative_weight_filtration(n_op, w_filt):
    """The relative weight filtration M(N, W), or a non-existence error.

    Supported constructions: ``N = 0`` (M = W); ``W`` concentrated in one
    weight (monodromy filtration centred there); ``N^2 = 0`` with at most
    three consecutive weights and trivial induced action on the outer graded
    pieces (direct construction); otherwise a splitting-transported candidate
    is attempted.  Every candidate is verified; a failing candidate raises
    :class:`NonExistenceError` rather than being patched.
    """
    if not isinstance(n_op, NilpotentOperator):
        n_op = NilpotentOperator(n_op)
    _check_preserves(n_op, w_filt)
    space = w_filt.space
    dims = w_filt.graded_dims()
    weights = sorted(dims)

    candidate = None
    if n_op.order <= 1:
        candidate = w_filt
    elif len(weights) == 1:
        candidate = weight_filtration(n_op, weights[0]).filtration
    elif (n_op.order <= 2 and len(weights) <= 3
          and max(weights) - min(weights) <= 2):
        candidate = _three_step_candidate(n_op, w_filt, weights)
    if candidate is None:
        candidate = _split_transport_candidate(n_op, w_filt)

    report = verify_relative(candidate, n_op, w_filt)
    if not report.ok:
        raise NonExistenceError(
            "relative weight filtration does not exist (or is outside the "
            "supported constructions); failing conditions: %s"
            % report.failures())
    return RelativeWeightFiltration(candidate, n_op, w_filt)


def _three_step_candidate(n_op, w_filt, weights):
    """Direct construction for N^2 = 0 over <= 3 consecutive weights.

    Requires the induced action on the outer graded pieces to vanish; the
    candidate is then forced:  M_{t-2} = W_{t-2} + N(W_{t-1}),
    M_{t-1} = Ker N ∩ W_{t-1}.
    """
    space = w_filt.space
    n_mat = n_op.map.mat
    t = max(weights)
    tol = _scale_tol(space.backend, n_mat)
    top_img = n_mat @ w_filt.at(t).basis
    if not (top_img.is_zero(tol)
            or w_filt.at(t - 1).contains(space_sub(space, _clean(top_img, tol)))):
        return None
    if not (n_mat @ w_filt.at(t - 2).basis).is_zero(tol):
        return None
    mid_img = _clean(n_mat @ w_filt.at(t - 1).basis, tol)
    image_mid = (space.zero_subspace() if mid_img.is_zero(tol)
                 else space.subspace(mid_img))
    m_t2 = w_filt.at(t - 2).add(image_mid)
    m_t1 = n_op.map.kernel().intersect(w_filt.at(t - 1))
    return Filtration(space, "inc", {
        t - 3: space.zero_subspace(),
        t - 2: m_t2,
        t - 1: m_t1.add(m_t2),
        t: space.full_subspace(),
    })


def _split_transport_candidate(n_op, w_filt):
    """Transport graded monodromy filtrations through a W-adapted splitting.

    Exact when a splitting compatible with N exists; otherwise the verifier
    rejects the candidate and non-existence is reported.
    """
    space = w_filt.space
    backend = space.backend
    basis, levels = _adapted_basis(w_filt)
    p = basis
    p_inv = inverse(p)
    n_tilde = p_inv @ n_op.map.mat @ p
    # diagonal blocks of the level-sorted matrix are the induced operators
    by_level = {}
    for idx, lvl in enumerate(levels):
        by_level.setdefault(lvl, []).append(idx)
    steps = {}
    spread = max(n_op.order, 1)
    lo = min(levels) - spread
    hi = max(levels) + spread
    for l in range(lo, hi + 1):
        steps[l] = space.zero_subspace()
    for lvl, idxs in by_level.items():
        block = Mat(backend, n_tilde.a[np.ix_(idxs, idxs)].copy())
        block_space = Space(backend, len(idxs))
        try:
            block_op = NilpotentOperator(LinearMap(block_space, block_space, block))
        except NilpotencyError:
            raise NonExistenceError("induced graded operator is not nilpotent")
        wres = weight_filtration(block_op, lvl)
        for l in range(lo, hi + 1):
            sub = wres.filtration.at(l)
            if sub.dim == 0:
                continue
            lifted = p.take_columns(idxs) @ sub.basis
            steps[l] = steps[l].add(space.subspace(lifted))
    # accumulate: candidate M_l must be increasing
    acc = space.zero_subspace()
    out = {}
    for l in range(lo, hi + 1):
        acc = acc.add(steps[l])
        out[l] = acc
    out[hi] = space.full_subspace()
    return Filtration(space, "inc", out)


def induced_on_exterior_power(n_op, k):
    """Leibniz action of a nilpotent operator on the k-th exterior power."""
    if not isinstance(n_op, NilpotentOperator):
        n_op = NilpotentOperator(n_op)
    der = induced_derivation(n_op.map, k)
    return NilpotentOperator(der)
