"""Random valid structures for tests and the acceptance suite.

The generator builds a split model from randomly chosen Hodge numbers (basis
vectors for the ``p = q`` types, conjugate pairs ``e_i ± i e_j`` otherwise),
transports it through a random rational change of frame and then moves the
Hodge filtration by ``exp(lambda)`` for a random complex ``lambda`` that
strictly lowers the weight filtration.  Each step preserves validity, the
last one generically destroys R-splitness, so the output exercises the whole
bigrading/delta pipeline.
"""

import random

from .backend import Mat, inverse
from .linalg import Filtration, LinearMap, Space, exp_nilpotent
from .mhs import validate


def random_hodge_numbers(rng, max_dim=8, weight_lo=-3, weight_hi=2):
    """A conjugation-symmetric assignment ``(p, q) -> h``, total <= max_dim."""
    types = {}
    total = 0
    weights = list(range(weight_lo, weight_hi + 1))
    rng.shuffle(weights)
    for w in weights[: rng.randint(1, 3)]:
        room = max_dim - total
        if room <= 0:
            break
        budget = rng.randint(1, room)
        centre = 0
        if w % 2 == 0 and rng.random() < 0.7:
            centre = rng.randint(0, budget)
        pairs = (budget - centre) // 2
        if centre == 0 and pairs == 0:
            if w % 2 == 0:
                centre = 1
            elif budget >= 2:
                pairs = 1
            else:
                continue
        if centre:
            types[(w // 2, w // 2)] = types.get((w // 2, w // 2), 0) + centre
        for _ in range(pairs):
            spread = rng.randint(0, 1)
            if w % 2 == 0:
                p = w // 2 + 1 + spread
            else:
                p = (w + 1) // 2 + spread
            q = w - p
            types[(p, q)] = types.get((p, q), 0) + 1
            types[(q, p)] = types.get((q, p), 0) + 1
        total += centre + 2 * pairs
    if not types:
        types[(0, 0)] = 1
    return types


def split_model(backend, types):
    """The split structure on Q^n realizing the given Hodge numbers.

    Returns ``(mhs, coord_weights)`` where ``coord_weights[i]`` is the weight
    of the coordinate ``e_i`` in the split frame.
    """
    n = sum(types.values())
    space = Space(backend, n)
    i_unit = backend.i if backend.exact else 1j

    frame = {}
    coord_weights = [0] * n
    cursor = 0
    for (p, q), h in sorted(types.items()):
        if p == q:
            cols = []
            for _ in range(h):
                cols.append(space.basis_vector(cursor))
                coord_weights[cursor] = p + q
                cursor += 1
            frame[(p, q)] = cols
    for (p, q), h in sorted(types.items()):
        if p <= q:
            continue
        if types.get((q, p), 0) != h:
            raise ValueError("Hodge numbers are not conjugation symmetric")
        up, down = [], []
        for _ in range(h):
            e1 = space.basis_vector(cursor)
            e2 = space.basis_vector(cursor + 1)
            coord_weights[cursor] = p + q
            coord_weights[cursor + 1] = p + q
            cursor += 2
            up.append(e1 + e2.scale(i_unit))
            down.append(e1 - e2.scale(i_unit))
        frame[(p, q)] = up
        frame[(q, p)] = down

    weights = sorted({p + q for (p, q) in types})
    w_steps = {}
    for k in range(min(weights), max(weights) + 1):
        gens = [c for (p, q), cols in frame.items() if p + q <= k for c in cols]
        w_steps[k] = space.subspace(Mat.hstack(gens)) if gens \
            else space.zero_subspace()
    ps = sorted({p for (p, q) in types})
    f_steps = {}
    for p0 in range(min(ps), max(ps) + 1):
        gens = [c for (p, q), cols in frame.items() if p >= p0 for c in cols]
        f_steps[p0] = space.subspace(Mat.hstack(gens)) if gens \
            else space.zero_subspace()
    w = Filtration(space, "inc", w_steps)
    f = Filtration(space, "dec", f_steps)
    return validate(space, w, f), coord_weights


def _random_rational_invertible(backend, rng, n):
    while True:
        m = backend.matrix([[rng.randint(-2, 2) for _ in range(n)]
                            for _ in range(n)])
        try:
            inverse(m)
            return m
        except Exception:
            continue


def random_mhs(backend, rng=None, max_dim=8, weight_lo=-3, weight_hi=2,
               scramble=True):
    """A random valid mixed Hodge structure.

    Validity holds by construction and is re-checked on return.
    """
    rng = rng or random.Random()
    types = random_hodge_numbers(rng, max_dim, weight_lo, weight_hi)
    split, coord_weights = split_model(backend, types)
    if not scramble:
        return split
    space = split.space
    n = space.dim

    # lambda strictly lowers W in the split frame
    lam = backend.zeros(n, n)
    for j in range(n):
        for i in range(n):
            if coord_weights[i] < coord_weights[j] and rng.random() < 0.6:
                lam.a[i, j] = backend.scalar((rng.randint(-2, 2),
                                              rng.randint(-2, 2)))
    e = exp_nilpotent(LinearMap(space, space, lam), 1)
    f = split.F.map_image(e)
    m = validate(space, split.W, f)

    # transport through a random rational frame
    g = LinearMap(space, space, _random_rational_invertible(backend, rng, n))
    return validate(space, m.W.map_image(g), m.F.map_image(g))


def random_pure(backend, rng, weight, half_dim):
    """A random pure structure of odd weight ``weight``, dimension ``2*half_dim``."""
    p = (weight + 1) // 2
    types = {(p, weight - p): half_dim, (weight - p, p): half_dim}
    split, _ = split_model(backend, types)
    space = split.space
    g = LinearMap(space, space,
                  _random_rational_invertible(backend, rng, space.dim))
    return validate(space, split.W.map_image(g), split.F.map_image(g))
