"""Exterior-power utilities shared by the Hodge and nilpotent layers.

Wedge coordinates use the basis of sorted index tuples in lexicographic
order, so ``e_T = e_{i1} ^ ... ^ e_{ik}`` for ``T = (i1 < ... < ik)``.
"""

from itertools import combinations, permutations

from .backend import Mat
from .errors import DimensionMismatchError


def wedge_tuples(n, k):
    return list(combinations(range(n), k))


def _det(backend, rows):
    """Leibniz determinant of a small square matrix given as nested lists."""
    k = len(rows)
    if k == 0:
        return backend.one
    total = backend.zero
    for perm in permutations(range(k)):
        inv = sum(1 for i in range(k) for j in range(i + 1, k)
                  if perm[i] > perm[j])
        term = backend.one
        for i in range(k):
            term = term * rows[i][perm[i]]
        total = total + (term if inv % 2 == 0 else -term)
    return total


def wedge_columns(vectors, tuples=None):
    """Wedge of the ``k`` columns of ``vectors`` in wedge coordinates.

    Parameters
    ----------
    vectors : Mat
        An ``n x k`` matrix whose columns are wedged together in order.

    Returns
    -------
    Mat
        A ``C(n, k) x 1`` coordinate column.
    """
    backend = vectors.backend
    n, k = vectors.shape
    tuples = tuples or wedge_tuples(n, k)
    out = backend.zeros(len(tuples), 1)
    for r, t in enumerate(tuples):
        rows = [[vectors.a[i, j] for j in range(k)] for i in t]
        out.a[r, 0] = _det(backend, rows)
    return out


def wedge_basis_matrix(vectors, k):
    """All ``k``-fold wedges of the columns of ``vectors``, as columns.

    Column order follows lexicographic tuples of the input column indices.
    """
    backend = vectors.backend
    n, m = vectors.shape
    if k > m:
        raise DimensionMismatchError("cannot take a %d-fold wedge of %d vectors" % (k, m))
    tuples = wedge_tuples(n, k)
    cols = []
    for sel in combinations(range(m), k):
        cols.append(wedge_columns(vectors.take_columns(sel), tuples))
    return Mat.hstack(cols) if cols else backend.zeros(len(tuples), 0)


def derivation_matrix(a, k):
    """Matrix of the Leibniz action of ``a`` on the ``k``-th exterior power.

    ``D(x1 ^ ... ^ xk) = sum_j x1 ^ ... ^ a(xj) ^ ... ^ xk`` in the wedge
    basis of sorted tuples.
    """
    backend = a.backend
    n = a.nrows
    tuples = wedge_tuples(n, k)
    index = {t: r for r, t in enumerate(tuples)}
    m = len(tuples)
    out = backend.zeros(m, m)
    for c, t in enumerate(tuples):
        for pos in range(k):
            # replace slot `pos` by its image under a, expand over basis rows
            for i in range(n):
                coeff = a.a[i, t[pos]]
                if backend.exact:
                    if not bool(coeff):
                        continue
                elif coeff == 0:
                    continue
                slots = list(t)
                slots[pos] = i
                if len(set(slots)) < k:
                    continue
                order = sorted(range(k), key=lambda q: slots[q])
                sorted_slots = tuple(slots[q] for q in order)
                # sign of the permutation that sorts the slots
                inv = sum(1 for x in range(k) for y in range(x + 1, k)
                          if order[x] > order[y])
                sign = -1 if inv % 2 else 1
                r = index[sorted_slots]
                out.a[r, c] = out.a[r, c] + (coeff if sign > 0 else -coeff)
    return out
