import random

import pytest

from mhx.backend import EXACT, FLOAT, Mat, float_backend
from mhx.errors import DimensionMismatchError, FiltrationError, NilpotencyError
from mhx.linalg import (
    Filtration,
    LinearMap,
    Space,
    conjugate,
    exp_nilpotent,
    quotient_map,
)

BACKENDS = [EXACT, FLOAT]


def brute_force_intersection(space, a, b, trials=400, seed=7):
    """Oracle: sample rational combinations of A's basis lying in B.

    Solves the membership linear system by exhaustive elimination over random
    rational coefficients, independent of Subspace.intersect.
    """
    rng = random.Random(seed)
    found = space.zero_subspace()
    for _ in range(trials):
        coeffs = [rng.randint(-3, 3) for _ in range(a.dim)]
        v = space.backend.zeros(space.dim, 1)
        for c, j in zip(coeffs, range(a.dim)):
            v = v + a.basis.col(j).scale(c)
        if b.contains_vector(v):
            found = found.add(space.subspace(v))
    return found


@pytest.mark.parametrize("backend", BACKENDS)
def test_intersect_trivial_cases(backend):
    v = Space(backend, 2)
    e1 = v.subspace([[1, 0]])
    e2 = v.subspace([[0, 1]])
    assert e1.intersect(e2).dim == 0
    assert v.full_subspace().intersect(e2) == e2


@pytest.mark.parametrize("backend", BACKENDS)
def test_intersect_derived_example(backend):
    # A = span(e1+e2, e3), B = span(e1+e2, e1) in dim 3 -> span(e1+e2)
    v = Space(backend, 3)
    a = v.subspace([[1, 1, 0], [0, 0, 1]])
    b = v.subspace([[1, 1, 0], [1, 0, 0]])
    got = a.intersect(b)
    expected = v.subspace([[1, 1, 0]])
    assert got == expected
    # oracle agrees
    assert brute_force_intersection(v, a, b) == expected


@pytest.mark.parametrize("backend", BACKENDS)
def test_sum_examples(backend):
    v = Space(backend, 2)
    e1 = v.subspace([[1, 0]])
    e2 = v.subspace([[0, 1]])
    assert e1.add(e2) == v.full_subspace()
    assert e1.add(v.zero_subspace()) == e1
    a = v.subspace([[1, 1]])
    b = v.subspace([[1, -1]])
    assert a.add(b).dim == 2


@pytest.mark.parametrize("backend", BACKENDS)
def test_dimension_formula_random(backend):
    rng = random.Random(11)
    for _ in range(25):
        n = rng.randint(1, 6)
        v = Space(backend, n)
        a = v.subspace([[rng.randint(-2, 2) for _ in range(n)]
                        for _ in range(rng.randint(0, n))])
        b = v.subspace([[rng.randint(-2, 2) for _ in range(n)]
                        for _ in range(rng.randint(0, n))])
        assert a.add(b).dim + a.intersect(b).dim == a.dim + b.dim


def test_mismatched_spaces_error():
    a = Space(EXACT, 2).full_subspace()
    b = Space(EXACT, 3).full_subspace()
    with pytest.raises(DimensionMismatchError):
        a.intersect(b)


@pytest.mark.parametrize("backend", BACKENDS)
def test_quotient_map(backend):
    v = Space(backend, 3)
    s = v.subspace([[0, 0, 1]])
    q, proj = quotient_map(v, s)
    assert q.dim == 2
    assert proj.apply(v.basis_vector(2)).is_zero()
    assert proj.kernel() == s

    q0, proj0 = quotient_map(v, v.zero_subspace())
    assert q0.dim == 3 and proj0.mat.eq(backend.identity(3))

    s2 = v.subspace([[1, 1, 0]])
    q2, proj2 = quotient_map(v, s2)
    assert q2.dim == 2
    assert proj2.kernel() == s2


@pytest.mark.parametrize("backend", BACKENDS)
def test_exp_nilpotent(backend):
    v = Space(backend, 2)
    zero = LinearMap.zero(v)
    assert exp_nilpotent(zero, 1).mat.eq(backend.identity(2))

    n = LinearMap(v, v, [[0, 0], [1, 0]])  # N e1 = e2, N e2 = 0
    e = exp_nilpotent(n, 1)
    assert e.mat.eq((LinearMap.identity(v) + n).mat)

    z = backend.scalar((3, -2)) if backend.exact else 3 - 2j
    ez = exp_nilpotent(n, z)
    ezm = exp_nilpotent(n, -z if backend.exact else -(3 - 2j))
    assert (ez @ ezm).mat.eq(backend.identity(2))

    bad = LinearMap(v, v, [[1, 0], [0, 1]])
    with pytest.raises(NilpotencyError):
        exp_nilpotent(bad, 1)


@pytest.mark.parametrize("backend", BACKENDS)
def test_conjugate(backend):
    v = Space(backend, 2)
    real = v.subspace([[1, 2]])
    assert conjugate(real) == real
    i = backend.i if backend.exact else 1j
    s = v.subspace(v.backend.from_columns(2, [[backend.one, i]]))
    sc = conjugate(s)
    assert sc == v.subspace(v.backend.from_columns(2, [[backend.one, -i]]))
    assert conjugate(sc) == s


@pytest.mark.parametrize("backend", BACKENDS)
def test_conjugate_commutes_with_lattice_ops(backend):
    rng = random.Random(3)
    v = Space(backend, 4)

    def rand_sub():
        cols = []
        for _ in range(rng.randint(1, 3)):
            col = [backend.scalar((rng.randint(-2, 2), rng.randint(-2, 2)))
                   if backend.exact else
                   complex(rng.randint(-2, 2), rng.randint(-2, 2))
                   for _ in range(4)]
            cols.append(col)
        return v.subspace(v.backend.from_columns(4, cols))

    for _ in range(10):
        a, b = rand_sub(), rand_sub()
        assert conjugate(a.intersect(b)) == conjugate(a).intersect(conjugate(b))
        assert conjugate(a.add(b)) == conjugate(a).add(conjugate(b))
        assert conjugate(conjugate(a)) == a


def test_filtration_validation():
    v = Space(EXACT, 2)
    w0 = v.subspace([[1, 0]])
    full = v.full_subspace()
    f = Filtration(v, "inc", {-1: w0, 0: full})
    assert f.at(-2).dim == 0 and f.at(5) == full
    assert f.graded_dims() == {-1: 1, 0: 1}

    with pytest.raises(FiltrationError):
        Filtration(v, "inc", {-1: full, 0: w0})
    with pytest.raises(FiltrationError):
        Filtration(v, "inc", {0: w0})  # never exhausts the space
    with pytest.raises(FiltrationError):
        Filtration(v, "dec", {0: w0, 1: full})


def test_float_rank_threshold_respected():
    loose = float_backend(1e-3)
    v = Space(loose, 2)
    # second generator differs from the first by 1e-6, below the tolerance
    s = v.subspace([[1.0, 0.0], [1.0, 1e-6]])
    assert s.dim == 1
    tight = float_backend(1e-9)
    v2 = Space(tight, 2)
    s2 = v2.subspace([[1.0, 0.0], [1.0, 1e-6]])
    assert s2.dim == 2
