import random

import pytest

from mhx.backend import EXACT, FLOAT, Mat
from mhx.errors import NotMixedHodgeError, NotMorphismError
from mhx.linalg import Filtration, LinearMap, Space
from mhx.mhs import (
    check_morphism,
    delta,
    delta_split,
    deligne_bigrading,
    direct_sum,
    dual,
    exterior_power,
    graded_piece,
    is_split,
    quotient_mhs,
    sub_mhs,
    tate_twist,
    validate,
)
from mhx.generate import random_mhs

BACKENDS = [EXACT, FLOAT]


def tate(backend, a):
    """Q(a): one dimension, weight -2a, Hodge level -a."""
    space = Space(backend, 1)
    full = space.full_subspace()
    zero = space.zero_subspace()
    w = Filtration(space, "inc", {-2 * a - 1: zero, -2 * a: full})
    f = Filtration(space, "dec", {-a: full, -a + 1: zero})
    return validate(space, w, f)


def two_step(backend, z):
    """Graded Q(0), Q(1) with F^0 = span(e1 + z*e2)."""
    space = Space(backend, 2)
    w = Filtration(space, "inc", {
        -3: space.zero_subspace(),
        -2: space.subspace([[0, 1]]),
        -1: space.subspace([[0, 1]]),
        0: space.full_subspace(),
    })
    zc = backend.scalar(z)
    f0 = space.subspace(backend.from_columns(2, [[backend.one, zc]]))
    f = Filtration(space, "dec", {
        -1: space.full_subspace(),
        0: f0,
        1: space.zero_subspace(),
    })
    return validate(space, w, f)


def genus1_weight1(backend, tau):
    """Pure weight 1, dim 2, F^1 = span(e1 + tau*e2), Im tau != 0."""
    space = Space(backend, 2)
    w = Filtration(space, "inc", {0: space.zero_subspace(),
                                  1: space.full_subspace()})
    f1 = space.subspace(backend.from_columns(2, [[backend.one,
                                                  backend.scalar(tau)]]))
    f = Filtration(space, "dec", {0: space.full_subspace(), 1: f1,
                                  2: space.zero_subspace()})
    return validate(space, w, f)


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("a", [-1, 0, 2])
def test_tate_structure_is_valid(backend, a):
    m = tate(backend, a)
    assert m.graded_dims() == {-2 * a: 1}
    grading = m.bigrading()
    assert set(grading) == {(-a, -a)}


@pytest.mark.parametrize("backend", BACKENDS)
def test_two_step_valid_any_z(backend):
    for z in [(0, 0), (2, 1), (-3, "1/2") if backend.exact else (-3, 0.5)]:
        m = two_step(backend, z)
        grading = m.bigrading()
        assert set(grading) == {(0, 0), (-1, -1)}
        # I^{-1,-1} is the bottom line
        assert grading[(-1, -1)] == m.space.subspace([[0, 1]])


@pytest.mark.parametrize("backend", BACKENDS)
def test_invalid_pure_weight0_with_full_f1(backend):
    space = Space(backend, 2)
    w = Filtration(space, "inc", {-1: space.zero_subspace(),
                                  0: space.full_subspace()})
    f = Filtration(space, "dec", {0: space.full_subspace(),
                                  1: space.full_subspace(),
                                  2: space.zero_subspace()})
    with pytest.raises(NotMixedHodgeError):
        validate(space, w, f)


def test_irrational_weight_filtration_rejected():
    space = Space(EXACT, 2)
    i = EXACT.i
    wsub = space.subspace(EXACT.from_columns(2, [[EXACT.one, i]]))
    w = Filtration(space, "inc", {-1: wsub, 0: space.full_subspace()})
    f = Filtration(space, "dec", {0: space.full_subspace(),
                                  1: space.zero_subspace()})
    with pytest.raises(NotMixedHodgeError):
        validate(space, w, f)


def test_zero_space_is_valid():
    space = Space(EXACT, 0)
    w = Filtration(space, "inc", {0: space.full_subspace()})
    f = Filtration(space, "dec", {0: space.full_subspace()})
    m = validate(space, w, f)
    assert m.bigrading() == {}
    assert is_split(m)


# ---------------------------------------------------------------------------
# bigrading
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
def test_genus1_bigrading(backend):
    tau = (0, 1) if backend.exact else 1j
    m = genus1_weight1(backend, tau)
    grading = m.bigrading()
    assert set(grading) == {(1, 0), (0, 1)}
    assert grading[(1, 0)] == m.F.at(1)
    assert grading[(0, 1)] == m.F.at(1).conj()


@pytest.mark.parametrize("backend", BACKENDS)
def test_split_sum_bigrading(backend):
    m = two_step(backend, 0)
    grading = m.bigrading()
    assert grading[(0, 0)] == m.space.subspace([[1, 0]])
    assert grading[(-1, -1)] == m.space.subspace([[0, 1]])
    assert is_split(m)


@pytest.mark.parametrize("backend", BACKENDS)
def test_random_bigrading_reconstructs(backend):
    rng = random.Random(42)
    for _ in range(8):
        m = random_mhs(backend, rng, max_dim=6)
        grading = m.bigrading()
        assert sum(s.dim for s in grading.values()) == m.dim
        # conjugation congruence: conj I^{ab} = I^{ba} mod lower square
        for (a, b), sub in grading.items():
            target = grading.get((b, a))
            assert target is not None
            modsub = target
            for (c, d), other in grading.items():
                if c < b and d < a:
                    modsub = modsub.add(other)
            assert modsub.contains(sub.conj())


# ---------------------------------------------------------------------------
# delta
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
def test_delta_zero_for_split(backend):
    for m in [tate(backend, 1), two_step(backend, 0),
              genus1_weight1(backend, (0, 1) if backend.exact else 1j)]:
        s = delta(m)
        assert s.delta.is_zero()
        assert is_split(m)


@pytest.mark.parametrize("backend", BACKENDS)
def test_delta_two_step_oracle(backend):
    # Oracle: for the two-step structure the exponential truncates and the
    # defining equation reads conj(Y) = Y - 4i*delta, so delta(e1) = Im(z)*e2.
    z = ("1/3", "5/7") if backend.exact else complex(1 / 3, 5 / 7)
    m = two_step(backend, z)
    s = delta(m)
    y = s.Y
    # delta = (Y - conj(Y)) / 4i, from conj(Y) = Y - 4i*delta
    expected = (y.mat - y.conj().mat).scale(
        backend.scalar(1) / (backend.scalar((0, 4)) if backend.exact else 4j))
    assert s.delta.mat.eq(expected)
    imz = backend.scalar("5/7") if backend.exact else 5 / 7
    e2 = m.space.basis_vector(1).scale(imz)
    assert (s.delta.apply(m.space.basis_vector(0)) - e2).is_zero()
    assert s.delta.apply(m.space.basis_vector(1)).is_zero()
    assert set(s.delta_components) == {2}


@pytest.mark.parametrize("backend", BACKENDS)
def test_delta_block_diagonal_on_direct_sum(backend):
    za = (1, 2) if backend.exact else 1 + 2j
    zb = (0, "3/2") if backend.exact else 1.5j
    a = two_step(backend, za)
    b = two_step(backend, zb)
    s, ia, ib = direct_sum(a, b)
    d = delta(s).delta
    da = delta(a).delta
    db = delta(b).delta
    # restriction to each block equals the block delta
    assert (d @ ia - ia @ da).is_zero()
    assert (d @ ib - ib @ db).is_zero()


@pytest.mark.parametrize("backend", BACKENDS)
def test_delta_defining_equation_random(backend):
    rng = random.Random(5)
    for _ in range(6):
        m = random_mhs(backend, rng, max_dim=6)
        s = delta(m)  # raises on verification failure
        assert s.delta.is_real(None if backend.exact else 1e-10)
        # exp(-i delta) F is split over R
        assert is_split(delta_split(m))


# ---------------------------------------------------------------------------
# morphisms
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
def test_identity_and_inclusion_morphisms(backend):
    m = two_step(backend, (1, 1) if backend.exact else 1 + 1j)
    check_morphism(LinearMap.identity(m.space), m, m)
    other = tate(backend, 0)
    s, ia, ib = direct_sum(m, other)
    check_morphism(ia, m, s)
    check_morphism(ib, other, s)


@pytest.mark.parametrize("backend", BACKENDS)
def test_graph_map_morphism(backend):
    # g(a, b) = (a, b + f(a)) for a morphism f: A -> B
    a = tate(backend, 0)
    b = tate(backend, 0)
    s, ia, ib = direct_sum(a, b)
    f = LinearMap(a.space, b.space, [[3]])
    g = LinearMap(s.space, s.space, [[1, 0], [3, 1]])
    check_morphism(g, s, s)
    assert (g @ ia - (ia + ib @ f)).is_zero()


def test_not_a_morphism_reports_level():
    m = two_step(EXACT, (1, 1))
    # swapping the two coordinates does not preserve W
    f = LinearMap(m.space, m.space, [[0, 1], [1, 0]])
    with pytest.raises(NotMorphismError) as err:
        check_morphism(f, m, m)
    assert "level" in str(err.value)


@pytest.mark.parametrize("backend", BACKENDS)
def test_delta_commutes_with_random_inclusions(backend):
    rng = random.Random(9)
    for _ in range(4):
        a = random_mhs(backend, rng, max_dim=4)
        b = random_mhs(backend, rng, max_dim=4)
        s, ia, ib = direct_sum(a, b)
        check_morphism(ia, a, s)
        check_morphism(ib, b, s)


@pytest.mark.parametrize("backend", BACKENDS)
def test_bigrading_functoriality(backend):
    a = two_step(backend, (2, 3) if backend.exact else 2 + 3j)
    b, ia, ib = direct_sum(a, tate(backend, 0))
    for (p, q), sub in a.bigrading().items():
        image = ia.image_of(sub)
        assert b.bigrading()[(p, q)].contains(image)


# ---------------------------------------------------------------------------
# graded pieces, twists, duals, exterior powers
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("backend", BACKENDS)
def test_graded_piece_examples(backend):
    q1 = tate(backend, 1)
    g = graded_piece(q1, -2)
    assert g.dim == 1 and g.graded_dims() == {-2: 1}
    assert graded_piece(q1, 0).dim == 0

    b = two_step(backend, (0, 1) if backend.exact else 1j)
    g0 = graded_piece(b, 0)
    assert g0.dim == 1 and g0.bigrading().keys() == {(0, 0)}


@pytest.mark.parametrize("backend", BACKENDS)
def test_short_exact_sequence_graded_dims(backend):
    rng = random.Random(21)
    c = random_mhs(backend, rng, max_dim=6)
    # sub = a weight step, always a subobject
    mid = (c.W.lo + c.W.hi) // 2
    s = c.W.at(mid)
    if s.dim in (0, c.dim):
        s = c.W.at(c.W.lo)
    if s.dim in (0, c.dim):
        pytest.skip("degenerate draw")
    a, inc = sub_mhs(c, s)
    b, proj = quotient_mhs(c, s)
    for k in range(c.W.lo, c.W.hi + 1):
        da = a.W.at(k).dim - a.W.at(k - 1).dim
        db = b.W.at(k).dim - b.W.at(k - 1).dim
        dc = c.W.at(k).dim - c.W.at(k - 1).dim
        assert da + db == dc


@pytest.mark.parametrize("backend", BACKENDS)
def test_tate_twist(backend):
    q0 = tate(backend, 0)
    for a in [-2, 1, 3]:
        t = tate_twist(q0, a)
        assert t.graded_dims() == {-2 * a: 1}
        assert set(t.bigrading()) == {(-a, -a)}


@pytest.mark.parametrize("backend", BACKENDS)
def test_dual_structures(backend):
    q1 = tate(backend, 1)
    d = dual(q1)
    assert d.graded_dims() == {2: 1}
    m = genus1_weight1(backend, (0, 1) if backend.exact else 1j)
    dm = dual(m)
    assert dm.graded_dims() == {-1: 2}
    assert set(dm.bigrading()) == {(0, -1), (-1, 0)}


@pytest.mark.parametrize("backend", BACKENDS)
def test_exterior_power_dims(backend):
    rng = random.Random(2)
    from mhx.generate import random_pure
    h = random_pure(backend, rng, 1, 3)  # weight 1, dim 6
    w3 = exterior_power(h, 3)
    assert w3.dim == 20
    assert w3.graded_dims() == {3: 20}

    g2 = random_pure(backend, rng, 1, 2)  # genus-2 style H^1
    l2 = exterior_power(g2, 2)
    assert l2.dim == 6
    assert l2.graded_dims() == {2: 6}
    assert sum(s.dim for s in l2.bigrading().values()) == 6


@pytest.mark.parametrize("backend", BACKENDS)
def test_exterior_power_of_mixed(backend):
    m = two_step(backend, (1, 1) if backend.exact else 1 + 1j)
    l2 = exterior_power(m, 2)
    assert l2.dim == 1
    assert l2.graded_dims() == {-2: 1}
