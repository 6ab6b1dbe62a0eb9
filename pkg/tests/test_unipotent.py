import itertools
import random

import numpy as np
import pytest

from ppg.rings import PrimePower
from ppg.unipotent import (
    QuotientUniMatrix,
    UniMatrix,
    UniShape,
    commutator,
    compose,
    enumerate_group,
    exponent_bound,
    invert,
    is_generating,
    phi_m,
    power,
    project_quotient,
)
from oracles import mat_mul_plain, saturation_frattini

F2 = PrimePower(2, 1)
F3 = PrimePower(3, 1)
Z9 = PrimePower(3, 2)
U3_F3 = UniShape(2, F3)
U3_Z9 = UniShape(2, Z9)


def rand_matrix(shape, rng):
    size, mod = shape.size, shape.ring.modulus
    arr = np.eye(size, dtype=np.int64)
    for i in range(size):
        for j in range(i + 1, size):
            arr[i, j] = rng.randrange(mod)
    return UniMatrix(shape, arr)


def test_compose_example_against_direct_multiplication():
    a = UniMatrix.from_entries(U3_F3, {(1, 2): 1, (2, 3): 1})
    b = UniMatrix.from_entries(U3_F3, {(1, 2): 1, (2, 3): 2})
    got = compose(a, b)
    oracle = mat_mul_plain(a.array.tolist(), b.array.tolist(), 3)
    assert got.array.tolist() == oracle
    # I + 2E12 + 0E23 + 2E13
    assert got.strict_upper() == [2, 2, 0]


def test_compose_identity_and_inverse():
    rng = random.Random(3)
    for shape in (U3_F3, U3_Z9, UniShape(3, F3)):
        eye = UniMatrix.identity(shape)
        for _ in range(20):
            a = rand_matrix(shape, rng)
            assert compose(a, eye) == a
            assert compose(a, invert(a)) == eye
            assert compose(invert(a), a) == eye


def test_invert_examples():
    eye = UniMatrix.identity(U3_F3)
    assert invert(eye) == eye
    e12 = UniMatrix.elementary(U3_F3, 1, 2)
    assert invert(e12) == UniMatrix.elementary(U3_F3, 1, 2, -1)
    a = UniMatrix.from_entries(U3_F3, {(1, 2): 1, (2, 3): 1})
    inv = UniMatrix.from_entries(U3_F3, {(1, 2): -1, (2, 3): -1, (1, 3): 1})
    assert invert(a) == inv
    assert compose(a, inv) == eye


def test_power_examples():
    x = UniMatrix.elementary(U3_Z9, 1, 2)
    assert power(x, 9) == UniMatrix.identity(U3_Z9)
    assert power(x, 10) == x
    assert power(x, 0) == UniMatrix.identity(U3_Z9)
    assert power(x, -1) == invert(x)


def test_power_additivity_random():
    rng = random.Random(17)
    for shape in (U3_Z9, UniShape(3, F3)):
        for _ in range(25):
            a = rand_matrix(shape, rng)
            e1, e2 = rng.randint(-100, 100), rng.randint(-100, 100)
            assert power(a, e1 + e2) == compose(power(a, e1), power(a, e2))


def test_power_reduction_matches_unreduced():
    # binary powering without any reduction, as the oracle
    rng = random.Random(29)
    for _ in range(10):
        a = rand_matrix(U3_Z9, rng)
        e = rng.randrange(1, 2000)
        expected = UniMatrix.identity(U3_Z9)
        for _ in range(e):
            expected = compose(expected, a)
        assert power(a, e) == expected


def test_exponent_bound_random():
    rng = random.Random(31)
    for shape in (U3_Z9, UniShape(3, F3), UniShape(4, PrimePower(2, 2))):
        bound = exponent_bound(shape)
        for _ in range(15):
            a = rand_matrix(shape, rng)
            assert power(a, bound) == UniMatrix.identity(shape)


def test_commutator_examples():
    e12 = UniMatrix.elementary(U3_F3, 1, 2)
    e23 = UniMatrix.elementary(U3_F3, 2, 3)
    assert commutator(e12, e23) == UniMatrix.elementary(U3_F3, 1, 3)
    a = UniMatrix.from_entries(U3_F3, {(1, 2): 1, (2, 3): 1})
    assert commutator(a, a) == UniMatrix.identity(U3_F3)
    b = UniMatrix.from_entries(U3_F3, {(1, 2): 1, (2, 3): 1, (1, 3): 1})
    assert commutator(a, b) == UniMatrix.identity(U3_F3)


def test_group_axioms_exhaustive_small():
    for shape in (UniShape(2, F2), U3_F3):
        elems = enumerate_group(shape)
        assert len(elems) == shape.ring.modulus ** 3
        eye = UniMatrix.identity(shape)
        for a in elems:
            assert compose(a, invert(a)) == eye
        rng = random.Random(1)
        for _ in range(200):
            a, b, c = (rng.choice(elems) for _ in range(3))
            assert compose(compose(a, b), c) == compose(a, compose(b, c))


def test_phi_m_examples():
    assert phi_m(UniMatrix.identity(U3_Z9)) == (0, 0)
    assert phi_m(UniMatrix.from_entries(U3_Z9, {(1, 2): 3})) == (0, 0)
    assert phi_m(UniMatrix.from_entries(U3_Z9, {(1, 2): 4, (2, 3): 1})) == (1, 1)


def test_is_generating_examples():
    e12 = UniMatrix.elementary(U3_F3, 1, 2)
    e23 = UniMatrix.elementary(U3_F3, 2, 3)
    assert is_generating([e12, e23])
    assert not is_generating([e12, UniMatrix.elementary(U3_F3, 1, 2, 2)])
    assert not is_generating([UniMatrix.from_entries(U3_F3, {(1, 2): 1, (2, 3): 1})])


def test_project_quotient():
    center = UniMatrix.elementary(U3_F3, 1, 3)
    assert project_quotient(center) == project_quotient(UniMatrix.identity(U3_F3))
    e12 = UniMatrix.elementary(U3_F3, 1, 2)
    assert project_quotient(e12).array[0, 1] == 1
    with pytest.raises(ValueError):
        project_quotient(UniMatrix.identity(U3_Z9))


def test_project_quotient_is_homomorphism():
    rng = random.Random(41)
    for _ in range(100):
        a, b = rand_matrix(U3_F3, rng), rand_matrix(U3_F3, rng)
        assert project_quotient(compose(a, b)) == project_quotient(a) * project_quotient(b)


@pytest.mark.parametrize("shape", [U3_Z9, UniShape(3, F3)])
def test_frattini_equals_kernel_of_phi_m(shape):
    elems = enumerate_group(shape)
    stack = np.stack([e.array for e in elems])
    frattini = saturation_frattini(stack, shape.ring.p, shape.ring.modulus)
    kernel = {e.array.tobytes() for e in elems if all(v == 0 for v in phi_m(e))}
    assert frattini == kernel


def test_shape_mismatch_errors():
    a = UniMatrix.identity(U3_F3)
    b = UniMatrix.identity(U3_Z9)
    with pytest.raises(ValueError):
        compose(a, b)
    with pytest.raises(ValueError):
        commutator(a, b)


def test_strict_upper_round_trip():
    rng = random.Random(53)
    for shape in (U3_Z9, UniShape(4, F3)):
        for _ in range(20):
            a = rand_matrix(shape, rng)
            assert UniMatrix.from_strict_upper(shape, a.strict_upper()) == a


def test_invalid_matrices_rejected():
    arr = np.eye(3, dtype=np.int64)
    arr[1, 0] = 1
    with pytest.raises(ValueError):
        UniMatrix(U3_F3, arr)
    arr2 = np.eye(3, dtype=np.int64) * 2
    with pytest.raises(ValueError):
        UniMatrix(U3_F3, arr2)
