import json
import random

import pytest

from ppg.rings import PrimePower
from ppg.unipotent import UniMatrix, UniShape, compose
from ppg.presentations import (
    Hom,
    NotTameError,
    Presentation,
    PrimeMismatchError,
    coproduct,
    demushkin,
    eval_word,
    free,
    is_hom,
    presentation_from_json,
    presentation_to_json,
)


def test_demushkin_levels():
    assert demushkin(19, 3).factors[0].level == 2
    assert demushkin(4, 3).factors[0].level == 1
    with pytest.raises(NotTameError):
        demushkin(5, 3)
    with pytest.raises(ValueError):
        demushkin(1, 3)


def test_demushkin_relator_shape():
    pres = demushkin(19, 3)
    assert pres.generators == ("x1", "x2")
    assert pres.relators == (((1, 1), (0, 1), (1, -1), (0, -19)),)
    assert pres.h1 == 2


def test_free():
    assert free(1, 3).h1 == 1
    f4 = free(4, 3)
    assert f4.h1 == 4 and f4.relators == ()
    with pytest.raises(ValueError):
        free(0, 3)


def test_coproduct_counts():
    cop = coproduct([demushkin(19, 3), demushkin(37, 3)])
    assert len(cop.generators) == 4
    assert len(cop.relators) == 2
    assert cop.h1 == 4

    mixed = coproduct([demushkin(19, 3), free(1, 3)])
    assert mixed.h1 == 3

    k1, k2 = 3, 2
    parts = [demushkin(19, 3)] * k1 + [free(1, 3)] * k2
    assert coproduct(parts).h1 == 2 * k1 + k2

    with pytest.raises(PrimeMismatchError):
        coproduct([demushkin(19, 3), demushkin(11, 5)])


def test_coproduct_associative_up_to_relabeling():
    a, b, c = demushkin(19, 3), free(2, 3), demushkin(37, 3)
    left = coproduct([coproduct([a, b]), c])
    right = coproduct([a, coproduct([b, c])])
    flat = coproduct([a, b, c])
    for other in (left, right):
        assert other.h1 == flat.h1
        assert sorted(
            tuple((g, e) for g, e in rel) for rel in other.relators
        ) == sorted(tuple((g, e) for g, e in rel) for rel in flat.relators)
        assert [f.kind for f in other.factors] == [f.kind for f in flat.factors]
        assert [f.q for f in other.factors] == [f.q for f in flat.factors]


def test_eval_word_examples():
    Z9 = PrimePower(3, 2)
    shape = UniShape(2, Z9)
    pres = demushkin(19, 3)
    eye = UniMatrix.identity(shape)
    A = UniMatrix.elementary(shape, 1, 2)
    h = Hom(pres, shape, (eye, A))  # x1 -> I, x2 -> A
    assert eval_word(h, ()) == eye
    assert eval_word(h, pres.relators[0]) == eye
    assert is_hom(h).ok

    pres10 = demushkin(10, 3)
    B = UniMatrix.elementary(shape, 2, 3)
    h2 = Hom(pres10, shape, (B, A))  # x1 -> I+E23, x2 -> I+E12
    defect = eval_word(h2, pres10.relators[0])
    assert defect == UniMatrix.elementary(shape, 1, 3)
    report = is_hom(h2)
    assert not report.ok
    assert report.relator_defects[0][2] == UniMatrix.elementary(shape, 1, 3)


def test_eval_word_is_multiplicative():
    rng = random.Random(9)
    Z9 = PrimePower(3, 2)
    shape = UniShape(3, Z9)
    pres = free(3, 3)
    mats = []
    for _ in range(3):
        entries = {
            (i, j): rng.randrange(9) for i in range(1, 5) for j in range(i + 1, 5)
        }
        mats.append(UniMatrix.from_entries(shape, entries))
    h = Hom(pres, shape, tuple(mats))
    for _ in range(30):
        w1 = tuple((rng.randrange(3), rng.randint(-5, 5)) for _ in range(rng.randrange(4)))
        w2 = tuple((rng.randrange(3), rng.randint(-5, 5)) for _ in range(rng.randrange(4)))
        assert eval_word(h, w1 + w2) == compose(eval_word(h, w1), eval_word(h, w2))


def test_eval_word_unknown_generator():
    Z9 = PrimePower(3, 2)
    shape = UniShape(2, Z9)
    h = Hom(free(1, 3), shape, (UniMatrix.identity(shape),))
    with pytest.raises(KeyError):
        eval_word(h, ((3, 1),))


def test_huge_q_round_trip():
    q = 1 + 2 * 3**40
    pres = demushkin(q, 3)
    assert pres.factors[0].level == 40
    data = presentation_to_json(pres)
    # big exponents serialize as strings
    blob = json.dumps(data)
    assert f'"{-q}"' in blob or f'"-{q}"' in blob
    back = presentation_from_json(json.loads(blob))
    assert back.relators == pres.relators
    assert back.factors[0].q == q


def test_presentation_json_round_trip():
    cop = coproduct([demushkin(19, 3), free(2, 3), demushkin(37, 3)])
    data = presentation_to_json(cop)
    back = presentation_from_json(data)
    assert back.generators == cop.generators
    assert back.relators == cop.relators
    assert [f.kind for f in back.factors] == [f.kind for f in cop.factors]
    assert [f.start for f in back.factors] == [f.start for f in cop.factors]


def test_from_json_rejects_malformed_demushkin():
    data = {
        "p": 3,
        "generators": ["x1", "x2"],
        "relators": [[["x1", 1], ["x2", 1]]],
        "factors": [{"kind": "demushkin", "q": "19"}],
    }
    with pytest.raises(ValueError):
        presentation_from_json(data)
