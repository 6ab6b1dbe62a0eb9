import copy
import json
import random

import numpy as np
import pytest

from ppg.rings import PrimePower
from ppg.unipotent import UniMatrix, UniShape, is_generating
from ppg.presentations import Hom, coproduct, demushkin, free, is_hom
from ppg.massey import (
    CharacterTuple,
    DefiningSystem,
    MasseyProblem,
    MasseyWitness,
    NoSurjectiveTupleError,
    Obstruction,
    PreconditionCupError,
    RankTooLargeError,
    assemble,
    canonical_characters,
    cup_chain_ok,
    defining_system,
    factor_presentation,
    full_rank_surjection,
    lift_factor,
    strong_massey_lift,
    verify_witness,
    witness_from_json,
    witness_to_json,
)
from oracles import u3_relator_class_table

Z9 = PrimePower(3, 2)
SHAPE2 = UniShape(2, Z9)


def test_cup_chain_examples():
    cop = coproduct([demushkin(19, 3), demushkin(37, 3)])
    cross = CharacterTuple.make([[0, 1, 0, 0], [0, 0, 0, 1]], 3)
    assert cup_chain_ok(cop, cross) == (True, None)

    single = demushkin(19, 3)
    sigma_tau = CharacterTuple.make([[0, 1], [1, 0]], 3)
    ok, at = cup_chain_ok(single, sigma_tau)
    assert not ok and at == 0

    sigma_sigma = CharacterTuple.make([[0, 1], [0, 1]], 3)
    assert cup_chain_ok(single, sigma_sigma) == (True, None)


def test_lift_factor_examples():
    # q=19: targets x2 -> (1,1), x1 -> (0,0); the canonical base already works
    hom = lift_factor(demushkin(19, 3), [(0, 0), (1, 1)], SHAPE2)
    assert isinstance(hom, Hom)
    assert hom.images[1] == UniMatrix.from_entries(SHAPE2, {(1, 2): 1, (2, 3): 1})
    assert hom.images[0] == UniMatrix.identity(SHAPE2)
    assert is_hom(hom).ok

    # q=10: any superdiagonal re-lift works since B^9 = I in U_3(Z/9)
    hom = lift_factor(demushkin(10, 3), [(1, 1), (1, 1)], SHAPE2)
    assert isinstance(hom, Hom) and is_hom(hom).ok

    # q=4 at m=2: level 1 < m, obstructed at the first diagonal
    obs = lift_factor(demushkin(4, 3), [(1, 1), (1, 1)], SHAPE2)
    assert isinstance(obs, Obstruction)
    assert obs.level == 1
    assert obs.defect == (6, 6)  # -3b = 6 (mod 9) for every b = 1 (mod 3)
    assert obs.conclusive


def test_lift_factor_free_block():
    shape = UniShape(3, Z9)
    hom = lift_factor(free(2, 3), [(1, 0, 2), (0, 1, 1)], shape)
    assert isinstance(hom, Hom)
    assert hom.images[0].strict_upper() == [1, 0, 0, 0, 0, 2]
    assert is_hom(hom).ok


def test_assemble_examples():
    F3 = PrimePower(3, 1)
    shape = UniShape(2, F3)
    cop = coproduct([demushkin(19, 3), demushkin(37, 3)])
    f1 = factor_presentation(cop, cop.factors[0])
    f2 = factor_presentation(cop, cop.factors[1])
    eye = UniMatrix.identity(shape)
    rho1 = Hom(f1, shape, (eye, UniMatrix.elementary(shape, 1, 2)))
    rho2 = Hom(f2, shape, (eye, UniMatrix.elementary(shape, 2, 3)))
    glued = assemble(cop, [rho1, rho2])
    assert is_generating(glued.images)
    assert is_hom(glued).ok
    # restriction to each factor agrees with the factor hom
    for fac, rho in zip(cop.factors, (rho1, rho2)):
        for local, gidx in enumerate(fac.gen_indices):
            assert glued.images[gidx] == rho.images[local]
    # identity-valued homs assemble to the trivial hom
    triv = assemble(cop, [Hom(f1, shape, (eye, eye)), Hom(f2, shape, (eye, eye))])
    assert all(img == eye for img in triv.images)


def test_strong_massey_lift_two_factor():
    cop = coproduct([demushkin(19, 3), demushkin(37, 3)])
    chis = CharacterTuple.make([[0, 1, 0, 0], [0, 0, 0, 1]], 3)
    w = strong_massey_lift(cop, chis, 2)
    assert isinstance(w, MasseyWitness)
    assert verify_witness(w).all_pass
    assert is_generating(w.hom.images)


def test_strong_massey_lift_four_factor_n8():
    cop = coproduct([demushkin(q, 3) for q in (19, 37, 73, 109)])
    chis = canonical_characters(cop, 8)
    w = strong_massey_lift(cop, chis, 2)
    assert isinstance(w, MasseyWitness)
    report = verify_witness(w)
    assert report.all_pass
    rank_check = [c for c in report.checks if c["check"] == "frattini_rank"][0]
    assert rank_check["value"] == 8 and rank_check["surjective"]


def test_strong_massey_lift_obstruction():
    obs = strong_massey_lift(demushkin(4, 3), CharacterTuple.make([[1, 1], [1, 1]], 3), 2)
    assert isinstance(obs, Obstruction)
    assert obs.level == 1 and obs.conclusive


def test_strong_massey_lift_cup_precondition():
    with pytest.raises(PreconditionCupError):
        strong_massey_lift(demushkin(19, 3), CharacterTuple.make([[0, 1], [1, 0]], 3), 2)


def test_full_rank_surjection_examples():
    # k1=4, k2=0, m=2: the U_9(Z/9) surjection of the arithmetic example
    cop = coproduct([demushkin(q, 3) for q in (19, 37, 73, 109)])
    w = full_rank_surjection(cop, 8, 2)
    assert w.problem.shape.size == 9
    assert verify_witness(w).all_pass
    assert is_generating(w.hom.images)

    # k1=1, k2=0, n=2=h1: not RankTooLarge, but no surjective tuple exists
    with pytest.raises(NoSurjectiveTupleError):
        full_rank_surjection(demushkin(19, 3), 2, 1)

    # k1=0, k2=3, n=3: free factors lift anything
    w = full_rank_surjection(coproduct([free(1, 3)] * 3), 3, 2)
    assert verify_witness(w).all_pass

    with pytest.raises(RankTooLargeError):
        full_rank_surjection(coproduct([demushkin(19, 3), free(1, 3)]), 4, 2)


def test_full_rank_surjection_mixed_factors():
    cop = coproduct([demushkin(19, 3), free(1, 3), demushkin(37, 3)])
    assert cop.h1 == 5
    w = full_rank_surjection(cop, 5, 2)
    assert verify_witness(w).all_pass
    assert is_generating(w.hom.images)


def test_defining_system_examples():
    # free presentations lift any chis
    ds = defining_system(coproduct([free(2, 3)]), CharacterTuple.make([[1, 0], [0, 1], [1, 1]], 3))
    assert isinstance(ds, DefiningSystem)

    # n=3 cross-factor chis on a two-factor coproduct
    cop = coproduct([demushkin(19, 3), demushkin(37, 3)])
    chis = CharacterTuple.make([[0, 1, 0, 0], [0, 0, 0, 1], [1, 0, 0, 0]], 3)
    assert isinstance(defining_system(cop, chis), DefiningSystem)

    # a failing consecutive cup obstructs at level 2
    bad = CharacterTuple.make([[0, 1, 0, 0], [1, 0, 0, 0], [0, 0, 1, 0]], 3)
    obs = defining_system(cop, bad)
    assert isinstance(obs, Obstruction) and obs.level == 2


def test_defining_agrees_with_cup_chain():
    rng = random.Random(77)
    cop = coproduct([demushkin(19, 3), demushkin(37, 3)])
    for _ in range(40):
        chis = CharacterTuple.make(
            [[rng.randrange(3) for _ in range(4)] for _ in range(3)], 3
        )
        ok, _ = cup_chain_ok(cop, chis)
        result = defining_system(cop, chis)
        assert isinstance(result, DefiningSystem) == ok


def test_vanishing_implies_defined():
    rng = random.Random(88)
    cop = coproduct([demushkin(19, 3), demushkin(37, 3), free(1, 3)])
    found = 0
    while found < 15:
        chis = CharacterTuple.make(
            [[rng.randrange(3) for _ in range(5)] for _ in range(3)], 3
        )
        if not cup_chain_ok(cop, chis)[0]:
            continue
        found += 1
        w = strong_massey_lift(cop, chis, 1)
        assert isinstance(w, MasseyWitness)
        assert isinstance(defining_system(cop, chis), DefiningSystem)


def test_guarantee_direction_randomized():
    # level >= m factors plus cup-compatible chis must always lift
    rng = random.Random(4242)
    qs = {3: {1: [4, 7, 13], 2: [19, 37, 73]}, 5: {1: [6, 11], 2: [26, 101]}}
    trials = 0
    for p in (3, 5):
        for m in (1, 2):
            done = 0
            while done < 8:
                n = rng.randrange(2, 6)
                parts = []
                for _ in range(rng.randrange(1, 4)):
                    if rng.random() < 0.7:
                        parts.append(demushkin(rng.choice(qs[p][m]), p))
                    else:
                        parts.append(free(rng.randrange(1, 3), p))
                pres = coproduct(parts)
                d = len(pres.generators)
                chis = CharacterTuple.make(
                    [[rng.randrange(p) for _ in range(d)] for _ in range(n)], p
                )
                if not cup_chain_ok(pres, chis)[0]:
                    continue
                done += 1
                trials += 1
                w = strong_massey_lift(pres, chis, m)
                assert isinstance(w, MasseyWitness), (p, m, n, w)
                assert verify_witness(w).all_pass
    assert trials == 32


def test_oracle_equivalence_small():
    # acceptance criterion 4 runs the full grid; spot-check here
    for p, m, q in [(3, 1, 4), (3, 2, 10), (2, 2, 13)]:
        shape = UniShape(2, PrimePower(p, m))
        oracle = u3_relator_class_table(q, p, m)
        for (ca, cb), expected in sorted(oracle.items()):
            got = lift_factor(demushkin(q, p), [cb, ca], shape)
            assert (not isinstance(got, Obstruction)) == expected


def test_verify_witness_hand_built():
    pres = demushkin(19, 3)
    chis = CharacterTuple.make([[0, 1], [0, 1]], 3)
    a = UniMatrix.from_entries(SHAPE2, {(1, 2): 1, (2, 3): 1})
    hom = Hom(pres, SHAPE2, (UniMatrix.identity(SHAPE2), a))
    w = MasseyWitness(
        MasseyProblem(pres, chis, SHAPE2), hom, (), {"budget": 0}
    )
    report = verify_witness(w)
    assert report.all_pass


def _genuine_witness(witness):
    """Independent validity check: plain-python relator evaluation, mod-p
    superdiagonal congruences, and the Frattini-rank comparison."""
    from oracles import mat_mul_plain, mat_pow_plain, mat_inv_plain
    from ppg.rings import fp_rank
    from ppg.unipotent import exponent_bound

    pres = witness.problem.presentation
    shape = witness.problem.shape
    p, mod, size = shape.ring.p, shape.ring.modulus, shape.size
    mats = [img.array.tolist() for img in witness.hom.images]
    eye = [[1 if i == j else 0 for j in range(size)] for i in range(size)]
    bound = exponent_bound(shape)
    for rel in pres.relators:
        val = eye
        for g, e in rel:
            val = mat_mul_plain(val, mat_pow_plain(mats[g], e % bound, mod), mod)
        if val != eye:
            return False
    chis = witness.problem.chis.chis
    for u in range(len(chis)):
        for g in range(len(mats)):
            if mats[g][u][u + 1] % p != chis[u][g]:
                return False
    phi_rows = [[mats[g][u][u + 1] % p for u in range(shape.n)] for g in range(len(mats))]
    return fp_rank(phi_rows, p) == fp_rank([list(c) for c in chis], p)


def test_verify_witness_detects_perturbations():
    # Perturbing an image entry either breaks a check, or (center-column
    # shifts are central gauge) yields another genuinely valid witness; the
    # verifier's verdict must match the independent oracle either way, and
    # non-central perturbations must actually get caught.
    rng = random.Random(99)
    cop = coproduct([demushkin(19, 3), demushkin(37, 3)])
    w = full_rank_surjection(cop, 4, 2)
    assert verify_witness(w).all_pass
    size = w.problem.shape.size
    mod = w.problem.shape.ring.modulus
    caught_superdiag = caught_deep = missed_superdiag = 0
    for _ in range(100):
        gidx = rng.randrange(len(w.hom.images))
        i = rng.randrange(size - 1)
        j = rng.randrange(i + 1, size)
        arr = np.array(w.hom.images[gidx].array)
        arr[i, j] = (arr[i, j] + 1) % mod
        images = list(w.hom.images)
        images[gidx] = UniMatrix(w.problem.shape, arr)
        perturbed = MasseyWitness(
            w.problem,
            Hom(cop, w.problem.shape, tuple(images)),
            w.transcript,
            w.solver,
        )
        verdict = verify_witness(perturbed).all_pass
        assert verdict == _genuine_witness(perturbed)
        if not verdict:
            if j == i + 1:
                caught_superdiag += 1
            else:
                caught_deep += 1
        elif j == i + 1:
            missed_superdiag += 1
    # a superdiagonal bump always breaks its congruence
    assert missed_superdiag == 0 and caught_superdiag > 0 and caught_deep > 0


def test_witness_transcript_reproducible():
    cop = coproduct([demushkin(19, 3), demushkin(37, 3)])
    w = full_rank_surjection(cop, 4, 2)
    report = verify_witness(w)
    assert report.checks == w.transcript


def test_witness_json_round_trip():
    cop = coproduct([demushkin(19, 3), demushkin(37, 3), free(1, 3)])
    w = full_rank_surjection(cop, 5, 2)
    data = witness_to_json(w)
    blob = json.dumps(data, sort_keys=True)
    back = witness_from_json(json.loads(blob))
    assert back.hom.images == w.hom.images
    assert back.problem.chis == w.problem.chis
    assert verify_witness(back).all_pass
