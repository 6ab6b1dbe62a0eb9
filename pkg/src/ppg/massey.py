"""Constructive Massey vanishing: lifts, witnesses, and their verification.

Given a coproduct of tagged factors and a character tuple chi with vanishing
consecutive cup products, the engine produces generator images in
U_{n+1}(Z/p^m) whose superdiagonals reduce mod p to chi and whose relators
evaluate to the identity exactly.  Factors lift independently; the universal
property assembles them.

The per-factor solver works along a central filtration of U_{n+1}(Z/p^m):
give the p^l digit of an entry at diagonal offset k the weight k + 2l.
Commutators add weights and p-th powers raise them, so corrections of weight
at least (t+1)/2 are central modulo weight t+1, which makes the finite
difference of the relator word an exact linearization of the stage-t
equations.  Each stage is one solve_affine call; its kernel parameterizes the
re-lifts (superdiagonal lifts within the fixed mod-p class included) that a
depth-first search enumerates, within a deterministic budget, when a deeper
stage turns out to be inconsistent.

Failures come back as Obstruction values carrying the concrete defect and the
unsolvable linearized system.  For shapes small enough to enumerate
(p^m <= 9, n <= 2) an exhaustive search settles the question definitively;
beyond that a budget-exhausted Obstruction is reported as inconclusive rather
than as a disproof.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .presentations import (
    Factor,
    Hom,
    Presentation,
    is_hom,
    presentation_from_json,
    presentation_to_json,
)
from .rings import LinSystem, PrimePower, fp_rank, solve_affine
from .magnus import cup_value
from .unipotent import UniMatrix, UniShape, exponent_bound, is_generating, phi_m

__all__ = [
    "CharacterTuple",
    "MasseyProblem",
    "MasseyWitness",
    "Obstruction",
    "DefiningSystem",
    "PreconditionCupError",
    "RankTooLargeError",
    "NoSurjectiveTupleError",
    "DEFAULT_BUDGET",
    "cup_chain_ok",
    "factor_presentation",
    "lift_factor",
    "assemble",
    "strong_massey_lift",
    "full_rank_surjection",
    "defining_system",
    "verify_witness",
    "witness_to_json",
    "witness_from_json",
]

DEFAULT_BUDGET = 512
MAX_NODES = 20_000
# Backtracking gives up early once the same inconsistent stage keeps coming
# back unchanged, or after too many distinct failures.  Giving up early is
# sound: callers fall through to exhaustive enumeration or report the
# obstruction as inconclusive.
FAILURE_SIGNATURE_LIMIT = 4
MAX_FAILURES = 256


class PreconditionCupError(ValueError):
    """A consecutive cup product is nonzero; the lift is not even attempted."""


class RankTooLargeError(ValueError):
    """n exceeds the generator rank h^1 of the coproduct."""


class NoSurjectiveTupleError(ValueError):
    """No chi tuple is simultaneously surjective and cup-chain compatible."""


@dataclass(frozen=True)
class CharacterTuple:
    """An n-tuple of characters, each a value table on the generators."""

    chis: tuple  # n vectors, each a tuple of residues mod p, length d

    @staticmethod
    def make(chis, p: int) -> "CharacterTuple":
        rows = tuple(tuple(int(v) % p for v in chi) for chi in chis)
        if rows and any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("character vectors must share a length")
        return CharacterTuple(rows)

    @property
    def n(self) -> int:
        return len(self.chis)

    @property
    def d(self) -> int:
        return len(self.chis[0]) if self.chis else 0


@dataclass(frozen=True)
class MasseyProblem:
    presentation: Presentation
    chis: CharacterTuple
    shape: UniShape


@dataclass(frozen=True)
class Obstruction:
    """Where and how the lifting failed.

    level is the diagonal offset of the first nonzero defect entry; defect
    holds the offset-level entries of the relator value at the point of
    failure.  conclusive is True only when exhaustive enumeration confirmed
    that no lift exists.
    """

    level: int
    defect: tuple
    cokernel: str
    budget_consumed: int
    factor_index: Optional[int] = None
    conclusive: bool = False


@dataclass(frozen=True)
class MasseyWitness:
    problem: MasseyProblem
    hom: Hom
    transcript: tuple  # verification checks, JSON-ready dicts
    solver: dict


@dataclass(frozen=True)
class DefiningSystem:
    """A lift of theta_chi to U_{n+1}(F_p)/Z: images are recorded in U with the
    relator defects confined to the center."""

    problem: MasseyProblem
    hom: Hom


def cup_chain_ok(pres: Presentation, chis: CharacterTuple):
    """All consecutive cup products vanish?  Returns (ok, first_failure_index)."""
    for u in range(chis.n - 1):
        values = cup_value(chis.chis[u], chis.chis[u + 1], pres)
        if any(values):
            return False, u
    return True, None


def factor_presentation(pres: Presentation, fac: Factor) -> Presentation:
    """The factor as a standalone presentation (generator order preserved)."""
    gens = tuple(pres.generators[i] for i in fac.gen_indices)
    rels = []
    for ridx in fac.relator_indices:
        rels.append(tuple((g - fac.start, e) for g, e in pres.relators[ridx]))
    sub = Factor(fac.kind, 0, fac.ngens, tuple(range(len(rels))), fac.q, fac.level)
    return Presentation(pres.p, gens, tuple(rels), (sub,))


# ---------------------------------------------------------------------------
# the staged solver
# ---------------------------------------------------------------------------


def _lambda(k: int, t: int) -> int:
    # smallest digit l with weight k + 2l at least (t+1)/2, so that stage-t
    # finite differences are exact
    lam = max(0, -(-(t + 1 - 2 * k) // 4))
    if k == 1:
        lam = max(lam, 1)  # the mod-p superdiagonal class is pinned
    return lam


def _relator_evaluator(word, shape: UniShape):
    """Compile a relator word into an evaluator on raw arrays.

    Negative and oversized exponents are folded into [0, exponent bound),
    which leaves the value unchanged.
    """
    mod = shape.ring.modulus
    bound = exponent_bound(shape)
    steps = [(g, e % bound) for g, e in word]
    size = shape.size
    eye = np.eye(size, dtype=np.int64)

    def _pow(a, e):
        out = eye.copy()
        base = a
        while e > 0:
            if e & 1:
                out = (out @ base) % mod
            base = (base @ base) % mod
            e >>= 1
        return out

    def evaluate(mats):
        w = eye.copy()
        for g, e in steps:
            w = (w @ _pow(mats[g], e)) % mod
        return w

    return evaluate


@dataclass
class _SolveOutcome:
    mats: Optional[list]
    obstruction: Optional[Obstruction]
    backtracks: int
    nodes: int


def _solve_relations(evaluators, mats, shape: UniShape, budget: int, drop_center: bool):
    """Drive every relator value to the identity, stage by stage.

    evaluators: compiled relator evaluators taking the list of matrices.
    mats: working int64 arrays with the superdiagonal base lift in place.
    Returns a _SolveOutcome; on failure the obstruction describes the first
    inconsistent stage on the depth-first path.
    """
    ring = shape.ring
    p, m, mod = ring.p, ring.m, ring.modulus
    n, size = shape.n, shape.size
    offsets = [k for k in range(1, n + 1) if not (drop_center and k == n)]
    eq_positions = [(k, i) for k in offsets for i in range(size - k)]
    T = n + 2 * (m - 1)

    def defects():
        return [ev(mats) for ev in evaluators]

    def stage_system(t):
        ws = defects()
        rows, rhs = [], []
        for ridx, w in enumerate(ws):
            for k, i in eq_positions:
                if k > t:
                    continue
                c = min(m, (t - k) // 2 + 1)
                scale = p ** (m - c)
                rows.append((ridx, k, i, scale))
                rhs.append((-int(w[i, i + k]) * scale) % mod)
        variables = []
        for mi in range(len(mats)):
            for k in range(1, n + 1):
                if drop_center and k == n:
                    continue
                lam = _lambda(k, t)
                if lam >= m:
                    continue
                for i in range(size - k):
                    variables.append((mi, k, i, lam))
        columns = []
        for mi, k, i, lam in variables:
            saved = int(mats[mi][i, i + k])
            mats[mi][i, i + k] = (saved + p**lam) % mod
            ws2 = defects()
            mats[mi][i, i + k] = saved
            col = []
            for (ridx, kk, ii, scale) in rows:
                diff = (int(ws2[ridx][ii, ii + kk]) - int(ws[ridx][ii, ii + kk])) % mod
                col.append(diff * scale % mod)
            columns.append(col)
        matrix = [[columns[j][r] for j in range(len(variables))] for r in range(len(rows))]
        return ws, rows, rhs, variables, matrix

    def first_defect_info(ws, t):
        for k in range(1, n + 1):
            if drop_center and k == n:
                continue
            if k > t:
                continue
            c = min(m, (t - k) // 2 + 1)
            for ridx, w in enumerate(ws):
                entries = tuple(int(w[i, i + k]) for i in range(size - k))
                if any(e % p**c for e in entries):
                    return k, entries
        # fall back to the shallowest offset carrying any defect
        for k in range(1, n + 1):
            for ridx, w in enumerate(ws):
                entries = tuple(int(w[i, i + k]) for i in range(size - k))
                if any(entries):
                    return k, entries
        return 1, ()

    def candidates(solution):
        mod_ = mod
        yield list(solution.particular)
        kernel = [list(v) for v in solution.kernel_basis]
        if not kernel:
            return
        for count in itertools.count(1):
            # lexicographic counting over kernel coordinates
            coeffs = []
            c = count
            for _ in kernel:
                coeffs.append(c % mod_)
                c //= mod_
            if c:
                return
            vec = list(solution.particular)
            for cf, kv in zip(coeffs, kernel):
                if cf:
                    vec = [(x + cf * y) % mod_ for x, y in zip(vec, kv)]
            yield vec

    def apply(variables, delta, sign):
        for (mi, k, i, lam), dv in zip(variables, delta):
            mats[mi][i, i + k] = (mats[mi][i, i + k] + sign * p**lam * dv) % mod

    backtracks = 0
    nodes = 0
    failures = 0
    failure_signatures = {}
    first_obstruction = None
    stack = []  # (t, variables, candidate_iter, applied_delta, tried)
    t = 1
    while t <= T:
        ws, rows, rhs, variables, matrix = stage_system(t)
        solution = solve_affine(LinSystem.build(matrix, rhs, ring)) if rows else None
        if rows and solution is None:
            failures += 1
            sig = (t, tuple(rhs))
            failure_signatures[sig] = failure_signatures.get(sig, 0) + 1
            exhausted = (
                failures > MAX_FAILURES
                or failure_signatures[sig] > FAILURE_SIGNATURE_LIMIT
            )
            if first_obstruction is None:
                level, entries = first_defect_info(ws, t)
                first_obstruction = Obstruction(
                    level=level,
                    defect=entries,
                    cokernel=(
                        f"stage {t}: {len(rows)}x{len(variables)} linearized system "
                        f"over Z/{p}^{m} is inconsistent"
                    ),
                    budget_consumed=backtracks,
                )
            # backtrack
            while stack and not exhausted:
                bt, bvars, bit, bdelta, btried = stack.pop()
                apply(bvars, bdelta, -1)
                if btried >= budget or nodes >= MAX_NODES:
                    continue
                nxt = next(bit, None)
                if nxt is not None:
                    backtracks += 1
                    nodes += 1
                    apply(bvars, nxt, +1)
                    stack.append((bt, bvars, bit, nxt, btried + 1))
                    t = bt + 1
                    break
            else:
                obs = first_obstruction
                return _SolveOutcome(None, Obstruction(
                    obs.level, obs.defect, obs.cokernel, backtracks
                ), backtracks, nodes)
            continue
        if rows:
            it = candidates(solution)
            delta = next(it)
            nodes += 1
            apply(variables, delta, +1)
            stack.append((t, variables, it, delta, 1))
        t += 1
    return _SolveOutcome([x.copy() for x in mats], None, backtracks, nodes)


def _base_arrays(targets: Sequence, shape: UniShape):
    p = shape.ring.p
    out = []
    for vec in targets:
        arr = np.eye(shape.size, dtype=np.int64)
        for u, value in enumerate(vec):
            arr[u, u + 1] = int(value) % p
        out.append(arr)
    return out


def _exhaustive_demushkin(q: int, targets, shape: UniShape):
    """Enumerate all pairs with the prescribed mod-p superdiagonal classes.

    Only for p^m <= 9 and n <= 2.  Returns (A, B) arrays or None.
    """
    ring = shape.ring
    p, mod, size = ring.p, ring.modulus, shape.size
    lifts_per = mod // p

    def stack_for(vec):
        frames = []
        positions = [(i, j) for i in range(size) for j in range(i + 1, size)]
        choices = []
        for (i, j) in positions:
            if j == i + 1:
                base = int(vec[i]) % p
                choices.append([base + p * l for l in range(lifts_per)])
            else:
                choices.append(list(range(mod)))
        for combo in itertools.product(*choices):
            arr = np.eye(size, dtype=np.int64)
            for (i, j), v in zip(positions, combo):
                arr[i, j] = v
            frames.append(arr)
        return np.stack(frames)

    As = stack_for(targets[1])  # x2 images
    Bs = stack_for(targets[0])  # x1 images
    q_red = q % exponent_bound(shape)
    table = _kernels.relator_table(As, Bs, q_red, mod)
    hits = np.argwhere(table)
    if len(hits) == 0:
        return None
    ia, ib = hits[0]
    return As[ia], Bs[ib]


def lift_factor(
    factor_pres: Presentation,
    targets: Sequence,
    shape: UniShape,
    budget: int = DEFAULT_BUDGET,
):
    """Lift one factor: generator images with prescribed mod-p superdiagonals.

    targets holds one vector in F_p^n per generator of the factor.  Free
    blocks lift by the canonical superdiagonal base (least nonnegative
    residues, zeros elsewhere).  Demushkin blocks run the staged solver; on
    failure, small shapes fall back to exhaustive enumeration so that the
    returned Obstruction is conclusive.
    """
    if factor_pres.factors is None or len(factor_pres.factors) != 1:
        raise ValueError("lift_factor wants a single tagged factor")
    fac = factor_pres.factors[0]
    if len(targets) != fac.ngens:
        raise ValueError("one superdiagonal target per generator required")
    mats = _base_arrays(targets, shape)
    if fac.kind == "free":
        images = tuple(UniMatrix(shape, a) for a in mats)
        return Hom(factor_pres, shape, images)

    evaluators = [
        _relator_evaluator(factor_pres.relators[r], shape) for r in fac.relator_indices
    ]
    outcome = _solve_relations(evaluators, mats, shape, budget, drop_center=False)
    if outcome.mats is not None:
        images = tuple(UniMatrix(shape, a) for a in outcome.mats)
        hom = Hom(factor_pres, shape, images)
        report = is_hom(hom)
        if not report.ok:
            raise AssertionError("solver returned a non-homomorphism")
        return hom
    obstruction = outcome.obstruction
    ring = shape.ring
    if fac.kind == "demushkin" and shape.n <= 2 and ring.modulus <= 9:
        found = _exhaustive_demushkin(fac.q, targets, shape)
        if found is not None:
            A, B = found
            images = (UniMatrix(shape, B), UniMatrix(shape, A))
            hom = Hom(factor_pres, shape, images)
            if not is_hom(hom).ok:
                raise AssertionError("exhaustive fallback produced a bad pair")
            return hom
        return Obstruction(
            obstruction.level,
            obstruction.defect,
            obstruction.cokernel,
            obstruction.budget_consumed,
            conclusive=True,
        )
    return obstruction


def assemble(pres: Presentation, factor_homs: Sequence[Hom]) -> Hom:
    """Glue factor lifts along the universal property of the coproduct."""
    if pres.factors is None:
        raise ValueError("assemble needs a factor-tagged presentation")
    if len(factor_homs) != len(pres.factors):
        raise ValueError("one Hom per factor required")
    shape = factor_homs[0].shape
    images = [None] * len(pres.generators)
    for fac, hom in zip(pres.factors, factor_homs):
        if hom.shape != shape:
            raise ValueError("factor homs must share the target shape")
        for local, gidx in enumerate(fac.gen_indices):
            images[gidx] = hom.images[local]
    return Hom(pres, shape, tuple(images))


def _verification_checks(pres, chis, hom):
    checks = []
    report = is_hom(hom)
    for idx, holds, _defect in report.relator_defects:
        checks.append({"check": f"relator:{idx}", "pass": bool(holds)})
    p = pres.p
    n = chis.n
    for u in range(n):
        ok = all(
            hom.images[g].entry(u + 1, u + 2) % p == chis.chis[u][g]
            for g in range(len(pres.generators))
        )
        checks.append({"check": f"congruence:u={u+1}", "pass": bool(ok)})
    phi_rows = [phi_m(img) for img in hom.images]
    rank = fp_rank(phi_rows, p)
    chi_rank = fp_rank([list(chi) for chi in chis.chis], p) if chis.chis else 0
    checks.append(
        {
            "check": "frattini_rank",
            "pass": bool(rank == chi_rank),
            "value": int(rank),
            "surjective": bool(rank == n),
        }
    )
    return tuple(checks)


def strong_massey_lift(
    pres: Presentation,
    chis: CharacterTuple,
    m: int,
    budget: int = DEFAULT_BUDGET,
):
    """Lift theta_chi through U_{n+1}(Z/p^m), factor by factor.

    Requires the consecutive cup products to vanish (PreconditionCupError
    otherwise).  Demushkin factors of level >= m are guaranteed to lift; lower
    levels are attempted and may return an Obstruction.
    """
    if pres.factors is None:
        raise ValueError("strong_massey_lift needs a factor-tagged presentation")
    if chis.n < 1:
        raise ValueError("empty character tuple")
    if chis.d != len(pres.generators):
        raise ValueError("character length does not match generator count")
    ok, fail_at = cup_chain_ok(pres, chis)
    if not ok:
        raise PreconditionCupError(f"cup product chi_{fail_at+1} U chi_{fail_at+2} is nonzero")
    shape = UniShape(chis.n, PrimePower(pres.p, m))
    homs = []
    meta = {"budget": budget, "backtracks": 0, "nodes": 0, "exhaustive_used": False}
    for fidx, fac in enumerate(pres.factors):
        sub = factor_presentation(pres, fac)
        targets = [
            tuple(chis.chis[u][g] for u in range(chis.n)) for g in fac.gen_indices
        ]
        result = lift_factor(sub, targets, shape, budget)
        if isinstance(result, Obstruction):
            return Obstruction(
                result.level,
                result.defect,
                result.cokernel,
                result.budget_consumed,
                factor_index=fidx,
                conclusive=result.conclusive,
            )
        homs.append(result)
    hom = assemble(pres, homs)
    problem = MasseyProblem(pres, chis, shape)
    transcript = _verification_checks(pres, chis, hom)
    if not all(c["pass"] for c in transcript):
        raise AssertionError("assembled witness failed self-verification")
    return MasseyWitness(problem, hom, transcript, meta)


def canonical_characters(pres: Presentation, n: int) -> CharacterTuple:
    """The surjective cup-compatible tuple: first duals of every factor, then
    the second duals of the Demushkin factors."""
    if pres.factors is None:
        raise ValueError("needs a factor-tagged presentation")
    d = len(pres.generators)
    firsts, seconds = [], []
    for fac in pres.factors:
        if fac.kind == "demushkin":
            firsts.append(fac.start + 1)  # the x2 (Frobenius) dual
            seconds.append(fac.start)     # the x1 (inertia) dual
        else:
            firsts.extend(fac.gen_indices)
    order = (firsts + seconds)[:n]
    chis = []
    for gidx in order:
        vec = [0] * d
        vec[gidx] = 1
        chis.append(tuple(vec))
    return CharacterTuple.make(chis, pres.p)


def full_rank_surjection(
    pres: Presentation,
    n: int,
    m: int,
    budget: int = DEFAULT_BUDGET,
) -> MasseyWitness:
    """A verified surjection onto U_{n+1}(Z/p^m) for n up to h^1 = 2k_1 + k_2.

    Raises RankTooLargeError when n exceeds h^1 and NoSurjectiveTupleError
    when no chi tuple can be both surjective and cup-chain compatible (the
    single rank-2 Demushkin factor with n = 2: any independent pair has a
    nonzero cup by the antisymmetric pairing).
    """
    if pres.factors is None:
        raise ValueError("needs a factor-tagged presentation")
    if n < 2:
        raise ValueError("n must be >= 2")
    if n > pres.h1:
        raise RankTooLargeError(f"n = {n} exceeds h^1 = {pres.h1}")
    demushkin_count = sum(1 for f in pres.factors if f.kind == "demushkin")
    if len(pres.factors) == 1 and demushkin_count == 1 and n == 2:
        raise NoSurjectiveTupleError(
            "a single rank-2 Demushkin factor pairs any two independent "
            "characters nontrivially, so U_3 is not a quotient"
        )
    chis = canonical_characters(pres, n)
    ok, fail_at = cup_chain_ok(pres, chis)
    if not ok:
        raise NoSurjectiveTupleError(
            f"canonical tuple hits a nonzero cup at position {fail_at+1}"
        )
    witness = strong_massey_lift(pres, chis, m, budget)
    if isinstance(witness, Obstruction):
        raise AssertionError(f"guaranteed lift failed: {witness}")
    if not is_generating(witness.hom.images):
        raise NoSurjectiveTupleError("canonical tuple is not surjective")
    return witness


def defining_system(
    pres: Presentation,
    chis: CharacterTuple,
    budget: int = DEFAULT_BUDGET,
):
    """Lift theta_chi to U_{n+1}(F_p)/Z_{n+1}: is the Massey product defined?

    Runs the same layered solver over F_p with the (1, n+1) constraint
    dropped.  No cup precondition: a failing consecutive cup surfaces as the
    level-2 obstruction.
    """
    if pres.factors is None:
        raise ValueError("defining_system needs a factor-tagged presentation")
    if chis.n < 3:
        raise ValueError("Massey products need n >= 3")
    if chis.d != len(pres.generators):
        raise ValueError("character length does not match generator count")
    shape = UniShape(chis.n, PrimePower(pres.p, 1))
    homs = []
    for fidx, fac in enumerate(pres.factors):
        sub = factor_presentation(pres, fac)
        targets = [
            tuple(chis.chis[u][g] for u in range(chis.n)) for g in fac.gen_indices
        ]
        mats = _base_arrays(targets, shape)
        if fac.kind == "free":
            homs.append(Hom(sub, shape, tuple(UniMatrix(shape, a) for a in mats)))
            continue
        evaluators = [
            _relator_evaluator(sub.relators[r], shape)
            for r in sub.factors[0].relator_indices
        ]
        outcome = _solve_relations(evaluators, mats, shape, budget, drop_center=True)
        if outcome.mats is None:
            obs = outcome.obstruction
            return Obstruction(
                obs.level, obs.defect, obs.cokernel, obs.budget_consumed,
                factor_index=fidx,
            )
        homs.append(Hom(sub, shape, tuple(UniMatrix(shape, a) for a in outcome.mats)))
    hom = assemble(pres, homs)
    # relator values must be central: only the (1, n+1) entry may survive
    for idx, rel in enumerate(pres.relators):
        from .presentations import eval_word

        value = eval_word(hom, rel)
        arr = value.array
        for i in range(shape.size):
            for j in range(i + 1, shape.size):
                if (i, j) != (0, shape.size - 1) and arr[i, j] % shape.ring.p:
                    raise AssertionError(f"relator {idx} defect is not central")
    return DefiningSystem(MasseyProblem(pres, chis, shape), hom)


@dataclass(frozen=True)
class VerificationReport:
    all_pass: bool
    checks: tuple


def verify_witness(w: MasseyWitness) -> VerificationReport:
    """Re-verify a witness from scratch: relators, congruences, Frattini rank.

    Trusts nothing recorded by the solver; failures are report entries, not
    errors.
    """
    checks = _verification_checks(w.problem.presentation, w.problem.chis, w.hom)
    return VerificationReport(all(c["pass"] for c in checks), checks)


# ---------------------------------------------------------------------------
# wire format
# ---------------------------------------------------------------------------


def witness_to_json(w: MasseyWitness) -> dict:
    pres = w.problem.presentation
    shape = w.problem.shape
    return {
        "problem": {
            "presentation": presentation_to_json(pres),
            "chis": [list(chi) for chi in w.problem.chis.chis],
            "p": shape.ring.p,
            "m": shape.ring.m,
            "n": shape.n,
        },
        "images": {
            name: w.hom.images[idx].strict_upper()
            for idx, name in enumerate(pres.generators)
        },
        "transcript": [dict(c) for c in w.transcript],
        "solver": dict(w.solver),
    }


def witness_from_json(data: dict) -> MasseyWitness:
    prob = data["problem"]
    pres = presentation_from_json(prob["presentation"])
    chis = CharacterTuple.make(prob["chis"], pres.p)
    shape = UniShape(int(prob["n"]), PrimePower(int(prob["p"]), int(prob["m"])))
    images = []
    for name in pres.generators:
        if name not in data["images"]:
            raise ValueError(f"missing image for generator {name!r}")
        flat = [int(v) for v in data["images"][name]]
        images.append(UniMatrix.from_strict_upper(shape, flat))
    hom = Hom(pres, shape, tuple(images))
    transcript = tuple(dict(c) for c in data.get("transcript", []))
    return MasseyWitness(MasseyProblem(pres, chis, shape), hom, transcript, dict(data.get("solver", {})))
