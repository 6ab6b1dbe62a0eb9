"""Finitely presented pro-p group models: free and Demushkin factors, coproducts.

A presentation holds a prime p, named generators, relator words, and (when the
group is built from tagged factors) a partition of the generators into blocks
tagged Free or Demushkin.  Words are tuples of (generator_index, exponent)
pairs with 0-based indices; exponents are exact Python integers, so the
Demushkin parameter q may be of cryptographic size.

The tame Demushkin factor of parameter q is the rank-2 one-relator group

    < x2, x1 | x2 x1 x2^-1 x1^-q >,      q = 1 (mod p),

with level v_p(q - 1); level >= m puts it in the class the lifting engine
guarantees.  Coproducts concatenate generators and relators factor by factor,
which is exactly what the universal property needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .rings import valuation
from .unipotent import UniMatrix, UniShape, compose, power

__all__ = [
    "Word",
    "Factor",
    "Presentation",
    "Hom",
    "HomReport",
    "NotTameError",
    "PrimeMismatchError",
    "demushkin",
    "free",
    "coproduct",
    "eval_word",
    "is_hom",
    "word_to_json",
    "word_from_json",
    "presentation_to_json",
    "presentation_from_json",
]

Word = tuple  # tuple[(gen_index, exponent), ...]


class NotTameError(ValueError):
    """q is not congruent to 1 mod p, so there is no tame Demushkin factor."""


class PrimeMismatchError(ValueError):
    """Coproduct factors must share the same prime p."""


@dataclass(frozen=True)
class Factor:
    """A tagged generator block: kind 'free' or 'demushkin'."""

    kind: str
    start: int           # index of the first generator of the block
    ngens: int
    relator_indices: tuple = ()
    q: Optional[int] = None
    level: Optional[int] = None

    @property
    def gen_indices(self) -> range:
        return range(self.start, self.start + self.ngens)


@dataclass(frozen=True)
class Presentation:
    p: int
    generators: tuple
    relators: tuple
    factors: Optional[tuple] = None

    def __post_init__(self):
        names = set(self.generators)
        if len(names) != len(self.generators):
            raise ValueError("duplicate generator names")
        for rel in self.relators:
            for g, _ in rel:
                if not 0 <= g < len(self.generators):
                    raise ValueError(f"relator references unknown generator {g}")

    @property
    def h1(self) -> int:
        """Generator rank of the (minimal) presentation."""
        return len(self.generators)

    def gen_index(self, name: str) -> int:
        try:
            return self.generators.index(name)
        except ValueError:
            raise KeyError(f"unknown generator {name!r}") from None


def demushkin(q: int, p: int) -> Presentation:
    """The rank-2 tame Demushkin presentation < x2, x1 | x2 x1 x2^-1 x1^-q >."""
    if q < 2:
        raise ValueError("q must be >= 2")
    if q % p != 1:
        raise NotTameError(f"q = {q} is not 1 mod {p}")
    level = valuation(q - 1, p)
    relator = ((1, 1), (0, 1), (1, -1), (0, -q))
    factor = Factor("demushkin", start=0, ngens=2, relator_indices=(0,), q=q, level=level)
    return Presentation(p, ("x1", "x2"), (relator,), (factor,))


def free(d: int, p: int) -> Presentation:
    """The free pro-p presentation on d generators."""
    if d < 1:
        raise ValueError("free rank must be >= 1")
    factor = Factor("free", start=0, ngens=d)
    return Presentation(p, tuple(f"x{i+1}" for i in range(d)), (), (factor,))


def coproduct(parts: Sequence[Presentation]) -> Presentation:
    """Disjoint union of generators and relators with factor tags preserved.

    Generators are relabelled x<factor>_<position>.  The resulting generator
    order is the block order under which mild certificates of the factors
    assemble into a mild certificate of the coproduct.
    """
    parts = list(parts)
    if not parts:
        raise ValueError("coproduct needs at least one factor")
    p = parts[0].p
    if any(q.p != p for q in parts):
        raise PrimeMismatchError("all factors must share the same p")
    if any(q.factors is None for q in parts):
        raise ValueError("coproduct requires factor-tagged presentations")
    gens = []
    relators = []
    factors = []
    for part in parts:
        offset = len(gens)
        rel_offset = len(relators)
        for rel in part.relators:
            relators.append(tuple((g + offset, e) for g, e in rel))
        for fac in part.factors:
            factors.append(
                Factor(
                    fac.kind,
                    start=fac.start + offset,
                    ngens=fac.ngens,
                    relator_indices=tuple(r + rel_offset for r in fac.relator_indices),
                    q=fac.q,
                    level=fac.level,
                )
            )
        gens.extend(part.generators)
    names = []
    for k, fac in enumerate(factors):
        for j in range(fac.ngens):
            names.append(f"x{k+1}_{j+1}")
    return Presentation(p, tuple(names), tuple(relators), tuple(factors))


@dataclass(frozen=True)
class Hom:
    """Generator images in U_{n+1}(Z/p^m); relator checks live in is_hom."""

    source: Presentation
    shape: UniShape
    images: tuple

    def __post_init__(self):
        if len(self.images) != len(self.source.generators):
            raise ValueError("one image per generator required")
        for img in self.images:
            if img.shape != self.shape:
                raise ValueError("image shape mismatch")

    def image_of(self, name: str) -> UniMatrix:
        return self.images[self.source.gen_index(name)]


def eval_word(h: Hom, word: Word) -> UniMatrix:
    """Product of generator images, with binary powering for the exponents."""
    out = UniMatrix.identity(h.shape)
    for g, e in word:
        if not 0 <= g < len(h.images):
            raise KeyError(f"unknown generator index {g}")
        out = compose(out, power(h.images[g], e))
    return out


@dataclass(frozen=True)
class HomReport:
    ok: bool
    relator_defects: tuple  # (index, holds, defect UniMatrix)


def is_hom(h: Hom) -> HomReport:
    """Check every relator evaluates to the identity; report per-relator defects."""
    eye = UniMatrix.identity(h.shape)
    rows = []
    ok = True
    for idx, rel in enumerate(h.source.relators):
        value = eval_word(h, rel)
        holds = value == eye
        ok = ok and holds
        rows.append((idx, holds, value))
    return HomReport(ok, tuple(rows))


# ---------------------------------------------------------------------------
# JSON wire format
# ---------------------------------------------------------------------------


def word_to_json(pres: Presentation, word: Word) -> list:
    return [[pres.generators[g], _int_out(e)] for g, e in word]


def word_from_json(pres: Presentation, data) -> Word:
    return tuple((pres.gen_index(name), int(e)) for name, e in data)


def _int_out(v: int):
    return str(v) if abs(v) >= 2**53 else v


def presentation_to_json(pres: Presentation) -> dict:
    out = {
        "p": pres.p,
        "generators": list(pres.generators),
        "relators": [word_to_json(pres, rel) for rel in pres.relators],
    }
    if pres.factors is not None:
        facs = []
        for fac in pres.factors:
            if fac.kind == "demushkin":
                facs.append({"kind": "demushkin", "q": _int_out(fac.q)})
            else:
                facs.append({"kind": "free", "rank": fac.ngens})
        out["factors"] = facs
    return out


def presentation_from_json(data: dict) -> Presentation:
    p = int(data["p"])
    generators = tuple(data["generators"])
    skeleton = Presentation(p, generators, ())
    relators = tuple(word_from_json(skeleton, rel) for rel in data.get("relators", []))
    factors = None
    if "factors" in data:
        factors = []
        start = 0
        rel_idx = 0
        for fac in data["factors"]:
            if fac["kind"] == "demushkin":
                q = int(fac["q"])
                if q % p != 1:
                    raise NotTameError(f"q = {q} is not 1 mod {p}")
                expected = ((start + 1, 1), (start, 1), (start + 1, -1), (start, -q))
                if rel_idx >= len(relators) or relators[rel_idx] != expected:
                    raise ValueError(
                        "demushkin block must carry the relator x2 x1 x2^-1 x1^-q"
                    )
                factors.append(
                    Factor(
                        "demushkin",
                        start=start,
                        ngens=2,
                        relator_indices=(rel_idx,),
                        q=q,
                        level=valuation(q - 1, p),
                    )
                )
                start += 2
                rel_idx += 1
            elif fac["kind"] == "free":
                rank = int(fac["rank"])
                factors.append(Factor("free", start=start, ngens=rank))
                start += rank
            else:
                raise ValueError(f"unknown factor kind {fac['kind']!r}")
        if start != len(generators):
            raise ValueError("factor blocks do not cover the generators")
        if rel_idx != len(relators):
            raise ValueError("factor blocks do not cover the relators")
        factors = tuple(factors)
    return Presentation(p, generators, relators, factors)
