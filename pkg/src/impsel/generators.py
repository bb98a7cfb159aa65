"""Instance families: adversarial constructions and seeded random graphs.

The adversarial families share one shape: a designated target vertex 0
collects some number of nominations while every other vertex keeps
in-degree 0 or 1.  The arrangement of the remaining edges is fixed (a
successor chain closing back through vertex 1) so that runs are
reproducible and, for delta >= 2, vertex 0 is the unique maximum.

All generators are pure functions of their arguments; the random families
take an explicit seed and never touch global RNG state.
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass

from .core import MULTI, SINGLE, NominationProfile
from .exact import rks_worst_delta
from .mechanisms import DrawStream, _ceil_isqrt

__all__ = [
    "gen_single_worst",
    "gen_fixed_sample_adversary",
    "gen_sqrt_adversary",
    "gen_bound_stress",
    "gen_random_single",
    "gen_random_multi",
    "GeneratorSpec",
    "FAMILIES",
]


def gen_single_worst(n: int, delta: int) -> NominationProfile:
    """Single-model profile where vertex 0 has in-degree exactly ``delta``.

    Vertices 1..delta nominate 0.  The rest form a chain
    0 -> delta+1 -> ... -> n-1 -> 1 (just 0 -> 1 when delta = n-1), so
    every other vertex has in-degree 0 or 1 and out-degree exactly 1.
    For delta >= 2 vertex 0 is the unique maximum; for delta = 1 the
    profile is a single n-cycle and every vertex ties at in-degree 1.
    """
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    if not 1 <= delta <= n - 1:
        raise ValueError(f"in-degree target {delta} out of range 1..{n - 1}")
    nominees = [0] * n
    if delta == n - 1:
        nominees[0] = 1
    else:
        nominees[0] = delta + 1
        for v in range(delta + 1, n - 1):
            nominees[v] = v + 1
        nominees[n - 1] = 1
    return NominationProfile.single(nominees)


def gen_fixed_sample_adversary(n: int, v: int) -> NominationProfile:
    """Star into ``v``: everyone nominates v, v nominates its successor.

    Against a hard-coded sample {v} the winner is v's nominee, whose
    in-degree is 1 while v sits at n-1, so the gap is n-2.
    """
    if n < 3:
        raise ValueError(f"need at least 3 vertices, got {n}")
    if not 0 <= v < n:
        raise ValueError(f"vertex {v} out of range 0..{n - 1}")
    nominees = [v] * n
    nominees[v] = (v + 1) % n
    return NominationProfile.single(nominees)


def gen_sqrt_adversary(n: int) -> NominationProfile:
    """Worst-case shape with in-degree target ceil(sqrt(n)/2) at vertex 0.

    The square root is taken first, then halved, then rounded up; for
    integer n that equals isqrt(n-1)//2 + 1, which avoids any float
    evaluation near the boundary.
    """
    if n < 4:
        raise ValueError(f"need at least 4 vertices, got {n}")
    delta = math.isqrt(n - 1) // 2 + 1
    return gen_single_worst(n, delta)


def gen_bound_stress(n: int, k: int) -> NominationProfile:
    """Worst-case shape at the in-degree where the k-draw guarantee is tightest."""
    return gen_single_worst(n, rks_worst_delta(n, k))


def gen_random_single(n: int, seed: int) -> NominationProfile:
    """Each vertex nominates one uniformly random other vertex."""
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    stream = DrawStream(seed)
    nominees = []
    for u in range(n):
        r = stream.next_below(n - 1)
        nominees.append(r if r < u else r + 1)
    return NominationProfile.single(nominees)


def gen_random_multi(n: int, p: float, seed: int) -> NominationProfile:
    """Each ordered non-self pair is an edge independently with probability p."""
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    if not 0 <= p <= 1:
        raise ValueError(f"edge probability {p} out of range [0, 1]")
    stream = DrawStream(seed)
    scale = 1 << 53
    cutoff = p * scale
    rows = []
    for u in range(n):
        rows.append(tuple(v for v in range(n) if v != u and stream.next_below(scale) < cutoff))
    return NominationProfile(n, MULTI, tuple(rows))


# family -> (model, allowed params, params that must be present)
FAMILIES: dict[str, tuple[str, frozenset[str], frozenset[str]]] = {
    "single-worst": (SINGLE, frozenset({"delta"}), frozenset()),
    "fixed-sample-adversary": (SINGLE, frozenset({"v"}), frozenset()),
    "star": (SINGLE, frozenset({"v"}), frozenset()),
    "sqrt-adversary": (SINGLE, frozenset(), frozenset()),
    "bound-stress": (SINGLE, frozenset({"k"}), frozenset()),
    "random-single": (SINGLE, frozenset(), frozenset()),
    "random-multi": (MULTI, frozenset({"p"}), frozenset({"p"})),
}

_SEEDED = frozenset({"random-single", "random-multi"})


@dataclass(frozen=True)
class GeneratorSpec:
    """A family name plus its parameters, instantiable at any n.

    Parameters are stored as a sorted tuple of pairs so specs are hashable
    and picklable.  Optional parameters resolve at build time:
    single-worst defaults delta to n-1 (the star into vertex 0),
    bound-stress defaults k to ceil(sqrt(n)), fixed-sample-adversary and
    star default v to 0.
    """

    family: str
    params: tuple[tuple[str, object], ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(
                f"unknown family {self.family!r}; known: {', '.join(sorted(FAMILIES))}"
            )
        _, allowed, required = FAMILIES[self.family]
        params = tuple(sorted((str(key), value) for key, value in self.params))
        object.__setattr__(self, "params", params)
        keys = [key for key, _ in params]
        if len(set(keys)) != len(keys):
            raise ValueError(f"duplicate parameter for family {self.family}")
        for key in keys:
            if key not in allowed:
                raise ValueError(
                    f"family {self.family} does not take parameter {key!r}"
                    + (f"; allowed: {', '.join(sorted(allowed))}" if allowed else "")
                )
        for key in required:
            if key not in keys:
                raise ValueError(f"family {self.family} requires parameter {key!r}")
        if "p" in keys:
            p = self.get("p")
            if not isinstance(p, (int, float)) or isinstance(p, bool) or not 0 <= p <= 1:
                raise ValueError(f"edge probability {p!r} out of range [0, 1]")
        for key in ("delta", "k", "v"):
            if key in keys:
                value = self.get(key)
                if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                    raise ValueError(f"parameter {key} must be a non-negative integer, got {value!r}")

    @classmethod
    def from_mapping(cls, family: str, params: Mapping[str, object] = ()) -> "GeneratorSpec":
        mapping = dict(params)
        return cls(family, tuple(mapping.items()))

    def get(self, key: str, default=None):
        for k, value in self.params:
            if k == key:
                return value
        return default

    @property
    def model(self) -> str:
        return FAMILIES[self.family][0]

    @property
    def needs_seed(self) -> bool:
        return self.family in _SEEDED

    def label(self) -> str:
        if not self.params:
            return self.family
        return self.family + ":" + ",".join(f"{k}={v}" for k, v in self.params)

    def build(self, n: int, instance_seed: int | None = None) -> NominationProfile:
        """Instantiate the family at ``n``; seeded families require a seed."""
        if self.needs_seed:
            if instance_seed is None:
                raise ValueError(f"family {self.family} requires an instance seed")
        elif instance_seed is not None:
            raise ValueError(f"family {self.family} is deterministic; no seed applies")
        if self.family == "single-worst":
            return gen_single_worst(n, self.get("delta", n - 1))
        if self.family in ("fixed-sample-adversary", "star"):
            return gen_fixed_sample_adversary(n, self.get("v", 0))
        if self.family == "sqrt-adversary":
            return gen_sqrt_adversary(n)
        if self.family == "bound-stress":
            k = self.get("k")
            if k is None:
                k = max(1, min(_ceil_isqrt(n), n - 1))
            return gen_bound_stress(n, k)
        if self.family == "random-single":
            return gen_random_single(n, instance_seed)
        return gen_random_multi(n, self.get("p"), instance_seed)
