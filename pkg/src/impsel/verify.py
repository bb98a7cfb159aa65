"""Exhaustive verification: impartiality, strong-sample checks, refutation.

Three engines share this module.

* ``check_impartial`` iterates every profile on a small vertex set and
  every unilateral deviation, comparing the deviating vertex's own winning
  probability before and after, as exact rationals.  An empty witness list
  is a proof over that domain, not a statistical claim.

* ``check_strong_sample`` / ``check_sample_constant`` test sample
  functions g: a strong g is one no sample member can alter, and the
  shipped catalog exercises the fact that strong plus impartial forces g
  to be constant.

* ``refute_two_additive`` replays a case analysis against any total
  deterministic mechanism oracle on 4 vertices, cornering it into either
  an impartiality violation or a profile where the winner's in-degree
  trails the maximum by 3.  It never needs more than a few dozen queries.

Witnesses carry the concrete profiles involved and re-validate
independently via ``validate_witness``.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable, Iterator
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    MULTI,
    SINGLE,
    Deviation,
    NominationProfile,
    format_profile,
)
from .exact import (
    DEFAULT_SEQUENCE_BUDGET,
    WinnerDistribution,
    exact_distribution,
    expected_winner_degree,
)
from .mechanisms import MechanismSpec, majority_default_winner, nominated_winner

__all__ = [
    "WITNESS_KINDS",
    "Witness",
    "ProfileSpaceTooLarge",
    "EmptySampleError",
    "OracleNondeterministic",
    "iter_single_profiles",
    "iter_multi_profiles",
    "iter_profiles",
    "profile_count",
    "check_impartial",
    "check_strong_sample",
    "check_sample_constant",
    "sample_mechanism_oracle",
    "SAMPLE_CATALOG",
    "named_oracle",
    "ORACLE_NAMES",
    "refute_two_additive",
    "measure_additive_gap_exhaustive",
    "validate_witness",
    "format_witness",
]

WITNESS_KINDS = (
    "impartiality_violation",
    "strong_sample_violation",
    "additivity_violation",
    "no_winner_violation",
    "sample_not_constant",
)

#: Largest n the exhaustive engines accept by default, per model.
DEFAULT_CHECK_MAX_N = {SINGLE: 5, MULTI: 4}
DEFAULT_MEASURE_MAX_N = {SINGLE: 6, MULTI: 4}


class ProfileSpaceTooLarge(ValueError):
    """Exhaustive iteration over this profile space was refused.

    ``count`` is the number of profiles that would have to be visited.
    Pass an explicit ``max_n`` to override the default ceiling.
    """

    def __init__(self, n: int, model: str, count: int):
        super().__init__(
            f"exhaustive check over {count} {model}-model profiles on {n} vertices "
            f"exceeds the default ceiling; pass max_n={n} to allow it"
        )
        self.count = count


class EmptySampleError(ValueError):
    """A sample function returned an empty set, which no check tolerates."""


class OracleNondeterministic(ValueError):
    """A supposedly deterministic oracle answered the same profile twice differently."""


@dataclass(frozen=True, eq=True)
class Witness:
    """A concrete, re-checkable counterexample.

    ``profile_b`` is set for pairwise kinds; for impartiality violations it
    equals ``profile_a`` after a deviation by ``vertex``, whose own winning
    probability differs between the two.  ``detail`` records the values
    involved (probabilities, degrees, case labels).
    """

    kind: str
    profile_a: NominationProfile
    profile_b: NominationProfile | None = None
    vertex: int | None = None
    detail: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.kind not in WITNESS_KINDS:
            raise ValueError(f"unknown witness kind {self.kind!r}")


def iter_single_profiles(n: int) -> Iterator[NominationProfile]:
    """All (n-1)^n single-model profiles, in lexicographic nominee order."""
    choices = [[v for v in range(n) if v != u] for u in range(n)]
    for nominees in itertools.product(*choices):
        yield NominationProfile.single(nominees)


def _subsets_without(n: int, u: int) -> list[tuple[int, ...]]:
    others = [v for v in range(n) if v != u]
    out = []
    for r in range(len(others) + 1):
        out.extend(itertools.combinations(others, r))
    return out


def iter_multi_profiles(n: int) -> Iterator[NominationProfile]:
    """All 2^(n(n-1)) multi-model profiles, smallest out-sets first."""
    choices = [_subsets_without(n, u) for u in range(n)]
    for rows in itertools.product(*choices):
        yield NominationProfile(n, MULTI, rows)


def iter_profiles(n: int, model: str) -> Iterator[NominationProfile]:
    if model == SINGLE:
        return iter_single_profiles(n)
    if model == MULTI:
        return iter_multi_profiles(n)
    raise ValueError(f"unknown model {model!r}")


def profile_count(n: int, model: str) -> int:
    if model == SINGLE:
        return (n - 1) ** n
    if model == MULTI:
        return 2 ** (n * (n - 1))
    raise ValueError(f"unknown model {model!r}")


def _require_space(n: int, model: str, max_n: int | None, defaults: dict) -> None:
    if n < 2:
        raise ValueError(f"need at least 2 vertices, got {n}")
    ceiling = max_n if max_n is not None else defaults[model]
    if n > ceiling:
        raise ProfileSpaceTooLarge(n, model, profile_count(n, model))


def _subject_distribution(subject, profile: NominationProfile, budget: int) -> WinnerDistribution:
    """Winner distribution of a MechanismSpec, or of an oracle callable.

    Oracles may return a winner vertex, None for no winner, or a full
    WinnerDistribution.
    """
    if isinstance(subject, MechanismSpec):
        return exact_distribution(subject, profile, budget=budget)
    result = subject(profile)
    if isinstance(result, WinnerDistribution):
        if result.n != profile.n:
            raise ValueError(f"oracle returned a distribution over {result.n} vertices, expected {profile.n}")
        return result
    if result is None:
        return WinnerDistribution.point_mass(profile.n, None)
    if not isinstance(result, int) or isinstance(result, bool) or not 0 <= result < profile.n:
        raise ValueError(f"oracle returned {result!r}, expected a vertex id or None")
    return WinnerDistribution.point_mass(profile.n, result)


def _vertex_choices(n: int, u: int, model: str) -> list[tuple[int, ...]]:
    if model == SINGLE:
        return [(v,) for v in range(n) if v != u]
    return _subsets_without(n, u)


def check_impartial(
    subject,
    n: int,
    model: str,
    *,
    budget: int = DEFAULT_SEQUENCE_BUDGET,
    max_n: int | None = None,
) -> list[Witness]:
    """All impartiality violations of ``subject`` on n-vertex profiles.

    For every profile and every vertex u, u's winning probability must not
    move when u alone rewires.  Each deviation class is compared against
    its first member, so a violating pair shares everything except u's
    out-set.  Empty result = impartial on this whole domain.
    """
    _require_space(n, model, max_n, DEFAULT_CHECK_MAX_N)
    cache: dict[NominationProfile, WinnerDistribution] = {}

    def dist_of(profile: NominationProfile) -> WinnerDistribution:
        found = cache.get(profile)
        if found is None:
            found = cache[profile] = _subject_distribution(subject, profile, budget)
        return found

    witnesses: list[Witness] = []
    for u in range(n):
        own_choices = _vertex_choices(n, u, model)
        other_choices = [_vertex_choices(n, w, model) for w in range(n) if w != u]
        for rest in itertools.product(*other_choices):
            rows = list(rest[:u]) + [own_choices[0]] + list(rest[u:])
            base = NominationProfile(n, model, tuple(rows))
            base_p = dist_of(base).probability(u)
            for choice in own_choices[1:]:
                rows[u] = choice
                alt = NominationProfile(n, model, tuple(rows))
                alt_p = dist_of(alt).probability(u)
                if alt_p != base_p:
                    witnesses.append(
                        Witness(
                            "impartiality_violation",
                            base,
                            alt,
                            u,
                            {"p_a": base_p, "p_b": alt_p},
                        )
                    )
    return witnesses


def _sample_of(g, profile: NominationProfile) -> frozenset[int]:
    sample = frozenset(g(profile))
    if not sample:
        raise EmptySampleError(f"sample function returned an empty set on:\n{format_profile(profile)}")
    for v in sample:
        if not 0 <= v < profile.n:
            raise ValueError(f"sample function returned out-of-range vertex {v}")
    return sample


def check_strong_sample(
    g, n: int, *, max_n: int | None = None
) -> list[Witness]:
    """Violations of the rule that no sample member can change the sample.

    For each single-model profile and each u in g(x), every rewiring of u
    must leave g unchanged.
    """
    _require_space(n, SINGLE, max_n, DEFAULT_CHECK_MAX_N)
    witnesses: list[Witness] = []
    for profile in iter_single_profiles(n):
        sample = _sample_of(g, profile)
        for u in sorted(sample):
            current = profile.single_nominees[u]
            for alt in range(n):
                if alt == u or alt == current:
                    continue
                deviated = profile.apply_deviation(Deviation(u, (alt,)))
                new_sample = _sample_of(g, deviated)
                if new_sample != sample:
                    witnesses.append(
                        Witness(
                            "strong_sample_violation",
                            profile,
                            deviated,
                            u,
                            {
                                "sample_a": tuple(sorted(sample)),
                                "sample_b": tuple(sorted(new_sample)),
                            },
                        )
                    )
    return witnesses


def check_sample_constant(
    g, n: int, *, max_n: int | None = None
) -> tuple[bool, Witness | None]:
    """Whether g returns the same set on every single-model profile."""
    _require_space(n, SINGLE, max_n, DEFAULT_MEASURE_MAX_N)
    first_profile: NominationProfile | None = None
    first_sample: frozenset[int] | None = None
    for profile in iter_single_profiles(n):
        sample = _sample_of(g, profile)
        if first_sample is None:
            first_profile, first_sample = profile, sample
        elif sample != first_sample:
            return False, Witness(
                "sample_not_constant",
                first_profile,
                profile,
                None,
                {
                    "sample_a": tuple(sorted(first_sample)),
                    "sample_b": tuple(sorted(sample)),
                },
            )
    return True, None


def sample_mechanism_oracle(g) -> Callable[[NominationProfile], int | None]:
    """The selection rule induced by a sample function.

    The sample's nominees outside the sample compete; most nominations
    from outside the nominee pool wins, lowest id on ties.
    """

    def oracle(profile: NominationProfile) -> int | None:
        return nominated_winner(profile, _sample_of(g, profile))[1]

    return oracle


# ----- sample-function catalog -----

_HASH_MASK = (1 << 64) - 1


def _g_constant(vertices: tuple[int, ...]):
    fixed = frozenset(vertices)

    def g(profile: NominationProfile) -> frozenset[int]:
        return fixed

    return g


def _g_nominee_of_zero(profile: NominationProfile) -> frozenset[int]:
    return frozenset({profile.single_nominees[0]})


def _g_min_degree(profile: NominationProfile) -> frozenset[int]:
    degs = profile.in_degrees
    return frozenset({min(range(profile.n), key=lambda u: (degs[u], u))})


def _g_max_degree(profile: NominationProfile) -> frozenset[int]:
    degs = profile.in_degrees
    return frozenset({min(range(profile.n), key=lambda u: (-degs[u], u))})


def _g_edge_hash(profile: NominationProfile) -> frozenset[int]:
    h = 0
    for u, v in profile.edges():
        h = (h * 1000003 + u * profile.n + v + 1) & _HASH_MASK
    return frozenset({h % profile.n})


#: Candidate sample functions for the characterization harness.  The
#: constants and the id-prefix pass every check; the others are the
#: deliberately non-constant foils.
SAMPLE_CATALOG: dict[str, Callable[[NominationProfile], frozenset[int]]] = {
    "const-0": _g_constant((0,)),
    "const-12": _g_constant((1, 2)),
    "first-2": _g_constant((0, 1)),
    "nominee-of-0": _g_nominee_of_zero,
    "min-degree": _g_min_degree,
    "max-degree": _g_max_degree,
    "edge-hash": _g_edge_hash,
}


# ----- deterministic mechanism oracles -----


def named_oracle(name: str) -> Callable[[NominationProfile], int]:
    """Total deterministic oracles for the refutation driver and the CLI.

    ``dictator:D`` always selects D.  ``plurality`` selects the least-id
    vertex of maximum in-degree.  ``majority-default-ext:D`` extends the
    majority-with-default rule to arbitrary out-sets.
    """
    base, sep, arg = name.partition(":")
    if base == "plurality":
        if sep:
            raise ValueError("plurality takes no argument")
        return lambda profile: profile.max_degree()[1][0]
    if base == "dictator":
        if not sep:
            raise ValueError("dictator needs ':<vertex>'")
        d = int(arg)

        def dictator(profile: NominationProfile) -> int:
            if d >= profile.n:
                raise ValueError(f"dictator vertex {d} out of range 0..{profile.n - 1}")
            return d

        return dictator
    if base == "majority-default-ext":
        if not sep:
            raise ValueError("majority-default-ext needs ':<vertex>'")
        d = int(arg)
        return lambda profile: majority_default_winner(profile, d)
    raise ValueError(f"unknown oracle {name!r}; known: {', '.join(ORACLE_NAMES)}")


ORACLE_NAMES = ("dictator:<v>", "plurality", "majority-default-ext:<v>")


# ----- refutation driver -----


class _OracleCache:
    """Memoizing wrapper that asks everything twice to catch nondeterminism."""

    def __init__(self, oracle):
        self.oracle = oracle
        self.memo: dict[NominationProfile, int | None] = {}
        self.queries = 0

    def ask(self, profile: NominationProfile) -> int | None:
        if profile in self.memo:
            return self.memo[profile]
        first = self.oracle(profile)
        second = self.oracle(profile)
        self.queries += 2
        if first != second:
            raise OracleNondeterministic(
                f"oracle answered {first!r} then {second!r} on:\n{format_profile(profile)}"
            )
        if first is not None and (
            not isinstance(first, int) or isinstance(first, bool) or not 0 <= first < profile.n
        ):
            raise ValueError(f"oracle returned {first!r}, expected a vertex id or None")
        self.memo[profile] = first
        return first


def refute_two_additive(oracle) -> Witness:
    """Corner a total deterministic 4-vertex oracle out of being 2-additive.

    Plays a fixed decision tree of at most a dozen distinct profiles.  At
    every step the oracle either contradicts impartiality across a single
    deviation (impartiality_violation), reaches a profile whose winner
    trails the maximum in-degree by 3 (additivity_violation), or declines
    to answer (no_winner_violation).  There is no fourth exit.
    """
    asker = _OracleCache(oracle)
    n = 4

    def multi(out_sets: dict) -> NominationProfile:
        return NominationProfile.multi(n, out_sets)

    def impartiality(a, b, vertex, winner_a, winner_b, case) -> Witness:
        return Witness(
            "impartiality_violation",
            a,
            b,
            vertex,
            {"winner_a": winner_a, "winner_b": winner_b, "case": case, "queries": asker.queries},
        )

    def additivity(profile, winner, case) -> Witness:
        degs = profile.in_degrees
        return Witness(
            "additivity_violation",
            profile,
            None,
            winner,
            {
                "delta": max(degs),
                "winner_degree": degs[winner],
                "case": case,
                "queries": asker.queries,
            },
        )

    def no_winner(profile, case) -> Witness:
        return Witness(
            "no_winner_violation", profile, None, None, {"case": case, "queries": asker.queries}
        )

    empty = multi({})
    a = asker.ask(empty)
    if a is None:
        return no_winner(empty, "empty")
    trio = [v for v in range(n) if v != a]

    def others(v: int) -> tuple[int, ...]:
        return tuple(w for w in trio if w != v)

    # each trio member alone nominating the other two; the empty-profile
    # winner a must keep winning, since the lone voter cannot make itself win
    solo = {v: multi({v: others(v)}) for v in trio}
    h: dict[int, int] = {}
    for v in trio:
        win = asker.ask(solo[v])
        if win is None:
            return no_winner(solo[v], "solo")
        if win == v:
            return impartiality(empty, solo[v], v, a, win, "solo")
        h[v] = win

    favours_default = [v for v in trio if h[v] == a]
    if favours_default:
        # the default winner a held on against some lone voter cc; force a
        # to keep winning while bb and dd stack nominations on each other
        cc = favours_default[0]
        bb, dd = (v for v in trio if v != cc)
        w = multi({cc: others(cc), a: (bb, dd)})
        fw = asker.ask(w)
        if fw is None:
            return no_winner(w, "held-default")
        if fw != a:
            return impartiality(solo[cc], w, a, h[cc], fw, "held-default")

        wp = multi({cc: others(cc), a: (bb, dd), bb: (dd,)})
        fwp = asker.ask(wp)
        if fwp is None:
            return no_winner(wp, "held-default")
        if fwp == bb:
            return impartiality(w, wp, bb, fw, fwp, "held-default")
        if fwp in (a, cc):
            return additivity(wp, fwp, "held-default")

        wpp = multi({cc: others(cc), a: (bb, dd), dd: (bb,)})
        fwpp = asker.ask(wpp)
        if fwpp is None:
            return no_winner(wpp, "held-default")
        if fwpp == dd:
            return impartiality(w, wpp, dd, fw, fwpp, "held-default")
        if fwpp in (a, cc):
            return additivity(wpp, fwpp, "held-default")

        # both one-sided extensions crowned the other vertex; merging them
        # must crown both at once, which is impossible
        t = multi({cc: others(cc), a: (bb, dd), bb: (dd,), dd: (bb,)})
        ft = asker.ask(t)
        if ft is None:
            return no_winner(t, "held-default")
        if ft in (a, cc):
            return additivity(t, ft, "held-default")
        if ft == bb:
            return impartiality(wp, t, dd, fwp, ft, "held-default")
        return impartiality(wpp, t, bb, fwpp, ft, "held-default")

    # now h maps the trio into itself with no fixed point: either two
    # members crown each other, or h cycles through all three
    mutual = None
    for alpha in trio:
        beta = h[alpha]
        if h[beta] == alpha:
            mutual = (min(alpha, beta), max(alpha, beta))
            break
    if mutual is not None:
        alpha, beta = mutual
        merged = multi({alpha: others(alpha), beta: others(beta)})
        fm = asker.ask(merged)
        if fm is None:
            return no_winner(merged, "mutual-pair")
        if fm == beta:
            return impartiality(solo[beta], merged, alpha, h[beta], fm, "mutual-pair")
        return impartiality(solo[alpha], merged, beta, h[alpha], fm, "mutual-pair")

    # 3-cycle: pairing each voter with its own winner pins f on each pair
    pair: dict[int, NominationProfile] = {}
    for v in trio:
        pair[v] = multi({v: others(v), h[v]: others(h[v])})
        fp = asker.ask(pair[v])
        if fp is None:
            return no_winner(pair[v], "three-cycle")
        if fp == v:
            return impartiality(solo[h[v]], pair[v], v, h[h[v]], fp, "three-cycle")
        if fp != h[v]:
            return impartiality(solo[v], pair[v], h[v], h[v], fp, "three-cycle")

    clique = multi({v: others(v) for v in trio})
    fc = asker.ask(clique)
    if fc is None:
        return no_winner(clique, "three-cycle")
    if fc in trio:
        # fc completed pair[h[fc]] into the clique without winning there
        v = h[fc]
        return impartiality(pair[v], clique, fc, h[v], fc, "three-cycle")

    # fc == a; a nominating everyone must leave a winning, at in-degree 0
    # against three vertices of in-degree 3
    final = multi({**{v: others(v) for v in trio}, a: tuple(sorted(trio))})
    ff = asker.ask(final)
    if ff is None:
        return no_winner(final, "three-cycle")
    if ff != a:
        return impartiality(clique, final, a, fc, ff, "three-cycle")
    return additivity(final, a, "three-cycle")


def measure_additive_gap_exhaustive(
    subject,
    n: int,
    model: str,
    *,
    budget: int = DEFAULT_SEQUENCE_BUDGET,
    max_n: int | None = None,
) -> tuple[Fraction, NominationProfile]:
    """Exact worst additive gap of ``subject`` over every n-vertex profile.

    Returns the maximum of delta minus expected winner degree, with the
    first profile (in iteration order) that attains it.
    """
    _require_space(n, model, max_n, DEFAULT_MEASURE_MAX_N)
    best: Fraction | None = None
    best_profile: NominationProfile | None = None
    for profile in iter_profiles(n, model):
        dist = _subject_distribution(subject, profile, budget)
        gap = Fraction(profile.delta) - expected_winner_degree(dist, profile)
        if best is None or gap > best:
            best, best_profile = gap, profile
    return best, best_profile


# ----- witness handling -----


def _differs_only_at(a: NominationProfile, b: NominationProfile, vertex: int) -> bool:
    if a.n != b.n or a.model != b.model or not 0 <= vertex < a.n:
        return False
    if a.out[vertex] == b.out[vertex]:
        return False
    return all(a.out[u] == b.out[u] for u in range(a.n) if u != vertex)


def validate_witness(
    witness: Witness, subject, *, budget: int = DEFAULT_SEQUENCE_BUDGET
) -> bool:
    """Re-derive the witnessed fact from scratch against ``subject``.

    For the sample-function kinds ``subject`` is the sample function g;
    for the others it is a MechanismSpec or mechanism oracle.
    """
    kind = witness.kind
    if kind == "impartiality_violation":
        if witness.profile_b is None or witness.vertex is None:
            return False
        if not _differs_only_at(witness.profile_a, witness.profile_b, witness.vertex):
            return False
        p_a = _subject_distribution(subject, witness.profile_a, budget).probability(witness.vertex)
        p_b = _subject_distribution(subject, witness.profile_b, budget).probability(witness.vertex)
        return p_a != p_b
    if kind == "additivity_violation":
        dist = _subject_distribution(subject, witness.profile_a, budget)
        gap = Fraction(witness.profile_a.delta) - expected_winner_degree(dist, witness.profile_a)
        return gap > 2
    if kind == "no_winner_violation":
        return _subject_distribution(subject, witness.profile_a, budget).p_none == 1
    if kind == "strong_sample_violation":
        if witness.profile_b is None or witness.vertex is None:
            return False
        if not _differs_only_at(witness.profile_a, witness.profile_b, witness.vertex):
            return False
        sample_a = _sample_of(subject, witness.profile_a)
        if witness.vertex not in sample_a:
            return False
        return _sample_of(subject, witness.profile_b) != sample_a
    if kind == "sample_not_constant":
        if witness.profile_b is None:
            return False
        return _sample_of(subject, witness.profile_a) != _sample_of(subject, witness.profile_b)
    return False


def _indent_profile(profile: NominationProfile) -> str:
    return "\n".join("    " + line for line in format_profile(profile).splitlines())


def format_witness(witness: Witness) -> str:
    parts = [f"{witness.kind}"]
    if witness.vertex is not None:
        parts.append(f"vertex={witness.vertex}")
    for key, value in sorted(witness.detail.items()):
        parts.append(f"{key}={value}")
    lines = [" ".join(parts), "  profile a:", _indent_profile(witness.profile_a)]
    if witness.profile_b is not None:
        lines.append("  profile b:")
        lines.append(_indent_profile(witness.profile_b))
    return "\n".join(lines)
