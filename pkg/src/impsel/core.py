"""Nomination graphs and the profile file format.

The shared data model for the whole package: a directed graph on ``n``
vertices with no self-loops, where an edge ``u -> v`` records that ``u``
nominates ``v``.  Two models are supported.  In the ``single`` model every
vertex names exactly one other vertex; in the ``multi`` model a vertex may
name any subset of the others, including nobody (abstention).  A profile
where every vertex abstains is a perfectly valid multi-model profile.

Profiles are immutable values.  Anything that "modifies" one, such as
:meth:`NominationProfile.apply_deviation`, returns a new profile.

Vertices are ``0 .. n-1``.  Out-sets are stored sorted and deduplicated so
equal graphs compare and hash equal regardless of construction order.
"""

from __future__ import annotations

import functools
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

__all__ = [
    "SINGLE",
    "MULTI",
    "MODELS",
    "PROFILE_MAGIC",
    "ModelViolation",
    "ProfileFormatError",
    "Deviation",
    "NominationProfile",
    "parse_profile",
    "format_profile",
    "load_profile",
    "save_profile",
]

SINGLE = "single"
MULTI = "multi"
MODELS = (SINGLE, MULTI)

#: First line of every profile file; the trailing integer is a format version.
PROFILE_MAGIC = "impsel 1"


class ModelViolation(ValueError):
    """A graph breaks the structural rules of its declared model.

    Raised for self-loops, out-of-range vertex ids, and single-model
    profiles whose vertices do not have out-degree exactly one.
    """


class ProfileFormatError(ValueError):
    """A profile file or string is syntactically malformed."""


def _normalize_out(vertex: int, nominees: Iterable[int], n: int, model: str) -> tuple[int, ...]:
    out = tuple(sorted(set(int(v) for v in nominees)))
    for v in out:
        if not 0 <= v < n:
            raise ModelViolation(f"vertex {vertex}: nominee {v} out of range 0..{n - 1}")
    if vertex in out:
        raise ModelViolation(f"vertex {vertex}: self-loop is not allowed")
    if model == SINGLE and len(out) != 1:
        raise ModelViolation(
            f"vertex {vertex}: single model requires out-degree exactly 1, got {len(out)}"
        )
    return out


@dataclass(frozen=True)
class Deviation:
    """Replacement of one vertex's entire out-set.

    ``new_out`` is normalized to a sorted, deduplicated tuple.  The deviating
    vertex may never nominate itself.
    """

    vertex: int
    new_out: tuple[int, ...]

    def __init__(self, vertex: int, new_out: Iterable[int]):
        object.__setattr__(self, "vertex", int(vertex))
        object.__setattr__(self, "new_out", tuple(sorted(set(int(v) for v in new_out))))
        if self.vertex in self.new_out:
            raise ModelViolation(f"vertex {self.vertex}: self-loop is not allowed")


@dataclass(frozen=True)
class NominationProfile:
    """An immutable nomination graph.

    ``out[u]`` is the sorted tuple of vertices nominated by ``u``.  Equality
    and hashing follow ``(n, model, out)``, so structurally equal profiles
    are interchangeable as dictionary keys.
    """

    n: int
    model: str
    out: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.model not in MODELS:
            raise ModelViolation(f"unknown model {self.model!r}")
        if self.n < 2:
            raise ModelViolation(f"need at least 2 vertices, got {self.n}")
        if len(self.out) != self.n:
            raise ModelViolation(f"out has {len(self.out)} entries for n={self.n}")
        normalized = tuple(
            _normalize_out(u, nominees, self.n, self.model)
            for u, nominees in enumerate(self.out)
        )
        object.__setattr__(self, "out", normalized)

    # ----- constructors -----

    @classmethod
    def single(cls, nominees: Sequence[int]) -> "NominationProfile":
        """Build a single-model profile from the list ``nominees[u] = x_u``."""
        return cls(len(nominees), SINGLE, tuple((v,) for v in nominees))

    @classmethod
    def multi(
        cls,
        n: int,
        out_sets: Mapping[int, Iterable[int]] | Sequence[Iterable[int]] = (),
    ) -> "NominationProfile":
        """Build a multi-model profile; vertices missing from ``out_sets`` abstain."""
        if isinstance(out_sets, Mapping):
            rows = [tuple(out_sets.get(u, ())) for u in range(n)]
        else:
            rows = [tuple(r) for r in out_sets]
            rows.extend(() for _ in range(n - len(rows)))
        return cls(n, MULTI, tuple(rows))

    @classmethod
    def from_edges(cls, n: int, model: str, edges: Iterable[tuple[int, int]]) -> "NominationProfile":
        """Build from an edge list; duplicate edges are rejected."""
        seen: set[tuple[int, int]] = set()
        rows: list[list[int]] = [[] for _ in range(n)]
        for u, v in edges:
            if not 0 <= u < n:
                raise ModelViolation(f"edge source {u} out of range 0..{n - 1}")
            if (u, v) in seen:
                raise ProfileFormatError(f"duplicate edge {u} -> {v}")
            seen.add((u, v))
            rows[u].append(v)
        return cls(n, model, tuple(tuple(r) for r in rows))

    # ----- queries -----

    @functools.cached_property
    def in_degrees(self) -> tuple[int, ...]:
        """In-degree of every vertex, counting all edges."""
        degs = [0] * self.n
        for nominees in self.out:
            for v in nominees:
                degs[v] += 1
        return tuple(degs)

    @property
    def delta(self) -> int:
        """The maximum in-degree."""
        return max(self.in_degrees)

    @functools.cached_property
    def single_nominees(self) -> tuple[int, ...]:
        """For single-model profiles, ``single_nominees[u]`` is u's nominee."""
        if self.model != SINGLE:
            raise ModelViolation("single_nominees is defined for the single model only")
        return tuple(row[0] for row in self.out)

    def in_degree(self, u: int, frm: Iterable[int] | Mapping[int, int] | None = None) -> int:
        """Number of nominations ``u`` receives from ``frm``.

        ``frm`` may be ``None`` (all vertices), an iterable of vertex ids
        where repeats count as multiplicity, or a mapping vertex -> count.
        """
        if not 0 <= u < self.n:
            raise ValueError(f"vertex {u} out of range 0..{self.n - 1}")
        if frm is None:
            return self.in_degrees[u]
        if isinstance(frm, Mapping):
            pairs: Iterable[tuple[int, int]] = frm.items()
        else:
            pairs = ((s, 1) for s in frm)
        total = 0
        for s, mult in pairs:
            if not 0 <= s < self.n:
                raise ValueError(f"vertex {s} out of range 0..{self.n - 1}")
            if u in self.out[s]:
                total += mult
        return total

    def max_degree(self) -> tuple[int, tuple[int, ...]]:
        """Return ``(delta, argmax)`` with the argmax vertices in ascending order.

        The designated top vertex is ``argmax[0]``, the least id among the
        maximizers.  On an edgeless graph every vertex ties at degree 0.
        """
        degs = self.in_degrees
        top = max(degs)
        return top, tuple(u for u, d in enumerate(degs) if d == top)

    @property
    def top_vertex(self) -> int:
        return self.max_degree()[1][0]

    def edges(self) -> Iterable[tuple[int, int]]:
        """Yield edges in sorted ``(u, v)`` order."""
        for u, nominees in enumerate(self.out):
            for v in nominees:
                yield (u, v)

    @property
    def edge_count(self) -> int:
        return sum(len(nominees) for nominees in self.out)

    # ----- deviations -----

    def apply_deviation(self, deviation: Deviation) -> "NominationProfile":
        """Return the profile where ``deviation.vertex`` replaced its out-set."""
        u = deviation.vertex
        if not 0 <= u < self.n:
            raise ValueError(f"vertex {u} out of range 0..{self.n - 1}")
        rows = list(self.out)
        rows[u] = deviation.new_out
        return NominationProfile(self.n, self.model, tuple(rows))


# ----- file format -----
#
#   impsel 1
#   model single
#   n 3
#   # comments and blank lines are ignored
#   0 2
#   1 2
#   2 0


def _content_lines(text: str) -> Iterable[tuple[int, str]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def parse_profile(text: str) -> NominationProfile:
    """Parse the textual profile format; see the module docstring for errors."""
    lines = iter(_content_lines(text))

    def next_line(what: str) -> tuple[int, str]:
        try:
            return next(lines)
        except StopIteration:
            raise ProfileFormatError(f"unexpected end of input, expected {what}") from None

    lineno, magic = next_line("magic line")
    if magic != PROFILE_MAGIC:
        raise ProfileFormatError(f"line {lineno}: expected {PROFILE_MAGIC!r}, got {magic!r}")

    lineno, model_line = next_line("model line")
    parts = model_line.split()
    if len(parts) != 2 or parts[0] != "model":
        raise ProfileFormatError(f"line {lineno}: expected 'model single|multi'")
    model = parts[1]
    if model not in MODELS:
        raise ProfileFormatError(f"line {lineno}: unknown model {model!r}")

    lineno, n_line = next_line("vertex count line")
    parts = n_line.split()
    if len(parts) != 2 or parts[0] != "n":
        raise ProfileFormatError(f"line {lineno}: expected 'n <count>'")
    try:
        n = int(parts[1])
    except ValueError:
        raise ProfileFormatError(f"line {lineno}: vertex count {parts[1]!r} is not an integer") from None

    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 2:
            raise ProfileFormatError(f"line {lineno}: expected '<from> <to>', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ProfileFormatError(f"line {lineno}: edge endpoints must be integers") from None
        if (u, v) in seen:
            raise ProfileFormatError(f"line {lineno}: duplicate edge {u} -> {v}")
        seen.add((u, v))
        edges.append((u, v))

    return NominationProfile.from_edges(n, model, edges)


def format_profile(profile: NominationProfile) -> str:
    """Render a profile in the textual format, edges sorted by (from, to)."""
    out = [PROFILE_MAGIC, f"model {profile.model}", f"n {profile.n}"]
    out.extend(f"{u} {v}" for u, v in profile.edges())
    return "\n".join(out) + "\n"


def load_profile(path) -> NominationProfile:
    """Read a profile file; raises ProfileFormatError / ModelViolation."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_profile(fh.read())


def save_profile(profile: NominationProfile, path) -> None:
    """Write a profile file; loading it back yields an equal profile."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_profile(profile))
