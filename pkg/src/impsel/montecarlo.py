"""Seeded Monte Carlo estimation of winner degree, and multi-instance sweeps.

Determinism contract: every result is a pure function of the plan or
config, independent of scheduling.  Trial i draws from a stream seeded by
``derive_seed(master_seed, i)``, so trials can run in any order or split
across processes.  Winner degrees are integers, and the estimator
accumulates exact integer sums, so not even float rounding depends on
ordering; floats appear once, in the final mean/variance division.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
from collections import Counter
from collections.abc import Iterable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

from .core import SINGLE, NominationProfile
from .generators import GeneratorSpec
from .mechanisms import (
    DrawStream,
    MechanismSpec,
    ModelMismatch,
    derive_seed,
    multiset_winner,
    nominated_winner,
    parse_mechanism,
    resolve_k,
    run_mechanism,
    winner_degree,
)

__all__ = [
    "TrialPlan",
    "GapReport",
    "estimate",
    "SweepConfig",
    "SweepRow",
    "sweep",
    "ScalingFit",
    "fit_scaling",
    "rows_to_csv",
    "rows_to_json",
    "CSV_HEADER",
]


@dataclass(frozen=True)
class TrialPlan:
    """How many trials to run and the 64-bit seed they all derive from."""

    trials: int
    master_seed: int

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")


@dataclass(frozen=True)
class GapReport:
    """Estimated (or exact) winner quality of one mechanism on one profile.

    ``gap`` is delta minus ``mean_degree``, the quantity the additive
    guarantees bound.  ``exact`` is set for deterministic mechanisms,
    where a single evaluation is the whole distribution and std_err is 0.
    """

    n: int
    k: int | None
    delta: int
    mean_degree: float
    gap: float
    std_err: float
    ci95_half_width: float
    no_winner_rate: float
    trials: int
    master_seed: int
    exact: bool

    def __post_init__(self):
        if not 0 <= self.mean_degree <= self.delta:
            raise ValueError(f"mean degree {self.mean_degree} outside [0, {self.delta}]")
        if not 0 <= self.no_winner_rate <= 1:
            raise ValueError(f"no-winner rate {self.no_winner_rate} outside [0, 1]")
        if self.exact and self.std_err != 0:
            raise ValueError("exact reports must have zero standard error")


def estimate(spec: MechanismSpec, profile: NominationProfile, plan: TrialPlan) -> GapReport:
    """Run ``plan.trials`` independent evaluations and report mean winner degree.

    Deterministic mechanisms are evaluated once and flagged exact.  A
    winnerless evaluation contributes degree 0, matching the expectation
    convention where the no-winner mass contributes nothing.
    """
    n = profile.n
    delta = profile.delta

    if not spec.is_randomized:
        trace = run_mechanism(spec, profile)
        degree = winner_degree(trace, profile)
        k = len(spec.fixed_set) if spec.kind == "fixed_sample" else None
        return GapReport(
            n=n,
            k=k,
            delta=delta,
            mean_degree=float(degree),
            gap=float(delta - degree),
            std_err=0.0,
            ci95_half_width=0.0,
            no_winner_rate=1.0 if trace.winner is None else 0.0,
            trials=plan.trials,
            master_seed=plan.master_seed,
            exact=True,
        )

    k = resolve_k(spec, n)
    degs = profile.in_degrees
    trials = plan.trials
    sum_deg = 0
    sum_sq = 0
    no_winner = 0
    if spec.kind == "random_k_sample":
        if profile.model != SINGLE:
            raise ModelMismatch(
                f"random_k_sample is defined for the single model, profile is {profile.model}"
            )
        for i in range(trials):
            stream = DrawStream(derive_seed(plan.master_seed, i))
            _, winner = nominated_winner(profile, stream.draws(k, n))
            if winner is None:
                no_winner += 1
            else:
                d = degs[winner]
                sum_deg += d
                sum_sq += d * d
    else:
        for i in range(trials):
            stream = DrawStream(derive_seed(plan.master_seed, i))
            winner = multiset_winner(profile, Counter(stream.draws(k, n)))
            if winner is None:
                no_winner += 1
            else:
                d = degs[winner]
                sum_deg += d
                sum_sq += d * d

    mean = sum_deg / trials
    if trials >= 2:
        # exact integer form of the (Bessel-corrected) variance of the mean
        std_err = math.sqrt((trials * sum_sq - sum_deg * sum_deg) / (trials * trials * (trials - 1)))
    else:
        std_err = 0.0
    return GapReport(
        n=n,
        k=k,
        delta=delta,
        mean_degree=mean,
        gap=delta - mean,
        std_err=std_err,
        ci95_half_width=1.96 * std_err,
        no_winner_rate=no_winner / trials,
        trials=trials,
        master_seed=plan.master_seed,
        exact=False,
    )


#: Offset for deriving instance seeds from a row seed, far above any trial index.
_INSTANCE_SEED_INDEX = 1 << 41


@dataclass(frozen=True)
class SweepConfig:
    """A JSON-loadable experiment: mechanisms x n values x instances.

    ``instances`` makes sense only for seeded generator families; a
    deterministic family produces the same profile every time.
    ``exact_budget`` is carried for forward compatibility of configs;
    sweep rows are always Monte Carlo estimates.
    """

    mechanisms: tuple[MechanismSpec, ...]
    generator: GeneratorSpec
    n_values: tuple[int, ...]
    trials: int
    master_seed: int
    instances: int = 1
    exact_budget: int | None = None

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if self.instances < 1:
            raise ValueError(f"instances must be at least 1, got {self.instances}")
        if self.instances > 1 and not self.generator.needs_seed:
            raise ValueError(
                f"family {self.generator.family} is deterministic; instances must be 1"
            )
        for n in self.n_values:
            if n < 2:
                raise ValueError(f"every n must be at least 2, got {n}")
        for mech in self.mechanisms:
            if mech.kind == "random_k_sample" and self.generator.model != SINGLE:
                raise ValueError(
                    f"mechanism {mech.label()} needs single-model profiles, "
                    f"family {self.generator.family} generates {self.generator.model}"
                )

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SweepConfig":
        """Validate a parsed JSON document; errors name the offending field."""

        def fail(path: str, message: str):
            raise ValueError(f"{path}: {message}")

        if not isinstance(doc, dict):
            fail("/", "config must be a JSON object")
        known = {
            "mechanisms",
            "generator",
            "n_values",
            "trials",
            "master_seed",
            "instances",
            "exact_budget",
        }
        for key in doc:
            if key not in known:
                fail(f"/{key}", "unknown field")
        for key in ("mechanisms", "generator", "n_values", "trials", "master_seed"):
            if key not in doc:
                fail(f"/{key}", "required field is missing")

        raw_mechs = doc["mechanisms"]
        if not isinstance(raw_mechs, list):
            fail("/mechanisms", "must be a list of mechanism strings")
        mechanisms = []
        for i, text in enumerate(raw_mechs):
            if not isinstance(text, str):
                fail(f"/mechanisms[{i}]", "must be a string")
            try:
                mechanisms.append(parse_mechanism(text))
            except ValueError as exc:
                fail(f"/mechanisms[{i}]", str(exc))

        raw_gen = doc["generator"]
        if not isinstance(raw_gen, dict) or "family" not in raw_gen:
            fail("/generator", 'must be an object with a "family" field')
        params = {key: value for key, value in raw_gen.items() if key != "family"}
        try:
            generator = GeneratorSpec.from_mapping(raw_gen["family"], params)
        except ValueError as exc:
            fail("/generator", str(exc))

        raw_ns = doc["n_values"]
        if not isinstance(raw_ns, list) or any(
            not isinstance(n, int) or isinstance(n, bool) for n in raw_ns
        ):
            fail("/n_values", "must be a list of integers")

        def require_int(key: str, minimum: int, default=None):
            value = doc.get(key, default)
            if value is None:
                return None
            if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
                fail(f"/{key}", f"must be an integer >= {minimum}")
            return value

        trials = require_int("trials", 1)
        master_seed = doc["master_seed"]
        if not isinstance(master_seed, int) or isinstance(master_seed, bool):
            fail("/master_seed", "must be an integer")
        instances = require_int("instances", 1, default=1)
        exact_budget = require_int("exact_budget", 1)

        try:
            return cls(
                mechanisms=tuple(mechanisms),
                generator=generator,
                n_values=tuple(raw_ns),
                trials=trials,
                master_seed=master_seed,
                instances=instances,
                exact_budget=exact_budget,
            )
        except ValueError as exc:
            fail("/", str(exc))


@dataclass(frozen=True)
class SweepRow:
    mechanism: str
    generator: str
    instance_seed: int | None
    report: GapReport


def _sweep_task(task) -> SweepRow:
    mech, gen, n, instance_seed, plan = task
    profile = gen.build(n, instance_seed)
    report = estimate(mech, profile, plan)
    return SweepRow(mech.label(), gen.label(), instance_seed, report)


def sweep(config: SweepConfig, jobs: int = 1) -> list[SweepRow]:
    """Run the whole experiment; output is independent of ``jobs``.

    Row order is mechanism-major, then n, then instance.  Row i's plan is
    seeded by derive_seed(master_seed, i), and a seeded family's instance
    seed derives from the row seed at a reserved index, so no stream
    overlaps any other.
    """
    tasks = []
    row_index = 0
    for mech in config.mechanisms:
        for n in config.n_values:
            for _ in range(config.instances):
                row_seed = derive_seed(config.master_seed, row_index)
                instance_seed = (
                    derive_seed(row_seed, _INSTANCE_SEED_INDEX)
                    if config.generator.needs_seed
                    else None
                )
                tasks.append(
                    (mech, config.generator, n, instance_seed, TrialPlan(config.trials, row_seed))
                )
                row_index += 1
    if jobs <= 1 or len(tasks) <= 1:
        return [_sweep_task(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_sweep_task, tasks))


class ScalingFit(NamedTuple):
    slope: float
    intercept: float
    r2: float


def fit_scaling(rows: Iterable[SweepRow]) -> ScalingFit:
    """Least squares of ln(gap) against ln(n) over rows with positive gap."""
    points = [
        (math.log(row.report.n), math.log(row.report.gap))
        for row in rows
        if row.report.gap > 0
    ]
    if len(points) < 3:
        raise ValueError(f"need at least 3 rows with positive gap, got {len(points)}")
    xs = [x for x, _ in points]
    ys = [y for _, y in points]
    slope, intercept = statistics.linear_regression(xs, ys)
    mean_y = statistics.fmean(ys)
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in points)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return ScalingFit(slope, intercept, r2)


CSV_HEADER = (
    "mechanism,n,k,generator,instance_seed,delta,mean_degree,gap,"
    "std_err,ci95,no_winner_rate,trials,master_seed,exact"
)


def _row_cells(row: SweepRow) -> list[str]:
    r = row.report
    return [
        row.mechanism,
        str(r.n),
        "" if r.k is None else str(r.k),
        row.generator,
        "" if row.instance_seed is None else str(row.instance_seed),
        str(r.delta),
        str(r.mean_degree),
        str(r.gap),
        str(r.std_err),
        str(r.ci95_half_width),
        str(r.no_winner_rate),
        str(r.trials),
        str(r.master_seed),
        "true" if r.exact else "false",
    ]


def rows_to_csv(rows: Sequence[SweepRow], fit: ScalingFit | None = None) -> str:
    """Stable CSV rendering; a fit, when given, is appended as comment lines."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER.split(","))
    for row in rows:
        writer.writerow(_row_cells(row))
    if fit is not None:
        buf.write(f"# fit slope={fit.slope} intercept={fit.intercept} r2={fit.r2}\n")
    return buf.getvalue()


def rows_to_json(rows: Sequence[SweepRow], fit: ScalingFit | None = None) -> str:
    header = CSV_HEADER.split(",")
    doc: dict = {"rows": []}
    for row in rows:
        cells = _row_cells(row)
        r = row.report
        entry = dict(zip(header, cells))
        entry.update(
            n=r.n,
            k=r.k,
            instance_seed=row.instance_seed,
            delta=r.delta,
            mean_degree=r.mean_degree,
            gap=r.gap,
            std_err=r.std_err,
            ci95=r.ci95_half_width,
            no_winner_rate=r.no_winner_rate,
            trials=r.trials,
            master_seed=r.master_seed,
            exact=r.exact,
        )
        doc["rows"].append(entry)
    if fit is not None:
        doc["fit"] = {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2}
    return json.dumps(doc, indent=2, sort_keys=True)
