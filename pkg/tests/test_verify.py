"""Exhaustive checkers, the sample-function catalog, and the refutation driver.

The driver tests steer it down every branch of its decision tree with
scripted table-driven oracles, then re-validate each witness from scratch.
"""

import pytest

from impsel.core import MULTI, SINGLE, NominationProfile
from impsel.exact import exact_distribution
from impsel.mechanisms import MechanismSpec, majority_default_winner
from impsel.verify import (
    DEFAULT_CHECK_MAX_N,
    ORACLE_NAMES,
    SAMPLE_CATALOG,
    WITNESS_KINDS,
    EmptySampleError,
    OracleNondeterministic,
    ProfileSpaceTooLarge,
    Witness,
    check_impartial,
    check_sample_constant,
    check_strong_sample,
    format_witness,
    iter_multi_profiles,
    iter_profiles,
    iter_single_profiles,
    measure_additive_gap_exhaustive,
    named_oracle,
    profile_count,
    refute_two_additive,
    sample_mechanism_oracle,
    validate_witness,
)


def multi4(out_sets):
    return NominationProfile.multi(4, out_sets)


def table_oracle(answers, default=0):
    """Deterministic oracle answering from a profile-keyed table."""

    def oracle(profile):
        return answers.get(profile, default)

    return oracle


# ---------------------------------------------------------------------------
# profile enumeration


def test_profile_counts():
    assert profile_count(3, SINGLE) == 8
    assert profile_count(4, SINGLE) == 81
    assert profile_count(3, MULTI) == 64
    assert profile_count(4, MULTI) == 4096


def test_iterators_match_counts_and_are_unique():
    for n, model in [(2, SINGLE), (3, SINGLE), (4, SINGLE), (2, MULTI), (3, MULTI)]:
        seen = list(iter_profiles(n, model))
        assert len(seen) == profile_count(n, model)
        assert len(set(seen)) == len(seen)
        assert all(p.n == n and p.model == model for p in seen)


def test_single_iterator_is_exhaustive():
    # every single-model profile on 3 vertices, by hand
    got = {p.out for p in iter_single_profiles(3)}
    want = {
        ((a,), (b,), (c,))
        for a in (1, 2)
        for b in (0, 2)
        for c in (0, 1)
    }
    assert got == want


def test_space_ceiling():
    with pytest.raises(ProfileSpaceTooLarge):
        check_impartial(MechanismSpec.simple_k(1), 6, SINGLE)
    with pytest.raises(ProfileSpaceTooLarge):
        check_strong_sample(SAMPLE_CATALOG["const-0"], 7, max_n=6)
    # an explicit ceiling unlocks the larger domain
    assert check_strong_sample(SAMPLE_CATALOG["const-0"], 6, max_n=6) == []


# ---------------------------------------------------------------------------
# impartiality checking


def test_random_k_is_impartial_small():
    for n in (3, 4):
        for k in (1, 2):
            assert check_impartial(MechanismSpec.random_k(k), n, SINGLE) == []


def test_simple_k_is_impartial_on_multi():
    assert check_impartial(MechanismSpec.simple_k(1), 3, MULTI) == []


def test_plurality_is_not_impartial():
    witnesses = check_impartial(named_oracle("plurality"), 3, SINGLE)
    assert witnesses
    for w in witnesses:
        assert w.kind == "impartiality_violation"
        assert validate_witness(w, named_oracle("plurality"))


def test_callable_and_spec_subjects_agree():
    spec = MechanismSpec.simple_k(2)
    as_callable = lambda p: exact_distribution(spec, p)  # noqa: E731
    a = check_impartial(spec, 3, SINGLE)
    b = check_impartial(as_callable, 3, SINGLE)
    assert a == b == []


def test_majority_default_is_impartial_on_multi():
    oracle = named_oracle("majority-default-ext:0")
    assert check_impartial(oracle, 3, MULTI) == []


# ---------------------------------------------------------------------------
# sample functions


def test_catalog_names_are_stable():
    assert set(SAMPLE_CATALOG) == {
        "const-0",
        "const-12",
        "first-2",
        "nominee-of-0",
        "min-degree",
        "max-degree",
        "edge-hash",
    }


def test_constant_functions_pass_everything():
    for name in ("const-0", "const-12", "first-2"):
        g = SAMPLE_CATALOG[name]
        assert check_strong_sample(g, 3) == []
        constant, witness = check_sample_constant(g, 3)
        assert constant and witness is None
        f = sample_mechanism_oracle(g)
        assert check_impartial(f, 3, SINGLE) == []


def test_nominee_of_zero_is_strong_but_not_impartial():
    g = SAMPLE_CATALOG["nominee-of-0"]
    assert check_strong_sample(g, 3) == []
    constant, witness = check_sample_constant(g, 3)
    assert not constant
    assert witness.kind == "sample_not_constant"
    assert validate_witness(witness, g)
    f = sample_mechanism_oracle(g)
    violations = check_impartial(f, 3, SINGLE)
    assert violations
    assert all(validate_witness(w, f) for w in violations)


@pytest.mark.parametrize("name", ["min-degree", "max-degree", "edge-hash"])
def test_degree_dependent_samplers_are_not_strong(name):
    g = SAMPLE_CATALOG[name]
    witnesses = check_strong_sample(g, 3)
    assert witnesses
    for w in witnesses:
        assert w.kind == "strong_sample_violation"
        assert validate_witness(w, g)


def test_empty_sample_rejected():
    with pytest.raises(EmptySampleError):
        check_strong_sample(lambda p: frozenset(), 3)


def test_sample_mechanism_oracle_winner_rule():
    g = SAMPLE_CATALOG["const-0"]
    f = sample_mechanism_oracle(g)
    assert f(NominationProfile.single([2, 2, 0])) == 2
    assert f(NominationProfile.single([1, 0, 0])) == 1


# ---------------------------------------------------------------------------
# named oracles


def test_named_oracle_parsing():
    assert named_oracle("plurality")(NominationProfile.single([2, 2, 0])) == 2
    # dictator:D selects D itself, whatever the profile says
    assert named_oracle("dictator:1")(NominationProfile.single([2, 2, 0])) == 1
    p = NominationProfile.multi(4, {1: [3], 2: [3]})
    assert named_oracle("majority-default-ext:0")(p) == majority_default_winner(p, 0)
    with pytest.raises(ValueError):
        named_oracle("oligarchy")
    with pytest.raises(ValueError):
        named_oracle("dictator:x")


def test_dictator_out_of_range_fails_at_call():
    f = named_oracle("dictator:9")
    with pytest.raises(ValueError):
        f(NominationProfile.single([1, 0]))


def test_oracle_names_listing():
    assert "plurality" in ORACLE_NAMES


# ---------------------------------------------------------------------------
# the refutation driver, branch by branch

EMPTY = multi4({})
# with a = 0 the trio is (1, 2, 3)
SOLO = {v: multi4({v: tuple(w for w in (1, 2, 3) if w != v)}) for v in (1, 2, 3)}


def run_and_validate(oracle, expected_kind, expected_case):
    witness = refute_two_additive(oracle)
    assert witness.kind == expected_kind
    assert witness.detail["case"] == expected_case
    assert witness.detail["queries"] <= 64
    assert validate_witness(witness, oracle)
    return witness


def test_refute_known_oracles():
    w = run_and_validate(named_oracle("dictator:0"), "additivity_violation", "held-default")
    assert w.detail["delta"] - w.detail["winner_degree"] == 3
    run_and_validate(named_oracle("plurality"), "impartiality_violation", "mutual-pair")
    run_and_validate(
        named_oracle("majority-default-ext:0"), "impartiality_violation", "held-default"
    )


def test_refute_silent_oracle():
    run_and_validate(lambda p: None, "no_winner_violation", "empty")


def test_refute_no_winner_mid_tree():
    oracle = table_oracle({SOLO[1]: None})
    run_and_validate(oracle, "no_winner_violation", "solo")


def test_refute_solo_self_crowning():
    oracle = table_oracle({SOLO[1]: 1})
    w = run_and_validate(oracle, "impartiality_violation", "solo")
    assert w.vertex == 1
    assert w.profile_a == EMPTY


def test_refute_mutual_pair_both_exits():
    base = {SOLO[1]: 2, SOLO[2]: 1, SOLO[3]: 1}
    merged = multi4({1: (2, 3), 2: (1, 3)})
    w = run_and_validate(table_oracle({**base, merged: 2}), "impartiality_violation", "mutual-pair")
    assert w.vertex == 1
    w2 = run_and_validate(table_oracle({**base, merged: 3}), "impartiality_violation", "mutual-pair")
    assert w2.vertex == 2


CYCLE = {SOLO[1]: 2, SOLO[2]: 3, SOLO[3]: 1}
PAIR = {
    1: multi4({1: (2, 3), 2: (1, 3)}),
    2: multi4({2: (1, 3), 3: (1, 2)}),
    3: multi4({3: (1, 2), 1: (2, 3)}),
}
PAIR_ANSWERS = {PAIR[1]: 2, PAIR[2]: 3, PAIR[3]: 1}
CLIQUE = multi4({1: (2, 3), 2: (1, 3), 3: (1, 2)})
FINAL = multi4({0: (1, 2, 3), 1: (2, 3), 2: (1, 3), 3: (1, 2)})


def test_refute_three_cycle_pair_exits():
    # the lone voter of pair[1] crowns itself
    w = run_and_validate(
        table_oracle({**CYCLE, PAIR[1]: 1}), "impartiality_violation", "three-cycle"
    )
    assert w.vertex == 1
    # or the pair winner lands on the third vertex entirely
    w2 = run_and_validate(
        table_oracle({**CYCLE, PAIR[1]: 3}), "impartiality_violation", "three-cycle"
    )
    assert w2.vertex == 2


def test_refute_three_cycle_clique_exit():
    oracle = table_oracle({**CYCLE, **PAIR_ANSWERS, CLIQUE: 2})
    w = run_and_validate(oracle, "impartiality_violation", "three-cycle")
    assert w.vertex == 2
    assert w.profile_b == CLIQUE


def test_refute_three_cycle_final_impartiality():
    oracle = table_oracle({**CYCLE, **PAIR_ANSWERS, CLIQUE: 0, FINAL: 1})
    w = run_and_validate(oracle, "impartiality_violation", "three-cycle")
    assert w.vertex == 0
    assert w.profile_b == FINAL


def test_refute_three_cycle_final_additivity():
    # a stubborn default that answers the cycle on solos and 0 elsewhere
    oracle = table_oracle({**CYCLE, **PAIR_ANSWERS, CLIQUE: 0, FINAL: 0})
    w = run_and_validate(oracle, "additivity_violation", "three-cycle")
    assert w.detail["delta"] == 3
    assert w.detail["winner_degree"] == 0


def test_refute_held_default_merge_exit():
    # held default: h[1] = 0; both one-sided extensions crown the other
    w_profile = multi4({1: (2, 3), 0: (2, 3)})
    wp = multi4({1: (2, 3), 0: (2, 3), 2: (3,)})
    wpp = multi4({1: (2, 3), 0: (2, 3), 3: (2,)})
    t = multi4({1: (2, 3), 0: (2, 3), 2: (3,), 3: (2,)})
    base = {SOLO[1]: 0, w_profile: 0, wp: 3, wpp: 2}
    w = run_and_validate(table_oracle({**base, t: 2}), "impartiality_violation", "held-default")
    assert w.vertex == 3
    w2 = run_and_validate(table_oracle({**base, t: 1}), "additivity_violation", "held-default")
    assert w2.detail["winner_degree"] == 0


def test_refute_rejects_nondeterminism():
    calls = []

    def flaky(profile):
        calls.append(profile)
        return len(calls) % 2

    with pytest.raises(OracleNondeterministic):
        refute_two_additive(flaky)


def test_refute_rejects_out_of_range_answers():
    with pytest.raises(ValueError):
        refute_two_additive(lambda p: 7)


# ---------------------------------------------------------------------------
# exhaustive gap measurement


def test_fixed_sample_worst_gap():
    for n in (3, 4, 5):
        alpha, worst = measure_additive_gap_exhaustive(MechanismSpec.fixed([0]), n, SINGLE)
        assert alpha == n - 2
        d = exact_distribution(MechanismSpec.fixed([0]), worst)
        got = worst.delta - sum(worst.in_degrees[v] * d.probability(v) for v in range(n))
        assert got == alpha


def test_majority_default_worst_gap():
    alpha, worst = measure_additive_gap_exhaustive(MechanismSpec.majority_default(0), 4, MULTI)
    assert alpha == 2
    assert worst.delta >= 2


def test_random_k_gap_is_small_at_n4():
    alpha, _ = measure_additive_gap_exhaustive(MechanismSpec.random_k(2), 4, SINGLE)
    assert 0 < float(alpha) < 3


# ---------------------------------------------------------------------------
# witness plumbing


def test_witness_kinds_are_closed():
    assert set(WITNESS_KINDS) == {
        "impartiality_violation",
        "strong_sample_violation",
        "additivity_violation",
        "no_winner_violation",
        "sample_not_constant",
    }


def test_validate_rejects_tampered_witness():
    witnesses = check_impartial(named_oracle("plurality"), 3, SINGLE)
    w = witnesses[0]
    other = (w.vertex + 1) % 3
    tampered = Witness(w.kind, w.profile_a, w.profile_b, other, dict(w.detail))
    assert not validate_witness(tampered, named_oracle("plurality"))


def test_validate_rejects_gap_of_exactly_two():
    star = NominationProfile.single([1, 0, 0, 0])
    claim = Witness("additivity_violation", star, None, 1, {})
    assert not validate_witness(claim, table_oracle({star: 1}))


def test_format_witness_is_readable():
    witnesses = check_impartial(named_oracle("plurality"), 3, SINGLE)
    text = format_witness(witnesses[0])
    assert "impartiality_violation" in text
    assert "model single" in text
