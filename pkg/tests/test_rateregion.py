"""Constraint sets, LP, closed forms, verdicts, and the verdict table."""

import math

import numpy as np
import pytest

import secomp as sc
from secomp.errors import (
    DeltaOutOfRange,
    WrongArity,
    WrongCaseTag,
    WrongShape,
)
from conftest import oracle_cond_entropy, random_case1_spec, random_case2_spec, \
    random_source

H_QUARTER = 0.8112781244591328
BOUNDARY_DELTA = 0.1739523314093952  # h(delta) = 2/3 to double precision


def _bounds_by_label(cs):
    return {c.label: (c.variables, c.bound) for c in cs.constraints}


# ---------------------------------------------------------------------------
# case-1 constraints
# ---------------------------------------------------------------------------

def test_case1_two_terminal_constraints():
    src, fns = sc.bss_row_spec(3, 0.25)
    cs = sc.constraints_case1(src, fns)
    by = _bounds_by_label(cs)
    vars2, b2 = by["1a:L={2}"]
    vars1, b1 = by["1b:L={1}"]
    assert vars2 == ("R_2",) and b2 == pytest.approx(H_QUARTER, abs=1e-12)
    # given X_2 and the (xor, and) value, X_1 is determined
    assert vars1 == ("R_1",) and b1 == pytest.approx(0.0, abs=1e-12)
    assert len(cs.constraints) == 2


def test_case1_constant_g0_reduces_to_plain_omniscience():
    src = sc.make_bss(0.25)
    fns = sc.make_function_spec(src, {0: [0, 0, 0, 0], 2: [0, 0, 0, 0]},
                                case=1, m0=1)
    cs = sc.constraints_case1(src, fns)
    by = _bounds_by_label(cs)
    assert by["1b:L={1}"][1] == pytest.approx(H_QUARTER, abs=1e-12)
    assert by["1a:L={2}"][1] == pytest.approx(H_QUARTER, abs=1e-12)


def test_case1_three_terminal_bounds_match_oracle(rng):
    src = random_source(rng, m=3, max_alpha=2, allow_zeros=False)
    fns = random_case1_spec(rng, src, m0=1)
    cs = sc.constraints_case1(src, fns)
    assert len(cs.constraints) == 6  # all proper nonempty subsets of {1,2,3}
    for c in cs.constraints:
        members = tuple(int(v.split("_")[1]) for v in c.variables)
        rest = tuple(i for i in (1, 2, 3) if i not in members)
        if c.label.startswith("1b"):
            want = oracle_cond_entropy(src, fns, (members, ()), (rest, (0,)))
        else:
            want = oracle_cond_entropy(src, fns, (members, ()), (rest, ()))
        assert c.bound == pytest.approx(want, abs=1e-9), c.label
    offset = oracle_cond_entropy(src, fns, ((), (2,)), ((2,), ())) + \
        oracle_cond_entropy(src, fns, ((), (3,)), ((3,), ()))
    assert cs.fixed_offset == pytest.approx(offset, abs=1e-9)


def test_case1_wrong_tag():
    src, fns = sc.bss_row_spec(4, 0.25)  # a case-2 spec
    with pytest.raises(WrongCaseTag):
        sc.constraints_case1(src, fns)


# ---------------------------------------------------------------------------
# case-2 constraints
# ---------------------------------------------------------------------------

def test_case2_reduced_bounds_for_xor_and():
    src, fns = sc.bss_row_spec(4, 0.25)
    cs = sc.constraints_case2(src, fns)
    by = _bounds_by_label(cs)
    assert by["2a:L={2}"] == (("R_2",), pytest.approx(H_QUARTER, abs=1e-12))
    assert by["2b:j=2"] == (("Rp_2",), pytest.approx(H_QUARTER / 2, abs=1e-12))
    # R_1 >= H(X_1 | X_2, G_0, G_2) = 0
    assert by["2c:L={1},Lp={}"][1] == pytest.approx(0.0, abs=1e-12)
    # R_1 + R_2 >= H(X_1, X_2 | G_0, G_2) = delta
    assert by["2c:L={1,2},Lp={}"] == (
        ("R_1", "R_2"), pytest.approx(0.25, abs=1e-12))


def test_case2_constant_tail_gets_zero_codeword_rate():
    src = sc.make_bss(0.25)
    fns = sc.make_function_spec(src, {0: [0, 1, 1, 0], 2: [0, 0, 0, 0]},
                                case=2, m0=1)
    value, rates = sc.min_sum_rate(sc.constraints_case2(src, fns))
    assert rates.values["Rp_2"] == pytest.approx(0.0, abs=1e-12)
    # the pair-sum bound H(X_1,X_2|G_0) = 1 dominates here
    assert value == pytest.approx(1.0, abs=1e-9)


def test_case2_three_terminal_constraint_count(rng):
    src = random_source(rng, m=3, max_alpha=2, allow_zeros=False)
    fns = random_case2_spec(rng, src, m0=1)
    cs = sc.constraints_case2(src, fns)
    # (2a): nonempty proper subsets avoiding terminal 1 -> 3
    # (2b): one per tail terminal -> 2
    # (2c): 4 supersets of {1} times 4 subsets of {2,3} minus the full pair -> 15
    assert len(cs.constraints) == 3 + 2 + 15


# ---------------------------------------------------------------------------
# case-3 constraints
# ---------------------------------------------------------------------------

def test_case3_download_bounds():
    src = sc.make_bss(0.25)
    fns = sc.make_function_spec(src, {0: [0, 1, 0, 1]}, case=3,
                                recovery_sets=[[2], []])
    cs = sc.constraints_case3(src, fns)
    by = _bounds_by_label(cs)
    assert by["3a:i=1,L={2}"] == (("R_2",), pytest.approx(H_QUARTER, abs=1e-12))
    # g_0 = x_2, so (3b) for L={2} conditions on itself
    assert by["3b:L={2}"][1] == pytest.approx(0.0, abs=1e-12)
    assert by["3b:L={1}"][1] == pytest.approx(
        oracle_cond_entropy(src, fns, ((1,), ()), ((2,), (0,))), abs=1e-12)


def test_case3_empty_recovery_sets_leave_only_3b():
    src = sc.make_bss(0.25)
    fns = sc.make_function_spec(src, {0: [0, 0, 0, 0]}, case=3,
                                recovery_sets=[[], []])
    cs = sc.constraints_case3(src, fns)
    assert all(c.label.startswith("3b") for c in cs.constraints)
    assert all(c.bound == pytest.approx(H_QUARTER, abs=1e-12)
               for c in cs.constraints)


def test_case3_central_download_is_slepian_wolf_region(rng):
    # terminal 1 downloads everything: (3a) for i=1 is the full SW region
    src = random_source(rng, m=3, max_alpha=2, allow_zeros=False)
    fns = sc.make_function_spec(src, {0: src.coordinate_symbols(2)}, case=3,
                                recovery_sets=[[2, 3], [], []])
    cs = sc.constraints_case3(src, fns)
    by = _bounds_by_label(cs)
    for members in ((2,), (3,), (2, 3)):
        rest = tuple(j for j in (2, 3) if j not in members) + (1,)
        want = oracle_cond_entropy(src, fns, (members, ()), (rest, ()))
        label = "3a:i=1,L={" + ",".join(map(str, members)) + "}"
        assert by[label][1] == pytest.approx(want, abs=1e-9)


# ---------------------------------------------------------------------------
# LP
# ---------------------------------------------------------------------------

def test_min_sum_rate_single_constraint():
    cs = sc.ConstraintSet(("R_1",), (sc.Constraint(("R_1",), 0.7, "only"),))
    value, rates = sc.min_sum_rate(cs)
    assert value == pytest.approx(0.7, abs=1e-12)
    assert rates.values["R_1"] == pytest.approx(0.7, abs=1e-12)


def test_min_sum_rate_two_terminal_case1_equals_closed_form():
    src, fns = sc.bss_row_spec(3, 0.25)
    value, rates = sc.min_sum_rate(sc.constraints_case1(src, fns))
    assert value == pytest.approx(1.5 * H_QUARTER, abs=1e-9)
    assert rates.feasible(sc.constraints_case1(src, fns))


def test_min_sum_rate_example3_value():
    src, fns = sc.bss_row_spec(4, 0.25)
    value, _ = sc.min_sum_rate(sc.constraints_case2(src, fns))
    # h/2 + max{delta, h} with h > delta
    assert value == pytest.approx(H_QUARTER / 2 + max(0.25, H_QUARTER), abs=1e-9)


def test_lp_optimum_nonnegative_and_feasible(rng):
    for _ in range(40):
        src = random_source(rng, m=2, max_alpha=3)
        fns = random_case1_spec(rng, src)
        cs = sc.constraints_case1(src, fns)
        value, rates = sc.min_sum_rate(cs)
        assert value >= -1e-12
        assert rates.feasible(cs)
        assert all(v >= -1e-12 for v in rates.values.values())


def test_region_nesting_conditioning_shrinks_optimum(rng):
    # dropping the g_0 conditioning raises bounds, hence the optimum
    for _ in range(25):
        src = random_source(rng, m=2, max_alpha=3)
        fns = random_case1_spec(rng, src)
        const = sc.make_function_spec(
            src, {0: np.zeros(src.num_symbols, dtype=int),
                  2: np.zeros(src.num_symbols, dtype=int)}, case=1, m0=1)
        with_g0 = sc.min_sum_rate(sc.constraints_case1(src, fns))[0] \
            - sc.constraints_case1(src, fns).fixed_offset
        plain = sc.min_sum_rate(sc.constraints_case1(src, const))[0]
        assert plain >= with_g0 - 1e-9


# ---------------------------------------------------------------------------
# closed form
# ---------------------------------------------------------------------------

def test_closed_form_row3_is_three_halves_h():
    src, fns = sc.bss_row_spec(3, 0.25)
    assert sc.two_terminal_closed_form(src, fns) == \
        pytest.approx(1.5 * H_QUARTER, abs=1e-12)


def test_closed_form_identity_functions_independent_bits():
    src = sc.validate([0.25] * 4, [2, 2])
    fns = sc.make_function_spec(src, {0: [0, 0, 1, 1], 2: [0, 0, 1, 1]},
                                case=1, m0=1)
    # H(X_2|X_1) + H(X_1|X_2): the codeword term equals H(X_1|X_2) since
    # G_2 = X_1, and the last term vanishes given G_0 = X_1
    assert sc.two_terminal_closed_form(src, fns) == pytest.approx(2.0, abs=1e-9)


def test_closed_form_requires_two_terminal_case1(rng):
    src, fns = sc.bss_row_spec(4, 0.25)
    with pytest.raises(WrongShape):
        sc.two_terminal_closed_form(src, fns)


def test_closed_form_equals_lp_on_random_specs(rng):
    for _ in range(60):
        src = random_source(rng, m=2, max_alpha=3)
        fns = random_case1_spec(rng, src)
        lp = sc.min_sum_rate(sc.constraints_case1(src, fns))[0]
        closed = sc.two_terminal_closed_form(src, fns)
        assert lp == pytest.approx(closed, abs=1e-9)


def test_case2_reduction_formula_on_random_specs(rng):
    # two-terminal case-2 optimum collapses to a three-term expression
    for _ in range(40):
        src = random_source(rng, m=2, max_alpha=3)
        fns = random_case2_spec(rng, src, m0=1)
        lp = sc.min_sum_rate(sc.constraints_case2(src, fns))[0]
        a1 = sc.cond_entropy(src, fns, sc.rv(x=[1]), sc.rv(x=[2], g=[0, 2]))
        b2 = sc.cond_entropy(src, fns, sc.rv(x=[2]), sc.rv(x=[1]))
        alt = sc.cond_entropy(src, fns, sc.rv(x=[2]), sc.rv(g=[0, 2]))
        d2 = sc.cond_entropy(src, fns, sc.rv(g=[2]), sc.rv(x=[2]))
        assert lp == pytest.approx(a1 + max(b2, alt) + d2, abs=1e-9)


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def test_analyze_row3_not_securely_computable():
    src, fns = sc.bss_row_spec(3, 0.25)
    rep = sc.analyze(src, fns)
    assert rep.h_given_g0 == pytest.approx(0.25, abs=1e-12)
    assert rep.r_value == pytest.approx(1.5 * H_QUARTER, abs=1e-9)
    assert rep.verdict == sc.NOT_SECURELY_COMPUTABLE
    assert rep.assumption == "proven"


def test_analyze_row2_securely_computable():
    src, fns = sc.bss_row_spec(2, 0.25)
    rep = sc.analyze(src, fns)
    assert rep.h_given_g0 == pytest.approx(1.0, abs=1e-12)
    assert rep.verdict == sc.SECURELY_COMPUTABLE


def test_analyze_row4_boundary_at_critical_delta():
    src, fns = sc.bss_row_spec(4, BOUNDARY_DELTA)
    rep = sc.analyze(src, fns)
    assert rep.verdict == sc.BOUNDARY


def test_analyze_three_terminals_is_bound_only(rng):
    src = random_source(rng, m=3, max_alpha=2, allow_zeros=False)
    fns = random_case1_spec(rng, src, m0=1)
    rep = sc.analyze(src, fns)
    assert rep.assumption == "assumed"
    assert rep.verdict == sc.BOUND_ONLY
    assert "upper bound" in rep.note


def test_case1_vs_case2_values_both_finite(rng):
    # whether the two values coincide is an open question; only sanity here
    for _ in range(10):
        src = random_source(rng, m=2, max_alpha=3)
        fns = random_case1_spec(rng, src)
        v1 = sc.min_sum_rate(sc.constraints_case1(src, fns))[0]
        v2 = sc.min_sum_rate(sc.constraints_case2(src, fns.retag(2, src)))[0]
        assert math.isfinite(v1) and v1 >= -1e-12
        assert math.isfinite(v2) and v2 >= -1e-12


def test_clone_coordinate_leaves_quantities_unchanged(rng):
    for _ in range(10):
        src = random_source(rng, m=2, max_alpha=3, allow_zeros=False)
        fns = random_case1_spec(rng, src)
        # clone terminal 2 as a third coordinate
        a1, a2 = src.alphabet_sizes
        pmf = np.zeros(a1 * a2 * a2)
        for s in range(src.num_symbols):
            x1, x2 = s // a2, s % a2
            pmf[(x1 * a2 + x2) * a2 + x2] = src.pmf[s]
        big = sc.validate(pmf, (a1, a2, a2))
        expand = np.repeat(np.arange(src.num_symbols), a2)
        bigfns = sc.make_function_spec(
            big, {0: fns.tables[0][expand], 2: fns.tables[2][expand],
                  3: np.zeros(big.num_symbols, dtype=int)}, case=1, m0=1)
        h_small = sc.cond_entropy(src, fns, sc.rv(x=[1, 2]), sc.rv(g=[0]))
        h_big = sc.cond_entropy(big, bigfns, sc.rv(x=[1, 2, 3]), sc.rv(g=[0]))
        assert h_big == pytest.approx(h_small, abs=1e-9)
        # bounds for subsets that keep the clone on the conditioning side
        want = sc.cond_entropy(src, fns, sc.rv(x=[1]), sc.rv(x=[2]))
        got = sc.cond_entropy(big, bigfns, sc.rv(x=[1]), sc.rv(x=[2, 3]))
        assert got == pytest.approx(want, abs=1e-9)


# ---------------------------------------------------------------------------
# verdict table
# ---------------------------------------------------------------------------

def test_table_quarter():
    rows = sc.bss_verdict_table(0.25)
    assert [r.tau for r in rows] == [0.5, 1.0, pytest.approx(1 / 6), pytest.approx(2 / 3)]
    assert [r.verdict for r in rows] == [
        sc.NOT_SECURELY_COMPUTABLE, sc.SECURELY_COMPUTABLE,
        sc.NOT_SECURELY_COMPUTABLE, sc.NOT_SECURELY_COMPUTABLE]


def test_table_small_delta_first_row_flips():
    rows = sc.bss_verdict_table(0.05)
    assert rows[0].verdict == sc.SECURELY_COMPUTABLE  # h(0.05) < 1/2


def test_table_row3_never_computable(rng):
    for delta in (0.01, 0.1, 0.2, 0.3, 0.45):
        rows = sc.bss_verdict_table(delta)
        assert rows[2].verdict == sc.NOT_SECURELY_COMPUTABLE


def test_table_rows34_come_from_analysis():
    rows = sc.bss_verdict_table(0.25)
    for row in rows[2:]:
        fresh = sc.analyze(*sc.bss_row_spec(row.row, 0.25))
        assert row.report is not None
        assert row.report.r_value == pytest.approx(fresh.r_value, abs=1e-12)
        assert row.verdict == fresh.verdict


def test_table_rejects_bad_delta():
    with pytest.raises(DeltaOutOfRange):
        sc.bss_verdict_table(0.0)


# ---------------------------------------------------------------------------
# interactive-transcript inequality
# ---------------------------------------------------------------------------

def test_inequality_constant_transcript():
    src = sc.make_bss(0.25)
    law = sc.exact_transcript_law(src, 2, lambda m: np.zeros(m.size, dtype=int))
    ok, slack = sc.check_interactive_inequality(law)
    assert ok and slack == pytest.approx(0.0, abs=1e-12)


def test_inequality_one_round_message_slack_is_mi():
    src = sc.make_bss(0.25)
    code = sc.build_binning_code(1, 4, 0.5, seed=9, alphabet_size=2)
    law = sc.exact_transcript_law(src, 4, lambda m: code.bins[m.xseq(1)])
    ok, slack = sc.check_interactive_inequality(law)
    assert ok
    want = law.mi(["F"], ["x2"])
    assert slack == pytest.approx(want, abs=1e-9)


def test_inequality_rejects_other_arities(rng):
    src = random_source(rng, m=3, max_alpha=2)
    law = sc.exact_transcript_law(src, 2, lambda m: np.zeros(m.size, dtype=int))
    with pytest.raises(WrongArity):
        sc.check_interactive_inequality(law)
