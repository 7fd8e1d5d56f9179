import random

import pytest

from engine import ExchangeGraph, exchange_graph, initial_seed
from laurent import LaurentPoly
from paperlab import (
    CASE2_RELATIONS,
    REPORTS,
    ConstructionFailed,
    Expression,
    ExpressionError,
    HypothesisNotSatisfied,
    IdentityFailed,
    IdentityReport,
    InvalidParameter,
    LemmaViolated,
    PatternStep,
    ReportStatus,
    SideConditionViolated,
    SigmaSum,
    UnknownReport,
    compatible_sets,
    formal_context,
    get_lab_version,
    kronecker_lemma_report,
    max_peripheral_crossing,
    pattern_steps,
    run_report,
    unistructurality_experiment,
    verify_bridging_induction,
    verify_case1,
    verify_case2_formal,
    verify_case2_geometric,
    verify_case3,
    verify_cover_flips,
    verify_lemma31,
    verify_quiver_recovery,
)
from quiver import tilde_A_canonical


def test_lab_version():
    assert get_lab_version() == "1.0.0"


def test_expression_parser():
    expression = Expression("(z1'')^2 + z2' z3''")
    assert expression.symbols() == {"z1''", "z2'", "z3''"}
    assert len(expression.summands()) == 2
    assert Expression("z4'' S6").symbols() == {"z4''", "S6"}
    for text in ("z1 +", "z1 * z2", "z1^z2", "(z1 z2", ""):
        with pytest.raises(ExpressionError):
            Expression(text)


def test_context_relations(x):
    x1, x2 = x
    context = formal_context(2, [("z1'", "z2^2 + 1")])
    assert context("z1'") * x1 == x2 ** 2 + 1
    assert context.evaluate("z1 z1' + 2") == x2 ** 2 + 3
    assert context.format(context("z2")) == "z2"
    with pytest.raises(ExpressionError):
        context("z7")


def test_context_inexact_relation():
    context = formal_context(2, [("z1'", "z2^2 + 1"), ("z1''", "z1 + 1")])
    with pytest.raises(IdentityFailed):
        context("z1''")


def test_context_terms_expand_sums(x):
    x1, x2 = x
    context = formal_context(2, sigmas={"S": "z1 + z2 z2", "T": "z1 z2 + S"})
    assert context.terms("T") == [x1 * x2, x1, x2 ** 2]
    assert context("T") == x1 * x2 + x1 + x2 ** 2


def test_formal_context_constants(x):
    context = formal_context(2, constants=["z2"])
    assert context("z2") == LaurentPoly.one(2)
    assert context("z1") == x[0]


def test_report_summary_and_json():
    report = IdentityReport("outer", witness={"lhs": "a"})
    report.add(IdentityReport("inner"))
    report.errata.append("S1 printed wrong")
    assert report.passed
    assert report.summary() == "[PASS] outer\n  erratum: S1 printed wrong\n  [PASS] inner"
    data = report.to_json()
    assert data["status"] == "pass"
    assert data["steps"][0]["name"] == "inner"
    assert data["errata"] == ["S1 printed wrong"]
    with pytest.raises(IdentityFailed) as failure:
        report.steps[0].fail(IdentityFailed, "broken")
    assert failure.value.report is report.steps[0]
    assert not report.passed


def test_kronecker_lemma():
    report = kronecker_lemma_report()
    assert report.passed
    assert report.context["x1_in_cluster"] is False


def test_lemma31_degenerate_sum(x):
    x1, x2 = x
    with pytest.raises(SideConditionViolated):
        verify_lemma31(x1, x2, [SigmaSum((x1 * x2,))], [x1], "a")
    with pytest.raises(SideConditionViolated):
        verify_lemma31(x1, x2, [SigmaSum((x1 * x2 + x1, -x1))], [x1], "a")


def test_lemma31_hypothesis(x):
    x1, x2 = x
    with pytest.raises(HypothesisNotSatisfied):
        verify_lemma31(x1, x2, [x1 + x2], [x1], "a")
    with pytest.raises(HypothesisNotSatisfied):
        verify_lemma31(x1, x2, [x1 * x2], [x1], "b")
    with pytest.raises(InvalidParameter):
        verify_lemma31(x1, x2, [x1 * x2], [x1], "c")


def test_lemma31_both_in_cluster(x):
    x1, x2 = x
    exchanged = (x2 ** 2 + 1) * LaurentPoly.monomial([-1, 0])
    with pytest.raises(LemmaViolated) as failure:
        verify_lemma31(x1, exchanged, [SigmaSum((x2 ** 2, LaurentPoly.one(2)))], [x1, exchanged], "a")
    assert failure.value.report.status is ReportStatus.FAIL


def test_lemma31_variant_b(x):
    x1, x2 = x
    # (x1 + 1) x2 x1 = x1 x2 + x1^2 x2
    report = verify_lemma31(x1 + 1, x2, [SigmaSum((x1,)), SigmaSum((x2,)), SigmaSum((x1 ** 2 * x2,))], [x1], "b")
    assert report.passed
    assert report.witness["difference"] == "0"
    with pytest.raises(HypothesisNotSatisfied):
        verify_lemma31(x1 + 1, x2, [SigmaSum((x1,)), SigmaSum((x2,)), SigmaSum((x1 * x2,))], [x1], "b")


def test_pattern_steps():
    steps = pattern_steps(CASE2_RELATIONS)
    assert steps[0] == PatternStep("z1", "z1'", (("z2", "z5"), ("z4", "z8")))
    assert pattern_steps([("z3'", "(z1')^2 + z2' z4")])[0].pairs[0] == ("z1'", "z1'")
    with pytest.raises(ExpressionError):
        pattern_steps([("z1'", "z1 + z2 z3")])


def test_case2_formal():
    report = verify_case2_formal()
    assert report.passed
    assert len(report.errata) == 2
    assert report.witness["difference"] == "0"
    assert verify_case2_formal(("z8", "z10")).passed


@pytest.mark.parametrize("n", [2, 3, 4])
def test_case3(n):
    report = verify_case3(n)
    assert report.passed
    assert report.steps[-1].name == f"case 3, n = {n}, lemma31 (b)"


def test_case3_unknown_length():
    with pytest.raises(InvalidParameter):
        verify_case3(5)


def test_case1():
    report = verify_case1(2, 1)
    assert report.passed
    assert report.steps[-1].passed
    assert verify_case1(3, 2, depth=1, boundary=1, boundary_sides=2).passed
    assert verify_case1(1, 2, boundary=1, loop=True).passed
    with pytest.raises(ConstructionFailed):
        verify_case1(1, 1)


def test_max_peripheral_crossing():
    assert max_peripheral_crossing(1, 1) == 0
    assert max_peripheral_crossing(4, 1) == 2


def test_case2_geometric_needs_four_points():
    with pytest.raises(ConstructionFailed):
        verify_case2_geometric(3, 3, 2)


@pytest.mark.slow
def test_case2_geometric():
    report = verify_case2_geometric(4, 1, 6)
    assert report.passed
    assert report.context["crossing"] == 2


@pytest.mark.parametrize("p,q", [(1, 1), (2, 1), (3, 2)])
def test_quiver_recovery(p, q):
    report = verify_quiver_recovery(p, q, 3)
    assert report.passed
    assert report.context["orientation"] in ("same", "opposite")


def test_unistructurality_kronecker():
    report = unistructurality_experiment(1, 1, 5, rng=random.Random(1))
    assert report.passed
    # the exchange graph of the Kronecker quiver is a path
    assert report.context["clusters"] == 11
    assert report.context["pool"] == 12
    assert report.context["interior_sets"] == report.context["clusters"]
    assert report.context["frontier_sets"] == report.context["beyond"] == 0
    with pytest.raises(InvalidParameter):
        unistructurality_experiment(1, 1, 0)


def test_compatible_sets_find_missing_cluster():
    graph = exchange_graph(initial_seed(tilde_A_canonical(2, 1)), 2)
    interior, _ = compatible_sets(graph, 3)
    clusters = {seed.cluster_set() for seed in graph.nodes}
    assert set(interior) == clusters

    dropped = graph.distance.index(1)
    keep = [i for i in range(len(graph)) if i != dropped]
    truncated = ExchangeGraph(
        graph.depth,
        [graph.nodes[i] for i in keep],
        [graph.distance[i] for i in keep],
        [{} for _ in keep],
    )
    interior, _ = compatible_sets(truncated, 3)
    assert graph.nodes[dropped].cluster_set() in interior


@pytest.mark.slow
def test_unistructurality_tilde_A_21():
    report = unistructurality_experiment(2, 1, 4, rng=random.Random(2))
    assert report.passed
    assert report.context["interior_sets"] == report.context["clusters"] == 22
    assert report.context["pool"] == 17


def test_bridging_induction_needs_three_steps():
    with pytest.raises(InvalidParameter):
        verify_bridging_induction(2, 2, 2)


@pytest.mark.slow
def test_bridging_induction():
    report = verify_bridging_induction(2, 2, 5)
    assert report.passed
    assert len(report.errata) == 3
    assert report.context["crossings"]["z4'''''"] == 10


def test_cover_flips():
    assert verify_cover_flips(2, 1, count=5, rng=random.Random(4)).passed


def test_run_report():
    reports = run_report("case3-n2")
    assert len(reports) == 1 and reports[0].passed
    assert len(run_report("case2-formal")) == 2
    assert {"lemma31", "case1", "induction", "unistructurality"} <= set(REPORTS)
    with pytest.raises(UnknownReport):
        run_report("case9")
