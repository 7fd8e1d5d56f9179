import itertools
import random

import pytest

from annulus import (
    _raw_crossing,
    AnnulusMismatch,
    ArcKind,
    ArcLift,
    ArcNotInTriangulation,
    InvalidAnnulus,
    InvalidArc,
    MalformedTriangulation,
    MarkedAnnulus,
    Point,
    Triangulation,
    TriangulationSeed,
    WindowTooSmall,
    canonical_peripheral_arcs,
    classify_arc,
    crossing_number,
    deck_translate,
    enumerate_arcs,
    flip,
    flip_graph,
    flip_toward,
    initial_triangulation,
    is_valid_arc,
    lift_triangulation,
    ptolemy_relation,
    quiver_of,
    random_triangulation,
    triangles,
    triangulation_graph,
    variable_of_arc,
    verify_cover_flip,
)
from engine import exchange_graph
from laurent import LaurentPoly
from quiver import TypeLabel, classify_tilde_A, tilde_A_canonical

ANNULI = [MarkedAnnulus(1, 1), MarkedAnnulus(2, 1), MarkedAnnulus(3, 2)]


def by_key(values):
    return sorted(values, key=LaurentPoly.sort_key)


def test_marked_annulus():
    annulus = MarkedAnnulus(3, 2)
    assert str(annulus) == "C(3,2)"
    assert annulus.rank == 5
    with pytest.raises(InvalidAnnulus):
        MarkedAnnulus(0, 1)


def test_canonical_translate():
    annulus = MarkedAnnulus(2, 1)
    assert annulus.canonical(Point(1, 3), Point(0, 5)) == ArcLift(Point(0, 1), Point(1, 1))
    assert annulus.canonical(Point(1, 4), Point(1, 2)) == ArcLift(Point(1, 0), Point(1, 2))
    assert annulus.parse_arc("0@4 - 1@1") == ArcLift(Point(0, 0), Point(1, -1))
    with pytest.raises(InvalidArc):
        annulus.parse_arc("0@0 1@1")


def test_crossing_number_examples():
    c11 = MarkedAnnulus(1, 1)
    bridging = c11.arc(0, 0, 1, 0)
    steep = c11.arc(0, 0, 1, 2)
    assert crossing_number(bridging, bridging, c11) == 0
    assert crossing_number(bridging, steep, c11) == 1
    c31 = MarkedAnnulus(3, 1)
    assert crossing_number(c31.arc(0, 0, 0, 2), c31.arc(0, 1, 0, 3), c31) == 1


def test_crossing_number_rejects_foreign_arcs():
    c11 = MarkedAnnulus(1, 1)
    with pytest.raises(AnnulusMismatch):
        crossing_number(ArcLift(Point(0, 3), Point(1, 0)), c11.arc(0, 0, 1, 0), c11)


def test_is_valid_arc():
    c31 = MarkedAnnulus(3, 1)
    segment = is_valid_arc((Point(0, 0), Point(0, 1)), c31)
    assert not segment and segment.reason == "boundary segment"
    wide = is_valid_arc((Point(0, 0), Point(0, 5)), c31)
    assert not wide and wide.reason == "self-intersecting"
    assert is_valid_arc((Point(0, 0), Point(0, 3)), c31)
    assert not is_valid_arc((Point(0, 2), Point(0, 2)), c31)
    with pytest.raises(InvalidArc):
        c31.arc(0, 0, 0, 5)


def test_classify_arc():
    c32 = MarkedAnnulus(3, 2)
    assert classify_arc(c32.arc(0, 0, 1, 0)) == (ArcKind.BRIDGING, None)
    assert classify_arc(c32.arc(0, 0, 0, 2)) == (ArcKind.PERIPHERAL, 0)
    assert classify_arc(c32.arc(1, 0, 1, 2)) == (ArcKind.PERIPHERAL, 1)


def test_canonical_peripheral_arcs():
    assert canonical_peripheral_arcs(MarkedAnnulus(1, 1), 0) == []
    c21 = MarkedAnnulus(2, 1)
    assert canonical_peripheral_arcs(c21, 0) == [c21.arc(0, 0, 0, 2), c21.arc(0, 1, 0, 3)]


def test_initial_triangulation_c11(kronecker):
    triangulation = initial_triangulation(MarkedAnnulus(1, 1))
    assert triangulation.arcs == (ArcLift(Point(0, 0), Point(1, 0)), ArcLift(Point(0, 0), Point(1, -1)))
    assert quiver_of(triangulation).is_isomorphic(kronecker)
    shapes = triangles(triangulation)
    assert len(shapes) == 2
    for triangle in shapes:
        assert sorted(s.arc for s in triangle.sides if not s.is_boundary) == [0, 1]
        assert sum(s.is_boundary for s in triangle.sides) == 1


@pytest.mark.parametrize("p,q", [(1, 2), (2, 2), (3, 1), (4, 3), (4, 4)])
def test_initial_triangulation_size(p, q):
    triangulation = initial_triangulation(MarkedAnnulus(p, q))
    assert triangulation.n == p + q
    triangulation.validate()


@pytest.mark.parametrize("p,q", [(2, 1), (3, 2), (2, 2)])
def test_quiver_of_initial_triangulation(p, q):
    assert classify_tilde_A(quiver_of(initial_triangulation(MarkedAnnulus(p, q)))) == TypeLabel.tilde_a(p, q)


@pytest.mark.parametrize("annulus", ANNULI, ids=str)
def test_triangles_of_reachable_triangulations(annulus):
    for triangulation in flip_graph(initial_triangulation(annulus), 3).states:
        shapes = triangulation.triangles()
        assert len(shapes) == annulus.rank
        for i in range(triangulation.n):
            assert sum(side.arc == i for t in shapes for side in t.sides) == 2


def test_malformed_triangulations():
    c11 = MarkedAnnulus(1, 1)
    with pytest.raises(MalformedTriangulation):
        Triangulation.of(c11, [c11.arc(0, 0, 1, 0)])
    with pytest.raises(MalformedTriangulation):
        Triangulation.of(c11, [c11.arc(0, 0, 1, 0), c11.arc(0, 0, 1, 2)])
    with pytest.raises(ArcNotInTriangulation):
        initial_triangulation(c11).flip(2)


def test_flip_c11():
    triangulation = initial_triangulation(MarkedAnnulus(1, 1))
    result = flip(triangulation, 1)
    assert result.old_arc == ArcLift(Point(0, 0), Point(1, -1))
    assert result.new_arc == ArcLift(Point(0, 0), Point(1, 1))
    assert flip(result.triangulation, 1).triangulation == triangulation
    assert quiver_of(result.triangulation).is_isomorphic(tilde_A_canonical(1, 1))


def test_flip_c32_gives_peripheral_arc():
    state = TriangulationSeed.initial(MarkedAnnulus(3, 2))
    x = LaurentPoly.coordinates(5)
    relation = state.relation(4)
    assert relation.flip.new_arc == ArcLift(Point(1, 0), Point(1, 2))
    assert classify_arc(relation.flip.new_arc) == (ArcKind.PERIPHERAL, 1)
    assert relation.rhs == x[0] + x[3]
    sides = (relation.flip.quadrilateral.alpha, relation.flip.quadrilateral.beta,
             relation.flip.quadrilateral.delta, relation.flip.quadrilateral.epsilon)
    assert sum(side.is_boundary for side in sides) == 2
    assert state.flip(4).seed.cluster[4] * x[4] == x[0] + x[3]


def test_ptolemy_relation_c11(x):
    x1, x2 = x
    triangulation = initial_triangulation(MarkedAnnulus(1, 1))
    relation = ptolemy_relation(triangulation, 1, [x1, x2])
    assert by_key([relation.plus, relation.minus]) == by_key([x1 ** 2, LaurentPoly.one(2)])
    assert relation.new_variable() * x2 == x1 ** 2 + 1


@pytest.mark.slow
@pytest.mark.parametrize("annulus", ANNULI, ids=str)
def test_flip_commutes_with_mutation(annulus):
    graph = triangulation_graph(TriangulationSeed.initial(annulus), 4)
    for state in graph.states:
        quiver = state.triangulation.quiver()
        assert quiver == state.seed.quiver
        for i in range(state.n):
            assert quiver_of(state.triangulation.flip(i)) == quiver.mutate(i)
            relation = state.relation(i)
            assert by_key([relation.plus, relation.minus]) == by_key(state.seed.exchange_polynomials(i))


@pytest.mark.parametrize("annulus", ANNULI, ids=str)
def test_flip_is_involutive(annulus):
    rng = random.Random(annulus.rank)
    for _ in range(70):
        triangulation = random_triangulation(annulus, rng.randrange(8), rng)
        i = rng.randrange(triangulation.n)
        assert triangulation.flip(i).flip(i) == triangulation


def test_variable_of_arc_c11(x):
    x1, x2 = x
    c11 = MarkedAnnulus(1, 1)
    assert variable_of_arc(c11.arc(0, 0, 1, 0), c11) == x1
    assert variable_of_arc(c11.arc(0, 0, 1, 1), c11) == (x1 ** 2 + 1) * LaurentPoly.monomial([0, -1])


def test_variable_of_arc_is_independent_of_tie_breaking():
    c21 = MarkedAnnulus(2, 1)
    for arc in enumerate_arcs(c21, 1):
        expected = variable_of_arc(arc, c21)
        for seed in (1, 2):
            assert variable_of_arc(arc, c21, rng=random.Random(seed)) == expected


def test_denominators_match_crossings():
    c21 = MarkedAnnulus(2, 1)
    initial = initial_triangulation(c21)
    for arc in enumerate_arcs(c21, 2):
        denominator = variable_of_arc(arc, c21).reduced_form()[1]
        crossed = [crossing_number(arc, a, c21) > 0 for a in initial.arcs]
        assert [d > 0 for d in denominator] == crossed


def test_flip_toward():
    c21 = MarkedAnnulus(2, 1)
    root = TriangulationSeed.initial(c21)
    targets = [c21.arc(0, 0, 0, 2), c21.arc(0, 0, 1, 2)]
    state, flips = flip_toward(root, targets)
    assert all(t in state.triangulation for t in targets)
    assert len(flips) > 0
    with pytest.raises(InvalidArc):
        flip_toward(root, [c21.arc(0, 0, 1, 0), c21.arc(0, 1, 1, -1)])


def test_lift_triangulation():
    triangulation = initial_triangulation(MarkedAnnulus(1, 1))
    assert len(lift_triangulation(triangulation, 3)) == 6
    assert len(lift_triangulation(triangulation, 2)) == 4


@pytest.mark.parametrize("window", [-1, 0, 1])
def test_lift_triangulation_needs_two_periods(window):
    with pytest.raises(WindowTooSmall, match="need at least 2"):
        lift_triangulation(initial_triangulation(MarkedAnnulus(1, 1)), window)


def test_deck_translate():
    c32 = MarkedAnnulus(3, 2)
    arc = c32.arc(0, 0, 1, 0)
    assert deck_translate(arc, 2, c32) == (Point(0, 6), Point(1, 4))


def test_cover_flip_initial_c32():
    triangulation = initial_triangulation(MarkedAnnulus(3, 2))
    for i in range(triangulation.n):
        assert verify_cover_flip(triangulation, i, 4)
    with pytest.raises(WindowTooSmall):
        verify_cover_flip(triangulation, 0, 1)


@pytest.mark.slow
@pytest.mark.parametrize("p,q", [(2, 1), (2, 2), (3, 2)])
def test_cover_flip_random(p, q):
    rng = random.Random(p * q)
    annulus = MarkedAnnulus(p, q)
    for _ in range(20):
        triangulation = random_triangulation(annulus, rng.randrange(10), rng)
        assert verify_cover_flip(triangulation, rng.randrange(triangulation.n), 4)


def test_triangulations_are_maximal():
    c21 = MarkedAnnulus(2, 1)
    for triangulation in flip_graph(initial_triangulation(c21), 2).states:
        for arc in enumerate_arcs(c21, 2):
            if arc not in triangulation:
                assert any(crossing_number(arc, a, c21) for a in triangulation.arcs)


def test_crossing_symmetry_and_deck_invariance():
    c32 = MarkedAnnulus(3, 2)
    arcs = enumerate_arcs(c32, 1)
    rng = random.Random(5)
    crossed = 0
    for _ in range(200):
        a, b = rng.choice(arcs), rng.choice(arcs)
        count = crossing_number(a, b, c32)
        assert count == crossing_number(b, a, c32)
        crossed += count > 0
        k = rng.choice([-3, -2, -1, 1, 2, 3])
        moved_a, moved_b = deck_translate(a, k, c32), deck_translate(b, k, c32)
        assert moved_b != b.endpoints
        assert _raw_crossing(moved_a, moved_b, c32) == count
        assert _raw_crossing(a.endpoints, moved_b, c32) == count
        assert _raw_crossing(moved_a, b.endpoints, c32) == count
        assert c32.canonical(*moved_b) == b
        assert crossing_number(a, c32.canonical(*moved_b), c32) == count
    assert crossed > 0


def test_crossing_number_wants_canonical_lifts():
    c21 = MarkedAnnulus(2, 1)
    arc = c21.arc(0, 0, 1, 0)
    moved = ArcLift(*deck_translate(arc, 1, c21))
    with pytest.raises(AnnulusMismatch):
        crossing_number(arc, moved, c21)


def test_compatibility_matches_shared_clusters():
    c21 = MarkedAnnulus(2, 1)
    root = TriangulationSeed.initial(c21)
    graph = triangulation_graph(root, 3)
    arcs = sorted({arc for state in graph.states for arc in state.triangulation.arcs})
    together = {frozenset((a, b)) for state in graph.states for a in state.triangulation.arcs
                for b in state.triangulation.arcs if a != b}
    for i, a in enumerate(arcs):
        for b in arcs[i + 1:]:
            compatible = crossing_number(a, b, c21) == 0
            if frozenset((a, b)) in together:
                assert compatible
            elif compatible:
                state, _ = flip_toward(root, [a, b])
                assert a in state.triangulation and b in state.triangulation


@pytest.mark.slow
@pytest.mark.parametrize("p,q", [(2, 1), (2, 2)])
def test_compatibility_matches_shared_clusters_depth_4(p, q):
    annulus = MarkedAnnulus(p, q)
    root = TriangulationSeed.initial(annulus)
    flips = triangulation_graph(root, 4)
    graph = exchange_graph(root.seed, 4)
    assert {frozenset(state.seed.cluster) for state in flips.states} == {seed.cluster_set() for seed in graph.nodes}
    arc_of = {
        v: arc for state in flips.states for arc, v in zip(state.triangulation.arcs, state.seed.cluster)
    }
    assert set(arc_of) == graph.variables()

    pool = sorted(set(arc_of.values()))
    crossing = {(a, b): crossing_number(a, b, annulus) for a, b in itertools.permutations(pool, 2)}
    together = {
        frozenset((arc_of[u], arc_of[v]))
        for seed in graph.nodes
        for u, v in itertools.combinations(seed.cluster, 2)
    }
    for pair in together:
        a, b = sorted(pair)
        assert crossing[a, b] == 0

    # b is one flip away from a cluster holding a strictly inside the radius
    inside = [
        frozenset(arc_of[v] for v in seed.cluster)
        for i, seed in enumerate(graph.nodes)
        if graph.distance[i] < graph.depth
    ]
    checked = 0
    for a, b in itertools.combinations(pool, 2):
        if crossing[a, b]:
            continue
        near = any(
            x in arcs and sum(crossing.get((y, arc), 0) for arc in arcs) == 1
            for x, y in ((a, b), (b, a))
            for arcs in inside
        )
        if near:
            checked += 1
            assert frozenset((a, b)) in together
    assert checked >= annulus.rank * (annulus.rank - 1)


def test_json_codecs():
    triangulation = random_triangulation(MarkedAnnulus(2, 2), 5, random.Random(3))
    assert Triangulation.from_json(triangulation.to_json()) == triangulation
    arc = triangulation.arcs[0]
    assert ArcLift.from_json(arc.to_json()) == arc
    with pytest.raises(InvalidArc):
        ArcLift.from_json({"e1": {"b": 0}})


def test_peripheral_arcs_of_different_boundaries_never_cross():
    c32 = MarkedAnnulus(3, 2)
    for a in canonical_peripheral_arcs(c32, 0):
        for b in canonical_peripheral_arcs(c32, 1):
            assert crossing_number(a, b, c32) == 0
