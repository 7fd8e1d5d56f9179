"""
Triangulations of the marked annulus C(p,q) worked out on its universal cover.

The universal cover of the annulus is a strip.  Boundary 0 (the outer one,
p marked points) lifts to the bottom edge, boundary 1 (q marked points) to
the top edge, and marked points become integer positions; the deck
translation shifts bottom positions by p and top positions by q.  An arc is
stored as one lift, a chord of the strip, reduced to a canonical translate.

Two chords cross iff their endpoints interleave strictly along the strip
boundary, read as bottom positions ascending and then top positions
descending.  Every construction below (crossings, triangles, flips, lifts)
reduces to that test.
"""
from __future__ import annotations

import logging
import math
import random
import re
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from engine import BfsResult, Seed, bounded_bfs, initial_seed
from laurent import LaurentPoly
from quiver import Quiver


class AnnulusError(Exception):
    """base error of the annulus module"""


class InvalidAnnulus(AnnulusError, ValueError):
    pass


class InvalidArc(AnnulusError, ValueError):
    pass


class AnnulusMismatch(AnnulusError, ValueError):
    pass


class ArcNotInTriangulation(AnnulusError, KeyError):
    pass


class MalformedTriangulation(AnnulusError):
    pass


class NonTermination(AnnulusError, RuntimeError):
    pass


class WindowTooSmall(AnnulusError, ValueError):
    pass


class MissingAssignment(AnnulusError, KeyError):
    pass


# ----------------------------------------------------------------------
# points and arcs
# ----------------------------------------------------------------------
@dataclass(frozen=True, order=True)
class Point:
    boundary: int
    pos: int

    def key(self) -> Tuple[int, int]:
        """position along the strip boundary"""
        return (0, self.pos) if self.boundary == 0 else (1, -self.pos)

    def __str__(self) -> str:
        return f"{self.boundary}@{self.pos}"


@dataclass(frozen=True, order=True)
class ArcLift:
    e1: Point
    e2: Point

    @property
    def endpoints(self) -> Tuple[Point, Point]:
        return self.e1, self.e2

    def is_bridging(self) -> bool:
        return self.e1.boundary != self.e2.boundary

    def __str__(self) -> str:
        return f"{self.e1}-{self.e2}"

    def to_json(self) -> dict:
        return {
            "e1": {"b": self.e1.boundary, "pos": self.e1.pos},
            "e2": {"b": self.e2.boundary, "pos": self.e2.pos},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "ArcLift":
        try:
            return cls(
                Point(int(data["e1"]["b"]), int(data["e1"]["pos"])),
                Point(int(data["e2"]["b"]), int(data["e2"]["pos"])),
            )
        except (KeyError, TypeError, ValueError) as exception:
            raise InvalidArc(f"invalid arc JSON: {exception}") from exception


Chord = Tuple[Point, Point]

_ARC_PATTERN = re.compile(r"^\s*([01])@(-?\d+)\s*-\s*([01])@(-?\d+)\s*$")


class ArcKind(Enum):
    PERIPHERAL = "Peripheral"
    BRIDGING = "Bridging"


@dataclass(frozen=True)
class ArcValidity:
    valid: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.valid


def _interleaved(a: Chord, b: Chord) -> bool:
    lo, hi = sorted((a[0].key(), a[1].key()))
    inside = 0
    for point in b:
        k = point.key()
        if k == lo or k == hi:
            return False
        if lo < k < hi:
            inside += 1
    return inside == 1


@dataclass(frozen=True)
class MarkedAnnulus:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise InvalidAnnulus(f"C({self.p},{self.q}) needs a marked point on each boundary")

    def __str__(self) -> str:
        return f"C({self.p},{self.q})"

    @property
    def rank(self) -> int:
        return self.p + self.q

    def period(self, boundary: int) -> int:
        if boundary not in (0, 1):
            raise InvalidArc(f"boundary must be 0 or 1, got {boundary}")
        return self.p if boundary == 0 else self.q

    def x(self, point: Point) -> Fraction:
        """horizontal coordinate in deck periods"""
        return Fraction(point.pos, self.period(point.boundary))

    # deck translation
    def translate_point(self, point: Point, k: int) -> Point:
        return Point(point.boundary, point.pos + k * self.period(point.boundary))

    def _normalizing_shift(self, points: Iterable[Point]) -> int:
        points = list(points)
        bottom = [pt.pos for pt in points if pt.boundary == 0]
        if bottom:
            return -(min(bottom) // self.p)
        return -(min(pt.pos for pt in points) // self.q)

    def canonical(self, e1: Point, e2: Point) -> ArcLift:
        """canonical translate of the chord e1 e2"""
        for e in (e1, e2):
            self.period(e.boundary)
        k = self._normalizing_shift((e1, e2))
        first, second = sorted((self.translate_point(e1, k), self.translate_point(e2, k)))
        return ArcLift(first, second)

    def arc(self, b1: int, pos1: int, b2: int, pos2: int) -> ArcLift:
        """validated canonical arc from endpoint coordinates"""
        arc = self.canonical(Point(b1, pos1), Point(b2, pos2))
        validity = is_valid_arc(arc, self)
        if not validity:
            raise InvalidArc(f"{arc} is not an arc of {self}: {validity.reason}")
        return arc

    def parse_arc(self, text: str) -> ArcLift:
        """read an arc written as '0@0-1@2'"""
        match = _ARC_PATTERN.match(text)
        if match is None:
            raise InvalidArc(f"cannot read arc '{text}', expected b@pos-b@pos")
        b1, pos1, b2, pos2 = (int(g) for g in match.groups())
        return self.arc(b1, pos1, b2, pos2)

    def owns(self, arc: ArcLift) -> bool:
        try:
            return self.canonical(arc.e1, arc.e2) == arc
        except AnnulusError:
            return False

    def span(self, arc: ArcLift) -> Fraction:
        return abs(self.x(arc.e1) - self.x(arc.e2))

    def boundary_segment(self, point: Point) -> Tuple[int, int]:
        """label of the boundary segment starting at point"""
        return point.boundary, point.pos % self.period(point.boundary)


def _raw_crossing(a: Chord, b: Chord, annulus: MarkedAnnulus) -> int:
    a_x = sorted(annulus.x(e) for e in a)
    b_x = sorted(annulus.x(e) for e in b)
    low = math.floor(a_x[0] - b_x[1]) - 1
    high = math.ceil(a_x[1] - b_x[0]) + 1
    count = 0
    for k in range(low, high + 1):
        translated = tuple(annulus.translate_point(e, k) for e in b)
        if _interleaved(a, translated):
            count += 1
    return count


def is_valid_arc(arc, annulus: MarkedAnnulus) -> ArcValidity:
    """validity of a raw endpoint pair, with the clause that failed"""
    e1, e2 = arc.endpoints if isinstance(arc, ArcLift) else arc
    for e in (e1, e2):
        if e.boundary not in (0, 1):
            return ArcValidity(False, f"boundary {e.boundary} does not exist")
    if e1.boundary == e2.boundary:
        delta = abs(e1.pos - e2.pos)
        if delta == 0:
            return ArcValidity(False, "contractible")
        if delta == 1:
            return ArcValidity(False, "boundary segment")
    if _raw_crossing((e1, e2), (e1, e2), annulus):
        return ArcValidity(False, "self-intersecting")
    return ArcValidity(True)


def _check_arc(arc: ArcLift, annulus: MarkedAnnulus) -> None:
    if not annulus.owns(arc):
        raise AnnulusMismatch(f"{arc} is not a canonical arc of {annulus}")
    validity = is_valid_arc(arc, annulus)
    if not validity:
        raise InvalidArc(f"{arc}: {validity.reason}")


def crossing_number(a: ArcLift, b: ArcLift, annulus: MarkedAnnulus) -> int:
    _check_arc(a, annulus)
    _check_arc(b, annulus)
    return _raw_crossing(a.endpoints, b.endpoints, annulus)


def deck_translate(arc: ArcLift, k: int, annulus: MarkedAnnulus) -> Chord:
    """k-th translate of the lift, as a raw chord"""
    return tuple(annulus.translate_point(e, k) for e in arc.endpoints)


def classify_arc(arc: ArcLift) -> Tuple[ArcKind, Optional[int]]:
    """(kind, boundary) with boundary None for bridging arcs"""
    if arc.is_bridging():
        return ArcKind.BRIDGING, None
    return ArcKind.PERIPHERAL, arc.e1.boundary


def canonical_peripheral_arcs(annulus: MarkedAnnulus, boundary: int) -> List[ArcLift]:
    period = annulus.period(boundary)
    arcs = []
    for start in range(period):
        for span in range(2, period + 1):
            arcs.append(annulus.canonical(Point(boundary, start), Point(boundary, start + span)))
    return sorted(set(arcs))


def bridging_arcs(annulus: MarkedAnnulus, periods: int) -> List[ArcLift]:
    """bridging arcs whose lift spans at most the given number of periods"""
    arcs = []
    for i in range(annulus.p):
        x0 = Fraction(i, annulus.p)
        for j in range(-(periods + 1) * annulus.q, (periods + 2) * annulus.q):
            if abs(Fraction(j, annulus.q) - x0) <= periods:
                arcs.append(ArcLift(Point(0, i), Point(1, j)))
    return arcs


def enumerate_arcs(annulus: MarkedAnnulus, periods: int) -> List[ArcLift]:
    return (
        canonical_peripheral_arcs(annulus, 0)
        + canonical_peripheral_arcs(annulus, 1)
        + bridging_arcs(annulus, periods)
    )


# ----------------------------------------------------------------------
# triangles
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Side:
    """an interior arc of the triangulation or a boundary segment"""

    arc: Optional[int] = None
    segment: Optional[Tuple[int, int]] = None

    @property
    def is_boundary(self) -> bool:
        return self.arc is None

    def __str__(self) -> str:
        if self.arc is not None:
            return f"arc {self.arc}"
        return f"segment {self.segment[0]}@{self.segment[1]}"


@dataclass(frozen=True)
class Triangle:
    """vertices in counterclockwise order, sides[i] joins vertices i and i+1"""

    vertices: Tuple[Point, Point, Point]
    sides: Tuple[Side, Side, Side]


def _third_vertices(u: Point, v: Point, neighbors: Callable[[Point], Set[Point]]) -> Tuple[Point, Point]:
    """apexes (inside, outside) of the two faces on the chord u v, key(u) < key(v)"""
    lo, hi = u.key(), v.key()
    common = neighbors(u) & neighbors(v)
    inside = [w for w in common if lo < w.key() < hi]
    outside = [w for w in common if w.key() < lo or w.key() > hi]
    if len(inside) != 1 or len(outside) != 1:
        raise MalformedTriangulation(
            f"chord {u}-{v} borders {len(inside)} faces inside and {len(outside)} outside"
        )
    return inside[0], outside[0]


def _ordered(u: Point, v: Point) -> Tuple[Point, Point]:
    return (u, v) if u.key() < v.key() else (v, u)


# ----------------------------------------------------------------------
# triangulations
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Quadrilateral:
    """sides around the flipped arc, alpha opposite delta and beta opposite epsilon"""

    alpha: Side
    beta: Side
    delta: Side
    epsilon: Side


@dataclass(frozen=True)
class Triangulation:
    annulus: MarkedAnnulus
    arcs: Tuple[ArcLift, ...]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))

    @classmethod
    def of(cls, annulus: MarkedAnnulus, arcs: Sequence[ArcLift]) -> "Triangulation":
        """checked constructor"""
        triangulation = cls(annulus, tuple(arcs))
        triangulation.validate()
        return triangulation

    def validate(self) -> None:
        annulus = self.annulus
        if len(self.arcs) != annulus.rank:
            raise MalformedTriangulation(
                f"{len(self.arcs)} arcs, a triangulation of {annulus} has {annulus.rank}"
            )
        if len(set(self.arcs)) != len(self.arcs):
            raise MalformedTriangulation("repeated arc")
        for arc in self.arcs:
            _check_arc(arc, annulus)
        for i, a in enumerate(self.arcs):
            for b in self.arcs[i + 1:]:
                if _raw_crossing(a.endpoints, b.endpoints, annulus):
                    raise MalformedTriangulation(f"arcs {a} and {b} cross")

    @property
    def n(self) -> int:
        return len(self.arcs)

    def key(self) -> FrozenSet[ArcLift]:
        return frozenset(self.arcs)

    def __contains__(self, arc: ArcLift) -> bool:
        return arc in self.arcs

    def index(self, arc: ArcLift) -> int:
        try:
            return self.arcs.index(arc)
        except ValueError:
            raise ArcNotInTriangulation(f"{arc} is not in the triangulation") from None

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise ArcNotInTriangulation(f"no arc {i} in a triangulation of {self.n} arcs")

    # local structure
    def neighbors(self, point: Point) -> Set[Point]:
        """endpoints of the lifted arcs and boundary segments at a lifted point"""
        annulus = self.annulus
        period = annulus.period(point.boundary)
        result = {Point(point.boundary, point.pos - 1), Point(point.boundary, point.pos + 1)}
        for arc in self.arcs:
            for end, other in ((arc.e1, arc.e2), (arc.e2, arc.e1)):
                if end.boundary == point.boundary and (point.pos - end.pos) % period == 0:
                    result.add(annulus.translate_point(other, (point.pos - end.pos) // period))
        return result

    def side_of(self, u: Point, v: Point) -> Side:
        if u.boundary == v.boundary and abs(u.pos - v.pos) == 1:
            return Side(segment=self.annulus.boundary_segment(min(u, v)))
        arc = self.annulus.canonical(u, v)
        try:
            return Side(arc=self.arcs.index(arc))
        except ValueError:
            raise MalformedTriangulation(f"edge {u}-{v} is not an arc of the triangulation") from None

    def _triangle(self, a: Point, b: Point, c: Point) -> Triangle:
        vertices = tuple(sorted((a, b, c), key=Point.key))
        k = self.annulus._normalizing_shift(vertices)
        vertices = tuple(self.annulus.translate_point(v, k) for v in vertices)
        sides = tuple(self.side_of(vertices[i], vertices[(i + 1) % 3]) for i in range(3))
        return Triangle(vertices, sides)

    def faces_at(self, i: int) -> Tuple[Point, Point, Point, Point]:
        """(u, inside apex, v, outside apex) around arc i"""
        self._check_index(i)
        u, v = _ordered(*self.arcs[i].endpoints)
        inside, outside = _third_vertices(u, v, self.neighbors)
        return u, inside, v, outside

    def triangles(self) -> List[Triangle]:
        """one triangle per deck orbit"""
        found: Dict[Tuple[Point, ...], Triangle] = {}
        for i in range(self.n):
            u, inside, v, outside = self.faces_at(i)
            for apex in (inside, outside):
                triangle = self._triangle(u, v, apex)
                found.setdefault(triangle.vertices, triangle)
        return [found[key] for key in sorted(found, key=lambda vs: [p.key() for p in vs])]

    def quiver(self) -> Quiver:
        n = self.n
        b = [[0] * n for _ in range(n)]
        for triangle in self.triangles():
            for i in range(3):
                source, target = triangle.sides[i], triangle.sides[(i + 1) % 3]
                if source.is_boundary or target.is_boundary or source.arc == target.arc:
                    continue
                b[source.arc][target.arc] += 1
                b[target.arc][source.arc] -= 1
        return Quiver.from_matrix(b)

    # flips
    def flip_result(self, i: int) -> "FlipResult":
        u, inside, v, outside = self.faces_at(i)
        new_arc = self.annulus.canonical(inside, outside)
        quadrilateral = Quadrilateral(
            alpha=self.side_of(u, inside),
            beta=self.side_of(inside, v),
            delta=self.side_of(v, outside),
            epsilon=self.side_of(outside, u),
        )
        arcs = list(self.arcs)
        arcs[i] = new_arc
        logging.debug("flip %d: %s -> %s", i, self.arcs[i], new_arc)
        return FlipResult(Triangulation(self.annulus, tuple(arcs)), i, self.arcs[i], new_arc, quadrilateral)

    def flip(self, i: int) -> "Triangulation":
        return self.flip_result(i).triangulation

    def to_json(self) -> dict:
        return {
            "p": self.annulus.p,
            "q": self.annulus.q,
            "arcs": [arc.to_json() for arc in self.arcs],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Triangulation":
        try:
            annulus = MarkedAnnulus(int(data["p"]), int(data["q"]))
            arcs = [ArcLift.from_json(a) for a in data["arcs"]]
        except (KeyError, TypeError, ValueError) as exception:
            if isinstance(exception, AnnulusError):
                raise
            raise MalformedTriangulation(f"invalid triangulation JSON: {exception}") from exception
        return cls.of(annulus, [annulus.canonical(a.e1, a.e2) for a in arcs])


@dataclass(frozen=True)
class FlipResult:
    triangulation: Triangulation
    index: int
    old_arc: ArcLift
    new_arc: ArcLift
    quadrilateral: Quadrilateral


def initial_triangulation(annulus: MarkedAnnulus) -> Triangulation:
    """fan of bridging arcs: 1@0 to 0@0..0@p, then 0@p to 1@0..1@q"""
    p, q = annulus.p, annulus.q
    arcs = [ArcLift(Point(0, i), Point(1, 0)) for i in range(p)]
    arcs.append(ArcLift(Point(0, 0), Point(1, -q)))
    arcs.extend(ArcLift(Point(0, 0), Point(1, j - q)) for j in range(1, q))
    return Triangulation.of(annulus, arcs)


def triangles(triangulation: Triangulation) -> List[Triangle]:
    return triangulation.triangles()


def quiver_of(triangulation: Triangulation) -> Quiver:
    return triangulation.quiver()


def flip(triangulation: Triangulation, i: int) -> FlipResult:
    return triangulation.flip_result(i)


# ----------------------------------------------------------------------
# exchange relations on triangulations
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class PtolemyRelation:
    """x_gamma x_gamma' = plus + minus with boundary sides set to 1"""

    flip: FlipResult
    variable: LaurentPoly
    plus: LaurentPoly
    minus: LaurentPoly

    @property
    def rhs(self) -> LaurentPoly:
        return self.plus + self.minus

    def new_variable(self) -> Optional[LaurentPoly]:
        return self.rhs.try_div_exact(self.variable)


def _side_value(side: Side, assignment: Mapping[int, LaurentPoly], arity: int) -> LaurentPoly:
    if side.is_boundary:
        return LaurentPoly.one(arity)
    try:
        return assignment[side.arc]
    except (KeyError, IndexError):
        raise MissingAssignment(f"no variable assigned to arc {side.arc}") from None


def ptolemy_relation(
    triangulation: Triangulation, i: int, assignment: Mapping[int, LaurentPoly]
) -> PtolemyRelation:
    result = triangulation.flip_result(i)
    try:
        variable = assignment[i]
    except (KeyError, IndexError):
        raise MissingAssignment(f"no variable assigned to arc {i}") from None
    arity = variable.arity
    quad = result.quadrilateral
    value = lambda side: _side_value(side, assignment, arity)
    return PtolemyRelation(
        result,
        variable,
        value(quad.alpha) * value(quad.delta),
        value(quad.beta) * value(quad.epsilon),
    )


@dataclass(frozen=True)
class TriangulationSeed:
    """a triangulation and the seed on its arcs, flipped and mutated together"""

    triangulation: Triangulation
    seed: Seed

    @classmethod
    def initial(cls, annulus: MarkedAnnulus) -> "TriangulationSeed":
        triangulation = initial_triangulation(annulus)
        return cls(triangulation, initial_seed(triangulation.quiver()))

    @property
    def n(self) -> int:
        return self.triangulation.n

    def key(self) -> FrozenSet[ArcLift]:
        return self.triangulation.key()

    def variable(self, arc: ArcLift) -> LaurentPoly:
        return self.seed.cluster[self.triangulation.index(arc)]

    def assignment(self) -> Dict[ArcLift, LaurentPoly]:
        return dict(zip(self.triangulation.arcs, self.seed.cluster))

    def flip(self, i: int) -> "TriangulationSeed":
        return TriangulationSeed(self.triangulation.flip(i), self.seed.mutate(i))

    def flip_arc(self, arc: ArcLift) -> "TriangulationSeed":
        return self.flip(self.triangulation.index(arc))

    def relation(self, i: int) -> PtolemyRelation:
        return ptolemy_relation(self.triangulation, i, self.seed.cluster)


def _flips(state):
    for i in range(state.n):
        yield i, state.flip(i)


def flip_graph(triangulation: Triangulation, depth: int, node_limit: int = 20000) -> BfsResult:
    """triangulations reachable in at most depth flips"""
    return bounded_bfs(triangulation, Triangulation.key, _flips, depth, node_limit, "flip graph")


def triangulation_graph(root: TriangulationSeed, depth: int, node_limit: int = 20000) -> BfsResult:
    """triangulation seeds reachable in at most depth flips"""
    return bounded_bfs(root, TriangulationSeed.key, _flips, depth, node_limit, "triangulation seed graph")


def random_triangulation(annulus: MarkedAnnulus, steps: int, rng: random.Random) -> Triangulation:
    """random flip walk from the initial triangulation"""
    triangulation = initial_triangulation(annulus)
    for _ in range(steps):
        triangulation = triangulation.flip(rng.randrange(triangulation.n))
    return triangulation


# ----------------------------------------------------------------------
# arcs to cluster variables
# ----------------------------------------------------------------------
class ArcVariables:
    """memoized arc to cluster variable map, rooted at a triangulation seed

    The variable of an arc is found by flipping arcs of the root that cross
    it until it appears, mutating the seed along.  Among the arcs with the
    largest crossing number the smallest canonical arc is flipped first, or a
    random one when rng is given.
    """

    def __init__(self, root: TriangulationSeed, max_flips: int = 500, rng: Optional[random.Random] = None):
        self.root = root
        self.annulus = root.triangulation.annulus
        self.max_flips = max_flips
        self.rng = rng
        self._cache: Dict[ArcLift, LaurentPoly] = root.assignment()

    def __call__(self, arc: ArcLift) -> LaurentPoly:
        if arc not in self._cache:
            _check_arc(arc, self.annulus)
            self.walk(self.root, arc)
        return self._cache[arc]

    def __len__(self) -> int:
        return len(self._cache)

    def _remember(self, state: TriangulationSeed) -> None:
        for arc, variable in zip(state.triangulation.arcs, state.seed.cluster):
            self._cache.setdefault(arc, variable)

    def _crossings(self, triangulation: Triangulation, target: ArcLift) -> List[int]:
        return [
            _raw_crossing(arc.endpoints, target.endpoints, self.annulus)
            for arc in triangulation.arcs
        ]

    def _candidates(self, triangulation: Triangulation, crossings: List[int]) -> List[int]:
        """arcs crossing the target, most crossings first"""
        order = [i for i, c in enumerate(crossings) if c > 0]
        if self.rng is not None:
            self.rng.shuffle(order)
        else:
            order.sort(key=lambda i: triangulation.arcs[i])
        return sorted(order, key=lambda i: -crossings[i])

    def _improving_sequence(
        self, triangulation: Triangulation, target: ArcLift, total: int, max_length: int = 3
    ) -> List[int]:
        frontier = deque([(triangulation, [])])
        seen = {triangulation.key()}
        while frontier:
            current, sequence = frontier.popleft()
            if len(sequence) == max_length:
                continue
            for i in self._candidates(current, self._crossings(current, target)):
                following = current.flip(i)
                if following.key() in seen:
                    continue
                seen.add(following.key())
                if sum(self._crossings(following, target)) < total:
                    return sequence + [i]
                frontier.append((following, sequence + [i]))
        return []

    def _next_flips(self, triangulation: Triangulation, target: ArcLift) -> List[int]:
        crossings = self._crossings(triangulation, target)
        total = sum(crossings)
        best = max(crossings)
        for i in self._candidates(triangulation, crossings):
            if crossings[i] < best:
                break
            if sum(self._crossings(triangulation.flip(i), target)) < total:
                return [i]
        logging.debug("no single flip lowers the crossing with %s, searching", target)
        step = self._improving_sequence(triangulation, target, total)
        if not step:
            raise NonTermination(f"no flip sequence lowers the crossing with {target} below {total}")
        return step

    def walk(self, state: TriangulationSeed, target: ArcLift) -> Tuple[TriangulationSeed, List[int]]:
        """flip state until it contains target; returns the state and the flips"""
        flips: List[int] = []
        self._remember(state)
        while target not in state.triangulation:
            for i in self._next_flips(state.triangulation, target):
                state = state.flip(i)
                flips.append(i)
                self._remember(state)
            if len(flips) > self.max_flips:
                raise NonTermination(f"more than {self.max_flips} flips toward {target}")
        logging.debug("reached %s after %d flips", target, len(flips))
        return state, flips


def variable_of_arc(
    arc: ArcLift,
    annulus: MarkedAnnulus,
    root: Optional[TriangulationSeed] = None,
    max_flips: int = 500,
    rng: Optional[random.Random] = None,
) -> LaurentPoly:
    root = root or TriangulationSeed.initial(annulus)
    if root.triangulation.annulus != annulus:
        raise AnnulusMismatch(f"root triangulation lives on {root.triangulation.annulus}, not {annulus}")
    return ArcVariables(root, max_flips, rng)(arc)


def flip_toward(
    state: TriangulationSeed,
    targets: Sequence[ArcLift],
    max_flips: int = 500,
    rng: Optional[random.Random] = None,
) -> Tuple[TriangulationSeed, List[int]]:
    """flip until every target arc is present; targets must be pairwise compatible"""
    annulus = state.triangulation.annulus
    for i, a in enumerate(targets):
        _check_arc(a, annulus)
        for b in targets[i + 1:]:
            if _raw_crossing(a.endpoints, b.endpoints, annulus):
                raise InvalidArc(f"target arcs {a} and {b} cross")
    walker = ArcVariables(state, max_flips, rng)
    flips: List[int] = []
    for target in targets:
        state, steps = walker.walk(state, target)
        flips.extend(steps)
    return state, flips


# ----------------------------------------------------------------------
# the universal cover
# ----------------------------------------------------------------------
@dataclass
class LiftedTriangulation:
    """lifted chords of a triangulation for a range of deck translates"""

    annulus: MarkedAnnulus
    chords: Dict[Chord, int] = field(default_factory=dict)

    @classmethod
    def of(cls, triangulation: Triangulation, first: int, last: int) -> "LiftedTriangulation":
        lifted = cls(triangulation.annulus)
        for i, arc in enumerate(triangulation.arcs):
            for k in range(first, last):
                lifted.chords[_ordered(*deck_translate(arc, k, lifted.annulus))] = i
        return lifted

    def __len__(self) -> int:
        return len(self.chords)

    def neighbor_map(self) -> Dict[Point, Set[Point]]:
        result: Dict[Point, Set[Point]] = {}
        for u, v in self.chords:
            result.setdefault(u, set()).add(v)
            result.setdefault(v, set()).add(u)
        return result

    def within(self, low: Fraction, high: Fraction) -> Dict[Chord, int]:
        x = self.annulus.x
        return {
            chord: i
            for chord, i in self.chords.items()
            if all(low <= x(e) <= high for e in chord)
        }


def lift_triangulation(triangulation: Triangulation, window: int) -> LiftedTriangulation:
    """translates 0 .. window-1 of every arc"""
    if window < 2:
        raise WindowTooSmall(f"a window of {window} periods is too small, need at least 2")
    return LiftedTriangulation.of(triangulation, 0, window)


def verify_cover_flip(triangulation: Triangulation, i: int, window: int) -> bool:
    """flipping every lift of arc i in the lifted triangulation lifts the flip of arc i"""
    if window < 2:
        raise WindowTooSmall(f"a window of {window} periods is too small, need at least 2")
    annulus = triangulation.annulus
    triangulation._check_index(i)
    reach = max(math.ceil(annulus.span(arc)) for arc in triangulation.arcs) + 1
    margin = 5 * reach + 1
    lifted = LiftedTriangulation.of(triangulation, -margin, window + margin)
    adjacency = lifted.neighbor_map()

    def neighbors(point: Point) -> Set[Point]:
        return adjacency.get(point, set()) | {
            Point(point.boundary, point.pos - 1),
            Point(point.boundary, point.pos + 1),
        }

    flipped = dict(lifted.chords)
    for k in range(-2 * reach, window + 2 * reach):
        u, v = _ordered(*deck_translate(triangulation.arcs[i], k, annulus))
        inside, outside = _third_vertices(u, v, neighbors)
        del flipped[(u, v)]
        flipped[_ordered(inside, outside)] = i

    expected = LiftedTriangulation.of(triangulation.flip(i), -margin, window + margin)
    lo, hi = Fraction(0), Fraction(window)
    result = LiftedTriangulation(annulus, flipped).within(lo, hi) == expected.within(lo, hi)
    logging.debug("cover flip of arc %d over %d periods: %s", i, window, result)
    return result
