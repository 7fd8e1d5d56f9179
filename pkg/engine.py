"""
Seeds, the exchange relation and bounded exchange graphs.

A seed is a quiver together with an ordered cluster of Laurent polynomials in
the variables of a fixed reference cluster.  Every enumeration here is bounded
by a depth and a node limit; cluster algebras of affine type are infinite.
"""
from __future__ import annotations

import functools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import (
    Callable,
    Dict,
    FrozenSet,
    Hashable,
    Iterable,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    TypeVar,
)

from laurent import ArityMismatch, LaurentPoly, ZeroPolynomialError
from quiver import LimitExceeded, PointIndexError, Quiver

DenominatorVector = Tuple[int, ...]
State = TypeVar("State")


class EngineError(Exception):
    """base error of the engine module"""


class InvalidSeed(EngineError, ValueError):
    pass


class DependentCluster(InvalidSeed):
    """root cluster fails the Jacobian criterion"""


class ExactDivisionFailed(EngineError, ArithmeticError):
    """an exchange relation did not divide exactly"""

    def __init__(self, seed: "Seed", k: int):
        super().__init__(
            f"exchange relation at direction {k} is not divisible by {seed.cluster[k]}"
        )
        self.seed = seed
        self.k = k


class NoPartnerFound(EngineError):
    def __init__(self, i: int):
        super().__init__(f"no pool variable has denominator e{i + 1}")
        self.i = i


class AmbiguousPartner(EngineError):
    def __init__(self, i: int, partners: Sequence[LaurentPoly]):
        super().__init__(
            f"{len(partners)} pool variables have denominator e{i + 1}: "
            + ", ".join(str(p) for p in partners)
        )
        self.i = i
        self.partners = list(partners)


class NotTwoMonomials(EngineError):
    def __init__(self, i: int, numerator: LaurentPoly):
        super().__init__(f"partner numerator of z{i + 1} is not a sum of two monomials: {numerator}")
        self.i = i
        self.numerator = numerator


class InconsistentOrientation(EngineError):
    pass


class UndefinedImage(EngineError, KeyError):
    pass


# ----------------------------------------------------------------------
# seeds
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Seed:
    quiver: Quiver
    cluster: Tuple[LaurentPoly, ...]

    def __post_init__(self):
        object.__setattr__(self, "cluster", tuple(self.cluster))
        if len(self.cluster) != self.quiver.n:
            raise InvalidSeed(
                f"cluster has {len(self.cluster)} variables, quiver has {self.quiver.n} points"
            )
        if len({v.arity for v in self.cluster}) > 1:
            raise ArityMismatch("cluster variables live in different rings")
        if len(set(self.cluster)) != len(self.cluster):
            raise InvalidSeed("cluster variables are not pairwise distinct")

    @classmethod
    def root(cls, quiver: Quiver, cluster: Sequence[LaurentPoly]) -> "Seed":
        """seed whose cluster is checked for algebraic independence"""
        seed = cls(quiver, tuple(cluster))
        if not is_algebraically_independent(seed.cluster):
            raise DependentCluster("root cluster is algebraically dependent")
        return seed

    @property
    def n(self) -> int:
        return self.quiver.n

    @property
    def arity(self) -> int:
        return self.cluster[0].arity if self.cluster else 0

    def exchange_polynomials(self, k: int) -> Tuple[LaurentPoly, LaurentPoly]:
        """(product over arrows leaving k, product over arrows entering k)"""
        if not 0 <= k < self.n:
            raise PointIndexError(f"mutation index k={k} out of bounds for size {self.n}")
        plus = LaurentPoly.one(self.arity)
        minus = LaurentPoly.one(self.arity)
        for j, value in enumerate(self.quiver.b[k]):
            if value > 0:
                plus = plus * self.cluster[j].pow(value)
            elif value < 0:
                minus = minus * self.cluster[j].pow(-value)
        return plus, minus

    def exchanged_variable(self, k: int) -> Optional[LaurentPoly]:
        """new variable at k, or None when the relation does not divide"""
        plus, minus = self.exchange_polynomials(k)
        return (plus + minus).try_div_exact(self.cluster[k])

    def mutate(self, k: int) -> "Seed":
        new_variable = self.exchanged_variable(k)
        if new_variable is None:
            raise ExactDivisionFailed(self, k)
        cluster = list(self.cluster)
        cluster[k] = new_variable
        logging.debug("mutate at %d: %s", k, new_variable)
        return Seed(self.quiver.mutate(k), tuple(cluster))

    def canonical(self) -> "Seed":
        """cluster sorted by the Laurent term order, quiver permuted along"""
        order = sorted(range(self.n), key=lambda i: self.cluster[i].sort_key())
        return Seed(self.quiver.permute(order), tuple(self.cluster[i] for i in order))

    def cluster_set(self) -> FrozenSet[LaurentPoly]:
        return frozenset(self.cluster)

    def reorder(self, cluster: Sequence[LaurentPoly]) -> "Seed":
        """same seed with its cluster listed in the given order"""
        order = []
        for v in cluster:
            try:
                order.append(self.cluster.index(v))
            except ValueError:
                raise InvalidSeed(f"{v} is not in the cluster") from None
        return Seed(self.quiver.permute(order), tuple(cluster))

    def to_json(self) -> dict:
        return {"quiver": self.quiver.to_json(), "cluster": [v.to_json() for v in self.cluster]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Seed":
        try:
            quiver = Quiver.from_json(data["quiver"])
            cluster = tuple(LaurentPoly.from_json(v) for v in data["cluster"])
        except (KeyError, TypeError) as exception:
            raise InvalidSeed(f"invalid seed JSON: {exception}") from exception
        return cls(quiver, cluster)


def initial_seed(quiver: Quiver) -> Seed:
    return Seed(quiver, LaurentPoly.coordinates(quiver.n))


def mutate_seed(seed: Seed, k: int) -> Seed:
    return seed.mutate(k)


def canonical(seed: Seed) -> Seed:
    return seed.canonical()


def exchange_polynomials(seed: Seed, k: int) -> Tuple[LaurentPoly, LaurentPoly]:
    return seed.exchange_polynomials(k)


# ----------------------------------------------------------------------
# bounded breadth first search
# ----------------------------------------------------------------------
@dataclass
class BfsResult:
    states: List = field(default_factory=list)
    keys: List[Hashable] = field(default_factory=list)
    index: Dict[Hashable, int] = field(default_factory=dict)
    distance: List[int] = field(default_factory=list)
    adjacency: List[Dict[Hashable, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.states)

    def edge_set(self) -> Set[FrozenSet[Hashable]]:
        """undirected edges as pairs of node keys"""
        return {
            frozenset((self.keys[i], self.keys[j]))
            for i, slots in enumerate(self.adjacency)
            for j in slots.values()
        }


def bounded_bfs(
    root: State,
    key: Callable[[State], Hashable],
    expand: Callable[[State], Iterable[Tuple[Hashable, State]]],
    depth: int,
    node_limit: int,
    what: str = "graph",
) -> BfsResult:
    """breadth first search to a depth, expanding nodes strictly inside the depth

    expand(state) yields (label, neighbor) pairs; adjacency[i][label] is the
    index of the neighbor reached from node i along label.
    """
    if depth < 0:
        raise EngineError(f"depth must be non negative, got {depth}")
    result = BfsResult()

    def visit(state, distance) -> int:
        state_key = key(state)
        found = result.index.get(state_key)
        if found is not None:
            return found
        if len(result.states) >= node_limit:
            raise LimitExceeded(what, node_limit)
        result.index[state_key] = len(result.states)
        result.states.append(state)
        result.keys.append(state_key)
        result.distance.append(distance)
        result.adjacency.append({})
        return len(result.states) - 1

    visit(root, 0)
    frontier = deque([0])
    while frontier:
        i = frontier.popleft()
        if result.distance[i] >= depth:
            continue
        for label, neighbor in expand(result.states[i]):
            before = len(result.states)
            j = visit(neighbor, result.distance[i] + 1)
            result.adjacency[i][label] = j
            if j == before:
                frontier.append(j)
    logging.debug("%s: %d nodes to depth %d", what, len(result.states), depth)
    return result


# ----------------------------------------------------------------------
# exchange graph
# ----------------------------------------------------------------------
@dataclass
class ExchangeGraph:
    """canonical seeds reachable from a root within a depth"""

    depth: int
    nodes: List[Seed]
    distance: List[int]
    adjacency: List[Dict[int, int]]
    root: int = 0
    _by_cluster: Dict[FrozenSet[LaurentPoly], int] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._by_cluster:
            self._by_cluster = {seed.cluster_set(): i for i, seed in enumerate(self.nodes)}

    def __len__(self) -> int:
        return len(self.nodes)

    def edges(self) -> List[Tuple[int, int, int]]:
        """half edges (node, direction, node) in node order"""
        return [(i, k, j) for i, slots in enumerate(self.adjacency) for k, j in sorted(slots.items())]

    def edge_set(self) -> Set[FrozenSet[FrozenSet[LaurentPoly]]]:
        return {
            frozenset((self.nodes[i].cluster_set(), self.nodes[j].cluster_set()))
            for i, _, j in self.edges()
        }

    def node_of(self, cluster: Iterable[LaurentPoly]) -> Optional[int]:
        return self._by_cluster.get(frozenset(cluster))

    def variables(self) -> Set[LaurentPoly]:
        return {v for seed in self.nodes for v in seed.cluster}

    def to_json(self) -> dict:
        return {
            "root": self.root,
            "depth": self.depth,
            "nodes": [
                {"id": i, "distance": d, "seed": seed.to_json()}
                for i, (seed, d) in enumerate(zip(self.nodes, self.distance))
            ],
            "edges": [list(e) for e in self.edges()],
        }

    def to_dot(self) -> str:
        lines = ["graph exchange {"]
        for i, seed in enumerate(self.nodes):
            label = " ".join(
                "(" + ",".join(str(d) for d in denominator_vector(v)) + ")" for v in seed.cluster
            )
            lines.append(f'  {i} [label="{label}"];')
        drawn = set()
        for i, k, j in self.edges():
            if frozenset((i, j)) not in drawn:
                drawn.add(frozenset((i, j)))
                lines.append(f'  {i} -- {j} [label="{k + 1}"];')
        lines.append("}")
        return "\n".join(lines)


def _mutations(seed: Seed) -> Iterable[Tuple[int, Seed]]:
    for k in range(seed.n):
        yield k, seed.mutate(k).canonical()


def exchange_graph(seed: Seed, depth: int, node_limit: int = 20000) -> ExchangeGraph:
    result = bounded_bfs(
        seed.canonical(), lambda s: s, _mutations, depth, node_limit, "exchange graph"
    )
    logging.info("exchange graph: %d seeds to depth %d", len(result), depth)
    return ExchangeGraph(depth, result.states, result.distance, result.adjacency)


def variables_up_to_depth(seed: Seed, depth: int, node_limit: int = 20000) -> Set[LaurentPoly]:
    return exchange_graph(seed, depth, node_limit).variables()


# ----------------------------------------------------------------------
# denominators and independence
# ----------------------------------------------------------------------
def denominator_vector(v: LaurentPoly) -> DenominatorVector:
    if v.is_zero():
        raise ZeroPolynomialError("zero has no denominator vector")
    return v.reduced_form()[1]


def unit_vector(i: int, n: int) -> DenominatorVector:
    return tuple(1 if j == i else 0 for j in range(n))


def jacobian_determinant(vs: Sequence[LaurentPoly]) -> LaurentPoly:
    n = len(vs)
    for v in vs:
        if v.arity != n:
            raise ArityMismatch(f"{n} polynomials in {v.arity} variables")
    matrix = [[v.partial_derivative(j) for j in range(n)] for v in vs]

    # Laplace expansion along rows, memoized on the remaining columns
    @functools.lru_cache(maxsize=None)
    def minor(row: int, columns: int) -> LaurentPoly:
        if row == n:
            return LaurentPoly.one(n)
        total = LaurentPoly.zero(n)
        position = 0
        for column in range(n):
            if not columns >> column & 1:
                continue
            entry = matrix[row][column]
            if not entry.is_zero():
                term = entry * minor(row + 1, columns & ~(1 << column))
                total = total - term if position % 2 else total + term
            position += 1
        return total

    return minor(0, (1 << n) - 1)


def is_algebraically_independent(vs: Sequence[LaurentPoly]) -> bool:
    return not jacobian_determinant(vs).is_zero()


@dataclass
class PositivityReport:
    depth: int
    checked: int = 0
    violations: List[LaurentPoly] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def positivity_audit(seed: Seed, depth: int, node_limit: int = 20000) -> PositivityReport:
    report = PositivityReport(depth)
    for v in sorted(variables_up_to_depth(seed, depth, node_limit), key=LaurentPoly.sort_key):
        report.checked += 1
        if not v.has_nonneg_numerator():
            logging.warning("negative coefficient in %s", v)
            report.violations.append(v)
    logging.info(
        "positivity audit to depth %d: %d variables, %d violations",
        depth, report.checked, len(report.violations),
    )
    return report


# ----------------------------------------------------------------------
# quiver recovery from denominators
# ----------------------------------------------------------------------
def _coordinate_index(z: LaurentPoly) -> Optional[int]:
    if not z.is_monomial():
        return None
    (exponents, coefficient), = z.items()
    if coefficient != 1 or sorted(exponents) != [0] * (len(exponents) - 1) + [1]:
        return None
    return exponents.index(1)


def infer_exchange_quiver(cluster: Sequence[LaurentPoly], pool: Iterable[LaurentPoly]) -> Quiver:
    """quiver of the seed with the given cluster, up to opposite

    The cluster must be the coordinate system of the pool, in any order.  For
    each zi the unique pool variable with denominator ei times zi splits into
    the two monomials of the exchange relation at i.
    """
    n = len(cluster)
    coordinate = []
    for z in cluster:
        c = _coordinate_index(z)
        if c is None or z.arity != n:
            raise EngineError(f"{z} is not a coordinate of the reference frame")
        coordinate.append(c)
    position = {c: i for i, c in enumerate(coordinate)}
    pool = list(pool)

    halves: List[Tuple[Dict[int, int], Dict[int, int]]] = []
    for i in range(n):
        target = unit_vector(coordinate[i], n)
        partners = [v for v in pool if not v.is_zero() and denominator_vector(v) == target]
        if not partners:
            raise NoPartnerFound(i)
        if len(set(partners)) > 1:
            raise AmbiguousPartner(i, sorted(set(partners), key=LaurentPoly.sort_key))
        numerator = partners[0] * cluster[i]
        terms = numerator.items()
        if len(terms) != 2 or any(c != 1 for _, c in terms) or any(
            min(e) < 0 or e[coordinate[i]] for e, _ in terms
        ):
            raise NotTwoMonomials(i, numerator)
        halves.append(
            tuple({position[c]: e[c] for c in range(n) if e[c]} for e, _ in terms)
        )

    for i in range(n):
        for j in range(n):
            wi = sum(h.get(j, 0) for h in halves[i])
            wj = sum(h.get(i, 0) for h in halves[j])
            if wi != wj:
                raise InconsistentOrientation(
                    f"z{i + 1} sees z{j + 1} {wi} times, z{j + 1} sees z{i + 1} {wj} times"
                )

    # out[i] selects which half of halves[i] lists the targets of arrows at i
    out: Dict[int, int] = {}
    for start in range(n):
        if start in out:
            continue
        out[start] = 0
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for side in (0, 1):
                for j in halves[i][side]:
                    leaving = side == out[i]
                    # i -> j means i lies in the entering half at j
                    side_j = 0 if i in halves[j][0] else 1
                    wanted = 1 - side_j if leaving else side_j
                    if j in out:
                        if out[j] != wanted:
                            raise InconsistentOrientation(
                                f"orientation of z{i + 1} and z{j + 1} disagree"
                            )
                    else:
                        out[j] = wanted
                        queue.append(j)

    b = [[0] * n for _ in range(n)]
    for i in range(n):
        for j, w in halves[i][out[i]].items():
            b[i][j] = w
        for j, w in halves[i][1 - out[i]].items():
            b[i][j] = -w
    quiver = Quiver.from_matrix(b)
    logging.info("inferred exchange quiver with %d arrows", len(quiver.arrows()))
    return quiver


# ----------------------------------------------------------------------
# automorphism candidates
# ----------------------------------------------------------------------
def check_automorphism_candidate(
    seed: Seed,
    f: Mapping[LaurentPoly, LaurentPoly],
    depth: int,
    node_limit: int = 20000,
) -> bool:
    """bounded check that f maps the cluster to a cluster and commutes with mutation

    A False answer is conclusive.  True means no violation was met while
    following f along every mutation path shorter than depth.
    """
    try:
        images = tuple(f[v] for v in seed.cluster)
    except KeyError as exception:
        raise UndefinedImage(f"no image for {exception.args[0]}") from None
    if len(set(images)) != len(images):
        logging.info("automorphism candidate is not injective on the cluster")
        return False

    graph = exchange_graph(seed, depth, node_limit)
    node = graph.node_of(images)
    if node is None:
        logging.info("image of the cluster is not a cluster within depth %d", depth)
        return False
    image_seed = graph.nodes[node].reorder(images)

    seen = {seed.cluster_set()}
    frontier = deque([(seed, image_seed, 0)])
    while frontier:
        source, image, distance = frontier.popleft()
        if distance >= depth:
            continue
        for k in range(source.n):
            # f applied to the mutated variable of the source
            transported = Seed(source.quiver, image.cluster).exchanged_variable(k)
            if transported is None:
                logging.info("image of mutation %d is not a Laurent polynomial", k)
                return False
            mutated_image = image.mutate(k)
            if mutated_image.cluster[k] != transported:
                logging.info("f does not commute with mutation at direction %d", k)
                return False
            mutated = source.mutate(k)
            if mutated.cluster_set() not in seen:
                if len(seen) >= node_limit:
                    raise LimitExceeded("automorphism check", node_limit)
                seen.add(mutated.cluster_set())
                frontier.append((mutated, mutated_image, distance + 1))
    return True
