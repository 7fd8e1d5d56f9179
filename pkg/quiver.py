"""
Quivers without loops or 2-cycles, stored as skew-symmetric integer matrices.

b[i][j] > 0 means b[i][j] arrows i -> j.  Points are numbered from 0.
"""
from __future__ import annotations

import functools
import logging
from collections import defaultdict, deque
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import networkx as nx
from networkx.algorithms.isomorphism import DiGraphMatcher


class QuiverError(Exception):
    """base error of the quiver module"""


class InvalidQuiver(QuiverError, ValueError):
    pass


class PointIndexError(QuiverError, IndexError):
    pass


class LimitExceeded(Exception):
    """a bounded enumeration reached its node limit before closing"""

    def __init__(self, what: str, limit: int):
        super().__init__(f"{what}: more than {limit} nodes")
        self.limit = limit


class TypeKind(Enum):
    TILDE_A = "TildeA"
    OTHER = "Other"


@dataclass(frozen=True)
class TypeLabel:
    kind: TypeKind
    p: int = 0
    q: int = 0

    @classmethod
    def tilde_a(cls, p: int, q: int) -> "TypeLabel":
        return cls(TypeKind.TILDE_A, p, q)

    @classmethod
    def other(cls) -> "TypeLabel":
        return cls(TypeKind.OTHER)

    def to_json(self) -> dict:
        if self.kind is TypeKind.TILDE_A:
            return {"type": self.kind.value, "p": self.p, "q": self.q}
        return {"type": self.kind.value}


@dataclass(frozen=True)
class Quiver:
    b: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        n = len(self.b)
        for i, row in enumerate(self.b):
            if len(row) != n:
                raise InvalidQuiver("exchange matrix must be square")
            if row[i] != 0:
                raise InvalidQuiver(f"loop at point {i}")
            for j in range(n):
                if row[j] != -self.b[j][i]:
                    raise InvalidQuiver(f"matrix not skew-symmetric at ({i}, {j})")

    # ------------------------------------------------------------------
    # constructors and views
    # ------------------------------------------------------------------
    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int]]) -> "Quiver":
        return cls(tuple(tuple(int(v) for v in row) for row in matrix))

    @classmethod
    def from_arrows(cls, n: int, arrows: Sequence[Sequence[int]]) -> "Quiver":
        b = [[0] * n for _ in range(n)]
        for s, t in arrows:
            if not (0 <= s < n and 0 <= t < n):
                raise PointIndexError(f"arrow {s}->{t} outside {n} points")
            if s == t:
                raise InvalidQuiver(f"loop at point {s}")
            b[s][t] += 1
            b[t][s] -= 1
        return cls.from_matrix(b)

    @property
    def n(self) -> int:
        return len(self.b)

    def arrows(self) -> List[Tuple[int, int]]:
        """arrow list with repetition for multiplicities"""
        result = []
        for i in range(self.n):
            for j in range(self.n):
                result.extend([(i, j)] * max(0, self.b[i][j]))
        return result

    def out_arrows(self, k: int) -> Dict[int, int]:
        return {j: v for j, v in enumerate(self.b[k]) if v > 0}

    def in_arrows(self, k: int) -> Dict[int, int]:
        return {j: -v for j, v in enumerate(self.b[k]) if v < 0}

    def is_connected(self) -> bool:
        return self.n == 0 or nx.is_weakly_connected(self.to_networkx())

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.to_networkx())

    # ------------------------------------------------------------------
    # operations
    # ------------------------------------------------------------------
    def mutate(self, k: int) -> "Quiver":
        n = self.n
        if not 0 <= k < n:
            raise PointIndexError(f"mutation index k={k} out of bounds for size {n}")
        b = self.b
        new = [list(row) for row in b]
        for i in range(n):
            for j in range(n):
                if i == k or j == k:
                    new[i][j] = -b[i][j]
                elif b[i][k] * b[k][j] > 0:
                    sign = 1 if b[i][k] > 0 else -1
                    new[i][j] = b[i][j] + sign * b[i][k] * b[k][j]
        return Quiver.from_matrix(new)

    def opposite(self) -> "Quiver":
        return Quiver.from_matrix([[-v for v in row] for row in self.b])

    def permute(self, order: Sequence[int]) -> "Quiver":
        """new quiver whose point i is the old point order[i]"""
        return Quiver.from_matrix([[self.b[a][c] for c in order] for a in order])

    # ------------------------------------------------------------------
    # isomorphism
    # ------------------------------------------------------------------
    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.n))
        for i in range(self.n):
            for j in range(self.n):
                if self.b[i][j] > 0:
                    graph.add_edge(i, j, weight=self.b[i][j])
        return graph

    def signature(self) -> Tuple:
        out_degree = tuple(sorted(sum(v for v in row if v > 0) for row in self.b))
        in_degree = tuple(sorted(-sum(v for v in row if v < 0) for row in self.b))
        weights = tuple(sorted(v for row in self.b for v in row if v > 0))
        return (self.n, out_degree, in_degree, weights)

    def isomorphism(self, other: "Quiver") -> Optional[Dict[int, int]]:
        """point map carrying self onto other, or None"""
        if self.signature() != other.signature():
            return None
        matcher = DiGraphMatcher(
            self.to_networkx(),
            other.to_networkx(),
            edge_match=lambda a, b: a["weight"] == b["weight"],
        )
        if matcher.is_isomorphic():
            return dict(matcher.mapping)
        return None

    def is_isomorphic(self, other: "Quiver") -> bool:
        return self.isomorphism(other) is not None

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_json(self) -> dict:
        return {"n": self.n, "arrows": [list(a) for a in self.arrows()]}

    @classmethod
    def from_json(cls, data: Mapping) -> "Quiver":
        try:
            return cls.from_arrows(int(data["n"]), [tuple(a) for a in data["arrows"]])
        except (KeyError, TypeError, ValueError) as exception:
            raise InvalidQuiver(f"invalid quiver JSON: {exception}") from exception

    def to_dot(self, names: Optional[Sequence[str]] = None) -> str:
        names = names or [str(i) for i in range(self.n)]
        lines = ["digraph quiver {"]
        for i in range(self.n):
            lines.append(f'  {i} [label="{names[i]}"];')
        for i, j in self.arrows():
            lines.append(f"  {i} -> {j};")
        lines.append("}")
        return "\n".join(lines)


# ----------------------------------------------------------------------
# functional interface
# ----------------------------------------------------------------------
def mutate(quiver: Quiver, k: int) -> Quiver:
    return quiver.mutate(k)


def opposite(quiver: Quiver) -> Quiver:
    return quiver.opposite()


def are_isomorphic(first: Quiver, second: Quiver) -> bool:
    return first.is_isomorphic(second)


def tilde_A_canonical(p: int, q: int) -> Quiver:
    """cycle on p+q points with p arrows one way round and q the other way"""
    if q < 1 or p < q:
        raise InvalidQuiver(f"tilde A({p},{q}) needs p >= q >= 1")
    n = p + q
    arrows = []
    for i in range(n):
        if i < p:
            arrows.append((i, (i + 1) % n))
        else:
            arrows.append(((i + 1) % n, i))
    return Quiver.from_arrows(n, arrows)


class _IsoClassSet:
    """representatives of isomorphism classes, bucketed by signature"""

    def __init__(self):
        self.buckets: Dict[Tuple, List[Quiver]] = defaultdict(list)
        self.members: List[Quiver] = []

    def add(self, quiver: Quiver) -> bool:
        bucket = self.buckets[quiver.signature()]
        for representative in bucket:
            if representative.is_isomorphic(quiver):
                return False
        bucket.append(quiver)
        self.members.append(quiver)
        return True

    def __contains__(self, quiver: Quiver) -> bool:
        return any(r.is_isomorphic(quiver) for r in self.buckets.get(quiver.signature(), ()))

    def __len__(self) -> int:
        return len(self.members)


def mutation_class(quiver: Quiver, node_limit: int) -> List[Quiver]:
    """mutation class up to isomorphism, in discovery order"""
    if node_limit <= 0:
        raise QuiverError("node_limit must be positive")
    found = _IsoClassSet()
    found.add(quiver)
    frontier = deque([quiver])
    while frontier:
        current = frontier.popleft()
        for k in range(current.n):
            mutated = current.mutate(k)
            if found.add(mutated):
                if len(found) > node_limit:
                    raise LimitExceeded("mutation class", node_limit)
                frontier.append(mutated)
    logging.debug("mutation class of %d points closed with %d quivers", quiver.n, len(found))
    return list(found.members)


@functools.lru_cache(maxsize=None)
def _tilde_A_class(p: int, q: int, node_limit: int) -> _IsoClassSet:
    members = _IsoClassSet()
    for member in mutation_class(tilde_A_canonical(p, q), node_limit):
        members.add(member)
    return members


def classify_tilde_A(quiver: Quiver, node_limit: int = 20000) -> TypeLabel:
    n = quiver.n
    for q in range(1, n // 2 + 1):
        p = n - q
        if quiver in _tilde_A_class(p, q, node_limit):
            return TypeLabel.tilde_a(p, q)
    return TypeLabel.other()


def random_mutation(quiver: Quiver, steps: int, rng) -> Tuple[Quiver, List[int]]:
    """apply a random mutation sequence without immediate repetition"""
    sequence: List[int] = []
    for _ in range(steps):
        choices = [k for k in range(quiver.n) if not sequence or k != sequence[-1]]
        k = rng.choice(choices)
        quiver = quiver.mutate(k)
        sequence.append(k)
    return quiver, sequence
