"""
Exact checks of the exchange identities behind the unistructurality of
cluster algebras of type tilde A(p,q).

Every check produces an IdentityReport.  Identities are written in a small
expression language over named variables ("z1 z1' z2' z5'",
"(z1'')^2 + z2' z3''", "z4'' S6") and evaluated in one of two layers:

* formal: z1, z2, ... are free indeterminates and every primed variable is
  the exact quotient given by its exchange relation;
* geometric: the names are bound to arcs of a concrete triangulation of
  C(p,q) found by search, and the values are the cluster variables of those
  arcs.

A failing identity raises a PaperlabError subclass carrying its report.
"""
from __future__ import annotations

import itertools
import logging
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple, Union

import networkx as nx

from annulus import (
    ArcKind,
    ArcLift,
    MarkedAnnulus,
    Triangulation,
    TriangulationSeed,
    canonical_peripheral_arcs,
    classify_arc,
    crossing_number,
    flip_graph,
    flip_toward,
    initial_triangulation,
    random_triangulation,
    triangulation_graph,
    verify_cover_flip,
)
from engine import (
    ExchangeGraph,
    denominator_vector,
    exchange_graph,
    infer_exchange_quiver,
    initial_seed,
    unit_vector,
    variables_up_to_depth,
)
from laurent import LaurentPoly
from quiver import Quiver, tilde_A_canonical

LAB_VERSION = "1.0.0"


def get_lab_version() -> str:
    return LAB_VERSION


class PaperlabError(Exception):
    """base error of the verification harness, carries the failing report"""

    def __init__(self, message: str, report: Optional["IdentityReport"] = None):
        super().__init__(message)
        self.report = report


class InvalidParameter(PaperlabError, ValueError):
    pass


class ExpressionError(PaperlabError, ValueError):
    pass


class HypothesisNotSatisfied(PaperlabError):
    pass


class SideConditionViolated(PaperlabError):
    pass


class LemmaViolated(PaperlabError):
    pass


class IdentityFailed(PaperlabError):
    pass


class ConstructionFailed(PaperlabError):
    pass


class NotFound(PaperlabError):
    pass


class ShapeMismatch(PaperlabError):
    pass


class CrossingMismatch(PaperlabError):
    pass


class CounterexampleFound(PaperlabError):
    pass


class UnknownReport(PaperlabError, KeyError):
    pass


# ----------------------------------------------------------------------
# reports
# ----------------------------------------------------------------------
class ReportStatus(Enum):
    PASS = "pass"
    FAIL = "fail"


@dataclass
class IdentityReport:
    name: str
    status: ReportStatus = ReportStatus.PASS
    witness: Dict[str, str] = field(default_factory=dict)
    context: Dict[str, Any] = field(default_factory=dict)
    steps: List["IdentityReport"] = field(default_factory=list)
    errata: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status is ReportStatus.PASS and all(step.passed for step in self.steps)

    def fail(self, error: type, message: str) -> None:
        self.status = ReportStatus.FAIL
        self.context["error"] = message
        logging.info("%s: FAIL, %s", self.name, message)
        raise error(message, self)

    def add(self, step: "IdentityReport") -> "IdentityReport":
        self.steps.append(step)
        return step

    def to_json(self) -> dict:
        data = {
            "name": self.name,
            "status": self.status.value,
            "witness": dict(self.witness),
            "context": dict(self.context),
        }
        if self.steps:
            data["steps"] = [step.to_json() for step in self.steps]
        if self.errata:
            data["errata"] = list(self.errata)
        return data

    def summary(self, indent: int = 0) -> str:
        lines = [" " * indent + f"[{self.status.value.upper()}] {self.name}"]
        for erratum in self.errata:
            lines.append(" " * indent + f"  erratum: {erratum}")
        for step in self.steps:
            lines.append(step.summary(indent + 2))
        return "\n".join(lines)


# ----------------------------------------------------------------------
# expressions
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class Integer:
    value: int


@dataclass(frozen=True)
class Symbol:
    name: str


@dataclass(frozen=True)
class Power:
    base: Any
    exponent: int


@dataclass(frozen=True)
class Product:
    factors: Tuple[Any, ...]


@dataclass(frozen=True)
class Sum:
    terms: Tuple[Any, ...]


Node = Union[Integer, Symbol, Power, Product, Sum]

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<symbol>[A-Za-z][A-Za-z0-9]*'*)|(?P<op>[()+^]))")


class _Parser:
    """sum := product ('+' product)*, product := factor+, factor := atom ['^' int]"""

    def __init__(self, text: str):
        self.text = text
        self.tokens: List[Tuple[str, str]] = []
        index = 0
        while text[index:].strip():
            match = _TOKEN.match(text, index)
            if match is None:
                raise ExpressionError(f"unexpected character at {index} in '{text}'")
            self.tokens.append((match.lastgroup, match.group(match.lastgroup)))
            index = match.end()
        self.position = 0

    def peek(self) -> Tuple[Optional[str], Optional[str]]:
        if self.position < len(self.tokens):
            return self.tokens[self.position]
        return None, None

    def take(self) -> Tuple[Optional[str], Optional[str]]:
        token = self.peek()
        if token[0] is None:
            raise ExpressionError(f"unexpected end of '{self.text}'")
        self.position += 1
        return token

    def parse(self) -> Node:
        node = self.sum()
        if self.position != len(self.tokens):
            raise ExpressionError(f"unexpected '{self.peek()[1]}' in '{self.text}'")
        return node

    def sum(self) -> Node:
        terms = [self.product()]
        while self.peek() == ("op", "+"):
            self.take()
            terms.append(self.product())
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def product(self) -> Node:
        factors = [self.factor()]
        while self.peek()[0] in ("int", "symbol") or self.peek() == ("op", "("):
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else Product(tuple(factors))

    def factor(self) -> Node:
        kind, value = self.take()
        if kind == "int":
            node: Node = Integer(int(value))
        elif kind == "symbol":
            node = Symbol(value)
        elif value == "(":
            node = self.sum()
            if self.take() != ("op", ")"):
                raise ExpressionError(f"missing ')' in '{self.text}'")
        else:
            raise ExpressionError(f"unexpected '{value}' in '{self.text}'")
        if self.peek() == ("op", "^"):
            self.take()
            kind, value = self.take()
            if kind != "int":
                raise ExpressionError(f"exponent must be an integer in '{self.text}'")
            node = Power(node, int(value))
        return node


def _evaluate(node: Node, lookup: Callable[[str], LaurentPoly]):
    if isinstance(node, Integer):
        return node.value
    if isinstance(node, Symbol):
        return lookup(node.name)
    if isinstance(node, Power):
        return _evaluate(node.base, lookup) ** node.exponent
    if isinstance(node, Product):
        result = 1
        for factor in node.factors:
            result = result * _evaluate(factor, lookup)
        return result
    result = 0
    for term in node.terms:
        result = result + _evaluate(term, lookup)
    return result


class Expression:
    def __init__(self, text: str):
        self.text = text
        self.root = _Parser(text).parse()

    def __str__(self) -> str:
        return self.text

    def summands(self) -> Tuple[Node, ...]:
        return self.root.terms if isinstance(self.root, Sum) else (self.root,)

    def symbols(self) -> Set[str]:
        found: Set[str] = set()

        def walk(node):
            if isinstance(node, Symbol):
                found.add(node.name)
            elif isinstance(node, Power):
                walk(node.base)
            elif isinstance(node, (Product, Sum)):
                for child in getattr(node, "factors", None) or node.terms:
                    walk(child)

        walk(self.root)
        return found

    def evaluate(self, lookup: Callable[[str], LaurentPoly], arity: int) -> LaurentPoly:
        return _as_poly(_evaluate(self.root, lookup), arity)


def _as_poly(value, arity: int) -> LaurentPoly:
    if isinstance(value, LaurentPoly):
        return value
    return LaurentPoly.constant(value, arity)


class Context:
    """values of named variables, given directly or by exchange relations

    A relation (new, numerator) defines new as numerator divided by the
    variable named new without its last prime.  Names listed in sigmas are
    abbreviations for further expressions.
    """

    def __init__(
        self,
        values: Mapping[str, LaurentPoly],
        arity: int,
        names: Sequence[str],
        relations: Iterable[Tuple[str, str]] = (),
        sigmas: Optional[Mapping[str, str]] = None,
    ):
        self.values: Dict[str, LaurentPoly] = dict(values)
        self.arity = arity
        self.names = list(names)
        self.relations = {new: Expression(numerator) for new, numerator in relations}
        self.sigmas = {name: Expression(text) for name, text in (sigmas or {}).items()}
        self._sigma_values: Dict[str, LaurentPoly] = {}

    def __call__(self, symbol: str) -> LaurentPoly:
        if symbol in self.values:
            return self.values[symbol]
        if symbol in self.sigmas:
            if symbol not in self._sigma_values:
                self._sigma_values[symbol] = self.evaluate(self.sigmas[symbol])
            return self._sigma_values[symbol]
        if symbol in self.relations:
            divisor = self(symbol[:-1])
            numerator = self.evaluate(self.relations[symbol])
            value = numerator.try_div_exact(divisor)
            if value is None:
                raise IdentityFailed(f"{symbol} = ({self.relations[symbol]})/{symbol[:-1]} does not divide")
            self.values[symbol] = value
            return value
        raise ExpressionError(f"unknown symbol {symbol}")

    def evaluate(self, expression: Union[str, Expression]) -> LaurentPoly:
        if isinstance(expression, str):
            expression = Expression(expression)
        return expression.evaluate(self, self.arity)

    def terms(self, expression: Union[str, Expression]) -> List[LaurentPoly]:
        """values of the top level summands, abbreviations expanded"""
        if isinstance(expression, str):
            expression = Expression(expression)
        result = []
        for node in expression.summands():
            if isinstance(node, Symbol) and node.name in self.sigmas:
                result.extend(self.terms(self.sigmas[node.name]))
            else:
                result.append(_as_poly(_evaluate(node, self), self.arity))
        return result

    def format(self, value: LaurentPoly) -> str:
        return value.format(self.names)


def formal_context(
    count: int,
    relations: Iterable[Tuple[str, str]] = (),
    sigmas: Optional[Mapping[str, str]] = None,
    constants: Iterable[str] = (),
) -> Context:
    """free indeterminates z1..z<count>; names in constants are set to 1"""
    names = [f"z{i}" for i in range(1, count + 1)]
    constants = set(constants)
    values = {
        name: LaurentPoly.one(count) if name in constants else variable
        for name, variable in zip(names, LaurentPoly.coordinates(count))
    }
    return Context(values, count, names, relations, sigmas)


def _check_chain(report: IdentityReport, context: Context, lines: Sequence[str]) -> None:
    """every line of a chain of equalities has the same normal form"""
    values = [context.evaluate(line) for line in lines]
    for index in range(1, len(lines)):
        difference = values[index] - values[index - 1]
        step = report.add(
            IdentityReport(
                f"{report.name}: line {index + 1}",
                witness={
                    "lhs": lines[index - 1],
                    "rhs": lines[index],
                    "difference": context.format(difference),
                },
            )
        )
        if not difference.is_zero():
            step.status = ReportStatus.FAIL
            report.fail(IdentityFailed, f"'{lines[index - 1]}' and '{lines[index]}' differ")
    report.witness.update(
        lhs=lines[0], rhs=lines[-1], terms=str(len(values[0])), difference="0"
    )


def _check_relations(report: IdentityReport, context: Context, relations: Sequence[Tuple[str, str]]) -> None:
    for new, numerator in relations:
        old = new[:-1]
        difference = context(new) * context(old) - context.evaluate(numerator)
        step = report.add(
            IdentityReport(
                f"{old} {new} = {numerator}",
                witness={"difference": context.format(difference)},
            )
        )
        if not difference.is_zero():
            step.status = ReportStatus.FAIL
            report.fail(IdentityFailed, f"exchange relation {old} {new} = {numerator} fails")


def _check_errata(report: IdentityReport, context: Context, displayed: Mapping[str, str]) -> None:
    for name, text in displayed.items():
        difference = context.evaluate(text) - context(name)
        if difference.is_zero():
            continue
        report.errata.append(
            f"{name} printed as {text}, the chain needs {context.sigmas[name]} "
            f"(difference {context.format(difference)})"
        )


# ----------------------------------------------------------------------
# the two-variable lemma
# ----------------------------------------------------------------------
@dataclass(frozen=True)
class SigmaSum:
    """a sum of products of cluster variables, kept term by term"""

    terms: Tuple[LaurentPoly, ...]

    @classmethod
    def of(cls, value: LaurentPoly) -> "SigmaSum":
        return cls(tuple(LaurentPoly(value.arity, {e: c}) for e, c in value.items()))

    @property
    def value(self) -> LaurentPoly:
        total = LaurentPoly.zero(self.terms[0].arity) if self.terms else 0
        for term in self.terms:
            total = total + term
        return total


def verify_lemma31(
    x1: LaurentPoly,
    x2: LaurentPoly,
    sigmas: Sequence[Union[SigmaSum, LaurentPoly]],
    cluster: Sequence[LaurentPoly],
    variant: str = "a",
    name: Optional[str] = None,
) -> IdentityReport:
    """(a) x1 x2 = S1, or (b) x1 x2 S1 = S1 S2 + S3, implies x1 or x2 is not in the cluster"""
    if variant not in ("a", "b"):
        raise InvalidParameter(f"variant must be 'a' or 'b', got {variant}")
    report = IdentityReport(name or f"lemma31 ({variant})", context={"variant": variant})
    need = 1 if variant == "a" else 3
    sigmas = [s if isinstance(s, SigmaSum) else SigmaSum.of(s) for s in sigmas]
    if len(sigmas) < need:
        report.fail(HypothesisNotSatisfied, f"variant {variant} needs {need} sums, got {len(sigmas)}")
    product = x1 * x2
    if variant == "a":
        difference = product - sigmas[0].value
    else:
        difference = product * sigmas[0].value - (sigmas[0].value * sigmas[1].value + sigmas[2].value)
    report.witness["difference"] = str(difference)
    if not difference.is_zero():
        report.fail(HypothesisNotSatisfied, "hypothesis identity does not hold")
    for index, sigma in enumerate(sigmas[:need]):
        if list(sigma.terms) == [product]:
            report.fail(SideConditionViolated, f"x1 x2 is the only term of sum {index + 1}")
        if not sigma.terms or any(not t.is_zero() and not t.has_nonneg_numerator() for t in sigma.terms):
            report.fail(SideConditionViolated, f"sum {index + 1} has a term with a negative coefficient")
    first, second = x1 in cluster, x2 in cluster
    report.context.update(x1_in_cluster=first, x2_in_cluster=second)
    if first and second:
        report.fail(LemmaViolated, "x1 and x2 both belong to the cluster")
    logging.info("%s: PASS", report.name)
    return report


def kronecker_lemma_report() -> IdentityReport:
    """x1 x1' = x2^2 + 1 checked against the cluster {x1', x2}"""
    seed = initial_seed(Quiver.from_arrows(2, [(0, 1), (0, 1)]))
    mutated = seed.mutate(0)
    x1, x2 = seed.cluster
    return verify_lemma31(
        x1,
        mutated.cluster[0],
        [SigmaSum((x2 * x2, LaurentPoly.one(2)))],
        mutated.cluster,
        "a",
        name="lemma31 (a) on the Kronecker quiver",
    )


# ----------------------------------------------------------------------
# relation tables
# ----------------------------------------------------------------------
# peripheral arcs crossing twice
CASE2_RELATIONS = (
    ("z1'", "z2 z5 + z4 z8"),
    ("z2'", "z1' z3 + z8 z10"),
    ("z3'", "z2' z9 + z4 z8"),
    ("z4'", "z1' z3' + z2' z5"),
    ("z5'", "z3' z7 + z4' z6"),
)
CASE2_SIGMAS = {
    "S1": "z2' z4 z5' z8",
    "S2": "z1' z3 z4' z6 + z3' z7 z8 z10 + z4' z6 z8 z10 + S1",
    "S3": "z1' z4 z7 z8 + S2",
}
CASE2_PRINTED = {
    "S1": "z2' z4 z5 z8",
    "S2": "z1' z3 z4 z6 + z3' z7 z8 z10 + z4' z6 z8 z10 + S1",
}
CASE2_CHAIN = (
    "z1 z1' z2' z5'",
    "(z2 z5 + z4 z8) z2' z5'",
    "(z2 z2')(z5 z5') + S1",
    "(z1' z3 + z8 z10)(z3' z7 + z4' z6) + S1",
    "(z3 z3') z1' z7 + S2",
    "(z2' z9 + z4 z8) z1' z7 + S2",
    "(z1' z2') z7 z9 + S3",
)
CASE2_LEMMA = ("z1", "z5'", "z1' z2'", "z7 z9", "S3")
CASE2_BOUNDARY = ("z6", "z7", "z8", "z9", "z10")

# bridging arcs crossing n times
CASE3_RELATIONS = (
    ("z1'", "z2 z3 + z4 z6"),
    ("z2'", "z1' z5 + z3 z6"),
    ("z3'", "(z1')^2 + z2' z4"),
    ("z4'", "z1' z8 + z3' z7"),
    ("z1''", "z2' z7 + z3' z4'"),
    ("z3''", "z1'' z8 + z4' z7"),
    ("z4''", "(z1'')^2 + z2' z3''"),
)
CASE3_SIGMAS = {
    "S1": "z2 z3 z4'",
    "S2": "z3' z6 z7 + S1",
    "S4": "z1'' z3' z4 z6",
    "S5": "z1'' z2 z2' z4 + S4",
    "S6": "z1' z2 z2' z7 + S5",
    "S7": "z1' z2 z2' z3' z3'' + z4'' S6",
}
CASE3_CHAINS = {
    2: (
        "z1 z1' z4'",
        "(z2 z3 + z4 z6) z4'",
        "(z4 z4') z6 + S1",
        "(z1' z8 + z3' z7) z6 + S1",
        "z1' z6 z8 + S2",
    ),
    3: (
        "z1 z1' z3' z1''",
        "(z2 z3 + z4 z6) z3' z1''",
        "(z3 z3') z1'' z2 + S4",
        "((z1')^2 + z2' z4) z1'' z2 + S4",
        "(z1' z1'') z1' z2 + S5",
        "(z2' z7 + z3' z4') z1' z2 + S5",
        "(z1' z3') z2 z4' + S6",
    ),
    4: (
        "z1 z1' z3' z1'' z4''",
        "((z1' z3') z2 z4' + S6) z4''",
        "(z4' z4'') z1' z3' z2 + z4'' S6",
        "((z1'')^2 + z2' z3'') z1' z3' z2 + z4'' S6",
        "z1' z3' (z1'')^2 z2 + S7",
    ),
}
CASE3_RELATION_COUNT = {2: 4, 3: 5, 4: 7}
CASE3_LEMMA = {
    2: ("z1", "z4'", "z1'", "z6 z8", "S2"),
    3: ("z1", "z1''", "z1' z3'", "z2 z4'", "S6"),
    4: ("z1", "z4''", "z1' z3' z1''", "z1'' z2", "S7"),
}
CASE3_BOUNDARY = ("z5", "z6", "z7", "z8")


def _lemma_b(context: Context, lemma: Tuple[str, ...], cluster: Sequence[LaurentPoly], name: str) -> IdentityReport:
    x1, x2, s1, s2, s3 = lemma
    return verify_lemma31(
        context(x1),
        context(x2),
        [SigmaSum(tuple(context.terms(s))) for s in (s1, s2, s3)],
        cluster,
        "b",
        name=name,
    )


# ----------------------------------------------------------------------
# formal chains
# ----------------------------------------------------------------------
def verify_case2_formal(constants: Iterable[str] = ()) -> IdentityReport:
    constants = tuple(constants)
    context = formal_context(10, CASE2_RELATIONS, CASE2_SIGMAS, constants)
    report = IdentityReport(
        "case 2 (formal)" + (f" with {', '.join(constants)} = 1" if constants else ""),
        context={"indeterminates": 10, "constants": list(constants)},
    )
    _check_relations(report, context, CASE2_RELATIONS)
    _check_chain(report, context, CASE2_CHAIN)
    _check_errata(report, context, CASE2_PRINTED)
    report.add(_lemma_b(context, CASE2_LEMMA, [context(f"z{i}") for i in range(1, 11)], "case 2 lemma31 (b)"))
    logging.info("%s: PASS", report.name)
    return report


def verify_case3(n: int) -> IdentityReport:
    if n not in CASE3_CHAINS:
        raise InvalidParameter(f"case 3 chains exist for n = 2, 3, 4, not {n}")
    context = formal_context(8, CASE3_RELATIONS, CASE3_SIGMAS)
    report = IdentityReport(f"case 3, n = {n} (formal)", context={"indeterminates": 8, "n": n})
    _check_relations(report, context, CASE3_RELATIONS[: CASE3_RELATION_COUNT[n]])
    _check_chain(report, context, CASE3_CHAINS[n])
    report.add(
        _lemma_b(context, CASE3_LEMMA[n], [context(f"z{i}") for i in range(1, 9)], f"case 3, n = {n}, lemma31 (b)")
    )
    logging.info("%s: PASS", report.name)
    return report


# ----------------------------------------------------------------------
# geometric search
# ----------------------------------------------------------------------
_BOUNDARY = "boundary"


@dataclass(frozen=True)
class PatternStep:
    flipped: str
    created: str
    pairs: Tuple[Tuple[str, str], Tuple[str, str]]


def _symbol_pair(node: Node, text: str) -> Tuple[str, str]:
    factors = node.factors if isinstance(node, Product) else (node,)
    symbols: List[str] = []
    for factor in factors:
        if isinstance(factor, Symbol):
            symbols.append(factor.name)
        elif isinstance(factor, Power) and isinstance(factor.base, Symbol):
            symbols.extend([factor.base.name] * factor.exponent)
        else:
            raise ExpressionError(f"'{text}' is not a sum of two products of two variables")
    if len(symbols) != 2:
        raise ExpressionError(f"'{text}' is not a sum of two products of two variables")
    return symbols[0], symbols[1]


def pattern_steps(relations: Sequence[Tuple[str, str]]) -> List[PatternStep]:
    steps = []
    for created, numerator in relations:
        summands = Expression(numerator).summands()
        if len(summands) != 2:
            raise ExpressionError(f"'{numerator}' is not a sum of two products")
        steps.append(
            PatternStep(created[:-1], created, tuple(_symbol_pair(s, numerator) for s in summands))
        )
    return steps


class PatternSearch:
    """binds relation variables to arcs so that each flip has the relation's shape"""

    def __init__(
        self,
        steps: Sequence[PatternStep],
        boundary_symbols: Iterable[str],
        accept: Callable[[Dict[str, Any]], bool] = lambda binding: True,
    ):
        self.steps = list(steps)
        self.boundary_symbols = set(boundary_symbols)
        self.accept = accept

    def match(self, triangulation: Triangulation, first: ArcLift) -> Optional[Tuple[Dict[str, Any], List[Triangulation]]]:
        return self._extend(0, triangulation, {self.steps[0].flipped: first}, [triangulation])

    def _bind(self, binding: Dict[str, Any], symbol: str, value) -> bool:
        if symbol in binding:
            return binding[symbol] == value
        if value == _BOUNDARY:
            if symbol not in self.boundary_symbols:
                return False
        elif value in binding.values():
            return False
        binding[symbol] = value
        return True

    def _extend(self, index, triangulation, binding, path):
        if index == len(self.steps):
            return (binding, path) if self.accept(binding) else None
        step = self.steps[index]
        arc = binding.get(step.flipped)
        if not isinstance(arc, ArcLift) or arc not in triangulation:
            return None
        result = triangulation.flip_result(triangulation.index(arc))
        quad = result.quadrilateral

        def value(side):
            return _BOUNDARY if side.is_boundary else triangulation.arcs[side.arc]

        found = ((value(quad.alpha), value(quad.delta)), (value(quad.beta), value(quad.epsilon)))
        symbols = step.pairs[0] + step.pairs[1]
        for first, second in (found, found[::-1]):
            for a in (first, first[::-1]):
                for b in (second, second[::-1]):
                    attempt = dict(binding)
                    if all(self._bind(attempt, s, v) for s, v in zip(symbols, a + b)) and self._bind(
                        attempt, step.created, result.new_arc
                    ):
                        extended = self._extend(index + 1, result.triangulation, attempt, path + [result.triangulation])
                        if extended is not None:
                            return extended
        return None


def _find_configuration(
    annulus: MarkedAnnulus,
    search: PatternSearch,
    start: Callable[[ArcLift], bool],
    depth: int,
    node_limit: int,
) -> Optional[Tuple[Triangulation, Dict[str, Any], List[Triangulation]]]:
    graph = flip_graph(initial_triangulation(annulus), depth, node_limit)
    logging.debug("searching %d triangulations of %s", len(graph), annulus)
    for triangulation in graph.states:
        for arc in triangulation.arcs:
            if start(arc):
                found = search.match(triangulation, arc)
                if found is not None:
                    return triangulation, found[0], found[1]
    return None


def _geometric_context(
    triangulation: Triangulation,
    binding: Mapping[str, Any],
    steps: Sequence[PatternStep],
    sigmas: Mapping[str, str],
    report: IdentityReport,
) -> Tuple[Context, TriangulationSeed]:
    """replays the flips from a seed rooted at the triangulation"""
    state = TriangulationSeed(triangulation, initial_seed(triangulation.quiver()))
    arity = state.n
    values: Dict[str, LaurentPoly] = {}
    for symbol, bound in binding.items():
        if bound == _BOUNDARY:
            values[symbol] = LaurentPoly.one(arity)
        elif bound in triangulation:
            values[symbol] = state.variable(bound)
    for step in steps:
        i = state.triangulation.index(binding[step.flipped])
        relation = state.relation(i)
        state = state.flip(i)
        values[step.created] = state.variable(binding[step.created])
        if relation.new_variable() != values[step.created]:
            report.fail(IdentityFailed, f"flip of {step.flipped} disagrees with seed mutation")
    names = [f"x{i + 1}" for i in range(arity)]
    return Context(values, arity, names, sigmas=sigmas), state


def _describe(binding: Mapping[str, Any]) -> Dict[str, str]:
    return {symbol: str(bound) for symbol, bound in sorted(binding.items())}


def _check_cover_flips(report: IdentityReport, path: Sequence[Triangulation], binding, steps) -> None:
    for triangulation, step in zip(path, steps):
        i = triangulation.index(binding[step.flipped])
        if not verify_cover_flip(triangulation, i, 3):
            report.fail(IdentityFailed, f"flip of {step.flipped} does not lift to the cover")


def max_peripheral_crossing(p: int, q: int) -> int:
    annulus = MarkedAnnulus(p, q)
    arcs = canonical_peripheral_arcs(annulus, 0) + canonical_peripheral_arcs(annulus, 1)
    return max((crossing_number(a, b, annulus) for a in arcs for b in arcs), default=0)


def _is_peripheral(arc: Any) -> bool:
    return isinstance(arc, ArcLift) and classify_arc(arc)[0] is ArcKind.PERIPHERAL


def verify_case2_geometric(p: int, q: int, depth: int, node_limit: int = 20000) -> IdentityReport:
    if max(p, q) < 4:
        raise ConstructionFailed(f"C({p},{q}) has no boundary with four marked points")
    annulus = MarkedAnnulus(p, q)
    report = IdentityReport(f"case 2 on {annulus}", context={"p": p, "q": q, "depth": depth})
    steps = pattern_steps(CASE2_RELATIONS)

    def accept(binding):
        first, last = binding["z1"], binding["z5'"]
        return _is_peripheral(first) and _is_peripheral(last) and crossing_number(first, last, annulus) == 2

    found = _find_configuration(annulus, PatternSearch(steps, CASE2_BOUNDARY, accept), _is_peripheral, depth, node_limit)
    if found is None:
        report.fail(NotFound, f"no configuration within {depth} flips of the initial triangulation")
    triangulation, binding, path = found
    report.context.update(
        triangulation=[str(arc) for arc in triangulation.arcs],
        binding=_describe(binding),
        crossing=crossing_number(binding["z1"], binding["z5'"], annulus),
        max_peripheral_crossing=max_peripheral_crossing(p, q),
    )
    context, _ = _geometric_context(triangulation, binding, steps, CASE2_SIGMAS, report)
    _check_relations(report, context, CASE2_RELATIONS)
    _check_chain(report, context, CASE2_CHAIN)
    _check_cover_flips(report, path, binding, steps)
    cluster = LaurentPoly.coordinates(triangulation.n)
    report.add(_lemma_b(context, CASE2_LEMMA, cluster, "case 2 geometric lemma31 (b)"))
    logging.info("%s: PASS", report.name)
    return report


def verify_case1(
    p: int,
    q: int,
    depth: int = 3,
    boundary: Optional[int] = None,
    loop: bool = False,
    boundary_sides: int = 0,
    node_limit: int = 20000,
) -> IdentityReport:
    """a peripheral arc whose flip is a bridging arc crossing it once"""
    annulus = MarkedAnnulus(p, q)
    report = IdentityReport(
        f"case 1 on {annulus}",
        context={"p": p, "q": q, "depth": depth, "loop": loop, "boundary_sides": boundary_sides},
    )
    if max(p, q) < 2:
        report.fail(ConstructionFailed, f"{annulus} has no peripheral arc")
    graph = triangulation_graph(TriangulationSeed.initial(annulus), depth, node_limit)
    for state in graph.states:
        for i, arc in enumerate(state.triangulation.arcs):
            kind, side = classify_arc(arc)
            if kind is not ArcKind.PERIPHERAL or (boundary is not None and side != boundary):
                continue
            if loop and abs(arc.e2.pos - arc.e1.pos) != annulus.period(side):
                continue
            relation = state.relation(i)
            result = relation.flip
            quad = result.quadrilateral
            sides = (quad.alpha, quad.beta, quad.delta, quad.epsilon)
            if not result.new_arc.is_bridging() or crossing_number(arc, result.new_arc, annulus) != 1:
                continue
            if sum(s.is_boundary for s in sides) < boundary_sides:
                continue
            return _case1_report(report, state, i, relation)
    report.fail(ConstructionFailed, f"no peripheral arc flips to a bridging arc within {depth} flips")


def _case1_report(report: IdentityReport, state: TriangulationSeed, i: int, relation) -> IdentityReport:
    result = relation.flip
    flipped = state.flip(i)
    y_i, y_j = state.seed.cluster[i], flipped.seed.cluster[i]
    report.context.update(
        triangulation=[str(arc) for arc in state.triangulation.arcs],
        peripheral=str(result.old_arc),
        bridging=str(result.new_arc),
        sides=[str(s) for s in (result.quadrilateral.alpha, result.quadrilateral.beta,
                                result.quadrilateral.delta, result.quadrilateral.epsilon)],
    )
    report.witness.update(lhs="y_i y_j", rhs=f"{relation.plus} + {relation.minus}")
    if relation.new_variable() != y_j:
        report.fail(IdentityFailed, "Ptolemy relation disagrees with the seed mutation")
    if {relation.plus, relation.minus} != set(state.seed.exchange_polynomials(i)):
        report.fail(ShapeMismatch, "Ptolemy terms differ from the exchange polynomials")
    report.add(verify_lemma31(y_i, y_j, [SigmaSum((relation.plus, relation.minus))], state.seed.cluster, "a",
                              name="case 1 lemma31 (a)"))
    logging.info("%s: PASS", report.name)
    return report


# ----------------------------------------------------------------------
# bridging induction
# ----------------------------------------------------------------------
def _primed(base: str, k: int) -> str:
    return base + "'" * k


def _check_square_shape(report, state: TriangulationSeed, i: int, square: ArcLift, pair: Sequence[ArcLift]) -> None:
    quad = state.triangulation.flip_result(i).quadrilateral
    arcs = state.triangulation.arcs

    def value(side):
        return None if side.is_boundary else arcs[side.arc]

    found = [sorted((value(quad.alpha), value(quad.delta)), key=str), sorted((value(quad.beta), value(quad.epsilon)), key=str)]
    wanted_square = [square, square]
    wanted_pair = sorted(pair, key=str)
    if sorted([wanted_square, wanted_pair], key=str) != sorted(found, key=str):
        report.fail(ShapeMismatch, f"flip of {arcs[i]} has sides {found}, not {square} squared and {list(pair)}")


def verify_bridging_induction(p: int, q: int, K: int, depth: int = 4, node_limit: int = 20000) -> IdentityReport:
    if K < 3:
        raise InvalidParameter(f"K must be at least 3, got {K}")
    annulus = MarkedAnnulus(p, q)
    report = IdentityReport(f"bridging induction on {annulus} to K = {K}", context={"p": p, "q": q, "K": K})
    report.errata.extend([
        "the mutation sequence for z4^(k) starts with mu_4, not mu_2",
        "the arc crossing gamma_i 2k times carries z4^(k), not z2^(k)",
        "the first product formula has main term z2 z4^(m-1), not (z2^(m-1))^2",
    ])
    steps = pattern_steps(CASE3_RELATIONS)

    def accept(binding):
        gamma = binding["z1"]
        wanted = {"z1'": 1, "z4'": 2, "z1''": 3, "z4''": 4}
        return all(crossing_number(gamma, binding[s], annulus) == n for s, n in wanted.items())

    found = _find_configuration(
        annulus,
        PatternSearch(steps, CASE3_BOUNDARY, accept),
        lambda arc: arc.is_bridging(),
        depth,
        node_limit,
    )
    if found is None:
        report.fail(NotFound, f"no bridging configuration within {depth} flips of the initial triangulation")
    triangulation, binding, path = found
    arcs: Dict[str, Any] = dict(binding)
    report.context.update(triangulation=[str(arc) for arc in triangulation.arcs], binding=_describe(binding))
    context, state = _geometric_context(triangulation, binding, steps, CASE3_SIGMAS, report)
    _check_relations(report, context, CASE3_RELATIONS)
    _check_cover_flips(report, path, binding, steps)
    value = context

    # (i) the recurrences, flipping z1^(k-1) then z4^(k-1)
    pair = [arcs["z2'"], arcs["z3''"]]
    tail = value("z2'") * value("z3''")
    for k in range(3, K + 1):
        for base, square_of in (("z1", lambda: _primed("z4", k - 1)), ("z4", lambda: _primed("z1", k))):
            old, new, square = _primed(base, k - 1), _primed(base, k), square_of()
            i = state.triangulation.index(arcs[old])
            _check_square_shape(report, state, i, arcs[square], pair)
            result = state.triangulation.flip_result(i)
            state = state.flip(i)
            arcs[new] = result.new_arc
            context.values[new] = state.variable(result.new_arc)
            difference = value(old) * value(new) - (value(square) ** 2 + tail)
            step = report.add(IdentityReport(
                f"{old} {new} = ({square})^2 + z2' z3''",
                witness={"difference": context.format(difference)},
            ))
            if not difference.is_zero():
                step.status = ReportStatus.FAIL
                report.fail(ShapeMismatch, f"recurrence for {new} fails")

    # (ii) crossings with gamma_i
    gamma = arcs["z1"]
    crossings = {}
    for k in range(1, K + 1):
        for base, expected in (("z1", 2 * k - 1), ("z4", 2 * k)):
            symbol = _primed(base, k)
            crossing = crossing_number(gamma, arcs[symbol], annulus)
            crossings[symbol] = crossing
            if crossing != expected:
                report.fail(CrossingMismatch, f"{symbol} crosses gamma_i {crossing} times, expected {expected}")
    report.context["crossings"] = crossings

    # (iii) the product formulas and their residuals
    prefix = value("z1") * value("z1'") * value("z3'")

    def middle(m):
        result = LaurentPoly.one(context.arity)
        for k in range(2, m):
            result = result * value(_primed("z1", k)) * value(_primed("z4", k))
        return result

    def common(m):
        return value("z1'") * value("z3'") * middle(m) * value("z2")

    sigma = {6: value("S6"), 7: value("S7")}
    residuals = {}
    for m in range(2, K + 1):
        if m >= 3:
            sigma[2 * m + 2] = common(m - 1) * value(_primed("z1", m - 1)) * tail + value(_primed("z1", m)) * sigma[2 * m + 1]
            sigma[2 * m + 3] = common(m) * tail + value(_primed("z4", m)) * sigma[2 * m + 2]
        lhs_a = prefix * middle(m) * value(_primed("z1", m))
        lhs_b = lhs_a * value(_primed("z4", m))
        checks = (
            (2 * m + 2, lhs_a, common(m) * value(_primed("z4", m - 1))),
            (2 * m + 3, lhs_b, common(m) * value(_primed("z1", m)) ** 2),
        )
        for index, lhs, main in checks:
            residual = lhs - main
            step = report.add(IdentityReport(
                f"product formula m = {m}, residual S{index}",
                witness={"difference": context.format(residual - sigma[index]), "terms": str(len(residual))},
            ))
            if residual != sigma[index]:
                step.status = ReportStatus.FAIL
                report.fail(IdentityFailed, f"residual S{index} differs from its recursion")
            if residual.is_zero() or not residual.has_nonneg_numerator():
                step.status = ReportStatus.FAIL
                report.fail(IdentityFailed, f"residual S{index} has a negative coefficient")
            residuals[f"S{index}"] = len(residual)
    report.context["residual_terms"] = residuals
    logging.info("%s: PASS", report.name)
    return report


# ----------------------------------------------------------------------
# quiver recovery and unistructurality
# ----------------------------------------------------------------------
def verify_quiver_recovery(p: int, q: int, depth: int, node_limit: int = 20000) -> IdentityReport:
    quiver = tilde_A_canonical(p, q)
    seed = initial_seed(quiver)
    report = IdentityReport(f"quiver recovery for tilde A({p},{q})", context={"p": p, "q": q, "depth": depth})
    pool = variables_up_to_depth(seed, depth, node_limit)
    partners = {}
    for i in range(quiver.n):
        target = unit_vector(i, quiver.n)
        partners[f"z{i + 1}"] = str(next((v for v in pool if denominator_vector(v) == target), None))
    inferred = infer_exchange_quiver(seed.cluster, pool)
    report.context.update(pool=len(pool), partners=partners)
    if inferred == quiver:
        report.context["orientation"] = "same"
    elif inferred == quiver.opposite():
        report.context["orientation"] = "opposite"
    else:
        report.witness.update(expected=str(quiver.arrows()), found=str(inferred.arrows()))
        report.fail(IdentityFailed, "inferred quiver is neither the quiver nor its opposite")
    logging.info("%s: PASS", report.name)
    return report


def _undirected(graph: ExchangeGraph) -> Dict[int, Set[int]]:
    adjacency: Dict[int, Set[int]] = {i: set() for i in range(len(graph))}
    for i, _, j in graph.edges():
        adjacency[i].add(j)
        adjacency[j].add(i)
    return adjacency


def _compare_rerooted(report: IdentityReport, graph: ExchangeGraph, node: int, depth: int, node_limit: int) -> None:
    radius = depth - graph.distance[node]
    rerooted = exchange_graph(graph.nodes[node], radius, node_limit)
    own = {seed.cluster_set() for seed in graph.nodes}
    other = {seed.cluster_set() for seed in rerooted.nodes}
    if not other <= own:
        report.fail(CounterexampleFound, f"re-rooted graph at node {node} reaches clusters outside the original")
    if not rerooted.edge_set() <= graph.edge_set():
        report.fail(CounterexampleFound, f"re-rooted graph at node {node} has an edge the original lacks")

    # nodes of the original within the radius, seen from the new root
    adjacency = _undirected(graph)
    distance = {node: 0}
    frontier = [node]
    while frontier:
        following = []
        for i in frontier:
            for j in adjacency[i]:
                if j not in distance and distance[i] < radius:
                    distance[j] = distance[i] + 1
                    following.append(j)
        frontier = following
    near = {graph.nodes[i].cluster_set() for i in distance}
    if not near <= other:
        report.fail(CounterexampleFound, f"re-rooted graph at node {node} misses clusters of the original")
    inner = {
        frozenset((graph.nodes[i].cluster_set(), graph.nodes[j].cluster_set()))
        for i in distance
        for j in adjacency[i]
        if distance[i] < radius and j in distance
    }
    if not inner <= rerooted.edge_set():
        report.fail(CounterexampleFound, f"re-rooted graph at node {node} misses edges of the original")
    report.add(IdentityReport(
        f"re-rooted at node {node}",
        context={"radius": radius, "clusters": len(other), "shared": len(near)},
    ))


def _compatibility_graph(graph: ExchangeGraph) -> Tuple[List[LaurentPoly], nx.Graph]:
    """pool of variables and the graph joining variables some enumerated cluster holds together"""
    pool = sorted(graph.variables(), key=LaurentPoly.sort_key)
    position = {v: j for j, v in enumerate(pool)}
    compatible = nx.Graph()
    compatible.add_nodes_from(range(len(pool)))
    for seed in graph.nodes:
        compatible.add_edges_from(itertools.combinations(sorted(position[v] for v in seed.cluster), 2))
    return pool, compatible


def compatible_sets(graph: ExchangeGraph, rank: int) -> Tuple[List[FrozenSet[LaurentPoly]], List[FrozenSet[LaurentPoly]]]:
    """(interior, frontier) sets of rank pairwise compatible variables

    A set is interior when all but one of its members share a cluster strictly
    inside the radius of the graph, so that both completions of those members
    were enumerated.
    """
    pool, compatible = _compatibility_graph(graph)
    faces = {
        seed.cluster_set() - {v}
        for i, seed in enumerate(graph.nodes)
        if graph.distance[i] < graph.depth
        for v in seed.cluster
    }
    interior: List[FrozenSet[LaurentPoly]] = []
    frontier: List[FrozenSet[LaurentPoly]] = []
    for clique in nx.enumerate_all_cliques(compatible):
        if len(clique) < rank:
            continue
        if len(clique) > rank:
            break
        members = frozenset(pool[j] for j in clique)
        if any(members - {v} in faces for v in members):
            interior.append(members)
        else:
            frontier.append(members)
    return interior, frontier


def unistructurality_experiment(
    p: int,
    q: int,
    depth: int,
    samples: int = 3,
    node_limit: int = 20000,
    rng: Optional[random.Random] = None,
) -> IdentityReport:
    """depth bounded check that the cluster variables determine the clusters"""
    if depth < 1:
        raise InvalidParameter(f"depth must be at least 1, got {depth}")
    rng = rng or random.Random(0)
    annulus = MarkedAnnulus(p, q)
    report = IdentityReport(f"unistructurality on {annulus}", context={"p": p, "q": q, "depth": depth})
    root = TriangulationSeed.initial(annulus)
    lockstep = triangulation_graph(root, depth, node_limit)
    graph = exchange_graph(root.seed, depth, node_limit)
    clusters = {seed.cluster_set() for seed in graph.nodes}
    if {frozenset(state.seed.cluster) for state in lockstep.states} != clusters:
        report.fail(CounterexampleFound, "flip graph and exchange graph disagree")

    arc_of: Dict[LaurentPoly, ArcLift] = {}
    variable_of: Dict[ArcLift, LaurentPoly] = {}
    for state in lockstep.states:
        for arc, variable in zip(state.triangulation.arcs, state.seed.cluster):
            if arc_of.setdefault(variable, arc) != arc or variable_of.setdefault(arc, variable) != variable:
                report.fail(CounterexampleFound, f"arc {arc} and variable {variable} are not in bijection")

    candidates = [i for i in range(len(graph)) if 0 < graph.distance[i] < depth]
    for node in sorted(rng.sample(candidates, min(samples, len(candidates)))):
        _compare_rerooted(report, graph, node, depth, node_limit)

    pool, compatible = _compatibility_graph(graph)
    for a, b in compatible.edges:
        if crossing_number(arc_of[pool[a]], arc_of[pool[b]], annulus):
            report.fail(CounterexampleFound, f"{pool[a]} and {pool[b]} share a cluster but their arcs cross")

    interior, frontier = compatible_sets(graph, annulus.rank)
    for members in interior:
        if members not in clusters:
            report.context["members"] = [v.format() for v in sorted(members, key=LaurentPoly.sort_key)]
            report.fail(CounterexampleFound, "pairwise compatible variables inside the radius are not a cluster")
    beyond = 0
    for members in frontier:
        if members in clusters:
            continue
        state, _ = flip_toward(root, sorted(arc_of[v] for v in members))
        if frozenset(state.seed.cluster) != members:
            report.fail(CounterexampleFound, "compatible variables do not form the cluster of their triangulation")
        beyond += 1
    report.context.update(
        clusters=len(clusters),
        pool=len(pool),
        interior_sets=len(interior),
        frontier_sets=len(frontier),
        beyond=beyond,
    )
    logging.info("%s: PASS", report.name)
    return report


def verify_cover_flips(p: int, q: int, count: int = 20, window: int = 4, rng: Optional[random.Random] = None) -> IdentityReport:
    rng = rng or random.Random(0)
    annulus = MarkedAnnulus(p, q)
    report = IdentityReport(f"cover flips on {annulus}", context={"p": p, "q": q, "count": count, "window": window})
    for _ in range(count):
        triangulation = random_triangulation(annulus, rng.randrange(6), rng)
        i = rng.randrange(triangulation.n)
        if not verify_cover_flip(triangulation, i, window):
            report.context["triangulation"] = [str(arc) for arc in triangulation.arcs]
            report.fail(IdentityFailed, f"flip of arc {i} does not lift")
    logging.info("%s: PASS", report.name)
    return report


# ----------------------------------------------------------------------
# report registry
# ----------------------------------------------------------------------
def _option(options: Mapping[str, Any], key: str, default):
    value = options.get(key)
    return default if value is None else value


REPORTS: Dict[str, Callable[[Mapping[str, Any]], List[IdentityReport]]] = {
    "lemma31": lambda o: [kronecker_lemma_report()],
    "case1": lambda o: [verify_case1(_option(o, "p", 2), _option(o, "q", 1), _option(o, "depth", 3),
                                     node_limit=_option(o, "node_limit", 20000))],
    "case2-formal": lambda o: [verify_case2_formal(), verify_case2_formal(("z8", "z10"))],
    "case2-geometric": lambda o: [verify_case2_geometric(_option(o, "p", 4), _option(o, "q", 1),
                                                         _option(o, "depth", 6), _option(o, "node_limit", 20000))],
    "case3-n2": lambda o: [verify_case3(2)],
    "case3-n3": lambda o: [verify_case3(3)],
    "case3-n4": lambda o: [verify_case3(4)],
    "induction": lambda o: [verify_bridging_induction(_option(o, "p", 2), _option(o, "q", 2), _option(o, "K", 4),
                                                      node_limit=_option(o, "node_limit", 20000))],
    "quiver-recovery": lambda o: [verify_quiver_recovery(_option(o, "p", 2), _option(o, "q", 1),
                                                         _option(o, "depth", 4), _option(o, "node_limit", 20000))],
    "unistructurality": lambda o: [unistructurality_experiment(
        _option(o, "p", 1), _option(o, "q", 1), _option(o, "depth", 5),
        node_limit=_option(o, "node_limit", 20000), rng=random.Random(_option(o, "seed", 0)))],
    "cover-flip": lambda o: [verify_cover_flips(_option(o, "p", 2), _option(o, "q", 2),
                                                rng=random.Random(_option(o, "seed", 0)))],
}


def run_report(name: str, **options) -> List[IdentityReport]:
    """run one named report, or every report for 'all'"""
    if name == "all":
        # shared parameters would not fit every report, so each keeps its defaults
        common = {key: options.get(key) for key in ("node_limit", "seed")}
        return [report for key in REPORTS for report in REPORTS[key](common)]
    if name not in REPORTS:
        raise UnknownReport(f"unknown report {name}, expected one of {', '.join(REPORTS)} or all")
    return REPORTS[name](options)
