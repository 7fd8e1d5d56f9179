"""
Exact integer Laurent polynomials in a fixed number of variables.

Every cluster variable handled by the library is a LaurentPoly.  Values are
immutable; terms are kept in canonical sparse form (no zero coefficient) and
iterated in lexicographic order of their exponent vectors.
"""
from __future__ import annotations

import logging
from fractions import Fraction
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

ExponentVector = Tuple[int, ...]


class LaurentError(Exception):
    """base error of the laurent module"""


class ArityMismatch(LaurentError, ValueError):
    pass


class DivisionByZero(LaurentError, ZeroDivisionError):
    pass


class ZeroPolynomialError(LaurentError, ValueError):
    pass


class VariableIndexError(LaurentError, IndexError):
    pass


class LaurentPoly:
    """Laurent polynomial with arbitrary precision integer coefficients"""

    __slots__ = ("_arity", "_terms", "_hash")

    def __init__(self, arity: int, terms: Optional[Mapping[ExponentVector, int]] = None):
        if arity < 0:
            raise LaurentError(f"arity must be non negative, got {arity}")
        clean: Dict[ExponentVector, int] = {}
        for exponents, coefficient in (terms or {}).items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != arity:
                raise ArityMismatch(
                    f"exponent vector {exponents} does not have arity {arity}"
                )
            if coefficient:
                clean[exponents] = int(coefficient)
        self._arity = arity
        self._terms = clean
        self._hash = None

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def zero(cls, arity: int) -> "LaurentPoly":
        return cls(arity)

    @classmethod
    def constant(cls, value: int, arity: int) -> "LaurentPoly":
        return cls(arity, {(0,) * arity: value})

    @classmethod
    def one(cls, arity: int) -> "LaurentPoly":
        return cls.constant(1, arity)

    @classmethod
    def monomial(cls, exponents: Sequence[int], coefficient: int = 1) -> "LaurentPoly":
        return cls(len(exponents), {tuple(exponents): coefficient})

    @classmethod
    def variable(cls, index: int, arity: int) -> "LaurentPoly":
        if not 0 <= index < arity:
            raise VariableIndexError(f"variable {index} out of range for arity {arity}")
        exponents = [0] * arity
        exponents[index] = 1
        return cls.monomial(exponents)

    @classmethod
    def coordinates(cls, arity: int) -> Tuple["LaurentPoly", ...]:
        return tuple(cls.variable(i, arity) for i in range(arity))

    @classmethod
    def _raw(cls, arity: int, terms: Dict[ExponentVector, int]) -> "LaurentPoly":
        # terms already canonical
        poly = cls.__new__(cls)
        poly._arity = arity
        poly._terms = terms
        poly._hash = None
        return poly

    # ------------------------------------------------------------------
    # accessors
    # ------------------------------------------------------------------
    @property
    def arity(self) -> int:
        return self._arity

    @property
    def terms(self) -> Dict[ExponentVector, int]:
        return dict(self._terms)

    def items(self) -> Iterable[Tuple[ExponentVector, int]]:
        """terms in lexicographic order of exponent vectors"""
        return sorted(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_constant(self) -> bool:
        return self.is_zero() or (
            len(self._terms) == 1 and (0,) * self._arity in self._terms
        )

    def coefficients(self) -> Tuple[int, ...]:
        return tuple(c for _, c in self.items())

    def leading_term(self) -> Tuple[ExponentVector, int]:
        if not self._terms:
            raise ZeroPolynomialError("zero polynomial has no leading term")
        exponents = max(self._terms)
        return exponents, self._terms[exponents]

    def sort_key(self) -> Tuple[Tuple[ExponentVector, int], ...]:
        """deterministic total order key, used to canonicalize clusters"""
        return tuple(self.items())

    # ------------------------------------------------------------------
    # equality and hashing
    # ------------------------------------------------------------------
    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self == LaurentPoly.constant(other, self._arity)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self._arity == other._arity and self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            if self.is_constant():
                # constants hash like the int they compare equal to
                self._hash = hash(self._terms.get((0,) * self._arity, 0))
            else:
                self._hash = hash((self._arity, frozenset(self._terms.items())))
        return self._hash

    # ------------------------------------------------------------------
    # ring operations
    # ------------------------------------------------------------------
    def _check(self, other: "LaurentPoly") -> None:
        if self._arity != other._arity:
            raise ArityMismatch(f"arity {self._arity} does not match {other._arity}")

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, int):
            return LaurentPoly.constant(other, self._arity)
        if not isinstance(other, LaurentPoly):
            raise TypeError(f"cannot combine LaurentPoly with {type(other).__name__}")
        self._check(other)
        return other

    def add(self, other: "LaurentPoly") -> "LaurentPoly":
        other = self._coerce(other)
        terms = dict(self._terms)
        for exponents, coefficient in other._terms.items():
            value = terms.get(exponents, 0) + coefficient
            if value:
                terms[exponents] = value
            else:
                terms.pop(exponents, None)
        return LaurentPoly._raw(self._arity, terms)

    def neg(self) -> "LaurentPoly":
        return LaurentPoly._raw(self._arity, {e: -c for e, c in self._terms.items()})

    def sub(self, other: "LaurentPoly") -> "LaurentPoly":
        return self.add(self._coerce(other).neg())

    def mul(self, other: "LaurentPoly") -> "LaurentPoly":
        other = self._coerce(other)
        terms: Dict[ExponentVector, int] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                exponents = tuple(a + b for a, b in zip(e1, e2))
                terms[exponents] = terms.get(exponents, 0) + c1 * c2
        return LaurentPoly._raw(self._arity, {e: c for e, c in terms.items() if c})

    def pow(self, exponent: int) -> "LaurentPoly":
        if exponent < 0:
            if not self.is_monomial():
                raise LaurentError("only monomials have Laurent inverses")
            return self.monomial_inverse().pow(-exponent)
        result = LaurentPoly.one(self._arity)
        base = self
        while exponent:
            if exponent & 1:
                result = result.mul(base)
            base = base.mul(base)
            exponent >>= 1
        return result

    def monomial_inverse(self) -> "LaurentPoly":
        (exponents, coefficient), = self._terms.items()
        if coefficient not in (1, -1):
            raise LaurentError("monomial with coefficient %d is not a unit" % coefficient)
        return LaurentPoly._raw(self._arity, {tuple(-e for e in exponents): coefficient})

    def shift(self, exponents: Sequence[int]) -> "LaurentPoly":
        """multiply by the monomial x^exponents"""
        return LaurentPoly._raw(
            self._arity,
            {tuple(a + b for a, b in zip(e, exponents)): c for e, c in self._terms.items()},
        )

    __add__ = add
    __sub__ = sub
    __mul__ = mul
    __neg__ = neg
    __pow__ = pow

    def __radd__(self, other):
        return self.add(other)

    def __rmul__(self, other):
        return self.mul(other)

    def __rsub__(self, other):
        return self._coerce(other).sub(self)

    # ------------------------------------------------------------------
    # reduced form and division
    # ------------------------------------------------------------------
    def _min_exponents(self) -> ExponentVector:
        if not self._terms:
            raise ZeroPolynomialError("zero polynomial has no reduced form")
        return tuple(min(column) for column in zip(*self._terms))

    def reduced_form(self) -> Tuple["LaurentPoly", ExponentVector]:
        """(numerator, denominator exponents) with self == numerator / x^denominator"""
        denominator = tuple(max(0, -m) for m in self._min_exponents())
        return self.shift(denominator), denominator

    def _primitive_part(self) -> Tuple["LaurentPoly", ExponentVector]:
        # polynomial not divisible by any variable, and the shift removed
        minimum = self._min_exponents()
        return self.shift(tuple(-m for m in minimum)), minimum

    def has_nonneg_numerator(self) -> bool:
        if not self._terms:
            raise ZeroPolynomialError("zero polynomial has no numerator")
        return all(c > 0 for c in self._terms.values())

    def try_div_exact(self, divisor: "LaurentPoly") -> Optional["LaurentPoly"]:
        """exact quotient self / divisor, or None when it is not a Laurent polynomial"""
        self._check(divisor)
        if divisor.is_zero():
            raise DivisionByZero("division by the zero Laurent polynomial")
        if self.is_zero():
            return self
        if divisor.is_monomial():
            (exponents, coefficient), = divisor._terms.items()
            if any(c % coefficient for c in self._terms.values()):
                return None
            return LaurentPoly._raw(
                self._arity,
                {
                    tuple(a - b for a, b in zip(e, exponents)): c // coefficient
                    for e, c in self._terms.items()
                },
            )
        numerator, shift_a = self._primitive_part()
        denominator, shift_b = divisor._primitive_part()
        quotient = _polynomial_division(numerator, denominator)
        if quotient is None:
            return None
        return quotient.shift(tuple(a - b for a, b in zip(shift_a, shift_b)))

    # ------------------------------------------------------------------
    # calculus, evaluation and substitution
    # ------------------------------------------------------------------
    def partial_derivative(self, index: int) -> "LaurentPoly":
        if not 0 <= index < self._arity:
            raise VariableIndexError(f"variable {index} out of range for arity {self._arity}")
        terms = {}
        for exponents, coefficient in self._terms.items():
            power = exponents[index]
            if power:
                lowered = list(exponents)
                lowered[index] -= 1
                terms[tuple(lowered)] = coefficient * power
        return LaurentPoly._raw(self._arity, terms)

    def evaluate(self, point: Sequence) -> Fraction:
        """exact value at a point with nonzero rational coordinates"""
        if len(point) != self._arity:
            raise ArityMismatch(f"point has {len(point)} coordinates, arity is {self._arity}")
        total = Fraction(0)
        for exponents, coefficient in self._terms.items():
            value = Fraction(coefficient)
            for x, e in zip(point, exponents):
                value *= Fraction(x) ** e
            total += value
        return total

    def substitute(self, values: Sequence["LaurentPoly"]) -> "LaurentPoly":
        """ring substitution x_i -> values[i]; negative powers need monomial values"""
        if len(values) != self._arity:
            raise ArityMismatch(f"{len(values)} values for arity {self._arity}")
        target = values[0].arity if values else 0
        result = LaurentPoly.zero(target)
        cache: Dict[Tuple[int, int], LaurentPoly] = {}
        for exponents, coefficient in self.items():
            term = LaurentPoly.constant(coefficient, target)
            for i, e in enumerate(exponents):
                if e:
                    if (i, e) not in cache:
                        cache[(i, e)] = values[i].pow(e)
                    term = term.mul(cache[(i, e)])
            result = result.add(term)
        return result

    # ------------------------------------------------------------------
    # formatting and JSON
    # ------------------------------------------------------------------
    def format(self, names: Optional[Sequence[str]] = None) -> str:
        if not self._terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self._arity)]
        pieces = []
        for exponents, coefficient in sorted(self._terms.items(), reverse=True):
            factors = []
            for name, e in zip(names, exponents):
                if e == 1:
                    factors.append(name)
                elif e:
                    factors.append(f"{name}^{e}")
            monomial = "*".join(factors)
            if not monomial:
                body = str(abs(coefficient))
            elif abs(coefficient) == 1:
                body = monomial
            else:
                body = f"{abs(coefficient)}*{monomial}"
            sign = "-" if coefficient < 0 else "+"
            pieces.append((sign, body))
        text = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            text += f" {sign} {body}"
        return text

    def __str__(self) -> str:
        return self.format()

    def __repr__(self) -> str:
        return f"LaurentPoly({self.format()})"

    def to_json(self) -> dict:
        return {
            "arity": self._arity,
            "terms": [{"e": list(e), "c": str(c)} for e, c in self.items()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LaurentPoly":
        try:
            arity = int(data["arity"])
            terms = {tuple(t["e"]): int(t["c"]) for t in data["terms"]}
        except (KeyError, TypeError, ValueError) as exception:
            raise LaurentError(f"invalid Laurent polynomial JSON: {exception}") from exception
        return cls(arity, terms)


def _polynomial_division(numerator: LaurentPoly, divisor: LaurentPoly) -> Optional[LaurentPoly]:
    """exact division of polynomials in Z[x] under lexicographic order, None if inexact"""
    lead_exponents, lead_coefficient = divisor.leading_term()
    arity = numerator.arity
    remainder = dict(numerator._terms)
    quotient: Dict[ExponentVector, int] = {}
    divisor_terms = list(divisor._terms.items())
    while remainder:
        exponents = max(remainder)
        coefficient = remainder[exponents]
        shift = tuple(a - b for a, b in zip(exponents, lead_exponents))
        if min(shift) < 0 or coefficient % lead_coefficient:
            return None
        factor = coefficient // lead_coefficient
        quotient[shift] = factor
        for e, c in divisor_terms:
            key = tuple(a + b for a, b in zip(e, shift))
            value = remainder.get(key, 0) - factor * c
            if value:
                remainder[key] = value
            else:
                remainder.pop(key, None)
    logging.debug("exact division: %d quotient terms", len(quotient))
    return LaurentPoly._raw(arity, quotient)


# functional interface
def add(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a.add(b)


def mul(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    return a.mul(b)


def try_div_exact(a: LaurentPoly, b: LaurentPoly) -> Optional[LaurentPoly]:
    return a.try_div_exact(b)


def reduced_form(a: LaurentPoly) -> Tuple[LaurentPoly, ExponentVector]:
    return a.reduced_form()


def has_nonneg_numerator(a: LaurentPoly) -> bool:
    return a.has_nonneg_numerator()


def partial_derivative(a: LaurentPoly, i: int) -> LaurentPoly:
    return a.partial_derivative(i)


def product(factors: Iterable[LaurentPoly], arity: int) -> LaurentPoly:
    result = LaurentPoly.one(arity)
    for factor in factors:
        result = result.mul(factor)
    return result
