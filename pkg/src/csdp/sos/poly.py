"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

import os
from fractions import Fraction
from itertools import combinations_with_replacement
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from ..errors import ParseError

Exponent = tuple[int, ...]


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, str):
        return Fraction(c.strip())
    return Fraction(c)


class ExponentSet:
    """Unique exponents in lexicographic order, with O(1) index lookup."""

    __slots__ = ("items", "_index")

    def __init__(self, items: Iterable[Exponent] = ()):
        self.items: tuple[Exponent, ...] = tuple(sorted({tuple(int(v) for v in e) for e in items}))
        self._index = {e: i for i, e in enumerate(self.items)}

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Exponent]:
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]

    def __contains__(self, e) -> bool:
        return tuple(e) in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, ExponentSet) and self.items == other.items

    def __hash__(self) -> int:
        return hash(self.items)

    def __repr__(self) -> str:
        return f"ExponentSet({list(self.items)})"

    def index(self, e: Exponent) -> int:
        return self._index[tuple(e)]

    def sums(self) -> "ExponentSet":
        return ExponentSet(add(a, b) for i, a in enumerate(self.items) for b in self.items[i:])


def add(a: Exponent, b: Exponent) -> Exponent:
    return tuple(x + y for x, y in zip(a, b))


def nnz(e: Exponent) -> frozenset[int]:
    return frozenset(i for i, v in enumerate(e) if v)


def full_basis(n: int, d: int) -> ExponentSet:
    """All exponents of total degree at most d."""
    out = []
    for deg in range(d + 1):
        for combo in combinations_with_replacement(range(n), deg):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return ExponentSet(out)


class Polynomial:
    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[Exponent, object] | Iterable = ()):
        self.n = int(n)
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exponent, Fraction] = {}
        for e, c in items:
            e = tuple(int(v) for v in e)
            if len(e) != self.n or any(v < 0 for v in e):
                raise ValueError(f"exponent {e} invalid for {self.n} variables")
            acc[e] = acc.get(e, Fraction(0)) + _frac(c)
        self.terms: dict[Exponent, Fraction] = {e: c for e, c in sorted(acc.items()) if c != 0}

    # construction
    @classmethod
    def constant(cls, n: int, c=1) -> "Polynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def var(cls, i: int, n: int) -> "Polynomial":
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1})

    @classmethod
    def variables(cls, n: int) -> list["Polynomial"]:
        return [cls.var(i, n) for i in range(n)]

    @classmethod
    def monomial(cls, e: Exponent, c=1) -> "Polynomial":
        return cls(len(e), {tuple(e): c})

    # queries
    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def support(self) -> ExponentSet:
        return ExponentSet(self.terms)

    def coeff(self, e: Exponent) -> Fraction:
        return self.terms.get(tuple(e), Fraction(0))

    def used_variables(self) -> frozenset[int]:
        return frozenset(i for e in self.terms for i, v in enumerate(e) if v)

    def max_abs(self) -> float:
        return float(max((abs(c) for c in self.terms.values()), default=0))

    def is_zero(self) -> bool:
        return not self.terms

    def evaluate(self, x) -> float:
        total = 0.0
        for e, c in self.terms.items():
            t = float(c)
            for xi, k in zip(x, e):
                t *= xi ** k
            total += t
        return total

    def float_terms(self) -> dict[Exponent, float]:
        return {e: float(c) for e, c in self.terms.items()}

    # arithmetic
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ValueError(f"variable counts differ: {self.n} vs {other.n}")
            return other
        return Polynomial.constant(self.n, other)

    def __add__(self, other):
        o = self._coerce(other)
        t = dict(self.terms)
        for e, c in o.terms.items():
            t[e] = t.get(e, Fraction(0)) + c
        return Polynomial(self.n, t)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(self.n, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        t: dict[Exponent, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = add(e1, e2)
                t[e] = t.get(e, Fraction(0)) + c1 * c2
        return Polynomial(self.n, t)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.n, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.n, other)
        return self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(self.terms.items())))

    def __repr__(self) -> str:
        return f"Polynomial({self.n}, {{{', '.join(f'{e}: {c}' for e, c in self.terms.items())}}})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.terms.items():
            mono = "*".join(f"x{i + 1}" + (f"^{k}" if k > 1 else "") for i, k in enumerate(e) if k)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts)


def parse_polynomial(text: str) -> Polynomial:
    """Lines ``coeff e1 e2 ... en``; '#' starts a comment. Coefficients may be rationals like 1/2."""
    n = None
    terms: list[tuple[Exponent, Fraction]] = []
    for k, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tok = line.replace(",", " ").split()
        try:
            c = Fraction(tok[0])
            e = tuple(int(t) for t in tok[1:])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad term {line!r}", k) from None
        if any(v < 0 for v in e):
            raise ParseError("negative exponent", k)
        if n is None:
            n = len(e)
        elif len(e) != n:
            raise ParseError(f"expected {n} exponents, got {len(e)}", k)
        terms.append((e, c))
    if n is None:
        raise ParseError("no terms", max(1, len(text.splitlines())))
    return Polynomial(n, terms)


def format_polynomial(f: Polynomial) -> str:
    return "".join(f"{c} {' '.join(map(str, e))}".rstrip() + "\n" for e, c in f.terms.items())


def read_polynomial(path: str | os.PathLike) -> Polynomial:
    return parse_polynomial(Path(path).read_text())
