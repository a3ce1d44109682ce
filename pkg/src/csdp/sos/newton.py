"""Newton polytope reduction of the Gram basis, decided in exact rational arithmetic."""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .poly import Exponent, ExponentSet, Polynomial, full_basis, nnz


def _feasible_convex_combination(points: Sequence[Exponent], target: Exponent, coords: Sequence[int]) -> bool:
    """Phase-one simplex with Bland's rule: is target a convex combination of points?"""
    if not points:
        return False
    rows = [[Fraction(p[i]) for p in points] for i in coords] + [[Fraction(1)] * len(points)]
    rhs = [Fraction(target[i]) for i in coords] + [Fraction(1)]
    m, k = len(rows), len(points)
    # tableau columns: k structural, m artificial; basis starts on the artificials
    T = [rows[r] + [Fraction(int(r == j)) for j in range(m)] + [rhs[r]] for r in range(m)]
    basis = list(range(k, k + m))
    cost = [Fraction(0)] * k + [Fraction(1)] * m + [Fraction(0)]
    obj = [cost[j] - sum(T[r][j] for r in range(m)) for j in range(k + m)] + [-sum(T[r][-1] for r in range(m))]
    while True:
        enter = next((j for j in range(k + m) if obj[j] < 0), None)
        if enter is None:
            break
        best, leave = None, None
        for r in range(m):
            a = T[r][enter]
            if a > 0:
                ratio = T[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[leave]):
                    best, leave = ratio, r
        if leave is None:  # unbounded direction cannot occur in phase one
            break
        piv = T[leave][enter]
        T[leave] = [v / piv for v in T[leave]]
        for r in range(m):
            if r != leave and T[r][enter] != 0:
                f = T[r][enter]
                T[r] = [a - f * b for a, b in zip(T[r], T[leave])]
        f = obj[enter]
        obj = [a - f * b for a, b in zip(obj, T[leave])]
        basis[leave] = enter
    return obj[-1] == 0


def in_newton_polytope(point: Exponent, support: Sequence[Exponent]) -> bool:
    """Is ``point`` in the convex hull of ``support``? Points using other coordinates are skipped."""
    s = nnz(point)
    pts = [a for a in support if nnz(a) <= s]
    if tuple(point) in set(map(tuple, pts)):
        return True
    if not pts or sum(point) < min(sum(a) for a in pts) or sum(point) > max(sum(a) for a in pts):
        return False
    for i in s:
        if not (min(a[i] for a in pts) <= point[i] <= max(a[i] for a in pts)):
            return False
    return _feasible_convex_combination(pts, point, sorted(s))


def newton_basis(f: Polynomial) -> ExponentSet:
    """{beta : |beta| <= deg/2, 2 beta in New(f)}."""
    deg = f.degree()
    if deg % 2:
        raise ValueError(f"Newton reduction needs even degree, got {deg}")
    if f.is_zero():
        return ExponentSet()
    supp = list(f.terms)
    hi = [max(a[i] for a in supp) for i in range(f.n)]
    lo_deg = min(sum(a) for a in supp)
    keep = []
    for b in full_basis(f.n, deg // 2):
        two = tuple(2 * v for v in b)
        if 2 * sum(b) < lo_deg or any(t > h for t, h in zip(two, hi)):
            continue
        if in_newton_polytope(two, supp):
            keep.append(b)
    return ExponentSet(keep)
