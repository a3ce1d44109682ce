"""SDPA sparse format (.dat-s) reader and writer.

The file encodes  min c'x  s.t.  sum_i x_i F_i - F_0 ⪰ 0.  In our dual form this is
A_i = -F_i, C = -F_0, b = -c, and the file optimum equals -(max b'y).
"""

from __future__ import annotations

import os
import re
from pathlib import Path

import numpy as np

from .errors import ParseError
from .sdp import SdpProblem
from .sparse import SparseSymMatrix

_SEP = re.compile(r"[\s,{}()]+")


def _numbers(line: str) -> list[str]:
    return [t for t in _SEP.split(line.strip()) if t]


def _fmt(x: float) -> str:
    return repr(float(x))


def _neg(x: float) -> float:
    # adding 0.0 turns -0.0 into 0.0 so zero entries stay sign-stable
    return -float(x) + 0.0


def parse_sdpa(text: str) -> SdpProblem:
    raw = text.splitlines()
    lines = [(k + 1, ln) for k, ln in enumerate(raw)]
    body = [(k, ln) for k, ln in lines if ln.strip() and not ln.lstrip().startswith(('"', "*"))]
    it = iter(body)

    def take(what):
        try:
            return next(it)
        except StopIteration:
            raise ParseError(f"unexpected end of file while reading {what}", len(raw)) from None

    k, ln = take("m")
    try:
        m = int(_numbers(ln)[0])
    except (ValueError, IndexError):
        raise ParseError("expected constraint count m", k) from None
    k, ln = take("block count")
    try:
        nblocks = int(_numbers(ln)[0])
    except (ValueError, IndexError):
        raise ParseError("expected block count", k) from None
    k, ln = take("block sizes")
    try:
        sizes = [int(float(t)) for t in _numbers(ln)[:nblocks]]
    except ValueError:
        raise ParseError("bad block size", k) from None
    if len(sizes) != nblocks or any(s == 0 for s in sizes):
        raise ParseError(f"expected {nblocks} nonzero block sizes", k)
    cvals: list[float] = []
    while len(cvals) < m:
        k, ln = take("objective vector")
        try:
            cvals.extend(float(t) for t in _numbers(ln))
        except ValueError:
            raise ParseError("bad number in objective vector", k) from None
    if len(cvals) != m:
        raise ParseError(f"objective vector has {len(cvals)} entries, expected {m}", k)
    offsets = np.concatenate([[0], np.cumsum(np.abs(sizes))]).astype(int)
    n = int(offsets[-1])
    mats: list[dict[tuple[int, int], float]] = [dict() for _ in range(m + 1)]
    for k, ln in it:
        tok = _numbers(ln)
        if len(tok) < 5:
            raise ParseError("expected 'matno blkno i j value'", k)
        try:
            mat, blk, i, j = (int(t) for t in tok[:4])
            val = float(tok[4])
        except ValueError:
            raise ParseError("bad entry", k) from None
        if not (0 <= mat <= m and 1 <= blk <= nblocks):
            raise ParseError(f"matrix {mat} / block {blk} out of range", k)
        size = abs(sizes[blk - 1])
        if not (1 <= i <= size and 1 <= j <= size):
            raise ParseError(f"index ({i}, {j}) outside block of size {size}", k)
        if sizes[blk - 1] < 0 and i != j:
            raise ParseError("off-diagonal entry in a diagonal block", k)
        i, j = min(i, j), max(i, j)
        o = int(offsets[blk - 1])
        mats[mat][(o + i - 1, o + j - 1)] = _neg(val)
    C = SparseSymMatrix.from_entries(n, mats[0])
    A = tuple(SparseSymMatrix.from_entries(n, mats[i]) for i in range(1, m + 1))
    b = np.array([_neg(c) for c in cvals])
    return SdpProblem(n, C, A, b, tuple(sizes))


def format_sdpa(p: SdpProblem, comment: str | None = None) -> str:
    bs = p.block_structure or (p.n,)
    offsets = np.concatenate([[0], np.cumsum(np.abs(bs))]).astype(int)
    blk_of = np.zeros(p.n, int)
    for b, (lo, hi) in enumerate(zip(offsets[:-1], offsets[1:])):
        blk_of[lo:hi] = b
    out = []
    if comment:
        out.extend('"' + ln for ln in comment.splitlines())
    out.append(str(p.m))
    out.append(str(len(bs)))
    out.append(" ".join(str(s) for s in bs))
    out.append(" ".join(_fmt(_neg(c)) for c in p.b))
    for mat, M in enumerate((p.C, *p.A)):
        rec = []
        for i, j, v in zip(M.rows.tolist(), M.cols.tolist(), M.vals.tolist()):
            b = int(blk_of[i])
            if blk_of[j] != b:
                raise ValueError(f"entry ({i}, {j}) of matrix {mat} crosses blocks {bs}")
            o = int(offsets[b])
            rec.append((b + 1, i - o + 1, j - o + 1, _neg(v)))
        for b, i, j, v in sorted(rec):
            out.append(f"{mat} {b} {i} {j} {_fmt(v)}")
    return "\n".join(out) + "\n"


def sdpa_read(path: str | os.PathLike) -> SdpProblem:
    return parse_sdpa(Path(path).read_text())


def sdpa_write(p: SdpProblem, path: str | os.PathLike, comment: str | None = None) -> None:
    Path(path).write_text(format_sdpa(p, comment))
