"""Finite branched coverings of the sphere from permutation monodromy.

Sheets are ``0..n-1`` internally and ``1..n`` in cycle notation.  Products
act left to right: ``sigma_1 sigma_2`` applies ``sigma_1`` first.

Gluing convention.  Inner vertex ``j`` (half sheet over the inner disc) is
joined across side ``s`` to Outer vertex ``tau_s(j)`` where
``tau_s = sigma_0 sigma_1 ... sigma_s`` (0-based branch values), and
``tau_{q-1}`` is the identity exactly because the monodromy product is.
With the face rule of :mod:`complex_core`, the face over ``a_i`` visits the
Outer vertices along a cycle of ``sigma_i``, so faces over ``a_i`` are in
bijection with the cycles of ``sigma_i`` and ``m`` is the cycle length.
Mirroring the curve (swapping Inner and Outer) yields the mirror complex.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .complex_core import Color, LineComplex, LineComplexError


class MonodromyError(LineComplexError):
    pass


class NonTransitive(MonodromyError):
    pass


class ProductNotIdentity(MonodromyError):
    pass


class CycleParseError(MonodromyError):
    def __init__(self, message: str, text: str = "", column: int | None = None):
        self.text = text
        self.column = column
        loc = f" (column {column})" if column is not None else ""
        super().__init__(f"{message}{loc}: {text!r}")


_TOKEN = re.compile(r"\s*(\(|\)|[0-9]+|,)")


def parse_cycles(text: str, n: int) -> tuple:
    """Cycle notation to a 0-based image tuple.

    ``"(1 2 3)(4 5)"``, ``"(1,2,3)"`` and, when ``n <= 9``, the compact
    ``"(123)"`` are accepted; ``""``, ``"()"`` and ``"id"`` mean identity.
    """
    img = list(range(n))
    stripped = text.strip()
    if stripped in ("", "id", "()", "e"):
        return tuple(img)
    pos = 0
    seen: set = set()
    cycle: list | None = None
    cycle_start = 0
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m:
            raise CycleParseError("unexpected character", text, pos + 1)
        tok = m.group(1)
        col = m.start(1) + 1
        pos = m.end()
        if tok == "(":
            if cycle is not None:
                raise CycleParseError("nested '('", text, col)
            cycle, cycle_start = [], col
        elif tok == ")":
            if cycle is None:
                raise CycleParseError("unmatched ')'", text, col)
            for a, b in zip(cycle, cycle[1:] + cycle[:1]):
                img[a] = b
            cycle = None
        elif tok == ",":
            if cycle is None:
                raise CycleParseError("',' outside a cycle", text, col)
        else:
            if cycle is None:
                raise CycleParseError("label outside a cycle", text, col)
            compact = n <= 9 and len(tok) > 1 and "," not in text and not re.search(r"\d\s+\d", text)
            labels = [int(ch) for ch in tok] if compact else [int(tok)]
            for lab in labels:
                if not 1 <= lab <= n:
                    raise CycleParseError(f"label {lab} outside 1..{n}", text, col)
                if lab - 1 in seen:
                    raise CycleParseError(f"label {lab} repeated", text, col)
                seen.add(lab - 1)
                cycle.append(lab - 1)
    if cycle is not None:
        raise CycleParseError("unclosed '('", text, cycle_start)
    return tuple(img)


def cycles(perm: tuple) -> list:
    out, seen = [], set()
    for start in range(len(perm)):
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        j = perm[start]
        while j != start:
            cyc.append(j)
            seen.add(j)
            j = perm[j]
        out.append(cyc)
    return out


def format_cycles(perm: tuple) -> str:
    parts = [c for c in cycles(perm) if len(c) > 1]
    if not parts:
        return "()"
    sep = "" if len(perm) <= 9 else " "
    return "".join("(" + sep.join(str(x + 1) for x in c) + ")" for c in parts)


def compose(first: tuple, then: tuple) -> tuple:
    """Left-to-right product: apply ``first`` then ``then``."""
    return tuple(then[first[j]] for j in range(len(first)))


def inverse(perm: tuple) -> tuple:
    inv = [0] * len(perm)
    for j, k in enumerate(perm):
        inv[k] = j
    return tuple(inv)


@dataclass(frozen=True)
class MonodromyDatum:
    n: int
    q: int
    sigma: tuple

    @classmethod
    def from_cycles(cls, n: int, sigma: list) -> "MonodromyDatum":
        return cls(n, len(sigma), tuple(parse_cycles(s, n) for s in sigma))

    def product(self) -> tuple:
        acc = tuple(range(self.n))
        for p in self.sigma:
            acc = compose(acc, p)
        return acc

    def is_transitive(self) -> bool:
        seen = {0}
        todo = [0]
        while todo:
            j = todo.pop()
            for p in self.sigma:
                if p[j] not in seen:
                    seen.add(p[j])
                    todo.append(p[j])
        return len(seen) == self.n

    def check(self) -> None:
        if self.n < 1:
            raise MonodromyError("need at least one sheet")
        if self.q < 2 or len(self.sigma) != self.q:
            raise MonodromyError(f"need q >= 2 permutations, got {len(self.sigma)}")
        for p in self.sigma:
            if len(p) != self.n or sorted(p) != list(range(self.n)):
                raise MonodromyError(f"not a permutation of {self.n} sheets: {p}")
        if self.product() != tuple(range(self.n)):
            raise ProductNotIdentity(f"product is {format_cycles(self.product())}, not the identity")
        if not self.is_transitive():
            raise NonTransitive("monodromy group does not act transitively")

    def cycle_strings(self) -> list:
        return [format_cycles(p) for p in self.sigma]


@dataclass(frozen=True)
class CoveringSummary:
    n: int
    q: int
    total_branching: int
    euler_characteristic: int
    genus: int
    mean_ramification: Fraction

    @property
    def genus_zero_identity(self) -> bool | None:
        """``mean == 2 - 2/n``; ``None`` (not applicable) for positive genus."""
        if self.genus != 0:
            return None
        return self.mean_ramification == 2 - Fraction(2, self.n)


def build_from_monodromy(d: MonodromyDatum) -> LineComplex:
    """Inner vertex ``j`` is id ``j``; Outer vertex ``k`` is id ``n + k``."""
    d.check()
    n, q = d.n, d.q
    taus = []
    acc = tuple(range(n))
    for p in d.sigma:
        acc = compose(acc, p)
        taus.append(acc)
    inner = []
    outer = [[None] * q for _ in range(n)]
    for j in range(n):
        row = []
        for s in range(q):
            k = taus[s][j]
            row.append((n + k, s))
            outer[k][s] = (j, s)
        inner.append(tuple(row))
    colors = (Color.INNER,) * n + (Color.OUTER,) * n
    return LineComplex(q, colors, tuple(inner) + tuple(tuple(r) for r in outer))


def covering_summary(d: MonodromyDatum) -> CoveringSummary:
    d.check()
    b = sum(len(c) - 1 for p in d.sigma for c in cycles(p))
    chi = 2 * d.n - b
    return CoveringSummary(d.n, d.q, b, chi, (2 - chi) // 2, Fraction(b, d.n))


def random_datum(rng, n: int, q: int, moves: int | None = None) -> MonodromyDatum:
    """Random datum with ``sigma_q`` closing the product; may be intransitive.

    ``moves`` limits each free permutation to that many random
    transpositions, which biases towards low genus.
    """
    sigma = []
    for _ in range(q - 1):
        if moves is None:
            p = tuple(int(x) for x in rng.permutation(n))
        else:
            img = list(range(n))
            for _ in range(int(rng.integers(0, moves + 1))):
                a, b = rng.choice(n, size=2, replace=False) if n > 1 else (0, 0)
                img[a], img[b] = img[b], img[a]
            p = tuple(img)
        sigma.append(p)
    acc = tuple(range(n))
    for p in sigma:
        acc = compose(acc, p)
    sigma.append(inverse(acc))
    return MonodromyDatum(n, q, tuple(sigma))
