"""Decorated-tree symbol algebra for the two regularity structures.

Symbols are terms built from the grammar ``One | X1 | X2 | Xi | Xi' |
I(sym) | sym*sym`` with a commutative, associative product.  The unprimed
structure carries the rough noise ``Xi`` of homogeneity ``-3/2 - kappa``;
the primed structure carries ``Xi'`` of homogeneity ``-1 - 2*kappa``.
kappa itself is never given a number: all comparisons are lexicographic in
(constant, kappa-coefficient), i.e. decided as kappa -> 0+.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Iterable, Optional

from .coeffs import DU, Poly, U, letter_g, letter_h, parse_poly
from .exts import Homogeneity

UNPRIMED = "unprimed"
PRIMED = "primed"
RHS = "RHS"
SOL = "sol"

# Homogeneity thresholds: |tau| < kappa on the RHS, |tau| < 3/2 + 2*kappa
# for the solution sector.
RHS_CAP = Homogeneity.of(0, 1)
SOL_CAP = Homogeneity.of(Fraction(3, 2), 2)


@dataclass(frozen=True)
class Symbol:
    """A canonical-form term; compare and hash by structure."""

    kind: str  # 'one' | 'x' | 'xi' | 'xip' | 'i' | 'prod'
    axis: int = 0
    child: Optional["Symbol"] = None
    factors: tuple = field(default_factory=tuple)

    def sort_key(self):
        # Products print polynomial factors first, then planted trees, then
        # the noise, matching the usual way the terms are written out.
        if self.kind == "one":
            return (0,)
        if self.kind == "x":
            return (1, self.axis)
        if self.kind == "i":
            return (2, self.child.sort_key())
        if self.kind == "xi":
            return (3,)
        if self.kind == "xip":
            return (4,)
        return (5, tuple(f.sort_key() for f in self.factors))

    def __str__(self):
        if self.kind == "one":
            return "One"
        if self.kind == "xi":
            return "Xi"
        if self.kind == "xip":
            return "Xi'"
        if self.kind == "x":
            return f"X{self.axis}"
        if self.kind == "i":
            return f"I({self.child})"
        return "*".join(str(f) for f in self.factors)

    __repr__ = __str__


ONE = Symbol("one")
XI = Symbol("xi")
XIP = Symbol("xip")
X1 = Symbol("x", axis=1)
X2 = Symbol("x", axis=2)


def X(axis: int) -> Symbol:
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    return X1 if axis == 1 else X2


def I(child: Symbol) -> Symbol:
    return Symbol("i", child=child)


def product(factors: Iterable[Symbol]) -> Symbol:
    """Canonical commutative product: flat, sorted, One dropped.

    Rejects combinations outside the two structures: more than one noise
    at the root, or repeated/multiple polynomial decorations (no powers of
    ``X_i`` ever occur).
    """
    flat: list[Symbol] = []
    for f in factors:
        if f.kind == "prod":
            flat.extend(f.factors)
        elif f.kind != "one":
            flat.append(f)
    if not flat:
        return ONE
    if len(flat) == 1:
        return flat[0]
    noises = sum(1 for f in flat if f.kind in ("xi", "xip"))
    if noises > 1:
        raise ValueError("at most one noise decoration per product")
    polys = sum(1 for f in flat if f.kind == "x")
    if polys > 1:
        raise ValueError("higher polynomial decorations are not in the structure")
    flat.sort(key=Symbol.sort_key)
    return Symbol("prod", factors=tuple(flat))


def mul(a: Symbol, b: Symbol) -> Symbol:
    return product([a, b])


def homogeneity(tau: Symbol, structure: str = UNPRIMED) -> Homogeneity:
    """Recursive |tau|: noise base cases, +2 under I, additive on products."""
    if tau.kind == "one":
        return Homogeneity.of(0, 0)
    if tau.kind == "x":
        return Homogeneity.of(1, 0)
    if tau.kind == "xi":
        if structure != UNPRIMED:
            raise ValueError("Xi lives in the unprimed structure")
        return Homogeneity.of(Fraction(-3, 2), -1)
    if tau.kind == "xip":
        if structure != PRIMED:
            raise ValueError("Xi' lives in the primed structure")
        return Homogeneity.of(-1, -2)
    if tau.kind == "i":
        return homogeneity(tau.child, structure).shift(2)
    total = Homogeneity.of(0, 0)
    for f in tau.factors:
        total = total + homogeneity(f, structure)
    return total


def generate(structure: str, side: str) -> frozenset:
    """Fixed point of the inductive construction, truncated by homogeneity.

    RHS sets collect products ``tau_1...tau_k * noise`` over solution-sector
    factors; solution sets are the polynomials plus ``I`` of the RHS.
    """
    noise = XI if structure == UNPRIMED else XIP
    noise_hom = homogeneity(noise, structure)
    rhs: set[Symbol] = set()
    sol: set[Symbol] = set()
    while True:
        gens = sorted((s for s in sol if s.kind != "one"), key=Symbol.sort_key)
        new_rhs = set(rhs)
        if noise_hom < RHS_CAP:
            new_rhs.add(noise)
        for size in range(1, 8):
            added = False
            for combo in combinations_with_replacement(gens, size):
                total = noise_hom
                for f in combo:
                    total = total + homogeneity(f, structure)
                if not total < RHS_CAP:
                    continue
                try:
                    term = product(list(combo) + [noise])
                except ValueError:
                    continue
                new_rhs.add(term)
                added = True
            if not added and size > 1:
                break
        new_sol = {ONE, X1, X2}
        for tau in new_rhs:
            planted = I(tau)
            if homogeneity(planted, structure) < SOL_CAP:
                new_sol.add(planted)
        if new_rhs == rhs and new_sol == sol:
            break
        rhs, sol = new_rhs, new_sol
    if side == RHS:
        return frozenset(rhs)
    if side == SOL:
        return frozenset(sol)
    raise ValueError(f"side must be {RHS!r} or {SOL!r}")


# The structure-change map: the only symbols with nonzero image.
def _iota_table() -> dict:
    xiixi = mul(I(XI), XI)
    table = {
        ONE: ONE,
        X1: X1,
        X2: X2,
        xiixi: XIP,
        I(xiixi): I(XIP),
    }
    for axis in (1, 2):
        table[product([X(axis), I(XI), XI])] = mul(X(axis), XIP)
        table[mul(I(mul(X(axis), XI)), XI)] = mul(X(axis), XIP)
    # The two four-noise trees share their image.
    tall = mul(I(mul(I(xiixi), XI)), XI)
    branched = product([I(XI), I(xiixi), XI])
    table[tall] = mul(I(XIP), XIP)
    table[branched] = mul(I(XIP), XIP)
    return table


_IOTA = _iota_table()


def iota(tau: Symbol) -> Optional[Symbol]:
    """Structure-change map into the primed structure; None encodes zero."""
    return _IOTA.get(tau)


class Expansion:
    """Finite formal sum ``sum coeff(tau) * tau`` with Poly coefficients."""

    def __init__(self, terms: dict | None = None):
        self.terms: dict[Symbol, Poly] = {
            s: p for s, p in (terms or {}).items() if p
        }

    def __eq__(self, other):
        return isinstance(other, Expansion) and self.terms == other.terms

    def __iter__(self):
        return iter(sorted(self.terms.items(), key=lambda kv: kv[0].sort_key()))

    def add(self, sym: Symbol, coeff: Poly) -> None:
        cur = self.terms.get(sym, Poly.zero()) + coeff
        if cur:
            self.terms[sym] = cur
        else:
            self.terms.pop(sym, None)

    def coeff(self, sym: Symbol) -> Poly:
        return self.terms.get(sym, Poly.zero())

    def apply_iota(self) -> "Expansion":
        out = Expansion()
        for sym, coeff in self.terms.items():
            image = iota(sym)
            if image is not None:
                out.add(image, coeff)
        return out

    def to_json(self) -> str:
        return json.dumps(
            {str(s): str(p) for s, p in sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())},
            indent=2,
        )

    @staticmethod
    def from_json(text: str) -> "Expansion":
        data = json.loads(text)
        out = Expansion()
        for sym_s, poly_s in data.items():
            out.add(parse_symbol(sym_s), parse_poly(poly_s))
        return out

    def __str__(self):
        if not self.terms:
            return "0"
        return "  +  ".join(f"({p}) {s}" for s, p in self)

    __repr__ = __str__


def lift_nonlinearity(expansion: Expansion, h, structure: str) -> Expansion:
    """Truncated Taylor lift of a nonlinearity against the structure's noise.

    ``h`` may be the letter name ``'g'``/``'h'`` or an explicit Poly (e.g.
    ``g'*g`` for the effective nonlinearity of the limit equation).  Products
    that leave the structure after multiplication by the noise are dropped.
    """
    if isinstance(h, str):
        h = Poly.letter(letter_g(0) if h == "g" else letter_h(0))
    if ONE not in expansion.terms:
        raise ValueError("expansion has no One component to expand around")
    noise = XI if structure == UNPRIMED else XIP
    noise_hom = homogeneity(noise, structure)
    tilde = [(s, p) for s, p in expansion.terms.items() if s != ONE]
    tilde.sort(key=lambda kv: kv[0].sort_key())

    out = Expansion()
    out.add(noise, h)
    deriv = h
    factorial = 1
    for ell in range(1, 6):
        deriv = deriv.diff()
        factorial *= ell
        if deriv.is_zero():
            break
        any_kept = False
        for combo in combinations_with_replacement(range(len(tilde)), ell):
            syms = [tilde[i][0] for i in combo]
            total = noise_hom
            for s in syms:
                total = total + homogeneity(s, structure)
            if not total < RHS_CAP:
                continue
            try:
                term = product(syms + [noise])
            except ValueError:
                continue
            mult = Fraction(factorial)
            for i in set(combo):
                reps = combo.count(i)
                for r in range(2, reps + 1):
                    mult /= r
            coeff = deriv
            for i in combo:
                coeff = coeff * tilde[i][1]
            out.add(term, coeff.scale(mult / factorial))
            any_kept = True
        if not any_kept:
            break
    return out


def check_iota_intertwines(expansion: Expansion) -> bool:
    """Does the structure change commute with the nonlinearity lift?

    Compares iota applied termwise to the lift of ``g`` against the lift of
    the composite letter word ``g'*g`` on the image expansion.
    """
    lifted = lift_nonlinearity(expansion, "g", UNPRIMED)
    h_eff = Poly.letter(letter_g(1)) * Poly.letter(letter_g(0))
    image = lift_nonlinearity(expansion.apply_iota(), h_eff, PRIMED)
    return lifted.apply_iota() == image


def u_expansion() -> Expansion:
    """The solution-sector expansion driving the nonlinearity lift.

    The ``I(I(Xi)*I(Xi)*Xi)`` coefficient is ``g''*g^2/2`` (the value forced
    by consistency with the lifted right-hand side).
    """
    g = Poly.letter(letter_g(0))
    g1 = Poly.letter(letter_g(1))
    g2 = Poly.letter(letter_g(2))
    du = Poly.letter(DU)
    xiixi = mul(I(XI), XI)
    exp = Expansion()
    exp.add(ONE, Poly.letter(U))
    exp.add(I(XI), g)
    exp.add(I(xiixi), g1 * g)
    exp.add(X1, du)
    exp.add(X2, du)
    exp.add(I(mul(I(xiixi), XI)), g1 * g1 * g)
    exp.add(I(product([I(XI), I(XI), XI])), (g2 * g * g).scale(Fraction(1, 2)))
    exp.add(I(mul(X1, XI)), g1 * du)
    exp.add(I(mul(X2, XI)), g1 * du)
    return exp


# ---------------------------------------------------------------------------
# Text grammar


def _tokenize(text: str) -> list[str]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()*":
            tokens.append(ch)
            i += 1
            continue
        for word in ("One", "Xi'", "Xi", "X1", "X2", "I"):
            if text.startswith(word, i):
                tokens.append(word)
                i += len(word)
                break
        else:
            raise ValueError(f"bad symbol text at {text[i:]!r}")
    return tokens


def parse_symbol(text: str) -> Symbol:
    tokens = _tokenize(text)
    pos = 0

    def parse_expr():
        nonlocal pos
        factors = [parse_atom()]
        while pos < len(tokens) and tokens[pos] == "*":
            pos += 1
            factors.append(parse_atom())
        return product(factors)

    def parse_atom():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        if tok == "One":
            return ONE
        if tok == "Xi":
            return XI
        if tok == "Xi'":
            return XIP
        if tok == "X1":
            return X1
        if tok == "X2":
            return X2
        if tok == "I":
            if tokens[pos] != "(":
                raise ValueError("expected '(' after I")
            pos += 1
            inner = parse_expr()
            if pos >= len(tokens) or tokens[pos] != ")":
                raise ValueError("unbalanced parentheses")
            pos += 1
            return I(inner)
        raise ValueError(f"unexpected token {tok!r}")

    sym = parse_expr()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens in {text!r}")
    return sym
