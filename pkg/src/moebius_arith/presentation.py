"""Finite presentations of SL(2, Z[1/b]) on 2 + 2|pi(b)| generators.

The construction amalgamates two copies of SL(2, Z) over the index-(p+1)
subgroup Gamma_0(p) of matrices that are upper triangular mod p, once per
prime p dividing b.  Copy one is generated by

    s = [[0,1],[-1,0]],  t = [[1,0],[1,1]],

copy two by the conjugates x_p = D s D^-1, y_p = D ybar D^-1 with
D = diag(1, p) and ybar = [[1,-1],[0,1]].  Both copies carry the standard
relators g^4 and (gh)^3 g^-2.  The amalgam is glued by matching relators
w(x_p, y_p) * w'(s, t)^-1 where the w range over Schreier generators of
Gamma_0(p) and w' rewrites the same integer matrix over {s, t}.

Every relator evaluates to the identity under the matrix assignment; that
soundness invariant is checked at construction time.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .congruence import is_prime
from .exact import (
    GroupWord,
    UniModularMatrix,
    evaluate_word,
    format_matrix,
    format_word,
    parse_matrix,
    parse_word,
    prime_factors,
    word,
)
from .modular_words import MAT_S, MAT_T, decompose_st

# Generating pair of the untwisted second copy: xbar equals the s matrix,
# ybar is its companion [[1,-1],[0,1]]; D-conjugation sends them to x_p, y_p.
MAT_XBAR = MAT_S
MAT_YBAR = UniModularMatrix.from_rows([[1, -1], [0, 1]])


def x_matrix(p: int) -> UniModularMatrix:
    """x_p = [[0, 1/p], [-p, 0]]."""
    return UniModularMatrix.from_rows([[0, Fraction(1, p)], [-p, 0]])


def y_matrix(p: int) -> UniModularMatrix:
    """y_p = [[1, -1/p], [0, 1]]."""
    return UniModularMatrix.from_rows([[1, Fraction(-1, p)], [0, 1]])


@dataclass(frozen=True)
class AmalgamPiece:
    """The per-prime data glued onto the {s, t} copy."""

    prime: int
    x_symbol: str
    y_symbol: str
    # (word over {x_p, y_p}, word over {s, t}) pairs with equal evaluation
    matching: tuple[tuple[GroupWord, GroupWord], ...]


@dataclass(frozen=True)
class Presentation:
    generators: tuple[str, ...]
    relators: tuple[GroupWord, ...]
    assignment: dict[str, UniModularMatrix]
    pieces: tuple[AmalgamPiece, ...] = ()

    def symbol_matrix(self, sym: str) -> UniModularMatrix:
        return self.assignment[sym]


def _projective_points(p: int) -> list[tuple[int, int]]:
    return [(0, 1)] + [(1, k) for k in range(p)]


def _normalize_point(u: int, v: int, p: int) -> tuple[int, int]:
    u %= p
    v %= p
    if u != 0:
        inv = pow(u, -1, p)
        return (1, v * inv % p)
    return (0, 1)


def _act(m: UniModularMatrix, pt: tuple[int, int], p: int) -> tuple[int, int]:
    u, v = pt
    a, b, c, d = int(m.e11), int(m.e12), int(m.e21), int(m.e22)
    return _normalize_point(a * u + b * v, c * u + d * v, p)


def gamma0_schreier_generators(p: int) -> list[GroupWord]:
    """Schreier generators of Gamma_0(p), as words over {x<p>, y<p>}.

    The orbit of the distinguished point of P^1(F_p) under the untwisted
    matrices xbar, ybar has exactly p + 1 points; the breadth-first
    transversal (generator order x, x^-1, y, y^-1) yields at most p + 2
    nontrivial Schreier words.  Evaluated at the twisted matrices
    (x_p, y_p) each word becomes an integer matrix with lower-left entry
    divisible by p.  The distinguished point is the one that makes those
    evaluations integral.
    """
    return [w for w, _ in _schreier_pairs(p)]


def _schreier_pairs(p: int) -> list[tuple[GroupWord, UniModularMatrix]]:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    xsym, ysym = f"x{p}", f"y{p}"
    xm, ym = x_matrix(p), y_matrix(p)
    twisted = {xsym: xm, ysym: ym}

    steps = [
        ((xsym, 1), MAT_XBAR),
        ((xsym, -1), MAT_XBAR.inv()),
        ((ysym, 1), MAT_YBAR),
        ((ysym, -1), MAT_YBAR.inv()),
    ]
    base = (0, 1)
    transversal: dict[tuple[int, int], GroupWord] = {base: GroupWord()}
    queue = [base]
    while queue:
        pt = queue.pop(0)
        rep = transversal[pt]
        for syl, mat in steps:
            img = _act(mat, pt, p)
            if img not in transversal:
                transversal[img] = rep * word([syl])
                queue.append(img)
    assert len(transversal) == p + 1, "projective orbit must have p+1 points"

    pairs: list[tuple[GroupWord, UniModularMatrix]] = []
    seen_values: set = set()
    identity = UniModularMatrix.identity()
    for pt in transversal:
        rep = transversal[pt]
        for syl, mat in ((s, m) for s, m in steps if s[1] == 1):
            img = _act(mat, pt, p)
            gen = rep * word([syl]) * transversal[img].inv()
            if gen.is_empty():
                continue  # tree edge
            value = evaluate_word(gen, twisted)
            if value == identity:
                continue  # represents the trivial element
            if value in seen_values:
                continue  # duplicate of an earlier generator
            if not value.is_integral() or int(value.e21) % p != 0:
                raise AssertionError(
                    f"Schreier generator {gen} leaves Gamma_0({p})")
            seen_values.add(value)
            pairs.append((gen, value))
    assert len(pairs) <= p + 2, "more than p+2 nontrivial Schreier generators"
    return pairs


def _power_braid_relators(g: str, h: str) -> list[GroupWord]:
    """g^4 and (gh)^3 g^-2, the SL(2, Z) relators for either copy."""
    return [
        word([(g, 4)]),
        word([(g, 1), (h, 1)] * 3 + [(g, -2)]),
    ]


def build_presentation(b: int) -> Presentation:
    """Presentation of SL(2, Z[1/b]); depends on b only through its primes."""
    if b <= 1:
        raise ValueError(f"base must exceed 1, got {b}")
    primes = prime_factors(b)
    generators = ["s", "t"]
    assignment: dict[str, UniModularMatrix] = {"s": MAT_S, "t": MAT_T}
    relators: list[GroupWord] = _power_braid_relators("s", "t")
    pieces: list[AmalgamPiece] = []
    for p in primes:
        xsym, ysym = f"x{p}", f"y{p}"
        generators += [xsym, ysym]
        assignment[xsym] = x_matrix(p)
        assignment[ysym] = y_matrix(p)
        relators += _power_braid_relators(xsym, ysym)
        matching = []
        for gen_word, value in _schreier_pairs(p):
            st_word = decompose_st(value)
            matching.append((gen_word, st_word))
            relators.append(gen_word * st_word.inv())
        pieces.append(AmalgamPiece(prime=p, x_symbol=xsym, y_symbol=ysym,
                                   matching=tuple(matching)))
    pres = Presentation(
        generators=tuple(generators),
        relators=tuple(relators),
        assignment=assignment,
        pieces=tuple(pieces),
    )
    if not verify_presentation_soundness(pres):
        raise AssertionError(f"unsound presentation for b={b}")
    return pres


def verify_presentation_soundness(pres: Presentation) -> bool:
    """True iff every relator evaluates to the identity matrix."""
    ident = UniModularMatrix.identity()
    return all(evaluate_word(r, pres.assignment) == ident
               for r in pres.relators)


# -- serialization ------------------------------------------------------------

def presentation_to_text(pres: Presentation) -> str:
    lines = ["gen: " + " ".join(pres.generators)]
    lines += ["rel: " + format_word(r) for r in pres.relators]
    return "\n".join(lines) + "\n"


def presentation_from_text(text: str) -> Presentation:
    """Parse the text format; the matrix assignment is rebuilt from the
    generator naming convention (s, t, x<p>, y<p>)."""
    gens: Optional[list[str]] = None
    relators = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("gen:"):
            gens = line[len("gen:"):].split()
        elif line.startswith("rel:"):
            relators.append(parse_word(line[len("rel:"):]))
        else:
            raise ValueError(f"unrecognized line {raw!r}")
    if gens is None:
        raise ValueError("missing generator line")
    assignment = _assignment_for_symbols(gens)
    return Presentation(generators=tuple(gens), relators=tuple(relators),
                        assignment=assignment)


def _assignment_for_symbols(gens: Iterable[str]) -> dict[str, UniModularMatrix]:
    assignment: dict[str, UniModularMatrix] = {}
    for sym in gens:
        if sym == "s":
            assignment[sym] = MAT_S
        elif sym == "t":
            assignment[sym] = MAT_T
        elif m := re.fullmatch(r"x(\d+)", sym):
            assignment[sym] = x_matrix(int(m.group(1)))
        elif m := re.fullmatch(r"y(\d+)", sym):
            assignment[sym] = y_matrix(int(m.group(1)))
        else:
            raise ValueError(f"cannot infer a matrix for generator {sym!r}")
    return assignment


def presentation_to_json(pres: Presentation) -> str:
    payload = {
        "generators": list(pres.generators),
        "relators": [format_word(r) for r in pres.relators],
        "assignment": {sym: format_matrix(m)
                       for sym, m in pres.assignment.items()},
    }
    return json.dumps(payload, indent=2)


def presentation_from_json(text: str) -> Presentation:
    payload = json.loads(text)
    assignment = {sym: parse_matrix(lit)
                  for sym, lit in payload["assignment"].items()}
    return Presentation(
        generators=tuple(payload["generators"]),
        relators=tuple(parse_word(r) for r in payload["relators"]),
        assignment=assignment,
    )
