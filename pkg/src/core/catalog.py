"""
Shipped lattice catalog and the element sets used by the searches
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from src.core.errors import NotTotallyPD, ParseError, UnknownName
from src.core.lattice import OFLattice, lattice_from_form
from src.core.qfield import FieldCtx, QuadRat, enumerate_tp_by_trace, make_alpha, make_field

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
CATALOG_FILE = DATA_DIR / "catalog.txt"
EXCEPTIONAL_FILE = DATA_DIR / "exceptional_sets.txt"

# fundamental units (a, b, q) -> (a + b sqrt D)/q, all totally positive of norm 1
UNITS = {
    6: (5, 2, 1),
    7: (8, 3, 1),
    21: (5, 1, 2),
    33: (23, 4, 1),
    77: (9, 1, 2),
}

ADMISSIBLE_D = (2, 3, 5, 6, 7, 10, 13, 17, 21, 33, 41, 65, 77)

# D values the generic set does not settle, by residue class
EXCEPTIONS_ONE_MOD_FOUR = (29, 37, 53, 57, 61, 69, 73, 85, 89, 93, 101, 105, 129, 133,
                           161, 177, 217, 253, 273, 301, 329, 341)
EXCEPTIONS_OTHER = (11, 14, 15, 19, 22, 23, 26, 30, 31, 35, 38, 39, 42, 46, 47, 55,
                    62, 66, 67, 70, 78, 83, 86, 91, 94, 102)
PROVEN_RANGE_ONE_MOD_FOUR = 10000
PROVEN_RANGE_OTHER = 2500

# norm bound and extra elements pinning down the candidates of each field
CLASSIFICATION_SETS = {
    6: (10, ["5,0,1"]),
    7: (9, ["7,2,1"]),
    10: (31, []),
    13: (52, []),
    17: (30, []),
    21: (15, ["5,0,1"]),
    33: (4, []),
    41: (10, []),
    65: (16, []),
    77: (91, []),
}

COEFF_KEYS = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    D: int
    shape: str
    derivation: str
    proven: bool
    coeffs: Tuple[str, ...]


def _read_table(path: Path) -> List[Tuple[int, List[str]]]:
    rows = []
    with open(path, "r") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append((lineno, [c.strip() for c in line.split("|")]))
    return rows


@lru_cache(maxsize=1)
def load_entries() -> Dict[str, CatalogEntry]:
    entries: Dict[str, CatalogEntry] = {}
    for lineno, cols in _read_table(CATALOG_FILE):
        if len(cols) not in (5, 11):
            raise ParseError(f"expected 5 or 11 columns, got {len(cols)}", lineno)
        name, D, shape, derivation, proven = cols[:5]
        entries[name] = CatalogEntry(name=name, D=int(D), shape=shape, derivation=derivation,
                                     proven=proven == "yes", coeffs=tuple(cols[5:]))
    logger.debug(f"Loaded {len(entries)} catalog entries from {CATALOG_FILE}")
    return entries


def fundamental_unit(ctx: FieldCtx) -> QuadRat:
    if ctx.D not in UNITS:
        raise UnknownName(f"no unit tabulated for D={ctx.D}")
    return ctx.element(*UNITS[ctx.D])


def conjugate_lattice(L: OFLattice) -> OFLattice:
    """Same Z-module, omega acting through omega' = c1 - omega, Q replaced by Q'"""
    k = L.rank2n
    c1 = L.ctx.c1
    W = [[(c1 if i == j else 0) - L.W[i][j] for j in range(k)] for i in range(k)]
    label = None
    if L.label:
        label = L.label[:-5] if L.label.endswith("_conj") else L.label + "_conj"
    return OFLattice(L.ctx, L.gram.conj(), W, label=label)


def scale_by_unit(L: OFLattice, u: QuadRat, label: Optional[str] = None) -> OFLattice:
    if not (u.in_OF() and u.norm() == 1 and u.is_totally_positive()):
        raise NotTotallyPD(f"{u} is not a totally positive unit")
    return OFLattice(L.ctx, L.gram.scale(u), L.W, label=label)


def _build(name: str) -> OFLattice:
    entries = load_entries()
    if name not in entries:
        raise UnknownName(f"no catalog lattice named {name!r}")
    entry = entries[name]
    ctx = make_field(entry.D)
    if entry.derivation == "-":
        coeffs = {key: ctx.parse(text) for key, text in zip(COEFF_KEYS, entry.coeffs)}
        return lattice_from_form(ctx, coeffs, 3, entry.shape, label=name)
    kind, _, base = entry.derivation.partition(":")
    if kind == "conj":
        L = conjugate_lattice(catalog_get(base))
        return OFLattice(L.ctx, L.gram, L.W, label=name, validate=False)
    if kind == "unit":
        return scale_by_unit(catalog_get(base), fundamental_unit(ctx), label=name)
    raise ParseError(f"unknown derivation {entry.derivation!r} for {name}")


_cache: Dict[str, OFLattice] = {}


def catalog_get(name: str) -> OFLattice:
    if name not in _cache:
        _cache[name] = _build(name)
    return _cache[name]


def catalog_list(D: Optional[int] = None, proven_only: bool = False) -> List[OFLattice]:
    out = []
    for name, entry in load_entries().items():
        if D is not None and entry.D != D:
            continue
        if proven_only and not entry.proven:
            continue
        out.append(catalog_get(name))
    return out


def is_proven(name: str) -> bool:
    return load_entries()[name].proven


# element sets for the nonexistence searches

_TERM = re.compile(r"[+-]?[^+-]+")


def resolve_alpha(ctx: FieldCtx, j: int) -> QuadRat:
    """alpha_j in the form used for this residue class of D"""
    if ctx.is_one_mod_four:
        if j % 2:
            return make_alpha(ctx, j, "half")
        if j == 2:
            return make_alpha(ctx, 1, "whole")
        raise ParseError(f"alpha{j} is not defined for D = 1 mod 4")
    return make_alpha(ctx, j, "whole")


def parse_set_element(ctx: FieldCtx, text: str, line: int = 0) -> QuadRat:
    total = ctx.element(0)
    for term in _TERM.findall(text.replace(" ", "")):
        sign = -1 if term.startswith("-") else 1
        body = term.lstrip("+-")
        m = re.fullmatch(r"conj\(alpha(\d+)\)", body)
        if m:
            value = resolve_alpha(ctx, int(m.group(1))).conj()
        elif re.fullmatch(r"alpha\d+", body):
            value = resolve_alpha(ctx, int(body[5:]))
        elif re.fullmatch(r"\d*w", body):
            value = ctx.omega() * int(body[:-1] or 1)
        elif re.fullmatch(r"\d*r", body):
            value = ctx.sqrt_d() * int(body[:-1] or 1)
        elif re.fullmatch(r"\d+", body):
            value = ctx.element(int(body))
        else:
            raise ParseError(f"cannot read term {term!r}", line)
        total = total + value * sign
    return total


@lru_cache(maxsize=None)
def exceptional_set(D: int) -> Tuple[QuadRat, ...]:
    ctx = make_field(D)
    for lineno, cols in _read_table(EXCEPTIONAL_FILE):
        if int(cols[0]) == D:
            return tuple(parse_set_element(ctx, t, lineno) for t in cols[1].split(";"))
    raise UnknownName(f"no tabulated set for D={D}")


def has_exceptional_set(D: int) -> bool:
    return any(int(cols[0]) == D for _, cols in _read_table(EXCEPTIONAL_FILE))


def generic_set(ctx: FieldCtx) -> List[QuadRat]:
    return [ctx.element(1), ctx.element(2), resolve_alpha(ctx, 1), resolve_alpha(ctx, 2)]


def fallback_set(ctx: FieldCtx) -> List[QuadRat]:
    if ctx.is_one_mod_four:
        return [ctx.element(1), ctx.element(2), ctx.element(3), ctx.element(5),
                resolve_alpha(ctx, 1), resolve_alpha(ctx, 3), resolve_alpha(ctx, 5)]
    return [ctx.element(1), ctx.element(2), ctx.element(3), ctx.element(5),
            resolve_alpha(ctx, 1), resolve_alpha(ctx, 2).conj(),
            resolve_alpha(ctx, 3), resolve_alpha(ctx, 5)]


def prescribed_tier(D: int) -> str:
    """"generic", "fallback" or "table": the element set that settles D"""
    if has_exceptional_set(D):
        return "table"
    exceptions = EXCEPTIONS_ONE_MOD_FOUR if D % 4 == 1 else EXCEPTIONS_OTHER
    return "fallback" if D in exceptions else "generic"


def suite_elements(D: int, tier: str = "prescribed") -> Tuple[str, List[QuadRat]]:
    ctx = make_field(D)
    if tier == "prescribed":
        tier = prescribed_tier(D)
    if tier == "generic":
        return tier, generic_set(ctx)
    if tier == "fallback":
        return tier, fallback_set(ctx)
    if tier == "table":
        return tier, list(exceptional_set(D))
    raise ParseError(f"unknown set tier {tier!r}")


def classification_elements(D: int, trace_bound: int) -> List[QuadRat]:
    """Totally positive elements of norm up to the field's bound inside a trace box"""
    if D not in CLASSIFICATION_SETS:
        raise UnknownName(f"no classification set for D={D}")
    ctx = make_field(D)
    norm_bound, extra = CLASSIFICATION_SETS[D]
    out = enumerate_tp_by_trace(ctx, trace_bound, norm_bound)
    for text in extra:
        x = ctx.parse(text)
        if x not in out:
            out.append(x)
    return out
