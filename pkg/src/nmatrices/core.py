"""Signatures, formulas, substitutions, and the Nmatrix data type.

Truth tables are stored as bit-vectors over the carrier (one int64 per
cell), so membership and intersection on the enumeration hot path are
single machine-word operations.  Carrier values are ordered by declaration
order and every set of values is canonicalized to that order, which makes
equality of Nmatrices structural and printing deterministic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "NmatrixError",
    "ParseError",
    "CapExceeded",
    "Signature",
    "Formula",
    "var",
    "app",
    "Substitution",
    "apply_substitution",
    "Sequent",
    "Nmatrix",
    "parse_formula",
    "format_formula",
    "depth",
    "variables",
    "subformula_closure",
    "formulas_up_to",
    "validate_nmatrix",
    "is_deterministic",
    "builtin_family",
    "DEFAULT_FORMULA_CAP",
]

# Characters that may not occur in value/connective/variable identifiers;
# everything else (including unicode) is allowed.
_FORBIDDEN = set('{}();:,#"') | set(" \t\r\n")

DEFAULT_FORMULA_CAP = 10_000


class NmatrixError(Exception):
    """Base class for all library errors."""


class ParseError(NmatrixError):
    """Syntax error in a formula, sequent, or workspace file."""

    def __init__(self, message: str, position: int | None = None):
        self.position = position
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)


class CapExceeded(NmatrixError):
    """A bounded enumeration grew past its configured cap."""


def _check_identifier(name: str, what: str) -> str:
    if not name or any(ch in _FORBIDDEN for ch in name):
        raise NmatrixError(f"invalid {what} identifier: {name!r}")
    return name


# ---------------------------------------------------------------------------
# Signatures and formulas
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    """Finite family of connective names with arities, in declaration order."""

    connectives: tuple[tuple[str, int], ...]

    @classmethod
    def of(cls, spec: Mapping[str, int] | Iterable[tuple[str, int]]) -> "Signature":
        pairs = tuple(spec.items()) if isinstance(spec, Mapping) else tuple(spec)
        seen = set()
        for name, arity in pairs:
            _check_identifier(name, "connective")
            if arity < 0:
                raise NmatrixError(f"negative arity for connective {name!r}")
            if name in seen:
                raise NmatrixError(f"duplicate connective {name!r}")
            seen.add(name)
        return cls(pairs)

    def arity(self, name: str) -> int:
        for conn, k in self.connectives:
            if conn == name:
                return k
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(conn == name for conn, _ in self.connectives)

    def names(self) -> tuple[str, ...]:
        return tuple(conn for conn, _ in self.connectives)

    def items(self) -> tuple[tuple[str, int], ...]:
        return self.connectives


@dataclass(frozen=True)
class Formula:
    """A propositional variable or a connective application.

    ``args`` is only meaningful when ``is_app`` is true; a nullary
    application is distinct from a variable with the same name.
    """

    head: str
    args: tuple["Formula", ...] = ()
    is_app: bool = False

    def __str__(self) -> str:
        return format_formula(self)

    def __repr__(self) -> str:
        return f"Formula({format_formula(self)!r})"


def var(name: str) -> Formula:
    return Formula(_check_identifier(name, "variable"))


def app(conn: str, args: Iterable[Formula] = ()) -> Formula:
    return Formula(conn, tuple(args), True)


def format_formula(f: Formula) -> str:
    if not f.is_app:
        return f.head
    if not f.args:
        return f.head
    return f.head + "(" + ",".join(format_formula(a) for a in f.args) + ")"


def depth(f: Formula) -> int:
    if not f.is_app:
        return 0
    return 1 + max((depth(a) for a in f.args), default=0)


def variables(f: Formula) -> frozenset[str]:
    if not f.is_app:
        return frozenset((f.head,))
    out: set[str] = set()
    for a in f.args:
        out |= variables(a)
    return frozenset(out)


def formula_key(f: Formula) -> tuple[int, str]:
    """Canonical sort key: by depth, then by printed form.

    Sorting any subformula-closed set with this key is topological
    (arguments precede the applications built from them).
    """
    return (depth(f), format_formula(f))


@dataclass(frozen=True)
class Substitution:
    """Finite map from variable names to formulas; identity elsewhere."""

    mapping: tuple[tuple[str, Formula], ...]

    @classmethod
    def of(cls, spec: Mapping[str, Formula]) -> "Substitution":
        return cls(tuple(sorted(spec.items())))

    def lookup(self, name: str) -> Formula:
        for k, v in self.mapping:
            if k == name:
                return v
        return Formula(name)

    def __call__(self, f: Formula) -> Formula:
        return apply_substitution(f, self)


def apply_substitution(f: Formula, s: Substitution | Mapping[str, Formula]) -> Formula:
    if not isinstance(s, Substitution):
        s = Substitution.of(s)
    if not f.is_app:
        return s.lookup(f.head)
    return Formula(f.head, tuple(apply_substitution(a, s) for a in f.args), True)


@dataclass(frozen=True)
class Sequent:
    """A pair of finite formula sets; either side may be empty."""

    premises: frozenset[Formula]
    conclusions: frozenset[Formula]

    @classmethod
    def of(cls, premises: Iterable[Formula], conclusions: Iterable[Formula]) -> "Sequent":
        return cls(frozenset(premises), frozenset(conclusions))

    def all_formulas(self) -> frozenset[Formula]:
        return self.premises | self.conclusions

    def __str__(self) -> str:
        fmt = lambda fs: ", ".join(sorted(map(format_formula, fs)))
        return f"{fmt(self.premises)} |- {fmt(self.conclusions)}"


# ---------------------------------------------------------------------------
# Formula parsing
# ---------------------------------------------------------------------------

_PUNCT = "(),"


def _tokenize_formula(text: str) -> list[tuple[str, int]]:
    tokens = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in _PUNCT:
            tokens.append((ch, i))
            i += 1
            continue
        if ch in _FORBIDDEN:
            raise ParseError(f"unexpected character {ch!r}", i)
        j = i
        while j < len(text) and text[j] not in _PUNCT and text[j] not in _FORBIDDEN:
            j += 1
        tokens.append((text[i:j], i))
        i = j
    return tokens


def parse_formula(text: str, sig: Signature) -> Formula:
    """Parse prefix syntax ``conn(arg,...)``; bare identifiers not in the
    signature are variables, bare identifiers in the signature must be
    nullary connectives."""
    tokens = _tokenize_formula(text)
    pos = 0

    def peek() -> tuple[str, int] | None:
        return tokens[pos] if pos < len(tokens) else None

    def take() -> tuple[str, int]:
        nonlocal pos
        if pos >= len(tokens):
            raise ParseError("unexpected end of input", len(text))
        tok = tokens[pos]
        pos += 1
        return tok

    def formula() -> Formula:
        name, at = take()
        if name in _PUNCT:
            raise ParseError(f"expected identifier, got {name!r}", at)
        nxt = peek()
        if nxt is not None and nxt[0] == "(":
            take()
            if name not in sig:
                raise ParseError(f"unknown connective {name!r}", at)
            args: list[Formula] = []
            nxt = peek()
            if nxt is not None and nxt[0] == ")":
                take()
            else:
                while True:
                    args.append(formula())
                    tok, tat = take()
                    if tok == ")":
                        break
                    if tok != ",":
                        raise ParseError(f"expected ',' or ')', got {tok!r}", tat)
            k = sig.arity(name)
            if len(args) != k:
                raise ParseError(
                    f"connective {name!r} expects {k} argument(s), got {len(args)}", at
                )
            return Formula(name, tuple(args), True)
        if name in sig:
            if sig.arity(name) != 0:
                raise ParseError(
                    f"connective {name!r} of arity {sig.arity(name)} used without arguments",
                    at,
                )
            return Formula(name, (), True)
        return Formula(name)

    result = formula()
    if pos != len(tokens):
        raise ParseError(f"trailing input {tokens[pos][0]!r}", tokens[pos][1])
    return result


# ---------------------------------------------------------------------------
# Subformulas and bounded universes
# ---------------------------------------------------------------------------


def subformula_closure(fs: Iterable[Formula]) -> frozenset[Formula]:
    out: set[Formula] = set()
    stack = list(fs)
    while stack:
        f = stack.pop()
        if f in out:
            continue
        out.add(f)
        if f.is_app:
            stack.extend(f.args)
    return frozenset(out)


def is_subformula_closed(fs: Iterable[Formula]) -> bool:
    s = set(fs)
    return all(a in s for f in s if f.is_app for a in f.args)


def formulas_up_to(
    sig: Signature, nvars: int, maxdepth: int, cap: int = DEFAULT_FORMULA_CAP
) -> frozenset[Formula]:
    """All formulas over variables p0..p(nvars-1) of depth <= maxdepth.

    The result is subformula-closed by construction.  Raises CapExceeded
    when the universe would grow past ``cap`` formulas.
    """
    if nvars < 0 or maxdepth < 0:
        raise NmatrixError("nvars and maxdepth must be nonnegative")
    level = [Formula(f"p{i}") for i in range(nvars)]
    total: list[Formula] = list(level)
    for _ in range(maxdepth):
        new = []
        for conn, k in sig.connectives:
            for args in itertools.product(total, repeat=k):
                f = Formula(conn, args, True)
                if f not in set(total) and f not in set(new):
                    new.append(f)
                if len(total) + len(new) > cap:
                    raise CapExceeded(
                        f"bounded formula universe exceeds cap of {cap} formulas"
                    )
        # Deduplication above is quadratic in the worst case but the cap
        # keeps the universe small; rebuild as a set-backed list.
        merged = set(total)
        for f in new:
            if f not in merged:
                merged.add(f)
                total.append(f)
    return frozenset(total)


# ---------------------------------------------------------------------------
# Nmatrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Nmatrix:
    """Finite non-deterministic matrix.

    ``tables[conn]`` is an int64 ndarray of shape ``(n,) * arity`` whose
    entries are bit-vectors over the carrier (bit i set = value i possible).
    Instances are immutable; use :meth:`from_cells` to build one from
    explicit value sets with validation.
    """

    signature: Signature
    carrier: tuple[str, ...]
    designated: frozenset[str]
    tables: dict[str, np.ndarray]

    def __post_init__(self):
        object.__setattr__(self, "carrier", tuple(self.carrier))
        object.__setattr__(self, "designated", frozenset(self.designated))
        tabs = {}
        for conn, arr in self.tables.items():
            a = np.asarray(arr, dtype=np.int64)
            a.setflags(write=False)
            tabs[conn] = a
        object.__setattr__(self, "tables", tabs)
        object.__setattr__(
            self, "_index", {v: i for i, v in enumerate(self.carrier)}
        )

    # -- construction -------------------------------------------------

    @classmethod
    def from_cells(
        cls,
        signature: Signature,
        carrier: Iterable[str],
        designated: Iterable[str],
        cells: Mapping[str, Mapping[tuple[str, ...], Iterable[str]]],
    ) -> "Nmatrix":
        carrier = tuple(carrier)
        index = {v: i for i, v in enumerate(carrier)}
        tables: dict[str, np.ndarray] = {}
        n = len(carrier)
        for conn, k in signature.connectives:
            arr = np.zeros((n,) * k, dtype=np.int64)
            table = cells.get(conn, {})
            for args, out in table.items():
                mask = 0
                for v in out:
                    if v not in index:
                        raise NmatrixError(
                            f"table {conn}{args}: output value {v!r} not in carrier"
                        )
                    mask |= 1 << index[v]
                try:
                    idx = tuple(index[a] for a in args)
                except KeyError as e:
                    raise NmatrixError(
                        f"table {conn}{args}: argument {e.args[0]!r} not in carrier"
                    ) from None
                arr[idx] = mask
            tables[conn] = arr
        m = cls(signature, carrier, frozenset(designated), tables)
        violations = validate_nmatrix(m)
        if violations:
            raise NmatrixError("invalid Nmatrix: " + "; ".join(violations))
        return m

    # -- basic accessors ----------------------------------------------

    def __len__(self) -> int:
        return len(self.carrier)

    def index(self, value: str) -> int:
        return self._index[value]

    @property
    def designated_mask(self) -> int:
        mask = 0
        for v in self.designated:
            if v in self._index:
                mask |= 1 << self._index[v]
        return mask

    @property
    def full_mask(self) -> int:
        return (1 << len(self.carrier)) - 1

    def mask_of(self, values: Iterable[str]) -> int:
        mask = 0
        for v in values:
            mask |= 1 << self._index[v]
        return mask

    def values_of(self, mask: int) -> tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.carrier) if (mask >> i) & 1)

    def cell(self, conn: str, *args: str) -> frozenset[str]:
        idx = tuple(self._index[a] for a in args)
        return frozenset(self.values_of(int(self.tables[conn][idx])))

    def cell_mask(self, conn: str, *args: str) -> int:
        idx = tuple(self._index[a] for a in args)
        return int(self.tables[conn][idx])

    def cells(self, conn: str) -> Iterator[tuple[tuple[str, ...], frozenset[str]]]:
        k = self.signature.arity(conn)
        for args in itertools.product(self.carrier, repeat=k):
            yield args, self.cell(conn, *args)

    def to_cells(self) -> dict[str, dict[tuple[str, ...], tuple[str, ...]]]:
        out: dict[str, dict[tuple[str, ...], tuple[str, ...]]] = {}
        for conn, _ in self.signature.connectives:
            out[conn] = {args: self.values_of(self.cell_mask(conn, *args))
                         for args, _ in self.cells(conn)}
        return out

    # -- equality and hashing (structural) ----------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Nmatrix):
            return NotImplemented
        return (
            self.signature == other.signature
            and self.carrier == other.carrier
            and self.designated == other.designated
            and all(
                np.array_equal(self.tables[c], other.tables[c])
                for c, _ in self.signature.connectives
            )
        )

    def __hash__(self) -> int:
        return hash(
            (
                self.signature,
                self.carrier,
                self.designated,
                tuple(self.tables[c].tobytes() for c, _ in self.signature.connectives),
            )
        )

    def __repr__(self) -> str:
        return (
            f"Nmatrix(carrier={self.carrier!r}, "
            f"designated={sorted(self.designated)!r})"
        )


def validate_nmatrix(m: Nmatrix) -> list[str]:
    """Return a list of invariant violations (empty list means valid)."""
    violations: list[str] = []
    if not m.carrier:
        violations.append("empty carrier")
        return violations
    if len(set(m.carrier)) != len(m.carrier):
        violations.append("duplicate carrier values")
    for v in m.carrier:
        if any(ch in _FORBIDDEN for ch in v) or not v:
            violations.append(f"invalid value identifier {v!r}")
    extra = m.designated - set(m.carrier)
    for v in sorted(extra):
        violations.append(f"designated value {v!r} not in carrier")
    n = len(m.carrier)
    full = (1 << n) - 1
    for conn, k in m.signature.connectives:
        if conn not in m.tables:
            violations.append(f"missing table for connective {conn!r}")
            continue
        arr = m.tables[conn]
        if arr.shape != (n,) * k:
            violations.append(
                f"table {conn!r} has shape {arr.shape}, expected {(n,) * k}"
            )
            continue
        flat = arr.ravel()
        for flat_idx, mask in enumerate(flat):
            mask = int(mask)
            args = np.unravel_index(flat_idx, arr.shape) if k else ()
            loc = conn + "(" + ",".join(m.carrier[i] for i in args) + ")"
            if mask == 0:
                violations.append(f"empty output set at {loc}")
            elif mask & ~full:
                violations.append(f"output set at {loc} mentions unknown values")
    for conn in m.tables:
        if conn not in m.signature:
            violations.append(f"table for unknown connective {conn!r}")
    return violations


def is_deterministic(m: Nmatrix) -> bool:
    for conn, _ in m.signature.connectives:
        flat = m.tables[conn].ravel()
        for mask in flat:
            mask = int(mask)
            if mask == 0 or mask & (mask - 1):
                return False
    return True


# ---------------------------------------------------------------------------
# Builtin families over the single binary connective ->
# ---------------------------------------------------------------------------

ARROW = "->"
ARROW_SIGNATURE = Signature.of({ARROW: 2})


def builtin_family(name: str, n: int, m: int) -> Nmatrix:
    """The 2-parameter families U, MP, D, I over carrier U_n | D_m.

    Undesignated values are named bot0..bot(n-1) and designated values
    top0..top(m-1) (unicode-free for easy CLI round-tripping).
    """
    if n < 0 or m < 0 or n + m < 1:
        raise NmatrixError("family parameters require n >= 0, m >= 0, n + m >= 1")
    bots = tuple(f"bot{i}" for i in range(n))
    tops = tuple(f"top{i}" for i in range(m))
    carrier = bots + tops
    designated = frozenset(tops)
    everything = frozenset(carrier)
    undes = frozenset(bots)

    def cell(x: str, y: str) -> frozenset[str]:
        if name == "U":
            return everything
        if name == "MP":
            if x in designated and y in undes:
                return undes
            return everything
        if name == "D":
            if x == y:
                return designated
            return everything
        if name == "I":
            if x == y:
                return designated
            if x in designated and y in undes:
                return undes
            return everything
        raise NmatrixError(f"unknown builtin family {name!r} (expected U, MP, D, I)")

    cells = {
        ARROW: {
            (x, y): cell(x, y) for x in carrier for y in carrier
        }
    }
    return Nmatrix.from_cells(ARROW_SIGNATURE, carrier, designated, cells)
