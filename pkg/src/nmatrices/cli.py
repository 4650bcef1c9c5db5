"""Workspace file format and command-line interface.

Workspace files are line-oriented UTF-8 text with ``#`` comments:

    signature: -> /2, neg /1
    family MP 1 1 as MP11
    nmatrix M2 {
      values: bot0 top0 top1 ;
      designated: top0 top1 ;
      table neg { bot0 : top0 ; top0 : bot0 ; top1 : top0 top1 }
    }
    rules Rneg { "|- p, neg(p)" ; "neg(neg(p)) |- p" }
    hom h from M2 to U11 { bot0 : bot0 ; top0 : top0 ; top1 : top0 }

Exit codes: 0 = query answered affirmatively / object constructed,
1 = property refuted or search empty (witness printed), 2 = error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .compare import (
    DEFAULT_MAXDEPTH,
    DEFAULT_NVARS,
    EQUIVALENCE_CAVEAT,
    bounded_equivalent,
    witness_chain,
)
from .constructions import (
    Partition,
    Ultrafilter,
    enumerate_compatible_partitions,
    is_compatible,
    product,
    quotient,
    sound_compatible_quotients,
    ultraproduct,
)
from .core import (
    DEFAULT_FORMULA_CAP,
    Formula,
    Nmatrix,
    NmatrixError,
    ParseError,
    Sequent,
    Signature,
    builtin_family,
    format_formula,
    formula_key,
    formulas_up_to,
    parse_formula,
    validate_nmatrix,
)
from .morphisms import HomMap, find_isomorphism, find_strict_hom, image, is_strict
from .semantics import (
    Assignment,
    Verdict,
    check_rule_under_all_substitutions,
    entails,
    realized_patterns,
    rule_sound,
    ruleset_sound,
)

__all__ = ["Workspace", "load", "loads", "parse_sequent", "main"]


# ---------------------------------------------------------------------------
# Workspace files
# ---------------------------------------------------------------------------

_PUNCT = set("{};:,")
_KEYWORDS = {"signature", "nmatrix", "family", "rules", "hom"}


@dataclass
class _Token:
    text: str
    kind: str  # "word" | "punct" | "string"
    line: int
    col: int


class _WorkspaceParseError(ParseError):
    def __init__(self, message: str, tok: Optional[_Token] = None):
        if tok is not None:
            message = f"line {tok.line}, column {tok.col}: {message}"
        ParseError.__init__(self, message)


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i = 0
    n = len(text)

    def advance(k: int = 1):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch.isspace():
            advance()
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                advance()
            continue
        if ch in _PUNCT:
            tokens.append(_Token(ch, "punct", line, col))
            advance()
            continue
        if ch == '"':
            start_line, start_col = line, col
            advance()
            buf = []
            while i < n and text[i] != '"':
                buf.append(text[i])
                advance()
            if i >= n:
                raise _WorkspaceParseError(
                    f"line {start_line}, column {start_col}: unterminated string"
                )
            advance()
            tokens.append(_Token("".join(buf), "string", start_line, start_col))
            continue
        start_line, start_col = line, col
        buf = []
        while i < n and not text[i].isspace() and text[i] not in _PUNCT and text[i] not in '#"':
            buf.append(text[i])
            advance()
        tokens.append(_Token("".join(buf), "word", start_line, start_col))
    return tokens


@dataclass
class Workspace:
    """Named objects loaded from one workspace file."""

    signature: Optional[Signature] = None
    matrices: dict[str, Nmatrix] = field(default_factory=dict)
    rulesets: dict[str, list[Sequent]] = field(default_factory=dict)
    homs: dict[str, HomMap] = field(default_factory=dict)

    def matrix(self, name: str) -> Nmatrix:
        if name not in self.matrices:
            raise NmatrixError(f"unknown nmatrix {name!r}")
        return self.matrices[name]

    def ruleset(self, name: str) -> list[Sequent]:
        if name not in self.rulesets:
            raise NmatrixError(f"unknown rule set {name!r}")
        return self.rulesets[name]

    def hom(self, name: str) -> HomMap:
        if name not in self.homs:
            raise NmatrixError(f"unknown hom {name!r}")
        return self.homs[name]


def parse_sequent(text: str, sig: Signature) -> Sequent:
    """Parse ``premises |- conclusions`` with comma-separated formulas;
    either side may be empty."""
    if text.count("|-") != 1:
        raise ParseError("a sequent must contain exactly one '|-'")
    left, right = text.split("|-")

    def split_top_level(chunk: str) -> list[str]:
        # Commas inside parentheses separate connective arguments, not
        # sequent members.
        parts, depth, start = [], 0, 0
        for i, ch in enumerate(chunk):
            if ch == "(":
                depth += 1
            elif ch == ")":
                depth -= 1
            elif ch == "," and depth == 0:
                parts.append(chunk[start:i])
                start = i + 1
        parts.append(chunk[start:])
        return parts

    def side(chunk: str) -> list[Formula]:
        chunk = chunk.strip()
        if not chunk:
            return []
        return [parse_formula(part, sig) for part in split_top_level(chunk)]

    return Sequent.of(side(left), side(right))


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Optional[_Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, expected: Optional[str] = None) -> _Token:
        tok = self.peek()
        if tok is None:
            raise _WorkspaceParseError("unexpected end of file")
        if expected is not None and tok.text != expected:
            raise _WorkspaceParseError(f"expected {expected!r}, got {tok.text!r}", tok)
        self.pos += 1
        return tok

    def take_word(self, what: str) -> _Token:
        tok = self.take()
        if tok.kind != "word":
            raise _WorkspaceParseError(f"expected {what}, got {tok.text!r}", tok)
        return tok


def loads(text: str) -> Workspace:
    ws = Workspace()
    p = _Parser(_tokenize(text))
    while p.peek() is not None:
        tok = p.take_word("a declaration keyword")
        if tok.text == "signature":
            _parse_signature(p, ws, tok)
        elif tok.text == "family":
            _parse_family(p, ws)
        elif tok.text == "nmatrix":
            _parse_nmatrix(p, ws)
        elif tok.text == "rules":
            _parse_rules(p, ws)
        elif tok.text == "hom":
            _parse_hom(p, ws)
        else:
            raise _WorkspaceParseError(
                f"unknown declaration {tok.text!r} "
                "(expected signature, family, nmatrix, rules, or hom)",
                tok,
            )
    return ws


def load(path: str) -> Workspace:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def _parse_signature(p: _Parser, ws: Workspace, at: _Token) -> None:
    if ws.signature is not None:
        raise _WorkspaceParseError("duplicate signature declaration", at)
    p.take(":")
    items: list[tuple[str, int]] = []
    while True:
        name = p.take_word("a connective name")
        arity_tok = p.take_word("an arity like /2")
        if not arity_tok.text.startswith("/") or not arity_tok.text[1:].isdigit():
            raise _WorkspaceParseError(
                f"expected an arity like /2, got {arity_tok.text!r}", arity_tok
            )
        items.append((name.text, int(arity_tok.text[1:])))
        nxt = p.peek()
        if nxt is not None and nxt.text == ",":
            p.take(",")
            continue
        break
    try:
        ws.signature = Signature.of(items)
    except NmatrixError as e:
        raise _WorkspaceParseError(str(e), at) from None


_ARROW_SIG = Signature.of({"->": 2})


def _parse_family(p: _Parser, ws: Workspace) -> None:
    fam = p.take_word("a family name (U, MP, D, I)")
    n_tok = p.take_word("an integer")
    m_tok = p.take_word("an integer")
    if not (n_tok.text.isdigit() and m_tok.text.isdigit()):
        raise _WorkspaceParseError("family parameters must be integers", n_tok)
    p.take("as")
    alias = p.take_word("an alias name")
    if ws.signature is None:
        ws.signature = _ARROW_SIG
    elif ws.signature != _ARROW_SIG:
        raise _WorkspaceParseError(
            "family declarations require the signature '-> /2'", fam
        )
    if alias.text in ws.matrices:
        raise _WorkspaceParseError(f"duplicate nmatrix name {alias.text!r}", alias)
    try:
        ws.matrices[alias.text] = builtin_family(fam.text, int(n_tok.text), int(m_tok.text))
    except NmatrixError as e:
        raise _WorkspaceParseError(str(e), fam) from None


def _require_signature(ws: Workspace, at: _Token) -> Signature:
    if ws.signature is None:
        raise _WorkspaceParseError(
            "no signature declared (add 'signature:' or a 'family' line first)", at
        )
    return ws.signature


def _parse_nmatrix(p: _Parser, ws: Workspace) -> None:
    name = p.take_word("an nmatrix name")
    sig = _require_signature(ws, name)
    if name.text in ws.matrices:
        raise _WorkspaceParseError(f"duplicate nmatrix name {name.text!r}", name)
    p.take("{")
    p.take("values")
    p.take(":")
    values: list[str] = []
    while p.peek() is not None and p.peek().kind == "word":
        values.append(p.take().text)
    p.take(";")
    p.take("designated")
    p.take(":")
    designated: list[str] = []
    while p.peek() is not None and p.peek().kind == "word":
        designated.append(p.take().text)
    nxt = p.peek()
    if nxt is not None and nxt.text == ";":
        p.take(";")
    cells: dict[str, dict[tuple[str, ...], list[str]]] = {}
    while p.peek() is not None and p.peek().text == "table":
        p.take("table")
        conn = p.take_word("a connective name")
        if conn.text not in sig:
            raise _WorkspaceParseError(f"unknown connective {conn.text!r}", conn)
        arity = sig.arity(conn.text)
        table: dict[tuple[str, ...], list[str]] = {}
        p.take("{")
        while True:
            nxt = p.peek()
            if nxt is None:
                raise _WorkspaceParseError("unexpected end of file in table")
            if nxt.text == "}":
                p.take("}")
                break
            args: list[str] = []
            for _ in range(arity):
                args.append(p.take_word("an argument value").text)
            p.take(":")
            outs: list[str] = []
            while p.peek() is not None and p.peek().kind == "word":
                outs.append(p.take().text)
            key = tuple(args)
            if key in table:
                raise _WorkspaceParseError(
                    f"duplicate table row for {conn.text}({','.join(key)})", nxt
                )
            table[key] = outs
            nxt = p.peek()
            if nxt is not None and nxt.text == ";":
                p.take(";")
        if conn.text in cells:
            raise _WorkspaceParseError(f"duplicate table for {conn.text!r}", conn)
        expected = len(values) ** arity
        if len(table) != expected:
            raise _WorkspaceParseError(
                f"table {conn.text!r} has {len(table)} rows, expected {expected} "
                "(every input tuple exactly once)",
                conn,
            )
        cells[conn.text] = table
    p.take("}")
    missing = [c for c, _ in sig.connectives if c not in cells]
    if missing:
        raise _WorkspaceParseError(
            f"nmatrix {name.text!r} is missing tables for: {', '.join(missing)}", name
        )
    try:
        ws.matrices[name.text] = Nmatrix.from_cells(sig, values, designated, cells)
    except NmatrixError as e:
        raise _WorkspaceParseError(f"nmatrix {name.text!r}: {e}", name) from None


def _parse_rules(p: _Parser, ws: Workspace) -> None:
    name = p.take_word("a rule-set name")
    sig = _require_signature(ws, name)
    if name.text in ws.rulesets:
        raise _WorkspaceParseError(f"duplicate rule-set name {name.text!r}", name)
    p.take("{")
    rules: list[Sequent] = []
    while True:
        nxt = p.peek()
        if nxt is None:
            raise _WorkspaceParseError("unexpected end of file in rules block")
        if nxt.text == "}" and nxt.kind == "punct":
            p.take("}")
            break
        tok = p.take()
        if tok.kind != "string":
            raise _WorkspaceParseError(
                f'expected a quoted sequent, got {tok.text!r}', tok
            )
        try:
            rules.append(parse_sequent(tok.text, sig))
        except ParseError as e:
            raise _WorkspaceParseError(f"in sequent {tok.text!r}: {e}", tok) from None
        nxt = p.peek()
        if nxt is not None and nxt.text == ";" and nxt.kind == "punct":
            p.take(";")
    ws.rulesets[name.text] = rules


def _parse_hom(p: _Parser, ws: Workspace) -> None:
    name = p.take_word("a hom name")
    if name.text in ws.homs:
        raise _WorkspaceParseError(f"duplicate hom name {name.text!r}", name)
    p.take("from")
    src = p.take_word("a source nmatrix name")
    p.take("to")
    tgt = p.take_word("a target nmatrix name")
    for tok in (src, tgt):
        if tok.text not in ws.matrices:
            raise _WorkspaceParseError(f"unknown nmatrix {tok.text!r}", tok)
    p.take("{")
    mapping: dict[str, str] = {}
    while True:
        nxt = p.peek()
        if nxt is None:
            raise _WorkspaceParseError("unexpected end of file in hom block")
        if nxt.text == "}":
            p.take("}")
            break
        k = p.take_word("a source value").text
        p.take(":")
        v = p.take_word("a target value").text
        if k in mapping:
            raise _WorkspaceParseError(f"duplicate map entry for {k!r}", nxt)
        mapping[k] = v
        nxt = p.peek()
        if nxt is not None and nxt.text == ";":
            p.take(";")
    try:
        ws.homs[name.text] = HomMap.of(
            ws.matrices[src.text], ws.matrices[tgt.text], mapping
        )
    except NmatrixError as e:
        raise _WorkspaceParseError(f"hom {name.text!r}: {e}", name) from None


# ---------------------------------------------------------------------------
# Printing and JSON
# ---------------------------------------------------------------------------


def format_nmatrix(m: Nmatrix, name: str = "RESULT") -> str:
    lines = [f"nmatrix {name} {{"]
    lines.append("  values: " + " ".join(m.carrier) + " ;")
    des = [v for v in m.carrier if v in m.designated]
    lines.append("  designated: " + " ".join(des) + " ;")
    for conn, k in m.signature.connectives:
        lines.append(f"  table {conn} {{")
        for args, out in m.cells(conn):
            ordered = [v for v in m.carrier if v in out]
            prefix = " ".join(args) + " " if args else ""
            lines.append(f"    {prefix}: " + " ".join(ordered) + " ;")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines)


def nmatrix_json(m: Nmatrix) -> dict:
    return {
        "values": list(m.carrier),
        "designated": [v for v in m.carrier if v in m.designated],
        "tables": {
            conn: [
                {"args": list(args), "out": [v for v in m.carrier if v in out]}
                for args, out in m.cells(conn)
            ]
            for conn, _ in m.signature.connectives
        },
    }


def assignment_json(a: Assignment) -> dict:
    return {format_formula(f): v for f, v in a.map}


def _format_witness(a: Assignment) -> str:
    return "\n".join(f"  {format_formula(f)} = {v}" for f, v in a.map)


def sequent_str(s: Sequent) -> str:
    fmt = lambda fs: ", ".join(format_formula(f) for f in sorted(fs, key=formula_key))
    return f"{fmt(s.premises)} |- {fmt(s.conclusions)}"


def hom_json(h: HomMap) -> dict:
    return {"map": dict(h.map)}


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


class _Emitter:
    def __init__(self, command: str, as_json: bool):
        self.as_json = as_json
        self.doc: dict = {"command": command}
        self.lines: list[str] = []

    def text(self, line: str) -> None:
        self.lines.append(line)

    def put(self, key: str, value) -> None:
        self.doc[key] = value

    def finish(self, exit_code: int) -> int:
        self.doc["exit"] = exit_code
        if self.as_json:
            print(json.dumps(self.doc, indent=2, ensure_ascii=False, sort_keys=True))
        else:
            for line in self.lines:
                print(line)
        return exit_code


def _emit_verdict(out: _Emitter, v: Verdict, subject: str) -> int:
    out.put("holds", v.holds)
    if v.holds:
        out.text("HOLDS")
        return out.finish(0)
    out.text(f"FAILS — counter-assignment for {subject}:")
    out.text(_format_witness(v.witness))
    out.put("witness", assignment_json(v.witness))
    return out.finish(1)


def _cmd_entails(ws: Workspace, args, out: _Emitter) -> int:
    m = ws.matrix(args.matrix)
    s = parse_sequent(args.sequent, m.signature)
    return _emit_verdict(out, entails(m, s), sequent_str(s))


def _cmd_rule_sound(ws: Workspace, args, out: _Emitter) -> int:
    m = ws.matrix(args.matrix)
    s = parse_sequent(args.rule, m.signature)
    return _emit_verdict(out, rule_sound(m, s), sequent_str(s))


def _cmd_ruleset_sound(ws: Workspace, args, out: _Emitter) -> int:
    m = ws.matrix(args.matrix)
    rep = ruleset_sound(m, ws.ruleset(args.rules))
    out.put("sound", rep.ok)
    if rep.ok:
        out.text("SOUND")
        return out.finish(0)
    out.put("failing_rule", sequent_str(rep.failing_rule))
    out.put("witness", assignment_json(rep.witness))
    out.text(f"UNSOUND — failing rule: {sequent_str(rep.failing_rule)}")
    out.text("counter-assignment:")
    out.text(_format_witness(rep.witness))
    return out.finish(1)


def _parse_partition(spec: str, m: Nmatrix) -> Partition:
    blocks = [chunk.split() for chunk in spec.split("|")]
    return Partition.of([b for b in blocks if b], m.carrier)


def _cmd_quotient(ws: Workspace, args, out: _Emitter) -> int:
    m = ws.matrix(args.matrix)
    p = _parse_partition(args.partition, m)
    q = quotient(m, p)
    compatible = is_compatible(p, m)
    out.put("compatible", compatible)
    out.put("matrix", nmatrix_json(q))
    out.text(f"partition is {'compatible' if compatible else 'NOT compatible'}")
    out.text(format_nmatrix(q, f"{args.matrix}_quotient"))
    return out.finish(0)


def _cmd_compatible_partitions(ws: Workspace, args, out: _Emitter) -> int:
    m = ws.matrix(args.matrix)
    parts = list(enumerate_compatible_partitions(m, cap=args.cap))
    out.put("count", len(parts))
    out.put("partitions", [str(p) for p in parts])
    out.text(f"{len(parts)} compatible partition(s):")
    for p in parts:
        out.text(f"  {p}")
    return out.finish(0)


def _cmd_sound_quotients(ws: Workspace, args, out: _Emitter) -> int:
    m = ws.matrix(args.matrix)
    rules = ws.ruleset(args.rules)
    sound = {str(p) for p, _ in sound_compatible_quotients(m, rules, cap=args.cap)}
    rows = []
    for p in enumerate_compatible_partitions(m, cap=args.cap):
        mark = "SOUND" if str(p) in sound else "UNSOUND"
        rows.append({"partition": str(p), "verdict": mark})
        out.text(f"  {mark:8s} {p}")
    out.lines.insert(0, f"{len(sound)} of {len(rows)} compatible quotient(s) sound:")
    out.put("quotients", rows)
    return out.finish(0)


def _cmd_image(ws: Workspace, args, out: _Emitter) -> int:
    h = ws.hom(args.hom)
    img = image(h)
    out.put("matrix", nmatrix_json(img))
    out.text(format_nmatrix(img, f"{args.hom}_image"))
    return out.finish(0)


def _cmd_find_hom(ws: Workspace, args, out: _Emitter) -> int:
    src, tgt = ws.matrix(args.source), ws.matrix(args.target)
    h = find_strict_hom(src, tgt, covering=args.covering, injective=args.injective)
    out.put("found", h is not None)
    if h is None:
        out.text("NONE — no strict homomorphism with the requested properties")
        return out.finish(1)
    out.put("hom", hom_json(h))
    out.text(f"FOUND: {h}")
    return out.finish(0)


def _cmd_find_iso(ws: Workspace, args, out: _Emitter) -> int:
    a, b = ws.matrix(args.first), ws.matrix(args.second)
    h = find_isomorphism(a, b)
    out.put("found", h is not None)
    if h is None:
        out.text("NONE — the nmatrices are not isomorphic")
        return out.finish(1)
    out.put("hom", hom_json(h))
    out.text(f"FOUND: {h}")
    return out.finish(0)


def _cmd_product(ws: Workspace, args, out: _Emitter) -> int:
    ms = [ws.matrix(n) for n in args.matrices]
    prod = product(ms, cap=args.cap)
    out.put("matrix", nmatrix_json(prod))
    out.text(format_nmatrix(prod, "product"))
    return out.finish(0)


def _cmd_ultraproduct(ws: Workspace, args, out: _Emitter) -> int:
    ms = [ws.matrix(n) for n in args.matrices]
    u = Ultrafilter.principal(len(ms), args.index)
    up = ultraproduct(ms, u, cap=args.cap)
    out.put("matrix", nmatrix_json(up))
    out.text(format_nmatrix(up, "ultraproduct"))
    return out.finish(0)


def _cmd_patterns(ws: Workspace, args, out: _Emitter) -> int:
    m = ws.matrix(args.matrix)
    theta = formulas_up_to(m.signature, args.vars, args.depth, cap=args.cap)
    fam = realized_patterns(m, theta)
    ordered = sorted(fam.universe, key=formula_key)
    pats = sorted(
        (sorted(p, key=formula_key) for p in fam.patterns),
        key=lambda p: (len(p), [formula_key(f) for f in p]),
    )
    out.put("universe", [format_formula(f) for f in ordered])
    out.put("patterns", [[format_formula(f) for f in p] for p in pats])
    out.text(
        f"universe ({len(ordered)}): "
        + ", ".join(format_formula(f) for f in ordered)
    )
    out.text(f"{len(pats)} realized designation pattern(s):")
    for p in pats:
        out.text("  {" + ", ".join(format_formula(f) for f in p) + "}")
    return out.finish(0)


def _cmd_compare(ws: Workspace, args, out: _Emitter) -> int:
    m1, m2 = ws.matrix(args.first), ws.matrix(args.second)
    rep = bounded_equivalent(m1, m2, args.vars, args.depth, cap=args.cap)
    out.put("equivalent", rep.equivalent)
    out.put("leq_12", rep.leq_12)
    out.put("leq_21", rep.leq_21)
    out.put("universe_size", len(rep.universe))
    if rep.equivalent:
        out.text(f"EQUIVALENT ({EQUIVALENCE_CAVEAT})")
        return out.finish(0)
    out.text("NOT EQUIVALENT over the bounded universe")
    if rep.witness_12 is not None:
        out.put("witness_12", sequent_str(rep.witness_12))
        out.text(
            f"  holds in {args.first}, fails in {args.second}: "
            + sequent_str(rep.witness_12)
        )
    if rep.witness_21 is not None:
        out.put("witness_21", sequent_str(rep.witness_21))
        out.text(
            f"  holds in {args.second}, fails in {args.first}: "
            + sequent_str(rep.witness_21)
        )
    return out.finish(1)


def _cmd_kdetermined(ws: Workspace, args, out: _Emitter) -> int:
    m = ws.matrix(args.matrix)
    r = parse_sequent(args.rule, m.signature)
    rep = check_rule_under_all_substitutions(m, r, args.vars, cap=args.cap)
    out.put("rule_holds", rep.rule_verdict.holds)
    out.put("all_instances_hold", rep.all_instances_hold)
    out.put("determinedness_gap", rep.determinedness_gap)
    out.put(
        "instances",
        [
            {
                "substitution": {k: format_formula(f) for k, f in sub.mapping},
                "holds": v.holds,
            }
            for sub, v in rep.instances
        ],
    )
    out.text(f"rule: {'HOLDS' if rep.rule_verdict.holds else 'FAILS'}")
    out.text(
        f"instances over {args.vars} variable(s): "
        + ("all hold" if rep.all_instances_hold else "some fail")
    )
    for sub, v in rep.instances:
        desc = ", ".join(f"{k}->{format_formula(f)}" for k, f in sub.mapping) or "(empty)"
        out.text(f"  [{desc}] {'HOLDS' if v.holds else 'FAILS'}")
    if rep.determinedness_gap:
        out.text(
            "GAP: every substitution instance holds but the rule fails — "
            "the rule is invisible at this variable bound"
        )
    if not rep.rule_verdict.holds:
        out.put("witness", assignment_json(rep.rule_verdict.witness))
        out.text("counter-assignment for the rule:")
        out.text(_format_witness(rep.rule_verdict.witness))
        return out.finish(1)
    return out.finish(0)


def _cmd_witness_chain(ws: Workspace, args, out: _Emitter) -> int:
    m1, m2 = ws.matrix(args.first), ws.matrix(args.second)
    rules = ws.ruleset(args.rules)
    found = witness_chain(m1, m2, rules, pair_mode=args.mode)
    out.put("found", found is not None)
    if found is None:
        out.text("NONE — no mediating pair matrix found")
        return out.finish(1)
    mediator, onto_m2, onto_m1 = found
    out.put("mediator", nmatrix_json(mediator))
    out.put("hom_onto_second", hom_json(onto_m2))
    out.put("hom_onto_first", hom_json(onto_m1))
    out.text(format_nmatrix(mediator, "mediator"))
    out.text(f"covering strict hom onto {args.second}: {onto_m2}")
    out.text(f"covering strict hom onto {args.first}: {onto_m1}")
    return out.finish(0)


def _cmd_print(ws: Workspace, args, out: _Emitter) -> int:
    name = args.name
    if name in ws.matrices:
        m = ws.matrices[name]
        out.put("matrix", nmatrix_json(m))
        out.text(format_nmatrix(m, name))
        return out.finish(0)
    if name in ws.rulesets:
        rules = [sequent_str(r) for r in ws.rulesets[name]]
        out.put("rules", rules)
        out.text(f"rules {name} {{")
        for r in rules:
            out.text(f'  "{r}" ;')
        out.text("}")
        return out.finish(0)
    if name in ws.homs:
        h = ws.homs[name]
        out.put("hom", hom_json(h))
        out.put("strict", is_strict(h))
        out.text(str(h))
        return out.finish(0)
    raise NmatrixError(f"no object named {name!r} in the workspace")


# ---------------------------------------------------------------------------
# Argument parsing and entry point
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nmx",
        description="Finite non-deterministic matrices: entailment, morphisms, "
        "constructions, and bounded logic comparison.",
    )
    parser.add_argument("workspace", help="workspace file to load")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    common.add_argument(
        "--cap",
        type=int,
        default=DEFAULT_FORMULA_CAP,
        help="size cap for bounded enumerations",
    )
    bounded = argparse.ArgumentParser(add_help=False)
    bounded.add_argument("--vars", type=int, default=DEFAULT_NVARS, help="variable count")
    bounded.add_argument("--depth", type=int, default=DEFAULT_MAXDEPTH, help="formula depth")

    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, fn, parents, help_text):
        sp = sub.add_parser(name, parents=parents, help=help_text)
        sp.set_defaults(fn=fn)
        return sp

    sp = cmd("entails", _cmd_entails, [common], "decide a finite entailment")
    sp.add_argument("matrix")
    sp.add_argument("sequent", help='e.g. "p, ->(p,q) |- q"')

    sp = cmd("rule-sound", _cmd_rule_sound, [common], "check soundness of one rule")
    sp.add_argument("matrix")
    sp.add_argument("rule")

    sp = cmd("ruleset-sound", _cmd_ruleset_sound, [common], "check soundness of a rule set")
    sp.add_argument("matrix")
    sp.add_argument("rules")

    sp = cmd("quotient", _cmd_quotient, [common], "quotient by a partition")
    sp.add_argument("matrix")
    sp.add_argument("partition", help='blocks separated by |, e.g. "bot0 | top0 top1"')

    sp = cmd(
        "compatible-partitions",
        _cmd_compatible_partitions,
        [common],
        "list partitions refining the designated split",
    )
    sp.add_argument("matrix")

    sp = cmd(
        "sound-quotients",
        _cmd_sound_quotients,
        [common],
        "mark every compatible quotient sound/unsound for a rule set",
    )
    sp.add_argument("matrix")
    sp.add_argument("rules")

    sp = cmd("image", _cmd_image, [common], "image of a strict hom")
    sp.add_argument("hom")

    sp = cmd("find-hom", _cmd_find_hom, [common], "search for a strict hom")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--covering", action="store_true")
    sp.add_argument("--injective", action="store_true")

    sp = cmd("find-iso", _cmd_find_iso, [common], "search for an isomorphism")
    sp.add_argument("first")
    sp.add_argument("second")

    sp = cmd("product", _cmd_product, [common], "componentwise product")
    sp.add_argument("matrices", nargs="+")

    sp = cmd("ultraproduct", _cmd_ultraproduct, [common], "ultraproduct over principal(i)")
    sp.add_argument("index", type=int, help="principal ultrafilter index")
    sp.add_argument("matrices", nargs="+")

    sp = cmd(
        "patterns",
        _cmd_patterns,
        [common, bounded],
        "realized designation patterns over a bounded universe",
    )
    sp.add_argument("matrix")

    sp = cmd(
        "compare",
        _cmd_compare,
        [common, bounded],
        "compare two induced logics over a bounded universe",
    )
    sp.add_argument("first")
    sp.add_argument("second")

    sp = cmd(
        "kdetermined",
        _cmd_kdetermined,
        [common],
        "rule vs all its substitution instances over p0..p(n-1)",
    )
    sp.add_argument("matrix")
    sp.add_argument("rule")
    sp.add_argument("--vars", type=int, default=1)

    sp = cmd(
        "witness-chain",
        _cmd_witness_chain,
        [common],
        "pair-matrix mediator with covering strict homs onto both",
    )
    sp.add_argument("first")
    sp.add_argument("second")
    sp.add_argument("rules")
    sp.add_argument(
        "--mode", choices=["look-behind", "look-ahead"], default="look-behind"
    )

    sp = cmd("print", _cmd_print, [common], "print a named workspace object")
    sp.add_argument("name")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    out = _Emitter(args.command, getattr(args, "json", False))
    try:
        ws = load(args.workspace)
        return args.fn(ws, args, out)
    except (NmatrixError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
