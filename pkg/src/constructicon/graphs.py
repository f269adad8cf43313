"""Literal and idiomatic meaning graphs with token-slot provenance.

Variables are token-slot letters.  A participant realized by several
letters gets a composite id ("DE").  Serialization follows the usual
parenthesized notation with a fixed edge order.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from .lexicon import Diagnostic, Lexicon, mapping_diagnostics
from .matcher import MatchSpan, Token
from .model import ConstructiconError, MetaphorMapping, Roleset, arg_number, identity_mapping, is_implicit_ref

DROP_LEADING = {"DET", "ADP"}
SPECIAL_ORDER = {":mod": 1, ":degree": 2, ":refer-definiteness": 3}


class MissingRoleset(ConstructiconError):
    pass


class MappingError(ConstructiconError):
    pass


class GraphSyntaxError(ConstructiconError):
    pass


@dataclass(frozen=True)
class Const:
    value: str


Target = Union[str, Const]


def edge_order(label: str) -> tuple:
    m = re.match(r"^:arg(\d+)$", label)
    if m:
        return (0, int(m.group(1)), "")
    if label in SPECIAL_ORDER:
        return (SPECIAL_ORDER[label], 0, "")
    return (4, 0, label)


def display_var(var: str) -> str:
    return var.rstrip("'")


@dataclass
class MeaningGraph:
    root: str
    nodes: dict = field(default_factory=dict)  # var -> concept
    edges: list = field(default_factory=list)  # (source, label, target)
    provenance: dict = field(default_factory=dict)  # var -> frozenset of letters

    def add_node(self, var: str, concept: str, letters=None) -> str:
        while var in self.nodes:
            var += "'"
        self.nodes[var] = concept
        self.provenance[var] = frozenset(letters if letters is not None else display_var(var))
        return var

    def children(self, var: str) -> list:
        out = [(lab, t) for s, lab, t in self.edges if s == var]
        out.sort(key=lambda e: (edge_order(e[0]), _target_key(e[1])))
        return out

    def canonical(self) -> tuple:
        edges = sorted(self.edges, key=lambda e: (e[0], edge_order(e[1]), _target_key(e[2])))
        return (self.root, tuple(sorted(self.nodes.items())), tuple(edges))

    def __eq__(self, other):
        return isinstance(other, MeaningGraph) and self.canonical() == other.canonical()

    def check(self) -> None:
        """Raise ValueError unless rooted, connected and acyclic."""
        if self.root not in self.nodes:
            raise ValueError("root is not a node")
        for s, _, t in self.edges:
            if s not in self.nodes or (isinstance(t, str) and t not in self.nodes):
                raise ValueError("edge to unknown variable")
        seen, stack = set(), [(self.root, ())]
        while stack:
            v, path = stack.pop()
            if v in path:
                raise ValueError("cycle through " + v)
            seen.add(v)
            for _, t in self.children(v):
                if isinstance(t, str):
                    stack.append((t, path + (v,)))
        if seen != set(self.nodes):
            raise ValueError("graph is not connected")


def _target_key(t: Target) -> tuple:
    return (1, t.value) if isinstance(t, Const) else (0, t)


# ----------------------------------------------------------- serialization


def serialize_graph(g: MeaningGraph) -> str:
    printed: set = set()
    lines: list[str] = []

    def node(var: str, depth: int, prefix: str) -> None:
        printed.add(var)
        head = f"{prefix}({display_var(var)} / {g.nodes[var]}"
        kids = g.children(var)
        if not kids:
            lines.append(head + ")")
            return
        lines.append(head)
        for k, (lab, t) in enumerate(kids):
            pad = "  " * (depth + 1)
            if isinstance(t, Const):
                lines.append(f"{pad}{lab} {t.value}")
            elif t in printed:
                lines.append(f"{pad}{lab} {display_var(t)}")
            else:
                node(t, depth + 1, f"{pad}{lab} ")
        lines[-1] += ")"

    node(g.root, 0, "")
    return "\n".join(lines)


_TOKEN_END = set(" \t\r\n()")


class _GraphReader:
    def __init__(self, text: str, lenient: bool):
        self.text = text
        self.i = 0
        self.lenient = lenient
        self.diagnostics: list[Diagnostic] = []
        self.g: Optional[MeaningGraph] = None

    def ws(self):
        while self.i < len(self.text) and self.text[self.i].isspace():
            self.i += 1

    def eof(self) -> bool:
        self.ws()
        return self.i >= len(self.text)

    def fail(self, msg: str):
        raise GraphSyntaxError(f"{msg} at offset {self.i}")

    def atom(self) -> str:
        self.ws()
        start = self.i
        depth = 0
        while self.i < len(self.text):
            c = self.text[self.i]
            if c == "[":
                depth += 1
            elif c == "]":
                depth = max(0, depth - 1)
            elif depth == 0 and c in _TOKEN_END:
                break
            self.i += 1
        if start == self.i:
            self.fail("expected a token")
        return self.text[start : self.i]

    def expect(self, ch: str) -> bool:
        self.ws()
        if self.i < len(self.text) and self.text[self.i] == ch:
            self.i += 1
            return True
        if self.lenient and ch == ")" and self.i >= len(self.text):
            self.diagnostics.append(
                Diagnostic("graph", "UNBALANCED_PARENS", "warning", "missing closing parenthesis added")
            )
            return True
        self.fail(f"expected {ch!r}")
        return False

    def node(self) -> str:
        self.expect("(")
        var = self.atom()
        self.expect("/")
        concept = self.atom()
        if self.g is None:
            self.g = MeaningGraph(root=var)
        key = self.g.add_node(var, concept)
        while True:
            if self.eof():
                self.expect(")")
                return key
            c = self.text[self.i]
            if c == ")":
                self.i += 1
                return key
            if c != ":":
                self.fail("expected a relation")
            label = self.atom()
            self.ws()
            if self.i < len(self.text) and self.text[self.i] == "(":
                child = self.node()
                self.g.edges.append((key, label, child))
            else:
                self.g.edges.append((key, label, Const(self.atom())))


def parse_graph(text: str, lenient: bool = False) -> MeaningGraph:
    g, _ = read_graph(text, lenient)
    return g


def read_graph(text: str, lenient: bool = False) -> tuple[MeaningGraph, list[Diagnostic]]:
    r = _GraphReader(text, lenient)
    r.node()
    if not r.eof():
        r.fail("trailing text")
    g = r.g
    # bare tokens naming a variable are references, not constants
    names = {display_var(v): v for v in g.nodes if not v.endswith("'")}
    g.edges = [(s, lab, names[t.value] if isinstance(t, Const) and t.value in names else t) for s, lab, t in g.edges]
    return g, r.diagnostics


def normalize_block(text: str) -> str:
    """Whitespace-collapsed, case-folded rendering used for golden comparison."""
    t = re.sub(r"\s+", " ", text.strip())
    t = re.sub(r"\(\s+", "(", t)
    t = re.sub(r"\s+\)", ")", t)
    return t.casefold()


# ------------------------------------------------------------ realization


@dataclass(frozen=True)
class Filler:
    letter: str
    tokens: tuple  # Token objects
    glosses: tuple = ()  # per-token gloss for morph pieces, None for words

    def text(self, idiomatic: bool = False) -> str:
        glosses = self.glosses or (None,) * len(self.tokens)
        pairs = list(zip(self.tokens, glosses))
        while len(pairs) > 1 and pairs[0][0].tag in DROP_LEADING:
            pairs.pop(0)
        return "-".join(g if idiomatic and g else t.surface for t, g in pairs)

    @property
    def index_only(self) -> bool:
        """Every token is a pronominal index rather than a morph or word."""
        return bool(self.glosses) and all(g is None for g in self.glosses)


@dataclass
class Realization:
    """A match seen through its roleset's token-slot letters."""

    fillers: dict  # letter -> Filler
    referents: dict = field(default_factory=dict)  # arg label -> concept override


def realize(match: MatchSpan, tokens: Sequence[Token], glosses: Optional[Sequence] = None, referents=None) -> Realization:
    fillers = {}
    for sid, (s, e) in match.assignments:
        toks = tuple(tokens[s : e + 1])
        gl = tuple(glosses[s : e + 1]) if glosses is not None else ()
        fillers[sid] = Filler(sid, toks, gl)
    return Realization(fillers, dict(referents or {}))


def _join(letters) -> str:
    return "".join(sorted(set(letters)))


def _relabel(var: str, table: dict) -> str:
    return "".join(table.get(c, c) for c in var)


def _narg(label: str) -> str:
    n = arg_number(label)
    return f"narg{n}" if n is not None else "n" + label.lower()


def _edge(label: str) -> str:
    n = arg_number(label)
    return f":arg{n}" if n is not None else ":" + label.lower()


def _participant_concept(real: Realization, letters, idiomatic: bool) -> tuple[str, bool]:
    """Concept text for letters plus whether an obviative index is present."""
    fills = [real.fillers[x] for x in sorted(letters) if x in real.fillers]
    lexical = [f for f in fills if not f.index_only]
    obviative = any(t.surface.startswith("4") for f in fills if f.index_only for t in f.tokens)
    src = lexical or fills
    return "-".join(f.text(idiomatic) for f in src), obviative


def _root_letters(rs: Roleset, real: Realization) -> list[str]:
    rel = [t.letter for t in rs.token_slots if t.role == "rel" and t.arg is None and t.literal_arg is None]
    got = [x for x in rel if x in real.fillers]
    return got


def _mapping_for(rs: Roleset) -> MetaphorMapping:
    return rs.mapping if rs.mapping is not None else identity_mapping(rs)


def _lexical_graph(real: Realization, rs: Roleset, match: Optional[MatchSpan]) -> MeaningGraph:
    """Graph for a roleset without token slots: letters come from slot roles."""
    rel = []
    by_arg: dict = {}
    roles = real_roles(match) if match is not None else {}
    for sid in sorted(real.fillers):
        role = roles.get(sid)
        if role is None:
            rel.append(sid)
        else:
            by_arg.setdefault(role, []).append(sid)
    if match is not None and match.relation is not None:
        # light verb constructions: the eventive noun is the relation
        rel = [sid for sid, r in match.assignments if r == match.relation]
    root_var = _join(rel) or rs.predicate_id[0].lower()
    g = MeaningGraph(root=root_var)
    g.add_node(root_var, rs.predicate_id, rel)
    for a in rs.args:
        letters = by_arg.get(a.number)
        if not letters:
            continue
        concept, _ = _participant_concept(real, letters, False)
        v = g.add_node(_join(letters), f"{_narg(a.number)}-{concept}", letters)
        g.edges.append((root_var, _edge(a.number), v))
    return g


def real_roles(match: MatchSpan) -> dict:
    """slot id -> bound arg, derived from role ranges."""
    out = {}
    for arg, ranges in match.roles:
        for sid, (s, e) in match.assignments:
            if any(rs <= s and e <= re_ for rs, re_ in ranges):
                out[sid] = arg
    return out


def literal_graph(
    real: Realization, roleset: Roleset, lexicon: Lexicon, match: Optional[MatchSpan] = None
) -> tuple[MeaningGraph, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    if not roleset.token_slots:
        return _lexical_graph(real, roleset, match), diags
    m = _mapping_for(roleset)
    lit = lexicon.rolesets.get(m.literal_roleset)
    if lit is None:
        raise MissingRoleset(f"literal roleset {m.literal_roleset!r} is not in the lexicon")
    relabel = dict(m.literal_relabel)
    root_letters = _root_letters(roleset, real)
    root_var = _join(root_letters) or lit.predicate_id[0].lower()
    g = MeaningGraph(root=root_var)
    g.add_node(root_var, lit.predicate_id, root_letters)
    for a, b in m.pairs:
        if is_implicit_ref(b):
            concept = b[1:-1]
            spec = next((x for x in lit.args if x.implicit_concept == concept), None)
            if spec is None:
                raise MappingError(f"{b} is not an implicit arg of {lit.predicate_id}")
            v = g.add_node(_relabel(root_var, relabel), f"{_narg(a)}-{b}", root_letters)
            g.edges.append((root_var, _edge(spec.number), v))
            continue
        heads = [t.letter for t in roleset.token_slots if t.literal_arg == b and t.letter in real.fillers]
        members = [
            t.letter
            for t in roleset.token_slots
            if t.arg == a and t.letter in real.fillers and t.letter not in heads
        ]
        if not heads and not members:
            continue
        if heads:
            concept, obv = _participant_concept(real, heads, False)
            hv = g.add_node(_relabel(_join(heads), relabel), f"{_narg(a)}-{concept}", heads)
            for x in members:
                mc, _ = _participant_concept(real, [x], False)
                mv = g.add_node(_relabel(x, relabel), mc, [x])
                g.edges.append((hv, ":mod", mv))
        else:
            concept, obv = _participant_concept(real, members, False)
            hv = g.add_node(_relabel(_join(members), relabel), f"{_narg(a)}-{concept}", members)
        if obv:
            g.edges.append((hv, ":refer-definiteness", Const("obviative")))
        g.edges.append((root_var, _edge(b), hv))
    if relabel:
        diags.append(_relabel_diag(roleset, "literal", relabel))
    g.check()
    return g, diags


def idiomatic_graph(
    real: Realization, mwe_roleset: Roleset, lexicon: Lexicon, match: Optional[MatchSpan] = None
) -> tuple[MeaningGraph, list[Diagnostic]]:
    diags: list[Diagnostic] = []
    rs = mwe_roleset
    if not rs.token_slots:
        return _lexical_graph(real, rs, match), diags
    m = _mapping_for(rs)
    idiom_id = m.idiomatic_roleset or rs.predicate_id
    idiom = lexicon.rolesets.get(idiom_id)
    if idiom is None:
        raise MissingRoleset(f"idiomatic roleset {idiom_id!r} is not in the lexicon")
    relabel = dict(m.idiomatic_relabel)
    root_letters = _root_letters(rs, real)
    root_var = _join(root_letters) or idiom_id[0].lower()
    g = MeaningGraph(root=root_var)
    g.add_node(root_var, idiom_id, root_letters)
    for spec in rs.args:
        a = spec.number
        letters = [t.letter for t in rs.token_slots if t.arg == a and t.letter in real.fillers]
        partner = m.partner(a)
        if letters and partner is None and a not in m.extras:
            raise MappingError(f"{a} of {rs.predicate_id} is realized but has no mapping pair")
        if letters:
            var = _join(letters)
            concept, _ = _participant_concept(real, letters, True)
        elif partner is not None and is_implicit_ref(partner):
            var = root_var
            letters = root_letters
            concept = spec.description
        else:
            continue
        concept = real.referents.get(a, concept)
        target = m.target(a)
        v = g.add_node(_relabel(var, relabel), f"{_narg(a)}-{concept}", letters)
        g.edges.append((root_var, _edge(target), v))
        tspec = idiom.arg(target)
        if tspec is not None:
            for other in idiom.args:
                if other.number != target and other.description == spec.description:
                    diags.append(
                        Diagnostic(
                            f"rolesets/{rs.predicate_id}/mapping/targets/{a}",
                            "TARGET_CROSSED",
                            "warning",
                            f"{a} ({spec.description}) maps to {target} ({tspec.description}) "
                            f"though {other.number} of {idiom_id} is {other.description}",
                        )
                    )
    for extra in m.extras:
        parts = extra.split(None, 1)
        if len(parts) == 2 and parts[0].startswith(":"):
            g.edges.append((root_var, parts[0], Const(parts[1])))
    if relabel:
        diags.append(_relabel_diag(rs, "idiomatic", relabel))
    g.check()
    return g, diags


def _relabel_diag(rs: Roleset, reading: str, table: dict) -> Diagnostic:
    pairs = ", ".join(f"{k}->{v}" for k, v in sorted(table.items()))
    return Diagnostic(
        f"rolesets/{rs.predicate_id}/mapping/relabel/{reading}",
        "RELABELED_VARIABLES",
        "warning",
        f"{reading} variables renamed from token-slot letters ({pairs})",
    )


def check_mapping(mwe_roleset: Roleset, lexicon: Lexicon) -> list[Diagnostic]:
    out = list(mapping_diagnostics(mwe_roleset, lexicon))
    owners = lexicon.owners_of(mwe_roleset.predicate_id)
    if owners and mwe_roleset.token_slots:
        letters = set().union(*(c.slot_ids() for c in owners))
        for t in mwe_roleset.token_slots:
            if t.letter not in letters:
                out.append(
                    Diagnostic(
                        f"rolesets/{mwe_roleset.predicate_id}/token_slots/{t.letter}",
                        "TOKEN_SLOT_UNKNOWN_LETTER",
                        "error",
                        "letter not in the owning construction",
                    )
                )
    if mwe_roleset.mapping is not None:
        lit = lexicon.rolesets.get(mwe_roleset.mapping.literal_roleset)
        for t in mwe_roleset.token_slots:
            if t.literal_arg is not None and (lit is None or lit.arg(t.literal_arg) is None):
                out.append(
                    Diagnostic(
                        f"rolesets/{mwe_roleset.predicate_id}/token_slots/{t.letter}",
                        "TOKEN_SLOT_ARG_UNKNOWN",
                        "error",
                        f"literal {t.literal_arg} unresolved",
                    )
                )
    return sorted(set(out))
