"""Constructicon file format: parse, validate, serialize.

The file is one UTF-8 JSON document::

    {"version": "1",
     "constructions": {id: {...}},
     "rolesets": {id: {...}},
     "morphemes": [{...}],
     "templates": [{...}]}

``parse_lexicon`` checks shape (keys and types) and raises on the first
problem.  ``validate`` checks the cross-reference and consistency rules and
returns every problem it finds as a sorted list of diagnostics.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Any, Optional

from .model import (
    ARGM_SUBTYPES,
    CATEGORIES,
    FIXEDNESS,
    FUNCTIONS,
    MORPH_SLOT_KINDS,
    ROLESET_KINDS,
    SCHEMATICITY,
    SLOT_KINDS,
    SURFACE_ROLES,
    ArgSpec,
    Construction,
    ConstructiconError,
    MetaphorMapping,
    MorphEntry,
    MorphTemplate,
    Roleset,
    Slot,
    SlotPattern,
    TemplateSlot,
    TokenSlot,
    arg_number,
    classify_schematicity,
    is_implicit_ref,
    is_valid_arg_label,
)

FORMAT_VERSION = "1"


class LexiconSyntaxError(ConstructiconError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


class SchemaError(ConstructiconError):
    def __init__(self, message: str, path: str = "", locations: tuple = ()):
        where = f" at {path}" if path else ""
        super().__init__(f"{message}{where}")
        self.path = path
        self.locations = locations


class ValidationError(ConstructiconError):
    def __init__(self, diagnostics):
        errs = [d for d in diagnostics if d.severity == "error"]
        super().__init__(f"lexicon has {len(errs)} error(s); first: {errs[0].code} {errs[0].path}")
        self.diagnostics = diagnostics


@dataclass(frozen=True, order=True)
class Diagnostic:
    path: str
    code: str
    severity: str = "error"
    message: str = ""

    def render(self) -> str:
        return f"{self.severity}: {self.code} {self.path}: {self.message}"

    def to_json(self) -> dict:
        return {"severity": self.severity, "code": self.code, "path": self.path, "message": self.message}


@dataclass
class Lexicon:
    constructions: dict = field(default_factory=dict)
    rolesets: dict = field(default_factory=dict)
    morphemes: tuple = ()
    templates: tuple = ()
    version: str = FORMAT_VERSION

    def template(self, template_id: Optional[str] = None) -> MorphTemplate:
        if not self.templates:
            raise KeyError("lexicon has no morph templates")
        if template_id is None:
            return self.templates[0]
        for t in self.templates:
            if t.template_id == template_id:
                return t
        raise KeyError(template_id)

    def owners_of(self, predicate_id: str) -> list[Construction]:
        return [c for _, c in sorted(self.constructions.items()) if c.meaning == predicate_id]


# ---------------------------------------------------------------- parsing

_TOP_KEYS = {"version", "constructions", "rolesets", "morphemes", "templates"}
_CXN_KEYS = {"id", "schematicity", "gap_limit", "meaning", "variants", "exclude"}
_VARIANT_KEYS = {"id", "slots", "notes"}
_SLOT_KEYS = {"id", "kind", "surface", "category", "min", "max", "role", "lv", "feature"}
_ROLESET_KEYS = {"id", "definition", "kind", "args", "token_slots", "mapping"}
_ARG_KEYS = {"number", "function", "description", "fixedness", "implicit_concept"}
_TOKEN_SLOT_KEYS = {"role", "arg", "literal_arg"}
_MAPPING_KEYS = {"literal", "idiomatic", "pairs", "extras", "targets", "relabel"}
_RELABEL_KEYS = {"literal", "idiomatic"}
_MORPH_KEYS = {"form", "gloss", "slots", "pos", "variants", "indexes"}
_TEMPLATE_KEYS = {"id", "slots"}
_TSLOT_KEYS = {"name", "kind", "required", "repeatable"}


def _pairs_hook(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            out.setdefault("\x00dups", []).append(k)
        out[k] = v
    return out


def _locate(text: str, key: str) -> tuple:
    locs = []
    for m in re.finditer(r'"' + re.escape(key) + r'"\s*:', text):
        line = text.count("\n", 0, m.start()) + 1
        col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
        locs.append((line, col))
    return tuple(locs)


class _Reader:
    def __init__(self, text: str, lax: bool):
        self.text = text
        self.lax = lax

    def obj(self, value, path: str, allowed: set, required: tuple = ()) -> dict:
        if not isinstance(value, dict):
            raise SchemaError(f"expected object, got {type(value).__name__}", path)
        dups = value.get("\x00dups")
        if dups:
            key = dups[0]
            locs = _locate(self.text, key)
            where = ", ".join(f"line {a} col {b}" for a, b in locs[:2])
            raise SchemaError(f"duplicate key {key!r} ({where})", path, locs)
        unknown = sorted(set(value) - allowed)
        if unknown and not self.lax:
            raise SchemaError(f"unknown field {unknown[0]!r}", path)
        for k in required:
            if k not in value:
                raise SchemaError(f"missing field {k!r}", path)
        return value

    @staticmethod
    def typed(value, kind, path: str, what: str):
        ok = isinstance(value, kind) and not (kind is int and isinstance(value, bool))
        if not ok:
            raise SchemaError(f"{what} must be {kind.__name__}", path)
        return value

    def strs(self, value, path: str, what: str) -> tuple:
        self.typed(value, list, path, what)
        for i, v in enumerate(value):
            self.typed(v, str, f"{path}[{i}]", what + " entry")
        return tuple(value)

    def map(self, value, path: str) -> dict:
        """An object whose keys are ids rather than field names."""
        return self.obj(value, path, set(value) if isinstance(value, dict) else set())

    def str_map(self, value, path: str, what: str) -> tuple:
        self.map(value, path)
        for k, v in value.items():
            self.typed(v, str, f"{path}.{k}", what)
        return tuple(sorted(value.items()))


def parse_lexicon(document, lax: bool = False) -> Lexicon:
    if isinstance(document, (bytes, bytearray)):
        try:
            text = bytes(document).decode("utf-8")
        except UnicodeDecodeError as e:
            raise LexiconSyntaxError(f"invalid UTF-8 ({e.reason})", 1, e.start + 1) from None
    else:
        text = document
    try:
        raw = json.loads(text, object_pairs_hook=_pairs_hook)
    except json.JSONDecodeError as e:
        raise LexiconSyntaxError(e.msg, e.lineno, e.colno) from None
    r = _Reader(text, lax)
    # top-level unknown keys are rejected even in lax mode
    top = _Reader(text, False).obj(raw, "$", _TOP_KEYS, ("version",))
    version = r.typed(top["version"], str, "$.version", "version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported format version {version!r}", "$.version")

    cxns = {}
    raw_cxns = r.map(top.get("constructions", {}), "$.constructions")
    for cid, c in raw_cxns.items():
        cxns[cid] = _construction(r, cid, c, f"$.constructions.{cid}")
    rolesets = {}
    raw_rs = r.map(top.get("rolesets", {}), "$.rolesets")
    for rid, rs in raw_rs.items():
        rolesets[rid] = _roleset(r, rid, rs, f"$.rolesets.{rid}")
    morphemes = tuple(
        _morpheme(r, m, f"$.morphemes[{i}]")
        for i, m in enumerate(r.typed(top.get("morphemes", []), list, "$.morphemes", "morphemes"))
    )
    templates = tuple(
        _template(r, t, f"$.templates[{i}]")
        for i, t in enumerate(r.typed(top.get("templates", []), list, "$.templates", "templates"))
    )
    return Lexicon(cxns, rolesets, morphemes, templates, version)


def _check_id(r, key, value, path):
    if "id" in value:
        got = r.typed(value["id"], str, path + ".id", "id")
        if got != key:
            raise SchemaError(f"id {got!r} does not match map key {key!r}", path + ".id")


def _construction(r: _Reader, cid: str, c, path: str) -> Construction:
    c = r.obj(c, path, _CXN_KEYS, ("meaning", "variants"))
    _check_id(r, cid, c, path)
    variants = []
    for i, v in enumerate(r.typed(c["variants"], list, path + ".variants", "variants")):
        vpath = f"{path}.variants[{i}]"
        v = r.obj(v, vpath, _VARIANT_KEYS, ("id", "slots"))
        slots = tuple(
            _slot(r, s, f"{vpath}.slots[{j}]")
            for j, s in enumerate(r.typed(v["slots"], list, vpath + ".slots", "slots"))
        )
        variants.append(
            SlotPattern(
                variant_id=r.typed(v["id"], str, vpath + ".id", "variant id"),
                slots=slots,
                notes=r.typed(v.get("notes", ""), str, vpath + ".notes", "notes"),
            )
        )
    sch = c.get("schematicity")
    if sch is not None:
        r.typed(sch, str, path + ".schematicity", "schematicity")
    return Construction(
        cxn_id=cid,
        variants=tuple(variants),
        meaning=r.typed(c["meaning"], str, path + ".meaning", "meaning"),
        schematicity=sch,
        gap_limit=r.typed(c.get("gap_limit", 4), int, path + ".gap_limit", "gap_limit"),
        exclude=tuple(sorted(set(r.strs(c.get("exclude", []), path + ".exclude", "exclude")))),
    )


def _slot(r: _Reader, s, path: str) -> Slot:
    s = r.obj(s, path, _SLOT_KEYS, ("id", "kind"))

    def opt(key, kind):
        return None if s.get(key) is None else r.typed(s[key], kind, f"{path}.{key}", key)

    return Slot(
        slot_id=r.typed(s["id"], str, path + ".id", "slot id"),
        kind=r.typed(s["kind"], str, path + ".kind", "kind"),
        surface_forms=tuple(sorted(set(r.strs(s.get("surface", []), path + ".surface", "surface")))),
        category=opt("category", str),
        min_tokens=opt("min", int),
        max_tokens=opt("max", int),
        role_binding=opt("role", str),
        lv_marker=r.typed(s.get("lv", False), bool, path + ".lv", "lv"),
        feature=opt("feature", str),
    )


def _roleset(r: _Reader, rid: str, rs, path: str) -> Roleset:
    rs = r.obj(rs, path, _ROLESET_KEYS, ("definition", "kind", "args"))
    _check_id(r, rid, rs, path)
    args = []
    for i, a in enumerate(r.typed(rs["args"], list, path + ".args", "args")):
        apath = f"{path}.args[{i}]"
        a = r.obj(a, apath, _ARG_KEYS, ("number", "function", "description"))
        ic = a.get("implicit_concept")
        args.append(
            ArgSpec(
                number=r.typed(a["number"], str, apath + ".number", "number"),
                function=r.typed(a["function"], str, apath + ".function", "function"),
                description=r.typed(a["description"], str, apath + ".description", "description"),
                fixedness=r.typed(a.get("fixedness", "open"), str, apath + ".fixedness", "fixedness"),
                implicit_concept=None if ic is None else r.typed(ic, str, apath + ".implicit_concept", "implicit_concept"),
            )
        )
    slots = []
    raw_ts = rs.get("token_slots", {})
    r.map(raw_ts, path + ".token_slots")
    for letter in sorted(raw_ts):
        tpath = f"{path}.token_slots.{letter}"
        t = r.obj(raw_ts[letter], tpath, _TOKEN_SLOT_KEYS, ("role",))
        slots.append(
            TokenSlot(
                letter=letter,
                role=r.typed(t["role"], str, tpath + ".role", "role"),
                arg=None if t.get("arg") is None else r.typed(t["arg"], str, tpath + ".arg", "arg"),
                literal_arg=None
                if t.get("literal_arg") is None
                else r.typed(t["literal_arg"], str, tpath + ".literal_arg", "literal_arg"),
            )
        )
    mapping = None
    if rs.get("mapping") is not None:
        mapping = _mapping(r, rs["mapping"], path + ".mapping")
    return Roleset(
        predicate_id=rid,
        definition=r.typed(rs["definition"], str, path + ".definition", "definition"),
        args=tuple(args),
        kind=r.typed(rs["kind"], str, path + ".kind", "kind"),
        token_slots=tuple(slots),
        mapping=mapping,
    )


def _mapping(r: _Reader, m, path: str) -> MetaphorMapping:
    m = r.obj(m, path, _MAPPING_KEYS, ("literal", "pairs"))
    pairs = []
    for i, p in enumerate(r.typed(m["pairs"], list, path + ".pairs", "pairs")):
        ppath = f"{path}.pairs[{i}]"
        if not (isinstance(p, list) and len(p) == 2 and all(isinstance(x, str) for x in p)):
            raise SchemaError("pair must be a two-string array", ppath)
        pairs.append((p[0], p[1]))
    relabel = r.obj(m.get("relabel", {}), path + ".relabel", _RELABEL_KEYS)
    idiom = m.get("idiomatic")
    return MetaphorMapping(
        literal_roleset=r.typed(m["literal"], str, path + ".literal", "literal"),
        pairs=tuple(pairs),
        idiomatic_roleset=None if idiom is None else r.typed(idiom, str, path + ".idiomatic", "idiomatic"),
        extras=r.strs(m.get("extras", []), path + ".extras", "extras"),
        targets=r.str_map(m.get("targets", {}), path + ".targets", "target"),
        literal_relabel=r.str_map(relabel.get("literal", {}), path + ".relabel.literal", "relabel"),
        idiomatic_relabel=r.str_map(relabel.get("idiomatic", {}), path + ".relabel.idiomatic", "relabel"),
    )


def _morpheme(r: _Reader, m, path: str) -> MorphEntry:
    m = r.obj(m, path, _MORPH_KEYS, ("form", "gloss", "slots"))
    return MorphEntry(
        form=r.typed(m["form"], str, path + ".form", "form"),
        gloss=r.typed(m["gloss"], str, path + ".gloss", "gloss"),
        allowed_slots=tuple(sorted(set(r.strs(m["slots"], path + ".slots", "slots")))),
        pos_class=r.typed(m.get("pos", ""), str, path + ".pos", "pos"),
        surface_variants=tuple(sorted(set(r.strs(m.get("variants", []), path + ".variants", "variants")))),
        indexes=r.strs(m.get("indexes", []), path + ".indexes", "indexes"),
    )


def _template(r: _Reader, t, path: str) -> MorphTemplate:
    t = r.obj(t, path, _TEMPLATE_KEYS, ("id", "slots"))
    slots = []
    for i, s in enumerate(r.typed(t["slots"], list, path + ".slots", "slots")):
        spath = f"{path}.slots[{i}]"
        s = r.obj(s, spath, _TSLOT_KEYS, ("name", "kind"))
        slots.append(
            TemplateSlot(
                name=r.typed(s["name"], str, spath + ".name", "name"),
                kind=r.typed(s["kind"], str, spath + ".kind", "kind"),
                required=r.typed(s.get("required", False), bool, spath + ".required", "required"),
                repeatable=r.typed(s.get("repeatable", False), bool, spath + ".repeatable", "repeatable"),
            )
        )
    return MorphTemplate(template_id=r.typed(t["id"], str, path + ".id", "id"), slots=tuple(slots))


def load_lexicon(path, lax: bool = False) -> Lexicon:
    with open(path, "rb") as fh:
        return parse_lexicon(fh.read(), lax=lax)


# ------------------------------------------------------------- validation


def _arg_label_diag(label: str, path: str) -> Optional[Diagnostic]:
    if is_valid_arg_label(label):
        return None
    n = arg_number(label)
    if n is not None:
        return Diagnostic(path, "ARG_OUT_OF_RANGE", "error", f"{label} is outside ARG0..ARG6")
    if label.startswith("ARGM-"):
        return Diagnostic(path, "ARGM_UNKNOWN", "error", f"{label} is not one of ARGM-{'/'.join(ARGM_SUBTYPES)}")
    return Diagnostic(path, "ARG_LABEL_INVALID", "error", f"{label!r} is not an arg label")


def validate(lexicon: Lexicon) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    add = out.append

    for cid in sorted(lexicon.constructions):
        _validate_construction(lexicon, lexicon.constructions[cid], add)
    for rid in sorted(lexicon.rolesets):
        _validate_roleset(lexicon, lexicon.rolesets[rid], add)
    for i, m in enumerate(lexicon.morphemes):
        p = f"morphemes/{i:04d}"
        if not m.form:
            add(Diagnostic(p, "MORPH_FORM_EMPTY", "error", "morpheme form is empty"))
        if not m.allowed_slots:
            add(Diagnostic(p, "MORPH_SLOTS_EMPTY", "error", f"{m.form}: no allowed slots"))
        for k in m.allowed_slots:
            if k not in MORPH_SLOT_KINDS:
                add(Diagnostic(p, "MORPH_SLOT_INVALID", "error", f"{m.form}: unknown slot kind {k!r}"))
    seen_t = set()
    for t in lexicon.templates:
        p = f"templates/{t.template_id}"
        if t.template_id in seen_t:
            add(Diagnostic(p, "TEMPLATE_DUPLICATE", "error", "template id repeats"))
        seen_t.add(t.template_id)
        _validate_template(t, p, add)
    return sorted(set(out))


def _validate_template(t: MorphTemplate, p: str, add) -> None:
    names = [s.name for s in t.slots]
    if len(set(names)) != len(names):
        add(Diagnostic(p, "TEMPLATE_SLOT_DUPLICATE", "error", "slot names repeat"))
    for s in t.slots:
        if s.kind not in MORPH_SLOT_KINDS:
            add(Diagnostic(f"{p}/{s.name}", "TEMPLATE_SLOT_INVALID", "error", f"unknown slot kind {s.kind!r}"))
    stems = [s for s in t.slots if s.kind == "stem"]
    if len(stems) != 1:
        add(Diagnostic(p, "TEMPLATE_STEM_COUNT", "error", f"{len(stems)} stem slots; exactly one required"))
    elif not stems[0].required:
        add(Diagnostic(p, "TEMPLATE_STEM_OPTIONAL", "error", "stem slot must be required"))
    infl = [i for i, s in enumerate(t.slots) if s.kind == "inflection"]
    if infl and infl != [len(t.slots) - 1]:
        add(Diagnostic(p, "TEMPLATE_INFLECTION_NOT_LAST", "error", "inflection must be the last slot"))


def _validate_construction(lex: Lexicon, c: Construction, add) -> None:
    p = f"constructions/{c.cxn_id}"
    if c.meaning not in lex.rolesets:
        add(Diagnostic(p, "MEANING_DANGLING", "error", f"meaning {c.meaning!r} is not a roleset"))
    if c.gap_limit < 0:
        add(Diagnostic(p, "GAP_LIMIT_INVALID", "error", "gap_limit must be >= 0"))
    if not c.variants:
        add(Diagnostic(p, "VARIANTS_EMPTY", "error", "construction has no variants"))
        return
    vids = [v.variant_id for v in c.variants]
    if len(set(vids)) != len(vids):
        add(Diagnostic(p, "VARIANT_DUPLICATE", "error", "variant ids repeat"))
    roleset = lex.rolesets.get(c.meaning)
    for v in c.variants:
        vp = f"{p}/variants/{v.variant_id}"
        if not v.slots:
            add(Diagnostic(vp, "SLOTS_EMPTY", "error", "variant has no slots"))
        ids = [s.slot_id for s in v.slots]
        if len(set(ids)) != len(ids):
            add(Diagnostic(vp, "SLOT_DUPLICATE", "error", "slot ids repeat within variant"))
        for s in v.slots:
            _validate_slot(s, f"{vp}/slots/{s.slot_id}", roleset, add)
    role_sets = {v.role_slot_ids() for v in c.variants}
    if len(role_sets) > 1:
        add(Diagnostic(p, "VARIANT_ROLE_MISMATCH", "error", "variants bind different role slots"))
    if c.schematicity is not None:
        if c.schematicity not in SCHEMATICITY:
            add(Diagnostic(p, "SCHEMATICITY_INVALID", "error", f"unknown class {c.schematicity!r}"))
        elif c.variants and all(v.slots for v in c.variants):
            derived = classify_schematicity(c)
            if derived != c.schematicity:
                add(
                    Diagnostic(
                        p, "SCHEMATICITY_MISMATCH", "error", f"declared {c.schematicity}, slots give {derived}"
                    )
                )


def _validate_slot(s: Slot, sp: str, roleset: Optional[Roleset], add) -> None:
    if s.kind not in SLOT_KINDS:
        add(Diagnostic(sp, "SLOT_KIND_INVALID", "error", f"unknown slot kind {s.kind!r}"))
        return
    if s.kind == "substantive":
        if not s.surface_forms:
            add(Diagnostic(sp, "SURFACE_MISSING", "error", "substantive slot needs surface forms"))
        if s.category is not None:
            add(Diagnostic(sp, "CATEGORY_ON_SUBSTANTIVE", "error", "substantive slot cannot carry a category"))
    else:
        if s.category is None:
            add(Diagnostic(sp, "CATEGORY_MISSING", "error", "schematic slot needs a category"))
        elif s.category not in CATEGORIES:
            add(Diagnostic(sp, "CATEGORY_INVALID", "error", f"unknown category {s.category!r}"))
        if s.surface_forms:
            add(Diagnostic(sp, "SURFACE_ON_SCHEMATIC", "error", "schematic slot cannot list surface forms"))
        lo = 1 if s.min_tokens is None else s.min_tokens
        hi = lo if s.max_tokens is None and s.min_tokens is not None else s.max_tokens
        if lo < 1 or (hi is not None and hi < lo):
            add(Diagnostic(sp, "TOKEN_BOUNDS_INVALID", "error", "need 1 <= min <= max"))
    if s.lv_marker and (s.kind != "substantive" or s.role_binding is not None):
        add(Diagnostic(sp, "LV_INVALID", "error", "lv slots are substantive and unbound"))
    if s.role_binding is not None:
        d = _arg_label_diag(s.role_binding, sp)
        if d:
            add(d)
        elif roleset is not None and roleset.arg(s.role_binding) is None:
            add(Diagnostic(sp, "ROLE_UNKNOWN_ARG", "error", f"{s.role_binding} not in {roleset.predicate_id}"))


def _validate_roleset(lex: Lexicon, rs: Roleset, add) -> None:
    p = f"rolesets/{rs.predicate_id}"
    if rs.kind not in ROLESET_KINDS:
        add(Diagnostic(p, "ROLESET_KIND_INVALID", "error", f"unknown kind {rs.kind!r}"))
    labels = [a.number for a in rs.args]
    if len(set(labels)) != len(labels):
        add(Diagnostic(p, "ARG_DUPLICATE", "error", "arg numbers repeat"))
    for a in rs.args:
        ap = f"{p}/args/{a.number}"
        d = _arg_label_diag(a.number, ap)
        if d:
            add(d)
        if a.function not in FUNCTIONS:
            add(Diagnostic(ap, "FUNCTION_INVALID", "error", f"unknown thematic function {a.function!r}"))
        if a.fixedness not in FIXEDNESS:
            add(Diagnostic(ap, "FIXEDNESS_INVALID", "error", f"unknown fixedness {a.fixedness!r}"))
        if a.fixedness == "implicit" and not a.implicit_concept:
            add(Diagnostic(ap, "IMPLICIT_CONCEPT_MISSING", "error", "implicit arg needs a default concept"))

    if rs.kind in ("mwe", "morphological"):
        if not rs.token_slots:
            add(Diagnostic(p, "TOKEN_SLOTS_MISSING", "error", f"{rs.kind} roleset needs token slots"))
        owners = lex.owners_of(rs.predicate_id)
        if not owners:
            add(Diagnostic(p, "MWE_ROLESET_UNREACHABLE", "warning", "no construction uses this roleset"))
        letters = set().union(*(c.slot_ids() for c in owners)) if owners else None
        for t in rs.token_slots:
            tp = f"{p}/token_slots/{t.letter}"
            if t.role not in SURFACE_ROLES:
                add(Diagnostic(tp, "SURFACE_ROLE_INVALID", "error", f"unknown surface role {t.role!r}"))
            if letters is not None and t.letter not in letters:
                add(Diagnostic(tp, "TOKEN_SLOT_UNKNOWN_LETTER", "error", "letter not in the owning construction"))
            if t.arg is not None:
                d = _arg_label_diag(t.arg, tp)
                if d:
                    add(d)
                elif rs.arg(t.arg) is None:
                    add(Diagnostic(tp, "TOKEN_SLOT_ARG_UNKNOWN", "error", f"{t.arg} not in {rs.predicate_id}"))
            if t.literal_arg is not None:
                lit = lex.rolesets.get(rs.mapping.literal_roleset) if rs.mapping else None
                if lit is None or lit.arg(t.literal_arg) is None:
                    add(Diagnostic(tp, "TOKEN_SLOT_ARG_UNKNOWN", "error", f"literal {t.literal_arg} unresolved"))
    elif rs.token_slots:
        add(Diagnostic(p, "TOKEN_SLOTS_UNEXPECTED", "warning", "lexical roleset carries token slots"))

    if rs.mapping is not None:
        for d in mapping_diagnostics(rs, lex):
            add(d)


def mapping_diagnostics(rs: Roleset, lex: Lexicon) -> list[Diagnostic]:
    """Diagnostics for a roleset's metaphor mapping.

    Shared by ``validate`` and the graph module's ``check_mapping``.
    """
    out: list[Diagnostic] = []
    m = rs.mapping
    if m is None:
        return out
    p = f"rolesets/{rs.predicate_id}/mapping"
    lit = lex.rolesets.get(m.literal_roleset)
    if lit is None:
        out.append(Diagnostic(p, "MAPPING_DANGLING", "error", f"literal roleset {m.literal_roleset!r} missing"))
    idiom_id = m.idiomatic_roleset or rs.predicate_id
    idiom = lex.rolesets.get(idiom_id)
    if idiom is None:
        out.append(Diagnostic(p, "MAPPING_DANGLING", "error", f"idiomatic roleset {idiom_id!r} missing"))
    lefts = [a for a, _ in m.pairs]
    rights = [b for _, b in m.pairs]
    for a, b in m.pairs:
        pp = f"{p}/pairs/{a}"
        checks = [(a, rs)] if is_implicit_ref(b) else [(a, rs), (b, lit)]
        for label, owner in checks:
            d = _arg_label_diag(label, pp)
            if d:
                out.append(d)
            elif owner is not None and owner.arg(label) is None:
                out.append(
                    Diagnostic(pp, "MAPPING_ARG_UNKNOWN", "error", f"{label} not in {owner.predicate_id}")
                )
        if is_implicit_ref(b) and lit is not None:
            concept = b[1:-1]
            if not any(x.implicit_concept == concept for x in lit.args):
                out.append(
                    Diagnostic(pp, "IMPLICIT_UNKNOWN", "error", f"{b} is not an implicit arg of {lit.predicate_id}")
                )
    if len(set(lefts)) != len(lefts):
        out.append(Diagnostic(p, "MAPPING_DUPLICATE", "error", "an arg appears in more than one pair"))
    if len(set(rights)) != len(rights):
        out.append(Diagnostic(p, "MAPPING_NOT_INJECTIVE", "error", "two args map to one literal partner"))
    for a in rs.args:
        if arg_number(a.number) is None:
            continue
        if a.number not in lefts and a.number not in m.extras:
            out.append(Diagnostic(f"{p}/pairs", "MAPPING_INCOMPLETE", "error", f"{a.number} has no pair"))
    for src, dst in m.targets:
        tp = f"{p}/targets/{src}"
        if rs.arg(src) is None:
            out.append(Diagnostic(tp, "MAPPING_ARG_UNKNOWN", "error", f"{src} not in {rs.predicate_id}"))
        d = _arg_label_diag(dst, tp)
        if d:
            out.append(d)
        elif idiom is not None and idiom.arg(dst) is None:
            out.append(Diagnostic(tp, "MAPPING_TARGET_UNKNOWN", "error", f"{dst} not in {idiom_id}"))
    return out


# ---------------------------------------------------------- serialization


def _slot_doc(s: Slot) -> dict:
    d: dict[str, Any] = {"id": s.slot_id, "kind": s.kind}
    if s.surface_forms:
        d["surface"] = list(s.surface_forms)
    for key, val in (
        ("category", s.category),
        ("min", s.min_tokens),
        ("max", s.max_tokens),
        ("role", s.role_binding),
        ("feature", s.feature),
    ):
        if val is not None:
            d[key] = val
    if s.lv_marker:
        d["lv"] = True
    return d


def _roleset_doc(rs: Roleset) -> dict:
    d: dict[str, Any] = {"id": rs.predicate_id, "definition": rs.definition, "kind": rs.kind, "args": []}
    for a in rs.args:
        ad = {"number": a.number, "function": a.function, "description": a.description}
        if a.fixedness != "open":
            ad["fixedness"] = a.fixedness
        if a.implicit_concept is not None:
            ad["implicit_concept"] = a.implicit_concept
        d["args"].append(ad)
    if rs.token_slots:
        ts = {}
        for t in rs.token_slots:
            td = {"role": t.role}
            if t.arg is not None:
                td["arg"] = t.arg
            if t.literal_arg is not None:
                td["literal_arg"] = t.literal_arg
            ts[t.letter] = td
        d["token_slots"] = ts
    m = rs.mapping
    if m is not None:
        md: dict[str, Any] = {"literal": m.literal_roleset, "pairs": [list(p) for p in m.pairs]}
        if m.idiomatic_roleset is not None:
            md["idiomatic"] = m.idiomatic_roleset
        if m.extras:
            md["extras"] = list(m.extras)
        if m.targets:
            md["targets"] = dict(m.targets)
        relabel = {}
        if m.literal_relabel:
            relabel["literal"] = dict(m.literal_relabel)
        if m.idiomatic_relabel:
            relabel["idiomatic"] = dict(m.idiomatic_relabel)
        if relabel:
            md["relabel"] = relabel
        d["mapping"] = md
    return d


def lexicon_document(lexicon: Lexicon) -> dict:
    doc: dict[str, Any] = {"version": lexicon.version, "constructions": {}, "rolesets": {}}
    for cid, c in lexicon.constructions.items():
        cd: dict[str, Any] = {
            "id": cid,
            "meaning": c.meaning,
            "variants": [
                dict(
                    {"id": v.variant_id, "slots": [_slot_doc(s) for s in v.slots]},
                    **({"notes": v.notes} if v.notes else {}),
                )
                for v in c.variants
            ],
        }
        if c.schematicity is not None:
            cd["schematicity"] = c.schematicity
        if c.gap_limit != 4:
            cd["gap_limit"] = c.gap_limit
        if c.exclude:
            cd["exclude"] = list(c.exclude)
        doc["constructions"][cid] = cd
    for rid, rs in lexicon.rolesets.items():
        doc["rolesets"][rid] = _roleset_doc(rs)
    if lexicon.morphemes:
        ms = []
        for m in lexicon.morphemes:
            md: dict[str, Any] = {"form": m.form, "gloss": m.gloss, "slots": list(m.allowed_slots)}
            if m.pos_class:
                md["pos"] = m.pos_class
            if m.surface_variants:
                md["variants"] = list(m.surface_variants)
            if m.indexes:
                md["indexes"] = list(m.indexes)
            ms.append(md)
        doc["morphemes"] = ms
    if lexicon.templates:
        doc["templates"] = [
            {
                "id": t.template_id,
                "slots": [
                    dict(
                        {"name": s.name, "kind": s.kind},
                        **({"required": True} if s.required else {}),
                        **({"repeatable": True} if s.repeatable else {}),
                    )
                    for s in t.slots
                ],
            }
            for t in lexicon.templates
        ]
    return doc


def serialize_lexicon(lexicon: Lexicon, check: bool = True) -> bytes:
    if check:
        diags = validate(lexicon)
        if any(d.severity == "error" for d in diags):
            raise ValidationError(diags)
    text = json.dumps(lexicon_document(lexicon), sort_keys=True, indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")
