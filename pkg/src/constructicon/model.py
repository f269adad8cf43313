"""Domain types shared across the package.

Constructions pair a form pole (one or more slot-sequence variants) with a
meaning pole (a roleset id).  Rolesets describe predicates with numbered
arguments; multiword and morphological rolesets additionally carry a
token-slot map and, when idiomatic, a mapping onto a literal frame.

All types are frozen dataclasses holding tuples, so two values built from
the same document compare equal regardless of how they were produced.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Optional

if TYPE_CHECKING:  # pragma: no cover
    from .lexicon import Lexicon

SLOT_KINDS = ("substantive", "schematic")
CATEGORIES = ("NP", "VP", "PP", "ADJP", "ADVP", "CLAUSE", "N", "V", "DET", "ANY")
SCHEMATICITY = (
    "substantive",
    "partially-substantive",
    "mostly-schematic",
    "fully-schematic",
)
FUNCTIONS = (
    "agent",
    "theme",
    "experiencer",
    "stimulus",
    "undergoer",
    "source",
    "goal",
    "instrument",
    "patient",
    "causer",
    "path",
)
FIXEDNESS = ("open", "semi-fixed", "implicit")
ROLESET_KINDS = ("lexical", "mwe", "morphological")
ARGM_SUBTYPES = ("LOC", "DIS", "MNR", "TMP")
SURFACE_ROLES = ("rel", "arg-bearing", "fixed-function")
MORPH_SLOT_KINDS = (
    "proclitic",
    "discourse",
    "tense-aspect-preverb",
    "adverbial-preverb",
    "nominal-preverb",
    "stem",
    "derivational-final",
    "inflection",
)
PREVERB_KINDS = frozenset({"tense-aspect-preverb", "adverbial-preverb", "nominal-preverb"})

_ARG_RE = re.compile(r"^ARG(\d)$")
_ARGM_RE = re.compile(r"^ARGM-([A-Z]+)$")


class ConstructiconError(Exception):
    """Base class for domain errors raised by this package."""


class UnknownArg(ConstructiconError, KeyError):
    pass


def arg_number(label: str) -> Optional[int]:
    """Return N for a numbered ``ARGN`` label, else None."""
    m = _ARG_RE.match(label)
    return int(m.group(1)) if m else None


def is_valid_arg_label(label: str) -> bool:
    n = arg_number(label)
    if n is not None:
        return 0 <= n <= 6
    m = _ARGM_RE.match(label)
    return bool(m) and m.group(1) in ARGM_SUBTYPES


def is_implicit_ref(value: str) -> bool:
    return len(value) > 2 and value.startswith("<") and value.endswith(">")


@dataclass(frozen=True)
class Slot:
    slot_id: str
    kind: str
    surface_forms: tuple[str, ...] = ()
    category: Optional[str] = None
    min_tokens: Optional[int] = None
    max_tokens: Optional[int] = None
    role_binding: Optional[str] = None
    lv_marker: bool = False
    # morphological feature the first filler token must carry, e.g. "COMP"
    feature: Optional[str] = None

    @property
    def substantive(self) -> bool:
        return self.kind == "substantive"

    def form_sequences(self) -> list[tuple[str, ...]]:
        """Surface forms split into lowercased token sequences, longest first."""
        seqs = {tuple(f.lower().split()) for f in self.surface_forms if f.strip()}
        return sorted(seqs, key=lambda s: (-len(s), s))

    @property
    def frozen_multiword(self) -> bool:
        seqs = self.form_sequences()
        return self.substantive and bool(seqs) and all(len(s) >= 2 for s in seqs)


@dataclass(frozen=True)
class SlotPattern:
    variant_id: str
    slots: tuple[Slot, ...]
    notes: str = ""

    def role_slot_ids(self) -> frozenset[str]:
        return frozenset(s.slot_id for s in self.slots if s.role_binding)

    def slot(self, slot_id: str) -> Slot:
        for s in self.slots:
            if s.slot_id == slot_id:
                return s
        raise KeyError(slot_id)


@dataclass(frozen=True)
class Construction:
    cxn_id: str
    variants: tuple[SlotPattern, ...]
    meaning: str
    schematicity: Optional[str] = None  # declared; None means "derive"
    gap_limit: int = 4
    exclude: tuple[str, ...] = ()  # filler lemmas that block an LVC reading

    @property
    def is_lvc(self) -> bool:
        return any(s.lv_marker for v in self.variants for s in v.slots)

    def slot_ids(self) -> frozenset[str]:
        return frozenset(s.slot_id for v in self.variants for s in v.slots)


@dataclass(frozen=True)
class ArgSpec:
    number: str
    function: str
    description: str
    fixedness: str = "open"
    implicit_concept: Optional[str] = None


@dataclass(frozen=True)
class TokenSlot:
    """One lettered position of a token-slot map.

    ``arg`` binds the letter to an argument of the owning roleset.  A ``rel``
    letter may carry ``arg`` too, meaning the anchor is absorbed into that
    participant in the idiomatic reading (the bug of "stomach bug").
    ``literal_arg`` makes a rel anchor the head of a literal-frame argument.
    """

    letter: str
    role: str
    arg: Optional[str] = None
    literal_arg: Optional[str] = None


@dataclass(frozen=True)
class MetaphorMapping:
    literal_roleset: str
    pairs: tuple[tuple[str, str], ...]
    idiomatic_roleset: Optional[str] = None
    extras: tuple[str, ...] = ()
    # owning-roleset arg -> arg label in the idiomatic frame (identity if absent)
    targets: tuple[tuple[str, str], ...] = ()
    # per-reading variable renaming, as printed in annotated graphs
    literal_relabel: tuple[tuple[str, str], ...] = ()
    idiomatic_relabel: tuple[tuple[str, str], ...] = ()

    def partner(self, arg: str) -> Optional[str]:
        for a, b in self.pairs:
            if a == arg:
                return b
        return None

    def target(self, arg: str) -> str:
        return dict(self.targets).get(arg, arg)


@dataclass(frozen=True)
class Roleset:
    predicate_id: str
    definition: str
    args: tuple[ArgSpec, ...]
    kind: str = "lexical"
    token_slots: tuple[TokenSlot, ...] = ()
    mapping: Optional[MetaphorMapping] = None

    def arg(self, label: str) -> Optional[ArgSpec]:
        for a in self.args:
            if a.number == label:
                return a
        return None

    def arg_labels(self) -> list[str]:
        return [a.number for a in self.args]

    def letters_for(self, arg: str) -> list[TokenSlot]:
        return [t for t in self.token_slots if t.arg == arg]

    def token_slot(self, letter: str) -> Optional[TokenSlot]:
        for t in self.token_slots:
            if t.letter == letter:
                return t
        return None


@dataclass(frozen=True)
class TemplateSlot:
    name: str
    kind: str
    required: bool = False
    repeatable: bool = False


@dataclass(frozen=True)
class MorphTemplate:
    template_id: str
    slots: tuple[TemplateSlot, ...]


@dataclass(frozen=True)
class MorphEntry:
    form: str
    gloss: str
    allowed_slots: tuple[str, ...]
    pos_class: str = ""
    surface_variants: tuple[str, ...] = ()
    # pronominal index referents carried by an inflection, e.g. ("4", "3S")
    indexes: tuple[str, ...] = ()

    def surfaces(self) -> tuple[str, ...]:
        seen = [self.form]
        for v in self.surface_variants:
            if v not in seen:
                seen.append(v)
        return tuple(seen)


def classify_schematicity(cxn: Construction) -> str:
    """Derive a schematicity class from slot composition.

    Counts run over the slots of every variant so the result does not depend
    on variant order.  A frozen multiword anchor ("let alone") present in
    every variant marks the construction substantive even when schematic
    slots surround it.
    """
    slots = [s for v in cxn.variants for s in v.slots]
    n_sub = sum(1 for s in slots if s.substantive)
    n_sch = len(slots) - n_sub
    if n_sch == 0:
        return "substantive"
    if n_sub == 0:
        return "fully-schematic"
    if all(any(s.frozen_multiword for s in v.slots) for v in cxn.variants):
        return "substantive"
    if n_sub >= n_sch:
        return "partially-substantive"
    return "mostly-schematic"


def resolve_mapping(lexicon: "Lexicon", idiomatic_arg: str, mapping: MetaphorMapping) -> str:
    """Return the literal counterpart of ``idiomatic_arg``.

    The result is a literal arg label, or an implicit concept string such as
    ``"<arrow>"`` for participants the literal predicate entails without
    realizing.
    """
    partner = mapping.partner(idiomatic_arg)
    if partner is None:
        raise UnknownArg(f"{idiomatic_arg} has no pair in mapping to {mapping.literal_roleset}")
    if lexicon is not None and not is_implicit_ref(partner):
        lit = lexicon.rolesets.get(mapping.literal_roleset)
        if lit is not None and lit.arg(partner) is None:
            raise UnknownArg(f"{partner} is not an argument of {mapping.literal_roleset}")
    return partner


def identity_mapping(roleset: Roleset) -> MetaphorMapping:
    """A mapping of ``roleset`` onto itself, every arg paired with itself."""
    return MetaphorMapping(
        literal_roleset=roleset.predicate_id,
        pairs=tuple((a.number, a.number) for a in roleset.args if arg_number(a.number) is not None),
    )


def letters_string(letters: Iterable[str]) -> str:
    return "".join(sorted(set(letters)))
