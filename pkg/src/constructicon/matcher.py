"""Gappy slot matching of constructions over tokenized sentences."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence

from .model import Construction, Slot, SlotPattern

DEFAULT_MAX_TOKENS = 8

# first-token pos accepted by each phrase category
PHRASE_FIRST = {
    "NP": {"DET", "N", "PRON", "ADJ", "NUM"},
    "PP": {"ADP"},
    "VP": {"V", "AUX", "PART"},
    "ADJP": {"ADJ"},
    "ADVP": {"ADV"},
}
NOMINAL_HEADS = {"N", "PRON", "NUM"}
NP_LEFT_BLOCK = {"DET", "ADJ", "N", "PRON", "NUM"}
NP_RIGHT_BLOCK = {"N", "ADJ", "NUM"}
WORD_CATEGORIES = {"N", "V", "DET"}


@dataclass(frozen=True)
class Token:
    index: int
    surface: str
    lemma: str = ""
    pos: str = "ANY"

    def __post_init__(self):
        if not self.lemma:
            object.__setattr__(self, "lemma", self.surface.lower())

    @property
    def tag(self) -> str:
        return self.pos.split("|", 1)[0]

    @property
    def features(self) -> frozenset:
        parts = self.pos.split("|")
        return frozenset(parts[1:])

    def is_(self, tags) -> bool:
        return self.tag == "ANY" or self.tag in tags


def make_sentence(rows: Iterable) -> list[Token]:
    """Tokens from (form, lemma?, pos?) tuples or bare strings."""
    out = []
    for i, row in enumerate(rows):
        if isinstance(row, str):
            row = (row,)
        form = row[0]
        lemma = row[1] if len(row) > 1 and row[1] else ""
        pos = row[2] if len(row) > 2 and row[2] else "ANY"
        out.append(Token(i, form, lemma, pos))
    return out


def read_corpus(text: str) -> list[list[Token]]:
    """Sentences from the tab-separated FORM/LEMMA/POS format."""
    sentences, rows = [], []
    for line in text.splitlines():
        if not line.strip():
            if rows:
                sentences.append(make_sentence(rows))
                rows = []
            continue
        rows.append(tuple(line.rstrip("\r").split("\t")))
    if rows:
        sentences.append(make_sentence(rows))
    return sentences


Range = tuple  # (start, end) inclusive


@dataclass(frozen=True)
class MatchSpan:
    cxn_id: str
    variant_id: str
    assignments: tuple  # ((slot_id, (start, end)), ...) in variant slot order
    roles: tuple = ()  # ((arg, ((start, end), ...)), ...) sorted by arg
    rel_tokens: frozenset = frozenset()
    ambiguous_literal: bool = False
    predicate: str = ""
    lv_tokens: frozenset = frozenset()
    relation: Optional[tuple] = None

    @property
    def start(self) -> int:
        return min(r[0] for _, r in self.assignments)

    @property
    def end(self) -> int:
        return max(r[1] for _, r in self.assignments)

    def tokens(self) -> frozenset:
        return frozenset(i for _, (s, e) in self.assignments for i in range(s, e + 1))

    def slot_range(self, slot_id: str) -> Optional[tuple]:
        for sid, r in self.assignments:
            if sid == slot_id:
                return r
        return None

    def role_map(self) -> dict:
        return {a: list(rs) for a, rs in self.roles}

    def score_key(self) -> tuple:
        n_assigned = sum(e - s + 1 for _, (s, e) in self.assignments)
        return (
            -len(self.rel_tokens),
            n_assigned,
            self.start,
            self.cxn_id,
            self.variant_id,
            tuple(r for _, r in self.assignments),
        )


# ------------------------------------------------------------ slot fitting


def _substantive_fits(slot: Slot, sent: Sequence[Token], s: int, e: int) -> bool:
    n = e - s + 1
    for seq in slot.form_sequences():
        if len(seq) != n:
            continue
        if all(sent[s + k].lemma.lower() == w or sent[s + k].surface.lower() == w for k, w in enumerate(seq)):
            return True
    return False


def token_bounds(slot: Slot) -> tuple[int, int]:
    lo = slot.min_tokens if slot.min_tokens is not None else 1
    if slot.max_tokens is not None:
        hi = slot.max_tokens
    elif slot.min_tokens is not None:
        hi = max(lo, DEFAULT_MAX_TOKENS)
    else:
        hi = DEFAULT_MAX_TOKENS
    return lo, hi


def _schematic_fits(slot: Slot, sent: Sequence[Token], s: int, e: int) -> bool:
    lo, hi = token_bounds(slot)
    n = e - s + 1
    if not lo <= n <= hi:
        return False
    span = sent[s : e + 1]
    if any(t.tag == "PUNCT" for t in span):
        return False
    first, last = span[0], span[-1]
    if slot.feature and not (first.tag == "ANY" or slot.feature in first.features):
        return False
    cat = slot.category
    prev = sent[s - 1] if s > 0 else None
    nxt = sent[e + 1] if e + 1 < len(sent) else None
    if cat == "ANY":
        return True
    if cat in WORD_CATEGORIES:
        return all(t.is_({cat}) for t in span)
    if cat == "CLAUSE":
        return nxt is None or nxt.tag == "PUNCT"
    if cat not in PHRASE_FIRST or not first.is_(PHRASE_FIRST[cat]):
        return False
    if cat in ("NP", "PP"):
        if not last.is_(NOMINAL_HEADS):
            return False
        if cat == "NP" and prev is not None and prev.tag in NP_LEFT_BLOCK:
            return False
        if nxt is not None and (nxt.tag in NP_RIGHT_BLOCK or nxt.lemma.lower() == "of"):
            return False
    return True


def slot_fits(slot: Slot, sent: Sequence[Token], s: int, e: int) -> bool:
    """Whether tokens s..e (inclusive) can fill ``slot``."""
    if s < 0 or e >= len(sent) or s > e:
        return False
    if slot.substantive:
        return _substantive_fits(slot, sent, s, e)
    return _schematic_fits(slot, sent, s, e)


def slot_spans(slot: Slot, sent: Sequence[Token], start: int) -> list[tuple]:
    if slot.substantive:
        lengths = sorted({len(q) for q in slot.form_sequences()})
    else:
        lo, hi = token_bounds(slot)
        lengths = range(lo, hi + 1)
    return [(start, start + n - 1) for n in lengths if slot_fits(slot, sent, start, start + n - 1)]


def gap_size(sent: Sequence[Token], after: int, before: int) -> int:
    """Non-punctuation tokens strictly between positions ``after`` and ``before``."""
    return sum(1 for i in range(after + 1, before) if sent[i].tag != "PUNCT")


# ---------------------------------------------------------------- matching


def _build_span(cxn: Construction, v: SlotPattern, ranges: list) -> MatchSpan:
    roles: dict[str, list] = {}
    rel = set()
    lv = set()
    for slot, (s, e) in zip(v.slots, ranges):
        if slot.substantive:
            rel.update(range(s, e + 1))
        if slot.lv_marker:
            lv.update(range(s, e + 1))
        if slot.role_binding:
            roles.setdefault(slot.role_binding, []).append((s, e))
    merged = []
    for arg in sorted(roles):
        spans = sorted(roles[arg])
        out = [spans[0]]
        for s, e in spans[1:]:
            if s == out[-1][1] + 1:
                out[-1] = (out[-1][0], e)
            else:
                out.append((s, e))
        merged.append((arg, tuple(out)))
    return MatchSpan(
        cxn_id=cxn.cxn_id,
        variant_id=v.variant_id,
        assignments=tuple((sl.slot_id, r) for sl, r in zip(v.slots, ranges)),
        roles=tuple(merged),
        rel_tokens=frozenset(rel),
        predicate=cxn.meaning,
        lv_tokens=frozenset(lv),
    )


def match_construction(
    cxn: Construction, sentence: Sequence[Token], gap_limit: Optional[int] = None
) -> list[MatchSpan]:
    """All candidate matches of every variant of ``cxn``."""
    gap = cxn.gap_limit if gap_limit is None else gap_limit
    n = len(sentence)
    found = []
    for v in cxn.variants:
        slots = v.slots
        if not slots:
            continue

        def extend(i: int, prev_end: int, acc: list):
            if i == len(slots):
                found.append(_build_span(cxn, v, list(acc)))
                return
            if i == 0:
                starts = range(n)
            else:
                starts = []
                p = prev_end + 1
                while p < n and gap_size(sentence, prev_end, p) <= gap:
                    starts.append(p)
                    p += 1
            for p in starts:
                for span in slot_spans(slots[i], sentence, p):
                    acc.append(span)
                    extend(i + 1, span[1], acc)
                    acc.pop()

        extend(0, -1, [])
    found.sort(key=lambda m: (m.start, m.cxn_id, m.variant_id, tuple(r for _, r in m.assignments)))
    return found


def _eventive_slot(v: SlotPattern) -> Optional[Slot]:
    schematic = [s for s in v.slots if not s.substantive]
    return schematic[-1] if schematic else None


def detect_lvc(sentence: Sequence[Token], lexicon, gap_limit: Optional[int] = None) -> list[MatchSpan]:
    out = []
    for cid in sorted(lexicon.constructions):
        cxn = lexicon.constructions[cid]
        if not cxn.is_lvc:
            continue
        excluded = {x.lower() for x in cxn.exclude}
        for m in match_construction(cxn, sentence, gap_limit):
            slot = _eventive_slot(next(v for v in cxn.variants if v.variant_id == m.variant_id))
            if slot is None:
                continue
            s, e = m.slot_range(slot.slot_id)
            noun = sentence[e].lemma.lower()
            if noun in excluded:
                continue
            pred = f"{noun}-01" if f"{noun}-01" in lexicon.rolesets else cxn.meaning
            out.append(replace(m, relation=(s, e), predicate=pred))
    return out


def resolve_overlaps(candidates: Iterable[MatchSpan]) -> list[MatchSpan]:
    """Greedy selection of token-disjoint matches in score order."""
    chosen, used = [], set()
    for m in sorted(set(candidates), key=MatchSpan.score_key):
        toks = m.tokens()
        if toks & used:
            continue
        chosen.append(m)
        used |= toks
    chosen.sort(key=lambda m: (m.start, m.cxn_id, m.variant_id))
    return chosen


def candidates(lexicon, sentence: Sequence[Token], gap_limit: Optional[int] = None) -> list[MatchSpan]:
    out = []
    for cid in sorted(lexicon.constructions):
        cxn = lexicon.constructions[cid]
        if cxn.is_lvc:
            continue
        out.extend(match_construction(cxn, sentence, gap_limit))
    out.extend(detect_lvc(sentence, lexicon, gap_limit))
    return out


def annotate(lexicon, sentence: Sequence[Token], gap_limit: Optional[int] = None) -> list[MatchSpan]:
    """Selected matches for one sentence, each tagged with its predicate."""
    selected = resolve_overlaps(candidates(lexicon, sentence, gap_limit))
    out = []
    for m in selected:
        rs = lexicon.rolesets.get(lexicon.constructions[m.cxn_id].meaning)
        amb = rs is not None and rs.mapping is not None
        out.append(replace(m, ambiguous_literal=amb))
    return out


def annotate_corpus(lexicon, sentences: Sequence, gap_limit: Optional[int] = None, jobs: int = 1) -> list:
    if jobs <= 1:
        return [annotate(lexicon, s, gap_limit) for s in sentences]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(lambda s: annotate(lexicon, s, gap_limit), sentences))


def rel_letters(lexicon, m: MatchSpan) -> list[int]:
    """Token indices of slots the roleset marks as ``rel``."""
    cxn = lexicon.constructions[m.cxn_id]
    rs = lexicon.rolesets.get(cxn.meaning)
    if rs is None or not rs.token_slots:
        return sorted(m.rel_tokens - m.lv_tokens)
    out = set()
    for sid, (s, e) in m.assignments:
        t = rs.token_slot(sid)
        if t is not None and t.role == "rel":
            out.update(range(s, e + 1))
    return sorted(out)


def match_record(lexicon, m: MatchSpan, sentence: Sequence[Token]) -> dict:
    def text(s, e):
        return " ".join(t.surface for t in sentence[s : e + 1])

    rec = {
        "cxn": m.cxn_id,
        "variant": m.variant_id,
        "predicate": m.predicate,
        "slots": {sid: [s, e] for sid, (s, e) in m.assignments},
        "fillers": {sid: text(s, e) for sid, (s, e) in m.assignments},
        "roles": {a: [[s, e] for s, e in rs] for a, rs in m.roles},
        "role_text": {a: [text(s, e) for s, e in rs] for a, rs in m.roles},
        "anchors": sorted(m.rel_tokens),
        "rel": rel_letters(lexicon, m),
        "lv": sorted(m.lv_tokens),
        "relation": list(m.relation) if m.relation else None,
        "ambiguous_literal": m.ambiguous_literal,
    }
    return rec


def sentence_record(lexicon, index: int, sentence: Sequence[Token], matches: Sequence[MatchSpan]) -> dict:
    return {
        "sentence": index,
        "tokens": [[t.surface, t.lemma, t.pos] for t in sentence],
        "matches": [match_record(lexicon, m, sentence) for m in matches],
    }
