"""Verb-word segmentation against an ordered slot template.

Words and morpheme forms are compared on a diacritic-free key (NFD with
combining marks dropped, lowercased), while every returned surface keeps the
original characters so the input can be rebuilt exactly.
"""
from __future__ import annotations

import re
import string
import unicodedata
from dataclasses import dataclass
from typing import Optional, Sequence

from .lexicon import Diagnostic
from .matcher import Token
from .model import PREVERB_KINDS, ConstructiconError, MorphEntry, MorphTemplate

DETACH_SUFFIX = "ini"
VOWELS = "aeiou"
LONG_VOWELS = ("aa", "ee", "ii", "oo", "uu")
_IC_RE = re.compile(r"^([^aeiou]*)([eo]n)(aa|ee|ii|oo|uu)")


class NoParse(ConstructiconError):
    pass


def fold(text: str) -> str:
    """Diacritic-free lowercase key; typographic apostrophes become ASCII."""
    text = text.replace("\u2019", "'")
    return "".join(c for c in unicodedata.normalize("NFD", text) if not unicodedata.combining(c)).lower()


def _raw_clusters(text: str) -> list[str]:
    """Original code points grouped as base character plus combining marks."""
    out: list[str] = []
    for ch in text:
        if unicodedata.combining(ch) and out:
            out[-1] += ch
        else:
            out.append(ch)
    return out


def _folded_clusters(text: str) -> tuple[list[str], list[str]]:
    cl = _raw_clusters(text)
    return cl, [fold(c) for c in cl]


@dataclass(frozen=True)
class InitialChange:
    infix: str  # "en" or "on"
    host: int  # piece (or source word) index carrying the infix
    position: int  # code-point offset of the infix within the host surface
    text: str = ""  # infix as written

    def to_json(self) -> dict:
        return {"infix": self.infix, "piece": self.host, "position": self.position}


@dataclass(frozen=True)
class Piece:
    slot: str
    entry: MorphEntry
    surface: str
    kind: str = ""


@dataclass(frozen=True)
class Segmentation:
    word: str
    pieces: tuple
    initial_change: Optional[InitialChange] = None

    @property
    def gloss_line(self) -> str:
        out = []
        for i, p in enumerate(self.pieces):
            g = p.entry.gloss
            if self.initial_change is not None and self.initial_change.host == i:
                g = "IC." + g
            out.append(g)
        return "-".join(out)

    def rank_key(self) -> tuple:
        return (len(self.pieces), tuple(p.slot for p in self.pieces))

    def reassemble(self) -> str:
        parts = []
        for i, p in enumerate(self.pieces):
            s = p.surface
            ic = self.initial_change
            if ic is not None and ic.host == i:
                s = s[: ic.position] + ic.text + s[ic.position :]
            parts.append(s)
        return "".join(parts)

    def identity(self) -> tuple:
        ic = None
        if self.initial_change:
            ic = (self.initial_change.infix, self.initial_change.host, self.initial_change.position)
        return (tuple((p.slot, p.entry, p.surface) for p in self.pieces), ic)

    def to_json(self) -> dict:
        return {
            "pieces": [{"slot": p.slot, "form": p.surface, "gloss": p.entry.gloss} for p in self.pieces],
            "gloss": self.gloss_line,
            "initial_change": self.initial_change.to_json() if self.initial_change else None,
        }


def strip_hyphens(word: str) -> str:
    return word.replace("-", "")


def find_initial_change(surface: str) -> Optional[tuple[int, int, str]]:
    """Locate an en/on infix breaking the first long vowel.

    Returns (start, end, tag) as code-point offsets into ``surface``.
    """
    cl, keys = _folded_clusters(surface)
    folded = "".join(keys)
    # keys are one character each unless a cluster folds to nothing
    if len(folded) != len(cl):
        return None
    m = _IC_RE.match(folded)
    if not m:
        return None
    k = len(m.group(1))
    start = len("".join(cl[:k]))
    end = len("".join(cl[: k + 2]))
    return start, end, m.group(2)


def strip_initial_change(piece_surface: str) -> tuple[str, Optional[str]]:
    found = find_initial_change(piece_surface)
    if found is None:
        return piece_surface, None
    s, e, tag = found
    return piece_surface[:s] + piece_surface[e:], tag


def insert_initial_change(base: str, infix: str) -> str:
    """Inverse of ``strip_initial_change`` for bases opening in a long vowel run."""
    cl, keys = _folded_clusters(base)
    k = 0
    while k < len(keys) and keys[k] not in VOWELS:
        k += 1
    pos = len("".join(cl[:k]))
    return base[:pos] + infix + base[pos:]


# ------------------------------------------------------------ segmentation


def _entry_index(morphemes: Sequence[MorphEntry]) -> list[tuple[str, MorphEntry]]:
    out = []
    for m in morphemes:
        for s in m.surfaces():
            key = fold(s)
            if key:
                out.append((key, m))
    return out


def segment_verb_word(
    word: str, lexicon, template: Optional[MorphTemplate] = None, limit: Optional[int] = None
) -> list[Segmentation]:
    if not word:
        raise NoParse("empty word")
    if template is None:
        template = lexicon.template()
    morphemes = lexicon.morphemes if hasattr(lexicon, "morphemes") else lexicon
    target = strip_hyphens(word)
    cl, keys = _folded_clusters(target)
    n = len(cl)
    index = _entry_index(morphemes)
    slots = template.slots
    results: dict = {}

    # candidates[(pos, kind)] -> [(end, entry, ic)] longest first
    def options(pos: int, kind: str, first: bool):
        out = []
        for key, entry in index:
            if kind not in entry.allowed_slots:
                continue
            L = len(key)
            if "".join(keys[pos : pos + L]) == key and pos + L <= n:
                out.append((pos + L, entry, None))
            if first:
                m = re.match(r"^([^aeiou]*)(aa|ee|ii|oo|uu)", key)
                if m:
                    k = len(m.group(1))
                    for tag in ("en", "on"):
                        ic_key = key[:k] + tag + key[k:]
                        if "".join(keys[pos : pos + L + 2]) == ic_key and pos + L + 2 <= n:
                            out.append((pos + L + 2, entry, (k, tag)))
        out.sort(key=lambda o: (-(o[0] - pos), o[1].form, o[1].gloss, o[2] is not None))
        return out

    def dfs(pos: int, j: int, used_here: bool, acc: list, ic):
        if pos == n:
            # every remaining required slot must already be filled
            for k in range(j + (1 if used_here else 0), len(slots)):
                if slots[k].required:
                    return
            seg = Segmentation(word=target, pieces=tuple(acc), initial_change=ic)
            results.setdefault(seg.identity(), seg)
            return
        for k in range(j, len(slots)):
            slot = slots[k]
            same = k == j
            if not (same and used_here and not slot.repeatable):
                for end, entry, icinfo in options(pos, slot.kind, not acc):
                    if icinfo is not None:
                        kk, tag = icinfo
                        host = cl[pos:end]
                        surf = "".join(host[:kk] + host[kk + 2 :])
                        new_ic = InitialChange(tag, 0, len("".join(host[:kk])), "".join(host[kk : kk + 2]))
                        acc.append(Piece(slot.name, entry, surf, slot.kind))
                        dfs(end, k, True, acc, new_ic)
                    else:
                        acc.append(Piece(slot.name, entry, "".join(cl[pos:end]), slot.kind))
                        dfs(end, k, True, acc, ic)
                    acc.pop()
            # moving past slot k: it must be satisfied
            if slot.required and not (same and used_here):
                return

    dfs(0, 0, False, [], None)
    if not results:
        raise NoParse(f"no segmentation covers {word!r}")
    ranked = sorted(results.values(), key=lambda s: (s.rank_key(), _entry_key(s)))
    return ranked[:limit] if limit else ranked


def _entry_key(seg: Segmentation) -> tuple:
    return tuple((p.entry.form, p.entry.gloss, p.surface) for p in seg.pieces)


def piece_letters(seg: Segmentation) -> list[tuple[str, int, Optional[str]]]:
    """Letter assignment: one letter per piece, one per index on inflections.

    Returns (letter, piece index, index referent or None).
    """
    out = []
    for i, p in enumerate(seg.pieces):
        if p.entry.indexes:
            for ref in p.entry.indexes:
                out.append((i, ref))
        else:
            out.append((i, None))
    return [(string.ascii_uppercase[k], i, ref) for k, (i, ref) in enumerate(out)]


def piece_tokens(seg: Segmentation) -> list[Token]:
    """Tokens for matching morphological constructions over a segmentation."""
    toks = []
    for k, (_, i, ref) in enumerate(piece_letters(seg)):
        p = seg.pieces[i]
        toks.append(Token(k, ref if ref is not None else p.surface, p.entry.form, p.kind or "ANY"))
    return toks


# ------------------------------------------------------------- detachment


@dataclass(frozen=True)
class LogicalWord:
    indices: tuple
    word: str
    initial_change: Optional[InitialChange] = None
    parts: tuple = ()  # base surface per source word


def _is_preverb(base: str, morphemes) -> bool:
    key = fold(base)
    for m in morphemes:
        if any(fold(s) == key for s in m.surfaces()) and PREVERB_KINDS & set(m.allowed_slots):
            return True
    return False


def _detached_base(word: str, morphemes):
    """(base, initial change) if ``word`` is a detached preverb, else None."""
    key = fold(word)
    if not key.endswith(DETACH_SUFFIX) or len(key) <= len(DETACH_SUFFIX):
        return None
    cl = _raw_clusters(word)
    base = "".join(cl[: len(cl) - len(DETACH_SUFFIX)])
    tries = []
    found = find_initial_change(base)
    if found is not None:
        s, e, tag = found
        tries.append((base[:s] + base[e:], (s, tag, base[s:e])))
    tries.append((base, None))
    for cand, ic in tries:
        for c in (_drop_h(cand), cand):
            if _is_preverb(c, morphemes):
                return c, ic
    return None


def _drop_h(base: str) -> str:
    key = fold(base)
    if len(key) > 1 and key[0] == "h" and key[1] in VOWELS:
        return "".join(_raw_clusters(base)[1:])
    return base


def reattach_detached(sentence_words: Sequence[str], lexicon) -> tuple[list[LogicalWord], list[Diagnostic]]:
    morphemes = lexicon.morphemes if hasattr(lexicon, "morphemes") else lexicon
    out: list[LogicalWord] = []
    diags: list[Diagnostic] = []
    pending: list = []

    def flush_pending(reason: str):
        for idx, _, _ in pending:
            out.append(LogicalWord((idx,), sentence_words[idx], None, (sentence_words[idx],)))
            diags.append(Diagnostic(f"words/{idx}", "DETACH_NO_HOST", "warning", reason))
        pending.clear()

    for i, w in enumerate(sentence_words):
        det = _detached_base(w, morphemes)
        if det is not None:
            pending.append((i, det[0], det[1]))
            continue
        if fold(w).endswith(DETACH_SUFFIX) and len(fold(w)) > len(DETACH_SUFFIX):
            flush_pending(f"detached element not followed by a verb word")
            out.append(LogicalWord((i,), w, None, (w,)))
            diags.append(
                Diagnostic(f"words/{i}", "DETACH_UNKNOWN_BASE", "warning", f"{w!r}: base is not a known preverb")
            )
            continue
        if not pending:
            out.append(LogicalWord((i,), w, None, (w,)))
            continue
        ic = None
        for k, (_, _, icinfo) in enumerate(pending):
            if icinfo is not None:
                ic = InitialChange(icinfo[1], k, icinfo[0], icinfo[2])
                break
        parts = tuple(b for _, b, _ in pending) + (w,)
        out.append(LogicalWord(tuple(idx for idx, _, _ in pending) + (i,), "".join(parts), ic, parts))
        pending.clear()
    if pending:
        flush_pending("detached element at end of sentence")
    out.sort(key=lambda lw: lw.indices[0])
    return out, diags


# ----------------------------------------------------- stem constructions

# Table of productive noun-incorporation stem constructions: slot A (initial)
# and slot B (medial or concrete final) pos classes.
STEM_CONSTRUCTIONS = {
    "mode-of-action": ({"INI.manner"}, {"FIN.action"}),
    "instrumental": ({"INI.action"}, {"FIN.implement"}),
    "patient-undergoer": ({"INI.action"}, {"MED.patient"}),
    "body-part": ({"INI.condition"}, {"MED.body-part"}),
    "topic": ({"INI.condition"}, {"FIN.natural"}),
    "sensation": ({"INI.experiential"}, {"FIN.sensory"}),
}
DERIVATIONAL_CLASSES = {"AI"}


@dataclass(frozen=True)
class StemAnalysis:
    stem: str
    cxn: str
    initial: MorphEntry
    final: MorphEntry
    derivational_final: Optional[MorphEntry] = None
    surfaces: tuple = ()

    def reassemble(self) -> str:
        return "".join(self.surfaces)

    def to_json(self) -> dict:
        d = {
            "stem": self.stem,
            "cxn": self.cxn,
            "initial": {"form": self.surfaces[0], "gloss": self.initial.gloss},
            "final": {"form": self.surfaces[1], "gloss": self.final.gloss},
        }
        if self.derivational_final is not None:
            d["derivational_final"] = {"form": self.surfaces[2], "gloss": self.derivational_final.gloss}
        return d


def stem_analyze(stem: str, lexicon) -> list[StemAnalysis]:
    morphemes = lexicon.morphemes if hasattr(lexicon, "morphemes") else lexicon
    target = stem.replace("-", "").replace("<", "").replace(">", "")
    if not target:
        raise NoParse("empty stem")
    cl, keys = _folded_clusters(target)
    n = len(cl)
    index = _entry_index(morphemes)
    initial_classes = set().union(*(a for a, _ in STEM_CONSTRUCTIONS.values()))
    final_classes = set().union(*(b for _, b in STEM_CONSTRUCTIONS.values()))

    def at(pos: int, classes):
        for key, e in index:
            if e.pos_class in classes and "".join(keys[pos : pos + len(key)]) == key and pos + len(key) <= n:
                yield pos + len(key), e

    out = {}
    for a_end, a in at(0, initial_classes):
        for b_end, b in at(a_end, final_classes):
            tails = [(b_end, None)] if b_end == n else []
            tails += [(d_end, d) for d_end, d in at(b_end, DERIVATIONAL_CLASSES) if d_end == n]
            for end, d in tails:
                surfaces = ("".join(cl[:a_end]), "".join(cl[a_end:b_end])) + (
                    ("".join(cl[b_end:end]),) if d is not None else ()
                )
                for name, (aa, bb) in STEM_CONSTRUCTIONS.items():
                    if a.pos_class in aa and b.pos_class in bb:
                        sa = StemAnalysis(target, name, a, b, d, surfaces)
                        out[(name, surfaces, a, b, d)] = sa
    if not out:
        raise NoParse(f"{stem!r} is atomic (a single lexicalized unit)")
    return sorted(out.values(), key=lambda s: (s.cxn, s.surfaces, s.initial.gloss, s.final.gloss))
