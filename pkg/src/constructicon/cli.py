"""Command-line entry point: ``cxn <subcommand> ...``.

Data goes to stdout (or ``-o``), diagnostics to stderr.  Exit codes:
0 success, 1 validation or domain failure, 2 usage error, 3 I/O or
transport failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from typing import Optional

from . import __version__
from . import probe as probe_mod
from .graphs import MappingError, MissingRoleset, idiomatic_graph, literal_graph, realize, serialize_graph
from .lexicon import Diagnostic, LexiconSyntaxError, SchemaError, load_lexicon, validate
from .matcher import MatchSpan, annotate, annotate_corpus, make_sentence, read_corpus, sentence_record
from .morpho import InitialChange, NoParse, piece_letters, piece_tokens, reattach_detached, segment_verb_word

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def _warn(diag: Diagnostic) -> None:
    print(diag.render(), file=sys.stderr)


def _require(*paths) -> None:
    for p in paths:
        if p is not None and not os.path.exists(p):
            raise UsageError(f"no such file: {p}")


def _read_text(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(lines, out: Optional[str]) -> None:
    text = "".join(line + "\n" for line in lines)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _lexicon(args):
    _require(args.lexicon)
    lex = load_lexicon(args.lexicon, lax=getattr(args, "lax", False))
    errors = [d for d in validate(lex) if d.severity == "error"]
    if errors and args.command != "validate":
        for d in errors:
            _warn(d)
        raise _DomainFailure(f"{args.lexicon}: lexicon has {len(errors)} error(s)")
    return lex


class _DomainFailure(Exception):
    pass


# ---------------------------------------------------------------- commands


def cmd_validate(args) -> int:
    lex = _lexicon(args)
    diags = validate(lex)
    for d in diags:
        _warn(d)
    return EXIT_DOMAIN if any(d.severity == "error" for d in diags) else EXIT_OK


def cmd_annotate(args) -> int:
    _require(args.corpus)
    lex = _lexicon(args)
    sentences = read_corpus(_read_text(args.corpus))
    results = annotate_corpus(lex, sentences, args.gap_limit, args.jobs)
    lines = [_dumps(sentence_record(lex, i, s, ms)) for i, (s, ms) in enumerate(zip(sentences, results))]
    _emit(lines, args.out)
    return EXIT_OK


def _ic_piece(seg, lw) -> Optional[InitialChange]:
    """Move a logical word's initial change onto the piece it belongs to."""
    ic = lw.initial_change
    if ic is None:
        return None
    offset = sum(len(p) for p in lw.parts[: ic.host])
    pos = 0
    for i, p in enumerate(seg.pieces):
        if pos == offset:
            return InitialChange(ic.infix, i, ic.position, ic.text)
        pos += len(p.surface)
    return None


def _segment_line(lex, line: str, limit):
    """Record plus error flag for one input line."""
    words = line.split()
    if len(words) == 1:
        try:
            parses = segment_verb_word(words[0], lex, limit=limit)
            return {"word": words[0], "parses": [s.to_json() for s in parses]}, False
        except NoParse as e:
            _warn(Diagnostic(f"words/{words[0]}", "NO_PARSE", "error", str(e)))
            return {"word": words[0], "parses": []}, True
    logical, diags = reattach_detached(words, lex)
    for d in diags:
        _warn(d)
    failed = False
    out = []
    for lw in logical:
        try:
            segs = segment_verb_word(lw.word, lex, limit=limit)
            segs = [replace(s, initial_change=_ic_piece(s, lw) or s.initial_change) for s in segs]
            parses = [s.to_json() for s in segs]
        except NoParse:
            parses = []
            if len(lw.indices) > 1:
                failed = True
        out.append(
            {
                "indices": list(lw.indices),
                "word": lw.word,
                "initial_change": lw.initial_change.to_json() if lw.initial_change else None,
                "parses": parses,
            }
        )
    rec = {"words": words, "logical": out, "diagnostics": [d.to_json() for d in diags]}
    return rec, failed


def cmd_segment(args) -> int:
    _require(args.words)
    lex = _lexicon(args)
    lines, failed = [], False
    for raw in _read_text(args.words).splitlines():
        if not raw.strip():
            continue
        rec, bad = _segment_line(lex, raw.strip(), args.limit)
        failed = failed or bad
        lines.append(_dumps(rec))
    _emit(lines, args.out)
    return EXIT_DOMAIN if failed else EXIT_OK


def _span_from_record(m: dict) -> MatchSpan:
    return MatchSpan(
        cxn_id=m["cxn"],
        variant_id=m["variant"],
        assignments=tuple((sid, (r[0], r[1])) for sid, r in m["slots"].items()),
        roles=tuple((a, tuple((r[0], r[1]) for r in rs)) for a, rs in sorted(m["roles"].items())),
        rel_tokens=frozenset(m.get("anchors", ())),
        ambiguous_literal=bool(m.get("ambiguous_literal")),
        predicate=m.get("predicate", ""),
        lv_tokens=frozenset(m.get("lv", ())),
        relation=tuple(m["relation"]) if m.get("relation") else None,
    )


def graph_record(lex, match_id: str, match: MatchSpan, tokens, glosses=None, referents=None) -> dict:
    cxn = lex.constructions[match.cxn_id]
    rs = lex.rolesets.get(cxn.meaning)
    if match.relation is not None and match.predicate in lex.rolesets:
        rs = lex.rolesets[match.predicate]
    diags: list = []
    literal = idiomatic = None
    if rs is None:
        diags.append(Diagnostic(f"matches/{match_id}", "MISSING_ROLESET", "error", f"{cxn.meaning} not in lexicon"))
    else:
        real = realize(match, tokens, glosses, referents)
        try:
            g, d = literal_graph(real, rs, lex, match)
            literal = serialize_graph(g)
            diags += d
            if rs.mapping is not None:
                g, d = idiomatic_graph(real, rs, lex, match)
                idiomatic = serialize_graph(g)
                diags += d
        except (MissingRoleset, MappingError) as e:
            code = "MISSING_ROLESET" if isinstance(e, MissingRoleset) else "MAPPING_ERROR"
            diags.append(Diagnostic(f"matches/{match_id}", code, "error", str(e)))
    return {
        "match_id": match_id,
        "predicate": match.predicate,
        "literal": literal,
        "idiomatic": idiomatic,
        "diagnostics": [d.to_json() for d in sorted(set(diags))],
    }


def _morph_matches(lex, seg):
    """Matches of morphological constructions over one segmentation."""
    toks = piece_tokens(seg)
    glosses = [None if ref is not None else seg.pieces[i].entry.gloss for _, i, ref in piece_letters(seg)]
    morph = {
        k: c
        for k, c in lex.constructions.items()
        if lex.rolesets.get(c.meaning) is not None and lex.rolesets[c.meaning].kind == "morphological"
    }
    return toks, glosses, annotate(replace(lex, constructions=morph), toks)


def cmd_graph(args) -> int:
    _require(args.annotations)
    lex = _lexicon(args)
    lines, failed = [], False
    for n, raw in enumerate(_read_text(args.annotations).splitlines()):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise _DomainFailure(f"{args.annotations}:{n + 1}: {e.msg}") from None
        for out in graph_records(lex, rec, n):
            failed = failed or any(d["severity"] == "error" for d in out["diagnostics"])
            lines.append(_dumps(out))
    _emit(lines, args.out)
    return EXIT_DOMAIN if failed else EXIT_OK


def graph_records(lex, rec: dict, n: int):
    if "matches" in rec:
        tokens = make_sentence(rec["tokens"])
        sid = rec.get("sentence", n)
        for k, m in enumerate(rec["matches"]):
            yield graph_record(lex, f"s{sid}.m{k}", _span_from_record(m), tokens, None, m.get("referents"))
        return
    words = [rec["word"]] if "word" in rec else [lw["word"] for lw in rec.get("logical", [])]
    referents = rec.get("referents")
    for w_i, word in enumerate(words):
        try:
            seg = segment_verb_word(word, lex, limit=1)[0]
        except NoParse:
            continue
        toks, glosses, matches = _morph_matches(lex, seg)
        for k, m in enumerate(matches):
            yield graph_record(lex, f"w{n}.{w_i}.m{k}", m, toks, glosses, referents)


def cmd_probe_run(args) -> int:
    _require(args.probes)
    probes = probe_mod.load_probes(args.probes)
    if args.provider == "stub":
        provider = probe_mod.StubProvider(args.stub_reply, provider_id=args.responder or "stub")
    else:
        if not args.endpoint or not args.model:
            raise UsageError("--provider http needs --endpoint and --model")
        provider = probe_mod.HttpProvider(args.endpoint, args.model, provider_id=args.responder)
    transcripts = probe_mod.run(
        provider, probes, args.concurrency, params={"temperature": args.temperature}
    )
    _emit([_dumps(t.to_json()) for t in transcripts], args.out)
    failed = [t for t in transcripts if t.error]
    if failed:
        print(f"cxn: {len(failed)} of {len(transcripts)} requests failed: {failed[0].error}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_probe_score(args) -> int:
    _require(args.gold, *args.transcripts)
    probes = probe_mod.load_probes(args.gold)
    by = {}
    for path in args.transcripts:
        name = os.path.splitext(os.path.basename(path))[0]
        if name in by:
            raise UsageError(f"two transcript files named {name!r}")
        by[name] = probe_mod.load_transcripts(path)
    humans = [h for h in (args.humans or "").split(",") if h]
    report = probe_mod.score(probes, by, humans)
    if args.figures:
        from .plotting import write_figures

        report["figures"] = [os.path.basename(p) for p in write_figures(report, args.figures)]
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    with open(args.report, "w", encoding="utf-8") as fh:
        fh.write(text)
    for name, r in sorted(report["responders"].items()):
        print(f"{name}\taccuracy={r['accuracy']:.2f}\t({r['correct']}/{r['total']})")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _version(p: argparse.ArgumentParser) -> None:
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cxn", description="Constructicon engine and MWE probe harness.")
    _version(ap)
    sub = ap.add_subparsers(dest="command", required=True)

    def lexicon_cmd(name, help_):
        p = sub.add_parser(name, help=help_)
        _version(p)
        p.add_argument("lexicon", help="lexicon JSON file")
        p.add_argument("--lax", action="store_true", help="ignore unknown keys inside objects")
        return p

    lexicon_cmd("validate", "check a lexicon file").set_defaults(func=cmd_validate)

    p = lexicon_cmd("annotate", "detect constructions in a tokenized corpus")
    p.add_argument("corpus", help="FORM<TAB>LEMMA<TAB>POS corpus, blank line between sentences")
    p.add_argument("--gap-limit", type=int, default=None, help="override every construction's gap limit")
    p.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("-o", "--out", help="output JSON-lines file (default stdout)")
    p.set_defaults(func=cmd_annotate)

    p = lexicon_cmd("segment", "segment verb-words, one per line")
    p.add_argument("words", help="file with one word (or detached word group) per line")
    p.add_argument("--limit", type=int, default=None, help="keep at most N parses per word")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_segment)

    p = lexicon_cmd("graph", "emit literal and idiomatic graphs for matches")
    p.add_argument("annotations", help="annotate or segment JSON-lines output")
    p.add_argument("-o", "--out")
    p.set_defaults(func=cmd_graph)

    pp = sub.add_parser("probe", help="novel-MWE probe harness")
    _version(pp)
    psub = pp.add_subparsers(dest="probe_command", required=True)

    r = psub.add_parser("run", help="send probes to a completion provider")
    _version(r)
    r.add_argument("--probes", required=True, help="probe JSON-lines file")
    r.add_argument("--provider", choices=("stub", "http"), default="stub")
    r.add_argument("--endpoint", help="base URL of a chat-completions API")
    r.add_argument("--model", help="model name sent to the endpoint")
    r.add_argument("--concurrency", type=int, default=1)
    r.add_argument("--temperature", type=float, default=0.0)
    r.add_argument("--responder", help="provider id recorded in transcripts")
    r.add_argument("--stub-reply", default="C\nExplanation: stub reply.", help="fixed reply of the stub provider")
    r.add_argument("--out", required=True, help="transcript JSON-lines file")
    r.set_defaults(func=cmd_probe_run)

    s = psub.add_parser("score", help="score transcripts against gold")
    _version(s)
    s.add_argument("--gold", required=True, help="probe JSON-lines file")
    s.add_argument("--transcripts", nargs="+", required=True, help="one file per responder")
    s.add_argument("--humans", help="comma-separated responder names forming the gold majority")
    s.add_argument("--report", required=True, help="report JSON file")
    s.add_argument("--figures", help="directory for PNG figures")
    s.set_defaults(func=cmd_probe_score)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"cxn: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except probe_mod.ConfigError as e:
        print(f"cxn: configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (LexiconSyntaxError, SchemaError) as e:
        print(f"cxn: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (_DomainFailure, probe_mod.ProbeError) as e:
        print(f"cxn: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as e:
        print(f"cxn: I/O error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
