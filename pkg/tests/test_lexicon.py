import json
import random

import pytest
from hypothesis import HealthCheck, given, settings

from constructicon.lexicon import (
    Lexicon,
    LexiconSyntaxError,
    SchemaError,
    ValidationError,
    lexicon_document,
    load_lexicon,
    parse_lexicon,
    serialize_lexicon,
    validate,
)
from conftest import fixture_path
from strategies import lexicons

EMPTY = b'{"version":"1","constructions":{},"rolesets":{}}'


def doc(lex):
    return json.loads(serialize_lexicon(lex, check=False))


def test_fixture_counts(paper_lexicon):
    kinds = [rs.kind for rs in paper_lexicon.rolesets.values()]
    assert kinds.count("mwe") == 2
    assert {"catch-01", "contract-04", "interest-01"} <= set(paper_lexicon.rolesets)
    assert paper_lexicon.rolesets["catch-bug-01"].definition == "become sick"
    assert paper_lexicon.rolesets["catch-bug-02"].definition == "become fervently interested in"


def test_fixture_validates_clean(paper_lexicon):
    assert validate(paper_lexicon) == []


def test_empty_document():
    lex = parse_lexicon(EMPTY)
    assert lex == Lexicon({}, {}, (), (), "1")
    assert serialize_lexicon(lex) == b'{\n  "constructions": {},\n  "rolesets": {},\n  "version": "1"\n}\n'


def test_duplicate_id_names_both_locations():
    text = (
        '{"version": "1", "constructions": {},\n'
        ' "rolesets": {"a-01": {"definition": "", "args": []},\n'
        '              "a-01": {"definition": "", "args": []}}}'
    )
    with pytest.raises(SchemaError) as e:
        parse_lexicon(text)
    assert e.value.locations == ((2, 15), (3, 15))
    assert "line 2" in str(e.value) and "line 3" in str(e.value)


def test_syntax_error_position():
    with pytest.raises(LexiconSyntaxError) as e:
        parse_lexicon('{"version": "1",\n  "rolesets": {,}}')
    assert (e.value.line, e.value.col) == (2, 16)


@pytest.mark.parametrize(
    "patch",
    [
        lambda d: d.update(extra=1),
        lambda d: d["rolesets"]["catch-01"].update(bogus=True),
        lambda d: d["rolesets"]["catch-01"].update(args="nope"),
        lambda d: d.update(version="2"),
    ],
)
def test_schema_errors(paper_lexicon, patch):
    d = lexicon_document(paper_lexicon)
    patch(d)
    with pytest.raises(SchemaError):
        parse_lexicon(json.dumps(d))


def test_lax_ignores_unknown_nested_keys(paper_lexicon):
    d = lexicon_document(paper_lexicon)
    d["rolesets"]["catch-01"]["bogus"] = True
    assert parse_lexicon(json.dumps(d), lax=True) == paper_lexicon


def codes(lex):
    return {d.code for d in validate(lex) if d.severity == "error"}


def test_mapping_dangling(paper_lexicon):
    d = lexicon_document(paper_lexicon)
    d["rolesets"]["catch-bug-01"]["mapping"]["literal"] = "nothing-01"
    assert "MAPPING_DANGLING" in codes(parse_lexicon(json.dumps(d)))


def test_token_slots_missing(paper_lexicon):
    d = lexicon_document(paper_lexicon)
    del d["rolesets"]["catch-bug-01"]["token_slots"]
    assert "TOKEN_SLOTS_MISSING" in codes(parse_lexicon(json.dumps(d)))


def test_mapping_incomplete_and_out_of_range(paper_lexicon):
    d = lexicon_document(paper_lexicon)
    d["rolesets"]["catch-bug-01"]["mapping"]["pairs"] = [["ARG1", "ARG0"], ["ARG9", "ARG1"]]
    got = codes(parse_lexicon(json.dumps(d)))
    assert {"MAPPING_INCOMPLETE", "ARG_OUT_OF_RANGE"} <= got


def test_slot_invariants(paper_lexicon):
    d = lexicon_document(paper_lexicon)
    slots = d["constructions"]["catch_up-04"]["variants"][0]["slots"]
    slots[0]["min"], slots[0]["max"] = 3, 2
    slots[1]["category"] = "NP"
    slots[2]["lv"] = True
    slots[2]["role"] = "ARG1"
    got = codes(parse_lexicon(json.dumps(d)))
    assert {"TOKEN_BOUNDS_INVALID", "CATEGORY_ON_SUBSTANTIVE", "LV_INVALID"} <= got


def test_schematicity_mismatch(paper_lexicon):
    d = lexicon_document(paper_lexicon)
    d["constructions"]["conative-91"]["schematicity"] = "substantive"
    assert "SCHEMATICITY_MISMATCH" in codes(parse_lexicon(json.dumps(d)))


def test_serialize_refuses_invalid(paper_lexicon):
    d = lexicon_document(paper_lexicon)
    d["constructions"]["catch_up-04"]["meaning"] = "ghost-01"
    with pytest.raises(ValidationError):
        serialize_lexicon(parse_lexicon(json.dumps(d)))


def test_fixture_roundtrip_and_canonical(paper_lexicon):
    data = serialize_lexicon(paper_lexicon)
    assert data.endswith(b"\n")
    assert parse_lexicon(data) == paper_lexicon
    assert serialize_lexicon(parse_lexicon(data)) == data
    assert load_lexicon(fixture_path("paper.lexicon.json")) == paper_lexicon


def test_validation_independent_of_map_order(paper_lexicon):
    d = lexicon_document(paper_lexicon)
    d["rolesets"]["catch-bug-01"]["mapping"]["literal"] = "nothing-01"
    d["constructions"]["take-lvc"]["meaning"] = "nothing-02"
    base = validate(parse_lexicon(json.dumps(d)))
    rnd = random.Random(3)
    for _ in range(5):
        for key in ("constructions", "rolesets"):
            items = list(d[key].items())
            rnd.shuffle(items)
            d[key] = dict(items)
        assert validate(parse_lexicon(json.dumps(d))) == base
    assert base == sorted(base)


@settings(max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(lexicons())
def test_roundtrip_random_lexicons(lex):
    data = serialize_lexicon(lex)
    back = parse_lexicon(data)
    assert back == lex
    assert serialize_lexicon(back) == data
