import pytest
from hypothesis import given, strategies as st

from constructicon.model import (
    ArgSpec,
    Construction,
    MetaphorMapping,
    Roleset,
    Slot,
    SlotPattern,
    UnknownArg,
    arg_number,
    classify_schematicity,
    identity_mapping,
    is_implicit_ref,
    is_valid_arg_label,
    letters_string,
    resolve_mapping,
)


def sub(i, form="x"):
    return Slot(i, "substantive", surface_forms=(form,))


def sch(i, cat="NP", role=None):
    return Slot(i, "schematic", category=cat, role_binding=role)


def cxn(*variants):
    return Construction("c", tuple(SlotPattern(f"v{k}", tuple(v)) for k, v in enumerate(variants)), "c-01")


def test_arg_labels():
    assert arg_number("ARG3") == 3
    assert arg_number("ARGM-LOC") is None
    assert is_valid_arg_label("ARG6")
    assert is_valid_arg_label("ARGM-TMP")
    assert not is_valid_arg_label("ARG7")
    assert not is_valid_arg_label("ARGM-XYZ")
    assert is_implicit_ref("<arrow>")
    assert not is_implicit_ref("ARG2")


def test_schematicity_rules():
    assert classify_schematicity(cxn([sub("A"), sub("B")])) == "substantive"
    assert classify_schematicity(cxn([sch("A")])) == "fully-schematic"
    assert classify_schematicity(cxn([sub("A"), sch("B")])) == "partially-substantive"
    assert classify_schematicity(cxn([sub("A"), sub("B"), sch("C")])) == "partially-substantive"
    assert classify_schematicity(cxn([sch("A"), sch("B"), sub("C", "at"), sch("D")])) == "mostly-schematic"


def test_frozen_anchor_makes_let_alone_substantive():
    anchor = sub("C", "let alone")
    c = cxn([sch("A", role="ARG1"), anchor, sch("B", role="ARG2")],
            [sch("A", role="ARG1"), sch("Y", "VP"), anchor, sch("B", role="ARG2")])
    assert classify_schematicity(c) == "substantive"


def test_slot_form_sequences():
    s = Slot("C", "substantive", surface_forms=("let alone", "Let  Alone", "x"))
    assert s.form_sequences() == [("let", "alone"), ("x",)]
    assert not s.frozen_multiword
    assert Slot("C", "substantive", surface_forms=("let alone",)).frozen_multiword


def test_resolve_mapping(paper_lexicon):
    m = paper_lexicon.rolesets["3iikonceb-01"].mapping
    assert resolve_mapping(paper_lexicon, "ARG2", m) == "<arrow>"
    assert resolve_mapping(paper_lexicon, "ARG0", m) == "ARG0"
    with pytest.raises(UnknownArg):
        resolve_mapping(paper_lexicon, "ARG5", m)


def test_letters_string():
    assert letters_string("DBD") == "BD"


slots_st = st.lists(
    st.one_of(
        st.builds(lambda f: ("sub", f), st.sampled_from(["a", "b", "let alone"])),
        st.builds(lambda c: ("sch", c), st.sampled_from(["NP", "VP", "ANY"])),
    ),
    min_size=1,
    max_size=5,
)


def _mk(spec):
    out = []
    for k, (kind, x) in enumerate(spec):
        out.append(sub(chr(65 + k), x) if kind == "sub" else sch(chr(65 + k), x))
    return out


@given(st.lists(slots_st, min_size=1, max_size=4), st.randoms())
def test_schematicity_ignores_variant_order(variants, rnd):
    vs = [_mk(v) for v in variants]
    before = classify_schematicity(cxn(*vs))
    rnd.shuffle(vs)
    assert classify_schematicity(cxn(*vs)) == before


@given(st.permutations(["ARG0", "ARG1", "ARG2", "ARG3"]), st.integers(1, 4))
def test_resolve_mapping_bijective(perm, n):
    src = ["ARG0", "ARG1", "ARG2", "ARG3"][:n]
    pairs = tuple(zip(src, perm[:n]))
    m = MetaphorMapping("lit-01", pairs)
    images = [resolve_mapping(None, a, m) for a in src]
    assert len(set(images)) == len(images)
    back = {b: a for a, b in pairs}
    assert [back[i] for i in images] == src


def test_identity_mapping_skips_modifiers():
    rs = Roleset("r-01", "", (ArgSpec("ARG0", "agent", ""), ArgSpec("ARGM-LOC", "goal", "")))
    assert identity_mapping(rs).pairs == (("ARG0", "ARG0"),)
