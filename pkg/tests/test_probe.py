import random
import threading
import time

import pytest
from hypothesis import given, strategies as st

from constructicon.probe import (
    API_KEY_ENV,
    UNPARSEABLE,
    ConfigError,
    Expression,
    HttpProvider,
    MissingTranscript,
    Probe,
    ProbeError,
    StubProvider,
    Transcript,
    TransportError,
    build_prompt,
    load_probes,
    load_transcripts,
    parse_response,
    probe_from_json,
    probe_to_json,
    run,
    score,
)
from conftest import fixture_path


def reasoning():
    return load_probes(fixture_path("probes", "reasoning.jsonl"))


def all_probes():
    return [p for f in ("reasoning", "interpretation", "nascent") for p in load_probes(fixture_path("probes", f + ".jsonl"))]


def canned(name):
    return load_transcripts(fixture_path("transcripts", name + ".jsonl"))


def test_prompt_golden():
    with open(fixture_path("prompt_drown_cables.txt"), encoding="utf-8") as fh:
        want = fh.read()
    assert build_prompt(reasoning()[0]) == want


def test_interpretation_prompt_shape():
    p = next(p for p in all_probes() if p.probe_id == "i01-pringles")
    text = build_prompt(p)
    assert "Expression: To wink at Pringles\nMeaning: " in text
    assert text.count("Expression: ") == 1
    assert text.endswith("c) not enough information")


def test_empty_question_rejected():
    d = probe_to_json(reasoning()[0])
    d["question"] = "  "
    with pytest.raises(ProbeError):
        probe_from_json(d)


def test_probe_json_roundtrip():
    for p in all_probes():
        assert probe_from_json(probe_to_json(p)) == p


def test_prompts_distinct_and_stable():
    ps = all_probes()
    prompts = [build_prompt(p) for p in ps]
    assert len(set(prompts)) == len(ps)
    assert prompts == [build_prompt(p) for p in all_probes()]


def test_fixture_flags():
    ps = {p.probe_id: p for p in all_probes()}
    assert not ps["r01-cables-deer"].synthetic
    assert sum(p.synthetic for p in reasoning()) == 9
    assert ps["n01-skibidi-rizz"].gold == "C" and ps["n02-brat-rizz"].gold == "A"


# ---------------------------------------------------------------- parsing


@pytest.mark.parametrize(
    "raw,choice,rationale",
    [
        ("C\nExplanation: The question involves two idioms.", "C", "Explanation: The question involves two idioms."),
        ("Answer: B\nExplanation: From the context given.", "B", "Explanation: From the context given."),
        ("maybe b, maybe c", UNPARSEABLE, "maybe b, maybe c"),
        ("**A**\nbecause", "A", "because"),
        ("b) No, they are not.", "B", "No, they are not."),
        ("", UNPARSEABLE, ""),
    ],
)
def test_parse_response(raw, choice, rationale):
    assert parse_response(raw) == (choice, rationale)


# ------------------------------------------------------------------ run


def test_stub_echo_ten():
    stub = StubProvider("C\nExplanation: none")
    ts = run(stub, reasoning())
    assert [t.parsed_choice for t in ts] == ["C"] * 10
    assert [t.probe_id for t in ts] == [p.probe_id for p in reasoning()]
    assert all(params == {"temperature": 0.0} for _, params in stub.requests)


def test_retry_then_success():
    calls = {"n": 0}
    slept = []

    def script(_prompt):
        calls["n"] += 1
        if calls["n"] <= 2:
            raise TransportError("503")
        return "A"

    (t,) = run(StubProvider(script), reasoning()[:1], backoff=0.1, sleep=slept.append)
    assert (t.parsed_choice, t.retries) == ("A", 2)
    assert slept == [0.1, 0.2]


def test_always_failing_records_unparseable():
    def script(_prompt):
        raise TransportError("connection refused")

    ts = run(StubProvider(script), reasoning()[:2], sleep=lambda _s: None)
    assert [(t.parsed_choice, t.retries, t.error) for t in ts] == [(UNPARSEABLE, 3, "connection refused")] * 2


def test_requests_are_stateless_and_bounded():
    probes = reasoning()
    lock = threading.Lock()
    state = {"live": 0, "peak": 0}

    def script(prompt):
        with lock:
            state["live"] += 1
            state["peak"] = max(state["peak"], state["live"])
        time.sleep(random.random() * 0.01)
        with lock:
            state["live"] -= 1
        # fingerprint: echo the gold of the only probe this prompt belongs to
        owners = [p for p in probes if build_prompt(p) == prompt]
        assert len(owners) == 1
        return owners[0].gold

    stub = StubProvider(script)
    ts = run(stub, probes, concurrency_limit=3)
    assert state["peak"] <= 3
    assert [t.parsed_choice for t in ts] == [p.gold for p in probes]
    assert sorted(p for p, _ in stub.requests) == sorted(build_prompt(p) for p in probes)


def test_http_provider_needs_key(monkeypatch):
    monkeypatch.delenv(API_KEY_ENV, raising=False)
    sent = []
    prov = HttpProvider("http://127.0.0.1:9", "m")
    prov.send = lambda *a: sent.append(a)
    with pytest.raises(ConfigError):
        run(prov, reasoning())
    assert sent == []
    monkeypatch.setenv(API_KEY_ENV, "k")
    with pytest.raises(ConfigError):
        HttpProvider("ftp://x", "m").check_config()
    HttpProvider("https://x", "m").check_config()


# ---------------------------------------------------------------- scoring


def test_canned_accuracy():
    rep = score(reasoning(), {"model-a": canned("model-a")})
    r = rep["responders"]["model-a"]
    assert (r["correct"], r["total"]) == (7, 10)
    assert r["accuracy"] == pytest.approx(0.70)
    assert rep["rationale_review"] == "manual"


def test_gold_responder_perfect():
    ps = reasoning()
    gold = [Transcript(p.probe_id, "g", p.gold, p.gold, "", 0.0) for p in ps]
    rep = score(ps, {"gold": gold}, humans=["gold"])
    assert rep["responders"]["gold"]["accuracy"] == 1.0
    assert rep["responders"]["gold"]["gold_majority_agreement"] == 1.0


def test_disjoint_responders_zero_agreement():
    ps = reasoning()
    a = [Transcript(p.probe_id, "a", "", "A", "", 0.0) for p in ps]
    b = [Transcript(p.probe_id, "b", "", "B", "", 0.0) for p in ps]
    assert score(ps, {"a": a, "b": b})["agreement"]["a|b"] == 0.0


def test_majority_tie_breaks_toward_gold():
    p = reasoning()[0]
    votes = {n: [Transcript(p.probe_id, n, "", c, "", 0.0)] for n, c in (("h1", "A"), ("h2", "C"))}
    rep = score([p], votes, humans=["h1", "h2"])
    assert rep["per_probe"][0]["gold_majority"] == p.gold == "C"


def test_missing_and_unknown_transcripts():
    ps = reasoning()
    with pytest.raises(MissingTranscript):
        score(ps, {"x": canned("model-a")[:9]})
    with pytest.raises(MissingTranscript):
        score(ps, {"x": canned("model-a")}, humans=["nobody"])
    with pytest.raises(ProbeError):
        score(ps[:5], {"x": canned("model-a")})


@given(st.randoms())
def test_accuracy_invariant_under_reordering(rnd):
    ts = {n: canned(n) for n in ("model-a", "model-b", "annotator-1")}
    base = score(reasoning(), ts)
    for v in ts.values():
        rnd.shuffle(v)
    again = score(reasoning(), ts)
    assert again["responders"] == base["responders"]
    assert again["agreement"] == base["agreement"]


def test_agreement_symmetric_with_unit_diagonal():
    from constructicon.plotting import agreement_matrix

    names = ["annotator-1", "annotator-2", "annotator-3", "model-a", "model-b"]
    rep = score(reasoning(), {n: canned(n) for n in names}, humans=names[:3])
    got_names, grid = agreement_matrix(rep)
    assert got_names == names
    for i in range(len(names)):
        assert grid[i][i] == 1.0
        for j in range(len(names)):
            assert grid[i][j] == grid[j][i]
    same = score(reasoning(), {"a": canned("model-a"), "b": canned("model-a")})
    assert same["agreement"]["a|b"] == 1.0


def test_transcript_json_roundtrip():
    for t in canned("model-b"):
        assert Transcript.from_json(t.to_json()) == t
    with pytest.raises(ProbeError):
        Transcript.from_json({"probe_id": "x"})


def test_expression_type():
    p = reasoning()[0]
    assert isinstance(p.expressions[0], Expression) and isinstance(p, Probe)
