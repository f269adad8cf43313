"""Multiple-choice probes over novel multiword expressions.

Each probe defines one or more invented expressions in context and asks a
three-way question.  ``run`` sends every probe in its own stateless request,
``parse_response`` pulls the A/B/C choice out of free text, and ``score``
compares responders against gold and against each other.
"""
from __future__ import annotations

import json
import os
import re
import time
import urllib.error
import urllib.request
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations
from typing import Callable, Optional, Protocol, Sequence

from .model import ConstructiconError

OPTION_LABELS = ("A", "B", "C")
UNPARSEABLE = "UNPARSEABLE"
API_KEY_ENV = "CXN_PROBE_API_KEY"

INSTRUCTION = (
    "Using the information given below, output a single character, either A, B, or C, "
    "corresponding to the correct answer. Provide an explanation for the answer. "
    "If the answer is not clear from the context provided, output the character C."
)
EXPRESSIONS_HEADER = "Consider these novel multiword expression:"
QUESTION_HEADER = "Now answer this question:"


class ProbeError(ConstructiconError):
    pass


class ConfigError(ProbeError):
    pass


class MissingTranscript(ProbeError):
    pass


class TransportError(ProbeError):
    """A failure worth retrying (network, 5xx, timeouts)."""


@dataclass(frozen=True)
class Expression:
    expression: str
    meaning: str
    usage: str


@dataclass(frozen=True)
class Probe:
    probe_id: str
    expressions: tuple
    question: str
    options: tuple  # (("A", text), ("B", text), ("C", text))
    gold: str
    kind: str = "reasoning"
    synthetic: bool = False

    def option(self, label: str) -> str:
        return dict(self.options)[label]


def validate_probe(p: Probe) -> None:
    labels = tuple(sorted(k for k, _ in p.options))
    if labels != OPTION_LABELS:
        raise ProbeError(f"{p.probe_id}: options must be exactly A, B, C")
    if p.gold not in OPTION_LABELS:
        raise ProbeError(f"{p.probe_id}: gold {p.gold!r} is not an option")
    if not p.expressions:
        raise ProbeError(f"{p.probe_id}: needs at least one expression")
    if not p.question.strip():
        raise ProbeError(f"{p.probe_id}: empty question")
    if p.kind not in ("interpretation", "reasoning"):
        raise ProbeError(f"{p.probe_id}: unknown kind {p.kind!r}")


def probe_from_json(d: dict) -> Probe:
    try:
        p = Probe(
            probe_id=d["id"],
            expressions=tuple(Expression(e["expression"], e["meaning"], e["usage"]) for e in d["expressions"]),
            question=d["question"],
            options=tuple(sorted(d["options"].items())),
            gold=d["gold"],
            kind=d.get("kind", "reasoning"),
            synthetic=bool(d.get("synthetic", False)),
        )
    except (KeyError, TypeError, AttributeError) as e:
        raise ProbeError(f"malformed probe record: {e}") from None
    validate_probe(p)
    return p


def probe_to_json(p: Probe) -> dict:
    return {
        "id": p.probe_id,
        "kind": p.kind,
        "synthetic": p.synthetic,
        "expressions": [asdict(e) for e in p.expressions],
        "question": p.question,
        "options": dict(p.options),
        "gold": p.gold,
    }


def load_probes(path) -> list[Probe]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(probe_from_json(json.loads(line)))
            except json.JSONDecodeError as e:
                raise ProbeError(f"{path}:{n}: {e.msg}") from None
    ids = [p.probe_id for p in out]
    if len(set(ids)) != len(ids):
        raise ProbeError(f"{path}: duplicate probe ids")
    return out


def build_prompt(probe: Probe) -> str:
    blocks = [INSTRUCTION, EXPRESSIONS_HEADER]
    for e in probe.expressions:
        blocks.append(f"Expression: {e.expression}\nMeaning: {e.meaning}\nUsage: {e.usage}")
    opts = "\n".join(f"{k.lower()}) {v}" for k, v in probe.options)
    blocks.append(f"{QUESTION_HEADER}\n{probe.question}\n{opts}")
    return "\n\n".join(blocks)


# ----------------------------------------------------------------- parsing

_OWN_LINE = re.compile(r"^[\s*_]*([abc])[\s*_.)]*$", re.I)
_ANSWER = re.compile(r"^[\s*_]*answer[\s*_]*:[\s*_]*([abc])\b[\s*_.)]*", re.I)
_LEADING = re.compile(r"^[\s*_]*([abc])[.):,;\-]\s*", re.I)


def parse_response(raw: str) -> tuple[str, str]:
    lines = raw.splitlines()
    for i, line in enumerate(lines):
        m = _OWN_LINE.match(line) or _ANSWER.match(line)
        if m:
            rest = lines[:i] + lines[i + 1 :]
            tail = line[m.end() :].strip()
            if tail:
                rest.insert(i, tail)
            return m.group(1).upper(), "\n".join(rest).strip()
        m = _LEADING.match(line)
        if m:
            rest = lines[:i] + [line[m.end() :]] + lines[i + 1 :]
            return m.group(1).upper(), "\n".join(rest).strip()
    return UNPARSEABLE, raw.strip()


# ---------------------------------------------------------------- running


class CompletionProvider(Protocol):
    provider_id: str

    def check_config(self) -> None: ...

    def send(self, prompt: str, params: dict) -> str: ...


class StubProvider:
    """Scripted provider for tests and dry runs.

    ``script`` maps a prompt to a reply; it may raise ``TransportError``.
    """

    def __init__(self, script: Callable[[str], str] | str, provider_id: str = "stub"):
        self.script = script if callable(script) else (lambda _p, _r=script: _r)
        self.provider_id = provider_id
        self.requests: list = []

    def check_config(self) -> None:
        return None

    def send(self, prompt: str, params: dict) -> str:
        self.requests.append((prompt, dict(params)))
        return self.script(prompt)


class HttpProvider:
    """Chat-completion client over plain HTTP."""

    def __init__(self, endpoint: str, model: str, provider_id: Optional[str] = None, timeout: float = 60.0):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.provider_id = provider_id or model
        self.timeout = timeout

    def check_config(self) -> None:
        if not os.environ.get(API_KEY_ENV):
            raise ConfigError(f"set {API_KEY_ENV} to call {self.endpoint}")
        if not self.endpoint.startswith(("http://", "https://")):
            raise ConfigError(f"endpoint must be an http(s) URL: {self.endpoint!r}")

    def send(self, prompt: str, params: dict) -> str:
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": params.get("temperature", 0.0),
        }
        req = urllib.request.Request(
            self.endpoint + "/chat/completions",
            data=json.dumps(body).encode("utf-8"),
            headers={
                "Content-Type": "application/json",
                "Authorization": "Bearer " + os.environ.get(API_KEY_ENV, ""),
            },
            method="POST",
        )
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except urllib.error.HTTPError as e:
            if e.code >= 500 or e.code == 429:
                raise TransportError(f"HTTP {e.code}") from None
            raise ProbeError(f"HTTP {e.code}: {e.reason}") from None
        except (urllib.error.URLError, TimeoutError, ConnectionError) as e:
            raise TransportError(str(e)) from None
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise ProbeError("response has no choices[0].message.content") from None


@dataclass
class Transcript:
    probe_id: str
    provider_id: str
    raw_response: str
    parsed_choice: str
    rationale: str
    latency: float  # milliseconds
    retries: int = 0
    error: str = ""

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, d: dict) -> "Transcript":
        try:
            return cls(
                probe_id=d["probe_id"],
                provider_id=d.get("provider_id", ""),
                raw_response=d.get("raw_response", ""),
                parsed_choice=d["parsed_choice"],
                rationale=d.get("rationale", ""),
                latency=float(d.get("latency", 0.0)),
                retries=int(d.get("retries", 0)),
                error=d.get("error", ""),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ProbeError(f"malformed transcript record: {e}") from None


def load_transcripts(path) -> list[Transcript]:
    with open(path, encoding="utf-8") as fh:
        return [Transcript.from_json(json.loads(line)) for line in fh if line.strip()]


def run(
    provider,
    probes: Sequence[Probe],
    concurrency_limit: int = 1,
    retries: int = 3,
    backoff: float = 0.5,
    params: Optional[dict] = None,
    sleep: Callable[[float], None] = time.sleep,
) -> list[Transcript]:
    provider.check_config()
    params = dict(params or {"temperature": 0.0})

    def one(p: Probe) -> Transcript:
        prompt = build_prompt(p)
        attempt, last = 0, ""
        t0 = time.perf_counter()
        while True:
            try:
                raw = provider.send(prompt, params)
                break
            except TransportError as e:
                last = str(e) or type(e).__name__
                if attempt >= retries:
                    ms = (time.perf_counter() - t0) * 1000
                    return Transcript(p.probe_id, provider.provider_id, "", UNPARSEABLE, last, ms, attempt, last)
                sleep(backoff * (2**attempt))
                attempt += 1
            except ProbeError as e:
                ms = (time.perf_counter() - t0) * 1000
                return Transcript(p.probe_id, provider.provider_id, "", UNPARSEABLE, str(e), ms, attempt, str(e))
        ms = (time.perf_counter() - t0) * 1000
        choice, rationale = parse_response(raw)
        return Transcript(p.probe_id, provider.provider_id, raw, choice, rationale, ms, attempt)

    workers = max(1, int(concurrency_limit))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, probes))


# ---------------------------------------------------------------- scoring


def _modal(choices: list[str], gold: str) -> str:
    counts = Counter(c for c in choices if c != UNPARSEABLE)
    if not counts:
        return gold
    top = max(counts.values())
    tied = sorted(c for c, n in counts.items() if n == top)
    return gold if gold in tied else tied[0]


def agreement(a: Sequence[str], b: Sequence[str]) -> float:
    if not a:
        return 0.0
    return sum(1 for x, y in zip(a, b) if x == y) / len(a)


def score(probes: Sequence[Probe], transcripts_by_responder: dict, humans: Sequence[str] = ()) -> dict:
    ids = [p.probe_id for p in probes]
    known = set(ids)
    choices: dict[str, dict] = {}
    rationales: dict[str, dict] = {}
    for name in sorted(transcripts_by_responder):
        by_id = {}
        for t in transcripts_by_responder[name]:
            if t.probe_id not in known:
                raise ProbeError(f"{name}: transcript for unknown probe {t.probe_id!r}")
            by_id[t.probe_id] = t
        missing = [i for i in ids if i not in by_id]
        if missing:
            raise MissingTranscript(f"{name}: no transcript for {', '.join(missing)}")
        choices[name] = {i: by_id[i].parsed_choice for i in ids}
        rationales[name] = {i: by_id[i].rationale for i in ids}
    for h in humans:
        if h not in choices:
            raise MissingTranscript(f"designated human responder {h!r} has no transcripts")

    majority = {p.probe_id: _modal([choices[h][p.probe_id] for h in humans], p.gold) for p in probes}
    responders = {}
    for name, ch in choices.items():
        seq = [ch[i] for i in ids]
        correct = sum(1 for p in probes if ch[p.probe_id] == p.gold)
        responders[name] = {
            "accuracy": correct / len(probes) if probes else 0.0,
            "correct": correct,
            "total": len(probes),
            "unparseable": sum(1 for c in seq if c == UNPARSEABLE),
            "gold_majority_agreement": agreement(seq, [majority[i] for i in ids]),
        }
    pairs = {}
    for a, b in combinations(sorted(choices), 2):
        pairs[f"{a}|{b}"] = agreement([choices[a][i] for i in ids], [choices[b][i] for i in ids])
    per_probe = [
        {
            "probe_id": p.probe_id,
            "gold": p.gold,
            "gold_majority": majority[p.probe_id],
            "synthetic": p.synthetic,
            "choices": {n: choices[n][p.probe_id] for n in sorted(choices)},
            "correct": {n: choices[n][p.probe_id] == p.gold for n in sorted(choices)},
            "rationales": {n: rationales[n][p.probe_id] for n in sorted(choices)},
        }
        for p in probes
    ]
    return {
        "probes": len(probes),
        "humans": list(humans),
        "responders": responders,
        "agreement": pairs,
        "per_probe": per_probe,
        "rationale_review": "manual",
    }
