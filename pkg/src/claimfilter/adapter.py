"""Pluggable backend client for graph, alternate, and scoring requests.

All network dependence lives behind the ``Backend`` protocol: a single
request/response interface with JSON-compatible bodies. The test suite and
CLI offline mode use ``MockBackend``, a pure function of (request, fixture
directory), so runs are byte-identical. Any chat-completion-style service
plugs in via ``HttpBackend`` and a ``BackendProfile``.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from . import prompts
from .errors import (
    BackendUnavailableError,
    ClaimFilterError,
    IdOutOfRangeError,
    InvalidConfigError,
    MalformedResponseError,
)
from .graph import ClaimGraph, linear_graph, parse_adjacency
from .scoring import SupportTally

GENERATE_GRAPH = "GenerateGraph"
GENERATE_ALTERNATES = "GenerateAlternates"
SCORE_CLAIMS = "ScoreClaims"
REPROMPT = "Reprompt"


@dataclass(frozen=True)
class AdapterRequest:
    kind: str
    question: str
    claims: tuple[str, ...] = ()
    k: int = 1
    temperature: float = 0.0

    def __post_init__(self):
        if self.kind == GENERATE_ALTERNATES and self.k < 1:
            raise InvalidConfigError("k must be >= 1 for alternate generation")
        if not 0.0 <= self.temperature <= 2.0:
            raise InvalidConfigError(f"temperature out of range: {self.temperature}")


@dataclass(frozen=True)
class BackendProfile:
    """Connection settings; api key is read from the named env var."""

    url: str = ""
    model: str = ""
    api_key_env: str = "CLAIMFILTER_API_KEY"
    retries: int = 2
    timeout: float = 30.0
    template_id: str = prompts.GRAPH_TEMPLATE_DEFAULT

    def __post_init__(self):
        if self.retries < 0:
            raise InvalidConfigError("retries must be >= 0")

    @classmethod
    def from_file(cls, path: str | Path) -> "BackendProfile":
        obj = json.loads(Path(path).read_text())
        return cls(**obj)


class Backend(Protocol):
    def complete(self, request: dict) -> dict:
        """Take {"prompt", "temperature"} and return {"text": ...}."""
        ...


def request_hash(request: dict) -> str:
    """Stable fixture key for a backend request."""
    canonical = json.dumps(request, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class MockBackend:
    """File-backed backend: one response file per request hash.

    The fixture directory holds ``<hash>.json`` files with a ``text`` field.
    A missing fixture raises BackendUnavailableError, mimicking a dead
    endpoint.
    """

    def __init__(self, fixture_dir: str | Path):
        self.fixture_dir = Path(fixture_dir)

    def complete(self, request: dict) -> dict:
        path = self.fixture_dir / f"{request_hash(request)}.json"
        if not path.exists():
            raise BackendUnavailableError(f"no fixture for request at {path}")
        return json.loads(path.read_text())

    @staticmethod
    def write_fixture(fixture_dir: str | Path, request: dict, text: str) -> Path:
        path = Path(fixture_dir) / f"{request_hash(request)}.json"
        path.write_text(json.dumps({"text": text}))
        return path


class HttpBackend:
    """Minimal chat-completion-style HTTP backend."""

    def __init__(self, profile: BackendProfile):
        self.profile = profile

    def complete(self, request: dict) -> dict:
        import urllib.error
        import urllib.request

        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.profile.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = json.dumps(
            {
                "model": self.profile.model,
                "messages": [{"role": "user", "content": request["prompt"]}],
                "temperature": request["temperature"],
            }
        ).encode("utf-8")
        req = urllib.request.Request(self.profile.url, data=body, headers=headers)
        try:
            with urllib.request.urlopen(req, timeout=self.profile.timeout) as resp:
                payload = json.loads(resp.read().decode("utf-8"))
        except (urllib.error.URLError, OSError) as exc:
            raise BackendUnavailableError(str(exc)) from exc
        try:
            return {"text": payload["choices"][0]["message"]["content"]}
        except (KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError("unexpected completion payload") from exc


@dataclass(frozen=True)
class GraphFetchResult:
    graph: ClaimGraph
    fallback: bool = False
    error: str | None = None


def _parse_matrix_text(text: str, n_claims: int) -> ClaimGraph:
    try:
        matrix = json.loads(text.strip())
    except json.JSONDecodeError as exc:
        raise MalformedResponseError(f"not a JSON matrix: {exc}") from exc
    if not isinstance(matrix, list) or len(matrix) != n_claims:
        raise MalformedResponseError(
            f"expected {n_claims} rows, got {len(matrix) if isinstance(matrix, list) else type(matrix)}"
        )
    return parse_adjacency(matrix)


def fetch_graph(
    req: AdapterRequest,
    backend: Backend,
    profile: BackendProfile | None = None,
) -> GraphFetchResult:
    """Request a dependency graph, with retries and a linear-chain fallback.

    Malformed, cyclic, or wrong-dimension responses are retried up to the
    profile limit; if none parses (or the backend is down) the trivial
    linear graph over the claims is returned with the fallback flag set.
    """
    if req.kind != GENERATE_GRAPH:
        raise InvalidConfigError(f"fetch_graph got request kind {req.kind!r}")
    profile = profile or BackendProfile()
    n = len(req.claims)
    if n == 0:
        return GraphFetchResult(ClaimGraph(0))
    prompt = prompts.render_graph_prompt(
        req.question, list(req.claims), profile.template_id
    )
    last_error: Exception | None = None
    for _ in range(profile.retries + 1):
        try:
            resp = backend.complete({"prompt": prompt, "temperature": req.temperature})
            return GraphFetchResult(_parse_matrix_text(resp["text"], n))
        except ClaimFilterError as exc:
            last_error = exc
    return GraphFetchResult(linear_graph(n), fallback=True, error=str(last_error))


def fetch_alternates(
    req: AdapterRequest,
    backend: Backend,
    profile: BackendProfile | None = None,
) -> list[str]:
    """Generate ``k`` alternate responses at the request temperature."""
    if req.kind != GENERATE_ALTERNATES:
        raise InvalidConfigError(f"fetch_alternates got request kind {req.kind!r}")
    prompt = prompts.render_alternate_prompt(req.question)
    out = []
    for i in range(req.k):
        resp = backend.complete(
            {"prompt": prompt, "temperature": req.temperature, "sample": i}
        )
        out.append(resp["text"])
    return out


def _parse_score_lines(text: str, n_claims: int) -> dict[int, int]:
    scores: dict[int, int] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            claim_id = obj["id"]
            score = obj["score"]
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise MalformedResponseError(f"bad score line: {line!r}") from exc
        if not isinstance(claim_id, int) or not 0 <= claim_id < n_claims:
            raise IdOutOfRangeError(f"claim id {claim_id!r} out of range")
        if score not in (1, -1, 0):
            raise MalformedResponseError(f"score must be 1, -1, or 0: {line!r}")
        scores[claim_id] = score
    return scores


def score_claims(
    req: AdapterRequest, alternates: list[str], backend: Backend
) -> SupportTally:
    """Judge each claim against each alternate; one backend call per text.

    Claims a response omits count as unrelated rather than erroring, so
    partial judge coverage does not discard whole examples.
    """
    if req.kind != SCORE_CLAIMS:
        raise InvalidConfigError(f"score_claims got request kind {req.kind!r}")
    n = len(req.claims)
    supports = [0] * n
    contradicts = [0] * n
    unrelated = [0] * n
    for text in alternates:
        prompt = prompts.render_score_prompt(list(req.claims), text)
        resp = backend.complete({"prompt": prompt, "temperature": req.temperature})
        scores = _parse_score_lines(resp["text"], n)
        for v in range(n):
            score = scores.get(v, 0)
            if score == 1:
                supports[v] += 1
            elif score == -1:
                contradicts[v] += 1
            else:
                unrelated[v] += 1
    return SupportTally(tuple(supports), tuple(contradicts), tuple(unrelated))


def reprompt(
    question: str,
    filtered_claims: list[str],
    backend: Backend,
    profile: BackendProfile | None = None,
) -> str:
    """Feed the filtered claims back as starter work and return the completion."""
    profile = profile or BackendProfile()
    prompt = prompts.render_reprompt(question, filtered_claims)
    last_error: Exception | None = None
    for _ in range(profile.retries + 1):
        try:
            resp = backend.complete({"prompt": prompt, "temperature": 0.0})
            return resp["text"]
        except BackendUnavailableError as exc:
            last_error = exc
    raise BackendUnavailableError(str(last_error))
