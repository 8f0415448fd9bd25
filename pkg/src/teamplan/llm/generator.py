"""Problem generators: a fixture-driven mock and a chat-completion HTTP client."""

from __future__ import annotations

import fnmatch
import json
import logging
import os
import re
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from string import Template
from typing import Mapping, Protocol

import httpx

from .request import GeneratorRequest

log = logging.getLogger(__name__)

TEMPLATE_VERSION = "v1"


class GeneratorError(Exception):
    pass


class GeneratorUnavailable(GeneratorError):
    """Transport failure or exhausted retries."""


class EmptyResponse(GeneratorError):
    """The generator produced no text (or the mock has no fixture)."""


class Generator(Protocol):
    def generate(self, request: GeneratorRequest) -> str: ...


# ── mock ─────────────────────────────────────────────────────────────────────

def _normalise(command: str) -> str:
    return " ".join(command.split()).lower()


class MockGenerator:
    """Deterministic generator backed by a table of per-round answers.

    ``fixtures`` maps a command (exact text or fnmatch pattern, compared
    case- and whitespace-insensitively) to a list of answers; round k gets
    entry k-1 and later rounds repeat the last entry. With ``fault_rounds=r``
    rounds 1..r return the answer with its final parenthesis removed.
    """

    def __init__(self, fixtures: Mapping[str, list[str]], fault_rounds: int = 0):
        if fault_rounds < 0:
            raise ValueError("fault_rounds must be non-negative")
        self.fixtures = {_normalise(k): list(v) for k, v in fixtures.items()}
        self.fault_rounds = fault_rounds
        self.calls = 0

    @classmethod
    def from_file(cls, path, fault_rounds: int = 0) -> "MockGenerator":
        """Load a fixture table; answers ending in ``.pddl`` are file paths
        relative to the table's directory."""
        path = Path(path)
        table = json.loads(path.read_text())
        resolved = {}
        for command, rounds in table.items():
            if isinstance(rounds, str):
                rounds = [rounds]
            resolved[command] = [(path.parent / r).read_text() if r.endswith(".pddl") else r
                                 for r in rounds]
        return cls(resolved, fault_rounds)

    def lookup(self, command: str) -> list[str] | None:
        key = _normalise(command)
        if key in self.fixtures:
            return self.fixtures[key]
        for pattern in sorted(self.fixtures):
            if fnmatch.fnmatchcase(key, pattern):
                return self.fixtures[pattern]
        return None

    def generate(self, request: GeneratorRequest) -> str:
        self.calls += 1
        rounds = self.lookup(request.command)
        if not rounds:
            raise EmptyResponse(f"no fixture for command {request.command!r}")
        text = rounds[min(request.round, len(rounds)) - 1]
        if request.round <= self.fault_rounds:
            cut = text.rstrip()
            text = cut[:-1] + "\n" if cut.endswith(")") else cut
        return text


# ── prompts ──────────────────────────────────────────────────────────────────

def load_template(name: str, version: str = TEMPLATE_VERSION) -> Template:
    ref = resources.files(__package__).joinpath("templates", f"{name}.{version}.txt")
    return Template(ref.read_text())


def render_messages(request: GeneratorRequest, version: str = TEMPLATE_VERSION) -> list[dict]:
    system = load_template("system", version).substitute(
        domain=request.domain_text.strip(), context=request.context.strip())
    parts = []
    fb = load_template("feedback", version)
    for k, diag in enumerate(request.feedback, start=1):
        lines = "\n".join(f"- {m.render()}" for m in diag.messages)
        parts.append(fb.substitute(round=k, messages=f"[{diag.kind}]\n{lines}"))
    user = load_template("user", version).substitute(command=request.command.strip(),
                                                     feedback="".join(parts))
    return [{"role": "system", "content": system}, {"role": "user", "content": user}]


_FENCE = re.compile(r"```[a-zA-Z]*\n(.*?)```", re.S)


def extract_problem(text: str) -> str:
    """Strip chat decoration: keep a fenced block if present, else the text
    from the first ``(define``."""
    m = _FENCE.search(text)
    if m:
        text = m.group(1)
    start = text.find("(define")
    return (text[start:] if start >= 0 else text).strip() + "\n"


# ── HTTP client ──────────────────────────────────────────────────────────────

@dataclass(frozen=True)
class GeneratorConfig:
    kind: str = "mock"
    endpoint: str = ""
    model: str = ""
    credential_env: str = "TEAMPLAN_API_KEY"
    rounds: int = 4
    timeout: float = 60.0
    retries: int = 2
    temperature: float = 0.0
    mock_fixtures: str = ""
    fault_rounds: int = 0
    planner_timeout: float = 10.0
    planner_expansions: int = 200_000

    def __post_init__(self):
        if self.kind not in ("mock", "http"):
            raise ValueError(f"generator kind must be 'mock' or 'http', got {self.kind!r}")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")


_ENV = {
    "TEAMPLAN_GENERATOR": ("kind", str),
    "TEAMPLAN_ENDPOINT": ("endpoint", str),
    "TEAMPLAN_MODEL": ("model", str),
    "TEAMPLAN_ROUNDS": ("rounds", int),
    "TEAMPLAN_TIMEOUT": ("timeout", float),
}


def load_config(path=None, env: Mapping[str, str] | None = None) -> GeneratorConfig:
    """Read a JSON config file, then apply ``TEAMPLAN_*`` environment overrides."""
    env = os.environ if env is None else env
    data: dict = {}
    if path is not None:
        path = Path(path)
        data = json.loads(path.read_text())
        fixtures = data.get("mock_fixtures")
        if fixtures and not Path(fixtures).is_absolute():
            data["mock_fixtures"] = str((path.parent / fixtures).resolve())
    for var, (key, cast) in _ENV.items():
        if env.get(var):
            data[key] = cast(env[var])
    known = set(GeneratorConfig.__dataclass_fields__)
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return GeneratorConfig(**data)


class HttpChatGenerator:
    """Chat-completion client: POST {endpoint}/chat/completions with role-tagged messages."""

    RETRY_STATUS = {429, 500, 502, 503, 504}

    def __init__(self, endpoint: str, model: str, api_key: str | None = None, *,
                 timeout: float = 60.0, retries: int = 2, temperature: float = 0.0,
                 backoff: float = 0.5, transport: httpx.BaseTransport | None = None,
                 template_version: str = TEMPLATE_VERSION):
        if not endpoint or not model:
            raise ValueError("an endpoint and a model name are required")
        headers = {"Content-Type": "application/json"}
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        self.url = endpoint.rstrip("/") + "/chat/completions"
        self.model = model
        self.retries = retries
        self.temperature = temperature
        self.backoff = backoff
        self.template_version = template_version
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    @classmethod
    def from_config(cls, config: GeneratorConfig, env: Mapping[str, str] | None = None,
                    **kwargs) -> "HttpChatGenerator":
        env = os.environ if env is None else env
        return cls(config.endpoint, config.model, env.get(config.credential_env),
                   timeout=config.timeout, retries=config.retries,
                   temperature=config.temperature, **kwargs)

    def close(self) -> None:
        self._client.close()

    def generate(self, request: GeneratorRequest) -> str:
        payload = {"model": self.model, "temperature": self.temperature,
                   "messages": render_messages(request, self.template_version)}
        last = "no attempt made"
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._client.post(self.url, json=payload)
            except httpx.TransportError as exc:
                last = f"{type(exc).__name__}: {exc}"
                log.warning("generator request failed (attempt %d): %s", attempt + 1, last)
                continue
            if resp.status_code in self.RETRY_STATUS:
                last = f"HTTP {resp.status_code}"
                log.warning("generator returned %s (attempt %d)", last, attempt + 1)
                continue
            if resp.status_code >= 400:
                raise GeneratorUnavailable(f"HTTP {resp.status_code}: {resp.text[:200]}")
            try:
                content = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, KeyError, IndexError, TypeError) as exc:
                raise EmptyResponse(f"malformed completion payload: {exc}") from None
            if not content or not content.strip():
                raise EmptyResponse("completion contained no text")
            return extract_problem(content)
        raise GeneratorUnavailable(f"gave up after {self.retries + 1} attempts ({last})")


def make_generator(config: GeneratorConfig, env: Mapping[str, str] | None = None) -> Generator:
    if config.kind == "mock":
        if not config.mock_fixtures:
            raise ValueError("mock generator needs a mock_fixtures path")
        return MockGenerator.from_file(config.mock_fixtures, config.fault_rounds)
    return HttpChatGenerator.from_config(config, env)
