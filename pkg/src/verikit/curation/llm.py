"""Chat-completion client and the two generation steps of the round trip.

The wire protocol is the common one: POST {base_url}/v1/chat/completions
with a messages array, model name and temperature; the reply carries
choices[0].message.content. Tests inject an httpx transport with canned
responses, so nothing here depends on a live model.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

import httpx

__all__ = [
    "ChatClient",
    "FormatError",
    "LlmEndpoint",
    "TransportError",
    "default_summarize_template",
    "default_system_template",
    "extract_problem_section",
    "parse_tagged_response",
    "summarize_code",
    "synthesize_code",
]


class TransportError(Exception):
    """Endpoint unreachable or persistently failing; retries exhausted."""


class FormatError(Exception):
    """The completion violated the expected output protocol."""


@dataclass
class LlmEndpoint:
    base_url: str
    model: str
    timeout: float = 60.0
    max_concurrent: int = 4
    retries: int = 2
    temperature: float = 1.0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if self.max_concurrent < 1:
            raise ValueError("max_concurrent must be at least 1")
        if self.retries < 0:
            raise ValueError("retries cannot be negative")


class ChatClient:
    def __init__(self, endpoint: LlmEndpoint, transport: httpx.BaseTransport | None = None):
        self.endpoint = endpoint
        self._client = httpx.Client(
            base_url=endpoint.base_url.rstrip("/"),
            timeout=endpoint.timeout,
            transport=transport,
        )

    def close(self):
        self._client.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def complete(self, messages: list[dict], temperature: float | None = None) -> str:
        payload = {
            "model": self.endpoint.model,
            "messages": messages,
            "temperature": self.endpoint.temperature if temperature is None else temperature,
        }
        last_error: Exception | None = None
        for _ in range(self.endpoint.retries + 1):
            try:
                resp = self._client.post("/v1/chat/completions", json=payload)
                if resp.status_code >= 500:
                    last_error = TransportError(f"server error {resp.status_code}")
                    continue
                resp.raise_for_status()
                body = resp.json()
                return body["choices"][0]["message"]["content"]
            except (httpx.TransportError, httpx.HTTPStatusError) as e:
                last_error = e
            except (KeyError, IndexError, ValueError) as e:
                raise FormatError(f"malformed completion payload: {e}") from e
        raise TransportError(str(last_error))


def default_summarize_template() -> str:
    return resources.files("verikit.curation").joinpath(
        "templates/summarize.txt").read_text(encoding="utf-8")


def default_system_template() -> str:
    return resources.files("verikit.curation").joinpath(
        "templates/system.txt").read_text(encoding="utf-8")


def extract_problem_section(completion: str) -> str:
    """The instruction is whatever follows the last [Problem] marker."""
    marker = "[Problem]"
    idx = completion.rfind(marker)
    if idx < 0:
        raise FormatError("completion has no [Problem] section")
    text = completion[idx + len(marker):].strip()
    if not text:
        raise FormatError("[Problem] section is empty")
    return text


def summarize_code(y_star: str, client: ChatClient,
                   template: str | None = None) -> tuple[str, str]:
    """Code-to-NL step: returns (instruction, raw completion for audit)."""
    template = template if template is not None else default_summarize_template()
    prompt = template.replace("{code}", y_star.strip())
    raw = client.complete([{"role": "user", "content": prompt}])
    return extract_problem_section(raw), raw


_THINK_RE = re.compile(r"<think>(.*?)</think>", re.DOTALL)
_ANSWER_RE = re.compile(r"<answer>(.*?)</answer>", re.DOTALL)
_FENCE_RE = re.compile(r"```(?:[vV]erilog)?\s*\n(.*?)```", re.DOTALL)


def parse_tagged_response(completion: str) -> tuple[str, str, list[str]]:
    """Split a <think>...</think><answer>...</answer> completion.

    Returns (thought, code, warnings); the code is the last fenced block in
    the answer (real completions sometimes emit a preamble block first).
    """
    think = _THINK_RE.search(completion)
    answer = _ANSWER_RE.search(completion)
    if think is None or answer is None:
        raise FormatError("completion is missing <think> or <answer> tags")
    if answer.start() < think.end():
        raise FormatError("<answer> must follow </think>")
    fences = _FENCE_RE.findall(answer.group(1))
    if not fences:
        raise FormatError("no fenced code block inside <answer>")
    warnings = []
    if len(fences) > 1:
        warnings.append(f"answer had {len(fences)} fenced blocks; kept the last")
    return think.group(1).strip(), fences[-1].strip(), warnings


def synthesize_code(x: str, client: ChatClient,
                    system_template: str | None = None) -> tuple[str, str, list[str]]:
    """NL-to-code step: returns (thought, code, warnings)."""
    system = system_template if system_template is not None else default_system_template()
    raw = client.complete([
        {"role": "system", "content": system},
        {"role": "user", "content": x},
    ])
    return parse_tagged_response(raw)
