"""Categorical prompt assembly for architectural renderings.

Prompts combine one term from each of four categories — building type,
style, landscape, material — sampled uniformly from a lexicon with a
seeded generator. A bundled offline lexicon makes the system complete
without network access; an optional language-model client can expand it.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, replace
from typing import Protocol

from .errors import ClientUnavailable, EmptyLexiconCategory, InvalidParams, MalformedReply
from .rng import SplitMix64

PROMPT_TEMPLATE = "a {type} in {style} style, {landscape}, {material} facade, architectural rendering"
_CATEGORIES = ("types", "styles", "landscapes", "materials")
_DUPLICATE_RETRIES = 32


@dataclass(frozen=True)
class PromptLexicon:
    types: tuple[str, ...]
    styles: tuple[str, ...]
    landscapes: tuple[str, ...]
    materials: tuple[str, ...]
    version: str = "custom"

    def __post_init__(self):
        for name in _CATEGORIES:
            terms = tuple(t.strip() for t in getattr(self, name))
            if not terms or any(not t for t in terms):
                raise EmptyLexiconCategory(f"category {name!r} must hold non-empty terms")
            if len(set(terms)) != len(terms):
                raise InvalidParams(f"category {name!r} has duplicate terms")
            object.__setattr__(self, name, terms)

    @classmethod
    def bundled(cls) -> "PromptLexicon":
        from importlib.resources import files

        doc = json.loads(files("ddf.data").joinpath("lexicon.json").read_text())
        return cls.from_document(doc)

    @classmethod
    def from_document(cls, doc: dict) -> "PromptLexicon":
        return cls(
            types=tuple(doc["types"]),
            styles=tuple(doc["styles"]),
            landscapes=tuple(doc["landscapes"]),
            materials=tuple(doc["materials"]),
            version=str(doc.get("version", "custom")),
        )

    def to_document(self) -> dict:
        return {
            "version": self.version,
            "types": list(self.types),
            "styles": list(self.styles),
            "landscapes": list(self.landscapes),
            "materials": list(self.materials),
        }

    def merged(self, delta: "PromptLexicon", version: str | None = None) -> "PromptLexicon":
        """Union of term sets; never removes existing terms; idempotent."""

        def union(a: tuple[str, ...], b: tuple[str, ...]) -> tuple[str, ...]:
            seen = list(a)
            for term in b:
                if term not in seen:
                    seen.append(term)
            return tuple(seen)

        return PromptLexicon(
            types=union(self.types, delta.types),
            styles=union(self.styles, delta.styles),
            landscapes=union(self.landscapes, delta.landscapes),
            materials=union(self.materials, delta.materials),
            version=version or f"{self.version}+{delta.version}",
        )


@dataclass(frozen=True)
class Prompt:
    text: str
    parts: dict
    index: int
    seed: int
    duplicate: bool = False  # set when the retry budget left a repeat combination

    def annotated(self) -> str:
        """Category-separated form: the four parts joined by ' # '."""
        return " # ".join(
            (self.parts["type"], self.parts["style"], self.parts["landscape"], self.parts["material"])
        )

    def to_document(self) -> dict:
        return {
            "text": self.text,
            "parts": dict(self.parts),
            "index": self.index,
            "seed": self.seed,
            "duplicate": self.duplicate,
        }


def adg(lexicon: PromptLexicon, k: int, seed: int) -> list[Prompt]:
    """Assemble exactly k prompts, sampling type, style, landscape then
    material per prompt; repeated full combinations are resampled up to
    32 times, then kept with the duplicate flag set."""
    if k < 0:
        raise InvalidParams("k must be non-negative")
    rng = SplitMix64(seed)
    seen: set[tuple[str, str, str, str]] = set()
    prompts: list[Prompt] = []
    for index in range(k):
        combo = None
        duplicate = False
        for attempt in range(_DUPLICATE_RETRIES + 1):
            combo = (
                rng.choice(lexicon.types),
                rng.choice(lexicon.styles),
                rng.choice(lexicon.landscapes),
                rng.choice(lexicon.materials),
            )
            if combo not in seen:
                break
            if attempt == _DUPLICATE_RETRIES:
                duplicate = True
        seen.add(combo)
        parts = {
            "type": combo[0],
            "style": combo[1],
            "landscape": combo[2],
            "material": combo[3],
        }
        prompts.append(
            Prompt(PROMPT_TEMPLATE.format(**parts), parts, index, seed, duplicate)
        )
    return prompts


# ---------------------------------------------------------------------------
# optional lexicon expansion through an external language model


class LanguageModelClient(Protocol):
    def complete(self, instruction: str) -> str: ...


DEFAULT_INSTRUCTION = (
    "Generate {n} architectural design prompt terms grouped into four "
    "categories: architectural types, architectural styles, architectural "
    "landscapes, and architectural materials. Reply with a single JSON "
    'object with keys "types", "styles", "landscapes", "materials", each '
    "a list of short phrases."
)


class HttpLanguageModelClient:
    """Minimal JSON-over-HTTP client; endpoint and key come from the
    LLM_ENDPOINT and LLM_API_KEY environment variables unless given."""

    def __init__(self, endpoint: str | None = None, api_key: str | None = None, timeout: float = 30.0):
        self.endpoint = endpoint or os.environ.get("LLM_ENDPOINT")
        self.api_key = api_key or os.environ.get("LLM_API_KEY")
        self.timeout = timeout

    def complete(self, instruction: str) -> str:
        if not self.endpoint:
            raise ClientUnavailable("LLM_ENDPOINT is not configured")
        import httpx

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            response = httpx.post(
                self.endpoint, json={"prompt": instruction}, headers=headers, timeout=self.timeout
            )
            response.raise_for_status()
            payload = response.json()
        except Exception as exc:
            raise ClientUnavailable(f"language model endpoint failed: {exc}") from exc
        if not isinstance(payload, dict) or "text" not in payload:
            raise MalformedReply("endpoint reply missing 'text'", str(payload))
        return str(payload["text"])


def expand_lexicon(
    client: LanguageModelClient, n: int, instruction: str | None = None
) -> PromptLexicon:
    """Ask the client for new terms; returns the parsed delta lexicon.

    Raises ClientUnavailable on transport failure and MalformedReply when
    the reply cannot be parsed; in both cases no state changes, so callers
    can fall back to the bundled lexicon.
    """
    if n < 1:
        raise InvalidParams("n must be >= 1")
    text = client.complete((instruction or DEFAULT_INSTRUCTION).format(n=n))
    doc = _parse_reply(text)
    return PromptLexicon.from_document({**doc, "version": "expanded"})


def _parse_reply(text: str) -> dict:
    candidates = [text]
    start, end = text.find("{"), text.rfind("}")
    if start >= 0 and end > start:
        candidates.append(text[start : end + 1])
    for candidate in candidates:
        try:
            doc = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if not isinstance(doc, dict):
            continue
        if not all(isinstance(doc.get(c), list) and doc[c] for c in _CATEGORIES):
            continue
        cleaned = {}
        for c in _CATEGORIES:
            terms = [str(t).strip() for t in doc[c] if str(t).strip()]
            deduped = list(dict.fromkeys(terms))
            if not deduped:
                break
            cleaned[c] = deduped
        else:
            return cleaned
    raise MalformedReply("reply does not contain the four category lists", text)
