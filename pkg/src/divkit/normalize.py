"""Noise-class normalization of raw text into token sequences.

Nine classes of noise (numbers, markup tags, URLs, file paths, emoticons,
punctuation series, phonetic characters, alphanumeric blends, characters
outside the French range) each collapse to a single marker token such as
``[NUMBER]``, so that web noise cannot inflate measured diversity.
Tokenization is whitespace splitting after the rules run; case is never
folded since distinct surface forms are distinct categories.

The rule patterns themselves are policy: the class list is fixed but the
class *boundaries* (what counts as a path, which blocks are "phonetic")
are choices, kept deliberately conservative so ordinary French prose
passes through untouched, and captured in the config fingerprint so every
downstream report can state exactly which normalizer produced it.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from typing import Iterable

from .entropy import CategoryCounts
from .errors import ConfigurationError

__all__ = [
    "NOISE_CLASSES",
    "NormalizerConfig",
    "decode_utf8",
    "normalize",
    "normalize_verbose",
    "token_counts",
]

# Application order: structured spans first, catch-alls last.  The order is
# load-bearing (URL before PATH before NUMBER before PUNCTS; EMOTICON before
# PATH so ":/" is a face, not a path) and is part of the fingerprint.
NOISE_CLASSES = (
    "tag",
    "url",
    "emoticon",
    "path",
    "alnum",
    "number",
    "puncts",
    "phonetic",
    "nonfr",
)

# Letters of French words beyond ASCII, lower + upper.
FRENCH_LETTERS = "àâæçéèêëîïôœùûüÿÀÂÆÇÉÈÊËÎÏÔŒÙÛÜŸ"

# ASCII punctuation plus common French typographic marks; characters in this
# set are "inside the French range" and never trigger the NONFR rule.
COMMON_PUNCTUATION = (
    "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~" + "«»“”‘’‚„…–—·•€°§"
)

ASCII_EMOTICONS = (
    ":-)", ":-(", ":-D", ":-P", ":-p", ":-O", ":-o", ":-/", ":-\\", ":-|", ":-*",
    ":'-(", ":'(", "^_^", "-_-", "o_O", "O_o", "</3",
    ":)", ":(", ";)", ";-)", ":D", ":P", ":p", ":O", ":o", ":/", ":\\", ":|",
    "=)", "=(", "=D", "xD", "XD", "x)", "^^", "<3", ":3", ":*",
)

# Emoji and pictograph blocks collapsed by the emoticon rule.
_EMOJI_RANGES = (
    "☀-⛿"          # miscellaneous symbols
    "✀-➿"          # dingbats
    "⬀-⯿"          # arrows and symbols
    "️"                 # variation selector
    "\U0001f300-\U0001f5ff"  # pictographs
    "\U0001f600-\U0001f64f"  # emoticons
    "\U0001f680-\U0001f6ff"  # transport
    "\U0001f900-\U0001f9ff"  # supplemental symbols
    "\U0001fa70-\U0001faff"  # extended pictographs
)


def _default_placeholders() -> dict[str, str]:
    return {name: f"[{name.upper()}]" for name in NOISE_CLASSES}


def _default_enabled() -> dict[str, bool]:
    return {name: True for name in NOISE_CLASSES}


@dataclass
class NormalizerConfig:
    """Placeholder names, per-rule toggles, and the French character range."""

    placeholders: dict[str, str] = field(default_factory=_default_placeholders)
    enabled: dict[str, bool] = field(default_factory=_default_enabled)
    french_letters: str = FRENCH_LETTERS
    punctuation: str = COMMON_PUNCTUATION
    ascii_emoticons: tuple[str, ...] = ASCII_EMOTICONS

    def validate(self) -> None:
        for table, label in ((self.placeholders, "placeholder"), (self.enabled, "toggle")):
            missing = set(NOISE_CLASSES) - set(table)
            if missing:
                raise ConfigurationError(f"missing {label} for noise classes: {sorted(missing)}")
        for name, marker in self.placeholders.items():
            if not marker or any(ch.isspace() for ch in marker):
                raise ConfigurationError(f"placeholder for {name!r} must be non-empty, no whitespace")

    def serialize(self) -> str:
        """Flat ``key = value`` text, one line per key, stable ordering."""
        lines = [f"rule_order = {','.join(NOISE_CLASSES)}"]
        for name in NOISE_CLASSES:
            lines.append(f"{name} = {'on' if self.enabled[name] else 'off'}")
            lines.append(f"{name}_placeholder = {self.placeholders[name]}")
        lines.append(f"french_letters = {self.french_letters}")
        lines.append(f"punctuation = {self.punctuation}")
        lines.append(f"ascii_emoticons = {' '.join(self.ascii_emoticons)}")
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        """SHA-256 of the serialized form; stamped into downstream reports."""
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    @classmethod
    def deserialize(cls, text: str) -> "NormalizerConfig":
        kv = parse_kv(text)
        config = cls()
        for name in NOISE_CLASSES:
            if name in kv:
                config.enabled[name] = _parse_toggle(name, kv[name])
            key = f"{name}_placeholder"
            if key in kv:
                config.placeholders[name] = kv[key]
        if "french_letters" in kv:
            config.french_letters = kv["french_letters"]
        if "punctuation" in kv:
            config.punctuation = kv["punctuation"]
        if "ascii_emoticons" in kv:
            config.ascii_emoticons = tuple(kv["ascii_emoticons"].split())
        if "rule_order" in kv and tuple(kv["rule_order"].split(",")) != NOISE_CLASSES:
            raise ConfigurationError("rule_order cannot be changed; it is fixed by the pipeline")
        config.validate()
        return config

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.serialize())

    @classmethod
    def load(cls, path) -> "NormalizerConfig":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.deserialize(fh.read())


def parse_kv(text: str) -> dict[str, str]:
    """Parse flat ``key = value`` lines; later keys win, blanks and # skipped."""
    out: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigurationError(f"expected 'key = value', got {line!r}")
        out[key.strip()] = value.strip()
    return out


def _parse_toggle(name: str, value: str) -> bool:
    if value not in ("on", "off"):
        raise ConfigurationError(f"toggle {name!r} must be 'on' or 'off', got {value!r}")
    return value == "on"


def decode_utf8(data: bytes) -> str:
    """Decode bytes as UTF-8, mapping invalid bytes to U+FFFD.

    U+FFFD is outside the French range, so byte garbage lands in the NONFR
    class instead of raising variety.
    """
    return data.decode("utf-8", errors="replace")


class _CompiledRules:
    def __init__(self, config: NormalizerConfig):
        config.validate()
        letters = "A-Za-z" + re.escape(config.french_letters)
        punct = re.escape(config.punctuation)
        emoticons = "|".join(
            re.escape(e) for e in sorted(config.ascii_emoticons, key=len, reverse=True)
        )
        patterns = {
            "tag": r"</?[A-Za-z][^<>]*>",
            "url": r"(?:[A-Za-z][A-Za-z0-9+.\-]*://|www\.)\S+",
            "emoticon": rf"(?<!\S)(?:{emoticons})(?!\S)|[{_EMOJI_RANGES}]+",
            "path": r"(?<!\S)\S*[/\\]\S*(?!\S)",
            "alnum": rf"(?<!\S)(?=\S*[{letters}]\S*[{letters}])(?=\S*[0-9]\S*[0-9])\S+(?!\S)",
            "number": r"\d(?:[ .\-]?\d)+",
            "puncts": rf"[{punct}]{{3,}}",
            "phonetic": r"[ɐ-ʯ]+",
            "nonfr": rf"[^\sA-Za-z0-9{re.escape(config.french_letters)}{punct}]+",
        }
        self.rules: list[tuple[str, re.Pattern[str], str]] = [
            (name, re.compile(patterns[name]), f" {config.placeholders[name]} ")
            for name in NOISE_CLASSES
            if config.enabled[name]
        ]


_RULE_CACHE: dict[str, _CompiledRules] = {}


def _compiled(config: NormalizerConfig) -> _CompiledRules:
    key = config.fingerprint()
    rules = _RULE_CACHE.get(key)
    if rules is None:
        rules = _RULE_CACHE[key] = _CompiledRules(config)
    return rules


def normalize_verbose(
    text: str, config: NormalizerConfig | None = None
) -> tuple[list[str], dict[str, int]]:
    """Normalize and also report how many spans each noise class collapsed."""
    config = config or NormalizerConfig()
    rules = _compiled(config).rules
    matches = {name: 0 for name in NOISE_CLASSES}
    # Canonicalize whitespace first so rule application commutes with the
    # final split and re-normalizing the joined output is a fixed point.
    current = " ".join(text.split())
    for _ in range(100):
        nxt = current
        for name, pattern, replacement in rules:
            nxt, n = pattern.subn(replacement, nxt)
            matches[name] += n
        nxt = " ".join(nxt.split())
        if nxt == current:
            return current.split(), matches
        current = nxt
    raise ConfigurationError(
        "normalization did not converge; a placeholder is itself matched by a rule"
    )


def normalize(text: str, config: NormalizerConfig | None = None) -> list[str]:
    """Normalize raw text to a token sequence (whitespace-free tokens)."""
    return normalize_verbose(text, config)[0]


def token_counts(tokens: Iterable[str]) -> CategoryCounts:
    """Count unique token forms; total equals the sequence length."""
    return CategoryCounts.from_tokens(tokens)
