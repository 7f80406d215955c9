"""Registry of the 102 supported languages.

Shipped as ``data/languages.json``; codes are lowercase ASCII, 2-3
letters, unique. Everything that validates a language code or renders a
human-readable language name goes through this module.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .errors import DataError


@dataclass(frozen=True)
class Language:
    code: str
    name: str


@lru_cache(maxsize=1)
def languages() -> tuple[Language, ...]:
    raw = resources.files("mtpipe.data").joinpath("languages.json").read_text("utf-8")
    entries = tuple(Language(**e) for e in json.loads(raw))
    codes = [e.code for e in entries]
    if len(set(codes)) != len(codes):
        raise DataError("language registry contains duplicate codes")
    return entries


@lru_cache(maxsize=1)
def _by_code() -> dict[str, Language]:
    return {lang.code: lang for lang in languages()}


def is_known(code: str) -> bool:
    return code in _by_code()


def language_name(code: str) -> str:
    try:
        return _by_code()[code].name
    except KeyError:
        raise DataError(f"unknown language code: {code!r}") from None
