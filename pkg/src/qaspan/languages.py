"""Target-language registry with script and native-digit metadata."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

import yaml

ASCII_DIGITS = "0123456789"


def _digits_from(zero: int) -> Mapping[str, str]:
    return MappingProxyType({d: chr(zero + i) for i, d in enumerate(ASCII_DIGITS)})


@dataclass(frozen=True)
class LanguageSpec:
    code: str
    name: str
    family: str
    script: str
    digit_map: Mapping[str, str]

    def __post_init__(self):
        missing = [d for d in ASCII_DIGITS if d not in self.digit_map]
        if missing:
            raise ValueError(f"{self.code}: digit_map lacks {''.join(missing)}")
        for d, native in self.digit_map.items():
            if len(native) != 1:
                raise ValueError(f"{self.code}: digit {d!r} maps to {native!r}, need one code point")


ENGLISH = LanguageSpec("en", "English", "Germanic", "Latin",
                       MappingProxyType({d: d for d in ASCII_DIGITS}))

# zero-digit code points of each script's digit block
_BUILTIN = [
    ("mr", "Marathi", "Indo-Aryan", "Devanagari", 0x0966),
    ("hi", "Hindi", "Indo-Aryan", "Devanagari", 0x0966),
    ("pa", "Punjabi", "Indo-Aryan", "Gurmukhi", 0x0A66),
    ("bn", "Bengali", "Indo-Aryan", "Bengali", 0x09E6),
    ("gu", "Gujarati", "Indo-Aryan", "Gujarati", 0x0AE6),
    ("or", "Oriya", "Indo-Aryan", "Oriya", 0x0B66),
    ("ta", "Tamil", "Dravidian", "Tamil", 0x0BE6),
    ("te", "Telugu", "Dravidian", "Telugu", 0x0C66),
    ("kn", "Kannada", "Dravidian", "Kannada", 0x0CE6),
    ("ml", "Malayalam", "Dravidian", "Malayalam", 0x0D66),
]


class LanguageRegistry:
    def __init__(self, languages=()):
        self._by_code: dict[str, LanguageSpec] = {}
        for lang in languages:
            self.add(lang)

    def add(self, lang: LanguageSpec) -> None:
        if lang.code in self._by_code:
            raise ValueError(f"duplicate language code {lang.code!r}")
        self._by_code[lang.code] = lang

    def get(self, code: str) -> LanguageSpec:
        try:
            return self._by_code[code]
        except KeyError:
            raise KeyError(f"unknown language {code!r}; known: {', '.join(sorted(self._by_code))}") from None

    def __contains__(self, code: str) -> bool:
        return code in self._by_code

    def __iter__(self):
        return iter(self._by_code.values())

    def __len__(self) -> int:
        return len(self._by_code)

    def load_file(self, path: str | Path) -> None:
        """Add languages from a YAML/JSON file.

        The file holds a list of entries with ``code``, ``name``, ``family``,
        ``script`` and either ``digit_zero`` (code point of the script's zero,
        e.g. ``"U+0966"`` or an int) or an explicit ``digit_map``.
        """
        text = Path(path).read_text(encoding="utf-8")
        entries = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
        if isinstance(entries, dict):
            entries = entries.get("languages", [])
        for e in entries or []:
            if "digit_map" in e:
                dmap = MappingProxyType(dict(e["digit_map"]))
            else:
                zero = e["digit_zero"]
                if isinstance(zero, str):
                    zero = int(zero.upper().removeprefix("U+"), 16)
                dmap = _digits_from(zero)
            self.add(LanguageSpec(e["code"], e["name"], e["family"], e["script"], dmap))


def default_registry() -> LanguageRegistry:
    reg = LanguageRegistry([ENGLISH])
    for code, name, family, script, zero in _BUILTIN:
        reg.add(LanguageSpec(code, name, family, script, _digits_from(zero)))
    return reg


def convert_digits(text: str, tgt: LanguageSpec) -> str:
    """Replace ASCII digits with the target script's digits; length is preserved."""
    table = str.maketrans(dict(tgt.digit_map))
    return text.translate(table)
