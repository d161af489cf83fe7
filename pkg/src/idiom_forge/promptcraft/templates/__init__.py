"""Versioned prompt template assets and their recorded content hashes."""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

from ...templating import sha256_text

TEMPLATE_SHA256 = {
    "explanation_v1": "800cb394cb3acee2cb06d2535172e1386464867951301378b27c8aa2a52b1cd3",
    "literal_v1": "bc32ca51fbae323a72d7f02144f66de353ecde733519001395d53021eafa317e",
    "final_v1": "62b925d7944ba30b95acb1c1f5504fe22ba3d4b76456bffedee941f100a5f3a1",
    "translate_v1": "d67cc87a59f452508aeff8bd26e7a7ef168953f353c227b556572a807de3300b",
}


class TemplateIntegrityError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    if name not in TEMPLATE_SHA256:
        raise KeyError(f"unknown template {name!r}")
    text = resources.files(__package__).joinpath(f"{name}.txt").read_text("utf-8")
    if sha256_text(text) != TEMPLATE_SHA256[name]:
        raise TemplateIntegrityError(f"template {name} does not match its recorded hash")
    return text
