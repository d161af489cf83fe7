"""Single-pass ``{name}`` placeholder substitution for prompt templates."""

from __future__ import annotations

import hashlib
import re

PLACEHOLDER_RE = re.compile(r"\{([A-Za-z_][A-Za-z0-9_]*)\}")


class TemplateError(ValueError):
    pass


def placeholders(template: str) -> set[str]:
    return set(PLACEHOLDER_RE.findall(template))


def render(template: str, values: dict[str, str]) -> str:
    """Substitute every placeholder exactly once.

    Substituted text is never rescanned, so values may themselves contain
    braces.  Raises TemplateError if the template uses a placeholder that
    ``values`` does not supply.
    """
    missing = placeholders(template) - set(values)
    if missing:
        raise TemplateError(f"unresolved placeholders: {sorted(missing)}")
    return PLACEHOLDER_RE.sub(lambda m: values[m.group(1)], template)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()
