"""URI minting and validation.

Three assignment scenarios: the owner provides URIs, the owner provides a
template the registry expands, or the registry assigns
``{base}/{token}/{numeric}`` outright.  Registry-minted URIs never carry
version markers; numeric counter values are never reused.
"""

from __future__ import annotations

import re
from typing import Callable, Optional

from .errors import BadUri, DuplicateUri, MintFailed, MissingLabelForSlug
from .model import StrategyKind, UriStrategy

_ABSOLUTE_RE = re.compile(r"^https?://[^/\s]+")
_VERSION_SEGMENT_RE = re.compile(r"^(v\d+|\d{4}-\d{2}-\d{2})$")
_SLUG_STRIP_RE = re.compile(r"[^a-z0-9]+")


def has_version_marker(uri: str) -> bool:
    """True when any path segment looks like v<digits> or an ISO date."""
    try:
        path = uri.split("://", 1)[1]
    except IndexError:
        path = uri
    segments = path.split("/")[1:]
    return any(_VERSION_SEGMENT_RE.match(seg) for seg in segments)


def validate_uri(
    uri: str,
    minted: bool = False,
    existing: Optional[Callable[[str], bool]] = None,
) -> list[tuple[str, str]]:
    """Check absoluteness, uniqueness, and version-marker absence.

    Returns (severity, message) pairs; severity is "error" or "warning".  A
    version marker in an owner-provided URI is only a warning, since the
    registry did not mint it.
    """
    problems: list[tuple[str, str]] = []
    if not uri or any(ch.isspace() for ch in uri):
        problems.append(("error", f"URI {uri!r} contains whitespace or is empty"))
        return problems
    if not _ABSOLUTE_RE.match(uri):
        problems.append(("error", f"URI {uri!r} is not an absolute http(s) IRI"))
    if has_version_marker(uri):
        severity = "error" if minted else "warning"
        problems.append((severity, f"URI {uri!r} contains a version marker segment"))
    if existing is not None and existing(uri):
        problems.append(("error", f"URI {uri!r} is already registered"))
    return problems


def slugify(label: str) -> str:
    slug = _SLUG_STRIP_RE.sub("-", label.lower()).strip("-")
    if not slug:
        raise MissingLabelForSlug(f"label {label!r} yields an empty slug")
    return slug


def mint(
    strategy: UriStrategy,
    scheme_token: str,
    *,
    provided_uri: Optional[str] = None,
    label_hint: Optional[str] = None,
    counter: Optional[int] = None,
    registry_base: Optional[str] = None,
    taken: Optional[Callable[[str], bool]] = None,
) -> tuple[str, Optional[int]]:
    """Return (uri, numeric_id). numeric_id is set when the counter was consumed.

    Pure given its inputs: the caller supplies the counter value and a
    ``taken`` predicate over already-registered URIs.
    """
    strategy.check()
    if strategy.kind is StrategyKind.PROVIDED:
        if not provided_uri:
            raise MintFailed("provided strategy requires a URI with the term")
        problems = validate_uri(provided_uri, minted=False, existing=taken)
        errors = [msg for sev, msg in problems if sev == "error"]
        if any("already registered" in m for m in errors):
            raise DuplicateUri(f"URI {provided_uri!r} is already registered")
        if errors:
            raise BadUri("; ".join(errors))
        return provided_uri, None

    base = (strategy.base or registry_base or "").rstrip("/")
    if not base:
        raise MintFailed("no base domain available for minting")

    if strategy.kind is StrategyKind.REGISTRY_ASSIGNED:
        if counter is None:
            raise MintFailed("registry_assigned minting needs a counter value")
        uri = f"{base}/{scheme_token}/{counter}"
        numeric: Optional[int] = counter
    else:
        template = strategy.template or ""
        values = {"base": base, "token": scheme_token}
        if "{numeric}" in template:
            if counter is None:
                raise MintFailed("numeric template minting needs a counter value")
            values["numeric"] = str(counter)
            numeric = counter
        else:
            if label_hint is None:
                raise MissingLabelForSlug("slug template minting needs a label")
            values["slug"] = slugify(label_hint)
            numeric = None
        uri = template.format(**values)

    problems = validate_uri(uri, minted=True, existing=None)
    errors = [msg for sev, msg in problems if sev == "error"]
    if errors:
        raise BadUri("; ".join(errors))
    if taken is not None and taken(uri):
        raise DuplicateUri(f"minted URI {uri!r} collides with a registered URI")
    return uri, numeric
