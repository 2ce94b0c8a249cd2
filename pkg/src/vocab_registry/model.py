"""Domain types: agents, schemes, concepts, and their serialized forms.

All value types are immutable dataclasses.  Mutation happens by building a
replacement value and committing it through the change engine; snapshots can
therefore share concept objects freely.

Canonical JSON (sorted keys, compact separators, UTF-8, ``\\n`` record
terminator in files) is the single structured text encoding used on the wire,
in the event log, and by ``--output structured``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Mapping, Optional

from .errors import BadStrategy, BadToken

TOKEN_RE = re.compile(r"^[a-z0-9-]{1,32}$")


def canonical_json(obj: Any) -> str:
    """The one structured text encoding: sorted keys, no insignificant whitespace."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


class AgentKind(str, Enum):
    INDIVIDUAL = "individual"
    ORGANIZATION = "organization"


class Status(str, Enum):
    PROPOSED = "proposed"
    APPROVED = "approved"
    DEPRECATED = "deprecated"


STATUS_VALUES = frozenset(s.value for s in Status)


class StrategyKind(str, Enum):
    PROVIDED = "provided"
    TEMPLATE = "template"
    REGISTRY_ASSIGNED = "registry_assigned"


@dataclass(frozen=True)
class Contact:
    label: str
    address: str

    def to_jsonable(self) -> dict:
        return {"label": self.label, "address": self.address}

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "Contact":
        return cls(label=d["label"], address=d["address"])


@dataclass(frozen=True)
class Agent:
    id: str
    kind: AgentKind
    name: str
    contacts: tuple[Contact, ...]

    def to_jsonable(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "name": self.name,
            "contacts": [c.to_jsonable() for c in self.contacts],
        }

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "Agent":
        return cls(
            id=d["id"],
            kind=AgentKind(d["kind"]),
            name=d["name"],
            contacts=tuple(Contact.from_jsonable(c) for c in d["contacts"]),
        )


@dataclass(frozen=True)
class UriStrategy:
    """How concept URIs come to be for a scheme.

    ``provided``: the maintainer supplies every URI.
    ``template``: URIs are expanded from ``template`` with ``{base}``,
    ``{token}`` and exactly one of ``{numeric}`` / ``{slug}``.
    ``registry_assigned``: ``{base}/{token}/{numeric}``, base falling back to
    the registry's native base.
    """

    kind: StrategyKind
    template: Optional[str] = None
    base: Optional[str] = None

    def check(self) -> None:
        if self.base and "#" in self.base:
            raise BadStrategy("hash namespaces are not supported; use slash URIs")
        if self.kind is StrategyKind.TEMPLATE:
            if not self.template:
                raise BadStrategy("template strategy requires a template")
            if "#" in self.template:
                raise BadStrategy("hash namespaces are not supported; use slash URIs")
            has_numeric = "{numeric}" in self.template
            has_slug = "{slug}" in self.template
            if has_numeric == has_slug:
                raise BadStrategy("template needs exactly one of {numeric} or {slug}")
        elif self.template:
            raise BadStrategy(f"{self.kind.value} strategy does not take a template")

    def to_jsonable(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind.value}
        if self.template is not None:
            d["template"] = self.template
        if self.base is not None:
            d["base"] = self.base
        return d

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "UriStrategy":
        return cls(
            kind=StrategyKind(d["kind"]),
            template=d.get("template"),
            base=d.get("base"),
        )


def check_token(token: str) -> str:
    if not TOKEN_RE.match(token or ""):
        raise BadToken(f"token {token!r} must match [a-z0-9-]{{1,32}}")
    return token


def _sorted_map(m: Mapping[str, str]) -> dict:
    return {k: m[k] for k in sorted(m)}


def _set_map(m: Mapping[str, Iterable[str]]) -> dict:
    return {k: sorted(m[k]) for k in sorted(m)}


@dataclass(frozen=True)
class Triple:
    """One statement in the subset triple format. ``obj_lang`` only for literals."""

    subject: str
    predicate: str
    obj: str
    obj_is_uri: bool = True
    obj_lang: Optional[str] = None

    def to_jsonable(self) -> dict:
        d: dict[str, Any] = {
            "s": self.subject,
            "p": self.predicate,
            "o": self.obj,
            "uri": self.obj_is_uri,
        }
        if self.obj_lang:
            d["lang"] = self.obj_lang
        return d

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "Triple":
        return cls(
            subject=d["s"],
            predicate=d["p"],
            obj=d["o"],
            obj_is_uri=d["uri"],
            obj_lang=d.get("lang"),
        )


def _freeze_labels(m: Mapping[str, Iterable[str]] | None) -> dict[str, frozenset[str]]:
    return {k: frozenset(v) for k, v in (m or {}).items() if v}


@dataclass(frozen=True)
class Concept:
    """One vocabulary term.

    ``broader`` only is stored; ``narrower`` is always derived as its inverse
    inside a scheme.  ``notes`` is kept as a sorted, de-duplicated tuple so
    note changes diff element-wise.  ``extras`` preserves imported statements
    the registry does not recognize.
    """

    uri: str
    numeric_id: Optional[int] = None
    pref_labels: Mapping[str, str] = field(default_factory=dict)
    alt_labels: Mapping[str, frozenset[str]] = field(default_factory=dict)
    definition: Mapping[str, str] = field(default_factory=dict)
    scope_note: Mapping[str, str] = field(default_factory=dict)
    broader: frozenset[str] = frozenset()
    related: frozenset[str] = frozenset()
    status: Status = Status.PROPOSED
    replaced_by: frozenset[str] = frozenset()
    replaces: frozenset[str] = frozenset()
    notes: tuple[str, ...] = ()
    extras: frozenset[Triple] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "pref_labels", dict(self.pref_labels))
        object.__setattr__(self, "alt_labels", _freeze_labels(self.alt_labels))
        object.__setattr__(self, "definition", dict(self.definition))
        object.__setattr__(self, "scope_note", dict(self.scope_note))
        object.__setattr__(self, "broader", frozenset(self.broader))
        object.__setattr__(self, "related", frozenset(self.related))
        object.__setattr__(self, "replaced_by", frozenset(self.replaced_by))
        object.__setattr__(self, "replaces", frozenset(self.replaces))
        object.__setattr__(self, "notes", tuple(sorted(set(self.notes))))
        object.__setattr__(self, "extras", frozenset(self.extras))

    def evolve(self, **changes) -> "Concept":
        return replace(self, **changes)

    @property
    def deprecated(self) -> bool:
        return self.status is Status.DEPRECATED

    def any_pref_label(self) -> Optional[str]:
        if "en" in self.pref_labels:
            return self.pref_labels["en"]
        for lang in sorted(self.pref_labels):
            return self.pref_labels[lang]
        return None

    def to_jsonable(self) -> dict:
        d: dict[str, Any] = {
            "uri": self.uri,
            "pref_labels": _sorted_map(self.pref_labels),
            "alt_labels": _set_map(self.alt_labels),
            "definition": _sorted_map(self.definition),
            "scope_note": _sorted_map(self.scope_note),
            "broader": sorted(self.broader),
            "related": sorted(self.related),
            "status": self.status.value,
            "replaced_by": sorted(self.replaced_by),
            "replaces": sorted(self.replaces),
            "notes": list(self.notes),
            "extras": sorted(
                (t.to_jsonable() for t in self.extras),
                key=canonical_json,
            ),
        }
        if self.numeric_id is not None:
            d["numeric_id"] = self.numeric_id
        return d

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "Concept":
        return cls(
            uri=d["uri"],
            numeric_id=d.get("numeric_id"),
            pref_labels=d.get("pref_labels", {}),
            alt_labels={k: frozenset(v) for k, v in d.get("alt_labels", {}).items()},
            definition=d.get("definition", {}),
            scope_note=d.get("scope_note", {}),
            broader=frozenset(d.get("broader", ())),
            related=frozenset(d.get("related", ())),
            status=Status(d.get("status", "proposed")),
            replaced_by=frozenset(d.get("replaced_by", ())),
            replaces=frozenset(d.get("replaces", ())),
            notes=tuple(d.get("notes", ())),
            extras=frozenset(Triple.from_jsonable(t) for t in d.get("extras", ())),
        )


@dataclass(frozen=True)
class SchemeMeta:
    id: str
    token: str
    title: str
    description: str
    owner: str
    maintainers: frozenset[str]
    uri_strategy: UriStrategy
    scheme_uri: str
    base_domain: Optional[str] = None
    created_at: str = ""
    head_version: int = 1

    def __post_init__(self):
        object.__setattr__(self, "maintainers", frozenset(self.maintainers) | {self.owner})

    def is_maintainer(self, agent_id: str) -> bool:
        return agent_id in self.maintainers

    def to_jsonable(self) -> dict:
        return {
            "id": self.id,
            "token": self.token,
            "title": self.title,
            "description": self.description,
            "owner": self.owner,
            "maintainers": sorted(self.maintainers),
            "uri_strategy": self.uri_strategy.to_jsonable(),
            "scheme_uri": self.scheme_uri,
            "base_domain": self.base_domain,
            "created_at": self.created_at,
            "head_version": self.head_version,
        }

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "SchemeMeta":
        return cls(
            id=d["id"],
            token=d["token"],
            title=d["title"],
            description=d.get("description", ""),
            owner=d["owner"],
            maintainers=frozenset(d.get("maintainers", ())),
            uri_strategy=UriStrategy.from_jsonable(d["uri_strategy"]),
            scheme_uri=d["scheme_uri"],
            base_domain=d.get("base_domain"),
            created_at=d.get("created_at", ""),
            head_version=d.get("head_version", 1),
        )


@dataclass
class SchemeState:
    """Fully materialized content of a scheme at one version."""

    meta: SchemeMeta
    version: int
    concepts: dict[str, Concept]
    next_numeric: int = 1
    event_count: int = 0

    def copy(self) -> "SchemeState":
        return SchemeState(
            meta=self.meta,
            version=self.version,
            concepts=dict(self.concepts),
            next_numeric=self.next_numeric,
            event_count=self.event_count,
        )

    def narrower(self, uri: str) -> frozenset[str]:
        return frozenset(u for u, c in self.concepts.items() if uri in c.broader)

    def to_jsonable(self) -> dict:
        return {
            "meta": self.meta.to_jsonable(),
            "version": self.version,
            "next_numeric": self.next_numeric,
            "event_count": self.event_count,
            "concepts": {u: self.concepts[u].to_jsonable() for u in sorted(self.concepts)},
        }

    def canonical(self) -> str:
        return canonical_json(self.to_jsonable())

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "SchemeState":
        return cls(
            meta=SchemeMeta.from_jsonable(d["meta"]),
            version=d["version"],
            concepts={u: Concept.from_jsonable(c) for u, c in d["concepts"].items()},
            next_numeric=d.get("next_numeric", 1),
            event_count=d.get("event_count", 0),
        )


@dataclass
class ConceptDraft:
    """Unvalidated concept as it arrives from authors or importers.

    Labels are plain lists here so a duplicated prefLabel language survives
    long enough for validation rule R1 to see it.
    """

    uri: Optional[str] = None
    pref_labels: list[tuple[str, str]] = field(default_factory=list)
    alt_labels: list[tuple[str, str]] = field(default_factory=list)
    definition: dict[str, str] = field(default_factory=dict)
    scope_note: dict[str, str] = field(default_factory=dict)
    broader: set[str] = field(default_factory=set)
    related: set[str] = field(default_factory=set)
    status: str = Status.PROPOSED.value
    notes: list[str] = field(default_factory=list)
    extras: set[Triple] = field(default_factory=set)
    replaced_by: set[str] = field(default_factory=set)
    replaces: set[str] = field(default_factory=set)
    in_scheme: Optional[str] = None
    uri_provided: bool = False
    numeric_id: Optional[int] = None

    def label_hint(self) -> Optional[str]:
        for lang, text in self.pref_labels:
            if lang == "en":
                return text
        return self.pref_labels[0][1] if self.pref_labels else None

    def build(self) -> Concept:
        """Collapse into an immutable Concept. Call only after validation."""
        alt: dict[str, set[str]] = {}
        for lang, text in self.alt_labels:
            alt.setdefault(lang, set()).add(text)
        return Concept(
            uri=self.uri or "",
            numeric_id=self.numeric_id,
            pref_labels=dict(self.pref_labels),
            alt_labels={k: frozenset(v) for k, v in alt.items()},
            definition=dict(self.definition),
            scope_note=dict(self.scope_note),
            broader=frozenset(self.broader),
            related=frozenset(self.related),
            status=Status(self.status),
            notes=tuple(self.notes),
            extras=frozenset(self.extras),
            replaced_by=frozenset(self.replaced_by),
            replaces=frozenset(self.replaces),
        )

    @classmethod
    def from_concept(cls, c: Concept) -> "ConceptDraft":
        return cls(
            uri=c.uri,
            pref_labels=sorted(c.pref_labels.items()),
            alt_labels=sorted((lang, t) for lang, ts in c.alt_labels.items() for t in ts),
            definition=dict(c.definition),
            scope_note=dict(c.scope_note),
            broader=set(c.broader),
            related=set(c.related),
            status=c.status.value,
            notes=list(c.notes),
            extras=set(c.extras),
            replaced_by=set(c.replaced_by),
            replaces=set(c.replaces),
            uri_provided=c.numeric_id is None,
            numeric_id=c.numeric_id,
        )


@dataclass
class SchemeDraft:
    """Parsed but not yet registered scheme content."""

    scheme_uri: Optional[str] = None
    title: str = ""
    description: str = ""
    concepts: list[ConceptDraft] = field(default_factory=list)
