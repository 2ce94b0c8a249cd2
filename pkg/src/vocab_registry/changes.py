"""Diff computation, semantic-change classification, events, and replay.

The classification table decides whether an edit batch preserves the concept
URI (non-semantic), requires deprecating it and minting a successor
(semantic), or needs an explicit maintainer decision first:

    NS1  broader/related additions (no relocation)
    NS2  definition or scope note edit asserted as a clarification
    NS3  first definition / first scope note
    NS4  status change
    NS5  other information added (notes, further translations, ...)
    NS6  label edits, including prefLabel/altLabel swaps
    S1   split or consolidation
    S2   definition/scope note edit asserted as a meaning change
    S3   hierarchy change where the hierarchy is the only semantic clue
    NC1  definition/scope note modified without an assertion
    NC2  broader removed or replaced on a defined concept

A batch is Semantic as soon as any item is; otherwise NeedsConfirmation as
soon as any item is; otherwise NonSemantic.  This way a batch never silently
mixes URI-preserving and URI-breaking intents.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable, Mapping, Optional, Sequence

from .errors import EmptyItems, UriMismatch
from .model import Concept, SchemeMeta, SchemeState, Status, UriStrategy, canonical_json

LANG_FIELDS = ("pref_label", "alt_label", "definition", "scope_note")
SET_FIELDS = ("broader", "related")


class Op(str, Enum):
    ADD = "add"
    REMOVE = "remove"
    MODIFY = "modify"


class Outcome(str, Enum):
    NON_SEMANTIC = "NonSemantic"
    SEMANTIC = "Semantic"
    NEEDS_CONFIRMATION = "NeedsConfirmation"


class Assertion(str, Enum):
    CLARIFICATION = "clarification"
    MEANING_CHANGE = "meaning_change"


SEMANTIC_RULES = frozenset({"S1", "S2", "S3"})
CONFIRMATION_RULES = frozenset({"NC1", "NC2"})

_QUESTIONS = {
    "NC1": (
        "Does this definition or scope note edit change the meaning of the term? "
        "Answering yes deprecates the current URI and mints a successor."
    ),
    "NC2": (
        "Does this change to the broader terms relocate the concept in the hierarchy? "
        "Answering yes deprecates the current URI and mints a successor."
    ),
}


@dataclass(frozen=True)
class FieldPath:
    field: str
    lang: Optional[str] = None

    def __str__(self) -> str:
        return f"{self.field}@{self.lang}" if self.lang else self.field

    @classmethod
    def parse(cls, text: str) -> "FieldPath":
        if "@" in text:
            f, lang = text.split("@", 1)
            return cls(f, lang)
        return cls(text)


@dataclass(frozen=True)
class ChangeItem:
    path: FieldPath
    op: Op
    old: Optional[str] = None
    new: Optional[str] = None

    def __post_init__(self):
        if self.op is Op.ADD and self.old is not None:
            raise ValueError("add items carry no old value")
        if self.op is Op.REMOVE and self.new is not None:
            raise ValueError("remove items carry no new value")
        if self.op is Op.MODIFY and (self.old is None or self.new is None or self.old == self.new):
            raise ValueError("modify items need distinct old and new values")

    def sort_key(self) -> tuple:
        return (str(self.path), self.old or "", self.new or "")

    def to_jsonable(self) -> dict:
        d: dict[str, Any] = {"field": str(self.path), "op": self.op.value}
        if self.old is not None:
            d["old"] = self.old
        if self.new is not None:
            d["new"] = self.new
        return d

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "ChangeItem":
        return cls(
            path=FieldPath.parse(d["field"]),
            op=Op(d["op"]),
            old=d.get("old"),
            new=d.get("new"),
        )


@dataclass(frozen=True)
class Classification:
    outcome: Outcome
    reasons: frozenset[str]
    questions: tuple[str, ...] = ()

    def to_jsonable(self) -> dict:
        d: dict[str, Any] = {"outcome": self.outcome.value, "reasons": sorted(self.reasons)}
        if self.questions:
            d["questions"] = list(self.questions)
        return d

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "Classification":
        return cls(
            outcome=Outcome(d["outcome"]),
            reasons=frozenset(d["reasons"]),
            questions=tuple(d.get("questions", ())),
        )


def split_classification() -> Classification:
    return Classification(Outcome.SEMANTIC, frozenset({"S1"}))


# ---------------------------------------------------------------------------
# Diff and patch


def _diff_lang_map(field_name: str, old: Mapping[str, str], new: Mapping[str, str]) -> list[ChangeItem]:
    items = []
    for lang in set(old) | set(new):
        path = FieldPath(field_name, lang)
        if lang not in new:
            items.append(ChangeItem(path, Op.REMOVE, old=old[lang]))
        elif lang not in old:
            items.append(ChangeItem(path, Op.ADD, new=new[lang]))
        elif old[lang] != new[lang]:
            items.append(ChangeItem(path, Op.MODIFY, old=old[lang], new=new[lang]))
    return items


def _diff_set(field_name: str, old: frozenset[str], new: frozenset[str], lang: Optional[str] = None) -> list[ChangeItem]:
    path = FieldPath(field_name, lang)
    items = [ChangeItem(path, Op.ADD, new=v) for v in new - old]
    items += [ChangeItem(path, Op.REMOVE, old=v) for v in old - new]
    return items


def diff_concepts(before: Concept, after: Concept) -> list[ChangeItem]:
    """Minimal field-level difference, deterministically ordered.

    Covers the editable surface (labels, definition, scope note, relations,
    status, notes); engine-managed fields (numeric id, successor links,
    imported extras) never appear in change items.
    """
    if before.uri != after.uri:
        raise UriMismatch(f"cannot diff {before.uri} against {after.uri}")
    items: list[ChangeItem] = []
    items += _diff_lang_map("pref_label", before.pref_labels, after.pref_labels)
    for lang in set(before.alt_labels) | set(after.alt_labels):
        items += _diff_set(
            "alt_label",
            before.alt_labels.get(lang, frozenset()),
            after.alt_labels.get(lang, frozenset()),
            lang,
        )
    items += _diff_lang_map("definition", before.definition, after.definition)
    items += _diff_lang_map("scope_note", before.scope_note, after.scope_note)
    items += _diff_set("broader", before.broader, after.broader)
    items += _diff_set("related", before.related, after.related)
    if before.status is not after.status:
        items.append(ChangeItem(FieldPath("status"), Op.MODIFY, old=before.status.value, new=after.status.value))
    items += _diff_set("note", frozenset(before.notes), frozenset(after.notes))
    return sorted(items, key=ChangeItem.sort_key)


def apply_items(concept: Concept, items: Iterable[ChangeItem]) -> Concept:
    """Patch a concept with change items; inverse of diff_concepts."""
    pref = dict(concept.pref_labels)
    alt = {k: set(v) for k, v in concept.alt_labels.items()}
    definition = dict(concept.definition)
    scope = dict(concept.scope_note)
    broader = set(concept.broader)
    related = set(concept.related)
    status = concept.status
    notes = set(concept.notes)

    for item in items:
        f, lang = item.path.field, item.path.lang
        if f == "pref_label":
            if item.op is Op.REMOVE:
                pref.pop(lang, None)
            else:
                pref[lang] = item.new  # type: ignore[assignment]
        elif f == "alt_label":
            bucket = alt.setdefault(lang, set())
            if item.op is Op.ADD:
                bucket.add(item.new)
            elif item.op is Op.REMOVE:
                bucket.discard(item.old)
            else:
                bucket.discard(item.old)
                bucket.add(item.new)
            if not bucket:
                alt.pop(lang, None)
        elif f == "definition":
            if item.op is Op.REMOVE:
                definition.pop(lang, None)
            else:
                definition[lang] = item.new  # type: ignore[assignment]
        elif f == "scope_note":
            if item.op is Op.REMOVE:
                scope.pop(lang, None)
            else:
                scope[lang] = item.new  # type: ignore[assignment]
        elif f == "broader":
            _apply_set(broader, item)
        elif f == "related":
            _apply_set(related, item)
        elif f == "status":
            status = Status(item.new)
        elif f == "note":
            _apply_set(notes, item)
        else:
            raise ValueError(f"unknown field path {item.path}")

    return concept.evolve(
        pref_labels=pref,
        alt_labels={k: frozenset(v) for k, v in alt.items()},
        definition=definition,
        scope_note=scope,
        broader=frozenset(broader),
        related=frozenset(related),
        status=status,
        notes=tuple(notes),
    )


def _apply_set(target: set, item: ChangeItem) -> None:
    if item.op is Op.ADD:
        target.add(item.new)
    elif item.op is Op.REMOVE:
        target.discard(item.old)
    else:
        target.discard(item.old)
        target.add(item.new)


def creation_items(concept: Concept) -> list[ChangeItem]:
    """Items describing a creation: the diff from the empty concept."""
    return diff_concepts(Concept(uri=concept.uri), concept)


# ---------------------------------------------------------------------------
# Classification


def _rule_for(item: ChangeItem, before: Concept, assertion: Optional[Assertion]) -> str:
    f = item.path.field
    if f in ("pref_label", "alt_label"):
        return "NS6"
    if f == "status":
        return "NS4"
    if f == "note":
        return "NS5"
    if f in ("definition", "scope_note"):
        existing = before.definition if f == "definition" else before.scope_note
        if item.op is Op.ADD:
            return "NS3" if not existing else "NS5"
        if assertion is Assertion.CLARIFICATION:
            return "NS2"
        if assertion is Assertion.MEANING_CHANGE:
            return "S2"
        return "NC1"
    if f == "related":
        return "NS1" if item.op is Op.ADD else "NS5"
    if f == "broader":
        if item.op is Op.ADD:
            return "NS1"
        if not before.definition:
            return "S3"
        if assertion is Assertion.CLARIFICATION:
            return "NS1"
        if assertion is Assertion.MEANING_CHANGE:
            return "S3"
        return "NC2"
    raise ValueError(f"unknown field path {item.path}")


def classify(
    items: Sequence[ChangeItem],
    before: Concept,
    assertion: Optional[Assertion] = None,
) -> Classification:
    """Map every item to a rule code and aggregate the batch outcome."""
    if not items:
        raise EmptyItems("nothing to classify")
    reasons = frozenset(_rule_for(item, before, assertion) for item in items)
    if reasons & SEMANTIC_RULES:
        return Classification(Outcome.SEMANTIC, reasons)
    pending = sorted(reasons & CONFIRMATION_RULES)
    if pending:
        return Classification(
            Outcome.NEEDS_CONFIRMATION,
            reasons,
            questions=tuple(_QUESTIONS[code] for code in pending),
        )
    return Classification(Outcome.NON_SEMANTIC, reasons)


# ---------------------------------------------------------------------------
# Events and replay


class EventKind(str, Enum):
    SCHEME_CREATED = "SchemeCreated"
    SCHEME_METADATA_UPDATED = "SchemeMetadataUpdated"
    CONCEPT_CREATED = "ConceptCreated"
    CONCEPT_UPDATED = "ConceptUpdated"
    CONCEPT_DEPRECATED = "ConceptDeprecated"
    CONCEPT_SPLIT = "ConceptSplit"
    CONCEPT_MERGED = "ConceptMerged"


CREATING_KINDS = frozenset({EventKind.CONCEPT_CREATED, EventKind.CONCEPT_SPLIT, EventKind.CONCEPT_MERGED})


@dataclass(frozen=True)
class ChangeEvent:
    """One committed, classified, author-attributed entry in the scheme log.

    ``concept`` carries the full payload for creations (change items cannot
    express engine-managed fields).  ``meta`` carries scheme-level payloads
    for SchemeCreated / SchemeMetadataUpdated.
    """

    scheme_id: str
    version: int
    seq: int
    timestamp: str
    author: str
    kind: EventKind
    concept_uris: tuple[str, ...] = ()
    items: tuple[ChangeItem, ...] = ()
    classification: Optional[Classification] = None
    note: Optional[str] = None
    concept: Optional[Concept] = None
    meta: Optional[dict] = None

    def to_jsonable(self) -> dict:
        d: dict[str, Any] = {
            "scheme_id": self.scheme_id,
            "version": self.version,
            "seq": self.seq,
            "timestamp": self.timestamp,
            "author": self.author,
            "kind": self.kind.value,
            "concept_uris": list(self.concept_uris),
            "items": [i.to_jsonable() for i in self.items],
        }
        if self.classification is not None:
            d["classification"] = self.classification.to_jsonable()
        if self.note is not None:
            d["note"] = self.note
        if self.concept is not None:
            d["concept"] = self.concept.to_jsonable()
        if self.meta is not None:
            d["meta"] = self.meta
        return d

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "ChangeEvent":
        return cls(
            scheme_id=d["scheme_id"],
            version=d["version"],
            seq=d["seq"],
            timestamp=d["timestamp"],
            author=d["author"],
            kind=EventKind(d["kind"]),
            concept_uris=tuple(d.get("concept_uris", ())),
            items=tuple(ChangeItem.from_jsonable(i) for i in d.get("items", ())),
            classification=(
                Classification.from_jsonable(d["classification"]) if "classification" in d else None
            ),
            note=d.get("note"),
            concept=Concept.from_jsonable(d["concept"]) if "concept" in d else None,
            meta=d.get("meta"),
        )


def apply_event(state: Optional[SchemeState], event: ChangeEvent) -> SchemeState:
    """Fold one event into a state. Pure; the input state is not mutated."""
    if event.kind is EventKind.SCHEME_CREATED:
        meta = SchemeMeta.from_jsonable(event.meta or {})
        return SchemeState(
            meta=meta,
            version=event.version,
            concepts={},
            next_numeric=1,
            event_count=event.seq,
        )
    if state is None:
        raise ValueError("first event of a scheme must be SchemeCreated")

    new = state.copy()
    new.version = event.version
    new.event_count = event.seq

    if event.kind is EventKind.SCHEME_METADATA_UPDATED:
        meta = new.meta
        payload = event.meta or {}
        maintainers = set(meta.maintainers) | set(payload.get("maintainers_add", ()))
        new.meta = SchemeMeta(
            id=meta.id,
            token=meta.token,
            title=payload.get("title", meta.title),
            description=payload.get("description", meta.description),
            owner=meta.owner,
            maintainers=frozenset(maintainers),
            uri_strategy=meta.uri_strategy,
            scheme_uri=meta.scheme_uri,
            base_domain=meta.base_domain,
            created_at=meta.created_at,
            head_version=meta.head_version,
        )
    elif event.kind is EventKind.CONCEPT_CREATED:
        concept = event.concept
        if concept is None:
            raise ValueError("ConceptCreated event lacks its concept payload")
        new.concepts[concept.uri] = concept
        if concept.numeric_id is not None:
            new.next_numeric = max(new.next_numeric, concept.numeric_id + 1)
    elif event.kind is EventKind.CONCEPT_UPDATED:
        if event.classification and event.classification.outcome is Outcome.SEMANTIC:
            old_uri, new_uri = event.concept_uris[0], event.concept_uris[-1]
            old = new.concepts[old_uri]
            new.concepts[old_uri] = old.evolve(
                status=Status.DEPRECATED,
                replaced_by=old.replaced_by | {new_uri},
            )
            successor = new.concepts[new_uri]
            new.concepts[new_uri] = successor.evolve(replaces=successor.replaces | {old_uri})
        else:
            uri = event.concept_uris[0]
            new.concepts[uri] = apply_items(new.concepts[uri], event.items)
    elif event.kind is EventKind.CONCEPT_DEPRECATED:
        uri = event.concept_uris[0]
        new.concepts[uri] = new.concepts[uri].evolve(status=Status.DEPRECATED)
    elif event.kind is EventKind.CONCEPT_SPLIT:
        old_uri, successor_uris = event.concept_uris[0], event.concept_uris[1:]
        old = new.concepts[old_uri]
        new.concepts[old_uri] = old.evolve(
            status=Status.DEPRECATED,
            replaced_by=old.replaced_by | set(successor_uris),
        )
        for uri in successor_uris:
            part = new.concepts[uri]
            new.concepts[uri] = part.evolve(replaces=part.replaces | {old_uri})
    elif event.kind is EventKind.CONCEPT_MERGED:
        old_uris, new_uri = event.concept_uris[:-1], event.concept_uris[-1]
        for uri in old_uris:
            old = new.concepts[uri]
            new.concepts[uri] = old.evolve(
                status=Status.DEPRECATED,
                replaced_by=old.replaced_by | {new_uri},
            )
        merged = new.concepts[new_uri]
        new.concepts[new_uri] = merged.evolve(replaces=merged.replaces | set(old_uris))
    else:
        raise ValueError(f"unknown event kind {event.kind}")
    return new


def fold_events(events: Iterable[ChangeEvent], base: Optional[SchemeState] = None) -> SchemeState:
    state = base
    for event in events:
        state = apply_event(state, event)
    if state is None:
        raise ValueError("no events to fold")
    return state


# ---------------------------------------------------------------------------
# Scheme-level diff


@dataclass
class StateDiff:
    """Aggregate difference between two materialized states."""

    created: tuple[str, ...]
    removed: tuple[str, ...]
    deprecated: tuple[str, ...]
    changed: dict[str, list[ChangeItem]]

    @property
    def empty(self) -> bool:
        return not (self.created or self.removed or self.deprecated or self.changed)

    def to_jsonable(self) -> dict:
        return {
            "created": list(self.created),
            "removed": list(self.removed),
            "deprecated": list(self.deprecated),
            "changed": {u: [i.to_jsonable() for i in items] for u, items in sorted(self.changed.items())},
        }

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "StateDiff":
        return cls(
            created=tuple(d.get("created", ())),
            removed=tuple(d.get("removed", ())),
            deprecated=tuple(d.get("deprecated", ())),
            changed={
                u: [ChangeItem.from_jsonable(i) for i in items]
                for u, items in d.get("changed", {}).items()
            },
        )


def diff_concept_maps(old: Mapping[str, Concept], new: Mapping[str, Concept]) -> StateDiff:
    created = tuple(sorted(set(new) - set(old)))
    removed = tuple(sorted(set(old) - set(new)))
    deprecated = tuple(
        sorted(u for u in set(old) & set(new) if new[u].deprecated and not old[u].deprecated)
    )
    changed: dict[str, list[ChangeItem]] = {}
    for uri in sorted(set(old) & set(new)):
        items = diff_concepts(old[uri], new[uri])
        if items:
            changed[uri] = items
    return StateDiff(created=created, removed=removed, deprecated=deprecated, changed=changed)


# ---------------------------------------------------------------------------
# Human-readable listings


def render_item(uri: str, item: ChangeItem) -> str:
    old = item.old if item.old is not None else "-"
    new = item.new if item.new is not None else "-"
    return f"{uri} {item.path} {item.op.value} {old} -> {new}"


def render_event(event: ChangeEvent) -> list[str]:
    lines = []
    uri = event.concept_uris[0] if event.concept_uris else event.scheme_id
    if event.kind in (EventKind.CONCEPT_SPLIT, EventKind.CONCEPT_MERGED):
        lines.append(f"{uri} {event.kind.value} -> {' '.join(event.concept_uris[1:])}")
    elif event.kind is EventKind.SCHEME_CREATED:
        lines.append(f"{event.scheme_id} {event.kind.value}")
    for item in event.items:
        lines.append(render_item(uri, item))
    return lines


def render_listing(events: Iterable[ChangeEvent]) -> str:
    lines: list[str] = []
    for event in events:
        lines.extend(render_event(event))
    return "\n".join(lines)


def render_state_diff(diff: StateDiff) -> str:
    lines = [f"{uri} created" for uri in diff.created]
    lines += [f"{uri} removed" for uri in diff.removed]
    lines += [f"{uri} deprecated" for uri in diff.deprecated]
    for uri in sorted(diff.changed):
        lines += [render_item(uri, item) for item in diff.changed[uri]]
    return "\n".join(lines)
