"""Request bodies for the HTTP API, validated at the edge by pydantic."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

from ..model import ConceptDraft, StrategyKind, UriStrategy


class ContactIn(BaseModel):
    label: str
    address: str


class AgentIn(BaseModel):
    name: str
    kind: Literal["individual", "organization"] = "individual"
    contacts: list[ContactIn] = Field(default_factory=list)


class StrategyIn(BaseModel):
    kind: Literal["provided", "template", "registry_assigned"] = "registry_assigned"
    template: Optional[str] = None
    base: Optional[str] = None

    def build(self) -> UriStrategy:
        return UriStrategy(kind=StrategyKind(self.kind), template=self.template, base=self.base)


class SchemeIn(BaseModel):
    token: str
    title: str
    description: str = ""
    strategy: StrategyIn = Field(default_factory=StrategyIn)
    scheme_uri: Optional[str] = None


class ConceptIn(BaseModel):
    uri: Optional[str] = None
    pref_labels: dict[str, str] = Field(default_factory=dict)
    alt_labels: dict[str, list[str]] = Field(default_factory=dict)
    definition: dict[str, str] = Field(default_factory=dict)
    scope_note: dict[str, str] = Field(default_factory=dict)
    broader: list[str] = Field(default_factory=list)
    related: list[str] = Field(default_factory=list)
    notes: list[str] = Field(default_factory=list)
    status: Optional[str] = None

    def to_draft(self) -> ConceptDraft:
        draft = ConceptDraft(
            uri=self.uri,
            pref_labels=sorted(self.pref_labels.items()),
            alt_labels=sorted(
                (lang, text) for lang, texts in self.alt_labels.items() for text in texts
            ),
            definition=dict(self.definition),
            scope_note=dict(self.scope_note),
            broader=set(self.broader),
            related=set(self.related),
            notes=list(self.notes),
            uri_provided=bool(self.uri),
        )
        if self.status:
            draft.status = self.status
        return draft


class AddConceptIn(BaseModel):
    concept: ConceptIn
    expected_version: Optional[int] = None


class ChangeItemIn(BaseModel):
    field: str
    op: Literal["add", "remove", "modify"]
    old: Optional[str] = None
    new: Optional[str] = None

    def to_jsonable(self) -> dict:
        d: dict = {"field": self.field, "op": self.op}
        if self.old is not None:
            d["old"] = self.old
        if self.new is not None:
            d["new"] = self.new
        return d


class UpdateIn(BaseModel):
    items: Optional[list[ChangeItemIn]] = None
    replacement: Optional[ConceptIn] = None
    assertion: Optional[Literal["clarification", "meaning_change"]] = None
    expected_version: Optional[int] = None


class StatusIn(BaseModel):
    status: str
    expected_version: Optional[int] = None


class DeprecateIn(BaseModel):
    expected_version: Optional[int] = None


class SplitIn(BaseModel):
    drafts: list[ConceptIn]
    expected_version: Optional[int] = None


class MergeIn(BaseModel):
    sources: list[str] = Field(default_factory=list)
    draft: ConceptIn
    expected_version: Optional[int] = None


class SubscriptionIn(BaseModel):
    scope: str = "all"
    channel: Literal["feed", "message"] = "feed"
    granularity: Literal["every_commit", "semantic_only"] = "every_commit"


class UsageIn(BaseModel):
    scheme: str


class IngestIn(BaseModel):
    source: str
    scheme_uri: Optional[str] = None
    payload: str


class HarvestIn(BaseModel):
    peer: str
    scheme: Optional[str] = None
