"""Subscriptions, notifications, confirmation tickets, and Atom rendering.

Delivery machinery, not transport: messages land in an append-only outbox
file (one canonical-JSON record per line) and feeds are rendered straight
from the event log, so every committed version appears exactly once no
matter how often emission retries.
"""

from __future__ import annotations

import secrets
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence
from xml.etree import ElementTree as ET

from .changes import ChangeEvent, CREATING_KINDS, Outcome
from .model import canonical_json

SCOPE_ALL = "all"
CHANNEL_FEED = "feed"
CHANNEL_MESSAGE = "message"
GRANULARITY_EVERY = "every_commit"
GRANULARITY_SEMANTIC = "semantic_only"

KIND_CHANGE = "change"
KIND_CONFIRMATION = "confirmation_request"
KIND_VALIDATION = "validation_problem"
KIND_USAGE = "usage_registered"
KIND_NEW_URI = "new_uri"

TICKET_LIFETIME = timedelta(days=14)


def now_stamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds").replace("+00:00", "Z")


def new_token() -> str:
    return secrets.token_urlsafe(16)  # 128 bits


def new_id(prefix: str) -> str:
    return f"{prefix}-{uuid.uuid4().hex[:12]}"


@dataclass(frozen=True)
class Subscription:
    id: str
    agent: str
    scope: str  # "all" or a scheme id
    channel: str
    granularity: str

    def key(self) -> tuple:
        return (self.agent, self.scope, self.channel, self.granularity)

    def matches_scheme(self, scheme_id: str) -> bool:
        return self.scope == SCOPE_ALL or self.scope == scheme_id

    def to_jsonable(self) -> dict:
        return {
            "id": self.id,
            "agent": self.agent,
            "scope": self.scope,
            "channel": self.channel,
            "granularity": self.granularity,
        }

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "Subscription":
        return cls(d["id"], d["agent"], d["scope"], d["channel"], d["granularity"])


@dataclass(frozen=True)
class Notification:
    id: str
    recipient: str
    subject: str
    body: str
    links: tuple[tuple[str, str], ...] = ()
    created_at: str = ""
    kind: str = KIND_CHANGE

    def __post_init__(self):
        if self.kind == KIND_CONFIRMATION and len(self.links) != 2:
            raise ValueError("confirmation requests carry exactly a yes link and a no link")

    def to_jsonable(self) -> dict:
        return {
            "id": self.id,
            "recipient": self.recipient,
            "subject": self.subject,
            "body": self.body,
            "links": [list(l) for l in self.links],
            "created_at": self.created_at,
            "kind": self.kind,
        }

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "Notification":
        return cls(
            id=d["id"],
            recipient=d["recipient"],
            subject=d["subject"],
            body=d["body"],
            links=tuple((l[0], l[1]) for l in d.get("links", ())),
            created_at=d.get("created_at", ""),
            kind=d.get("kind", KIND_CHANGE),
        )


@dataclass
class ConfirmationTicket:
    token: str
    scheme_id: str
    pending: dict  # the held batch, as submitted (never in the event log)
    question: str
    issued_to: str
    issued_at: str
    expires_at: str
    used: bool = False
    answer: Optional[str] = None

    def expired(self, at: Optional[str] = None) -> bool:
        return (at or now_stamp()) > self.expires_at

    def to_jsonable(self) -> dict:
        return {
            "token": self.token,
            "scheme_id": self.scheme_id,
            "pending": self.pending,
            "question": self.question,
            "issued_to": self.issued_to,
            "issued_at": self.issued_at,
            "expires_at": self.expires_at,
            "used": self.used,
            "answer": self.answer,
        }

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "ConfirmationTicket":
        return cls(
            token=d["token"],
            scheme_id=d["scheme_id"],
            pending=d["pending"],
            question=d["question"],
            issued_to=d["issued_to"],
            issued_at=d.get("issued_at", ""),
            expires_at=d["expires_at"],
            used=d.get("used", False),
            answer=d.get("answer"),
        )


def make_ticket(scheme_id: str, pending: dict, question: str, issued_to: str) -> ConfirmationTicket:
    issued = datetime.now(timezone.utc)
    return ConfirmationTicket(
        token=new_token(),
        scheme_id=scheme_id,
        pending=pending,
        question=question,
        issued_to=issued_to,
        issued_at=issued.isoformat(timespec="seconds").replace("+00:00", "Z"),
        expires_at=(issued + TICKET_LIFETIME).isoformat(timespec="seconds").replace("+00:00", "Z"),
    )


@dataclass(frozen=True)
class UsageRegistration:
    agent: str
    scheme_id: str
    registered_at: str

    def to_jsonable(self) -> dict:
        return {"agent": self.agent, "scheme_id": self.scheme_id, "registered_at": self.registered_at}

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "UsageRegistration":
        return cls(d["agent"], d["scheme_id"], d["registered_at"])


class Outbox:
    """Append-only message sink standing in for mail transport."""

    def __init__(self, path: str | Path):
        self.path = Path(path)

    def deliver(self, note: Notification) -> None:
        record = canonical_json(
            {
                "to": note.recipient,
                "subject": note.subject,
                "body": note.body,
                "links": [list(l) for l in note.links],
            }
        )
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(record + "\n")

    def read_all(self) -> list[dict]:
        import json

        if not self.path.exists():
            return []
        out = []
        with open(self.path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out


# ---------------------------------------------------------------------------
# Commit-batch significance

def batch_is_semantic(events: Sequence[ChangeEvent]) -> bool:
    """Whether a committed batch matters to semantic_only subscribers.

    True for semantic reclassifications and for anything that brings a new
    URI into the world; routine in-place edits stay quiet.
    """
    for event in events:
        if event.classification and event.classification.outcome is Outcome.SEMANTIC:
            return True
        if event.kind in CREATING_KINDS:
            return True
    return False


def wants_batch(sub: Subscription, scheme_id: str, events: Sequence[ChangeEvent]) -> bool:
    if not sub.matches_scheme(scheme_id):
        return False
    if sub.granularity == GRANULARITY_SEMANTIC:
        return batch_is_semantic(events)
    return True


# ---------------------------------------------------------------------------
# Atom rendering

ATOM_NS = "http://www.w3.org/2005/Atom"


@dataclass(frozen=True)
class FeedEntry:
    version: int
    updated: str
    title: str
    content: str


def render_feed(
    scheme_token: str,
    scheme_title: str,
    entries: Iterable[FeedEntry],
    self_url: Optional[str] = None,
) -> str:
    """Well-formed Atom; one entry per committed version, newest first."""
    ET.register_namespace("", ATOM_NS)
    feed = ET.Element(f"{{{ATOM_NS}}}feed")
    ordered = sorted(entries, key=lambda e: e.version, reverse=True)

    ET.SubElement(feed, f"{{{ATOM_NS}}}id").text = f"urn:reg:{scheme_token}"
    ET.SubElement(feed, f"{{{ATOM_NS}}}title").text = f"Changes to {scheme_title}"
    ET.SubElement(feed, f"{{{ATOM_NS}}}updated").text = (
        ordered[0].updated if ordered else now_stamp()
    )
    if self_url:
        ET.SubElement(feed, f"{{{ATOM_NS}}}link", rel="self", href=self_url)

    for entry in ordered:
        node = ET.SubElement(feed, f"{{{ATOM_NS}}}entry")
        ET.SubElement(node, f"{{{ATOM_NS}}}id").text = f"urn:reg:{scheme_token}:{entry.version}"
        ET.SubElement(node, f"{{{ATOM_NS}}}title").text = entry.title
        ET.SubElement(node, f"{{{ATOM_NS}}}updated").text = entry.updated
        content = ET.SubElement(node, f"{{{ATOM_NS}}}content", type="text")
        content.text = entry.content

    return ET.tostring(feed, encoding="unicode", xml_declaration=True)
