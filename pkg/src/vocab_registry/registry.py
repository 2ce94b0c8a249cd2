"""The registry: agents, hosted schemes, tickets, copies, and delivery.

One Registry owns one data directory.  All mutation funnels through its
per-scheme commit pipeline: build events → fold → validate the resulting
state → append (durable) → cache → deliver notifications.  Nothing is ever
deleted; deprecation is the only retirement.

Alongside the per-scheme event logs the registry keeps a small sidecar
(`registry.json`) for everything that is not scheme history: agents, API
tokens, subscriptions, usage registrations, notifications, confirmation
tickets, delivery de-duplication keys, and the sequenced-copy index.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Optional, Sequence

from . import notify as notify_mod
from .changes import (
    Assertion,
    ChangeEvent,
    ChangeItem,
    Classification,
    CREATING_KINDS,
    EventKind,
    FieldPath,
    Op,
    Outcome,
    StateDiff,
    apply_items,
    classify,
    creation_items,
    diff_concept_maps,
    diff_concepts,
    render_listing,
    split_classification,
)
from .errors import (
    AlreadyDeprecated,
    BadUri,
    Deprecated,
    DeprecatedIsTerminal,
    DuplicateUri,
    EmptyEdits,
    EmptyName,
    MintFailed,
    NoContacts,
    NotMaintainer,
    NotOwner,
    ParseFailed,
    RegistryError,
    TokenExpired,
    TokenTaken,
    TokenUsed,
    TooFewDrafts,
    TooFewSources,
    Unauthenticated,
    UnknownAgent,
    UnknownConcept,
    UnknownFormat,
    UnknownScheme,
    UnknownSubscription,
    UnknownToken,
    UnknownVersion,
    ValidationFailed,
    VersionConflict,
)
from .model import (
    Agent,
    AgentKind,
    Concept,
    ConceptDraft,
    SchemeDraft,
    SchemeMeta,
    SchemeState,
    Status,
    StrategyKind,
    UriStrategy,
    canonical_json,
    check_token,
)
from .notify import (
    CHANNEL_FEED,
    CHANNEL_MESSAGE,
    ConfirmationTicket,
    FeedEntry,
    GRANULARITY_EVERY,
    GRANULARITY_SEMANTIC,
    KIND_CHANGE,
    KIND_CONFIRMATION,
    KIND_NEW_URI,
    KIND_USAGE,
    KIND_VALIDATION,
    Notification,
    Outbox,
    SCOPE_ALL,
    Subscription,
    UsageRegistration,
    make_ticket,
    new_id,
    now_stamp,
    render_feed,
    wants_batch,
)
from .skosio import (
    DEFAULT_REG_BASE,
    FORMAT_CSV,
    FORMAT_STRUCTURED,
    FORMAT_TRIPLES,
    LossReport,
    content_to_triples,
    parse_csv,
    parse_ntriples,
    scheme_to_triples,
    serialize_csv,
    triples_to_scheme,
)
from .store import EventLog, SNAPSHOT_EVERY
from .uris import mint, validate_uri
from .validation import Violation, errors_only, validate_batch, validate_state

DEFAULT_BASE_URI = "http://purl.example/registry"
SYSTEM_AGENT = "registry"
STATUS_TOKEN = "status"

STATUS_DEFINITIONS = {
    "proposed": "Submitted to the registry and awaiting a decision.",
    "approved": "Endorsed by the scheme maintainers for active use.",
    "deprecated": "Retired from active use; retained so existing references keep resolving.",
}


@dataclass(frozen=True)
class UpdateOutcome:
    """What an update did: in-place edit, successor mint, or held batch."""

    kind: str  # Updated | SuccessorMinted | PendingConfirmation
    version: int
    uri: str
    new_uri: Optional[str] = None
    ticket: Optional[ConfirmationTicket] = None
    classification: Optional[Classification] = None
    noop: bool = False

    def to_jsonable(self) -> dict:
        d: dict[str, Any] = {"kind": self.kind, "version": self.version, "uri": self.uri}
        if self.new_uri:
            d["new_uri"] = self.new_uri
        if self.ticket:
            d["ticket"] = {"token": self.ticket.token, "question": self.ticket.question}
        if self.classification:
            d["classification"] = self.classification.to_jsonable()
        if self.noop:
            d["noop"] = True
        return d


@dataclass
class SequencedCopy:
    """Locally tracked snapshot of a scheme hosted somewhere else."""

    id: str
    source: str
    scheme_uri: str
    seq: int
    retrieved_at: str
    title: str
    description: str
    concepts: dict[str, Concept]
    diff: StateDiff
    peer_version: Optional[int] = None

    def to_triples(self, reg_base: str = DEFAULT_REG_BASE) -> str:
        return content_to_triples(
            self.scheme_uri, self.title, self.description, self.concepts, reg_base
        )

    def content_jsonable(self) -> dict:
        return {
            "source": self.source,
            "scheme_uri": self.scheme_uri,
            "seq": self.seq,
            "retrieved_at": self.retrieved_at,
            "peer_version": self.peer_version,
            "title": self.title,
            "description": self.description,
            "concepts": {u: self.concepts[u].to_jsonable() for u in sorted(self.concepts)},
            "diff": self.diff.to_jsonable(),
        }


def _build_copy(copy_id: str, d: Mapping) -> SequencedCopy:
    return SequencedCopy(
        id=copy_id,
        source=d["source"],
        scheme_uri=d["scheme_uri"],
        seq=d["seq"],
        retrieved_at=d["retrieved_at"],
        title=d.get("title", ""),
        description=d.get("description", ""),
        concepts={u: Concept.from_jsonable(c) for u, c in d["concepts"].items()},
        diff=StateDiff.from_jsonable(d.get("diff", {})),
        peer_version=d.get("peer_version"),
    )


class Registry:
    def __init__(
        self,
        data_dir: str | os.PathLike,
        base_uri: Optional[str] = None,
        reg_base: str = DEFAULT_REG_BASE,
        snapshot_every: int = SNAPSHOT_EVERY,
    ):
        self.data_dir = Path(data_dir)
        self.base_uri = (base_uri or DEFAULT_BASE_URI).rstrip("/")
        self.reg_base = reg_base
        self.log = EventLog(self.data_dir, snapshot_every)
        self.outbox = Outbox(self.data_dir / "outbox.jsonl")
        self._sidecar_path = self.data_dir / "registry.json"

        self._global = threading.RLock()
        self._scheme_locks: dict[str, threading.Lock] = {}

        self._agents: dict[str, Agent] = {}
        self._api_tokens: dict[str, str] = {}  # secret -> agent id
        self._scheme_ids: dict[str, str] = {}  # token -> scheme id
        self._states: dict[str, SchemeState] = {}  # token -> head state
        self._subscriptions: dict[str, Subscription] = {}
        self._usages: dict[tuple[str, str], UsageRegistration] = {}
        self._notifications: list[Notification] = []
        self._tickets: dict[str, ConfirmationTicket] = {}
        self._delivered: set[str] = set()
        self._floors: dict[str, int] = {}  # token -> highest reserved counter
        self._copies: dict[str, dict] = {}  # copy id -> index entry

        self._load()
        self._bootstrap()

    # ------------------------------------------------------------------
    # Sidecar persistence

    def _load(self) -> None:
        if self._sidecar_path.exists():
            raw = json.loads(self._sidecar_path.read_text(encoding="utf-8"))
            self._agents = {a["id"]: Agent.from_jsonable(a) for a in raw.get("agents", ())}
            self._api_tokens = dict(raw.get("api_tokens", {}))
            self._scheme_ids = dict(raw.get("schemes", {}))
            self._subscriptions = {
                s["id"]: Subscription.from_jsonable(s) for s in raw.get("subscriptions", ())
            }
            self._usages = {
                (u["agent"], u["scheme_id"]): UsageRegistration.from_jsonable(u)
                for u in raw.get("usages", ())
            }
            self._notifications = [
                Notification.from_jsonable(n) for n in raw.get("notifications", ())
            ]
            self._tickets = {
                t["token"]: ConfirmationTicket.from_jsonable(t) for t in raw.get("tickets", ())
            }
            self._delivered = set(raw.get("delivered", ()))
            self._floors = dict(raw.get("numeric_floor", {}))
            self._copies = dict(raw.get("copies", {}))
        for token in self.log.tokens():
            self._states[token] = self.log.materialize(token)
            self._scheme_ids.setdefault(token, self._states[token].meta.id)

    def _save(self) -> None:
        payload = {
            "agents": [a.to_jsonable() for a in self._agents.values()],
            "api_tokens": self._api_tokens,
            "schemes": self._scheme_ids,
            "subscriptions": [s.to_jsonable() for s in self._subscriptions.values()],
            "usages": [u.to_jsonable() for u in self._usages.values()],
            "notifications": [n.to_jsonable() for n in self._notifications],
            "tickets": [t.to_jsonable() for t in self._tickets.values()],
            "delivered": sorted(self._delivered),
            "numeric_floor": self._floors,
            "copies": self._copies,
        }
        tmp = self._sidecar_path.with_suffix(".tmp")
        tmp.write_text(canonical_json(payload) + "\n", encoding="utf-8")
        os.replace(tmp, self._sidecar_path)

    def _bootstrap(self) -> None:
        """Fresh data directories get the system agent and the status scheme."""
        with self._global:
            if SYSTEM_AGENT not in self._agents:
                self._agents[SYSTEM_AGENT] = Agent(
                    id=SYSTEM_AGENT,
                    kind=AgentKind.ORGANIZATION,
                    name="Registry",
                    contacts=(),
                )
                self._save()
        if STATUS_TOKEN not in self._scheme_ids:
            self.create_scheme(
                owner=SYSTEM_AGENT,
                token=STATUS_TOKEN,
                title="Term status",
                description="Lifecycle states available to every hosted term.",
                strategy=UriStrategy(kind=StrategyKind.REGISTRY_ASSIGNED),
            )
            for value in ("proposed", "approved", "deprecated"):
                draft = ConceptDraft(
                    pref_labels=[("en", value)],
                    definition={"en": STATUS_DEFINITIONS[value]},
                )
                self.add_concept(STATUS_TOKEN, draft, author=SYSTEM_AGENT)
                concept = next(
                    c
                    for c in self._states[STATUS_TOKEN].concepts.values()
                    if c.pref_labels.get("en") == value
                )
                self.set_status(STATUS_TOKEN, concept.uri, "approved", author=SYSTEM_AGENT)

    # ------------------------------------------------------------------
    # Lookup plumbing

    def _lock_for(self, token: str) -> threading.Lock:
        with self._global:
            return self._scheme_locks.setdefault(token, threading.Lock())

    def _require_agent(self, agent_id: str) -> Agent:
        agent = self._agents.get(agent_id)
        if agent is None:
            raise UnknownAgent(f"no agent {agent_id!r}")
        return agent

    def _state(self, token: str) -> SchemeState:
        state = self._states.get(token)
        if state is None:
            raise UnknownScheme(f"no scheme with token {token!r}")
        return state

    def token_for_id(self, scheme_id: str) -> str:
        for token, sid in self._scheme_ids.items():
            if sid == scheme_id:
                return token
        raise UnknownScheme(f"no scheme with id {scheme_id!r}")

    def resolve_scheme(self, ref: str) -> str:
        """Accept a token or a scheme id; return the token."""
        if ref in self._states:
            return ref
        return self.token_for_id(ref)

    def _require_maintainer(self, state: SchemeState, agent_id: str) -> None:
        self._require_agent(agent_id)
        if not state.meta.is_maintainer(agent_id):
            raise NotMaintainer(f"{agent_id} does not maintain {state.meta.token!r}")

    # ------------------------------------------------------------------
    # Agents and API tokens

    def register_agent(
        self,
        name: str,
        kind: str | AgentKind,
        contacts: Sequence[tuple[str, str]],
        agent_id: Optional[str] = None,
    ) -> Agent:
        if not (name or "").strip():
            raise EmptyName("agent name must be non-empty")
        if not contacts:
            raise NoContacts("an agent needs at least one contact")
        if agent_id is not None and agent_id in self._agents:
            raise TokenTaken(f"agent id {agent_id!r} is taken")
        from .model import Contact

        agent = Agent(
            id=agent_id or new_id("a"),
            kind=AgentKind(kind),
            name=name.strip(),
            contacts=tuple(Contact(label, address) for label, address in contacts),
        )
        with self._global:
            self._agents[agent.id] = agent
            self._save()
        return agent

    def get_agent(self, agent_id: str) -> Agent:
        return self._require_agent(agent_id)

    def issue_api_token(self, agent_id: str) -> str:
        """One active secret per agent; reissue revokes the old one."""
        self._require_agent(agent_id)
        secret = notify_mod.new_token()
        with self._global:
            for existing, holder in list(self._api_tokens.items()):
                if holder == agent_id:
                    del self._api_tokens[existing]
            self._api_tokens[secret] = agent_id
            self._save()
        return secret

    def agent_for_api_token(self, secret: str) -> str:
        agent_id = self._api_tokens.get(secret or "")
        if agent_id is None:
            raise Unauthenticated("unknown or revoked API token")
        return agent_id

    # ------------------------------------------------------------------
    # Scheme lifecycle

    def create_scheme(
        self,
        owner: str,
        token: str,
        title: str,
        strategy: Optional[UriStrategy] = None,
        description: str = "",
        scheme_uri: Optional[str] = None,
    ) -> SchemeMeta:
        self._require_agent(owner)
        check_token(token)
        strategy = strategy or UriStrategy(kind=StrategyKind.REGISTRY_ASSIGNED)
        strategy.check()
        if not (title or "").strip():
            raise EmptyName("scheme title must be non-empty")
        uri = scheme_uri or f"{(strategy.base or self.base_uri).rstrip('/')}/{token}"
        problems = [m for s, m in validate_uri(uri) if s == "error"]
        if problems:
            raise BadUri("; ".join(problems))

        with self._global:
            if token in self._scheme_ids:
                raise TokenTaken(f"token {token!r} is already in use")
            meta = SchemeMeta(
                id=new_id("s"),
                token=token,
                title=title.strip(),
                description=description,
                owner=owner,
                maintainers=frozenset({owner}),
                uri_strategy=strategy,
                scheme_uri=uri,
                base_domain=strategy.base,
                created_at=now_stamp(),
                head_version=1,
            )
            self._scheme_ids[token] = meta.id
            self._save()

        event = ChangeEvent(
            scheme_id=meta.id,
            version=1,
            seq=1,
            timestamp=meta.created_at,
            author=owner,
            kind=EventKind.SCHEME_CREATED,
            meta=meta.to_jsonable(),
        )
        with self._lock_for(token):
            self.log.append(token, 1, [event])
            state = SchemeState(meta=meta, version=1, concepts={})
            state.event_count = 1
            self._states[token] = state
        self._emit_batch(token, 1, [event])
        return meta

    def designate_maintainer(self, scheme: str, agent: str, actor: str) -> SchemeMeta:
        token = self.resolve_scheme(scheme)
        self._require_agent(agent)
        with self._lock_for(token):
            state = self._state(token)
            if actor != state.meta.owner:
                raise NotOwner(f"only the owner may designate maintainers of {token!r}")
            if agent in state.meta.maintainers:
                return state.meta
            event = self._event(
                state,
                actor,
                EventKind.SCHEME_METADATA_UPDATED,
                meta={"maintainers_add": [agent]},
            )
            state = self._commit(token, state, [event])
        return state.meta

    # ------------------------------------------------------------------
    # Commit pipeline

    def _event(
        self,
        state: SchemeState,
        author: str,
        kind: EventKind,
        *,
        offset: int = 1,
        concept_uris: tuple[str, ...] = (),
        items: Sequence[ChangeItem] = (),
        classification: Optional[Classification] = None,
        concept: Optional[Concept] = None,
        meta: Optional[dict] = None,
        note: Optional[str] = None,
    ) -> ChangeEvent:
        return ChangeEvent(
            scheme_id=state.meta.id,
            version=state.version + 1,
            seq=state.event_count + offset,
            timestamp=now_stamp(),
            author=author,
            kind=kind,
            concept_uris=concept_uris,
            items=tuple(items),
            classification=classification,
            concept=concept,
            meta=meta,
            note=note,
        )

    def _commit(self, token: str, state: SchemeState, events: Sequence[ChangeEvent]) -> SchemeState:
        """Fold, validate, append, cache, deliver. Caller holds the scheme lock."""
        new_state = state
        for event in events:
            from .changes import apply_event

            new_state = apply_event(new_state, event)
        problems = errors_only(validate_state(new_state.concepts, new_state.meta.scheme_uri))
        if problems:
            raise ValidationFailed(problems)
        version = events[0].version
        self.log.append(token, version, events)
        self.log.maybe_snapshot(token, new_state)
        self._states[token] = new_state
        self._emit_batch(token, version, events)
        return new_state

    def _check_expected(self, state: SchemeState, expected_version: Optional[int]) -> None:
        if expected_version is not None and expected_version != state.version:
            raise VersionConflict(expected=expected_version, actual=state.version)

    # ------------------------------------------------------------------
    # Minting

    def _mint_for(
        self,
        state: SchemeState,
        draft: ConceptDraft,
        also_taken: Iterable[str] = (),
    ) -> tuple[str, Optional[int]]:
        token = state.meta.token
        strategy = state.meta.uri_strategy
        occupied = set(state.concepts) | set(also_taken)
        taken = occupied.__contains__

        if draft.uri:
            problems = validate_uri(draft.uri, minted=False)
            errors = [m for s, m in problems if s == "error"]
            if errors:
                raise BadUri("; ".join(errors))
            if taken(draft.uri):
                raise DuplicateUri(f"URI {draft.uri!r} is already registered")
            return draft.uri, draft.numeric_id

        if strategy.kind is StrategyKind.PROVIDED:
            raise MintFailed(f"scheme {token!r} expects author-provided URIs")

        numeric_based = strategy.kind is StrategyKind.REGISTRY_ASSIGNED or (
            strategy.template is not None and "{numeric}" in strategy.template
        )
        counter = max(state.next_numeric, self._floors.get(token, 0) + 1)
        while True:
            try:
                return mint(
                    strategy,
                    token,
                    label_hint=draft.label_hint(),
                    counter=counter,
                    registry_base=self.base_uri,
                    taken=taken,
                )
            except DuplicateUri:
                if not numeric_based:
                    raise
                counter += 1  # consumed; counters are never reused

    def next_numeric(self, scheme: str) -> int:
        """Reserve and return the next counter value. Never repeats."""
        token = self.resolve_scheme(scheme)
        with self._global:
            state = self._state(token)
            value = max(state.next_numeric, self._floors.get(token, 0) + 1)
            self._floors[token] = value
            self._save()
        return value

    # ------------------------------------------------------------------
    # Concept lifecycle

    def add_concept(
        self,
        scheme: str,
        draft: ConceptDraft,
        author: str,
        expected_version: Optional[int] = None,
    ) -> Concept:
        token = self.resolve_scheme(scheme)
        with self._lock_for(token):
            state = self._state(token)
            self._require_maintainer(state, author)
            self._check_expected(state, expected_version)
            if not draft.pref_labels:
                raise ValidationFailed(
                    [Violation("R1", draft.uri or "-", "a concept needs at least one prefLabel")]
                )
            uri, numeric = self._mint_for(state, draft)
            draft.uri, draft.numeric_id = uri, numeric
            draft.status = Status.PROPOSED.value  # authored terms start proposed
            draft.in_scheme = draft.in_scheme or state.meta.scheme_uri
            problems = errors_only(
                validate_batch(state.concepts, [draft], state.meta.scheme_uri)
            )
            if problems:
                raise ValidationFailed(problems)
            concept = draft.build()
            event = self._event(
                state,
                author,
                EventKind.CONCEPT_CREATED,
                concept_uris=(concept.uri,),
                items=creation_items(concept),
                concept=concept,
            )
            state = self._commit(token, state, [event])
        return state.concepts[concept.uri]

    def get_concept(self, scheme: str, key: str) -> Concept:
        """Look a concept up by URI, numeric id, or minted-path tail."""
        token = self.resolve_scheme(scheme)
        state = self._state(token)
        if key in state.concepts:
            return state.concepts[key]
        if key.isdigit():
            for c in state.concepts.values():
                if c.numeric_id == int(key):
                    return c
        for uri, c in sorted(state.concepts.items()):
            if uri.rsplit("/", 1)[-1] == key:
                return c
        raise UnknownConcept(f"no concept {key!r} in scheme {token!r}")

    def _normalize_edits(
        self,
        concept: Concept,
        edits: Sequence[ChangeItem] | Sequence[Mapping] | ConceptDraft | Concept,
    ) -> list[ChangeItem]:
        if isinstance(edits, ConceptDraft):
            replacement = edits.build().evolve(
                uri=concept.uri,
                numeric_id=concept.numeric_id,
                replaced_by=concept.replaced_by,
                replaces=concept.replaces,
                extras=concept.extras,
            )
            return diff_concepts(concept, replacement)
        if isinstance(edits, Concept):
            return diff_concepts(concept, edits)
        items = [
            item if isinstance(item, ChangeItem) else ChangeItem.from_jsonable(item)
            for item in edits
        ]
        if not items:
            raise EmptyEdits("an update needs at least one change")
        return items

    def preview_update(
        self,
        scheme: str,
        uri: str,
        edits: Sequence[ChangeItem] | Sequence[Mapping] | ConceptDraft | Concept,
        assertion: Optional[str | Assertion] = None,
    ) -> tuple[list[ChangeItem], Optional[Classification]]:
        """Diff + classification of an edit, committing nothing."""
        token = self.resolve_scheme(scheme)
        state = self._state(token)
        concept = state.concepts.get(uri)
        if concept is None:
            raise UnknownConcept(f"no concept {uri!r} in scheme {token!r}")
        items = self._normalize_edits(concept, edits)
        after = apply_items(concept, items)
        effective = diff_concepts(concept, after)
        if not effective:
            return [], None
        assertion_value = Assertion(assertion) if assertion else None
        return effective, classify(effective, concept, assertion_value)

    def update_concept(
        self,
        scheme: str,
        uri: str,
        edits: Sequence[ChangeItem] | Sequence[Mapping] | ConceptDraft | Concept,
        author: str,
        assertion: Optional[str | Assertion] = None,
        expected_version: Optional[int] = None,
    ) -> UpdateOutcome:
        token = self.resolve_scheme(scheme)
        assertion_value = Assertion(assertion) if assertion else None
        with self._lock_for(token):
            state = self._state(token)
            self._require_maintainer(state, author)
            self._check_expected(state, expected_version)
            concept = state.concepts.get(uri)
            if concept is None:
                raise UnknownConcept(f"no concept {uri!r} in scheme {token!r}")
            if concept.deprecated:
                raise Deprecated(f"{uri} is deprecated; edit its successor instead")

            items = self._normalize_edits(concept, edits)
            after = apply_items(concept, items)
            effective = diff_concepts(concept, after)
            if not effective:
                return UpdateOutcome("Updated", state.version, uri, noop=True)
            if any(
                i.path.field == "status" and i.new == Status.DEPRECATED.value for i in effective
            ):
                raise DeprecatedIsTerminal(
                    "status cannot be edited to deprecated; use the deprecation operation"
                )

            classification = classify(effective, concept, assertion_value)

            if classification.outcome is Outcome.NON_SEMANTIC:
                event = self._event(
                    state,
                    author,
                    EventKind.CONCEPT_UPDATED,
                    concept_uris=(uri,),
                    items=effective,
                    classification=classification,
                )
                state = self._commit(token, state, [event])
                return UpdateOutcome(
                    "Updated", state.version, uri, classification=classification
                )

            if classification.outcome is Outcome.SEMANTIC:
                successor_draft = ConceptDraft.from_concept(after)
                successor_draft.uri = None
                successor_draft.numeric_id = None
                successor_draft.replaces = set()
                successor_draft.replaced_by = set()
                new_uri, numeric = self._mint_for(state, successor_draft)
                successor = after.evolve(
                    uri=new_uri,
                    numeric_id=numeric,
                    replaces=frozenset(),
                    replaced_by=frozenset(),
                )
                created = self._event(
                    state,
                    author,
                    EventKind.CONCEPT_CREATED,
                    offset=1,
                    concept_uris=(new_uri,),
                    items=creation_items(successor),
                    concept=successor,
                )
                updated = self._event(
                    state,
                    author,
                    EventKind.CONCEPT_UPDATED,
                    offset=2,
                    concept_uris=(uri, new_uri),
                    items=effective,
                    classification=classification,
                )
                state = self._commit(token, state, [created, updated])
                return UpdateOutcome(
                    "SuccessorMinted",
                    state.version,
                    uri,
                    new_uri=new_uri,
                    classification=classification,
                )

        # NeedsConfirmation: hold the batch outside the log.
        question = " ".join(classification.questions)
        pending = {
            "uri": uri,
            "items": [i.to_jsonable() for i in items],
            "author": author,
        }
        ticket = self.issue_confirmation(token, pending, question, author)
        return UpdateOutcome(
            "PendingConfirmation",
            state.version,
            uri,
            ticket=ticket,
            classification=classification,
        )

    def set_status(
        self,
        scheme: str,
        uri: str,
        status: str,
        author: str,
        expected_version: Optional[int] = None,
    ) -> int:
        token = self.resolve_scheme(scheme)
        try:
            target = Status(status)
        except ValueError:
            raise ValidationFailed(
                [Violation("R6", uri, f"status {status!r} is not in the status vocabulary")]
            )
        with self._lock_for(token):
            state = self._state(token)
            self._require_maintainer(state, author)
            self._check_expected(state, expected_version)
            concept = state.concepts.get(uri)
            if concept is None:
                raise UnknownConcept(f"no concept {uri!r} in scheme {token!r}")
            if concept.status is target:
                return state.version
            if concept.deprecated:
                raise DeprecatedIsTerminal(f"{uri} is deprecated and stays deprecated")
            if target is Status.DEPRECATED:
                return self._deprecate_locked(token, state, concept, author)
            item = ChangeItem(
                FieldPath("status"), Op.MODIFY, old=concept.status.value, new=target.value
            )
            event = self._event(
                state,
                author,
                EventKind.CONCEPT_UPDATED,
                concept_uris=(uri,),
                items=(item,),
                classification=Classification(Outcome.NON_SEMANTIC, frozenset({"NS4"})),
            )
            state = self._commit(token, state, [event])
            return state.version

    def _deprecate_locked(
        self, token: str, state: SchemeState, concept: Concept, author: str
    ) -> int:
        item = ChangeItem(
            FieldPath("status"), Op.MODIFY, old=concept.status.value, new=Status.DEPRECATED.value
        )
        event = self._event(
            state,
            author,
            EventKind.CONCEPT_DEPRECATED,
            concept_uris=(concept.uri,),
            items=(item,),
            classification=Classification(Outcome.NON_SEMANTIC, frozenset({"NS4"})),
        )
        return self._commit(token, state, [event]).version

    def deprecate_concept(
        self,
        scheme: str,
        uri: str,
        author: str,
        expected_version: Optional[int] = None,
    ) -> int:
        token = self.resolve_scheme(scheme)
        with self._lock_for(token):
            state = self._state(token)
            self._require_maintainer(state, author)
            self._check_expected(state, expected_version)
            concept = state.concepts.get(uri)
            if concept is None:
                raise UnknownConcept(f"no concept {uri!r} in scheme {token!r}")
            if concept.deprecated:
                raise AlreadyDeprecated(f"{uri} is already deprecated")
            return self._deprecate_locked(token, state, concept, author)

    # ------------------------------------------------------------------
    # Split / merge

    def _mint_batch(
        self, state: SchemeState, drafts: Sequence[ConceptDraft]
    ) -> list[Concept]:
        minted: list[Concept] = []
        taken: set[str] = set()
        for draft in drafts:
            if not draft.pref_labels:
                raise ValidationFailed(
                    [Violation("R1", draft.uri or "-", "a concept needs at least one prefLabel")]
                )
            uri, numeric = self._mint_for(state, draft, also_taken=taken)
            draft.uri, draft.numeric_id = uri, numeric
            draft.status = Status.PROPOSED.value
            draft.in_scheme = draft.in_scheme or state.meta.scheme_uri
            taken.add(uri)
        problems = errors_only(
            validate_batch(state.concepts, list(drafts), state.meta.scheme_uri)
        )
        if problems:
            raise ValidationFailed(problems)
        for draft in drafts:
            minted.append(draft.build())
        return minted

    def split_concept(
        self,
        scheme: str,
        uri: str,
        drafts: Sequence[ConceptDraft],
        author: str,
        expected_version: Optional[int] = None,
    ) -> tuple[int, list[str]]:
        token = self.resolve_scheme(scheme)
        if len(drafts) < 2:
            raise TooFewDrafts("a split needs at least two successor drafts")
        with self._lock_for(token):
            state = self._state(token)
            self._require_maintainer(state, author)
            self._check_expected(state, expected_version)
            concept = state.concepts.get(uri)
            if concept is None:
                raise UnknownConcept(f"no concept {uri!r} in scheme {token!r}")
            if concept.deprecated:
                raise Deprecated(f"{uri} is deprecated and cannot be split")
            successors = self._mint_batch(state, drafts)
            events = [
                self._event(
                    state,
                    author,
                    EventKind.CONCEPT_CREATED,
                    offset=i + 1,
                    concept_uris=(c.uri,),
                    items=creation_items(c),
                    concept=c,
                )
                for i, c in enumerate(successors)
            ]
            events.append(
                self._event(
                    state,
                    author,
                    EventKind.CONCEPT_SPLIT,
                    offset=len(successors) + 1,
                    concept_uris=(uri, *[c.uri for c in successors]),
                    classification=split_classification(),
                )
            )
            state = self._commit(token, state, events)
            new_uris = [c.uri for c in successors]
            old = state.concepts[uri]
            assert old.deprecated and old.replaced_by == frozenset(new_uris)
            assert all(uri in state.concepts[u].replaces for u in new_uris)
        return state.version, new_uris

    def merge_concepts(
        self,
        scheme: str,
        source_uris: Sequence[str],
        draft: ConceptDraft,
        author: str,
        expected_version: Optional[int] = None,
    ) -> tuple[int, str]:
        token = self.resolve_scheme(scheme)
        sources = list(dict.fromkeys(source_uris))
        if len(sources) < 2:
            raise TooFewSources("a consolidation needs at least two source concepts")
        with self._lock_for(token):
            state = self._state(token)
            self._require_maintainer(state, author)
            self._check_expected(state, expected_version)
            for uri in sources:
                concept = state.concepts.get(uri)
                if concept is None:
                    raise UnknownConcept(f"no concept {uri!r} in scheme {token!r}")
                if concept.deprecated:
                    raise Deprecated(f"{uri} is deprecated and cannot be consolidated")
            merged = self._mint_batch(state, [draft])[0]
            events = [
                self._event(
                    state,
                    author,
                    EventKind.CONCEPT_CREATED,
                    offset=1,
                    concept_uris=(merged.uri,),
                    items=creation_items(merged),
                    concept=merged,
                ),
                self._event(
                    state,
                    author,
                    EventKind.CONCEPT_MERGED,
                    offset=2,
                    concept_uris=(*sources, merged.uri),
                    classification=split_classification(),
                ),
            ]
            state = self._commit(token, state, events)
            assert all(state.concepts[u].deprecated for u in sources)
            assert state.concepts[merged.uri].replaces == frozenset(sources)
        return state.version, merged.uri

    # ------------------------------------------------------------------
    # History, snapshots, diffs

    def head_version(self, scheme: str) -> int:
        return self._state(self.resolve_scheme(scheme)).version

    def snapshot_at(self, scheme: str, version: Optional[int] = None) -> SchemeState:
        token = self.resolve_scheme(scheme)
        self._state(token)
        return self.log.materialize(token, version)

    def history(
        self,
        scheme: str,
        since: int = 0,
        until: Optional[int] = None,
        concept_uri: Optional[str] = None,
    ) -> list[tuple[int, list[ChangeEvent]]]:
        token = self.resolve_scheme(scheme)
        self._state(token)
        out = []
        for version, batch in self.log.read(token, since=since, until=until):
            if concept_uri is not None:
                batch = [e for e in batch if concept_uri in e.concept_uris]
                if not batch:
                    continue
            out.append((version, batch))
        return out

    def changes_since(
        self, scheme: str, since_version: Optional[int] = None, since_timestamp: Optional[str] = None
    ) -> list[ChangeEvent]:
        token = self.resolve_scheme(scheme)
        self._state(token)
        out: list[ChangeEvent] = []
        for _, batch in self.log.read(token, since=since_version or 0):
            for event in batch:
                if since_timestamp and event.timestamp <= since_timestamp:
                    continue
                out.append(event)
        return out

    def diff_versions(self, scheme: str, old: int, new: int) -> StateDiff:
        token = self.resolve_scheme(scheme)
        before = self.log.materialize(token, old)
        after = self.log.materialize(token, new)
        return diff_concept_maps(before.concepts, after.concepts)

    # ------------------------------------------------------------------
    # Import / export

    def import_scheme(
        self,
        owner: str,
        token: str,
        payload: bytes | str,
        fmt: str,
        title: Optional[str] = None,
        description: str = "",
        strategy: Optional[UriStrategy] = None,
    ) -> SchemeMeta:
        """Create a scheme wholesale from a carrier payload, atomically."""
        self._require_agent(owner)
        check_token(token)
        strategy = strategy or UriStrategy(kind=StrategyKind.REGISTRY_ASSIGNED)
        strategy.check()

        if fmt == FORMAT_TRIPLES:
            triples, errors = parse_ntriples(payload)
            if errors:
                raise ParseFailed(errors)
            draft, warnings = triples_to_scheme(triples, self.reg_base)
        elif fmt == FORMAT_CSV:
            draft, errors = parse_csv(payload)
            if errors:
                raise ParseFailed(errors)
            warnings = []
        else:
            raise UnknownFormat(f"cannot import format {fmt!r}")

        scheme_uri = draft.scheme_uri or f"{(strategy.base or self.base_uri).rstrip('/')}/{token}"
        final_title = (title or draft.title or token).strip()

        with self._global:
            if token in self._scheme_ids:
                raise TokenTaken(f"token {token!r} is already in use")

            meta = SchemeMeta(
                id=new_id("s"),
                token=token,
                title=final_title,
                description=description or draft.description,
                owner=owner,
                maintainers=frozenset({owner}),
                uri_strategy=strategy,
                scheme_uri=scheme_uri,
                base_domain=strategy.base,
                created_at=now_stamp(),
                head_version=1,
            )
            shadow = SchemeState(meta=meta, version=0, concepts={})
            shadow.event_count = 0

            minted: set[str] = set()
            counter = 1
            for cd in draft.concepts:
                cd.in_scheme = cd.in_scheme or scheme_uri
                if cd.uri:
                    minted.add(cd.uri)
                    continue
                numeric_based = strategy.kind is StrategyKind.REGISTRY_ASSIGNED or (
                    strategy.template is not None and "{numeric}" in strategy.template
                )
                while True:
                    try:
                        cd.uri, cd.numeric_id = mint(
                            strategy,
                            token,
                            label_hint=cd.label_hint(),
                            counter=counter,
                            registry_base=self.base_uri,
                            taken=minted.__contains__,
                        )
                        break
                    except DuplicateUri:
                        if not numeric_based:
                            raise
                        counter += 1
                if cd.numeric_id is not None:
                    counter = cd.numeric_id + 1
                minted.add(cd.uri)

            problems = errors_only(validate_batch({}, draft.concepts, scheme_uri))
            if problems:
                raise ValidationFailed(problems)

            events = [
                ChangeEvent(
                    scheme_id=meta.id,
                    version=1,
                    seq=1,
                    timestamp=meta.created_at,
                    author=owner,
                    kind=EventKind.SCHEME_CREATED,
                    meta=meta.to_jsonable(),
                )
            ]
            for i, cd in enumerate(draft.concepts):
                concept = cd.build()
                events.append(
                    ChangeEvent(
                        scheme_id=meta.id,
                        version=1,
                        seq=1 + i + 1,
                        timestamp=meta.created_at,
                        author=owner,
                        kind=EventKind.CONCEPT_CREATED,
                        concept_uris=(concept.uri,),
                        items=tuple(creation_items(concept)),
                        concept=concept,
                    )
                )

            from .changes import fold_events

            new_state = fold_events(events)
            problems = errors_only(validate_state(new_state.concepts, scheme_uri))
            if problems:
                raise ValidationFailed(problems)

            self._scheme_ids[token] = meta.id
            self._save()

        with self._lock_for(token):
            self.log.append(token, 1, events)
            self.log.maybe_snapshot(token, new_state)
            self._states[token] = new_state
        self._emit_batch(token, 1, events)

        if warnings:
            self._notify(
                Notification(
                    id=new_id("n"),
                    recipient=owner,
                    subject=f"Import of {token!r} reported {len(warnings)} warning(s)",
                    body="\n".join(warnings),
                    created_at=now_stamp(),
                    kind=KIND_VALIDATION,
                )
            )
        return meta

    def export(
        self, scheme: str, version: Optional[int] = None, fmt: str = FORMAT_TRIPLES
    ) -> tuple[str, LossReport]:
        token = self.resolve_scheme(scheme)
        self._state(token)
        state = self.log.materialize(token, version)
        if fmt == FORMAT_TRIPLES:
            return scheme_to_triples(state, self.reg_base), LossReport()
        if fmt == FORMAT_CSV:
            return serialize_csv(state)
        if fmt == FORMAT_STRUCTURED:
            return state.canonical() + "\n", LossReport()
        raise UnknownFormat(f"cannot export format {fmt!r}")

    # ------------------------------------------------------------------
    # Discovery

    def scheme_summary(self, token: str) -> dict:
        state = self._state(token)
        return {
            "kind": "scheme",
            "hosted": True,
            "id": state.meta.id,
            "token": token,
            "title": state.meta.title,
            "description": state.meta.description,
            "scheme_uri": state.meta.scheme_uri,
            "owner": state.meta.owner,
            "maintainers": sorted(state.meta.maintainers),
            "version": state.version,
            "concepts": len(state.concepts),
            "created_at": state.meta.created_at,
            "uri_strategy": state.meta.uri_strategy.to_jsonable(),
        }

    def _copy_summary(self, copy_id: str) -> dict:
        entry = self._copies[copy_id]
        return {
            "kind": "copy",
            "hosted": False,
            "id": copy_id,
            "source": entry["source"],
            "scheme_uri": entry["scheme_uri"],
            "title": entry.get("title", ""),
            "seq": entry["seq"],
            "retrieved_at": entry["retrieved_at"],
            "peer_version": entry.get("peer_version"),
        }

    def _matches(self, summary: dict, concepts: Mapping[str, Concept], needle: str) -> bool:
        hay = [summary.get("title", ""), summary.get("token", ""), summary.get("scheme_uri", "")]
        for c in concepts.values():
            hay.extend(c.pref_labels.values())
            for texts in c.alt_labels.values():
                hay.extend(texts)
        return any(needle in h.lower() for h in hay if h)

    def list_schemes(self, query: Optional[str] = None) -> list[dict]:
        """Hosted schemes and sequenced copies, optionally filtered."""
        out = []
        needle = query.lower() if query else None
        for token in sorted(self._states):
            summary = self.scheme_summary(token)
            if needle is None or self._matches(summary, self._states[token].concepts, needle):
                out.append(summary)
        for copy_id in sorted(self._copies):
            summary = self._copy_summary(copy_id)
            if needle is None:
                out.append(summary)
            else:
                copy = self.load_copy(copy_id)
                if self._matches(summary, copy.concepts, needle):
                    out.append(summary)
        return out

    # ------------------------------------------------------------------
    # Notifications, subscriptions, usage

    def _notify(self, note: Notification) -> None:
        with self._global:
            self._notifications.append(note)
            self.outbox.deliver(note)
            self._save()

    def notifications_for(self, agent_id: str) -> list[Notification]:
        return [n for n in self._notifications if n.recipient == agent_id]

    def subscribe(self, agent: str, scope: str, channel: str, granularity: str) -> Subscription:
        self._require_agent(agent)
        if channel not in (CHANNEL_FEED, CHANNEL_MESSAGE):
            raise RegistryError(f"unknown channel {channel!r}")
        if granularity not in (GRANULARITY_EVERY, GRANULARITY_SEMANTIC):
            raise RegistryError(f"unknown granularity {granularity!r}")
        if scope != SCOPE_ALL and scope not in self._copies:
            scope = self._scheme_ids[self.resolve_scheme(scope)]
        with self._global:
            for sub in self._subscriptions.values():
                if sub.key() == (agent, scope, channel, granularity):
                    return sub
            sub = Subscription(new_id("sub"), agent, scope, channel, granularity)
            self._subscriptions[sub.id] = sub
            self._save()
        return sub

    def unsubscribe(self, subscription_id: str) -> None:
        with self._global:
            if subscription_id not in self._subscriptions:
                raise UnknownSubscription(f"no subscription {subscription_id!r}")
            del self._subscriptions[subscription_id]
            self._save()

    def subscriptions_for(self, agent_id: str) -> list[Subscription]:
        return [s for s in self._subscriptions.values() if s.agent == agent_id]

    def get_subscription(self, subscription_id: str) -> Subscription:
        sub = self._subscriptions.get(subscription_id)
        if sub is None:
            raise UnknownSubscription(f"no subscription {subscription_id!r}")
        return sub

    def register_usage(self, agent: str, scheme: str) -> UsageRegistration:
        self._require_agent(agent)
        token = self.resolve_scheme(scheme)
        state = self._state(token)
        key = (agent, state.meta.id)
        with self._global:
            existing = self._usages.get(key)
            if existing is not None:
                return existing
            usage = UsageRegistration(agent=agent, scheme_id=state.meta.id, registered_at=now_stamp())
            self._usages[key] = usage
            self._save()
        user = self._agents[agent]
        self._notify(
            Notification(
                id=new_id("n"),
                recipient=state.meta.owner,
                subject=f"{user.name} registered use of {state.meta.title!r}",
                body=(
                    f"Agent {user.name} ({agent}) registered the intention to use "
                    f"scheme {state.meta.title!r} ({token})."
                ),
                created_at=now_stamp(),
                kind=KIND_USAGE,
            )
        )
        return usage

    def usages_for_scheme(self, scheme: str) -> list[UsageRegistration]:
        token = self.resolve_scheme(scheme)
        scheme_id = self._scheme_ids[token]
        return [u for u in self._usages.values() if u.scheme_id == scheme_id]

    # ------------------------------------------------------------------
    # Delivery

    def _emit_batch(self, token: str, version: int, events: Sequence[ChangeEvent]) -> int:
        state = self._states.get(token)
        if state is None:
            return 0
        scheme_id = state.meta.id
        delivered_now = 0
        listing = render_listing(events)
        with self._global:
            for sub in self._subscriptions.values():
                if not wants_batch(sub, scheme_id, events):
                    continue
                key = f"{sub.id}:{scheme_id}:{version}"
                if key in self._delivered:
                    continue
                self._delivered.add(key)
                delivered_now += 1
                if sub.channel == CHANNEL_MESSAGE:
                    note = Notification(
                        id=new_id("n"),
                        recipient=sub.agent,
                        subject=f"{state.meta.title} changed (version {version})",
                        body=listing + f"\nscheme version {version}",
                        created_at=now_stamp(),
                        kind=KIND_CHANGE,
                    )
                    self._notifications.append(note)
                    self.outbox.deliver(note)

            created = [
                e.concept_uris[0] for e in events if e.kind is EventKind.CONCEPT_CREATED
            ]
            if created:
                key = f"new-uri:{scheme_id}:{version}"
                if key not in self._delivered:
                    self._delivered.add(key)
                    delivered_now += 1
                    note = Notification(
                        id=new_id("n"),
                        recipient=state.meta.owner,
                        subject="A new term URI has been created",
                        body="\n".join(created) + f"\nscheme version {version}",
                        created_at=now_stamp(),
                        kind=KIND_NEW_URI,
                    )
                    self._notifications.append(note)
                    self.outbox.deliver(note)
            self._save()
        return delivered_now

    def emit(self, events: Sequence[ChangeEvent]) -> int:
        """(Re-)deliver committed events; de-duplication makes replays free."""
        count = 0
        groups: dict[tuple[str, int], list[ChangeEvent]] = {}
        for event in events:
            groups.setdefault((event.scheme_id, event.version), []).append(event)
        for (scheme_id, version), batch in groups.items():
            token = self.token_for_id(scheme_id)
            count += self._emit_batch(token, version, batch)
        return count

    # ------------------------------------------------------------------
    # Feeds

    def feed_entries(
        self,
        scheme: str,
        since_version: int = 0,
        since_timestamp: Optional[str] = None,
        granularity: str = GRANULARITY_EVERY,
    ) -> list[FeedEntry]:
        token = self.resolve_scheme(scheme)
        self._state(token)
        entries = []
        for version, batch in self.log.read(token, since=since_version):
            if since_timestamp and batch[0].timestamp <= since_timestamp:
                continue
            if granularity == GRANULARITY_SEMANTIC and not notify_mod.batch_is_semantic(batch):
                continue
            n = sum(max(len(e.items), 1) for e in batch)
            entries.append(
                FeedEntry(
                    version=version,
                    updated=batch[0].timestamp,
                    title=f"Version {version}: {n} change(s)",
                    content=render_listing(batch) + f"\nscheme version {version}",
                )
            )
        return entries

    def render_scheme_feed(
        self,
        scheme: str,
        since_version: int = 0,
        since_timestamp: Optional[str] = None,
        granularity: str = GRANULARITY_EVERY,
        self_url: Optional[str] = None,
    ) -> str:
        token = self.resolve_scheme(scheme)
        state = self._state(token)
        entries = self.feed_entries(token, since_version, since_timestamp, granularity)
        return render_feed(token, state.meta.title, entries, self_url)

    # ------------------------------------------------------------------
    # Confirmation tickets

    def issue_confirmation(
        self, scheme: str, pending: dict, question: str, maintainer: str
    ) -> ConfirmationTicket:
        token = self.resolve_scheme(scheme)
        state = self._state(token)
        self._require_maintainer(state, maintainer)
        ticket = make_ticket(state.meta.id, pending, question, maintainer)
        with self._global:
            self._tickets[ticket.token] = ticket
            self._save()
        yes = f"{self.base_uri}/confirm/{ticket.token}?answer=yes"
        no = f"{self.base_uri}/confirm/{ticket.token}?answer=no"
        self._notify(
            Notification(
                id=new_id("n"),
                recipient=maintainer,
                subject=f"Confirmation needed for {pending.get('uri', token)}",
                body=question,
                links=(("yes", yes), ("no", no)),
                created_at=now_stamp(),
                kind=KIND_CONFIRMATION,
            )
        )
        return ticket

    def pending_tickets(self, agent_id: Optional[str] = None) -> list[ConfirmationTicket]:
        out = [
            t
            for t in self._tickets.values()
            if not t.used and not t.expired() and (agent_id is None or t.issued_to == agent_id)
        ]
        return sorted(out, key=lambda t: t.issued_at)

    def get_ticket(self, token: str) -> ConfirmationTicket:
        ticket = self._tickets.get(token)
        if ticket is None:
            raise UnknownToken(f"no confirmation ticket {token!r}")
        return ticket

    def resolve_confirmation(self, token: str, answer: str) -> dict:
        """Settle a held batch. First resolution wins; the token burns either way."""
        if answer not in ("yes", "no"):
            raise RegistryError(f"answer must be yes or no, not {answer!r}")
        with self._global:
            ticket = self._tickets.get(token)
            if ticket is None:
                raise UnknownToken(f"no confirmation ticket {token!r}")
            if ticket.used:
                raise TokenUsed("this confirmation link was already resolved")
            if ticket.expired():
                raise TokenExpired("this confirmation link has expired")
            ticket.used = True
            ticket.answer = answer
            self._save()

        scheme_token = self.token_for_id(ticket.scheme_id)
        if answer == "no":
            return {
                "answer": "no",
                "applied": False,
                "version": self._state(scheme_token).version,
            }

        pending = ticket.pending
        outcome = self.update_concept(
            scheme_token,
            pending["uri"],
            pending["items"],
            author=pending["author"],
            assertion=Assertion.MEANING_CHANGE,
        )
        return {
            "answer": "yes",
            "applied": True,
            "version": outcome.version,
            "outcome": outcome.to_jsonable(),
        }

    # ------------------------------------------------------------------
    # Sequenced copies of non-hosted schemes

    def _copy_dir(self, copy_id: str) -> Path:
        return self.data_dir / "copies" / copy_id

    def load_copy(self, copy_id: str, seq: Optional[int] = None) -> SequencedCopy:
        entry = self._copies.get(copy_id)
        if entry is None:
            raise UnknownScheme(f"no sequenced copy {copy_id!r}")
        want = seq or entry["seq"]
        path = self._copy_dir(copy_id) / f"seq-{want}.json"
        if not path.exists():
            raise UnknownVersion(f"copy {copy_id!r} has no sequence {want}")
        return _build_copy(copy_id, json.loads(path.read_text(encoding="utf-8")))

    def find_copy(self, source: str, scheme_uri: str) -> Optional[str]:
        for copy_id, entry in self._copies.items():
            if entry["source"] == source and entry["scheme_uri"] == scheme_uri:
                return copy_id
        return None

    def copy_bookmark(self, source: str, scheme_uri: str) -> Optional[int]:
        """Peer head version recorded with our latest copy, if any."""
        copy_id = self.find_copy(source, scheme_uri)
        if copy_id is None:
            return None
        return self._copies[copy_id].get("peer_version")

    def ingest_external_snapshot(
        self,
        source: str,
        scheme_uri: Optional[str],
        payload: bytes | str,
        peer_version: Optional[int] = None,
    ) -> Optional[SequencedCopy]:
        """Store a snapshot of a scheme we do not host; None means no change."""
        triples, errors = parse_ntriples(payload)
        if errors:
            raise ParseFailed(errors)
        try:
            draft, _warnings = triples_to_scheme(triples, self.reg_base)
        except RegistryError as exc:
            raise ParseFailed([(0, str(exc))])
        if scheme_uri and draft.scheme_uri != scheme_uri:
            raise ParseFailed(
                [(0, f"payload describes {draft.scheme_uri}, not {scheme_uri}")]
            )
        scheme_uri = draft.scheme_uri

        concepts: dict[str, Concept] = {}
        for cd in draft.concepts:
            if cd.status not in ("proposed", "approved", "deprecated"):
                cd.status = "proposed"
            concepts[cd.uri] = cd.build()

        with self._global:
            copy_id = self.find_copy(source, scheme_uri)
            if copy_id is not None:
                previous = self.load_copy(copy_id)
                diff = diff_concept_maps(previous.concepts, concepts)
                meta_same = (
                    previous.title == draft.title
                    and previous.description == draft.description
                )
                if diff.empty and meta_same:
                    return None
                seq = previous.seq + 1
            else:
                copy_id = f"copy-{len(self._copies) + 1}"
                diff = diff_concept_maps({}, concepts)
                seq = 1

            copy = SequencedCopy(
                id=copy_id,
                source=source,
                scheme_uri=scheme_uri,
                seq=seq,
                retrieved_at=now_stamp(),
                title=draft.title,
                description=draft.description,
                concepts=concepts,
                diff=diff,
                peer_version=peer_version,
            )
            directory = self._copy_dir(copy_id)
            directory.mkdir(parents=True, exist_ok=True)
            path = directory / f"seq-{seq}.json"
            path.write_text(canonical_json(copy.content_jsonable()) + "\n", encoding="utf-8")
            self._copies[copy_id] = {
                "source": source,
                "scheme_uri": scheme_uri,
                "seq": seq,
                "retrieved_at": copy.retrieved_at,
                "peer_version": peer_version,
                "title": draft.title,
            }
            self._save()

            listing = f"sequence {seq} of {scheme_uri} from {source}"
            for sub in self._subscriptions.values():
                if sub.scope != copy_id:
                    continue
                key = f"{sub.id}:{copy_id}:{seq}"
                if key in self._delivered:
                    continue
                self._delivered.add(key)
                if sub.channel == CHANNEL_MESSAGE:
                    note = Notification(
                        id=new_id("n"),
                        recipient=sub.agent,
                        subject=f"Tracked scheme {draft.title or scheme_uri} changed",
                        body=listing,
                        created_at=now_stamp(),
                        kind=KIND_CHANGE,
                    )
                    self._notifications.append(note)
                    self.outbox.deliver(note)
            self._save()
        return copy
