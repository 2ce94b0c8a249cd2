"""Registry for controlled vocabularies.

Hosted schemes are versioned through an append-only change log with
semantic-change classification; non-hosted schemes are mirrored as sequenced
snapshot copies.  See ``Registry`` for the operation surface.
"""

from .changes import Assertion, ChangeEvent, ChangeItem, Classification, Op, Outcome
from .errors import RegistryError, ValidationFailed, VersionConflict
from .model import Agent, Concept, ConceptDraft, SchemeMeta, SchemeState, Status, UriStrategy
from .registry import Registry, UpdateOutcome
from .store import EventLog

__all__ = [
    "Agent",
    "Assertion",
    "ChangeEvent",
    "ChangeItem",
    "Classification",
    "Concept",
    "ConceptDraft",
    "EventLog",
    "Op",
    "Outcome",
    "Registry",
    "RegistryError",
    "SchemeMeta",
    "SchemeState",
    "Status",
    "UpdateOutcome",
    "UriStrategy",
    "ValidationFailed",
    "VersionConflict",
]
