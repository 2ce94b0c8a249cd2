"""Structural validation rules for scheme content.

    R1  at most one prefLabel per language
    R2  a prefLabel value may not double as an altLabel in the same language
    R3  broader/related targets are in-scheme concepts or absolute IRIs
    R4  the broader graph is acyclic
    R5  no pair is both broader and related
    R6  status comes from the registered status vocabulary
    R7  a term's declared scheme matches the scheme it is filed under
    R8  concept URIs are absolute, whitespace-free, and unique

Errors block commits; warnings (version markers in owner-provided URIs,
unknown statements kept as extras) do not.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .model import Concept, ConceptDraft, STATUS_VALUES
from .uris import validate_uri

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Violation:
    rule: str
    uri: str
    message: str
    severity: str = ERROR

    def render(self) -> str:
        return f"RULE {self.rule} {self.uri} {self.message}"

    def to_jsonable(self) -> dict:
        return {
            "rule": self.rule,
            "uri": self.uri,
            "message": self.message,
            "severity": self.severity,
        }

    @classmethod
    def from_jsonable(cls, d: Mapping) -> "Violation":
        return cls(
            rule=d["rule"],
            uri=d["uri"],
            message=d["message"],
            severity=d.get("severity", ERROR),
        )


def errors_only(violations: Iterable[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == ERROR]


def _check_uri(uri: Optional[str], provided: bool) -> list[Violation]:
    out = []
    for severity, message in validate_uri(uri or "", minted=not provided):
        if "already registered" in message:
            continue  # uniqueness is handled against the concept map
        out.append(Violation("R8", uri or "-", message, severity))
    return out


def _check_labels(
    uri: str,
    pref: Sequence[tuple[str, str]],
    alt: Sequence[tuple[str, str]],
) -> list[Violation]:
    out = []
    seen: dict[str, str] = {}
    for lang, text in pref:
        if lang in seen:
            out.append(
                Violation("R1", uri, f"more than one prefLabel for language {lang!r}")
            )
        seen[lang] = text
    alt_by_lang: dict[str, set[str]] = {}
    for lang, text in alt:
        alt_by_lang.setdefault(lang, set()).add(text)
    for lang, text in seen.items():
        if text in alt_by_lang.get(lang, ()):
            out.append(
                Violation(
                    "R2", uri, f"prefLabel {text!r} repeats as altLabel for language {lang!r}"
                )
            )
    return out


def validate_draft(draft: ConceptDraft, scheme_uri: str) -> list[Violation]:
    """Per-term checks that need the raw (possibly duplicated) input shape."""
    uri = draft.uri or "-"
    out = _check_labels(uri, draft.pref_labels, draft.alt_labels)
    if draft.status not in STATUS_VALUES:
        out.append(
            Violation("R6", uri, f"status {draft.status!r} is not in the status vocabulary")
        )
    if draft.in_scheme and draft.in_scheme != scheme_uri:
        out.append(
            Violation(
                "R7", uri, f"declares scheme {draft.in_scheme} but is filed under {scheme_uri}"
            )
        )
    if draft.uri:
        out.extend(_check_uri(draft.uri, provided=draft.uri_provided))
    return out


def _validate_concept_shape(concept: Concept) -> list[Violation]:
    out = _check_labels(
        concept.uri,
        list(concept.pref_labels.items()),
        [(lang, t) for lang, ts in concept.alt_labels.items() for t in ts],
    )
    out.extend(_check_uri(concept.uri, provided=concept.numeric_id is None))
    return out


def _strongly_connected(graph: Mapping[str, frozenset[str]]) -> list[list[str]]:
    """Tarjan, iteratively; returns components of size > 1 plus self-loops."""
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    on_stack: set[str] = set()
    stack: list[str] = []
    counter = 0
    components: list[list[str]] = []

    for root in graph:
        if root in index:
            continue
        work = [(root, iter(sorted(graph[root])))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for child in it:
                if child not in graph:
                    continue
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(sorted(graph[child]))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member == node:
                        break
                if len(component) > 1 or node in graph[node]:
                    components.append(sorted(component))
    return components


def validate_graph(concepts: Mapping[str, Concept], scheme_uri: str) -> list[Violation]:
    """Cross-concept checks over a complete (proposed) concept map."""
    out: list[Violation] = []
    for uri in sorted(concepts):
        c = concepts[uri]
        for field_name, targets in (("broader", c.broader), ("related", c.related)):
            for target in sorted(targets):
                if target in concepts:
                    continue
                bad = [m for s, m in validate_uri(target) if s == ERROR]
                if bad:
                    out.append(
                        Violation(
                            "R3",
                            uri,
                            f"{field_name} target {target!r} is neither in the scheme "
                            "nor an absolute IRI",
                        )
                    )
        overlap = c.broader & c.related
        for target in sorted(overlap):
            out.append(
                Violation("R5", uri, f"{target} is listed as both broader and related")
            )

    graph = {uri: c.broader & frozenset(concepts) for uri, c in concepts.items()}
    for component in _strongly_connected(graph):
        # Each concept trapped in the cycle gets its own violation so that
        # per-concept reporting (editor, import errors) can surface it.
        chain = " -> ".join(component)
        for member in component:
            out.append(Violation("R4", member, f"broader cycle through {chain}"))
    return out


def validate_state(concepts: Mapping[str, Concept], scheme_uri: str) -> list[Violation]:
    """Everything checkable on materialized content.

    Reports come back sorted by (rule, uri) so repeated runs over the same
    state produce byte-identical output.
    """
    out: list[Violation] = []
    for uri in sorted(concepts):
        out.extend(_validate_concept_shape(concepts[uri]))
    out.extend(validate_graph(concepts, scheme_uri))
    out.sort(key=lambda v: (v.rule, v.uri, v.message))
    return out


def validate_batch(
    current: Mapping[str, Concept],
    drafts: Sequence[ConceptDraft],
    scheme_uri: str,
) -> list[Violation]:
    """Validate a batch of new terms against the scheme they would join.

    Checks each draft in isolation, then the whole scheme as it would look
    with the batch applied, so cycles or duplicate URIs introduced *between*
    batch members are caught before anything commits.
    """
    out: list[Violation] = []
    seen: set[str] = set()
    proposed = dict(current)
    for draft in drafts:
        out.extend(validate_draft(draft, scheme_uri))
        if not draft.uri:
            continue
        if draft.uri in seen:
            out.append(Violation("R8", draft.uri, "URI appears twice in the batch"))
        elif draft.uri in current:
            out.append(Violation("R8", draft.uri, "URI is already registered"))
        seen.add(draft.uri)
        proposed[draft.uri] = draft.build()
    out.extend(validate_graph(proposed, scheme_uri))
    return out


def render_report(violations: Sequence[Violation]) -> str:
    return "\n".join(v.render() for v in violations)
