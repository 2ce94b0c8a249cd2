"""Vocabulary carriers: a SKOS-subset triple format and a CSV term list.

The triple format is the lossless interchange and canonical-comparison form:
one statement per line, ``<subject> <predicate> (object) .``, objects either
``<iri>`` or ``"literal"`` with an optional ``@lang`` tag, ``#`` comments,
``\\`` ``\"`` ``\\n`` ``\\r`` ``\\t`` escapes inside literals.  Serialization
sorts statements by (subject, predicate, rendered object) so equal content
yields identical bytes everywhere.

CSV intentionally carries only the English core
(``uri,prefLabel,definition,broader,status``); everything it drops is
itemized in a LossReport rather than silently vanishing.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .errors import BadHeader, MultipleSchemes, NoScheme
from .model import Concept, ConceptDraft, SchemeDraft, SchemeState, Triple

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
SKOS = "http://www.w3.org/2004/02/skos/core#"
DC = "http://purl.org/dc/elements/1.1/"
DEFAULT_REG_BASE = "http://purl.example/nsdl-registry#"

SKOS_CONCEPT = SKOS + "Concept"
SKOS_SCHEME = SKOS + "ConceptScheme"
SKOS_PREF = SKOS + "prefLabel"
SKOS_ALT = SKOS + "altLabel"
SKOS_DEFINITION = SKOS + "definition"
SKOS_SCOPE_NOTE = SKOS + "scopeNote"
SKOS_BROADER = SKOS + "broader"
SKOS_RELATED = SKOS + "related"
SKOS_IN_SCHEME = SKOS + "inScheme"
SKOS_NOTE = SKOS + "note"
DC_TITLE = DC + "title"
DC_DESCRIPTION = DC + "description"

# Language key used for plain literals in language-tagged fields.
PLAIN_LANG = "und"

CSV_HEADER = ["uri", "prefLabel", "definition", "broader", "status"]

FORMAT_TRIPLES = "triples"
FORMAT_CSV = "csv"
FORMAT_STRUCTURED = "structured"
FORMATS = (FORMAT_TRIPLES, FORMAT_CSV, FORMAT_STRUCTURED)


@dataclass
class LossReport:
    """What an export could not carry: (concept uri, field path, reason)."""

    entries: list[tuple[str, str, str]] = field(default_factory=list)

    @property
    def empty(self) -> bool:
        return not self.entries

    def add(self, uri: str, field_path: str, reason: str) -> None:
        self.entries.append((uri, field_path, reason))

    def to_jsonable(self) -> list:
        return [list(e) for e in self.entries]

    def render(self) -> str:
        return "\n".join(f"{u} {f}: {r}" for u, f, r in self.entries)


# ---------------------------------------------------------------------------
# Triple grammar

_LINE_RE = re.compile(
    r"^<(?P<s>[^>\s]+)>\s+<(?P<p>[^>\s]+)>\s+"
    r"(?:<(?P<o>[^>\s]+)>"
    r'|"(?P<lit>(?:[^"\\]|\\.)*)"(?:@(?P<lang>[A-Za-z][A-Za-z0-9-]*))?)'
    r"\s*\.$"
)

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}
_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t"}


def _escape(text: str) -> str:
    return "".join(_ESCAPES.get(ch, ch) for ch in text)


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            if i + 1 >= len(text) or text[i + 1] not in _UNESCAPES:
                raise ValueError(f"unknown escape at column {i + 1}")
            out.append(_UNESCAPES[text[i + 1]])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def render_triple(t: Triple) -> str:
    if t.obj_is_uri:
        obj = f"<{t.obj}>"
    else:
        obj = f'"{_escape(t.obj)}"'
        if t.obj_lang:
            obj += f"@{t.obj_lang}"
    return f"<{t.subject}> <{t.predicate}> {obj} ."


def serialize_triples(triples: Iterable[Triple]) -> str:
    rendered = {t: render_triple(t) for t in set(triples)}
    ordered = sorted(rendered, key=lambda t: (t.subject, t.predicate, rendered[t].split(" ", 2)[2]))
    return "".join(rendered[t] + "\n" for t in ordered)


def parse_ntriples(text: bytes | str) -> tuple[list[Triple], list[tuple[int, str]]]:
    """Parse the subset grammar; bad lines become (line number, message) errors."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            return [], [(1, f"payload is not valid UTF-8: {exc}")]
    triples: dict[Triple, None] = {}
    errors: list[tuple[int, str]] = []
    # split on newline only: splitlines() would also break on form feeds or
    # unicode separators that are legal *inside* literals
    for number, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("_:") or " _:" in line:
            errors.append((number, "blank nodes are not supported"))
            continue
        if not line.endswith("."):
            errors.append((number, "statement does not end with ' .'"))
            continue
        m = _LINE_RE.match(line)
        if not m:
            errors.append((number, "statement does not match the triple grammar"))
            continue
        if m.group("o") is not None:
            t = Triple(m.group("s"), m.group("p"), m.group("o"), obj_is_uri=True)
        else:
            try:
                literal = _unescape(m.group("lit"))
            except ValueError as exc:
                errors.append((number, str(exc)))
                continue
            t = Triple(m.group("s"), m.group("p"), literal, obj_is_uri=False, obj_lang=m.group("lang"))
        triples[t] = None
    return list(triples), errors


# ---------------------------------------------------------------------------
# Scheme <-> triples

def _reg(reg_base: str, name: str) -> str:
    return reg_base + name


def concept_to_triples(c: Concept, scheme_uri: str, reg_base: str = DEFAULT_REG_BASE) -> set[Triple]:
    out: set[Triple] = {
        Triple(c.uri, RDF_TYPE, SKOS_CONCEPT),
        Triple(c.uri, SKOS_IN_SCHEME, scheme_uri),
        Triple(c.uri, _reg(reg_base, "status"), c.status.value, obj_is_uri=False),
    }

    def lit(predicate: str, text: str, lang: str) -> Triple:
        return Triple(c.uri, predicate, text, obj_is_uri=False, obj_lang=None if lang == PLAIN_LANG else lang)

    for lang, text in c.pref_labels.items():
        out.add(lit(SKOS_PREF, text, lang))
    for lang, texts in c.alt_labels.items():
        for text in texts:
            out.add(lit(SKOS_ALT, text, lang))
    for lang, text in c.definition.items():
        out.add(lit(SKOS_DEFINITION, text, lang))
    for lang, text in c.scope_note.items():
        out.add(lit(SKOS_SCOPE_NOTE, text, lang))
    for uri in c.broader:
        out.add(Triple(c.uri, SKOS_BROADER, uri))
    for uri in c.related:
        out.add(Triple(c.uri, SKOS_RELATED, uri))
    for uri in c.replaces:
        out.add(Triple(c.uri, _reg(reg_base, "replaces"), uri))
    for uri in c.replaced_by:
        out.add(Triple(c.uri, _reg(reg_base, "replacedBy"), uri))
    for note in c.notes:
        out.add(Triple(c.uri, SKOS_NOTE, note, obj_is_uri=False))
    if c.numeric_id is not None:
        out.add(Triple(c.uri, _reg(reg_base, "numericId"), str(c.numeric_id), obj_is_uri=False))
    out |= c.extras
    return out


def content_to_triples(
    scheme_uri: str,
    title: str,
    description: str,
    concepts: Mapping[str, Concept],
    reg_base: str = DEFAULT_REG_BASE,
) -> str:
    triples: set[Triple] = {Triple(scheme_uri, RDF_TYPE, SKOS_SCHEME)}
    if title:
        triples.add(Triple(scheme_uri, DC_TITLE, title, obj_is_uri=False))
    if description:
        triples.add(Triple(scheme_uri, DC_DESCRIPTION, description, obj_is_uri=False))
    for concept in concepts.values():
        triples |= concept_to_triples(concept, scheme_uri, reg_base)
    return serialize_triples(triples)


def scheme_to_triples(state: SchemeState, reg_base: str = DEFAULT_REG_BASE) -> str:
    return content_to_triples(
        state.meta.scheme_uri,
        state.meta.title,
        state.meta.description,
        state.concepts,
        reg_base,
    )


def triples_to_scheme(
    triples: Iterable[Triple], reg_base: str = DEFAULT_REG_BASE
) -> tuple[SchemeDraft, list[str]]:
    """Assemble a scheme draft out of parsed statements.

    Unrecognized statements about known concepts are preserved as extras;
    statements about unknown subjects only produce warnings.
    """
    triples = list(triples)
    warnings: list[str] = []

    scheme_subjects = sorted(
        {t.subject for t in triples if t.predicate == RDF_TYPE and t.obj_is_uri and t.obj == SKOS_SCHEME}
    )
    if not scheme_subjects:
        raise NoScheme("no subject is typed as a concept scheme")
    if len(scheme_subjects) > 1:
        raise MultipleSchemes(f"found {len(scheme_subjects)} scheme subjects")
    scheme_uri = scheme_subjects[0]

    concept_subjects = sorted(
        {t.subject for t in triples if t.predicate == RDF_TYPE and t.obj_is_uri and t.obj == SKOS_CONCEPT}
    )
    drafts = {uri: ConceptDraft(uri=uri, uri_provided=True) for uri in concept_subjects}
    draft = SchemeDraft(scheme_uri=scheme_uri, concepts=[drafts[u] for u in concept_subjects])

    reg_status = _reg(reg_base, "status")
    reg_replaces = _reg(reg_base, "replaces")
    reg_replaced_by = _reg(reg_base, "replacedBy")
    reg_numeric = _reg(reg_base, "numericId")
    unknown_subjects: dict[str, int] = {}

    for t in triples:
        lang = t.obj_lang or PLAIN_LANG
        if t.subject == scheme_uri:
            if t.predicate == DC_TITLE and not t.obj_is_uri:
                if draft.title:
                    warnings.append(f"scheme has more than one title; keeping {draft.title!r}")
                else:
                    draft.title = t.obj
            elif t.predicate == DC_DESCRIPTION and not t.obj_is_uri:
                if draft.description:
                    warnings.append("scheme has more than one description; keeping the first")
                else:
                    draft.description = t.obj
            elif not (t.predicate == RDF_TYPE and t.obj == SKOS_SCHEME):
                warnings.append(f"ignoring statement <{t.predicate}> about the scheme subject")
            continue
        c = drafts.get(t.subject)
        if c is None:
            unknown_subjects[t.subject] = unknown_subjects.get(t.subject, 0) + 1
            continue
        if t.predicate == RDF_TYPE and t.obj_is_uri and t.obj == SKOS_CONCEPT:
            continue
        if t.predicate == SKOS_PREF and not t.obj_is_uri:
            c.pref_labels.append((lang, t.obj))
        elif t.predicate == SKOS_ALT and not t.obj_is_uri:
            c.alt_labels.append((lang, t.obj))
        elif t.predicate == SKOS_DEFINITION and not t.obj_is_uri:
            if lang in c.definition:
                warnings.append(f"{t.subject} has more than one definition for language {lang!r}")
            else:
                c.definition[lang] = t.obj
        elif t.predicate == SKOS_SCOPE_NOTE and not t.obj_is_uri:
            if lang in c.scope_note:
                warnings.append(f"{t.subject} has more than one scope note for language {lang!r}")
            else:
                c.scope_note[lang] = t.obj
        elif t.predicate == SKOS_BROADER and t.obj_is_uri:
            c.broader.add(t.obj)
        elif t.predicate == SKOS_RELATED and t.obj_is_uri:
            c.related.add(t.obj)
        elif t.predicate == SKOS_IN_SCHEME and t.obj_is_uri:
            c.in_scheme = t.obj
        elif t.predicate == SKOS_NOTE and not t.obj_is_uri and not t.obj_lang:
            c.notes.append(t.obj)
        elif t.predicate == reg_status and not t.obj_is_uri:
            c.status = t.obj
        elif t.predicate == reg_replaces and t.obj_is_uri:
            c.replaces.add(t.obj)
        elif t.predicate == reg_replaced_by and t.obj_is_uri:
            c.replaced_by.add(t.obj)
        elif t.predicate == reg_numeric and not t.obj_is_uri:
            if t.obj.isdigit():
                c.numeric_id = int(t.obj)
                c.uri_provided = False
            else:
                warnings.append(f"{t.subject} has a non-numeric id {t.obj!r}")
        else:
            c.extras.add(t)

    for subject in sorted(unknown_subjects):
        warnings.append(
            f"ignoring {unknown_subjects[subject]} statement(s) about unknown subject {subject}"
        )
    return draft, warnings


# ---------------------------------------------------------------------------
# CSV term lists

def serialize_csv(state: SchemeState) -> tuple[str, LossReport]:
    """English-core CSV; every dropped field lands in the LossReport.

    Scheme-level metadata and registry bookkeeping (numeric ids) are out of
    scope for a term list and deliberately not audited.
    """
    report = LossReport()
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(CSV_HEADER)
    for uri in sorted(state.concepts):
        c = state.concepts[uri]
        writer.writerow(
            [
                c.uri,
                c.pref_labels.get("en", ""),
                c.definition.get("en", ""),
                "|".join(sorted(c.broader)),
                c.status.value,
            ]
        )
        for lang in sorted(c.pref_labels):
            if lang != "en":
                report.add(uri, f"pref_label@{lang}", "CSV carries English preferred labels only")
        for lang in sorted(c.alt_labels):
            report.add(uri, f"alt_label@{lang}", "CSV has no alternative-label column")
        for lang in sorted(c.definition):
            if lang != "en":
                report.add(uri, f"definition@{lang}", "CSV carries English definitions only")
        for lang in sorted(c.scope_note):
            report.add(uri, f"scope_note@{lang}", "CSV has no scope-note column")
        if c.related:
            report.add(uri, "related", "CSV has no related column")
        if c.notes:
            report.add(uri, "note", "CSV has no note column")
        if c.replaces:
            report.add(uri, "replaces", "CSV has no successor-link columns")
        if c.replaced_by:
            report.add(uri, "replaced_by", "CSV has no successor-link columns")
        if c.extras:
            report.add(uri, "extras", "CSV cannot carry imported statements")
    return buffer.getvalue(), report


def parse_csv(text: bytes | str) -> tuple[SchemeDraft, list[tuple[int, str]]]:
    """Parse a term list. Row-level problems come back as (line, message)."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            return SchemeDraft(), [(1, f"payload is not valid UTF-8: {exc}")]
    text = text.lstrip("﻿")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise BadHeader("empty payload; expected header " + ",".join(CSV_HEADER))
    if header != CSV_HEADER:
        raise BadHeader(
            f"header {','.join(header)!r} must be exactly {','.join(CSV_HEADER)!r}"
        )

    draft = SchemeDraft()
    errors: list[tuple[int, str]] = []
    for row in reader:
        line = reader.line_num
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(CSV_HEADER):
            errors.append((line, f"expected {len(CSV_HEADER)} fields, found {len(row)}"))
            continue
        uri, pref, definition, broader, status = (cell.strip() for cell in row)
        if not uri and not pref:
            errors.append((line, "row needs at least a uri or a prefLabel"))
            continue
        concept = ConceptDraft(uri=uri or None, uri_provided=bool(uri))
        if pref:
            concept.pref_labels.append(("en", pref))
        if definition:
            concept.definition["en"] = definition
        concept.broader = {b.strip() for b in broader.split("|") if b.strip()}
        if status:
            concept.status = status
        draft.concepts.append(concept)
    return draft, errors
