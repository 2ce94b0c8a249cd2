"""Triple and CSV carriers: grammar, escaping, losslessness, loss reporting."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import synth
from oracles import expected_csv_losses, tokenize_triple_line
from vocab_registry.errors import BadHeader, MultipleSchemes, NoScheme
from vocab_registry.model import (
    Concept,
    SchemeMeta,
    SchemeState,
    StrategyKind,
    Triple,
    UriStrategy,
)
from vocab_registry.skosio import (
    CSV_HEADER,
    concept_to_triples,
    content_to_triples,
    parse_csv,
    parse_ntriples,
    render_triple,
    scheme_to_triples,
    serialize_csv,
    serialize_triples,
    triples_to_scheme,
)

SCHEME = "http://vocab.example/gem"
PREF = "http://www.w3.org/2004/02/skos/core#prefLabel"


def parse_one(line):
    triples, errors = parse_ntriples(line)
    assert errors == [], errors
    assert len(triples) == 1
    return triples[0]


# -- line grammar ------------------------------------------------------------


def test_literal_with_language():
    t = parse_one(f'<http://e/a> <{PREF}> "Ocean"@en .')
    assert (t.subject, t.predicate, t.obj, t.obj_is_uri, t.obj_lang) == (
        "http://e/a", PREF, "Ocean", False, "en",
    )


def test_object_uri():
    t = parse_one("<http://e/a> <http://e/p> <http://e/b> .")
    assert t.obj_is_uri and t.obj == "http://e/b"


def test_escapes_round_trip():
    nasty = 'quote " backslash \\ newline \n tab \t return \r end'
    t = Triple("http://e/a", PREF, nasty, obj_is_uri=False, obj_lang="en")
    line = render_triple(t)
    assert "\n" not in line  # the line stays a single physical line
    assert parse_one(line) == t


def test_unknown_escape_is_an_error():
    _, errors = parse_ntriples('<http://e/a> <http://e/p> "bad \\q escape" .')
    assert len(errors) == 1 and "escape" in errors[0][1]


def test_blank_nodes_rejected():
    _, errors = parse_ntriples("_:b1 <http://e/p> <http://e/o> .")
    assert len(errors) == 1 and "blank nodes" in errors[0][1]


def test_comments_and_blank_lines_skipped():
    text = "# a comment\n\n   \n<http://e/a> <http://e/p> <http://e/b> .\n"
    triples, errors = parse_ntriples(text)
    assert errors == [] and len(triples) == 1


def test_missing_final_dot():
    _, errors = parse_ntriples("<http://e/a> <http://e/p> <http://e/b>")
    assert errors == [(1, "statement does not end with ' .'")]


def test_error_lines_are_numbered():
    text = (
        "<http://e/a> <http://e/p> <http://e/b> .\n"
        "garbage\n"
        "<http://e/a> <http://e/p> <http://e/c> .\n"
        "<http://e/a> missing brackets .\n"
    )
    triples, errors = parse_ntriples(text)
    assert len(triples) == 2
    assert [line for line, _ in errors] == [2, 4]


def test_duplicate_statements_collapse():
    line = "<http://e/a> <http://e/p> <http://e/b> ."
    triples, _ = parse_ntriples(line + "\n" + line)
    assert len(triples) == 1


def test_not_utf8_payload():
    triples, errors = parse_ntriples(b"\xff\xfe garbage")
    assert triples == [] and "UTF-8" in errors[0][1]


@given(
    st.text(min_size=0, max_size=40),
    st.sampled_from(["en", "fr", "en-GB", None]),
)
@settings(max_examples=120, deadline=None)
def test_any_literal_round_trips(text, lang):
    t = Triple("http://e/a", PREF, text, obj_is_uri=False, obj_lang=lang)
    assert parse_one(render_triple(t)) == t


def test_parser_agrees_with_character_level_oracle():
    rng = random.Random(5)
    state = build_state(rng, 6)
    for line in scheme_to_triples(state).splitlines():
        s, p, o, is_uri, lang = tokenize_triple_line(line)
        t = parse_one(line)
        assert (t.subject, t.predicate, t.obj, t.obj_is_uri, t.obj_lang) == (s, p, o, is_uri, lang)


# -- scheme <-> triples -------------------------------------------------------


def make_meta(title="Test scheme", description="All of it"):
    return SchemeMeta(
        id="s1", token="gem", title=title, description=description,
        owner="a1", maintainers=frozenset(),
        uri_strategy=UriStrategy(StrategyKind.PROVIDED), scheme_uri=SCHEME,
    )


def build_state(rng, n):
    uris = []
    concepts = {}
    for i in range(n):
        uri = f"{SCHEME}/{i + 1}"
        c = synth.concept(rng, uri, pool=uris)
        concepts[uri] = c
        uris.append(uri)
    return SchemeState(meta=make_meta(), concepts=concepts, version=n)


def test_serialization_is_sorted_and_deterministic():
    rng = random.Random(6)
    state = build_state(rng, 5)
    text = scheme_to_triples(state)
    assert text == scheme_to_triples(state)
    keys = []
    for line in text.splitlines():
        s, p, _, _, _ = tokenize_triple_line(line)
        keys.append((s, p, line.split(" ", 2)[2]))
    assert keys == sorted(keys)


def test_round_trip_preserves_content(tmp_path):
    """export -> parse -> import -> export is byte-identical."""
    rng = random.Random(7)
    state = build_state(rng, 10)
    text = scheme_to_triples(state)
    triples, errors = parse_ntriples(text)
    assert errors == []
    draft, warnings = triples_to_scheme(triples)
    assert warnings == []
    assert draft.scheme_uri == SCHEME
    assert draft.title == "Test scheme"
    rebuilt = {d.uri: d.build() for d in draft.concepts}
    again = content_to_triples(SCHEME, draft.title, draft.description, rebuilt)
    assert again == text


def test_extras_survive_round_trip():
    c = Concept(
        uri=f"{SCHEME}/1",
        pref_labels={"en": "Ocean"},
        extras=frozenset({Triple(f"{SCHEME}/1", "http://other.example/seen", "yes", obj_is_uri=False)}),
    )
    text = content_to_triples(SCHEME, "t", "", {c.uri: c})
    draft, warnings = triples_to_scheme(parse_ntriples(text)[0])
    assert warnings == []
    rebuilt = draft.concepts[0].build()
    assert rebuilt.extras == c.extras


def test_no_scheme_subject():
    triples, _ = parse_ntriples("<http://e/a> <%s> <%s> ." % (
        "http://www.w3.org/1999/02/22-rdf-syntax-ns#type",
        "http://www.w3.org/2004/02/skos/core#Concept",
    ))
    with pytest.raises(NoScheme):
        triples_to_scheme(triples)


def test_multiple_scheme_subjects():
    rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
    kind = "http://www.w3.org/2004/02/skos/core#ConceptScheme"
    text = f"<http://e/s1> <{rdf}> <{kind}> .\n<http://e/s2> <{rdf}> <{kind}> .\n"
    with pytest.raises(MultipleSchemes):
        triples_to_scheme(parse_ntriples(text)[0])


def test_duplicate_pref_label_keeps_first_with_warning():
    rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
    skos = "http://www.w3.org/2004/02/skos/core#"
    text = (
        f"<{SCHEME}> <{rdf}> <{skos}ConceptScheme> .\n"
        f"<{SCHEME}/1> <{rdf}> <{skos}Concept> .\n"
        f'<{SCHEME}/1> <{skos}definition> "first"@en .\n'
        f'<{SCHEME}/1> <{skos}definition> "second"@en .\n'
    )
    draft, warnings = triples_to_scheme(parse_ntriples(text)[0])
    assert draft.concepts[0].definition["en"] == "first"
    assert any("more than one definition" in w for w in warnings)


def test_unknown_subject_statements_become_warnings():
    rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
    skos = "http://www.w3.org/2004/02/skos/core#"
    text = (
        f"<{SCHEME}> <{rdf}> <{skos}ConceptScheme> .\n"
        f'<http://elsewhere/x> <{skos}prefLabel> "Stray"@en .\n'
    )
    draft, warnings = triples_to_scheme(parse_ntriples(text)[0])
    assert draft.concepts == []
    assert any("unknown subject" in w for w in warnings)


def test_plain_literal_maps_to_und_language():
    rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
    skos = "http://www.w3.org/2004/02/skos/core#"
    text = (
        f"<{SCHEME}> <{rdf}> <{skos}ConceptScheme> .\n"
        f"<{SCHEME}/1> <{rdf}> <{skos}Concept> .\n"
        f'<{SCHEME}/1> <{skos}prefLabel> "Plain" .\n'
    )
    draft, _ = triples_to_scheme(parse_ntriples(text)[0])
    assert draft.concepts[0].pref_labels == [("und", "Plain")]
    # and it renders back without a language tag
    c = draft.concepts[0].build()
    assert '"Plain" .' in content_to_triples(SCHEME, "", "", {c.uri: c})


# -- CSV ----------------------------------------------------------------------


def test_csv_header_and_row_shape():
    rng = random.Random(8)
    state = build_state(rng, 3)
    text, _ = serialize_csv(state)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 3


def test_csv_loss_report_matches_exhaustive_audit():
    rng = random.Random(9)
    state = build_state(rng, 12)
    _, report = serialize_csv(state)
    got = {(uri, field) for uri, field, _ in report.entries}
    want = expected_csv_losses(state.to_jsonable())
    assert got == want


def test_csv_round_trip_of_carried_fields():
    rng = random.Random(10)
    state = build_state(rng, 8)
    text, _ = serialize_csv(state)
    draft, errors = parse_csv(text)
    assert errors == []
    assert len(draft.concepts) == len(state.concepts)
    for d in draft.concepts:
        original = state.concepts[d.uri]
        assert dict(d.pref_labels).get("en") == original.pref_labels.get("en")
        assert d.definition.get("en") == original.definition.get("en")
        assert d.broader == set(original.broader)
        assert d.status == original.status.value


def test_csv_quoting_of_embedded_commas_and_quotes():
    c = Concept(
        uri=f"{SCHEME}/1",
        pref_labels={"en": 'Comma, and "quote"'},
        definition={"en": "line one\nline two"},
    )
    text, _ = serialize_csv(SchemeState(meta=make_meta(), concepts={c.uri: c}, version=1))
    draft, errors = parse_csv(text)
    assert errors == []
    assert draft.concepts[0].pref_labels == [("en", 'Comma, and "quote"')]
    assert draft.concepts[0].definition["en"] == "line one\nline two"


def test_csv_bad_header():
    with pytest.raises(BadHeader):
        parse_csv("uri,label\nx,y\n")
    with pytest.raises(BadHeader):
        parse_csv("")


def test_csv_row_errors_carry_line_numbers():
    text = ",".join(CSV_HEADER) + "\n" + ",,,,\n" + "http://e/1,One,,,proposed,extra\n"
    draft, errors = parse_csv(text)
    assert draft.concepts == []
    # blank row is skipped silently; the 6-field row errors on its line
    assert errors == [(3, "expected 5 fields, found 6")]


def test_csv_row_without_uri_or_label():
    text = ",".join(CSV_HEADER) + "\n" + ",,A definition,,proposed\n"
    _, errors = parse_csv(text)
    assert len(errors) == 1 and "uri or a prefLabel" in errors[0][1]


def test_csv_pipe_separated_broader():
    text = ",".join(CSV_HEADER) + "\nhttp://e/1,One,,http://e/2|http://e/3,proposed\n"
    draft, errors = parse_csv(text)
    assert errors == []
    assert draft.concepts[0].broader == {"http://e/2", "http://e/3"}
