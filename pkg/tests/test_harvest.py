"""Peer synchronisation: fetch-check-apply over the public read API."""

import json
import random

import httpx
import pytest
from fastapi.testclient import TestClient

import synth
from vocab_registry.errors import PeerUnreachable, ProtocolError
from vocab_registry.harvest import harvest_peer
from vocab_registry.registry import Registry
from vocab_registry.service.app import create_app

PEER_URL = "http://testserver"


@pytest.fixture
def peer(tmp_path):
    reg = Registry(tmp_path / "peer", base_uri="http://peer.example.org")
    rng = random.Random(3)
    synth.populate_scheme(rng, reg, "gem", "a1", 6)
    synth.populate_scheme(rng, reg, "soil", "a1", 4)
    return reg


@pytest.fixture
def peer_client(peer):
    return TestClient(create_app(peer))


@pytest.fixture
def local(tmp_path):
    return Registry(tmp_path / "local", base_uri="http://local.example.org")


def test_harvest_copies_every_hosted_scheme(local, peer, peer_client):
    report = harvest_peer(local, PEER_URL, client=peer_client)
    # "status" is the bootstrap vocabulary every registry hosts
    assert report["checked"] == 3
    assert report["unchanged"] == 0
    assert {u["token"] for u in report["updated"]} == {"gem", "soil", "status"}
    for entry in report["updated"]:
        assert entry["seq"] == 1
        assert entry["peer_version"] == peer.head_version(entry["token"])


def test_harvested_copy_matches_peer_export(local, peer, peer_client):
    harvest_peer(local, PEER_URL, client=peer_client)
    scheme_uri = peer.snapshot_at("gem").meta.scheme_uri
    copy_id = local.find_copy(PEER_URL, scheme_uri)
    assert copy_id is not None
    copy = local.load_copy(copy_id)
    body, _ = peer.export("gem", fmt="triples")
    assert copy.to_triples(local.reg_base) == body


def test_second_harvest_is_a_noop(local, peer, peer_client):
    harvest_peer(local, PEER_URL, client=peer_client)
    report = harvest_peer(local, PEER_URL, client=peer_client)
    assert report["updated"] == []
    assert report["unchanged"] == report["checked"] == 3


def test_harvest_picks_up_new_versions(local, peer, peer_client):
    harvest_peer(local, PEER_URL, client=peer_client)
    uri = sorted(peer.snapshot_at("gem").concepts)[0]
    peer.update_concept("gem", uri, [
        {"field": "note", "op": "add", "new": "refreshed upstream"},
    ], author="a1")

    report = harvest_peer(local, PEER_URL, client=peer_client)
    assert [u["token"] for u in report["updated"]] == ["gem"]
    assert report["updated"][0]["seq"] == 2
    assert report["unchanged"] == 2

    scheme_uri = peer.snapshot_at("gem").meta.scheme_uri
    copy = local.load_copy(local.find_copy(PEER_URL, scheme_uri))
    assert copy.seq == 2
    assert uri in copy.concepts and "refreshed upstream" in copy.concepts[uri].notes


def test_scheme_filter_limits_the_pull(local, peer, peer_client):
    report = harvest_peer(local, PEER_URL, scheme="gem", client=peer_client)
    assert report["checked"] == 1
    assert [u["token"] for u in report["updated"]] == ["gem"]
    assert local.find_copy(PEER_URL, peer.snapshot_at("soil").meta.scheme_uri) is None


def test_peer_copies_are_not_reharvested(local, peer, peer_client):
    # the peer itself holds a copy of somebody else's scheme; hosted=False
    third_party = (
        "<http://third.example.org/x> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> "
        "<http://www.w3.org/2004/02/skos/core#ConceptScheme> .\n"
    )
    peer.ingest_external_snapshot("http://third.example.org", None, third_party)
    report = harvest_peer(local, PEER_URL, client=peer_client)
    assert report["checked"] == 3  # gem, soil, status -- not the copy
    assert all(u["scheme_uri"] != "http://third.example.org/x" for u in report["updated"])


# -- malformed peers -----------------------------------------------------------


def mock_client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


def test_unreachable_peer(local):
    def handler(request):
        raise httpx.ConnectError("refused", request=request)

    with pytest.raises(PeerUnreachable):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))


def test_peer_5xx_is_unreachable(local):
    def handler(request):
        return httpx.Response(500, text="boom")

    with pytest.raises(PeerUnreachable):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))


def test_listing_that_is_not_structured(local):
    def handler(request):
        return httpx.Response(200, text="<html>not an api</html>")

    with pytest.raises(ProtocolError):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))


def test_listing_that_is_not_a_list(local):
    def handler(request):
        return httpx.Response(200, json={"schemes": []})

    with pytest.raises(ProtocolError, match="not a list"):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))


def test_summary_missing_fields(local):
    def handler(request):
        return httpx.Response(200, json=[{"hosted": True, "token": "gem"}])

    with pytest.raises(ProtocolError, match="missing token/scheme_uri/version"):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))


def _two_scheme_peer(bad_payload: str):
    """One healthy scheme and one whose snapshot is bad_payload."""
    rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
    skos = "http://www.w3.org/2004/02/skos/core#"
    good_payload = f"<http://p/good> <{rdf}> <{skos}ConceptScheme> .\n"

    def handler(request):
        path = request.url.path
        if path == "/schemes":
            return httpx.Response(200, json=[
                {"hosted": True, "token": "good", "scheme_uri": "http://p/good", "version": 1},
                {"hosted": True, "token": "bad", "scheme_uri": "http://p/bad", "version": 1},
            ])
        if path.endswith("/changes"):
            return httpx.Response(200, json=[])
        if path == "/schemes/good":
            return httpx.Response(200, text=good_payload)
        if path == "/schemes/bad":
            return httpx.Response(200, text=bad_payload)
        return httpx.Response(404, json={"error": "nope"})

    return handler


def test_one_bad_snapshot_applies_nothing(local):
    handler = _two_scheme_peer("this is not n-triples\n")
    with pytest.raises(ProtocolError, match="does not parse"):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))
    # the healthy scheme was fetched first but must not have been applied
    assert local.find_copy("http://peer.invalid", "http://p/good") is None


def test_snapshot_without_a_scheme_subject(local):
    skos = "http://www.w3.org/2004/02/skos/core#"
    handler = _two_scheme_peer(
        f'<http://p/bad/1> <{skos}prefLabel> "Orphan"@en .\n'
    )
    with pytest.raises(ProtocolError, match="is not a scheme"):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))
    assert local.find_copy("http://peer.invalid", "http://p/good") is None


def test_malformed_change_events(local):
    rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
    skos = "http://www.w3.org/2004/02/skos/core#"

    def handler(request):
        path = request.url.path
        if path == "/schemes":
            return httpx.Response(200, json=[
                {"hosted": True, "token": "gem", "scheme_uri": "http://p/gem", "version": 1},
            ])
        if path.endswith("/changes"):
            return httpx.Response(200, json=[{"not": "an event"}])
        return httpx.Response(200, text=f"<http://p/gem> <{rdf}> <{skos}ConceptScheme> .\n")

    with pytest.raises(ProtocolError, match="malformed change events"):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))


def test_change_listing_not_json(local):
    rdf = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
    skos = "http://www.w3.org/2004/02/skos/core#"

    def handler(request):
        path = request.url.path
        if path == "/schemes":
            return httpx.Response(200, json=[
                {"hosted": True, "token": "gem", "scheme_uri": "http://p/gem", "version": 1},
            ])
        if path.endswith("/changes"):
            return httpx.Response(200, text="plain text")
        return httpx.Response(200, text=f"<http://p/gem> <{rdf}> <{skos}ConceptScheme> .\n")

    with pytest.raises(ProtocolError):
        harvest_peer(local, "http://peer.invalid", client=mock_client(handler))


def test_harvest_report_is_jsonable(local, peer, peer_client):
    report = harvest_peer(local, PEER_URL, client=peer_client)
    assert json.loads(json.dumps(report)) == report
