"""Pull-based exchange with peer registries.

A peer is anything that speaks our own public read API: ``GET /schemes``,
``GET /schemes/{token}?format=triples``, ``GET /schemes/{token}/changes``.
Harvesting fetches and checks everything first and applies afterwards, so a
peer that turns out to be malformed never leaves partial local state.
"""

from __future__ import annotations

from typing import Optional

import httpx

from .changes import ChangeEvent
from .errors import PeerUnreachable, ProtocolError
from .registry import Registry
from .skosio import parse_ntriples, triples_to_scheme


def _check_payload(token: str, payload: str, reg_base: str) -> str:
    triples, errors = parse_ntriples(payload)
    if errors:
        first = errors[0]
        raise ProtocolError(f"snapshot of {token!r} does not parse: line {first[0]}: {first[1]}")
    try:
        draft, _ = triples_to_scheme(triples, reg_base)
    except Exception as exc:
        raise ProtocolError(f"snapshot of {token!r} is not a scheme: {exc}")
    return draft.scheme_uri or ""


def harvest_peer(
    registry: Registry,
    peer: str,
    scheme: Optional[str] = None,
    client: Optional[httpx.Client] = None,
) -> dict:
    """Sync sequenced copies of a peer's hosted schemes; returns a report."""
    peer = peer.rstrip("/")
    own_client = client is None
    client = client or httpx.Client(timeout=30.0)
    try:
        try:
            resp = client.get(f"{peer}/schemes")
            resp.raise_for_status()
            summaries = resp.json()
        except httpx.HTTPError as exc:
            raise PeerUnreachable(f"cannot list schemes at {peer}: {exc}")
        except ValueError as exc:
            raise ProtocolError(f"scheme listing at {peer} is not structured: {exc}")
        if not isinstance(summaries, list):
            raise ProtocolError("scheme listing is not a list of summaries")

        checked = 0
        unchanged = 0
        plans: list[tuple[str, str, int, str, int]] = []
        for summary in summaries:
            if not isinstance(summary, dict) or not summary.get("hosted", False):
                continue
            token = summary.get("token")
            scheme_uri = summary.get("scheme_uri")
            version = summary.get("version")
            if not token or not scheme_uri or not isinstance(version, int):
                raise ProtocolError(f"scheme summary is missing token/scheme_uri/version: {summary}")
            if scheme and token != scheme:
                continue
            checked += 1
            bookmark = registry.copy_bookmark(peer, scheme_uri)
            if bookmark == version:
                unchanged += 1
                continue

            try:
                changes = client.get(
                    f"{peer}/schemes/{token}/changes", params={"since": bookmark or 0}
                )
                changes.raise_for_status()
                raw_events = changes.json()
                snapshot = client.get(f"{peer}/schemes/{token}", params={"format": "triples"})
                snapshot.raise_for_status()
                payload = snapshot.text
            except httpx.HTTPError as exc:
                raise PeerUnreachable(f"fetch from {peer} failed: {exc}")
            except ValueError as exc:
                raise ProtocolError(f"change listing for {token!r} is not structured: {exc}")

            if not isinstance(raw_events, list):
                raise ProtocolError(f"change listing for {token!r} is not a list")
            try:
                events = [ChangeEvent.from_jsonable(e) for e in raw_events]
            except Exception as exc:
                raise ProtocolError(f"malformed change events for {token!r}: {exc}")
            _check_payload(token, payload, registry.reg_base)
            plans.append((token, scheme_uri, version, payload, len(events)))

        updated = []
        for token, scheme_uri, version, payload, event_count in plans:
            copy = registry.ingest_external_snapshot(
                peer, scheme_uri, payload, peer_version=version
            )
            if copy is None:
                unchanged += 1
            else:
                updated.append(
                    {
                        "token": token,
                        "scheme_uri": scheme_uri,
                        "seq": copy.seq,
                        "peer_version": version,
                        "events": event_count,
                    }
                )
        return {"peer": peer, "checked": checked, "updated": updated, "unchanged": unchanged}
    finally:
        if own_client:
            client.close()
