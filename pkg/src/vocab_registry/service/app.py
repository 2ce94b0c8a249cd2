"""HTTP face of the registry.

Thin wrappers: every mutating endpoint calls exactly one registry operation,
so no commit path can bypass validation or classification.  Reads are open;
writes need a bearer API token issued at agent registration.
"""

from __future__ import annotations

from typing import Optional
from urllib.parse import unquote

from fastapi import Depends, FastAPI, Header, Query, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from ..errors import (
    RegistryError,
    Unauthenticated,
    ValidationFailed,
    VersionConflict,
)
from ..harvest import harvest_peer
from ..registry import Registry
from ..skosio import FORMAT_STRUCTURED, FORMAT_TRIPLES, FORMATS
from . import schemas

ERROR_STATUS = {
    "Unauthenticated": 401,
    "NotOwner": 403,
    "NotMaintainer": 403,
    "UnknownAgent": 404,
    "UnknownScheme": 404,
    "UnknownConcept": 404,
    "UnknownToken": 404,
    "UnknownSubscription": 404,
    "UnknownVersion": 400,
    "VersionConflict": 409,
    "TokenTaken": 409,
    "DuplicateUri": 409,
    "Deprecated": 409,
    "AlreadyDeprecated": 409,
    "DeprecatedIsTerminal": 409,
    "TokenUsed": 410,
    "TokenExpired": 410,
    "ValidationFailed": 422,
    "PeerUnreachable": 502,
    "ProtocolError": 502,
}

MEDIA_TYPES = {
    "triples": "text/plain; charset=utf-8",
    "csv": "text/csv; charset=utf-8",
    "structured": "application/json",
}


def create_app(registry: Registry) -> FastAPI:
    app = FastAPI(title="vocabulary registry", docs_url=None, redoc_url=None)
    app.state.registry = registry

    def current_agent(authorization: Optional[str] = Header(default=None)) -> str:
        if not authorization or not authorization.startswith("Bearer "):
            raise Unauthenticated("send Authorization: Bearer <api-token>")
        return registry.agent_for_api_token(authorization[len("Bearer "):].strip())

    @app.exception_handler(RegistryError)
    async def registry_error(request: Request, exc: RegistryError):
        body = {"error": exc.code, "message": exc.message}
        if isinstance(exc, ValidationFailed):
            body["rules"] = exc.rules
            body["violations"] = [v.to_jsonable() for v in exc.violations]
        elif isinstance(exc, VersionConflict):
            body["expected"] = exc.expected
            body["actual"] = exc.actual
        elif exc.details:
            body["details"] = exc.details
        return JSONResponse(status_code=ERROR_STATUS.get(exc.code, 400), content=body)

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": "BadRequest", "message": str(exc)})

    # -- discovery ---------------------------------------------------------

    @app.get("/")
    def index():
        return {
            "service": "vocabulary registry",
            "schemes": len(registry.list_schemes()),
        }

    @app.get("/schemes")
    def list_schemes(q: Optional[str] = Query(default=None)):
        if q is not None and q == "":
            raise RegistryError("query must be non-empty when given")
        return registry.list_schemes(q)

    @app.get("/schemes/{token}")
    def get_scheme(token: str, version: Optional[int] = None, format: str = FORMAT_STRUCTURED):
        if format not in FORMATS:
            raise RegistryError(f"format must be one of {', '.join(FORMATS)}")
        state = registry.snapshot_at(token, version)
        body, report = registry.export(token, state.version, format)
        return Response(
            content=body,
            media_type=MEDIA_TYPES[format],
            headers={
                "X-Scheme-Version": str(state.version),
                "X-Loss-Count": str(len(report.entries)),
            },
        )

    @app.get("/schemes/{token}/concepts/{key:path}")
    def get_concept(token: str, key: str, version: Optional[int] = None):
        key = unquote(key)
        if version is None:
            return registry.get_concept(token, key).to_jsonable()
        state = registry.snapshot_at(token, version)
        for uri, concept in state.concepts.items():
            if uri == key or uri.rsplit("/", 1)[-1] == key or (
                key.isdigit() and concept.numeric_id == int(key)
            ):
                return concept.to_jsonable()
        from ..errors import UnknownConcept

        raise UnknownConcept(f"no concept {key!r} at version {version}")

    @app.get("/schemes/{token}/changes")
    def changes(token: str, since: int = 0, since_timestamp: Optional[str] = None):
        events = registry.changes_since(token, since_version=since, since_timestamp=since_timestamp)
        return [e.to_jsonable() for e in events]

    @app.get("/schemes/{token}/feed.atom")
    def feed(
        token: str,
        since: Optional[str] = None,
        subscription: Optional[str] = None,
        granularity: Optional[str] = None,
    ):
        since_version = 0
        since_timestamp = None
        if since:
            if since.isdigit():
                since_version = int(since)
            else:
                since_timestamp = since
        if subscription:
            granularity = registry.get_subscription(subscription).granularity
        xml = registry.render_scheme_feed(
            token,
            since_version=since_version,
            since_timestamp=since_timestamp,
            granularity=granularity or "every_commit",
        )
        return Response(content=xml, media_type="application/atom+xml")

    @app.get("/schemes/{token}/history")
    def history(token: str, since: int = 0, uri: Optional[str] = None):
        out = []
        for version, batch in registry.history(token, since=since, concept_uri=uri):
            out.append({"version": version, "events": [e.to_jsonable() for e in batch]})
        return out

    @app.get("/schemes/{token}/diff")
    def diff(token: str, old: int, new: int):
        return registry.diff_versions(token, old, new).to_jsonable()

    # -- agents, auth ------------------------------------------------------

    @app.post("/agents", status_code=201)
    def register_agent(body: schemas.AgentIn):
        agent = registry.register_agent(
            body.name, body.kind, [(c.label, c.address) for c in body.contacts]
        )
        secret = registry.issue_api_token(agent.id)
        return {"agent": agent.to_jsonable(), "api_token": secret}

    @app.get("/me")
    def me(agent: str = Depends(current_agent)):
        return registry.get_agent(agent).to_jsonable()

    # -- scheme and concept mutations ---------------------------------------

    @app.post("/schemes", status_code=201)
    def create_scheme(body: schemas.SchemeIn, agent: str = Depends(current_agent)):
        meta = registry.create_scheme(
            owner=agent,
            token=body.token,
            title=body.title,
            strategy=body.strategy.build(),
            description=body.description,
            scheme_uri=body.scheme_uri,
        )
        return registry.scheme_summary(meta.token)

    @app.post("/schemes/{token}/maintainers", status_code=200)
    def designate_maintainer(token: str, body: dict, agent: str = Depends(current_agent)):
        meta = registry.designate_maintainer(token, body.get("agent", ""), actor=agent)
        return {"maintainers": sorted(meta.maintainers)}

    @app.post("/schemes/{token}/concepts", status_code=201)
    def add_concept(token: str, body: schemas.AddConceptIn, agent: str = Depends(current_agent)):
        concept = registry.add_concept(
            token, body.concept.to_draft(), author=agent, expected_version=body.expected_version
        )
        return {"concept": concept.to_jsonable(), "version": registry.head_version(token)}

    def _edits_from(body: schemas.UpdateIn):
        if body.replacement is not None:
            return body.replacement.to_draft()
        return [i.to_jsonable() for i in body.items or []]

    @app.post("/schemes/{token}/concepts/{key:path}/preview")
    def preview(token: str, key: str, body: schemas.UpdateIn, agent: str = Depends(current_agent)):
        uri = registry.get_concept(token, unquote(key)).uri
        items, classification = registry.preview_update(
            token, uri, _edits_from(body), assertion=body.assertion
        )
        out: dict = {"uri": uri, "items": [i.to_jsonable() for i in items]}
        if classification is None:
            out["outcome"] = "NoChange"
        else:
            out["outcome"] = classification.outcome.value
            out["classification"] = classification.to_jsonable()
            if classification.questions:
                out["questions"] = list(classification.questions)
        return out

    @app.post("/schemes/{token}/concepts/{key:path}/status")
    def set_status(token: str, key: str, body: schemas.StatusIn, agent: str = Depends(current_agent)):
        uri = registry.get_concept(token, unquote(key)).uri
        version = registry.set_status(
            token, uri, body.status, author=agent, expected_version=body.expected_version
        )
        return {"uri": uri, "version": version}

    @app.post("/schemes/{token}/concepts/{key:path}/deprecate")
    def deprecate(
        token: str, key: str, body: schemas.DeprecateIn, agent: str = Depends(current_agent)
    ):
        uri = registry.get_concept(token, unquote(key)).uri
        version = registry.deprecate_concept(
            token, uri, author=agent, expected_version=body.expected_version
        )
        return {"uri": uri, "version": version}

    @app.post("/schemes/{token}/concepts/{key:path}/split")
    def split(token: str, key: str, body: schemas.SplitIn, agent: str = Depends(current_agent)):
        uri = registry.get_concept(token, unquote(key)).uri
        version, new_uris = registry.split_concept(
            token,
            uri,
            [d.to_draft() for d in body.drafts],
            author=agent,
            expected_version=body.expected_version,
        )
        return {"uri": uri, "new_uris": new_uris, "version": version}

    @app.post("/schemes/{token}/concepts/{key:path}/merge")
    def merge(token: str, key: str, body: schemas.MergeIn, agent: str = Depends(current_agent)):
        uri = registry.get_concept(token, unquote(key)).uri
        sources = [uri] + [s for s in body.sources if s != uri]
        version, new_uri = registry.merge_concepts(
            token,
            sources,
            body.draft.to_draft(),
            author=agent,
            expected_version=body.expected_version,
        )
        return {"sources": sources, "new_uri": new_uri, "version": version}

    @app.post("/schemes/{token}/concepts/{key:path}")
    def update_concept(
        token: str, key: str, body: schemas.UpdateIn, agent: str = Depends(current_agent)
    ):
        uri = registry.get_concept(token, unquote(key)).uri
        outcome = registry.update_concept(
            token,
            uri,
            _edits_from(body),
            author=agent,
            assertion=body.assertion,
            expected_version=body.expected_version,
        )
        return outcome.to_jsonable()

    # -- subscriptions, usage, notifications ---------------------------------

    @app.post("/subscriptions", status_code=201)
    def subscribe(body: schemas.SubscriptionIn, agent: str = Depends(current_agent)):
        return registry.subscribe(agent, body.scope, body.channel, body.granularity).to_jsonable()

    @app.get("/subscriptions")
    def my_subscriptions(agent: str = Depends(current_agent)):
        return [s.to_jsonable() for s in registry.subscriptions_for(agent)]

    @app.delete("/subscriptions/{subscription_id}", status_code=204)
    def unsubscribe(subscription_id: str, agent: str = Depends(current_agent)):
        sub = registry.get_subscription(subscription_id)
        if sub.agent != agent:
            from ..errors import NotOwner

            raise NotOwner("not your subscription")
        registry.unsubscribe(subscription_id)
        return Response(status_code=204)

    @app.post("/usages", status_code=201)
    def register_usage(body: schemas.UsageIn, agent: str = Depends(current_agent)):
        return registry.register_usage(agent, body.scheme).to_jsonable()

    @app.get("/notifications")
    def my_notifications(agent: str = Depends(current_agent)):
        return [n.to_jsonable() for n in registry.notifications_for(agent)]

    @app.get("/tickets")
    def my_tickets(agent: str = Depends(current_agent)):
        return [
            {
                "token": t.token,
                "scheme_id": t.scheme_id,
                "question": t.question,
                "pending": t.pending,
                "issued_at": t.issued_at,
                "expires_at": t.expires_at,
            }
            for t in registry.pending_tickets(agent)
        ]

    @app.get("/confirm/{ticket_token}")
    def confirm(ticket_token: str, answer: str = Query(...)):
        if answer not in ("yes", "no"):
            raise RegistryError("answer must be yes or no")
        result = registry.resolve_confirmation(ticket_token, answer)
        if result["answer"] == "yes":
            text = f"change applied, scheme at version {result['version']}"
        else:
            text = "change discarded"
        return PlainTextResponse(text)

    # -- inter-registry exchange ---------------------------------------------

    @app.post("/ingest", status_code=201)
    def ingest(body: schemas.IngestIn, agent: str = Depends(current_agent)):
        copy = registry.ingest_external_snapshot(body.source, body.scheme_uri, body.payload)
        if copy is None:
            return JSONResponse(status_code=200, content={"outcome": "NoChange"})
        return {
            "outcome": "Stored",
            "copy": {
                "id": copy.id,
                "source": copy.source,
                "scheme_uri": copy.scheme_uri,
                "seq": copy.seq,
                "retrieved_at": copy.retrieved_at,
            },
        }

    @app.post("/harvest")
    def harvest(body: schemas.HarvestIn, agent: str = Depends(current_agent)):
        return harvest_peer(registry, body.peer, scheme=body.scheme)

    @app.get("/copies")
    def list_copies():
        return [s for s in registry.list_schemes() if s["kind"] == "copy"]

    @app.get("/copies/{copy_id}")
    def get_copy(copy_id: str, seq: Optional[int] = None, format: str = "structured"):
        copy = registry.load_copy(copy_id, seq)
        if format == FORMAT_TRIPLES:
            return PlainTextResponse(copy.to_triples(registry.reg_base))
        return copy.content_jsonable()

    return app
