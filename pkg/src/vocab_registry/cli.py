"""Operator command line.

Subcommands wrap registry operations over a local data directory; ``serve``
exposes the same directory over HTTP.  Exit codes: 0 success, 1 domain error,
2 usage error.  Data goes to stdout, diagnostics (loss reports, warnings,
errors) to stderr, so output stays pipeable.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .changes import render_event, render_state_diff
from .errors import DataDirLocked, RegistryError, UnknownScheme
from .harvest import harvest_peer
from .model import canonical_json
from .registry import DEFAULT_BASE_URI, Registry
from .skosio import (
    FORMAT_CSV,
    FORMAT_STRUCTURED,
    FORMAT_TRIPLES,
    FORMATS,
    parse_csv,
    parse_ntriples,
    triples_to_scheme,
)
from .validation import errors_only, render_report, validate_batch

ENV_DATA_DIR = "REGISTRY_DATA_DIR"
ENV_BASE_URI = "REGISTRY_BASE_URI"
ENV_BIND = "REGISTRY_BIND"

DEFAULT_DATA_DIR = "registry-data"
DEFAULT_BIND = "127.0.0.1:8000"

OUTPUT_HUMAN = "human"
OUTPUT_STRUCTURED = "structured"


def _env_default(flag_value, env_name, fallback):
    """Flags beat env vars beat built-in defaults."""
    if flag_value is not None:
        return flag_value
    return os.environ.get(env_name) or fallback


class DataDirLock:
    """Exclusive access to a data directory via a pid file.

    A lock left behind by a dead process is taken over silently; a live
    holder raises ``DataDirLocked``.
    """

    def __init__(self, data_dir: Path):
        self.path = Path(data_dir) / ".lock"

    def __enter__(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        if self.path.exists():
            holder = None
            try:
                holder = int(self.path.read_text().strip())
            except (ValueError, OSError):
                pass
            if holder is not None and holder != os.getpid() and _alive(holder):
                raise DataDirLocked(f"data directory in use by pid {holder}")
            self.path.unlink(missing_ok=True)
        self.path.write_text(str(os.getpid()))
        return self

    def __exit__(self, *exc):
        self.path.unlink(missing_ok=True)
        return False


def _alive(pid: int) -> bool:
    try:
        os.kill(pid, 0)
    except ProcessLookupError:
        return False
    except PermissionError:
        return True
    except OSError:
        return False
    return True


def _open_registry(args) -> Registry:
    data_dir = _env_default(args.data_dir, ENV_DATA_DIR, DEFAULT_DATA_DIR)
    base_uri = _env_default(args.base_uri, ENV_BASE_URI, DEFAULT_BASE_URI)
    return Registry(Path(data_dir), base_uri=base_uri)


def _data_dir(args) -> Path:
    return Path(_env_default(args.data_dir, ENV_DATA_DIR, DEFAULT_DATA_DIR))


# ----------------------------------------------------------------------
# Subcommands


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    bind = _env_default(args.bind, ENV_BIND, DEFAULT_BIND)
    host, _, port = bind.rpartition(":")
    with DataDirLock(_data_dir(args)):
        registry = _open_registry(args)
        app = create_app(registry)
        uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")
    return 0


def cmd_import(args) -> int:
    payload = Path(args.file).read_bytes()
    with DataDirLock(_data_dir(args)):
        registry = _open_registry(args)
        owner = args.owner
        try:
            registry.get_agent(owner)
        except RegistryError:
            registry.register_agent(
                owner, "individual", [("cli", f"{owner}@localhost")], agent_id=owner
            )
        meta = registry.import_scheme(
            owner=owner, token=args.token, payload=payload, fmt=args.format
        )
        version = registry.head_version(meta.token)
    if args.output == OUTPUT_STRUCTURED:
        print(canonical_json({"token": meta.token, "scheme_uri": meta.scheme_uri, "version": version}))
    else:
        print(f"{meta.token} version {version}")
    return 0


def cmd_export(args) -> int:
    with DataDirLock(_data_dir(args)):
        registry = _open_registry(args)
        body, report = registry.export(args.scheme, args.version, args.format)
    sys.stdout.write(body)
    if not report.empty:
        sys.stderr.write(report.render() + "\n")
    return 0


def cmd_diff(args) -> int:
    with DataDirLock(_data_dir(args)):
        registry = _open_registry(args)
        diff = registry.diff_versions(args.scheme, args.old, args.new)
    if args.output == OUTPUT_STRUCTURED:
        print(canonical_json(diff.to_jsonable()))
    else:
        text = render_state_diff(diff)
        if text:
            print(text)
    return 0


def cmd_validate(args) -> int:
    target = args.target
    if Path(target).is_file():
        violations = _validate_file(Path(target), args.format)
    else:
        with DataDirLock(_data_dir(args)):
            registry = _open_registry(args)
            try:
                state = registry.snapshot_at(target, args.version)
            except UnknownScheme:
                raise UnknownScheme(f"{target!r} is neither a file nor a known scheme")
            from .validation import validate_state

            violations = validate_state(state.concepts, state.meta.scheme_uri)
    if args.output == OUTPUT_STRUCTURED:
        print(canonical_json([v.to_jsonable() for v in violations]))
    elif violations:
        print(render_report(violations))
    return 1 if errors_only(violations) else 0


def _validate_file(path: Path, fmt: str):
    payload = path.read_bytes()
    if fmt == FORMAT_CSV:
        draft, errors = parse_csv(payload)
    else:
        triples, errors = parse_ntriples(payload)
        if not errors:
            draft, _ = triples_to_scheme(triples)
        else:
            draft = None
    if errors:
        from .errors import ParseFailed

        raise ParseFailed(errors)
    scheme_uri = draft.scheme_uri or "http://example.invalid/scheme"
    return validate_batch({}, draft.concepts, scheme_uri)


def cmd_history(args) -> int:
    with DataDirLock(_data_dir(args)):
        registry = _open_registry(args)
        batches = registry.history(args.scheme, since=args.since, concept_uri=args.uri)
    if args.output == OUTPUT_STRUCTURED:
        out = [
            {"version": version, "events": [e.to_jsonable() for e in events]}
            for version, events in batches
        ]
        print(canonical_json(out))
    else:
        for _version, events in batches:
            for event in events:
                for line in render_event(event):
                    print(line)
    return 0


def cmd_harvest(args) -> int:
    with DataDirLock(_data_dir(args)):
        registry = _open_registry(args)
        report = harvest_peer(registry, args.peer, scheme=args.scheme)
    if args.output == OUTPUT_STRUCTURED:
        print(canonical_json(report))
    else:
        for entry in report["updated"]:
            print(f"{entry['token']} seq {entry['seq']} (peer version {entry['peer_version']})")
        print(f"checked {report['checked']}, updated {len(report['updated'])}, unchanged {report['unchanged']}")
    return 0


# ----------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vocab-registry", description=__doc__)
    parser.add_argument("--data-dir", help=f"data directory (or ${ENV_DATA_DIR})")
    parser.add_argument("--base-uri", help=f"minting base URI (or ${ENV_BASE_URI})")
    sub = parser.add_subparsers(dest="cmd", required=True)

    def add_output(p):
        p.add_argument(
            "--output",
            choices=(OUTPUT_HUMAN, OUTPUT_STRUCTURED),
            default=OUTPUT_HUMAN,
            help="human-readable lines or canonical JSON",
        )

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--bind", help=f"host:port (or ${ENV_BIND})")
    serve.set_defaults(func=cmd_serve)

    imp = sub.add_parser("import", help="create a scheme from a carrier file")
    imp.add_argument("file")
    imp.add_argument("--format", choices=(FORMAT_TRIPLES, FORMAT_CSV), default=FORMAT_TRIPLES)
    imp.add_argument("--owner", required=True, help="owning agent id (registered on first use)")
    imp.add_argument("--token", required=True, help="scheme token")
    add_output(imp)
    imp.set_defaults(func=cmd_import)

    exp = sub.add_parser("export", help="write a scheme snapshot to stdout")
    exp.add_argument("scheme")
    exp.add_argument("--version", type=int)
    exp.add_argument("--format", choices=FORMATS, default=FORMAT_TRIPLES)
    exp.set_defaults(func=cmd_export)

    dif = sub.add_parser("diff", help="state difference between two versions")
    dif.add_argument("scheme")
    dif.add_argument("old", type=int)
    dif.add_argument("new", type=int)
    add_output(dif)
    dif.set_defaults(func=cmd_diff)

    val = sub.add_parser("validate", help="check a scheme or carrier file")
    val.add_argument("target", help="scheme token or file path")
    val.add_argument("--format", choices=(FORMAT_TRIPLES, FORMAT_CSV), default=FORMAT_TRIPLES)
    val.add_argument("--version", type=int)
    add_output(val)
    val.set_defaults(func=cmd_validate)

    his = sub.add_parser("history", help="change events of a scheme")
    his.add_argument("scheme")
    his.add_argument("--since", type=int, default=0)
    his.add_argument("--uri", help="only events touching this concept")
    add_output(his)
    his.set_defaults(func=cmd_history)

    har = sub.add_parser("harvest", help="pull schemes from a peer registry")
    har.add_argument("peer", help="peer base URL")
    har.add_argument("--scheme", help="limit to one peer scheme token")
    add_output(har)
    har.set_defaults(func=cmd_harvest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except RegistryError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
