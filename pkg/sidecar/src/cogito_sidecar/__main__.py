"""Sidecar CLI: serve the model endpoints or record a fixture bundle."""

from __future__ import annotations

import argparse
import sys

from .adapters import AdapterRegistry, ModelUnavailable
from .app import create_app
from .config import SidecarConfig
from .record import load_manifest, record_fixtures


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cogito-sidecar")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="serve the /v1 endpoints")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8321)
    serve.add_argument("--device", default="cpu")

    record = sub.add_parser("record", help="record a fixture bundle")
    record.add_argument("--manifest", required=True, help="recording manifest JSON")
    record.add_argument("--out", required=True, help="bundle output directory")
    record.add_argument("--device", default="cpu")

    args = parser.parse_args(argv)
    config = SidecarConfig(
        host=getattr(args, "host", "127.0.0.1"),
        port=getattr(args, "port", 8321),
        device=args.device,
    )
    registry = AdapterRegistry.from_config(config)

    if args.command == "serve":
        import uvicorn

        uvicorn.run(create_app(registry), host=config.host, port=config.port)
        return 0

    try:
        counts = record_fixtures(registry, load_manifest(args.manifest), args.out)
    except ModelUnavailable as exc:
        print(f"cannot record: {exc}", file=sys.stderr)
        return 1
    print(f"recorded {counts}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
