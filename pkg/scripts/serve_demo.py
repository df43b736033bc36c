#!/usr/bin/env python3
"""Launch the session service with the built-in demo assets.

Point the explorer UI (frontend/) or any WebSocket client at it:
    python scripts/serve_demo.py --port 8077
"""

import argparse
from pathlib import Path

import uvicorn

from hapticfield.service import create_app


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8077)
    parser.add_argument("--assets", default=None, help="extra grid directory")
    args = parser.parse_args()

    static = Path(__file__).resolve().parent.parent / "frontend" / "dist"
    app = create_app(
        asset_dir=args.assets,
        static_dir=str(static) if static.is_dir() else None,
    )
    uvicorn.run(app, host=args.host, port=args.port)


if __name__ == "__main__":
    main()
