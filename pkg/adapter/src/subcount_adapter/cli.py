"""Command line for serving a model behind the wire protocol."""
from __future__ import annotations

import argparse
import sys

from .models import AdapterStartupError, load_user_model
from .protocol import serve


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="subcount-adapter",
        description="Expose a regression model to the attack engine over "
                    "newline-delimited JSON.")
    parser.add_argument("--model", default="subcount_adapter.models:echo_count",
                        help="module.path:entrypoint returning the model callable")
    parser.add_argument("--transport", default="stdio",
                        help="stdio or tcp:PORT (tcp:0 picks a free port)")
    args = parser.parse_args(argv)
    try:
        model = load_user_model(args.model)
    except AdapterStartupError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        serve(model, args.transport)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
