"""Command-line frontend: convert, mint, validate, index and serve.

Data goes to stdout, diagnostics to stderr. Exit codes: 0 success,
1 recoverable errors (error-severity diagnostics, invalid ids, exhaustion),
2 fatal input problems (unparseable XML, unreadable files).
"""

from __future__ import annotations

import argparse
import json
import os
import signal
import sys

from . import ark as arkmod
from . import indexer, skos
from .model import Diagnostic, MalformedXml, has_errors
from .server import ConfigError, build_server, load_config
from .tei import HierarchyMode, compile_scheme, parse_tei

CONFIG_ENV_VAR = "VOCAB_PIPELINE_CONFIG"


def _print_diagnostics(diagnostics: list[Diagnostic]) -> None:
    for d in diagnostics:
        print(str(d), file=sys.stderr)


def cmd_convert(args) -> int:
    try:
        with open(args.input, "rb") as f:
            document = f.read()
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return 2
    try:
        entries, parse_diags = parse_tei(document)
    except MalformedXml as exc:
        print(f"fatal: {exc}", file=sys.stderr)
        return 2
    scheme, compile_diags = compile_scheme(
        entries,
        scheme_id=args.scheme_id,
        edition_year=args.year,
        naan=args.naan,
        hierarchy_mode=HierarchyMode(args.hierarchy),
    )
    diagnostics = parse_diags + compile_diags
    _print_diagnostics(diagnostics)
    with open(args.output, "wb") as f:
        f.write(skos.serialize_skos(scheme))
    return 1 if has_errors(diagnostics) else 0


def cmd_mint(args) -> int:
    if os.path.exists(args.state):
        try:
            state = arkmod.load_minter_state(args.state)
        except (OSError, ValueError, KeyError) as exc:
            print(f"cannot read minter state {args.state}: {exc}", file=sys.stderr)
            return 2
    else:
        state = arkmod.MinterState(naan=args.naan)
        arkmod.save_minter_state(state, args.state)
    for _ in range(args.count):
        try:
            minted, state = arkmod.mint(state)
        except arkmod.MinterExhausted as exc:
            print(str(exc), file=sys.stderr)
            return 1
        # persist the advanced counter before the id escapes: a minted id
        # must never be handed out twice, even across a crash
        arkmod.save_minter_state(state, args.state)
        print(arkmod.render(minted), flush=True)
    return 0


def cmd_validate(args) -> int:
    try:
        parsed = arkmod.parse_ark(args.ark)
    except arkmod.InvalidArk as exc:
        print(str(exc), file=sys.stderr)
        return 1
    ok, reasons = arkmod.validate(arkmod.normalize(parsed), strict=args.strict)
    for reason in reasons:
        print(reason, file=sys.stderr)
    return 0 if ok else 1


def cmd_index(args) -> int:
    try:
        with open(args.scheme, "rb") as f:
            scheme, diagnostics = skos.parse_skos(f.read())
    except (OSError, MalformedXml) as exc:
        print(f"cannot load scheme {args.scheme}: {exc}", file=sys.stderr)
        return 2
    _print_diagnostics(diagnostics)
    try:
        with open(args.doc, "rb") as f:
            raw = f.read()
        format = "html" if args.doc.lower().endswith((".html", ".htm")) else "txt"
        text = indexer.extract_text(raw, format)
    except (OSError, indexer.InvalidEncoding) as exc:
        print(f"cannot read document {args.doc}: {exc}", file=sys.stderr)
        return 2
    phrases = indexer.rake_extract(text)
    results = indexer.match_vocabulary(phrases, scheme, uninvert=args.uninvert)
    results = results[: args.max]
    for result in results:
        print(json.dumps(indexer.result_to_dict(result), ensure_ascii=False), flush=True)
    if args.cloud:
        format = "json" if args.cloud.lower().endswith(".json") else "html"
        try:
            payload = indexer.tag_cloud(results, format)
        except indexer.EmptyResults as exc:
            print(str(exc), file=sys.stderr)
            return 1
        with open(args.cloud, "wb") as f:
            f.write(payload)
    return 0


def cmd_serve(args) -> int:
    config_path = os.environ.get(CONFIG_ENV_VAR, args.config)
    try:
        config = load_config(config_path)
        server = build_server(config)
    except (ConfigError, OSError, MalformedXml) as exc:
        print(f"cannot start: {exc}", file=sys.stderr)
        return 1
    if hasattr(signal, "SIGHUP"):
        signal.signal(signal.SIGHUP, lambda signum, frame: server.reload())
    print(f"listening on {config.listen_address}", file=sys.stderr)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vocab-pipeline",
        description="Convert printed vocabularies to SKOS, mint and resolve ARKs, "
                    "and index documents against a vocabulary.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="compile TEI entries into a SKOS RDF/XML file")
    p.add_argument("--in", dest="input", required=True, metavar="TEI_XML")
    p.add_argument("--out", dest="output", required=True, metavar="SKOS_RDF")
    p.add_argument("--hierarchy", choices=["related", "hierarchical"], default="related")
    p.add_argument("--scheme-id", default="scheme")
    p.add_argument("--year", type=int, default=1900)
    p.add_argument("--naan", default="99152")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("mint", help="mint ARKs from a durable minter state file")
    p.add_argument("--state", required=True, metavar="STATE_JSON")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--naan", default="99152",
                   help="NAAN used when creating a fresh state file")
    p.set_defaults(func=cmd_mint)

    p = sub.add_parser("validate", help="check an ARK's grammar (and check character)")
    p.add_argument("--ark", required=True)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("index", help="suggest vocabulary terms for a document")
    p.add_argument("--scheme", required=True, metavar="SKOS_RDF")
    p.add_argument("--doc", required=True, metavar="FILE")
    p.add_argument("--max", type=int, default=25)
    p.add_argument("--uninvert", action="store_true")
    p.add_argument("--cloud", metavar="OUT_HTML_OR_JSON")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("serve", help="run the ARK resolver service")
    p.add_argument("--config", required=True, metavar="CONFIG_JSON")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
