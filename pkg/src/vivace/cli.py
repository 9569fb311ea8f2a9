"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 parse/eval error, 3 I/O error.
Structured output goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys
from pathlib import Path

from .audio import (
    BufferTooShort,
    MissingSampleFile,
    SampleRateMismatch,
    UnsupportedInputFormat,
    analyze,
    automation_to_jsonl,
    frames_to_jsonl,
    read_wav,
    render,
    write_wav,
)
from .errors import VivaceError
from .interp import EngineState, dump_json, eval_program
from .parser import diagnostics_json, format_diagnostics, parse
from .scheduler import schedule, timeline_to_csv, timeline_to_jsonl
from .server import SessionServer, run_server

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_LANG = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage problems; the contract here is 1
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vivace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_check = sub.add_parser("check", help="parse a program and report diagnostics")
    p_check.add_argument("file")
    p_check.add_argument("--format", choices=("text", "json"), default="text")

    p_dump = sub.add_parser("dump", help="evaluate a program and print engine state")
    p_dump.add_argument("file")
    p_dump.add_argument("--format", choices=("json", "text"), default="json")
    p_dump.add_argument("--bpm", type=float, default=None)

    p_render = sub.add_parser("render", help="schedule and render a program offline")
    p_render.add_argument("file")
    p_render.add_argument("--duration", type=float, default=8.0, help="seconds")
    p_render.add_argument("--bpm", type=float, default=None)
    p_render.add_argument("--out", default=None, help="event trace path (default stdout)")
    p_render.add_argument("--wav", default=None, help="write rendered audio here")
    p_render.add_argument("--csv", default=None, help="write the trace as CSV here")
    p_render.add_argument("--automation", default=None, help="write automation trace here")
    p_render.add_argument("--sample-rate", type=int, default=44100)

    p_analyze = sub.add_parser("analyze", help="FFT analysis of a WAV file")
    p_analyze.add_argument("wav")
    p_analyze.add_argument("--fft", type=int, default=1024)
    p_analyze.add_argument("--hop", type=int, default=512)

    p_serve = sub.add_parser("serve", help="host a collaborative session")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8765)
    p_serve.add_argument("--doc", default=None, help="initial program file")
    p_serve.add_argument("--snapshot", default=None, help="write doc+version here on exit")
    p_serve.add_argument("--static", default=None, help="directory of editor assets for /")

    return parser


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as err:
        print(f"vivace: {err}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from None


def _write_text(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as err:
        print(f"vivace: {err}", file=sys.stderr)
        raise SystemExit(EXIT_IO) from None


def _parse_file(path: str):
    source = _read_text(path)
    return source, parse(source)


def _eval_file(path: str, bpm):
    source, result = _parse_file(path)
    if result.errors:
        print(format_diagnostics(result.errors, source), file=sys.stderr, end="")
        raise SystemExit(EXIT_LANG)
    state = EngineState() if bpm is None else EngineState(tempo_bpm=bpm)
    outcome = eval_program(state, result.program)
    for warning in outcome.warnings:
        print(f"warning: {warning.voice}.{warning.param}: {warning.message}",
              file=sys.stderr)
    if outcome.errors:
        for err in outcome.errors:
            where = f"{err.line}:{err.col}: " if err.line else ""
            print(f"{where}{err.message}", file=sys.stderr)
        raise SystemExit(EXIT_LANG)
    return outcome.state


def cmd_check(args) -> int:
    source, result = _parse_file(args.file)
    if args.format == "json":
        print(diagnostics_json(result.errors))
    else:
        sys.stdout.write(format_diagnostics(result.errors, source))
    return EXIT_LANG if result.errors else EXIT_OK


def cmd_dump(args) -> int:
    state = _eval_file(args.file, args.bpm)
    if args.format == "json":
        print(dump_json(state))
    else:
        print(dump_json(state, indent=2))
    return EXIT_OK


def cmd_render(args) -> int:
    if args.duration <= 0:
        print("vivace: error: --duration must be positive", file=sys.stderr)
        return EXIT_USAGE
    if args.sample_rate <= 0:
        print("vivace: error: --sample-rate must be positive", file=sys.stderr)
        return EXIT_USAGE
    state = _eval_file(args.file, args.bpm)
    timeline = schedule(state, args.duration)
    trace = timeline_to_jsonl(timeline)
    if args.out:
        _write_text(args.out, trace)
    else:
        sys.stdout.write(trace)
    if args.csv:
        _write_text(args.csv, timeline_to_csv(timeline))
    if args.wav or args.automation:
        try:
            result = render(timeline, state, args.sample_rate)
        except (MissingSampleFile, SampleRateMismatch, UnsupportedInputFormat) as err:
            print(f"vivace: {err}", file=sys.stderr)
            return EXIT_IO
        for warning in result.warnings:
            print(f"warning: {warning}", file=sys.stderr)
        if args.wav:
            try:
                write_wav(result.buffer, args.wav)
            except OSError as err:
                print(f"vivace: {err}", file=sys.stderr)
                return EXIT_IO
        if args.automation:
            _write_text(args.automation, automation_to_jsonl(result.automation))
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.fft < 2 or args.fft & (args.fft - 1):
        print("vivace: error: --fft must be a power of two", file=sys.stderr)
        return EXIT_USAGE
    if args.hop <= 0:
        print("vivace: error: --hop must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        buffer = read_wav(args.wav)
    except (MissingSampleFile, UnsupportedInputFormat) as err:
        print(f"vivace: {err}", file=sys.stderr)
        return EXIT_IO
    try:
        frames = analyze(buffer, args.fft, args.hop)
    except BufferTooShort as err:
        print(f"vivace: {err}", file=sys.stderr)
        return EXIT_LANG
    sys.stdout.write(frames_to_jsonl(frames))
    return EXIT_OK


def cmd_serve(args) -> int:
    initial = _read_text(args.doc) if args.doc else ""
    server = SessionServer(initial)
    if args.static:
        server.static_dir = Path(args.static)
    else:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        if bundled.is_dir():
            server.static_dir = bundled
    try:
        asyncio.run(run_server(server, args.host, args.port))
    except KeyboardInterrupt:
        pass
    except OSError as err:
        print(f"vivace: {err}", file=sys.stderr)
        return EXIT_IO
    finally:
        if args.snapshot:
            _write_text(args.snapshot, json.dumps(server.snapshot()) + "\n")
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handler = {
        "check": cmd_check,
        "dump": cmd_dump,
        "render": cmd_render,
        "analyze": cmd_analyze,
        "serve": cmd_serve,
    }[args.command]
    try:
        return handler(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except VivaceError as err:
        print(f"vivace: {err}", file=sys.stderr)
        return EXIT_LANG


if __name__ == "__main__":
    sys.exit(main())
