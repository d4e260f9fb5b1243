"""Command-line entry point: train, encode, decode, repair, analyze, compare.

Exit codes: 0 success, 1 usage error, 2 data error. Output files are
written atomically (temp file + rename). All file IO is UTF-8 except
``repair --raw``, which reads arbitrary bytes. ``BBPEKIT_THREADS`` caps
internal parallelism (default: machine cores).
"""

from __future__ import annotations

import argparse
import json
import io
import os
import sys
import tempfile

from . import codec, metrics, plots, trainer
from .bytecore import repair_utf8
from .errors import BBPEKitError, InputError
from .vocab import (
    DEFAULT_SPECIALS,
    MERGE_MODES,
    MODES,
    PenaltyConfig,
    composition_report,
    load,
    save,
    serialize,
)

_PAPER_ALPHA = 0.99
_PAPER_CUTOFF = 3
_PAPER_BETA = 0.999


class _UsageError(Exception):
    """Flag combination errors detected after parsing; exit code 1."""


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class _InputAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        items = getattr(namespace, self.dest) or []
        items.append([values, False])
        setattr(namespace, self.dest, items)


class _PenalizeAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        items = getattr(namespace, "inputs", None)
        if not items:
            parser.error("--penalize must follow an --in PATH")
        items[-1][1] = True


def _threads() -> int:
    raw = os.environ.get("BBPEKIT_THREADS", "")
    if raw.strip():
        try:
            return max(1, int(raw))
        except ValueError:
            raise InputError(f"BBPEKIT_THREADS must be an integer, got {raw!r}")
    return os.cpu_count() or 1


def _write_atomic(path, data) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bbpekit-tmp-")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data.encode("utf-8") if isinstance(data, str) else data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _require_files(*paths):
    for path in paths:
        if path is not None and not os.path.isfile(path):
            raise InputError(f"input file not found: {path}")


def _read_lines(path):
    with open(path, "rb") as f:
        return f.read().splitlines()


def _read_text_lines(path):
    with open(path, "r", encoding="utf-8") as f:
        return f.read().splitlines()


# -- subcommands -------------------------------------------------------------


def _cmd_train(args) -> int:
    paths = [path for path, _ in args.inputs]
    if args.mode not in MERGE_MODES:
        offending = [
            flag
            for flag, value in (
                ("--alpha", args.alpha is not None),
                ("--n", args.n is not None),
                ("--beta", args.beta is not None),
                ("--no-penalties", args.no_penalties),
                ("--penalize", any(p for _, p in args.inputs)),
            )
            if value
        ]
        if offending:
            raise _UsageError(
                f"{' '.join(offending)} only valid with modes bpe/bbpe"
            )
    elif args.size is None:
        raise _UsageError(f"--size is required for mode {args.mode}")
    _require_files(*paths)
    threads = _threads()

    if args.mode in MERGE_MODES:
        if args.no_penalties:
            penalties = None
        else:
            penalties = PenaltyConfig(
                alpha=args.alpha if args.alpha is not None else _PAPER_ALPHA,
                cutoff_n=args.n if args.n is not None else _PAPER_CUTOFF,
                beta=args.beta if args.beta is not None else _PAPER_BETA,
            )
    else:
        penalties = None

    specials = tuple(args.specials.split(",")) if args.specials else DEFAULT_SPECIALS
    log_buffer = io.StringIO() if args.log else None

    tables = [
        trainer.ingest(_read_lines(path), args.mode, language_tag=path,
                       threads=threads)
        for path in paths
    ]
    any_tagged = any(penalize for _, penalize in args.inputs)
    groups = []
    for table, (_, penalize) in zip(tables, args.inputs):
        apply_here = penalties is not None and (penalize or not any_tagged)
        groups.append((table, penalties if apply_here else None))

    if args.size is not None:
        target = args.size
    else:
        base = trainer._base_symbols_for(args.mode, tables)
        target = len(specials) + len(base)

    if len(groups) == 1:
        table, config = groups[0]
        vocabulary = trainer.train(
            table, target, penalties=config, specials=specials, log=log_buffer
        )
    else:
        vocabulary = trainer.train_joint(
            groups, target, specials=specials, log=log_buffer
        )

    _write_atomic(args.out, serialize(vocabulary))
    if args.log:
        _write_atomic(args.log, log_buffer.getvalue())

    stats = composition_report(vocabulary)
    fractions = stats.fractions()
    print(
        f"vocabulary: mode={vocabulary.mode} size={vocabulary.size} "
        f"specials={vocabulary.n_specials} base={len(vocabulary.base_symbols)} "
        f"merges={len(vocabulary.merges)}"
    )
    for name, count in stats.counts().items():
        print(f"composition: {name} {count} ({100.0 * fractions[name]:.2f}%)")
    return 0


def _cmd_encode(args) -> int:
    _require_files(args.vocab, args.input)
    v = load(args.vocab)
    lines = (
        _read_text_lines(args.input)
        if args.input
        else sys.stdin.read().splitlines()
    )
    out_lines = []
    for line in lines:
        seq = codec.encode(line, v)
        if args.format == "hex-symbols":
            out_lines.append(
                " ".join(v.symbol_for_id(i).bytes.hex() for i in seq.ids)
            )
        else:
            out_lines.append(" ".join(str(i) for i in seq.ids))
    text = "\n".join(out_lines) + ("\n" if out_lines else "")
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_decode(args) -> int:
    _require_files(args.vocab, args.input)
    v = load(args.vocab)
    lines = (
        _read_text_lines(args.input)
        if args.input
        else sys.stdin.read().splitlines()
    )
    out_lines = []
    for lineno, line in enumerate(lines, 1):
        try:
            ids = [int(tok) for tok in line.split()]
        except ValueError:
            raise InputError(f"line {lineno}: ids must be integers: {line!r}")
        text, repair = codec.decode(codec.TokenSeq.from_ids(ids, v), v)
        out_lines.append(text)
        if args.repair_report:
            print(
                json.dumps(
                    {
                        "dropped_count": len(repair.dropped),
                        "dropped_indices": list(repair.dropped),
                    }
                ),
                file=sys.stderr,
            )
    text = "\n".join(out_lines) + ("\n" if out_lines else "")
    if args.out:
        _write_atomic(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_repair(args) -> int:
    if args.path:
        _require_files(args.path)
        with open(args.path, "rb") as f:
            data = f.read()
    else:
        data = sys.stdin.buffer.read()
    if not args.raw:
        try:
            data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InputError(f"input is not valid UTF-8 ({exc}); use --raw")
    result = repair_utf8(data)
    sys.stdout.write(result.text)
    if args.report:
        print(
            json.dumps(
                {
                    "dropped_count": len(result.dropped),
                    "dropped_indices": list(result.dropped),
                    "kept_bytes": result.kept_bytes,
                }
            ),
            file=sys.stderr,
        )
    return 0


def _flatten(report, prefix=""):
    rows = []
    for key, value in report.items():
        dotted = f"{prefix}{key}"
        if isinstance(value, dict):
            rows.extend(_flatten(value, f"{dotted}."))
        else:
            rows.append((dotted, value))
    return rows


def _cmd_analyze(args) -> int:
    _require_files(args.refs, args.hyps, args.vocab, args.vocab_b, args.langs)
    if not (args.refs or args.hyps or args.vocab):
        raise InputError("nothing to analyze: give --refs/--hyps and/or --vocab")

    report = {}
    lengths = None
    refs = _read_text_lines(args.refs) if args.refs else None
    hyps = _read_text_lines(args.hyps) if args.hyps else None
    v = load(args.vocab) if args.vocab else None
    v_b = load(args.vocab_b) if args.vocab_b else None

    if refs is not None and hyps is not None:
        if len(refs) != len(hyps):
            raise InputError(
                f"--refs has {len(refs)} lines but --hyps has {len(hyps)}"
            )
        d = s = i = rl = hl = 0
        for ref, hyp in zip(refs, hyps):
            stats = metrics.align(
                metrics._units(ref, args.unit), metrics._units(hyp, args.unit)
            )
            d += stats.deletions
            s += stats.substitutions
            i += stats.insertions
            rl += stats.ref_len
            hl += stats.hyp_len
        totals = metrics.AlignmentStats(d, s, i, rl, hl)
        report["alignment"] = {
            "unit": args.unit,
            "deletions": totals.deletions,
            "substitutions": totals.substitutions,
            "insertions": totals.insertions,
            "ref_len": totals.ref_len,
            "hyp_len": totals.hyp_len,
            "error_rate": totals.error_rate,
        }

        if args.langs:
            labels = _read_text_lines(args.langs)
            if len(labels) != len(hyps):
                raise InputError(
                    f"--langs has {len(labels)} lines but --hyps has {len(hyps)}"
                )
        else:
            labels = [metrics.classify_language(r) for r in refs]
        usable = [
            (h, lab)
            for h, lab in zip(hyps, labels)
            if lab in (metrics.ENGLISH, metrics.MANDARIN)
        ]
        if usable:
            report["confusion"] = metrics.confusion_report(
                [h for h, _ in usable], [lab for _, lab in usable]
            )

    if v is not None and hyps is not None:
        seqs = [codec.encode(h, v) for h in hyps]
        lengths = [codec.seq_length(t) for t in seqs]
        report["avg_length"] = metrics.avg_hyp_length(seqs)

    if v is not None:
        stats = composition_report(v)
        report["composition"] = {
            "counts": stats.counts(),
            "fractions": stats.fractions(),
        }
    if v is not None and v_b is not None:
        sharing = metrics.sharing_rate(v, v_b)
        report["sharing"] = {
            "total_symbols": sharing.total_symbols,
            "shared_symbols": sharing.shared_symbols,
            "rate": sharing.rate,
        }

    payload = json.dumps(report, indent=2, ensure_ascii=False) + "\n"
    if args.out:
        _write_atomic(args.out, payload)
    else:
        sys.stdout.write(payload)
    if args.tsv:
        rows = _flatten(report)
        _write_atomic(
            args.tsv, "".join(f"{key}\t{value}\n" for key, value in rows)
        )
    if args.figures:
        written = plots.render_report(report, args.figures, lengths=lengths)
        for path in written:
            print(f"figure: {path}", file=sys.stderr)
    return 0


def _cmd_compare(args) -> int:
    _require_files(args.vocab_a, args.vocab_b)
    sharing = metrics.sharing_rate(load(args.vocab_a), load(args.vocab_b))
    print(
        json.dumps(
            {
                "total_symbols": sharing.total_symbols,
                "shared_symbols": sharing.shared_symbols,
                "rate": sharing.rate,
            }
        )
    )
    return 0


# -- wiring ------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="bbpekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a vocabulary from corpus files")
    p.add_argument("--mode", choices=MODES, default="bbpe")
    p.add_argument(
        "--in", dest="inputs", metavar="PATH", action=_InputAction,
        required=True, help="corpus file (one utterance per line); repeatable",
    )
    p.add_argument(
        "--penalize", nargs=0, action=_PenalizeAction,
        help="apply penalties to the preceding --in only",
    )
    p.add_argument("--out", required=True, help="vocabulary file to write")
    p.add_argument("--size", type=int, help="target vocabulary size")
    p.add_argument("--alpha", type=float, help=f"length penalty factor (default {_PAPER_ALPHA})")
    p.add_argument("--n", type=int, help=f"length penalty cutoff in bytes (default {_PAPER_CUTOFF})")
    p.add_argument("--beta", type=float, help=f"alphabet penalty factor (default {_PAPER_BETA})")
    p.add_argument("--no-penalties", action="store_true", help="disable both penalties")
    p.add_argument("--specials", help="comma-separated special token names")
    p.add_argument("--log", help="write a per-merge audit log to this path")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("encode", help="text lines to symbol-id lines")
    p.add_argument("--vocab", required=True)
    p.add_argument("--in", dest="input", metavar="PATH", default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("ids", "hex-symbols"), default="ids")
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="symbol-id lines to text lines")
    p.add_argument("--vocab", required=True)
    p.add_argument("--in", dest="input", metavar="PATH", default=None)
    p.add_argument("--out", default=None)
    p.add_argument(
        "--repair-report", action="store_true",
        help="emit per-line drop JSON on standard error",
    )
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("repair", help="recover valid UTF-8 from bytes")
    p.add_argument("path", nargs="?", help="input file (default: stdin)")
    p.add_argument("--raw", action="store_true", help="accept arbitrary bytes")
    p.add_argument(
        "--report", action="store_true",
        help="emit dropped-index JSON on standard error",
    )
    p.set_defaults(func=_cmd_repair)

    p = sub.add_parser("analyze", help="error/sharing/length/composition report")
    p.add_argument("--refs", help="reference utterances, one per line")
    p.add_argument("--hyps", help="hypothesis utterances, one per line")
    p.add_argument("--unit", choices=("word", "char"), default="word")
    p.add_argument("--vocab", help="vocabulary for composition/lengths")
    p.add_argument("--vocab-b", help="second vocabulary enabling the sharing section")
    p.add_argument("--langs", help="true language labels, one per line")
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.add_argument("--tsv", help="also write a flat TSV report to this path")
    p.add_argument("--figures", help="also render figures into this directory")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("compare", help="symbol sharing between two vocabularies")
    p.add_argument("--vocab-a", required=True)
    p.add_argument("--vocab-b", required=True)
    p.set_defaults(func=_cmd_compare)

    return parser


def run(argv=None) -> int:
    """Parse arguments, dispatch, and map failures to exit codes."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"bbpekit: error: {exc}", file=sys.stderr)
        return 1
    except BBPEKitError as exc:
        print(f"bbpekit: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bbpekit: error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
