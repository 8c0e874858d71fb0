"""Command-line entry point: the pipeline as reproducible subcommands.

Subcommands: ``tokenize``, ``entropy``, ``sample``, ``baseline``, ``syntax``,
``correlate``.  Every randomized command takes explicit seeds (there is no
wall-clock default), every output file gains a ``.manifest.json`` sidecar
recording the command, arguments, input digests, seeds and normalizer
fingerprint, and primary outputs carry no timestamps, so re-running a
manifest reproduces them byte for byte.  Numeric output uses shortest
round-trip formatting; rounding is for documentation only.

Exit codes: 0 success, 2 configuration/usage errors, 3 input data errors,
4 internal errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .analysis import (
    block_split,
    build_block_profiles,
    clsd_report,
    significance_against_baseline,
    write_baseline_csv,
    write_clsd_csv,
    write_significance_csv,
)
from .corpus import (
    read_counts_tsv,
    stream_documents,
    write_counts_tsv,
    write_sample_manifest,
)
from .entropy import CategoryCounts, renyi_entropy
from .errors import ConfigurationError, InputDataError
from .normalize import NormalizerConfig, normalize, parse_kv
from .sampler import SampleResult, SamplerConfig, heuristic_sample, random_sample
from .syntax import parse_conllu, syntactic_counts

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_INTERNAL = 4

# The reporting sweep stops at 5; the library itself accepts any finite order.
MAX_CLI_ALPHA = 5.0

logger = logging.getLogger(__name__)


def _parse_alpha_list(text: str) -> list[float]:
    """Comma list ("0,1,2") or range ("start:stop:step") of Rényi orders."""
    try:
        if ":" in text:
            start_s, stop_s, step_s = text.split(":")
            start, stop, step = float(start_s), float(stop_s), float(step_s)
            if step <= 0:
                raise ValueError("step must be positive")
            count = int((stop - start) / step + 1e-9) + 1
            values = [round(start + i * step, 10) for i in range(count)]
        else:
            values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"bad alpha list {text!r}: {exc}") from exc
    if not values:
        raise ConfigurationError("alpha list is empty")
    for alpha in values:
        if not 0 <= alpha <= MAX_CLI_ALPHA:
            raise ConfigurationError(
                f"alpha {alpha} outside the supported sweep [0, {MAX_CLI_ALPHA}]"
            )
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ConfigurationError("alpha list must be strictly increasing")
    return values


def _parse_seed_list(text: str) -> list[int]:
    """Comma list ("1,2,3") or inclusive range ("1..20")."""
    try:
        if ".." in text:
            lo_s, hi_s = text.split("..")
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ValueError("range is reversed")
            return list(range(lo, hi + 1))
        seeds = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"bad seed list {text!r}: {exc}") from exc
    if not seeds:
        raise ConfigurationError("seed list is empty")
    return seeds


def _parse_exhaustivity(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"bad exhaustivity schedule {text!r}: {exc}") from exc


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _load_normalizer(args: argparse.Namespace) -> NormalizerConfig:
    if getattr(args, "normalizer_config", None):
        return NormalizerConfig.load(args.normalizer_config)
    return NormalizerConfig()


def _write_run_manifest(
    output: Path,
    args: argparse.Namespace,
    inputs: dict[str, Path],
    seeds: Sequence[int] = (),
    normalizer: NormalizerConfig | None = None,
) -> None:
    record = {
        "command": args.command,
        "argv": args.original_argv,
        "tool": "divkit",
        "version": __version__,
        "seeds": list(seeds),
        "normalizer_fingerprint": normalizer.fingerprint() if normalizer else None,
        "inputs": {
            name: {"path": str(path), "sha256": _sha256_file(path)}
            for name, path in inputs.items()
        },
    }
    manifest_path = Path(str(output) + ".manifest.json")
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_trajectory_csv(path: Path, result: SampleResult) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("commit_index,doc_id,tokens_total,entropy\n")
        for i, point in enumerate(result.trajectory):
            fh.write(f"{i},{point.doc_id},{point.tokens_total},{point.entropy!r}\n")


def _load_initial(args: argparse.Namespace) -> CategoryCounts:
    if getattr(args, "initial", None):
        return read_counts_tsv(args.initial)
    return CategoryCounts()


# --- subcommands ----------------------------------------------------------------


def cmd_tokenize(args: argparse.Namespace) -> int:
    normalizer = _load_normalizer(args)
    counts = CategoryCounts()
    reader = stream_documents(args.corpus, strict=args.strict)
    for doc in reader:
        for token in normalize(doc.text, normalizer):
            counts.add(token)
    write_counts_tsv(counts, args.out)
    _write_run_manifest(Path(args.out), args, {"corpus": Path(args.corpus)}, normalizer=normalizer)
    if reader.skipped:
        logger.warning("skipped %d malformed records", reader.skipped)
    return EXIT_OK


def cmd_entropy(args: argparse.Namespace) -> int:
    counts = read_counts_tsv(args.counts)
    if counts.total == 0:
        raise InputDataError(f"count table {args.counts} is empty; entropy is undefined")
    alphas = _parse_alpha_list(args.alphas)
    lines = ["alpha,entropy\n"]
    lines += [f"{alpha!r},{renyi_entropy(counts, alpha)!r}\n" for alpha in alphas]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.writelines(lines)
        _write_run_manifest(Path(args.out), args, {"counts": Path(args.counts)})
    else:
        sys.stdout.write("".join(lines))
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    normalizer = _load_normalizer(args)
    initial = _load_initial(args)
    config = SamplerConfig(
        target_tokens=args.target_tokens,
        exhaustivity=_parse_exhaustivity(args.exhaustivity),
        alpha=args.alpha,
        seed=args.seed,
    )
    candidates = stream_documents(args.candidates, strict=args.strict)
    result = heuristic_sample(initial, candidates, config, normalizer, threads=args.threads)
    write_sample_manifest(
        args.out_manifest, result.selected, args.seed, normalizer.fingerprint(),
        result.final_entropy,
    )
    _write_trajectory_csv(Path(args.out_trajectory), result)
    inputs = {"candidates": Path(args.candidates)}
    if args.initial:
        inputs["initial"] = Path(args.initial)
    seeds = [args.seed] if args.seed is not None else []
    for out in (args.out_manifest, args.out_trajectory):
        _write_run_manifest(Path(out), args, inputs, seeds=seeds, normalizer=normalizer)
    if not result.reached_target:
        logger.warning(
            "candidate pool exhausted at %d tokens before the %d-token target",
            result.trajectory[-1].tokens_total if result.trajectory else initial.total,
            args.target_tokens,
        )
    return EXIT_OK


def cmd_baseline(args: argparse.Namespace) -> int:
    normalizer = _load_normalizer(args)
    initial = _load_initial(args)
    seeds = _parse_seed_list(args.seeds)
    if len(seeds) != len(set(seeds)):
        raise ConfigurationError("seed list contains duplicates")
    documents = list(stream_documents(args.candidates, strict=args.strict))
    entropies = []
    for seed in seeds:
        run = random_sample(
            initial, documents, args.target_tokens, seed, normalizer, alpha=args.alpha
        )
        entropies.append(run.final_entropy)
    baseline, normality, _ = significance_against_baseline(
        entropies[0], entropies
    )
    write_baseline_csv(args.out, seeds, entropies, baseline, normality)
    inputs = {"candidates": Path(args.candidates)}
    if args.initial:
        inputs["initial"] = Path(args.initial)
    _write_run_manifest(Path(args.out), args, inputs, seeds=seeds, normalizer=normalizer)
    if args.value is not None:
        if not args.out_significance:
            raise ConfigurationError("--value requires --out-significance")
        _, _, distance = significance_against_baseline(args.value, entropies)
        write_significance_csv(args.out_significance, args.value, distance)
        _write_run_manifest(
            Path(args.out_significance), args, inputs, seeds=seeds, normalizer=normalizer
        )
    return EXIT_OK


def cmd_syntax(args: argparse.Namespace) -> int:
    sentences = parse_conllu(args.treebank, pos_column=args.pos_column, strict=args.strict)
    counts = syntactic_counts(sentences)
    write_counts_tsv(counts, args.out)
    _write_run_manifest(Path(args.out), args, {"treebank": Path(args.treebank)})
    return EXIT_OK


def cmd_correlate(args: argparse.Namespace) -> int:
    sentences = parse_conllu(args.treebank, pos_column=args.pos_column, strict=args.strict)
    blocks = block_split(sentences, args.block_size)
    profiles = build_block_profiles(
        blocks,
        _parse_alpha_list(args.alphas),
        include_partial=args.include_partial,
        threads=args.threads,
    )
    rows = clsd_report(profiles)
    write_clsd_csv(args.out, rows)
    _write_run_manifest(Path(args.out), args, {"treebank": Path(args.treebank)})
    return EXIT_OK


# --- parser construction ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divkit",
        description="Measure corpus diversity with Rényi entropies and sample for it.",
    )
    parser.add_argument("--version", action="version", version=f"divkit {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    parser.divkit_subparsers = {}  # type: ignore[attr-defined]

    def sub(name: str, **kwargs) -> argparse.ArgumentParser:
        sp = subparsers.add_parser(name, **kwargs)
        parser.divkit_subparsers[name] = sp  # type: ignore[attr-defined]
        return sp

    def add_common(p: argparse.ArgumentParser, threads: bool = False) -> None:
        p.add_argument("--config", help="flat key=value defaults file; flags win")
        p.add_argument("--strict", action="store_true", help="abort on malformed input lines")
        if threads:
            p.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")

    p = sub("tokenize", help="normalize a JSONL corpus into a token count table")
    p.add_argument("--corpus", required=True, help="line-delimited JSON documents")
    p.add_argument("--out", required=True, help="output count TSV")
    p.add_argument("--normalizer-config", help="serialized normalizer config file")
    add_common(p)
    p.set_defaults(func=cmd_tokenize)

    p = sub("entropy", help="Rényi entropy profile of a count table")
    p.add_argument("--counts", required=True, help="count TSV")
    p.add_argument("--alphas", default="0,1,2", help='orders: "0,1,2" or "0:5:0.1"')
    p.add_argument("--out", help="output CSV (default: stdout)")
    add_common(p)
    p.set_defaults(func=cmd_entropy)

    p = sub("sample", help="greedy diversity-maximizing selection")
    p.add_argument("--initial", help="count TSV of the base corpus (default: empty)")
    p.add_argument("--candidates", required=True, help="JSONL candidate documents")
    p.add_argument("--target-tokens", type=int, required=True)
    p.add_argument("--exhaustivity", default="1000,100,10,1", help="decreasing e schedule")
    p.add_argument("--alpha", type=float, default=1.0, help="entropy order used for gains")
    p.add_argument("--seed", type=int, help="shuffle candidate order (optional)")
    p.add_argument("--out-manifest", required=True, help="selected ids + metadata")
    p.add_argument("--out-trajectory", required=True, help="per-commit CSV")
    p.add_argument("--normalizer-config")
    add_common(p, threads=True)
    p.set_defaults(func=cmd_sample)

    p = sub("baseline", help="seeded random selections and their statistics")
    p.add_argument("--initial", help="count TSV of the base corpus (default: empty)")
    p.add_argument("--candidates", required=True)
    p.add_argument("--target-tokens", type=int, required=True)
    p.add_argument("--seeds", required=True, help='explicit seeds: "1,2,3" or "1..20"')
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--out", required=True, help="baseline CSV")
    p.add_argument("--value", type=float, help="entropy to place on the baseline")
    p.add_argument("--out-significance", help="significance CSV for --value")
    p.add_argument("--normalizer-config")
    add_common(p)
    p.set_defaults(func=cmd_baseline)

    p = sub("syntax", help="complete-subtree count table from CoNLL-U")
    p.add_argument("--treebank", required=True, help="CoNLL-U file")
    p.add_argument("--out", required=True, help="output count TSV")
    p.add_argument("--pos-column", choices=("xpos", "upos"), default="xpos")
    add_common(p)
    p.set_defaults(func=cmd_syntax)

    p = sub("correlate", help="per-alpha lexical vs syntactic correlations")
    p.add_argument("--treebank", required=True, help="CoNLL-U file")
    p.add_argument("--block-size", type=int, required=True)
    p.add_argument("--alphas", default="0:5:0.1")
    p.add_argument("--pos-column", choices=("xpos", "upos"), default="xpos")
    p.add_argument("--include-partial", action="store_true", help="keep the short final block")
    p.add_argument("--out", required=True, help="CLSD CSV")
    add_common(p, threads=True)
    p.set_defaults(func=cmd_correlate)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    """Pre-scan for --config and install its keys as subcommand defaults.

    Defaults go onto the chosen subparser so argparse applies the usual
    string-to-type conversion; command-line flags still win.  Keys that do
    not match a flag of the subcommand are ignored with a warning, which
    lets one config file serve several subcommands.
    """
    if "--config" not in argv:
        return
    index = argv.index("--config")
    if index + 1 >= len(argv):
        raise ConfigurationError("--config requires a path")
    path = argv[index + 1]
    command = next((tok for tok in argv if not tok.startswith("-")), None)
    sub = parser.divkit_subparsers.get(command)  # type: ignore[attr-defined]
    if sub is None:
        return
    try:
        with open(path, "r", encoding="utf-8") as fh:
            kv = parse_kv(fh.read())
    except OSError as exc:
        raise InputDataError(f"cannot read config file {path}: {exc}") from exc
    actions = {action.dest: action for action in sub._actions}
    defaults: dict[str, object] = {}
    for key, value in kv.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None:
            logger.warning("config key %r does not apply to %r; ignored", key, command)
            continue
        if isinstance(action.default, bool):
            if value not in ("true", "false", "on", "off"):
                raise ConfigurationError(f"config key {key!r} must be true/false, got {value!r}")
            defaults[dest] = value in ("true", "on")
        else:
            defaults[dest] = value
    sub.set_defaults(**defaults)


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="divkit: %(levelname)s: %(message)s")
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        args.original_argv = argv
        return args.func(args)
    except SystemExit as exc:  # argparse --help or usage errors
        return int(exc.code or 0)
    except ConfigurationError as exc:
        print(f"divkit: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputDataError, FileNotFoundError) as exc:
        print(f"divkit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"divkit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"divkit: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
