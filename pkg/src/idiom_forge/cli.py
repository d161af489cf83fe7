"""``idiom-forge`` command-line entry point.

Subcommands: prepare-data, translate, compute-rewards, export-grpo, export-sft,
evaluate and report.  Every run writes a manifest next to its output
(``<out>.manifest.txt``, or ``manifest.txt`` inside a report directory).

Settings come from an optional INI file (``--config``; ``[run]`` section plus
backend sections) and are overridden by command-line flags.
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import corpus as corpus_mod
from .backends import load_backends
from .backends.base import DEFAULT_TEMPERATURE
from .evalsuite import TranslationRecord, evaluate_with_rows, load_report, save_report
from .grpo import (
    DEFAULT_EPOCHS,
    DEFAULT_GROUP_SIZE,
    build_training_batch,
    export_batch,
    export_sft_dataset,
    translation_prompt,
)
from .jsonl import RecordFormatError, iter_records, write_records
from .manifest import RunManifest
from .promptcraft import run_batch, save_traces
from .report import render_report
from .rewards import RewardInputs, VARIANT_ALIASES, compute_rewards, save_rewards

log = logging.getLogger("idiom_forge")

DEFAULT_TRAIN_COUNT = {"petci": 1000, "hindi": 800}
OPUS_SAMPLE = 400


class CLIError(Exception):
    pass


# --------------------------------------------------------------------------- settings


def _read_run_settings(path) -> tuple[dict[str, str], str]:
    if path is None:
        return {}, hashlib.sha256(b"").hexdigest()
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such config file: {path}")
    raw = path.read_bytes()
    parser = configparser.ConfigParser()
    parser.read_string(raw.decode("utf-8"))
    settings = dict(parser["run"]) if parser.has_section("run") else {}
    return settings, hashlib.sha256(raw).hexdigest()


def _setting(args, name: str, settings: dict, default, cast=str):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in settings:
        return cast(settings[name])
    return default


def _backends(args, settings):
    choice = _setting(args, "backends", settings, "stub")
    return load_backends(choice, args.config)


def _check_inputs(*paths) -> None:
    for p in paths:
        if p is not None and not Path(p).exists():
            raise FileNotFoundError(f"no such file: {p}")


def _manifest(args, settings_digest: str, seed: int, inputs=(), backends=None) -> RunManifest:
    m = RunManifest(command=args.command, config_digest=settings_digest, seed=seed,
                    argv=list(args.argv))
    for p in inputs:
        m.add_input(p)
    if backends is not None:
        m.backends_digest = backends.digest()
    return m


def _manifest_path(out) -> Path:
    out = Path(out)
    return out / "manifest.txt" if out.is_dir() else out.with_name(out.name + ".manifest.txt")


# --------------------------------------------------------------------------- helpers


def load_predictions(path) -> dict[str, tuple[str, str | None]]:
    """Map pair id -> (prediction, method tag) from a trace or predictions file.

    Records need ``pair_id`` and one of ``prediction``, ``mt`` or
    ``final_translation``.
    """
    out: dict[str, tuple[str, str | None]] = {}
    for lineno, rec in iter_records(path):
        pid = rec.get("pair_id") or rec.get("sample_id")
        text = rec.get("prediction") or rec.get("mt") or rec.get("final_translation")
        if not pid or not text:
            raise RecordFormatError(path, lineno, "need pair_id and prediction/mt/final_translation")
        if pid in out:
            raise RecordFormatError(path, lineno, f"duplicate prediction for {pid}")
        out[pid] = (text, rec.get("method_tag"))
    return out


def _select(split: corpus_mod.CorpusSplit, which: str):
    return {"train": split.train, "test": split.test, "all": split.pairs}[which]


# --------------------------------------------------------------------------- commands


def cmd_prepare_data(args, settings, digest) -> Path:
    _check_inputs(args.inp)
    seed = _setting(args, "seed", settings, 0, int)
    rows = corpus_mod.read_raw_rows(args.inp, skip_header=args.skip_header)
    if args.source == "petci":
        pairs = corpus_mod.clean_petci(rows)
    elif args.source == "hindi":
        pairs = corpus_mod.clean_hindi(rows)
    else:
        pairs = corpus_mod.clean_parallel(rows, args.language)
    provenance = f"{args.source}:{Path(args.inp).name}; {len(rows)} raw rows -> {len(pairs)} clean"
    glossed = sum(1 for p in pairs if p.literal_gloss)
    if glossed:
        provenance += f"; literal glosses from input column 3 ({glossed}/{len(pairs)})"
    if args.source == "opus":
        n = args.sample or OPUS_SAMPLE
        sampled = corpus_mod.sample_subset(pairs, n, seed)
        split = corpus_mod.CorpusSplit((), [replace(p, split="test") for p in sampled], seed,
                                       provenance + f"; sampled {n} for evaluation")
    else:
        train_count = args.train_count or DEFAULT_TRAIN_COUNT[args.source]
        split = corpus_mod.split_corpus(pairs, train_count, seed, provenance)
    corpus_mod.save_corpus(split, args.out)
    _manifest(args, digest, seed, [args.inp]).write(_manifest_path(args.out))
    print(f"{args.out}: {len(split.train)} train / {len(split.test)} test", file=sys.stderr)
    return Path(args.out)


def cmd_translate(args, settings, digest) -> Path:
    _check_inputs(args.corpus)
    seed = _setting(args, "seed", settings, 0, int)
    temperature = _setting(args, "temperature", settings, DEFAULT_TEMPERATURE, float)
    backends = _backends(args, settings)
    split = corpus_mod.load_corpus(args.corpus)
    pairs = _select(split, args.split)
    if args.method == "training-free":
        save_traces(run_batch(pairs, backends.generator, temperature=temperature), args.out)
    else:
        recs = []
        for p in pairs:
            text = backends.generator.generate(translation_prompt(p), temperature=temperature,
                                               max_tokens=64, prompt_id=p.id).strip()
            if not text:
                raise CLIError(f"empty translation for {p.id}")
            recs.append({"pair_id": p.id, "prediction": text, "method_tag": "direct"})
        write_records(args.out, recs)
    _manifest(args, digest, seed, [args.corpus], backends).write(_manifest_path(args.out))
    return Path(args.out)


def cmd_compute_rewards(args, settings, digest) -> Path:
    _check_inputs(args.inp, args.mt)
    backends = _backends(args, settings)
    split = corpus_mod.load_corpus(args.inp)
    by_id = split.by_id()
    samples = []
    for pid, (mt, _) in load_predictions(args.mt).items():
        if pid not in by_id:
            raise CLIError(f"prediction for unknown pair id {pid!r}")
        p = by_id[pid]
        samples.append(RewardInputs(pid, p.source_text, mt, literal=p.literal_gloss,
                                    ref=p.reference_translation))
    rewards = compute_rewards(samples, args.variant, ref_free=backends.ref_free,
                              ref_based=backends.ref_based)
    save_rewards(rewards, args.out)
    seed = _setting(args, "seed", settings, 0, int)
    _manifest(args, digest, seed, [args.inp, args.mt], backends).write(_manifest_path(args.out))
    return Path(args.out)


def cmd_export_grpo(args, settings, digest) -> Path:
    _check_inputs(args.corpus)
    backends = _backends(args, settings)
    g = _setting(args, "group_size", settings, DEFAULT_GROUP_SIZE, int)
    epochs = _setting(args, "epochs", settings, DEFAULT_EPOCHS, int)
    temperature = _setting(args, "temperature", settings, DEFAULT_TEMPERATURE, float)
    split = corpus_mod.load_corpus(args.corpus)
    batch = build_training_batch(split, args.variant, g, backends.generator,
                                 ref_free=backends.ref_free, ref_based=backends.ref_based,
                                 epoch_plan=epochs, temperature=temperature)
    export_batch(batch, args.out)
    seed = _setting(args, "seed", settings, 0, int)
    _manifest(args, digest, seed, [args.corpus], backends).write(_manifest_path(args.out))
    return Path(args.out)


def cmd_export_sft(args, settings, digest) -> Path:
    _check_inputs(args.corpus)
    export_sft_dataset(corpus_mod.load_corpus(args.corpus), args.out)
    seed = _setting(args, "seed", settings, 0, int)
    _manifest(args, digest, seed, [args.corpus]).write(_manifest_path(args.out))
    return Path(args.out)


def cmd_evaluate(args, settings, digest) -> Path:
    _check_inputs(args.corpus, args.predictions)
    backends = _backends(args, settings)
    split = corpus_mod.load_corpus(args.corpus)
    by_id = split.by_id()
    records = []
    for pid, (pred, tag) in load_predictions(args.predictions).items():
        if pid not in by_id:
            raise CLIError(f"prediction for unknown pair id {pid!r}")
        p = by_id[pid]
        records.append(TranslationRecord(pid, p.source_text, pred, p.reference_translation,
                                         args.method_tag or tag or "unknown"))
    corpus_tag = args.corpus_tag or Path(args.corpus).stem
    report, rows = evaluate_with_rows(records, backends, corpus_tag)
    save_report(report, rows, args.out)
    seed = _setting(args, "seed", settings, 0, int)
    _manifest(args, digest, seed, [args.corpus, args.predictions], backends).write(_manifest_path(args.out))
    print(f"{report.method_tag} on {report.corpus_tag}: p = {report.composite:.3f} (n={report.n})",
          file=sys.stderr)
    return Path(args.out)


def cmd_report(args, settings, digest) -> Path:
    _check_inputs(*args.reports)
    reports = [load_report(p) for p in args.reports]
    render_report(reports, args.out, baseline=args.baseline)
    seed = _setting(args, "seed", settings, 0, int)
    _manifest(args, digest, seed, args.reports).write(Path(args.out) / "manifest.txt")
    return Path(args.out)


COMMANDS = {
    "prepare-data": cmd_prepare_data,
    "translate": cmd_translate,
    "compute-rewards": cmd_compute_rewards,
    "export-grpo": cmd_export_grpo,
    "export-sft": cmd_export_sft,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="INI settings and backend config")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--backends", default=None,
                        help="'stub', 'live' (uses --config) or a backend config path")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="idiom-forge", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    variants = sorted(VARIANT_ALIASES)

    p = sub.add_parser("prepare-data", parents=[common], help="clean and split a raw corpus")
    p.add_argument("--source", choices=["petci", "hindi", "opus"], required=True)
    p.add_argument("--in", dest="inp", required=True, help=".tsv, .csv or .jsonl rows")
    p.add_argument("--out", required=True)
    p.add_argument("--train-count", type=int, default=None)
    p.add_argument("--sample", type=int, default=None, help="opus only: evaluation sample size")
    p.add_argument("--language", default="zh", help="opus only: source language tag")
    p.add_argument("--skip-header", action="store_true")

    p = sub.add_parser("translate", parents=[common], help="translate a corpus split")
    p.add_argument("--method", choices=["training-free", "direct"], default="training-free")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", choices=["train", "test", "all"], default="test")
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compute-rewards", parents=[common], help="score translations with a reward variant")
    p.add_argument("--variant", choices=variants, required=True)
    p.add_argument("--in", dest="inp", required=True, help="corpus file")
    p.add_argument("--mt", required=True, help="predictions or traces file")
    p.add_argument("--out", required=True)

    p = sub.add_parser("export-grpo", parents=[common], help="sample groups and export a GRPO batch")
    p.add_argument("--variant", choices=variants, required=True)
    p.add_argument("--group-size", dest="group_size", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export-sft", parents=[common], help="export the SFT baseline dataset")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="compute the five metrics and composite")
    p.add_argument("--corpus", required=True)
    p.add_argument("--predictions", required=True)
    p.add_argument("--corpus-tag", default=None)
    p.add_argument("--method-tag", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", parents=[common], help="render markdown tables and charts")
    p.add_argument("--reports", nargs="+", required=True)
    p.add_argument("--baseline", default=None, help="method tag deltas are taken against")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        settings, digest = _read_run_settings(args.config)
        COMMANDS[args.command](args, settings, digest)
    except (CLIError, FileNotFoundError, RecordFormatError, ValueError, RuntimeError) as exc:
        print(f"idiom-forge {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
