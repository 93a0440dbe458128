"""Command-line interface: one subcommand per pipeline stage.

Exit codes: 0 success, 1 usage error, 2 data or format error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .dataset import (DEFAULT_VARIANCE_THRESHOLD, dedupe, profile_documents, read_corpus,
                      read_csv, variance_filter, write_csv, build_pairs)
from .english import english_profile, format_profile
from .errors import ParseError, StyloError
from .evaluation import ConfusionMatrix, evaluate, format_report, report, split
from .forest import (ForestParams, classify, feature_importance, load_model, predict,
                     save_model, train_forest)
from .pairwise import compare_profiles, make_profile
from .romanized import en_si_ratio, language_counts, load_lexicon
from .synth import gen_corpus, write_corpus
from .text import Chunk, LanguageMode, chunk, clean, tokenize

log = logging.getLogger("stylopair")

# Defaults for every configurable knob. Keys double as --config file keys.
DEFAULTS: Dict[str, object] = {
    "mode": "english",
    "lexicon": None,
    "en_lexicon": None,
    "chunk_words": None,
    "trees": 200,
    "max_depth": 12,
    "min_samples_leaf": 2,
    "mtry": None,
    "threshold": 0.5,
    "variance_threshold": DEFAULT_VARIANCE_THRESHOLD,
    "seed": 0,
    "jobs": 1,
}

_CONVERTERS = {
    "mode": lambda v: LanguageMode.parse(v).value,
    "lexicon": str,
    "en_lexicon": str,
    "chunk_words": int,
    "trees": int,
    "max_depth": int,
    "min_samples_leaf": int,
    "mtry": int,
    "threshold": float,
    "variance_threshold": float,
    "seed": int,
    "jobs": int,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def read_config(path) -> Dict[str, object]:
    """Parse a ``key=value`` file; ``#`` starts a comment."""
    out: Dict[str, object] = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}: expected key=value", line_no)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _CONVERTERS:
            raise ParseError(f"{path}: unknown key {key!r}", line_no)
        try:
            out[key] = _CONVERTERS[key](value)
        except ValueError as exc:
            raise ParseError(f"{path}: bad value for {key!r}: {exc}", line_no) from None
    return out


def resolve(args) -> Dict[str, object]:
    """Merge defaults, the --config file and explicit flags (flags win)."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        cfg.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    cfg["mode"] = LanguageMode.parse(cfg["mode"])
    return cfg


def _lexicon(cfg):
    return load_lexicon(cfg["lexicon"], cfg["en_lexicon"])


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _read(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _forest_params(cfg) -> ForestParams:
    return ForestParams(n_trees=cfg["trees"], max_depth=cfg["max_depth"],
                        min_samples_leaf=cfg["min_samples_leaf"], mtry=cfg["mtry"], seed=cfg["seed"])


# --- subcommands ---------------------------------------------------------

def cmd_clean(args, cfg):
    _emit(clean(_read(args.input)) + "\n", args.out)


def cmd_profile(args, cfg):
    text = clean(_read(args.input))
    if cfg["mode"] is LanguageMode.ENGLISH:
        _emit(format_profile(english_profile(text)), args.out)
        return
    lexicon = _lexicon(cfg)
    tokens = tokenize(text)
    chunks = chunk(tokens, cfg["chunk_words"]) if cfg["chunk_words"] else [Chunk(tuple(tokens))]
    lines = []
    for k, c in enumerate(chunks):
        counts = language_counts(c, lexicon)
        parts = [f"chunk={k}", f"words={c.word_count}"]
        parts += [f"{lang.value}={n}" for lang, n in counts.items()]
        parts.append(f"en_si_ratio={en_si_ratio(c, lexicon)!r}")
        lines.append(" ".join(parts))
    _emit("\n".join(lines) + "\n", args.out)


def _pair_record(cfg, path_a, path_b):
    mode = cfg["mode"]
    p_a = make_profile(clean(_read(path_a)), mode)
    p_b = make_profile(clean(_read(path_b)), mode)
    lexicon = _lexicon(cfg) if mode is LanguageMode.ROMANIZED_SINHALA else None
    return compare_profiles(p_a, p_b, lexicon)


def cmd_compare(args, cfg):
    record = _pair_record(cfg, args.a, args.b)
    _emit("".join(f"{n}={v!r}\n" for n, v in record.as_dict().items()), args.out)


def cmd_build_dataset(args, cfg):
    mode = cfg["mode"]
    docs = read_corpus(args.corpus, mode)
    profiles = profile_documents(docs, chunk_words=cfg["chunk_words"])
    lexicon = _lexicon(cfg) if mode is LanguageMode.ROMANIZED_SINHALA else None
    ds = build_pairs(profiles, args.same, args.diff, cfg["seed"], lexicon, n_jobs=cfg["jobs"])
    ds = dedupe(ds)
    if not args.no_filter:
        ds, var_report = variance_filter(ds, cfg["variance_threshold"])
        sys.stdout.write(var_report.format())
    write_csv(ds, args.out)
    sys.stdout.write(f"rows={len(ds)} features={len(ds.feature_names)} out={args.out}\n")


def cmd_train(args, cfg):
    ds = read_csv(args.data)
    if args.test_out:
        ds, test = split(ds, args.train_fraction, cfg["seed"])
        write_csv(test, args.test_out)
    forest = train_forest(ds, _forest_params(cfg), n_jobs=cfg["jobs"])
    save_model(forest, args.out)
    oob = "nan" if forest.oob_error is None else f"{forest.oob_error:.4f}"
    sys.stdout.write(f"trees={len(forest.trees)} rows={len(ds)} oob_error={oob} out={args.out}\n")
    for name, value in feature_importance(forest).items():
        sys.stdout.write(f"importance {name}={value:.4f}\n")


def cmd_evaluate(args, cfg):
    forest = load_model(args.model)
    cm, rep, _ = evaluate(forest, read_csv(args.data), cfg["threshold"])
    (a, b), (c, d) = cm.counts
    text = f"confusion [[{a}, {b}], [{c}, {d}]]\n\n" + format_report(rep)
    _emit(text, args.out)


def cmd_verify(args, cfg):
    forest = load_model(args.model)
    record = _pair_record(cfg, args.a, args.b).project(forest.feature_names)
    score = predict(forest, record)
    label = classify(score, cfg["threshold"])
    _emit(f"score={score:.4f} label={label} threshold={cfg['threshold']}\n", args.out)


def cmd_synth(args, cfg):
    rs = cfg["mode"] is LanguageMode.ROMANIZED_SINHALA
    words = args.words if args.words is not None else (80 if rs else 250)
    corpus = gen_corpus(args.authors, args.docs, args.spread, cfg["seed"], words, rs)
    write_corpus(corpus, args.out)
    sys.stdout.write(f"authors={args.authors} docs={args.docs * args.authors} out={args.out}\n")


def cmd_report(args, cfg):
    try:
        a, b, c, d = (int(x) for x in args.matrix.replace(" ", "").split(","))
    except ValueError:
        raise UsageError("--matrix expects four comma-separated integers: tn,fp,fn,tp") from None
    if min(a, b, c, d) < 0:
        raise UsageError("confusion counts must be non-negative")
    _emit(format_report(report(ConfusionMatrix.from_rows([[a, b], [c, d]]))), args.out)


# --- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value file; flags override its values")
    common.add_argument("--mode", type=lambda v: LanguageMode.parse(v).value,
                        help="english or rs (default english)")
    common.add_argument("--lexicon", help="Romanized Sinhala word list (default: packaged)")
    common.add_argument("--en-lexicon", dest="en_lexicon", help="English word list for RS mode")
    common.add_argument("--seed", type=int, help="seed for all randomness (default 0)")
    common.add_argument("--threshold", type=float, help="classification threshold (default 0.5)")
    common.add_argument("--variance-threshold", dest="variance_threshold", type=float,
                        help=f"drop columns below this variance (default {DEFAULT_VARIANCE_THRESHOLD})")
    common.add_argument("--chunk-words", dest="chunk_words", type=int,
                        help="split documents into chunks of about this many words")
    common.add_argument("--trees", type=int, help="number of trees (default 200)")
    common.add_argument("--max-depth", dest="max_depth", type=int, help="tree depth limit (default 12)")
    common.add_argument("--min-samples-leaf", dest="min_samples_leaf", type=int,
                        help="minimum rows per leaf (default 2)")
    common.add_argument("--mtry", type=int, help="features tried per split (default ceil(sqrt(p)))")
    common.add_argument("--jobs", type=int, help="worker threads; output does not depend on it")
    common.add_argument("--out", help="output path (default stdout where applicable)")

    parser = _Parser(prog="stylopair", description="Pairwise stylometric authorship verification.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("clean", parents=[common], help="normalize a text file")
    p.add_argument("input")
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("profile", parents=[common], help="print the style profile of a text")
    p.add_argument("input")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("compare", parents=[common], help="print the similarity record of two texts")
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("build-dataset", parents=[common], help="sample labeled pairs from a corpus")
    p.add_argument("--corpus", required=True, help="directory laid out as <author>/<doc>.txt")
    p.add_argument("--same", type=int, required=True, help="same-author pairs")
    p.add_argument("--diff", type=int, required=True, help="different-author pairs")
    p.add_argument("--no-filter", action="store_true", help="skip the variance filter")
    p.set_defaults(func=cmd_build_dataset)

    p = sub.add_parser("train", parents=[common], help="train a forest on a dataset CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--test-out", help="hold out a stratified test split and write it here")
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common], help="score a labeled dataset with a model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("verify", parents=[common], help="same-author score for two texts")
    p.add_argument("--model", required=True)
    p.add_argument("a")
    p.add_argument("b")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("synth", parents=[common], help="generate a synthetic corpus")
    p.add_argument("--authors", type=int, default=40)
    p.add_argument("--docs", type=int, default=6, help="documents per author")
    p.add_argument("--spread", type=float, default=1.0, help="between-author parameter spread")
    p.add_argument("--words", type=int, help="words per document (default 250, 80 in rs mode)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("report", parents=[common], help="classification report from confusion counts")
    p.add_argument("--matrix", required=True, help="tn,fp,fn,tp")
    p.set_defaults(func=cmd_report)
    return parser


_REQUIRES_OUT = {"build-dataset", "train", "synth"}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in _REQUIRES_OUT and not args.out:
            parser.error(f"{args.command} requires --out")
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        cfg = resolve(args)
        args.func(args, cfg)
    except UsageError as exc:
        print(f"stylopair: error: {exc}", file=sys.stderr)
        return 1
    except (StyloError, OSError, ValueError) as exc:
        print(f"stylopair: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
