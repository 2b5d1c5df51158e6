"""Command-line interface: one subcommand per pipeline stage plus an
end-to-end `report` that sweeps nucleus sampling mass and tabulates
degeneration metrics and divergence scores.

Exit codes: 0 success, 1 validation error, 2 I/O error.  Errors go to
stderr as single-line JSON records.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .annotations import agreement_report, aggregate, filter_responses, load_responses
from .corpus import (
    CleaningRuleSet,
    Corpus,
    clean_corpus,
    corpus_stats,
    load_corpus,
    save_corpus,
)
from .divergence import MauveConfig, mauve_report
from .errors import ValidationError
from .featurize import hashed_ngram_features, load_features, save_features
from .frechet import frechet_distance, gaussian_stats
from .manifest import RunManifest
from .ngram_metrics import corpus_degeneration
from .sampling import fit_char_lm, generate_corpus

REPORT_COLUMNS = ["source", "rep_2", "rep_3", "rep_4", "diversity", "distinct_2", "mauve"]


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors."""

    def error(self, message):
        self.print_usage(sys.stderr)
        _emit_error("usage", message)
        sys.exit(1)


def _emit_error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")


def _write_json(obj, path) -> None:
    Path(path).write_text(
        json.dumps(obj, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def _echo_params(args, names) -> dict:
    params = {name: getattr(args, name) for name in names}
    params["kernel_backend"] = kernels.BACKEND
    return params


def build_parser() -> _Parser:
    parser = _Parser(prog="lyrebench", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lyrebench {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")

    p = sub.add_parser("clean", parents=[common], help="clean a raw corpus")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rules", default=None, help="cleaning rules file (default: built-in)")
    p.add_argument("--format", choices=["jsonl", "plain-dir"], default="jsonl")

    p = sub.add_parser("stats", parents=[common], help="corpus statistics")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--scheme", choices=["unicode-scalar", "whitespace"], default="unicode-scalar")
    p.add_argument("--format", choices=["jsonl", "plain-dir"], default="jsonl")
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("metrics", parents=[common], help="degeneration metrics")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--scheme", choices=["unicode-scalar", "whitespace"], default="unicode-scalar")
    p.add_argument("--ns", default="2,3,4", help="comma-separated n values")
    p.add_argument("--pooled", action="store_true", help="add corpus-pooled n-gram counts")
    p.add_argument("--out", required=True)

    p = sub.add_parser("featurize", parents=[common], help="hashed n-gram features")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--dim", type=int, default=1024)
    p.add_argument("--max-len", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-min", type=int, default=1)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--out", required=True, help=".csv or .jsonl feature file")

    p = sub.add_parser("mauve", parents=[common], help="divergence-frontier score")
    p.add_argument("--p", dest="p_path", required=True, help="corpus or feature file")
    p.add_argument("--q", dest="q_path", required=True, help="corpus or feature file")
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--c", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-len", type=int, default=128)
    p.add_argument("--dim", type=int, default=1024)
    p.add_argument("--epsilon", type=float, default=1e-6)
    p.add_argument("--grid", type=int, default=100)
    p.add_argument("--sample-cap", type=int, default=3000)
    p.add_argument("--out", required=True)

    p = sub.add_parser("fid", help="Frechet distance between feature sets")
    p.add_argument("--a", dest="a_path", required=True)
    p.add_argument("--b", dest="b_path", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sample", help="train the char LM and generate")
    p.add_argument("--train", required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--alpha", type=float, default=0.1, help="additive smoothing")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--max-tokens", type=int, default=128)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prompt-file", default=None)
    p.add_argument("--out", required=True)

    p = sub.add_parser("agreement", help="aggregate scores and Krippendorff alpha")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--metric", choices=["ordinal", "nominal", "interval"], default="ordinal")
    p.add_argument("--out", required=True)

    p = sub.add_parser("aggregate", help="mean/std aggregation only")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("report", parents=[common], help="end-to-end p-sweep table")
    p.add_argument("--train", required=True, help="human corpus (cleaned JSONL)")
    p.add_argument("--ps", default="0.80,0.85,0.90,0.95,0.99")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--max-tokens", type=int, default=128)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--alpha", type=float, default=0.001)
    p.add_argument("--holdout-frac", type=float, default=0.2)
    p.add_argument("--dim", type=int, default=512)
    p.add_argument("--max-len", type=int, default=128)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--c", type=float, default=5.0)
    p.add_argument("--prompt-file", default=None)
    p.add_argument("--out", required=True, help="base path; writes <out>.json and <out>.txt")
    return parser


def _read_prompt(path) -> tuple[str, ...]:
    if path is None:
        return ()
    text = Path(path).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    return tuple(text)


def _load_feature_input(path, dim, max_len, seed, threads):
    """Feature file, or corpus JSONL to featurize with the hashed defaults."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_features(path)
    first = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                try:
                    first = json.loads(line)
                except json.JSONDecodeError:
                    first = None
                break
    if isinstance(first, dict) and "vector" in first:
        return load_features(path)
    corpus = load_corpus(path)
    return hashed_ngram_features(
        corpus, dim=dim, max_length=max_len, seed=seed, threads=threads
    )


def _cmd_clean(args) -> int:
    rules = CleaningRuleSet.from_file(args.rules) if args.rules else CleaningRuleSet.default()
    corpus = load_corpus(args.in_path, format=args.format)
    cleaned = clean_corpus(corpus, rules, threads=args.threads)
    save_corpus(cleaned, args.out)
    inputs = {"in": args.in_path}
    if args.rules:
        inputs["rules"] = args.rules
    params = _echo_params(args, ["format", "threads"])
    params["rules"] = args.rules or "built-in default"
    RunManifest.create("clean", params, inputs).write(args.out)
    return 0


def _cmd_stats(args) -> int:
    corpus = load_corpus(args.in_path, format=args.format)
    stats = corpus_stats(corpus, scheme=args.scheme, use_raw=True)
    payload = {
        "song_count": stats.song_count,
        "token_count": stats.token_count,
        "byte_size": stats.byte_size,
        "artist_count": stats.artist_count,
        "scheme": args.scheme,
    }
    if args.out:
        _write_json(payload, args.out)
        RunManifest.create(
            "stats", _echo_params(args, ["scheme", "format"]), {"in": args.in_path}
        ).write(args.out)
    else:
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_metrics(args) -> int:
    corpus = load_corpus(args.in_path)
    n_values = [int(v) for v in args.ns.split(",") if v.strip()]
    report = corpus_degeneration(
        corpus, scheme=args.scheme, n_values=n_values,
        pooled=args.pooled, threads=args.threads,
    )
    _write_json(report.to_dict(), args.out)
    RunManifest.create(
        "metrics", _echo_params(args, ["scheme", "ns", "pooled", "threads"]),
        {"in": args.in_path},
    ).write(args.out)
    return 0


def _cmd_featurize(args) -> int:
    corpus = load_corpus(args.in_path)
    features = hashed_ngram_features(
        corpus,
        n_range=(args.n_min, args.n_max),
        dim=args.dim,
        max_length=args.max_len,
        seed=args.seed,
        threads=args.threads,
    )
    save_features(features, args.out)
    RunManifest.create(
        "featurize",
        _echo_params(args, ["dim", "max_len", "seed", "n_min", "n_max", "threads"]),
        {"in": args.in_path},
    ).write(args.out)
    return 0


def _cmd_mauve(args) -> int:
    features_p = _load_feature_input(args.p_path, args.dim, args.max_len, args.seed, args.threads)
    features_q = _load_feature_input(args.q_path, args.dim, args.max_len, args.seed, args.threads)
    cfg = MauveConfig(
        k=args.k, c=args.c, epsilon=args.epsilon, grid_size=args.grid,
        seed=args.seed, sample_cap=args.sample_cap,
    )
    payload = mauve_report(features_p, features_q, cfg)
    _write_json(payload, args.out)
    RunManifest.create(
        "mauve",
        _echo_params(args, ["k", "c", "seed", "max_len", "dim", "epsilon", "grid", "sample_cap"]),
        {"p": args.p_path, "q": args.q_path},
    ).write(args.out)
    return 0


def _cmd_fid(args) -> int:
    features_a = load_features(args.a_path)
    features_b = load_features(args.b_path)
    stats_a = gaussian_stats(features_a)
    stats_b = gaussian_stats(features_b)
    payload = {
        "fid": frechet_distance(stats_a, stats_b),
        "dim": stats_a.dim,
        "n_a": stats_a.n,
        "n_b": stats_b.n,
    }
    _write_json(payload, args.out)
    RunManifest.create(
        "fid", _echo_params(args, []), {"a": args.a_path, "b": args.b_path}
    ).write(args.out)
    return 0


def _cmd_sample(args) -> int:
    train = load_corpus(args.train)
    lm = fit_char_lm(train, order=args.order, smoothing=args.alpha)
    prompt = _read_prompt(args.prompt_file)
    generated = generate_corpus(
        lm, p=args.p, n=args.n, max_tokens=args.max_tokens,
        seed=args.seed, prompt=prompt,
    )
    save_corpus(generated, args.out)
    inputs = {"train": args.train}
    if args.prompt_file:
        inputs["prompt"] = args.prompt_file
    RunManifest.create(
        "sample",
        _echo_params(args, ["order", "alpha", "p", "n", "max_tokens", "seed"]),
        inputs,
    ).write(args.out)
    return 0


def _cmd_agreement(args) -> int:
    aset = load_responses(args.in_path)
    report = agreement_report(aset, metric=args.metric)
    payload = report.to_dict()
    payload["metric"] = args.metric
    _write_json(payload, args.out)
    RunManifest.create(
        "agreement", _echo_params(args, ["metric"]), {"in": args.in_path}
    ).write(args.out)
    return 0


def _cmd_aggregate(args) -> int:
    aset = load_responses(args.in_path)
    filtered = filter_responses(aset)
    report = aggregate(filtered, filtered_count=len(aset) - len(filtered))
    _write_json(report.to_dict(), args.out)
    RunManifest.create(
        "aggregate", _echo_params(args, []), {"in": args.in_path}
    ).write(args.out)
    return 0


def _metrics_row(source, report, mauve) -> dict:
    row = {"source": source}
    for key in ("rep_2", "rep_3", "rep_4", "diversity", "distinct_2"):
        row[key] = report.corpus_mean[key]
    row["mauve"] = mauve
    return row


def _render_table(rows) -> str:
    headers = ["source", "rep-2", "rep-3", "rep-4", "diversity", "distinct-2", "mauve"]
    cells = [headers]
    for row in rows:
        cells.append(
            [row["source"]]
            + [f"{row[k]:.3f}" for k in ("rep_2", "rep_3", "rep_4", "diversity", "distinct_2")]
            + [f"{row['mauve']:.3f}" if row["mauve"] is not None else "-"]
        )
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = []
    for r in cells:
        lines.append("  ".join(val.ljust(widths[i]) for i, val in enumerate(r)).rstrip())
    return "\n".join(lines) + "\n"


def _cmd_report(args) -> int:
    corpus = load_corpus(args.train)
    ps = [float(v) for v in args.ps.split(",") if v.strip()]
    if not ps:
        raise ValidationError("--ps must list at least one probability mass")
    prompt = _read_prompt(args.prompt_file)

    rng = np.random.default_rng(args.seed)
    n_docs = len(corpus)
    n_holdout = max(1, round(args.holdout_frac * n_docs)) if n_docs > 1 else 0
    holdout_idx = set(
        int(i) for i in rng.choice(n_docs, size=n_holdout, replace=False)
    ) if n_holdout else set()
    holdout = Corpus([d for i, d in enumerate(corpus) if i in holdout_idx], name="holdout")
    train = Corpus([d for i, d in enumerate(corpus) if i not in holdout_idx], name="train")
    if len(train) == 0:
        raise ValidationError("holdout fraction leaves no training documents")

    lm = fit_char_lm(train, order=args.order, smoothing=args.alpha)
    reference = holdout if len(holdout) > 0 else train
    ref_features = hashed_ngram_features(
        reference, dim=args.dim, max_length=args.max_len, seed=args.seed,
        threads=args.threads,
    )

    rows = [_metrics_row("human", corpus_degeneration(corpus), None)]
    for p in ps:
        generated = generate_corpus(
            lm, p=p, n=args.n, max_tokens=args.max_tokens, seed=args.seed, prompt=prompt
        )
        gen_report = corpus_degeneration(generated)
        gen_features = hashed_ngram_features(
            generated, dim=args.dim, max_length=args.max_len, seed=args.seed,
            threads=args.threads,
        )
        cfg = MauveConfig(k=args.k, c=args.c, seed=args.seed)
        score = mauve_report(ref_features, gen_features, cfg)["score"]
        rows.append(_metrics_row(f"p={p:.2f}", gen_report, score))

    config = _echo_params(
        args,
        ["ps", "seed", "n", "max_tokens", "order", "alpha", "holdout_frac",
         "dim", "max_len", "k", "c", "threads"],
    )
    payload = {"columns": REPORT_COLUMNS, "rows": rows, "config": config}
    base = Path(args.out)
    _write_json(payload, base.with_suffix(".json"))
    table = _render_table(rows)
    base.with_suffix(".txt").write_text(table, encoding="utf-8")
    sys.stdout.write(table)
    inputs = {"train": args.train}
    if args.prompt_file:
        inputs["prompt"] = args.prompt_file
    RunManifest.create("report", config, inputs).write(base)
    return 0


_COMMANDS = {
    "clean": _cmd_clean,
    "stats": _cmd_stats,
    "metrics": _cmd_metrics,
    "featurize": _cmd_featurize,
    "mauve": _cmd_mauve,
    "fid": _cmd_fid,
    "sample": _cmd_sample,
    "agreement": _cmd_agreement,
    "aggregate": _cmd_aggregate,
    "report": _cmd_report,
}


def run(argv) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.subcommand](args)
    except ValidationError as exc:
        _emit_error("validation", str(exc))
        return 1
    except ValueError as exc:
        _emit_error("validation", str(exc))
        return 1
    except OSError as exc:
        _emit_error("io", str(exc))
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
