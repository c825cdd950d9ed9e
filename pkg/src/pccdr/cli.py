"""Command-line interface.

Exit codes: 0 success, 2 usage errors, 3 data errors (parse failures, invalid
or degenerate inputs, I/O), 4 numerical failures during optimization.

Thread control must happen before numpy is first imported, so this module
imports only the standard library at the top level and pulls in the compute
modules lazily inside the command handlers. `--threads N` (or the
PCCDR_THREADS environment variable) pins the BLAS/OpenMP pools; `--threads 1`
makes every command bit-reproducible.

Reported wall_ms fields are measured wall-clock time and therefore vary
between runs; setting PCCDR_FIXED_WALL_MS=<number> replaces them with a
constant, which makes output files byte-identical across reruns (every other
byte already is).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

_THREAD_ENV_VARS = (
    "OMP_NUM_THREADS",
    "OPENBLAS_NUM_THREADS",
    "MKL_NUM_THREADS",
    "VECLIB_MAXIMUM_THREADS",
    "NUMEXPR_NUM_THREADS",
    "NUMBA_NUM_THREADS",
)

_METRIC_COLUMNS = (
    "trustworthiness",
    "continuity",
    "mrre_false",
    "mrre_missing",
    "global_pearson",
    "global_spearman",
    "ls_avg",
    "gs_avg",
)


class _UsageError(Exception):
    """Bad flag combinations detected after argparse; mapped to exit 2."""


def _scan_threads(argv: list[str]) -> int | None:
    """Find --threads before any numpy import; argparse re-parses it later."""
    value = None
    i = 0
    while i < len(argv):
        arg = argv[i]
        if arg == "--threads":
            if i + 1 >= len(argv):
                raise _UsageError("--threads expects a value")
            value = argv[i + 1]
            i += 2
            continue
        if arg.startswith("--threads="):
            value = arg.split("=", 1)[1]
        i += 1
    if value is None:
        value = os.environ.get("PCCDR_THREADS")
    if value is None:
        return None
    try:
        count = int(value)
    except ValueError:
        raise _UsageError(f"--threads expects an integer, got {value!r}")
    if count < 1:
        raise _UsageError(f"--threads must be >= 1, got {count}")
    return count


def _apply_threads(count: int) -> None:
    for var in _THREAD_ENV_VARS:
        os.environ[var] = str(count)


def _wall_ms(measured: float) -> float:
    fixed = os.environ.get("PCCDR_FIXED_WALL_MS")
    return float(fixed) if fixed is not None else measured


def _parse_clusters(text: str):
    if text.strip().lower() == "none":
        return ()
    try:
        counts = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers or 'none', got {text!r}"
        )
    return counts


def _parse_seeds(text: str):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}"
        )


def _add_input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="feature matrix file")
    p.add_argument("--format", choices=("csv", "raw-f32"), default="csv",
                   help="input file format (default csv)")
    p.add_argument("--has-header", action="store_true",
                   help="skip one CSV header line")
    p.add_argument("--standardize", action="store_true",
                   help="zero-mean unit-variance columns before use")


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threads", type=int, default=None,
                   help="pin BLAS/OpenMP thread pools (1 = bit-reproducible); "
                        "falls back to PCCDR_THREADS")


def _load_input(args):
    from . import data

    matrix = data.load_matrix(args.input, format=args.format,
                              has_header=args.has_header)
    if getattr(args, "standardize", False):
        matrix = data.standardize(matrix)
    return matrix


def _write_json(payload: dict, path: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path is None:
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_fit(args) -> int:
    from . import data, trainer

    matrix = _load_input(args)
    config = trainer.PccConfig(
        n_components=args.dim,
        n_refs=args.k_refs,
        beta=args.beta,
        cluster_counts=args.clusters,
        epsilon=args.epsilon,
        iters=args.iters,
        learning_rate=args.lr,
        seed=args.seed,
    )
    emb, report = trainer.fit_pcc(matrix, config)
    data.save_embedding(emb, args.out)
    if args.report:
        payload = report.to_json_dict()
        payload["wall_ms"] = _wall_ms(payload["wall_ms"])
        _write_json(payload, args.report)
    print(f"fit: {matrix.rows}x{matrix.cols} -> {args.out} "
          f"({report.wall_ms / 1000.0:.1f} s)", file=sys.stderr)
    return 0


def cmd_refine(args) -> int:
    from . import data, trainer

    matrix = _load_input(args)
    init = data.load_embedding(args.init)
    if init.ndim != 2:
        raise _UsageError(f"--init must be a 2-D matrix, got shape {init.shape}")
    config = trainer.RefineConfig(
        n_components=init.shape[1],
        lam=args.lam,
        n_refs=args.k_refs,
        epsilon=args.epsilon,
        iters=args.iters,
        inner_steps=args.inner_steps,
        learning_rate=args.lr,
        seed=args.seed,
    )
    emb, report = trainer.refine_from_init(matrix, init, config)
    data.save_embedding(emb, args.out)
    if args.report:
        payload = report.to_json_dict()
        payload["wall_ms"] = _wall_ms(payload["wall_ms"])
        _write_json(payload, args.report)
    print(f"refine: {matrix.rows} points -> {args.out} "
          f"({report.wall_ms / 1000.0:.1f} s)", file=sys.stderr)
    return 0


def cmd_evaluate(args) -> int:
    from . import data, metrics

    matrix = _load_input(args)
    emb = data.load_embedding(args.embedding)
    report = metrics.evaluate(
        matrix,
        emb,
        seed=data.RunSeed(args.seed),
        k=args.metric_k,
        max_pairs=args.max_pairs,
    )
    _write_json(report.to_dict(), args.out)
    return 0


def _parse_methods(text: str):
    methods = []
    for token in text.split(","):
        token = token.strip()
        if token in ("pcc", "pca"):
            methods.append((token, None, None))
        elif token.startswith("external:") and "=" in token:
            name, path = token[len("external:"):].split("=", 1)
            if not name or not path:
                raise _UsageError(f"malformed external method {token!r}")
            methods.append(("external", name, path))
        else:
            raise _UsageError(
                f"unknown method {token!r} (expected pcc, pca, or external:<name>=<file>)"
            )
    if not methods:
        raise _UsageError("--methods is empty")
    return methods


def _benchmark_dataset(args, seed_value: int):
    from . import data, datasets

    seed = data.RunSeed(seed_value)
    name = args.dataset
    if name == "swissroll":
        return datasets.make_swiss_roll(args.n, args.noise, seed)
    if name == "blobs":
        centers = datasets.random_centers(args.blob_centers, args.blob_dim, seed)
        return datasets.make_blobs(args.n, centers, args.blob_std, seed)
    if name.startswith("file:"):
        return data.load_matrix(name[len("file:"):], format="csv")
    raise _UsageError(
        f"unknown dataset {name!r} (expected swissroll, blobs, or file:<path>)"
    )


def cmd_benchmark(args) -> int:
    import time

    from . import data, metrics, pca, trainer

    methods = _parse_methods(args.methods)
    rows = []
    for seed_value in args.seeds:
        matrix = _benchmark_dataset(args, seed_value)
        if args.standardize:
            matrix = data.standardize(matrix)
        x = matrix.values
        for kind, name, path in methods:
            if kind == "pcc":
                config = trainer.PccConfig(
                    n_components=args.dim,
                    n_refs=args.k_refs,
                    beta=args.beta,
                    cluster_counts=args.clusters,
                    epsilon=args.epsilon,
                    iters=args.iters,
                    learning_rate=args.lr,
                    seed=seed_value,
                )
                emb, fit_report = trainer.fit_pcc(matrix, config)
                wall = fit_report.wall_ms
                label = "pcc"
            elif kind == "pca":
                start = time.perf_counter()
                _, emb = pca.pca_fit_transform(matrix, args.dim)
                wall = 1000.0 * (time.perf_counter() - start)
                label = "pca"
            else:
                emb = data.load_embedding(path)
                wall = 0.0  # consumed, never fitted
                label = name
            report = metrics.evaluate(
                x, emb, seed=data.RunSeed(seed_value),
                k=args.metric_k, max_pairs=args.max_pairs,
            )
            row = {"dataset": args.dataset, "method": label}
            row.update({key: getattr(report, key) for key in _METRIC_COLUMNS})
            row["wall_ms"] = _wall_ms(wall)
            row["seed"] = seed_value
            rows.append(row)
            print(f"benchmark: {label} seed={seed_value} "
                  f"gs_avg={row['gs_avg']:.4f} ls_avg={row['ls_avg']:.4f}",
                  file=sys.stderr)

    header = ["dataset", "method", *_METRIC_COLUMNS, "wall_ms", "seed"]
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = [str(row["dataset"]), str(row["method"])]
            cells += [f"{row[key]:.17g}" for key in _METRIC_COLUMNS]
            cells += [f"{row['wall_ms']:.3f}", str(row["seed"])]
            fh.write(",".join(cells) + "\n")

    summary = {"dataset": args.dataset, "n_rows": len(rows), "methods": {}}
    for kind, name, _ in methods:
        label = name if kind == "external" else kind
        hits = [row for row in rows if row["method"] == label]
        summary["methods"][label] = {
            key: sum(row[key] for row in hits) / len(hits)
            for key in (*_METRIC_COLUMNS, "wall_ms")
        }
        summary["methods"][label]["n_runs"] = len(hits)
    _write_json(summary, args.summary or args.out + ".summary.json")
    return 0


def cmd_dataset(args) -> int:
    from . import data, datasets

    seed = data.RunSeed(args.seed)
    if args.kind == "swissroll":
        matrix = datasets.make_swiss_roll(args.n, args.noise, seed)
    else:
        centers = datasets.random_centers(args.centers, args.dim, seed)
        matrix = datasets.make_blobs(args.n, centers, args.std, seed)
    data.save_embedding(matrix.values, args.out)
    if args.labels_out:
        with open(args.labels_out, "w", encoding="utf-8", newline="\n") as fh:
            for lab in matrix.labels:
                fh.write(f"{lab}\n")
    print(f"dataset: {args.kind} {matrix.rows}x{matrix.cols} -> {args.out}",
          file=sys.stderr)
    return 0


def cmd_plot(args) -> int:
    from . import data, plotting

    emb = data.load_embedding(args.embedding)
    if args.labels and args.color_by_distance_from is not None:
        raise _UsageError("--labels and --color-by-distance-from are exclusive")

    if emb.shape[1] == 3:
        if args.rgb_out is None:
            raise _UsageError(
                "3-D embeddings are exported as RGB channels; use --rgb-out"
            )
        plotting.save_rgb_csv(emb, args.rgb_out)
        print(f"plot: rgb {emb.shape[0]} rows -> {args.rgb_out}", file=sys.stderr)
        return 0
    if emb.shape[1] != 2:
        raise _UsageError(
            f"plotting supports 2-D (SVG) or 3-D (RGB) embeddings, got {emb.shape[1]}-D"
        )
    if args.rgb_out is not None:
        raise _UsageError("--rgb-out requires a 3-D embedding")
    if args.out is None:
        raise _UsageError("--out is required for 2-D embeddings")

    labels = shades = None
    if args.labels:
        labels = data.load_labels(args.labels)
    elif args.color_by_distance_from is not None:
        if not args.input:
            raise _UsageError("--color-by-distance-from needs --input")
        matrix = data.load_matrix(args.input, format=args.format,
                                  has_header=args.has_header)
        shades = plotting.distance_colors(matrix, args.color_by_distance_from)
    svg = plotting.scatter_svg(emb, labels=labels, shades=shades)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(svg + "\n")
    print(f"plot: {emb.shape[0]} points -> {args.out}", file=sys.stderr)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pccdr",
        description="Dimensionality reduction by joint correlation and "
                    "cluster-observability optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit an embedding from scratch")
    _add_input_flags(p)
    p.add_argument("--out", required=True, help="embedding CSV to write")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--k-refs", type=int, default=100)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--clusters", type=_parse_clusters, default=(4, 8, 16, 32, 64),
                   help="comma-separated k-means sizes, or 'none'")
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None, help="write run report JSON here")
    _add_common_flags(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("refine", help="polish an existing embedding")
    _add_input_flags(p)
    p.add_argument("--init", required=True, help="initial embedding CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0,
                   help="anchor weight toward the initial embedding")
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--inner-steps", type=int, default=100)
    p.add_argument("--k-refs", type=int, default=100)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", default=None)
    _add_common_flags(p)
    p.set_defaults(func=cmd_refine)

    p = sub.add_parser("evaluate", help="score an embedding against its source")
    _add_input_flags(p)
    p.add_argument("--embedding", required=True)
    p.add_argument("--metric-k", type=int, default=25)
    p.add_argument("--max-pairs", type=int, default=2_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="report JSON (stdout if omitted)")
    _add_common_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="run methods across seeds and tabulate")
    p.add_argument("--dataset", required=True,
                   help="swissroll, blobs, or file:<path>")
    p.add_argument("--methods", required=True,
                   help="comma list: pcc, pca, external:<name>=<emb.csv>")
    p.add_argument("--out", required=True, help="results CSV")
    p.add_argument("--summary", default=None,
                   help="summary JSON path (default <out>.summary.json)")
    p.add_argument("--seeds", type=_parse_seeds, default=(0,))
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--blob-dim", type=int, default=30)
    p.add_argument("--blob-centers", type=int, default=8)
    p.add_argument("--blob-std", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--k-refs", type=int, default=100)
    p.add_argument("--beta", type=float, default=10.0)
    p.add_argument("--clusters", type=_parse_clusters, default=(4, 8, 16, 32, 64))
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=500)
    p.add_argument("--lr", type=float, default=0.05)
    p.add_argument("--metric-k", type=int, default=25)
    p.add_argument("--max-pairs", type=int, default=2_000_000)
    p.add_argument("--standardize", action="store_true")
    _add_common_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("dataset", help="generate a synthetic dataset CSV")
    p.add_argument("kind", choices=("swissroll", "blobs"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--noise", type=float, default=0.0, help="swissroll noise std")
    p.add_argument("--dim", type=int, default=2, help="blobs feature dimension")
    p.add_argument("--centers", type=int, default=3, help="blobs center count")
    p.add_argument("--std", type=float, default=1.0, help="blobs noise std")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--labels-out", default=None)
    _add_common_flags(p)
    p.set_defaults(func=cmd_dataset)

    p = sub.add_parser("plot", help="emit an SVG scatter (2-D) or RGB CSV (3-D)")
    p.add_argument("--embedding", required=True)
    p.add_argument("--labels", default=None, help="integer label per line")
    p.add_argument("--color-by-distance-from", type=int, default=None,
                   metavar="ROW", help="color by distance from this input row")
    p.add_argument("--input", default=None, help="feature matrix for distance coloring")
    p.add_argument("--format", choices=("csv", "raw-f32"), default="csv")
    p.add_argument("--has-header", action="store_true")
    p.add_argument("--out", default=None, help="SVG path (2-D embeddings)")
    p.add_argument("--rgb-out", default=None, help="RGB CSV path (3-D embeddings)")
    _add_common_flags(p)
    p.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    args_list = list(sys.argv[1:] if argv is None else argv)
    try:
        threads = _scan_threads(args_list)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    if threads is not None:
        _apply_threads(threads)

    parser = _build_parser()
    try:
        args = parser.parse_args(args_list)
    except SystemExit as exc:  # argparse: 0 for --help, 2 for bad usage
        return int(exc.code or 0)

    from .errors import (
        DegenerateData,
        InvalidInput,
        NumericalError,
        ParseError,
    )

    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, InvalidInput, DegenerateData, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
