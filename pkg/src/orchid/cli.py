"""Command line front end: ``orchid curvature | generate | analyze | profile``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
import warnings
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    FEATURE_KINDS,
    NMI_NORMS,
    bonferroni_adjust,
    expw_kernel_matrix,
    feature_distribution,
    kpca_embed,
    mmd_test,
    nmi,
    rbf_kernel_matrix,
    spectral_cluster,
    structural_features,
    w1_matrix,
    wcc,
)
from .curvature import ALL_FAMILIES, Aggregator, CurvatureConfig, CurvatureEngine, all_curvatures
from .errors import EmptyFeature, OrchidError, ParseError, ShapeError, SpecError
from .generators import (
    gen_configuration,
    gen_erdos_renyi,
    gen_hsbm,
    make_hyperclique,
    make_hypergrid,
    make_hypertree,
)
from .hypergraph import Hypergraph, parse_hypergraph
from .measures import MeasureKind

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


# -- helpers ----------------------------------------------------------------


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _argv_for_manifest(argv: list[str]) -> list[str]:
    """Drop ``--threads`` so outputs do not depend on the parallelism budget."""
    out, skip = [], False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--threads":
            skip = True
            continue
        if tok.startswith("--threads="):
            continue
        out.append(tok)
    return out


def _manifest(argv, configs=None, seeds=None, inputs=None, timings=None) -> dict:
    m = {"tool": "orchid", "version": __version__, "argv": _argv_for_manifest(argv)}
    if configs is not None:
        m["configs"] = configs
    if seeds is not None:
        m["seeds"] = seeds
    if inputs is not None:
        m["inputs"] = inputs
    if timings is not None:
        m["timings"] = timings
    return m


def _dump(doc, pretty: bool = True) -> str:
    return json.dumps(doc, indent=2 if pretty else None, sort_keys=False, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text)


def _split(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def _ints(value: str) -> list[int]:
    try:
        return [int(v) for v in _split(value)]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {value!r}") from None


def parse_alpha_grid(text: str) -> list[float]:
    """``start:stop:step`` with ``stop`` included, e.g. ``0:0.5:0.1``."""
    try:
        start, stop, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"alpha grid must look like start:stop:step, got {text!r}") from None
    if step <= 0 or stop < start:
        raise UsageError("alpha grid needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 10) for k in range(count)]


def _default_threads() -> int:
    env = os.environ.get("ORCHID_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"ORCHID_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def _read_input(path: str) -> tuple[Hypergraph, Path]:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{path}: no such file")
    try:
        return parse_hypergraph(p.read_text()), p
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _alpha_tag(alpha: float) -> str:
    return f"{alpha:.2f}".replace(".", "p")


# -- curvature --------------------------------------------------------------


def cmd_curvature(args, argv) -> int:
    measures = [MeasureKind.parse(m) for m in _split(args.measure)]
    aggs = [Aggregator.parse(a) for a in _split(args.agg)]
    alphas = parse_alpha_grid(args.alpha_grid) if args.alpha_grid else [float(a) for a in _split(args.alpha)]
    families = set(_split(args.types))
    if families - ALL_FAMILIES:
        raise UsageError(f"unknown --types {sorted(families - ALL_FAMILIES)}; choose from {sorted(ALL_FAMILIES)}")
    configs = [CurvatureConfig(m, a, al) for m, a, al in product(measures, aggs, alphas)]
    threads = args.threads if args.threads is not None else _default_threads()
    if args.csv and not args.out:
        raise UsageError("--csv needs --out")

    docs: list[tuple[str, dict]] = []
    for path in args.inputs:
        h, p = _read_input(path)
        digest = {p.name: _sha256(p)}
        isolated = [h.node_labels[i] for i in range(h.node_count) if len(h.neighbors(i)) == 0]
        if isolated:
            print(f"warning: {path}: {len(isolated)} isolated node(s) get null curvature", file=sys.stderr)
        baseline = structural_features(h)
        engines: dict[tuple[MeasureKind, float], CurvatureEngine] = {}
        for cfg in configs:
            key = (cfg.measure, cfg.alpha)
            if key not in engines:
                engines[key] = CurvatureEngine(
                    h,
                    cfg.measure,
                    cfg.alpha,
                    barycenter_support=args.barycenter_support,
                    count_singleton_edges=args.count_singleton_edges,
                )
            t0 = time.perf_counter()
            with warnings.catch_warnings():
                warnings.simplefilter("default")
                result = all_curvatures(h, cfg, families, threads=threads, engine=engines[key])
            elapsed = time.perf_counter() - t0
            doc = {"source": p.stem, **result.to_json(h), "baseline": baseline}
            doc["manifest"] = _manifest(
                argv,
                configs=[cfg.to_json()],
                inputs=digest,
                timings={"seconds": round(elapsed, 6)} if args.timings else None,
            )
            name = f"{p.stem}__{cfg.measure.value}_{cfg.agg.value}_a{_alpha_tag(cfg.alpha)}"
            docs.append((name, doc))

    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for name, doc in docs:
            (out / f"{name}.json").write_text(_dump(doc))
            if args.csv:
                _write_csv(out / f"{name}.csv", doc)
    elif len(docs) == 1:
        sys.stdout.write(_dump(docs[0][1]))
    else:
        sys.stdout.write(_dump([d for _, d in docs]))
    return EXIT_OK


def _write_csv(path: Path, doc: dict) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["kind", "key", "value"])
        for e, v in enumerate(doc.get("edge_curvature") or []):
            w.writerow(["edge", e, "" if v is None else repr(v)])
        for i, j, v in doc.get("directional") or []:
            w.writerow(["directional", f"{i}|{j}", repr(v)])
        for fam, label in (("node_curvature_edges", "node_edges"), ("node_curvature_neighborhood", "node_neighborhood")):
            for node, v in (doc.get(fam) or {}).items():
                w.writerow([label, node, "" if v is None else repr(v)])


# -- generate ---------------------------------------------------------------


def _parse_matrix(text: str) -> list[list[float]]:
    try:
        return [[float(x) for x in _split(row)] for row in text.split(";") if row.strip()]
    except ValueError:
        raise UsageError(f"affinity must look like 'a,b;c,d', got {text!r}") from None


def cmd_generate(args, argv) -> int:
    model = args.model
    seed = args.seed
    header = [f"# orchid {__version__} generate {model} seed={seed}"]
    extra = None
    if model == "hcm":
        if not args.degrees or not args.cards:
            raise UsageError("hcm needs --degrees and --cards")
        degrees, cards = _ints(args.degrees), _ints(args.cards)
        h = gen_configuration(degrees, cards, seed)
        realized = h.degrees()
        requested = int(sum(degrees))
        dropped = requested - int(h.incidence_count)
        header.append(f"# discarded incidences: {dropped} of {requested}")
        print(f"discard rate: {dropped / requested if requested else 0.0:.6f}", file=sys.stderr)
        if (realized > np.asarray(degrees)).any():  # defensive, cannot happen
            raise OrchidError("realized degree above request")
    elif model == "er":
        _need(args, "n", "m", "p")
        h = gen_erdos_renyi(args.n, args.m, args.p, seed)
    elif model == "hsbm":
        if not args.node_sizes or not args.edge_sizes or not args.affinity:
            raise UsageError("hsbm needs --node-sizes, --edge-sizes and --affinity")
        sample = gen_hsbm(_ints(args.node_sizes), _ints(args.edge_sizes), _parse_matrix(args.affinity), seed)
        h = sample.hypergraph
        extra = sample
    elif model == "clique":
        _need(args, "n", "r")
        h = make_hyperclique(args.n, args.r)
    elif model == "grid":
        _need(args, "cycle_len", "r")
        h = make_hypergrid(args.cycle_len, args.r)
    elif model == "tree":
        _need(args, "r", "k", "depth")
        tree = make_hypertree(args.r, args.k, args.depth)
        h = tree.hypergraph
        header.append(f"# central edge: {tree.central_edge}")
        print(f"central edge: {tree.central_edge} (edge index, first edge line)", file=sys.stderr)
    else:  # argparse restricts choices
        raise UsageError(f"unknown model {model!r}")

    isolated = h.node_count - len({v for e in h.edges for v in e})
    if isolated:
        print(f"warning: {isolated} isolated node(s) are not representable in the edge list", file=sys.stderr)
    _emit("\n".join(header) + "\n" + h.to_text(), args.out)
    if extra is not None and args.communities_out:
        doc = {
            "node_communities": {h.node_labels[i]: int(c) for i, c in enumerate(extra.node_communities)},
            "edge_communities": extra.edge_communities.tolist(),
            "manifest": _manifest(argv, seeds={"seed": seed}),
        }
        _emit(_dump(doc), args.communities_out)
    return EXIT_OK


def _need(args, *names) -> None:
    missing = [f"--{n.replace('_', '-')}" for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.model} needs {', '.join(missing)}")


# -- analyze ----------------------------------------------------------------


def _collect_results(paths: list[str]) -> list[tuple[str, dict, Path]]:
    files: list[Path] = []
    for raw in paths:
        p = Path(raw)
        if p.is_dir():
            files.extend(sorted(p.glob("*.json")))
        elif p.is_file():
            files.append(p)
        else:
            raise UsageError(f"{raw}: no such file or directory")
    docs = []
    for f in files:
        try:
            doc = json.loads(f.read_text())
        except json.JSONDecodeError as exc:
            raise UsageError(f"{f}: not JSON ({exc})") from None
        if not isinstance(doc, dict) or "config" not in doc:
            raise UsageError(f"{f}: not a curvature result")
        docs.append((str(f), doc, f))
    if not docs:
        raise UsageError("no result files found")
    return docs


def _read_labels(path: str, ids: list[str]) -> list:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{path}: no such file")
    text = p.read_text()
    try:
        mapping = json.loads(text)
    except json.JSONDecodeError:
        mapping = {}
        for line in text.splitlines():
            parts = line.split()
            if len(parts) >= 2 and not line.lstrip().startswith("#"):
                mapping[parts[0]] = parts[1]
    if isinstance(mapping, list):
        if len(mapping) != len(ids):
            raise UsageError(f"{path}: {len(mapping)} labels for {len(ids)} sources")
        return mapping
    out = []
    for sid in ids:
        key = next((k for k in (sid, Path(sid).name, Path(sid).stem) if k in mapping), None)
        if key is None:
            raise UsageError(f"{path}: no label for {sid}")
        out.append(mapping[key])
    return out


def _config_key(doc: dict) -> tuple:
    c = doc["config"]
    return c["measure"], c["agg"], float(c["alpha"])


def cmd_analyze(args, argv) -> int:
    docs = _collect_results(args.inputs)
    feature = args.feature
    inputs = {str(p): _sha256(p) for _, _, p in docs}
    out: dict = {"feature": feature}
    wants_cross_source = bool(args.kernel or args.k or args.mmd or args.wcc)
    if not (wants_cross_source or args.nmi):
        raise UsageError("nothing to do: pass --kernel, --k, --mmd, --wcc or --nmi")

    if wants_cross_source:
        keys = {_config_key(d) for _, d, _ in docs}
        if len(keys) > 1:
            raise UsageError(f"mixed configurations in inputs ({len(keys)}); analyze one at a time")
        ids = [sid for sid, _, _ in docs]
        try:
            dists = [feature_distribution(d, feature, source_id=sid) for sid, d, _ in docs]
        except EmptyFeature as exc:
            raise UsageError(f"missing feature: {exc}") from None
        out["config"] = docs[0][1]["config"]
        out["sources"] = ids
        threads = args.threads if args.threads is not None else _default_threads()
        labels = None
        if args.kernel or args.k:
            if len(dists) < 2:
                raise UsageError("kernel analyses need at least two sources")
            kind = args.kernel or "expw"
            km = rbf_kernel_matrix(dists, ids=ids) if kind == "rbf" else expw_kernel_matrix(dists, ids=ids, threads=threads)
            out["kernel"] = km.to_json()
            out["kpca"] = kpca_embed(km, min(2, len(ids))).tolist()
            if args.k:
                if not 2 <= args.k <= len(ids):
                    raise UsageError(f"--k must lie in [2, {len(ids)}]")
                labels = spectral_cluster(km, args.k, args.seed).tolist()
                out["clusters"] = labels
        if args.mmd:
            n = len(dists)
            if n < 2:
                raise UsageError("--mmd needs at least two sources")
            raw = np.ones((n, n))
            pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
            stats = np.zeros((n, n))
            for a, b in pairs:
                stats[a, b], raw[a, b] = mmd_test(dists[a], dists[b], args.B, args.seed)
                stats[b, a], raw[b, a] = stats[a, b], raw[a, b]
            adj = np.ones((n, n))
            if pairs:
                flat = bonferroni_adjust([raw[a, b] for a, b in pairs])
                for (a, b), p in zip(pairs, flat):
                    adj[a, b] = adj[b, a] = p
            out["mmd"] = {
                "B": args.B,
                "tests": len(pairs),
                "mmd2": stats.tolist(),
                "p_raw": raw.tolist(),
                "p_bonferroni": adj.tolist(),
            }
        if args.wcc:
            if args.labels:
                labels = _read_labels(args.labels, ids)
            if labels is None:
                raise UsageError("--wcc needs --labels or --k")
            out["wcc"] = {"labels": labels, "value": wcc(labels, dists, w1_matrix(dists, threads))}

    if args.nmi:
        by_source: dict[str, list[tuple[dict, str]]] = {}
        for sid, d, p in docs:
            by_source.setdefault(d.get("source", p.stem), []).append((d, sid))
        out["nmi"] = {}
        for source, items in sorted(by_source.items()):
            vecs = []
            for d, sid in items:
                try:
                    vecs.append(_aligned_values(d, feature))
                except EmptyFeature as exc:
                    raise UsageError(f"missing feature in {sid}: {exc}") from None
            lengths = {len(v) for v in vecs}
            if len(lengths) > 1:
                raise UsageError(f"{source}: results disagree on the number of {feature} values")
            n = len(vecs)
            mat = np.eye(n)
            for a in range(n):
                for b in range(a + 1, n):
                    keep = [k for k in range(len(vecs[a])) if vecs[a][k] is not None and vecs[b][k] is not None]
                    xa = [vecs[a][k] for k in keep]
                    xb = [vecs[b][k] for k in keep]
                    mat[a, b] = mat[b, a] = nmi(xa, xb, args.bins, args.nmi_norm) if len(keep) >= 2 else float("nan")
            out["nmi"][source] = {
                "configs": [d["config"] for d, _ in items],
                "norm": args.nmi_norm,
                "bins": args.bins,
                "matrix": [[None if np.isnan(x) else float(x) for x in row] for row in mat],
            }

    out["manifest"] = _manifest(argv, seeds={"seed": args.seed}, inputs=inputs)
    _emit(_dump(out), args.out)
    return EXIT_OK


def _aligned_values(doc: dict, feature: str) -> list:
    if feature == "edge_curvature":
        values = doc.get("edge_curvature")
    elif feature == "directional_curvature":
        rows = doc.get("directional")
        values = None if rows is None else [r[2] for r in rows]
    elif feature in ("node_curvature_edges", "node_curvature_neighborhood"):
        m = doc.get(feature)
        values = None if m is None else list(m.values())
    else:
        values = (doc.get("baseline") or {}).get(feature)
    if values is None:
        raise EmptyFeature(f"{feature} was not computed")
    return values


# -- profile ----------------------------------------------------------------


def cmd_profile(args, argv) -> int:
    h, p = _read_input(args.input)
    doc = h.structural_profile(exact_diameter=args.exact_diameter).to_json()
    doc["manifest"] = _manifest(argv, inputs={p.name: _sha256(p)})
    _emit(_dump(doc), args.out)
    return EXIT_OK


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orchid", description="Ollivier-Ricci curvature of hypergraphs.")
    parser.add_argument("--version", action="version", version=f"orchid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curvature", help="compute curvatures of edge-list files")
    c.add_argument("inputs", nargs="+", help="edge-list files, one edge per line")
    c.add_argument("--measure", default="en", help="comma list of en, ee, we (default en)")
    c.add_argument("--agg", default="mean", help="comma list of mean, barycenter, max (default mean)")
    c.add_argument("--alpha", default="0", help="comma list of smoothing values in [0, 1] (default 0)")
    c.add_argument("--alpha-grid", help="start:stop:step, stop included; overrides --alpha")
    c.add_argument(
        "--types",
        default="edge,directional,node_edges,node_neighborhood",
        help="comma list of curvature families to compute",
    )
    c.add_argument("--threads", type=int, help="worker threads (default $ORCHID_THREADS or all cores)")
    c.add_argument("--out", help="output directory; one JSON file per configuration (default stdout)")
    c.add_argument("--csv", action="store_true", help="also write a flat CSV next to each JSON file")
    c.add_argument("--count-singleton-edges", action="store_true", help="divide edge-averaged node curvature by the full degree")
    c.add_argument("--barycenter-support", choices=["two-hop", "full"], default="two-hop")
    c.add_argument("--timings", action="store_true", help="record wall-clock timings in the manifest")
    c.set_defaults(func=cmd_curvature)

    g = sub.add_parser("generate", help="write a synthetic hypergraph as an edge list")
    g.add_argument("model", choices=["hcm", "er", "hsbm", "clique", "grid", "tree"])
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help="output file (default stdout)")
    g.add_argument("--n", type=int, help="nodes (er, clique)")
    g.add_argument("--m", type=int, help="edges (er)")
    g.add_argument("--p", type=float, help="incidence probability (er)")
    g.add_argument("--r", type=int, help="edge size (clique, grid, tree)")
    g.add_argument("--k", type=int, help="node degree (tree)")
    g.add_argument("--depth", type=int, help="levels below the central edge (tree)")
    g.add_argument("--cycle-len", type=int, help="cycle length (grid)")
    g.add_argument("--degrees", help="comma list of node degrees (hcm)")
    g.add_argument("--cards", help="comma list of edge cardinalities (hcm)")
    g.add_argument("--node-sizes", help="comma list of node community sizes (hsbm)")
    g.add_argument("--edge-sizes", help="comma list of edge community sizes (hsbm)")
    g.add_argument("--affinity", help="rows separated by ';', entries by ',' (hsbm)")
    g.add_argument("--communities-out", help="JSON file for planted communities (hsbm)")
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="kernels, clustering and tests over curvature results")
    a.add_argument("inputs", nargs="+", help="result JSON files or directories of them")
    a.add_argument("--feature", default="edge_curvature", choices=FEATURE_KINDS)
    a.add_argument("--kernel", choices=["rbf", "expw"], help="kernel matrix and 2-D kernel PCA")
    a.add_argument("--k", type=int, help="spectral clusters")
    a.add_argument("--mmd", action="store_true", help="pairwise MMD tests (raw and Bonferroni p-values)")
    a.add_argument("--B", type=int, default=200, help="permutations per MMD test")
    a.add_argument("--wcc", action="store_true", help="Wasserstein clustering coefficient")
    a.add_argument("--labels", help="cluster labels: JSON object/list or 'source label' lines")
    a.add_argument("--nmi", action="store_true", help="NMI matrix across configurations of each source")
    a.add_argument("--bins", type=int, default=10)
    a.add_argument("--nmi-norm", choices=NMI_NORMS, default="max")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--threads", type=int)
    a.add_argument("--out", help="output file (default stdout)")
    a.set_defaults(func=cmd_analyze)

    p = sub.add_parser("profile", help="structural profile of an edge-list file")
    p.add_argument("input")
    p.add_argument("--exact-diameter", action="store_true", help="all-pairs BFS for the diameter")
    p.add_argument("--out")
    p.set_defaults(func=cmd_profile)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except (UsageError, SpecError, ShapeError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OrchidError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
