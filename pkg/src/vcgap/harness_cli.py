"""Command-line harness: instance generation, batch experiments, and report
emission for researchers running falsification sweeps.

Subcommands: solve / exact / baseline / gen / batch / probe. A single JSON
config document carries every tolerance and threshold;
the VCGAP_CONFIG environment variable supplies it when --config is absent.
Exit codes: 0 success, 1 usage or input error, 2 contract violation (a
finding worth investigating), 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ContractViolation, ParseError, SolverError
from .exact_oracle import STATUS_OPTIMAL, exact_vc
from .graph_core import Graph, duplicate_join, graph_from_json, induced_subgraph, parse_dimacs, write_dimacs
from .pipeline import PipelineConfig, RunTrace, evaluate_ratio, mahdis_run, two_approx_baseline
from .rounding_geometry import Thresholds, build_epsilon_subgraph, classify_property1, odd_cycle_probe
from .sdp_solve import (
    admm_solve,
    build_sdp_doubled,
    build_sdp_single,
    check_lemma2_bounds,
    extract_vectors,
    gram_from_json,
)

_MODEL_CODES = {"gnp": 1, "bipartite_gnp": 2, "odd_cycle_rich": 3, "star_union": 4}

CSV_COLUMNS = (
    "instance_id",
    "n",
    "m",
    "z_lp",
    "z_sdp_single",
    "z_sdp_doubled",
    "z_exact",
    "cover_size",
    "ratio",
    "step_taken",
    "p1_holds",
    "certificate",
    "flags",
)


def generate_graph(model: str, n: int, parameter: float, seed: int) -> Graph:
    """Deterministic random instance; the stream depends only on the arguments."""
    if n < 0:
        raise ArgumentError(f"n must be nonnegative, got {n}")
    if model not in _MODEL_CODES:
        raise ArgumentError(f"unknown model {model!r}; choose from {sorted(_MODEL_CODES)}")
    entropy = (int(seed) & (2**64 - 1), _MODEL_CODES[model], n, int(round(parameter * 1e9)))
    rng = np.random.default_rng(np.random.SeedSequence(entropy))
    if model == "gnp":
        if not 0.0 <= parameter <= 1.0:
            raise ArgumentError("gnp parameter is an edge probability in [0, 1]")
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < parameter]
        return Graph.build(range(n), edges)
    if model == "bipartite_gnp":
        if not 0.0 <= parameter <= 1.0:
            raise ArgumentError("bipartite_gnp parameter is an edge probability in [0, 1]")
        left = set(int(v) for v in rng.choice(n, size=n // 2, replace=False)) if n else set()
        right = [v for v in range(n) if v not in left]
        edges = [(i, j) for i in sorted(left) for j in right if rng.random() < parameter]
        return Graph.build(range(n), edges)
    if model == "odd_cycle_rich":
        if not 0.0 <= parameter <= 1.0:
            raise ArgumentError("odd_cycle_rich parameter is a chord probability in [0, 1]")
        edges = []
        start = 0
        while n - start >= 3:
            choices = [L for L in (3, 5, 7) if L <= n - start]
            length = int(rng.choice(choices))
            cyc = list(range(start, start + length))
            edges.extend((cyc[i], cyc[(i + 1) % length]) for i in range(length))
            start += length
        present = {(min(u, v), max(u, v)) for u, v in edges}
        for i in range(n):
            for j in range(i + 1, n):
                if (i, j) not in present and rng.random() < parameter:
                    edges.append((i, j))
        return Graph.build(range(n), edges)
    # star_union: disjoint stars of `parameter` vertices each (center first);
    # drives the relaxation value below n/2 so kernelization fires.
    size = int(parameter)
    if size < 2:
        raise ArgumentError("star_union parameter is the star size, an integer >= 2")
    edges = []
    for start in range(0, n - size + 1, size):
        edges.extend((start, start + k) for k in range(1, size))
    return Graph.build(range(n), edges)


def _instance_graph(spec: dict) -> tuple[str, Graph]:
    if "file" in spec:
        path = Path(spec["file"])
        g = parse_dimacs(path.read_text())
        return spec.get("id", path.stem), g
    g = generate_graph(spec["model"], int(spec["n"]), float(spec["parameter"]), int(spec["seed"]))
    default_id = f'{spec["model"]}-n{spec["n"]}-p{spec["parameter"]:g}-s{spec["seed"]}'
    return spec.get("id", default_id), g


def run_instance(spec: dict, cfg_doc: dict, oracle_max_n: int = 32) -> dict:
    """Full single-instance experiment: pipeline, oracle, baseline, and the
    single-graph relaxation of the working graph for the doubled-value bracket."""
    cfg = PipelineConfig.from_dict(cfg_doc)
    instance_id, g = _instance_graph(spec)
    trace = mahdis_run(g, cfg)
    oracle = exact_vc(g, cfg.oracle_budget) if g.n <= oracle_max_n else None
    trace = evaluate_ratio(trace, oracle, cfg.tau_ratio)
    baseline = two_approx_baseline(g)

    row: dict = {
        "instance_id": instance_id,
        "trace": trace.to_dict(),
        "baseline_size": baseline.cover_size,
        "z_sdp_single": None,
        "lemma2": None,
    }
    if trace.z_sdp_doubled is not None:
        v_half = sorted(set(g.vertices) - set(trace.v_one) - set(trace.v_zero))
        residual = induced_subgraph(g, v_half)
        single = admm_solve(build_sdp_single(residual), cfg.sdp)
        row["z_sdp_single"] = single.objective_value if single.converged else None
        if not single.converged:
            row["trace"]["flags"].append("sdp_single_nonconverged")
        if single.converged and trace.sdp_converged and residual.n <= oracle_max_n:
            res_oracle = exact_vc(residual, cfg.oracle_budget)
            if res_oracle.status == STATUS_OPTIMAL:
                row["lemma2"] = check_lemma2_bounds(
                    single.objective_value,
                    trace.z_sdp_doubled,
                    res_oracle.size,
                    cfg.tau_cmp,
                ).to_dict()
    return row


def _worker(args: tuple) -> dict:
    spec, cfg_doc, oracle_max_n = args
    try:
        return run_instance(spec, cfg_doc, oracle_max_n)
    except Exception as exc:  # recorded per instance; the batch continues
        return {
            "instance_id": spec.get("id", repr(spec)),
            "error": f"{type(exc).__name__}: {exc}",
        }


def expand_corpus(corpus: list[dict]) -> list[dict]:
    specs = []
    for entry in corpus:
        if "file" in entry:
            specs.append(dict(entry))
            continue
        count = int(entry.get("count", 1))
        seed0 = int(entry.get("seed", 0))
        for k in range(count):
            spec = {key: entry[key] for key in ("model", "n", "parameter")}
            spec["seed"] = seed0 + k
            specs.append(spec)
    return specs


def run_batch(batch_doc: dict, jobs: int = 1) -> dict:
    """Run every corpus instance, merge rows by instance id, aggregate findings."""
    cfg_doc = batch_doc.get("pipeline", {})
    oracle_max_n = int(batch_doc.get("oracle_max_n", 32))
    specs = expand_corpus(batch_doc.get("corpus", []))
    args = [(spec, cfg_doc, oracle_max_n) for spec in specs]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_worker, args))
    else:
        rows = [_worker(a) for a in args]
    rows.sort(key=lambda r: r["instance_id"])
    return {"schema_version": "1", "rows": rows, "aggregates": _aggregate(rows)}


def _aggregate(rows: list[dict]) -> dict:
    ratios = []
    steps: dict[str, int] = {}
    p1_count = 0
    cert_violations = 0
    theorem6 = 0
    nonconverged = 0
    lemma2_lower = None
    lemma2_upper = None
    lemma2_violations = 0
    failures = []
    for row in rows:
        if "error" in row:
            failures.append({"instance_id": row["instance_id"], "error": row["error"]})
            continue
        tr = row["trace"]
        steps[tr["step_taken"]] = steps.get(tr["step_taken"], 0) + 1
        if tr["empirical_ratio"] is not None and math.isfinite(tr["empirical_ratio"]):
            ratios.append(tr["empirical_ratio"])
        pp, pd = tr["property_prime"], tr["property_double_prime"]
        if pp and pd and pp["holds"] and pd["holds"]:
            p1_count += 1
        if tr["certificate_violated"]:
            cert_violations += 1
        if "theorem6_violation" in tr["flags"]:
            theorem6 += 1
        if "sdp_nonconverged" in tr["flags"]:
            nonconverged += 1
        if row.get("lemma2"):
            l2 = row["lemma2"]
            lemma2_lower = l2["lower_margin"] if lemma2_lower is None else min(lemma2_lower, l2["lower_margin"])
            lemma2_upper = l2["upper_margin"] if lemma2_upper is None else min(lemma2_upper, l2["upper_margin"])
            if not l2["consistent"]:
                lemma2_violations += 1
    return {
        "instances": len(rows),
        "failures": failures,
        "max_ratio": max(ratios) if ratios else None,
        "mean_ratio": sum(ratios) / len(ratios) if ratios else None,
        "step_histogram": dict(sorted(steps.items())),
        "property1_holds_count": p1_count,
        "certificate_violations": cert_violations,
        "theorem6_violations": theorem6,
        "sdp_nonconverged": nonconverged,
        "lemma2_min_lower_margin": lemma2_lower,
        "lemma2_min_upper_margin": lemma2_upper,
        "lemma2_violations": lemma2_violations,
    }


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def table_to_csv(table: dict) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in table["rows"]:
        if "error" in row:
            cells = {c: None for c in CSV_COLUMNS}
            cells["instance_id"] = row["instance_id"]
            cells["flags"] = "error:" + row["error"].replace(",", ";")
        else:
            tr = row["trace"]
            pp, pd = tr["property_prime"], tr["property_double_prime"]
            certs = [c["claimed_ratio_bound"] for c in tr["certificates"]]
            cells = {
                "instance_id": row["instance_id"],
                "n": tr["n"],
                "m": tr["m"],
                "z_lp": tr["z_lp"],
                "z_sdp_single": row["z_sdp_single"],
                "z_sdp_doubled": tr["z_sdp_doubled"],
                "z_exact": tr["oracle_optimum"],
                "cover_size": tr["cover_size"],
                "ratio": tr["empirical_ratio"],
                "step_taken": tr["step_taken"],
                "p1_holds": (pp["holds"] and pd["holds"]) if (pp and pd) else None,
                "certificate": min(certs) if certs else None,
                "flags": ";".join(tr["flags"]),
            }
        lines.append(",".join(_csv_cell(cells[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def table_to_plotdata(table: dict) -> dict:
    ratio_points = []
    defect_points = []
    defect_idx = 0
    for row in table["rows"]:
        if "error" in row:
            continue
        tr = row["trace"]
        if tr["empirical_ratio"] is not None and tr["n"] >= 2:
            density = tr["m"] / (tr["n"] * (tr["n"] - 1) / 2)
            ratio_points.append([density, tr["empirical_ratio"]])
        probe = tr.get("theorem6_probe")
        if probe and probe.get("per_edge_defects"):
            for d in probe["per_edge_defects"]:
                defect_points.append([defect_idx, d])
                defect_idx += 1
    return {
        "series": [
            {"name": "ratio_vs_density", "points": ratio_points},
            {"name": "theorem6_defect_chain", "points": defect_points},
        ]
    }


def emit_report(table: dict, fmt: str, out_dir: str | Path) -> list[Path]:
    """Write the batch result in one format; returns the created paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out / "report.json"
        path.write_text(json.dumps(table, indent=2, sort_keys=True) + "\n")
        return [path]
    if fmt == "csv":
        path = out / "report.csv"
        path.write_text(table_to_csv(table))
        return [path]
    if fmt == "plotdata":
        path = out / "plotdata.json"
        path.write_text(json.dumps(table_to_plotdata(table), indent=2) + "\n")
        return [path]
    raise ArgumentError(f"unknown format {fmt!r}; choose json, csv, or plotdata")


def _load_config(path: str | None) -> dict:
    if path is None:
        path = os.environ.get("VCGAP_CONFIG")
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def _print_summary(instance_id: str, trace: RunTrace) -> None:
    ratio = f"{trace.empirical_ratio:.6f}" if trace.empirical_ratio is not None else "unknown"
    opt = trace.oracle_optimum if trace.oracle_optimum is not None else "?"
    flags = ",".join(trace.flags) if trace.flags else "-"
    print(
        f"{instance_id}: n={trace.n} m={trace.m} step={trace.step_taken} "
        f"cover={trace.cover_size} optimum={opt} ratio={ratio} flags={flags}"
    )


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config path (or set VCGAP_CONFIG)")
    common.add_argument("--out", help="output directory for reports and traces")
    common.add_argument("--format", choices=["json", "csv", "plotdata"], default="csv")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--seed", type=int, default=0)

    parser = _Parser(prog="vcgap", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", parents=[common], help="run the pipeline on a DIMACS file")
    p_solve.add_argument("path")
    p_solve.add_argument("--no-exact", action="store_true", help="skip the oracle")
    p_solve.add_argument("--dump-gram", help="write the doubled Gram solution here")

    p_exact = sub.add_parser("exact", parents=[common], help="exact minimum cover of a DIMACS file")
    p_exact.add_argument("path")

    p_base = sub.add_parser("baseline", parents=[common], help="matching 2-approximation of a DIMACS file")
    p_base.add_argument("path")

    p_gen = sub.add_parser("gen", parents=[common], help="generate an instance as DIMACS")
    p_gen.add_argument("--model", required=True, choices=sorted(_MODEL_CODES))
    p_gen.add_argument("--n", type=int, required=True)
    p_gen.add_argument("--parameter", type=float, required=True)

    p_batch = sub.add_parser("batch", parents=[common], help="run a corpus described by a JSON file")
    p_batch.add_argument("spec", help="batch spec JSON with corpus and pipeline settings")

    p_probe = sub.add_parser("probe", parents=[common], help="geometry probes on a saved Gram solution")
    p_probe.add_argument("path", help='JSON: {"graph": {...}, "doubled": bool, "gram": {...}}')
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, ArgumentError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except (ContractViolation, SolverError) as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


def _dispatch(args) -> int:
    cfg_doc = _load_config(args.config)
    cfg = PipelineConfig.from_dict(cfg_doc)

    if args.command == "gen":
        g = generate_graph(args.model, args.n, args.parameter, args.seed)
        text = write_dimacs(g)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            name = f"{args.model}-n{args.n}-p{args.parameter:g}-s{args.seed}.dimacs"
            (out / name).write_text(text)
            print(out / name)
        else:
            sys.stdout.write(text)
        return 0

    if args.command == "batch":
        batch_doc = json.loads(Path(args.spec).read_text())
        if cfg_doc and "pipeline" not in batch_doc:
            batch_doc["pipeline"] = cfg_doc
        jobs = args.jobs if args.jobs > 1 else int(batch_doc.get("jobs", 1))
        table = run_batch(batch_doc, jobs)
        out_dir = args.out or "."
        paths = emit_report(table, args.format, out_dir)
        agg = table["aggregates"]
        print(
            f"batch: {agg['instances']} instances, max ratio "
            f"{agg['max_ratio']}, steps {agg['step_histogram']}, "
            f"certificate violations {agg['certificate_violations']}, "
            f"theorem6 violations {agg['theorem6_violations']}"
        )
        for path in paths:
            print(path)
        return 0

    if args.command == "probe":
        doc = json.loads(Path(args.path).read_text())
        base = graph_from_json(json.dumps(doc["graph"]))
        gram = gram_from_json(json.dumps(doc["gram"]))
        thresholds = Thresholds(**doc["thresholds"]) if "thresholds" in doc else cfg.thresholds
        report = _probe_report(base, gram, bool(doc.get("doubled", False)), thresholds, cfg)
        text = json.dumps(report, indent=2, sort_keys=True)
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            (out / "probe.json").write_text(text + "\n")
            print(out / "probe.json")
        else:
            print(text)
        return 0

    # file-based single-instance commands
    g = parse_dimacs(Path(args.path).read_text())
    instance_id = Path(args.path).stem
    if args.command == "exact":
        result = exact_vc(g, cfg.oracle_budget)
        if result.status != STATUS_OPTIMAL:
            print(f"{instance_id}: unknown (budget exhausted after {result.nodes_explored} nodes)")
            return 0
        print(f"{instance_id}: optimum={result.size} cover={sorted(result.cover.in_cover)}")
        return 0
    if args.command == "baseline":
        trace = two_approx_baseline(g)
        _print_summary(instance_id, trace)
        return 0

    # solve
    trace = mahdis_run(g, cfg)
    oracle = None if args.no_exact else exact_vc(g, cfg.oracle_budget)
    trace = evaluate_ratio(trace, oracle, cfg.tau_ratio)
    _print_summary(instance_id, trace)
    if args.dump_gram and trace.z_sdp_doubled is not None:
        v_half = sorted(set(g.vertices) - set(trace.v_one) - set(trace.v_zero))
        residual = induced_subgraph(g, v_half)
        gram = admm_solve(build_sdp_doubled(duplicate_join(residual)), cfg.sdp)
        doc = {
            "graph": json.loads(residual.to_json()),
            "doubled": True,
            "gram": json.loads(gram.to_json()),
        }
        Path(args.dump_gram).write_text(json.dumps(doc) + "\n")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{instance_id}.trace.json").write_text(
            json.dumps(trace.to_dict(), indent=2, sort_keys=True) + "\n"
        )
    return 0


def _probe_report(base: Graph, gram, doubled: bool, th: Thresholds, cfg: PipelineConfig) -> dict:
    if not doubled:
        emb = extract_vectors(gram, labels=base.vertices, eig_method=cfg.sdp.eig_method)
        report = classify_property1(emb, base.vertices, th)
        eps = build_epsilon_subgraph(emb, base, th)
        return {"property": report.to_dict(), "epsilon_subgraph": eps.to_dict()}
    dg = duplicate_join(base)
    emb = extract_vectors(gram, labels=dg.combined.vertices, eig_method=cfg.sdp.eig_method)
    prime_ids = dg.copy_ids("prime")
    dp_ids = dg.copy_ids("double_prime")
    rep_p = classify_property1(emb, prime_ids, th)
    rep_d = classify_property1(emb, dp_ids, th)
    prime_graph = induced_subgraph(dg.combined, prime_ids)
    eps = build_epsilon_subgraph(emb, prime_graph, th)
    dp_graph = induced_subgraph(dg.combined, dp_ids)
    eps_other = build_epsilon_subgraph(emb, dp_graph, th)
    anchor = cfg.anchor_edge or (eps_other.graph.edges[0] if eps_other.graph.edges else None)
    probe = odd_cycle_probe(emb, eps, anchor, cfg.probe_tol)
    return {
        "property_prime": rep_p.to_dict(),
        "property_double_prime": rep_d.to_dict(),
        "epsilon_subgraph_prime": eps.to_dict(),
        "epsilon_subgraph_double_prime": eps_other.to_dict(),
        "odd_cycle_probe": probe.to_dict(),
    }


if __name__ == "__main__":
    sys.exit(main())
