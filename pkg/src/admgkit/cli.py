"""Command-line interface.

Exit codes: 0 when a query is answered or a check passes, 1 when a check
finds violations, 2 on usage or input errors.  ``--json`` wraps every
result in ``{"ok": ..., "result": ..., "violations": [...]}``.  Text output
sorts all vertex sets lexicographically.
"""

import argparse
import json
import sys
from pathlib import Path

from . import causal_sim, dist_core, graph_core, graph_transform, markov_checks, walk_algebra
from .dist_core import DistributionError
from .graph_core import GraphError

MAX_PRINTED_VIOLATIONS = 10


def _split(value: str) -> list:
    return [v for v in value.split(",") if v]


def _parse_assignments(value: str) -> dict:
    out = {}
    for part in _split(value):
        if "=" not in part:
            raise GraphError(f"expected NAME=VALUE, got {part!r}")
        name, _, val = part.partition("=")
        out[name] = int(val)
    return out


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _load_graph(path: str):
    return graph_core.parse_graph(_read(path))


def _load_table(path: str):
    return dist_core.table_from_json(_read(path))


def _emit(args, text_lines, result, ok=True, violations=()):
    if args.json:
        doc = {"ok": ok, "result": result,
               "violations": [v.to_json() for v in violations]}
        print(json.dumps(doc, indent=2))
    else:
        for line in text_lines:
            print(line)
    return 0 if ok else 1


def _emit_report(args, report):
    lines = [f"model: {report.model}",
             f"passed: {str(report.passed).lower()}",
             f"skipped slices: {report.skipped_slices}",
             f"tol: {report.tol}"]
    for v in report.violations[:MAX_PRINTED_VIOLATIONS]:
        lines.append(f"violation: {v.constraint} at "
                     f"{json.dumps(v.witness, sort_keys=True, default=str)}")
    extra = len(report.violations) - MAX_PRINTED_VIOLATIONS
    if extra > 0:
        lines.append(f"... and {extra} more violations")
    return _emit(args, lines, report.to_json(), ok=report.passed,
                 violations=report.violations)


def _sorted_line(label, vs):
    return f"{label}: " + " ".join(sorted(vs))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="admg",
                                description="Queries and model checks for acyclic "
                                            "directed mixed graphs.")
    p.add_argument("--json", action="store_true", help="emit a JSON envelope")
    sub = p.add_subparsers(dest="command", required=True)

    def graph_cmd(name, **kwargs):
        sp = sub.add_parser(name, **kwargs)
        sp.add_argument("-g", "--graph", required=True, help="graph file")
        return sp

    sp = graph_cmd("msep", help="m-separation query")
    sp.add_argument("--from", dest="sources", required=True)
    sp.add_argument("--to", dest="targets", required=True)
    sp.add_argument("--given", default="")
    sp.add_argument("--oracle", action="store_true",
                    help="also run the walk-enumeration oracle")

    for name, helptext in (("district", "district of a vertex"),
                           ("mb", "Markov boundary"),
                           ("mbg", "Markov background")):
        sp = graph_cmd(name, help=helptext)
        sp.add_argument("-v", "--vertex", required=True)

    sp = graph_cmd("ancestral", help="ancestral closure of a set")
    sp.add_argument("--set", dest="vertex_set", required=True)

    graph_cmd("classify", help="graph classes")

    sp = graph_cmd("marginalize", help="latent projection onto a subset")
    sp.add_argument("--keep", required=True)

    sp = graph_cmd("expand", help="latent expansion")
    sp.add_argument("--kind", choices=("pairwise", "clique", "noise"), required=True)
    sp.add_argument("--maximal", action="store_true",
                    help="clique expansion over maximal cliques only")

    sp = graph_cmd("swig", help="single-world intervention graph")
    sp.add_argument("--on", required=True)

    graph_cmd("augment", help="augmented (moralized) undirected graph")
    graph_cmd("fixable", help="all fixable sets with canonical orders")

    sp = graph_cmd("fix", help="fix a sequence of vertices")
    sp.add_argument("--seq", required=True)

    sp = graph_cmd("check", help="statistical model membership check")
    sp.add_argument("model", choices=("gm", "um", "lm", "f", "ef", "a", "nm"))
    sp.add_argument("-d", "--dist", required=True, help="distribution file")
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.add_argument("--order", default=None, help="topological order for lm")

    sp = graph_cmd("gen-system", help="seeded random equation system")
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--noise-card", type=int, default=2)
    sp.add_argument("--outcome-card", type=int, default=2)
    sp.add_argument("-o", "--output", default=None)

    sp = sub.add_parser("po", help="potential-outcome distribution")
    sp.add_argument("-s", "--system", required=True)
    sp.add_argument("--do", default="", help="e.g. B=1,C=0")

    sp = sub.add_parser("verify", help="causal-model property verification")
    sp.add_argument("what", choices=("fixing", "consistency", "swig-markov"))
    sp.add_argument("-s", "--system", required=True)
    sp.add_argument("--set", dest="vertex_set", default="",
                    help="fixing: the set to fix")
    sp.add_argument("--assign", default="", help="fixing: one slice, e.g. V3=0")
    sp.add_argument("--do", default="", help="swig-markov: intervention, e.g. V3=0")
    sp.add_argument("--tol", type=float, default=1e-9)

    sp = sub.add_parser("relations", help="model-relation harness over a corpus")
    sp.add_argument("--corpus-dir", required=True,
                    help="directory of <stem>.g and <stem>.dist pairs")
    sp.add_argument("--tol", type=float, default=1e-9)
    return p


def _graph_lines(g, comments=()):
    return list(comments) + graph_core.serialize_graph(g).splitlines()


def _run(args) -> int:
    cmd = args.command
    if cmd == "msep":
        g = _load_graph(args.graph)
        J = frozenset(_split(args.sources))
        K = frozenset(_split(args.targets))
        L = frozenset(_split(args.given))
        connected = walk_algebra.m_connected(g, J, K, L)
        result = {"m_separated": not connected}
        lines = [f"m-separated: {str(not connected).lower()}"]
        if args.oracle:
            oracle = walk_algebra.m_connected_oracle(g, J, K, L)
            result["oracle_agrees"] = oracle == connected
            lines.append(f"oracle agrees: {str(oracle == connected).lower()}")
        return _emit(args, lines, result)
    if cmd in ("district", "mb", "mbg"):
        g = _load_graph(args.graph)
        fn = {"district": walk_algebra.district,
              "mb": walk_algebra.markov_boundary,
              "mbg": walk_algebra.markov_background}[cmd]
        out = fn(g, args.vertex)
        label = {"district": "district", "mb": "markov boundary",
                 "mbg": "markov background"}[cmd]
        return _emit(args, [_sorted_line(label, out)], {label.replace(" ", "_"): sorted(out)})
    if cmd == "ancestral":
        g = _load_graph(args.graph)
        out = walk_algebra.ancestral_closure(g, _split(args.vertex_set))
        return _emit(args, [_sorted_line("ancestral closure", out)],
                     {"ancestral_closure": sorted(out)})
    if cmd == "classify":
        g = _load_graph(args.graph)
        out = graph_core.classify(g)
        return _emit(args, [_sorted_line("classes", out)], {"classes": sorted(out)})
    if cmd == "marginalize":
        g = _load_graph(args.graph)
        out = graph_transform.marginalize(g, _split(args.keep))
        return _emit(args, _graph_lines(out), {"graph": graph_core.serialize_graph(out)})
    if cmd == "expand":
        g = _load_graph(args.graph)
        if args.kind == "pairwise":
            out = graph_transform.expand_pairwise(g)
        elif args.kind == "clique":
            out = graph_transform.expand_clique(g, maximal=args.maximal)
        else:
            out = graph_transform.expand_noise(g)
        return _emit(args, _graph_lines(out), {"graph": graph_core.serialize_graph(out)})
    if cmd == "swig":
        g = _load_graph(args.graph)
        I = _split(args.on)
        out = graph_transform.swig(g, I)
        labels = graph_transform.swig_display_labels(g, I)
        comment = "# swig do(" + ",".join(sorted(I)) + "); display labels: " + \
            " ".join(labels[v] for v in g.vertices)
        return _emit(args, _graph_lines(out, [comment]),
                     {"graph": graph_core.serialize_graph(out),
                      "display_labels": labels})
    if cmd == "augment":
        g = _load_graph(args.graph)
        u = graph_transform.augment(g)
        edges = sorted(sorted(e) for e in u.edges)
        lines = ["vertices: " + " ".join(u.vertices)]
        lines += [f"{a} -- {b}" for a, b in edges]
        return _emit(args, lines, {"vertices": list(u.vertices), "edges": edges})
    if cmd == "fixable":
        g = _load_graph(args.graph)
        sets = graph_transform.fixable_sets(g)
        lines = []
        result = []
        for S, order in sets.items():
            members = ",".join(sorted(S))
            lines.append(f"{{{members}}} via {','.join(order)}" if S else "{}")
            result.append({"set": sorted(S), "order": list(order)})
        return _emit(args, lines, {"fixable_sets": result})
    if cmd == "fix":
        g = _load_graph(args.graph)
        c = graph_core.CondADMG(g)
        for v in _split(args.seq):
            c = graph_transform.fix_graph(c, v)
        comments = ["# fixed: " + " ".join(sorted(c.fixed)),
                    "# random: " + " ".join(sorted(c.random))]
        return _emit(args, _graph_lines(c.graph, comments),
                     {"graph": graph_core.serialize_graph(c.graph),
                      "fixed": sorted(c.fixed)})
    if cmd == "check":
        g = _load_graph(args.graph)
        t = _load_table(args.dist)
        model = args.model
        if model == "lm":
            order = _split(args.order) if args.order else None
            report = markov_checks.check_lm(g, t, order, args.tol)
        else:
            fn = {"gm": markov_checks.check_gm,
                  "um": markov_checks.check_um,
                  "f": markov_checks.check_factorization,
                  "ef": markov_checks.check_ef,
                  "a": markov_checks.check_augmentation,
                  "nm": markov_checks.check_nm}[model]
            report = fn(g, t, args.tol)
        return _emit_report(args, report)
    if cmd == "gen-system":
        g = _load_graph(args.graph)
        s = causal_sim.generate_system(g, seed=args.seed,
                                       noise_card=args.noise_card,
                                       outcome_card=args.outcome_card)
        doc = causal_sim.system_to_json(s)
        if args.output:
            Path(args.output).write_text(doc, encoding="utf-8")
            return _emit(args, [f"wrote {args.output}"], {"written": args.output})
        return _emit(args, [doc.rstrip("\n")], json.loads(doc))
    if cmd == "po":
        s = causal_sim.system_from_json(_read(args.system))
        do = _parse_assignments(args.do)
        table = causal_sim.po_distribution(s, do)
        lines = []
        for idx in range(table.space.size):
            cell = table.space.assignment(idx)
            key = " ".join(f"{n}={v}" for n, v in zip(table.space.names, cell))
            lines.append(f"{key}: {table.probs[idx]}")
        return _emit(args, lines, json.loads(dist_core.table_to_json(table)))
    if cmd == "verify":
        s = causal_sim.system_from_json(_read(args.system))
        if args.what == "consistency":
            report = causal_sim.verify_consistency(s)
        elif args.what == "fixing":
            assignment = _parse_assignments(args.assign) if args.assign else None
            report = causal_sim.verify_fixing_identity(
                s, _split(args.vertex_set), assignment)
        else:
            report = causal_sim.verify_swig_markov(
                s, _parse_assignments(args.do), args.tol)
        return _emit_report(args, report)
    if cmd == "relations":
        corpus = []
        root = Path(args.corpus_dir)
        for gpath in sorted(root.glob("*.g")):
            dpath = gpath.with_suffix(".dist")
            if not dpath.exists():
                raise DistributionError(f"no distribution file for {gpath.name}")
            corpus.append((gpath.stem,
                           graph_core.parse_graph(gpath.read_text(encoding="utf-8")),
                           dist_core.table_from_json(dpath.read_text(encoding="utf-8"))))
        result = markov_checks.relation_matrix(corpus, args.tol)
        ok = not result["hard_failures"]
        lines = []
        for inst in result["instances"]:
            verdicts = " ".join(f"{m}={'pass' if v else 'fail'}"
                                for m, v in sorted(inst["verdicts"].items()))
            lines.append(f"{inst['name']}: {verdicts}")
        for key, holds in result["implications"].items():
            lines.append(f"implication {key}: {'holds' if holds else 'VIOLATED'}")
        for fail in result["hard_failures"]:
            lines.append(f"hard failure: {fail['implication']} on {fail['instance']}")
        for key, names in result["strictness_witnesses"].items():
            lines.append(f"witness {key}: {len(names)} instance(s)")
        if args.json:
            print(json.dumps({"ok": ok, "result": result, "violations": []}, indent=2))
        else:
            for line in lines:
                print(line)
        return 0 if ok else 1
    raise AssertionError(f"unhandled command {cmd}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _run(args)
    except (GraphError, DistributionError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
