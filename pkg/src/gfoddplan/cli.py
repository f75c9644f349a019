"""Command-line interface: ``gfoddplan <command> ...``.

Exit codes: 0 success, 2 usage error, and one code per error category
(parse 3, model 4, form 5, resource 6).
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from .errors import GfoddError, ParseError
from .evaluate import eval_brute, eval_ve
from .model import check_assumptions, resolve_domain
from .serialize import focus_from_text, focus_to_text, from_text, state_from_text, to_dot, to_text

EXIT_CODES = {"parse": 3, "model": 4, "form": 5, "resource": 6}


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}") from None


def _vocab(args):
    return resolve_domain(args.domain).vocab if getattr(args, "domain", None) else None


def _edges_text(edges) -> str:
    return " ".join(f"{n}{b}" for n, b in sorted(edges))


# ---------------------------------------------------------------------------
# commands

def cmd_plan(args) -> int:
    from .planner import plan
    from .reduce import all_focus_states
    d = resolve_domain(args.domain)
    focus = None
    if args.focus_shops > 0:
        focus = all_focus_states(d, args.focus_shops)
    result = plan(d, args.iters, focus, node_budget=args.budget)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for i, v in enumerate(result.values):
        name = f"V_{i}.gfodd"
        (out / name).write_text(to_text(v) + "\n", encoding="utf-8")
        files.append(name)
        for schema, q in sorted(result.q[i].items()):
            qname = f"Q_{i}_{schema}.gfodd"
            (out / qname).write_text(to_text(q) + "\n", encoding="utf-8")
            files.append(qname)
    manifest = {
        "domain": d.name,
        "iterations": result.iterations,
        "focus_shops": args.focus_shops,
        "discount": str(d.discount),
        "unified_special_arguments": result.unified,
        "files": files,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    schemas = sorted(s.name for s in d.schemas)
    with open(out / "stats.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "nodes_before_reduction", "nodes_after_reduction",
                    "edges_removed", "prefix_length", *[f"q_nodes_{s}" for s in schemas]])
        for st in result.stats:
            w.writerow([st.iteration, st.nodes_before_reduction, st.nodes_after_reduction,
                        st.edges_removed, st.prefix_length, *[st.q_nodes[s] for s in schemas]])
    # wall-clock numbers live in their own file so the rest is reproducible byte for byte
    with open(out / "timings.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "seconds"])
        for st in result.stats:
            w.writerow([st.iteration, f"{st.seconds:.3f}"])
    for st in result.stats:
        print(f"V_{st.iteration}: {st.nodes_after_reduction} nodes "
              f"({st.nodes_before_reduction} before reduction), prefix {st.prefix_length}")
    print(f"wrote {len(files)} diagrams to {out}")
    return 0


def cmd_eval(args) -> int:
    vocab = _vocab(args)
    f = from_text(_read(args.diagram), vocab)
    s = state_from_text(_read(args.state), vocab)
    r = eval_ve(f, s) if args.method == "ve" else eval_brute(f, s)
    print(f"value: {r.value}")
    print("winner: " + " ".join(f"{v.name}={c.name}" for v, c in r.winner.items()))
    print(f"edges: {_edges_text(r.edges)}")
    if args.rows:
        print(f"rows: {r.rows}")
    return 0


def cmd_reduce(args) -> int:
    from .reduce import all_focus_states, reduce_with_report
    vocab = _vocab(args)
    f = from_text(_read(args.diagram), vocab)
    if args.focus is not None:
        states = focus_from_text(_read(args.focus), vocab)
    elif args.domain is not None:
        states = all_focus_states(resolve_domain(args.domain), args.focus_shops)
    else:
        print("reduce: give --focus FILE or --domain with --focus-shops", file=sys.stderr)
        return 2
    g, removed = reduce_with_report(f, states)
    text = to_text(g) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    print(f"removed edges: {_edges_text(removed)}", file=sys.stderr)
    return 0


def _load_plan(d, directory: Path):
    """Final value function and Q map from a ``plan`` output directory."""
    from .planner import post_decision
    manifest = json.loads(_read(str(directory / "manifest.json")))
    k = manifest["iterations"]
    vocab = d.vocab
    q = {s.name: from_text(_read(str(directory / f"Q_{k}_{s.name}.gfodd")), vocab) for s in d.schemas}
    prev = from_text(_read(str(directory / f"V_{k - 1}.gfodd")), vocab)
    return q, post_decision(prev, d, manifest.get("unified_special_arguments", False))


def cmd_simulate(args) -> int:
    from .simulate import Environment, GreedyPolicy, RandomPolicy, TabularPolicy, evaluate_policy
    d = resolve_domain(args.domain)
    if args.policy == "random":
        policy = RandomPolicy(d)
    elif args.policy == "oracle":
        from .oracle import build_ground, exact_vi
        mdp = build_ground(d, args.shops)
        policy = TabularPolicy(mdp, exact_vi(mdp, args.tol).policy)
    else:
        q, after = _load_plan(d, Path(args.policy))
        policy = GreedyPolicy(d, q, after)
    stats = evaluate_policy(d, policy, args.shops, args.instances, args.runs, args.horizon,
                            seed=args.seed, env=Environment(d))
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["instance", "run", "return"])
            for i, row in enumerate(stats.returns):
                for r, x in enumerate(row):
                    w.writerow([i, r, repr(float(x))])
    print(f"mean {stats.mean:.6f} std {stats.std:.6f} "
          f"({args.instances} instances x {args.runs} runs, horizon {args.horizon}, seed {args.seed})")
    return 0


def cmd_oracle(args) -> int:
    from .oracle import build_ground, exact_vi, tabulate
    d = resolve_domain(args.domain)
    mdp = build_ground(d, args.shops)
    vi = exact_vi(mdp, args.tol)
    compare = [(Path(p).stem, from_text(_read(p), d.vocab)) for p in args.compare]
    tables = [(name, tabulate(f, mdp)) for name, f in compare]
    rows = []
    for i, s in enumerate(mdp.states):
        name, a = mdp.actions[vi.policy[i]]
        row = [i, repr(float(vi.values[i])), f"{name}({','.join(a)})"]
        for _, t in tables:
            row += [str(t[i]), "yes" if float(t[i]) <= vi.values[i] + 1e-6 else "no"]
        rows.append(row)
    header = ["state", "v_star", "policy"]
    for name, _ in tables:
        header += [name, f"{name}_le_v_star"]
    out = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if args.out:
            out.close()
    if args.deltas:
        with open(args.deltas, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iteration", "sup_norm_change"])
            for k, delta in enumerate(vi.deltas, start=1):
                w.writerow([k, repr(delta)])
    print(f"{mdp.num_states} states, {len(mdp.actions)} actions, "
          f"converged in {vi.iterations} iterations", file=sys.stderr)
    return 0


def cmd_check(args) -> int:
    d = resolve_domain(args.domain)
    for line in check_assumptions(d).lines():
        print(line)
    return 0


def cmd_export_dot(args) -> int:
    f = from_text(_read(args.diagram), _vocab(args))
    text = to_dot(f)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_focus(args) -> int:
    from .reduce import all_focus_states
    d = resolve_domain(args.domain)
    sys.stdout.write(focus_to_text(all_focus_states(d, args.shops), [s.name for s in d.vocab.sorts]))
    return 0


# ---------------------------------------------------------------------------

def _positive_fraction(text: str) -> float:
    try:
        x = float(Fraction(text))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if x <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gfoddplan", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=1,
                   help="worker cap (the current commands run in a single process)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("plan", help="run symbolic value iteration")
    c.add_argument("domain", help="built-in name (ic, aic) or domain file")
    c.add_argument("--iters", type=int, default=4)
    c.add_argument("--focus-shops", type=int, default=2,
                   help="reduce on all states with this many shops (0 disables reduction)")
    c.add_argument("--budget", type=int, default=50_000, help="node budget per iteration")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_plan)

    c = sub.add_parser("eval", help="evaluate a diagram on a state")
    c.add_argument("diagram")
    c.add_argument("state")
    c.add_argument("--method", choices=["ve", "brute"], default="ve")
    c.add_argument("--domain", help="check names against this domain's vocabulary")
    c.add_argument("--rows", action="store_true", help="also print the work counter")
    c.set_defaults(func=cmd_eval)

    c = sub.add_parser("reduce", help="model-checking reduction on a focus set")
    c.add_argument("diagram")
    c.add_argument("--focus", help="file with (focus STATE...)")
    c.add_argument("--domain", help="use all states of this domain as the focus set")
    c.add_argument("--focus-shops", type=int, default=2)
    c.add_argument("--out")
    c.set_defaults(func=cmd_reduce)

    c = sub.add_parser("simulate", help="roll out a policy")
    c.add_argument("domain")
    c.add_argument("--policy", required=True, help="plan output directory, 'random' or 'oracle'")
    c.add_argument("--shops", type=int, default=4)
    c.add_argument("--instances", type=int, default=15)
    c.add_argument("--runs", type=int, default=30)
    c.add_argument("--horizon", type=int, default=30)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=_positive_fraction, default=1e-9)
    c.add_argument("--out", help="CSV of per-rollout returns")
    c.set_defaults(func=cmd_simulate)

    c = sub.add_parser("oracle", help="exact value iteration on the ground instance")
    c.add_argument("domain")
    c.add_argument("--shops", type=int, default=2)
    c.add_argument("--tol", type=_positive_fraction, default=1e-9)
    c.add_argument("--compare", nargs="*", default=[], help="diagrams to tabulate against V*")
    c.add_argument("--out", help="CSV report (default stdout)")
    c.add_argument("--deltas", help="CSV of per-iteration sup-norm changes")
    c.set_defaults(func=cmd_oracle)

    c = sub.add_parser("check", help="report which service-domain assumptions hold")
    c.add_argument("domain")
    c.set_defaults(func=cmd_check)

    c = sub.add_parser("export-dot", help="Graphviz rendering of a diagram")
    c.add_argument("diagram")
    c.add_argument("--domain")
    c.add_argument("--out")
    c.set_defaults(func=cmd_export_dot)

    c = sub.add_parser("focus", help="write all states of a domain at a given size")
    c.add_argument("domain")
    c.add_argument("--shops", type=int, default=2)
    c.set_defaults(func=cmd_focus)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except GfoddError as e:
        print(f"error [{e.category}]: {e}", file=sys.stderr)
        return EXIT_CODES.get(e.category, 1)
    except (ValueError, KeyError) as e:
        print(f"error [model]: {e}", file=sys.stderr)
        return EXIT_CODES["model"]


if __name__ == "__main__":
    sys.exit(main())
