"""Batch command-line front end.

Subcommands tie the builders, passes, proof generators, checker, and oracles
together over the canonical file formats.  Every run writes a manifest JSON
beside its primary output recording the command, inputs, parameters, outputs,
metrics, and verdicts; timings are kept in a separate key so golden
comparisons can ignore them.

Exit codes: 0 all verdicts ok, 1 a verdict failed, 2 usage or format errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import balance as bal
from . import detbuilder, formats, homogenize as hom, passes
from .circuit import Circuit, CircuitError, CircuitFormatError, decode, depth, encode, to_dot
from .evaluate import (DivisionByZero, TermCapExceeded, bareiss_det,
                       char_poly_oracle, eval_int, eval_rat, expand)
from .proof import checker as proof_checker
from .proof import generators, io as proof_io, transforms
from .proof.balance import balance_proof


class CliError(Exception):
    pass


def _read_circuit(path: str) -> Circuit:
    return decode(Path(path).read_bytes())


def _write_circuit(path: str, c: Circuit):
    Path(path).write_bytes(encode(c))


def _read_matrix(path: str):
    return formats.decode_matrix(Path(path).read_text())


def _write_manifest(primary_output, command, inputs, parameters, outputs,
                    metrics, verdicts, started):
    manifest = {
        "command": command,
        "inputs": sorted(inputs),
        "parameters": {k: parameters[k] for k in sorted(parameters)},
        "outputs": sorted(outputs),
        "metrics": {k: metrics[k] for k in sorted(metrics)},
        "verdicts": {k: verdicts[k] for k in sorted(verdicts)},
        "timings": {"seconds": round(time.time() - started, 3)},
    }
    path = Path(primary_output).with_suffix(Path(primary_output).suffix + ".manifest.json") \
        if primary_output else None
    if path is not None:
        path.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n")
    return manifest


def _circuit_metrics(c: Circuit) -> dict:
    return {"size": c.size, "depth": depth(c), "outputs": len(c.outputs),
            "vars": c.var_count, "inv_gates": c.inv_count()}


def _annotation_file(path: str, ann) -> None:
    rows = [f"ann {len(ann.degree)} {ann.mode}"]
    for nid in sorted(ann.degree):
        rows.append(f"{nid} {ann.degree[nid]}")
    Path(path).write_text("\n".join(rows) + "\n")


def _read_annotation(path: str):
    from .circuit import DegreeAnnotation
    rows = [r for r in Path(path).read_text().splitlines() if r.strip()]
    head = rows[0].split()
    deg = {}
    for r in rows[1:]:
        a, b = r.split()
        deg[int(a)] = int(b)
    return DegreeAnnotation(head[2] if len(head) > 2 else "degubPrime", deg)


def cmd_build(args, started) -> int:
    n = args.n
    if args.what == "det-inv":
        layout = detbuilder.triangular_layout(n) if args.layout == "triangular" \
            else detbuilder.full_layout(n)
        c = detbuilder.build_det_inv(layout)
    elif args.what == "inverse":
        c = detbuilder.build_inverse(n)
    elif args.what == "product":
        c = detbuilder.build_product_layout(n)
    elif args.what == "taydet":
        c = passes.build_taydet(n)
    elif args.what == "taydet-sharp":
        c = passes.build_taydet_sharp(n)
    elif args.what == "taydet-sharp-prime":
        c, ann = bal.build_taydet_sharp_prime(n)
        _annotation_file(args.output + ".ann", ann)
    else:  # det-balanced
        c = bal.build_det_balanced(n)
    _write_circuit(args.output, c)
    outputs = [args.output]
    if args.dot:
        Path(args.dot).write_text(to_dot(c))
        outputs.append(args.dot)
    _write_manifest(args.output, f"build {args.what}", [], {"n": n},
                    outputs, _circuit_metrics(c), {"built": "ok"}, started)
    return 0


def cmd_pass(args, started) -> int:
    c = _read_circuit(args.input)
    outputs = [args.output]
    metrics = {"input_size": c.size, "input_depth": depth(c)}
    params = {}
    if args.what == "num-den":
        num, den = passes.num_den(c)
        pool = num.with_outputs([num.output, den.output])
        _write_circuit(args.output, pool)
        out = pool
    elif args.what == "normalize-div":
        out = passes.normalize_division(c)
        _write_circuit(args.output, out)
    elif args.what == "coef":
        params = {"k": args.k, "z": args.z}
        out = passes.coef(c, args.k, args.z)
        _write_circuit(args.output, out)
    elif args.what == "inv-k":
        params = {"k": args.k}
        out = passes.inv_k(c, args.k)
        _write_circuit(args.output, out)
    elif args.what == "simplify-zeros":
        out, trace = passes.simplify_zeros(c)
        _write_circuit(args.output, out)
        Path(args.output + ".trace").write_text(formats.encode_trace(trace))
        outputs.append(args.output + ".trace")
        metrics["rewrites"] = len(trace)
    elif args.what == "homogenize":
        params = {"d": args.d, "witness": args.witness, "prime": args.prime}
        witness = hom.exact_degree_witness(c) if args.witness else None
        dec = hom.homogenize(c, args.d, witness=witness,
                             constants_as_degree_one=args.prime)
        _write_circuit(args.output, dec.circuit)
        _annotation_file(args.output + ".ann", dec.annotation)
        outputs.append(args.output + ".ann")
        out = dec.circuit
        metrics["components"] = dec.d + 1
    elif args.what == "eliminate-div":
        params = {"k": args.k, "rho": args.rho}
        rho = formats.decode_assignment(Path(args.rho).read_text())
        out = passes.eliminate_division(c, rho, args.k)
        _write_circuit(args.output, out)
    else:  # balance
        ann = _read_annotation(args.ann) if args.ann else bal.exact_degub_prime(c)
        out = bal.balance_outputs(c, ann)
        _write_circuit(args.output, out)
        report = args.output + ".report.tsv"
        d = max((ann or bal.exact_degub_prime(c)).degree.values(), default=0)
        with open(report, "w") as fh:
            fh.write("circuit\ts\td\tdepth_before\tdepth_after\tsize_after\n")
            fh.write(f"{Path(args.input).name}\t{c.size}\t{d}\t{depth(c)}\t"
                     f"{depth(out)}\t{out.size}\n")
        outputs.append(report)
    metrics.update({f"output_{k}": v for k, v in _circuit_metrics(out).items()})
    _write_manifest(args.output, f"pass {args.what}", [args.input], params,
                    outputs, metrics, {"pass": "ok"}, started)
    return 0


def cmd_eval(args, started) -> int:
    c = _read_circuit(args.input)
    if args.matrix:
        m = _read_matrix(args.matrix)
        assign = formats.matrix_assignment(m)
        src = args.matrix
    else:
        assign = formats.decode_assignment(Path(args.assign).read_text())
        src = args.assign
    for j in range(c.var_count):
        assign.setdefault(j, 0)
    try:
        if c.is_division_free():
            values = eval_int(c, assign)
        else:
            values = eval_rat(c, assign)
    except DivisionByZero as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    for v in values:
        print(v)
    if args.output:
        Path(args.output).write_text("\n".join(str(v) for v in values) + "\n")
        _write_manifest(args.output, "eval", [args.input, src], {},
                        [args.output], {"outputs": len(values)},
                        {"eval": "ok"}, started)
    return 0


def cmd_oracle(args, started) -> int:
    if args.what == "det":
        m = _read_matrix(args.matrix)
        print(bareiss_det(m))
        return 0
    if args.what == "charpoly":
        m = _read_matrix(args.matrix)
        print(" ".join(str(c) for c in char_poly_oracle(m)))
        return 0
    # expand
    c = _read_circuit(args.input)
    try:
        polys = expand(c, args.cap)
    except TermCapExceeded as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    text = "".join(formats.encode_poly(p) for p in polys)
    if args.output:
        Path(args.output).write_text(text)
        _write_manifest(args.output, "oracle expand", [args.input],
                        {"cap": args.cap}, [args.output],
                        {"terms": sum(len(p.terms) for p in polys)},
                        {"expand": "ok"}, started)
    else:
        print(text, end="")
    return 0


def _identity_rho(proof) -> dict:
    # identity-matrix assignment over the variables of the endpoint equations
    import math
    nv = max(max(l.lhs.var_count, l.rhs.var_count) for l in proof.lines)
    n = math.isqrt(nv)
    if n * n != nv:
        n = math.isqrt(nv) + 1
    rho = {}
    for j in range(nv):
        i, jj = divmod(j, n)
        rho[j] = 1 if i == jj else 0
    return rho


def cmd_prove(args, started) -> int:
    n = args.n
    if args.what == "xxinv":
        p = generators.prove_xxinv(n)
    elif args.what == "triangular":
        p = generators.prove_triangular(n)
    else:  # pipeline-identity2
        p0 = generators.prove_triangular(n)
        p1 = transforms.normalize_proof(p0)
        rho = {j: 1 if j // n == j % n else 0 for j in range(n * n)}
        p2 = transforms.eliminate_division_proof(p1, rho, 2 * n)
        hs = transforms.homogenize_proof(p2, n)
        outputs = []
        for i, hp in enumerate(hs):
            path = f"{args.output}.hom{i}"
            Path(path).write_bytes(proof_io.encode_proof(hp))
            outputs.append(path)
        Path(args.output).write_bytes(proof_io.encode_proof(p2))
        _write_manifest(args.output, "prove pipeline-identity2", [], {"n": n},
                        [args.output] + outputs,
                        {"lines": len(p2.lines), "hom_lines": len(hs[0].lines)},
                        {"generated": "ok"}, started)
        return 0
    Path(args.output).write_bytes(proof_io.encode_proof(p))
    _write_manifest(args.output, f"prove {args.what}", [], {"n": n},
                    [args.output], {"lines": len(p.lines)},
                    {"generated": "ok"}, started)
    return 0


def cmd_transform_proof(args, started) -> int:
    p = proof_io.decode_proof(Path(args.input).read_bytes())
    if args.what == "normalize":
        out = transforms.normalize_proof(p)
    elif args.what == "eliminate-div":
        rho = formats.decode_assignment(Path(args.rho).read_text()) if args.rho \
            else _identity_rho(p)
        out = transforms.eliminate_division_proof(p, rho, args.k)
    elif args.what == "homogenize":
        views = transforms.homogenize_proof(p, args.d)
        outputs = []
        for i, hp in enumerate(views):
            path = f"{args.output}.hom{i}"
            Path(path).write_bytes(proof_io.encode_proof(hp))
            outputs.append(path)
        _write_manifest(args.output, "transform-proof homogenize",
                        [args.input], {"d": args.d}, outputs,
                        {"lines": len(views[0].lines)}, {"transform": "ok"}, started)
        return 0
    else:  # balance
        out = balance_proof(p)
    Path(args.output).write_bytes(proof_io.encode_proof(out))
    _write_manifest(args.output, f"transform-proof {args.what}", [args.input],
                    {k: getattr(args, k) for k in ("k",) if hasattr(args, k) and getattr(args, k) is not None},
                    [args.output], {"lines": len(out.lines)}, {"transform": "ok"}, started)
    return 0


def cmd_check(args, started) -> int:
    p = proof_io.decode_proof(Path(args.input).read_bytes())
    verdict = proof_checker.check(p, args.mode, trials=args.trials)
    if verdict.ok:
        print(f"ok ({len(p.lines)} lines, mode={args.mode})")
        return 0
    print(f"FAIL at line {verdict.line}: {verdict.reason}")
    return 1


def cmd_stats(args, started) -> int:
    c = _read_circuit(args.input)
    metrics = _circuit_metrics(c)
    kinds = {}
    for node in c.nodes:
        kinds[node[0]] = kinds.get(node[0], 0) + 1
    rows = ["metric\tvalue"]
    for k in sorted(metrics):
        rows.append(f"{k}\t{metrics[k]}")
    for k in sorted(kinds):
        rows.append(f"count_{k}\t{kinds[k]}")
    text = "\n".join(rows) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        print(text, end="")
    if args.plot:
        _render_stats_figure(args.plot, Path(args.input).name, metrics, kinds)
    if args.output:
        outs = [args.output] + ([args.plot] if args.plot else [])
        _write_manifest(args.output, "stats", [args.input], {}, outs,
                        metrics, {"stats": "ok"}, started)
    return 0


def _render_stats_figure(path: str, name: str, metrics: dict, kinds: dict):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    labels = sorted(kinds)
    ax1.bar(range(len(labels)), [kinds[k] for k in labels], color="#4878a8")
    ax1.set_xticks(range(len(labels)))
    ax1.set_xticklabels(labels)
    ax1.set_ylabel("nodes")
    ax1.set_title(f"{name}: node kinds")
    keys = ["size", "depth", "inv_gates"]
    ax2.bar(range(len(keys)), [metrics[k] for k in keys], color="#a85248")
    ax2.set_xticks(range(len(keys)))
    ax2.set_xticklabels(keys)
    ax2.set_yscale("symlog")
    ax2.set_title("shape")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="detcirc",
                                 description="algebraic circuit toolkit for determinant identities")
    sub = ap.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("build", help="construct determinant circuits")
    b.add_argument("what", choices=["det-inv", "inverse", "product", "taydet",
                                    "taydet-sharp", "taydet-sharp-prime", "det-balanced"])
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--layout", choices=["full", "triangular"], default="full")
    b.add_argument("-o", "--output", required=True)
    b.add_argument("--dot", help="also write a GraphViz rendering")
    b.set_defaults(func=cmd_build)

    p = sub.add_parser("pass", help="run a circuit transformation pass")
    p.add_argument("what", choices=["num-den", "normalize-div", "coef", "inv-k",
                                    "homogenize", "simplify-zeros", "eliminate-div", "balance"])
    p.add_argument("-i", "--input", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--z", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--witness", action="store_true")
    p.add_argument("--prime", action="store_true",
                   help="degubPrime mode: constants count as degree 1")
    p.add_argument("--rho", help="assignment file for the shift")
    p.add_argument("--ann", help="annotation side-file for balance")
    p.set_defaults(func=cmd_pass)

    e = sub.add_parser("eval", help="exact evaluation")
    e.add_argument("-i", "--input", required=True)
    g = e.add_mutually_exclusive_group(required=True)
    g.add_argument("--matrix")
    g.add_argument("--assign")
    e.add_argument("-o", "--output")
    e.set_defaults(func=cmd_eval)

    o = sub.add_parser("oracle", help="brute-force oracles")
    o.add_argument("what", choices=["det", "charpoly", "expand"])
    o.add_argument("--matrix")
    o.add_argument("-i", "--input")
    o.add_argument("--cap", type=int, default=200_000)
    o.add_argument("-o", "--output")
    o.set_defaults(func=cmd_oracle)

    pr = sub.add_parser("prove", help="generate proof sequences")
    pr.add_argument("what", choices=["xxinv", "triangular", "pipeline-identity2"])
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("-o", "--output", required=True)
    pr.set_defaults(func=cmd_prove)

    tp = sub.add_parser("transform-proof", help="proof-level transformations")
    tp.add_argument("what", choices=["normalize", "eliminate-div", "homogenize", "balance"])
    tp.add_argument("-i", "--input", required=True)
    tp.add_argument("-o", "--output", required=True)
    tp.add_argument("--k", type=int)
    tp.add_argument("--d", type=int)
    tp.add_argument("--rho")
    tp.set_defaults(func=cmd_transform_proof)

    ck = sub.add_parser("check", help="check a proof")
    ck.add_argument("-i", "--input", required=True)
    ck.add_argument("--mode", choices=["syntactic", "semantic"], default="syntactic")
    ck.add_argument("--trials", type=int, default=20)
    ck.set_defaults(func=cmd_check)

    st = sub.add_parser("stats", help="circuit metrics as a delimited report")
    st.add_argument("-i", "--input", required=True)
    st.add_argument("-o", "--output")
    st.add_argument("--plot", help="render the report as a figure (PNG/PDF)")
    st.set_defaults(func=cmd_stats)
    return ap


def main(argv=None) -> int:
    ap = make_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    started = time.time()
    try:
        return args.func(args, started)
    except (CircuitFormatError, CircuitError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
