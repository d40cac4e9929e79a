"""Command line interface: TOML problem files in, JSON reports and DOT graphs out.

Exit status is 0 on success, 2 for invalid input, 3 when a budget, cap or
shift window is exhausted and 4 when an internal certificate fails.
"""

import argparse
import json
import re
import sys
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__
from .algebra import Quiver, build_algebra, canonical_module, interval_module
from .context import expr, make_context, subcat
from .errors import ParseError, SiltkitError, ValidationError
from .modules import indecomposable_summands

SCHEMA = 1

DEMO_SPEC = """
[quiver]
vertices = ["1", "2", "3", "4"]
arrows = [["a1", "1", "2"], ["a2", "2", "3"], ["a3", "3", "4"]]

[algebra]
field = 2
relations = []

[context]
kind = "ftheta"
dim_cap = 8
shift_window = [-1, 2]

[theta]
objects = ["shift(1, interval(1,3))", "simple(1)", "interval(2,3)", "simple(4)"]
"""


@dataclass
class ProblemSpec:
    vertices: list
    arrows: list
    field: int
    relations: list
    kind: str
    dim_cap: int = 8
    shift_window: tuple = (-1, 1)
    theta: list = field(default_factory=list)


# -- parsing --------------------------------------------------------------------------------


def _require(table, key, types, where):
    if key not in table:
        raise ValidationError(f"missing key {key!r} in [{where}]")
    val = table[key]
    if not isinstance(val, types):
        raise ValidationError(f"key {key!r} in [{where}] has the wrong type")
    return val


def parse_spec_text(text):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line = getattr(exc, "lineno", None)
        err = ParseError(f"TOML error: {exc}" if line is None else f"TOML error at line {line}: {exc}")
        err.line = line
        raise err from exc
    for sec in ("quiver", "algebra", "context"):
        if sec not in data:
            raise ValidationError(f"missing section [{sec}]")
    q, a, c = data["quiver"], data["algebra"], data["context"]
    vertices = [str(v) for v in _require(q, "vertices", list, "quiver")]
    arrows = [list(map(str, x)) for x in _require(q, "arrows", list, "quiver")]
    Quiver(vertices, arrows)
    p = _require(a, "field", int, "algebra")
    relations = [str(r) for r in a.get("relations", [])]
    kind = _require(c, "kind", str, "context")
    if kind not in ("module", "derived", "ftheta", "pinfty"):
        raise ValidationError(f"unknown context kind {kind!r}")
    spec = ProblemSpec(vertices, arrows, p, relations, kind, int(c.get("dim_cap", 8)))
    if kind in ("derived", "ftheta"):
        win = c.get("shift_window", [-1, 1])
        if not (isinstance(win, list) and len(win) == 2 and all(isinstance(w, int) for w in win)):
            raise ValidationError("shift_window must be a list of two integers")
        spec.shift_window = (win[0], win[1])
    if kind == "ftheta":
        if "theta" not in data:
            raise ValidationError("an ftheta context requires a [theta] section")
        spec.theta = [str(x) for x in _require(data["theta"], "objects", list, "theta")]
    return spec


def parse_spec(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    return parse_spec_text(text)


_TOKEN = re.compile(r"\s*(?:(-?\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\"[^\"]*\"|'[^']*')|(.))")


def _tokens(text):
    out = []
    for m in _TOKEN.finditer(text):
        num, name, quoted, ch = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        elif quoted is not None:
            out.append(("name", quoted[1:-1]))
        elif ch is not None and ch.strip():
            out.append(("sym", ch))
    return out


def parse_object(text):
    """Parse an object expression into a nested tuple ``(fn, args)``."""
    toks = _tokens(text)
    pos = 0

    def atom():
        nonlocal pos
        if pos >= len(toks):
            raise ParseError(f"unexpected end of object expression {text!r}")
        kind, val = toks[pos]
        pos += 1
        if kind == "num":
            return ("num", int(val))
        if kind != "name":
            raise ParseError(f"unexpected {val!r} in object expression {text!r}")
        if pos < len(toks) and toks[pos] == ("sym", "("):
            pos += 1
            args = []
            if toks[pos:pos + 1] != [("sym", ")")]:
                while True:
                    args.append(atom())
                    if pos < len(toks) and toks[pos] == ("sym", ","):
                        pos += 1
                        continue
                    break
            if pos >= len(toks) or toks[pos] != ("sym", ")"):
                raise ParseError(f"missing ')' in object expression {text!r}")
            pos += 1
            return (val, args)
        return ("name", val)

    tree = atom()
    if pos != len(toks):
        raise ParseError(f"trailing input in object expression {text!r}")
    return tree


def _vertex(arg, alg):
    kind, val = arg
    if kind not in ("num", "name"):
        raise ValidationError("a vertex must be a name or a number")
    v = str(val)
    if v not in alg.quiver.vindex:
        raise ValidationError(f"unknown vertex {v!r} in object expression")
    return alg.quiver.vindex[v]


def evaluate_object(tree, alg):
    """List of ``(module, shift)`` pairs described by a parsed expression."""
    fn, args = tree
    if fn in ("proj", "inj", "simple"):
        if len(args) != 1:
            raise ValidationError(f"{fn} takes one vertex")
        return [(canonical_module(alg, fn, _vertex(args[0], alg)), 0)]
    if fn == "interval":
        if len(args) != 2:
            raise ValidationError("interval takes two vertices")
        a, b = (alg.quiver.vertices[_vertex(x, alg)] for x in args)
        return [(interval_module(alg, a, b), 0)]
    if fn == "shift":
        if len(args) != 2 or args[0][0] != "num":
            raise ValidationError("shift takes an integer and an object")
        n = args[0][1]
        return [(M, s + n) for M, s in evaluate_object(args[1], alg)]
    if fn == "sum":
        return [x for a in args for x in evaluate_object(a, alg)]
    raise ValidationError(f"unknown object constructor {fn!r}")


def resolve_object(ctx, text):
    """ObjectExpr of the context described by an object expression."""
    out = []
    for M, s in evaluate_object(parse_object(text), ctx.alg):
        for Z in indecomposable_summands(M):
            out.append(_locate(ctx, Z, s, text))
    return expr(out)


def _locate(ctx, Z, s, text):
    amb = ctx.amb
    if amb.kind == "module":
        if s != 0:
            raise ValidationError(f"shifts are not available in a {ctx.kind} context: {text!r}")
        a = amb.registry.identify(Z)
    else:
        m = amb.mod.registry.identify(Z)
        a = None if m is None else amb.index.get((m, s))
    h = None if a is None else ctx.local.get(a)
    if h is None:
        raise ValidationError(f"{text!r} has a summand outside the context universe")
    return h


# -- context construction ----------------------------------------------------------------------


def build_context(spec, threads=1):
    q = Quiver(spec.vertices, spec.arrows)
    alg = build_algebra(q, spec.relations, spec.field)
    if spec.kind in ("module", "pinfty"):
        return make_context(spec.kind, alg=alg, dim_cap=spec.dim_cap, threads=threads)
    derived = make_context("derived", alg=alg, dim_cap=spec.dim_cap, window=spec.shift_window,
                           threads=threads)
    if spec.kind == "derived":
        return derived
    theta = [resolve_object(derived, t) for t in spec.theta]
    return make_context("ftheta", parent=derived, theta=theta, threads=threads)


def default_seed(ctx):
    if ctx.projectives is not None:
        return ctx.projectives
    lam = []
    for v in range(ctx.alg.n_vertices):
        P = canonical_module(ctx.alg, "proj", v)
        if P.dim:
            lam.append(_locate(ctx, P, 0, f"proj({ctx.alg.quiver.vertices[v]})"))
    return subcat(lam)


def _set(ctx, text):
    return subcat(resolve_object(ctx, text)) if text else default_seed(ctx)


def _names(ctx, S):
    return [ctx.labels[h] for h in S]


def _vertex_label(ctx, S):
    return "+".join(_names(ctx, S))


def context_summary(ctx):
    return {
        "kind": ctx.kind,
        "universe": list(ctx.labels),
        "projectives": None if ctx.projectives is None else _names(ctx, ctx.projectives),
    }


def quiver_dot(ctx, vertices, arrows, name="silting"):
    lines = [f"digraph {name} {{"]
    for i, v in enumerate(vertices):
        lines.append(f'  v{i} [label="{_vertex_label(ctx, v)}"];')
    for a, b in arrows:
        lines.append(f"  v{a} -> v{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_dot_labels(text):
    """Vertex labels of a DOT file written by ``quiver_dot`` as summand lists."""
    return [lab.split("+") for lab in re.findall(r'label="([^"]*)"', text)]


# -- commands ---------------------------------------------------------------------------------


def _quiver_payload(ctx, q):
    return {
        "vertices": [_names(ctx, v) for v in q.vertices],
        "arrows": [list(a) for a in q.arrows],
        "complete": q.complete,
        "window_limited_edges": len(q.blocked),
    }


def run(args, spec=None):
    """Execute a parsed command; returns ``(report dict, dot text or None)``."""
    from . import silting as st
    from .standardization import injective_cogenerator

    cmd = args.command
    if cmd == "a4-demo":
        spec = parse_spec_text(DEMO_SPEC)
    ctx = build_context(spec, args.threads)
    report = {"schema": SCHEMA, "command": cmd, "context": context_summary(ctx),
              "determinism_seed": 0, "certificate": "certified"}
    dot = None
    if cmd == "enum-ind":
        report["result"] = {"count": ctx.n, "indecomposables": list(ctx.labels)}
    elif cmd == "silt":
        sub = args.silt_command
        if sub == "check":
            S = _set(ctx, args.set)
            ok, rec = st.is_silting(ctx, S)
            report["result"] = {"set": _names(ctx, S), "presilting": st.is_presilting(ctx, S),
                                "silting": ok,
                                "method": rec.silting_certificate if rec else None}
        elif sub == "enumerate":
            q = st.silting_quiver(ctx, _set(ctx, args.seed), budget=args.budget)
            report["result"] = {"count": len(q.vertices), **_quiver_payload(ctx, q)}
        elif sub == "mutate":
            M = _set(ctx, args.seed)
            X = resolve_object(ctx, args.at)
            if len(X) != 1 or X[0] not in M:
                raise ValidationError("--at must name one indecomposable summand of the seed")
            step = st.irreducible(ctx, args.side, M, X[0])
            report["result"] = {"source": _names(ctx, M), "at": ctx.labels[X[0]], "side": args.side,
                                "result": _names(ctx, step.result)}
        elif sub == "quiver":
            q = st.silting_quiver(ctx, _set(ctx, args.seed), budget=args.budget)
            hasse = st.hasse_quiver(ctx, q.vertices)
            report["result"] = {**_quiver_payload(ctx, q), "hasse_equal": hasse == q.arrows}
            dot = quiver_dot(ctx, q.vertices, q.arrows)
        else:
            raise ValidationError("missing silt subcommand")
    elif cmd == "k0":
        pres = st.k0(ctx)
        report["result"] = {"rank": pres.rank, "torsion": list(pres.torsion),
                            "relations": int(pres.relations.shape[0])}
    elif cmd == "gamma":
        M = _set(ctx, args.silting)
        N = resolve_object(ctx, args.object)
        g = st.gamma(ctx, M, N)
        report["result"] = {"basis": _names(ctx, g.basis), "coords": list(g.coords)}
    elif cmd == "cotorsion":
        cp = st.cotorsion_F(ctx, _set(ctx, args.silting))
        report["result"] = {"X": _names(ctx, cp.X), "Y": _names(ctx, cp.Y), "axioms": cp.report,
                            "bounded": cp.bounded, "G": _names(ctx, st.cotorsion_G(ctx, (cp.X, cp.Y)))}
    elif cmd == "bongartz":
        M = _set(ctx, args.silting)
        N = resolve_object(ctx, args.presilting)
        rec = st.bongartz_complete(ctx, M, N)
        report["result"] = {"silting": _names(ctx, rec.subcat), "method": rec.silting_certificate}
    elif cmd == "tilting":
        res = st.tilting_modules(ctx.alg, ctx=ctx if ctx.kind == "pinfty" else None,
                                 dim_cap=spec.dim_cap)
        report["result"] = {"count": len(res.modules),
                            "modules": [_names(res.ctx, T) for T in res.modules],
                            "brute_force_count": len(res.brute_force), "agree": res.agree}
    elif cmd == "ar-verify":
        pctx = ctx if ctx.kind == "pinfty" else make_context("pinfty", alg=ctx.alg, dim_cap=spec.dim_cap)
        report["result"] = st.ar_verify(pctx)
    elif cmd == "a4-demo":
        q = st.silting_quiver(ctx, ctx.projectives)
        hasse = st.hasse_quiver(ctx, q.vertices)
        pres = st.k0(ctx)
        I, _ = injective_cogenerator(ctx)
        report["result"] = {
            "generator": [ctx.label(r.result) for r in ctx.generator_records],
            "cogenerator": [ctx.label(r.result) for r in ctx.cogenerator_records],
            "greatest": _names(ctx, ctx.projectives),
            "least": _names(ctx, I),
            **_quiver_payload(ctx, q),
            "hasse_equal": hasse == q.arrows,
            "k0_rank": pres.rank,
            "k0_torsion": list(pres.torsion),
            "k0_basis": all(st.k0_basis_check(ctx, v, pres) for v in q.vertices),
        }
        dot = quiver_dot(ctx, q.vertices, q.arrows)
    else:
        raise ValidationError(f"unknown command {cmd!r}")
    return report, dot


def build_parser():
    ap = argparse.ArgumentParser(prog="siltkit", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("--threads", type=int, default=1, help="worker threads for closure fan-out")
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    def with_spec(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("spec", help="TOML problem file")
        return p

    with_spec("enum-ind", help="list the indecomposables of the context")
    silt = sub.add_parser("silt", help="silting subcategories")
    ss = silt.add_subparsers(dest="silt_command", required=True)
    p = ss.add_parser("check")
    p.add_argument("spec")
    p.add_argument("--set", default=None, help="object expression (default: the projectives)")
    for name in ("enumerate", "quiver"):
        p = ss.add_parser(name)
        p.add_argument("spec")
        p.add_argument("--seed", default=None)
        p.add_argument("--budget", type=int, default=2000)
        if name == "quiver":
            p.add_argument("--dot", default=None, help="write the quiver as DOT")
    p = ss.add_parser("mutate")
    p.add_argument("spec")
    p.add_argument("--seed", default=None)
    p.add_argument("--at", required=True)
    p.add_argument("--side", choices=("left", "right"), default="left")
    with_spec("k0", help="Grothendieck group of the context")
    p = with_spec("gamma", help="index of an object with respect to a silting")
    p.add_argument("--silting", default=None)
    p.add_argument("--object", required=True)
    p = with_spec("cotorsion", help="cotorsion pair of a silting")
    p.add_argument("--silting", default=None)
    p = with_spec("bongartz", help="complete a presilting object")
    p.add_argument("--silting", default=None)
    p.add_argument("--presilting", required=True)
    with_spec("tilting", help="enumerate basic tilting modules")
    with_spec("ar-verify", help="check the silting / resolving correspondence")
    p = sub.add_parser("a4-demo", help="standardizable set over linear A4 with its silting quiver")
    p.add_argument("--dot", default=None)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        spec = None if args.command == "a4-demo" else parse_spec(args.spec)
        report, dot = run(args, spec)
        status = 0
    except SiltkitError as exc:
        report = {"schema": SCHEMA, "command": args.command, "error": exc.code, "message": str(exc)}
        if getattr(exc, "offending", None) is not None:
            report["offending"] = int(exc.offending)
        if getattr(exc, "line", None) is not None:
            report["line"] = exc.line
        dot = None
        status = exc.exit_status
    text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    dot_path = getattr(args, "dot", None)
    if dot is not None and dot_path:
        with open(dot_path, "w", encoding="utf-8") as fh:
            fh.write(dot)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
