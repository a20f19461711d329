"""Command-line front end.

Every subcommand takes an automaton file (or the name of a bundled fixture
such as ``aleshin``) and prints a report.  Exit status: 0 on success, 1 on a
domain error (a JSON error object is printed), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

import yaml

from . import boundary_trace as bt
from . import level_rep as lr
from . import reports
from . import star_algebra as sa
from . import wedderburn as wb
from .algebra import AlgebraElement
from .automaton_io import dump_automaton, load_automaton
from .coeffs import Gaussian, format_scalar
from .errors import AutcstarError
from .expr import parse_expression
from .wreath_core import format_vertex, format_word, parse_vertex


class Report:
    """What a command produced: the JSON results plus optional plain and CSV renderings."""

    def __init__(self, results, plain: str | None = None, csv: str | None = None, warnings=()):
        self.results = results
        self.plain = plain
        self.csv = csv
        self.warnings = list(warnings)


def _fmt_trace(c: Gaussian) -> str:
    if c.im == 0:
        return str(c.re)
    return format_scalar(c)


def _vertex(A, text: str):
    return parse_vertex(text, A.alphabet_size)


def _vstr(A, v) -> str:
    return format_vertex(v, A.alphabet_size) or "root"


def _word(A, text: str):
    return A.word(text)


def _expr(A, text: str) -> AlgebraElement:
    return parse_expression(text, A)


# -- subcommands ------------------------------------------------------------


def cmd_validate(A, args) -> Report:
    res = {
        "valid": True,
        "alphabet_size": A.alphabet_size,
        "states": A.names,
        "level_transitive": {str(n): A.level_transitive(n) for n in range(1, args.max_level + 1)},
    }
    plain = f"valid: d={A.alphabet_size}, states: {', '.join(A.names)}"
    return Report(res, plain)


def cmd_act(A, args) -> Report:
    g = _word(A, args.word)
    if args.vertex is not None:
        v = _vertex(A, args.vertex)
        img = A.act(g, v)
        sec = A.section(g, img)
        res = {"vertex": _vstr(A, v), "image": _vstr(A, img), "section": format_word(sec)}
        return Report(res, _vstr(A, img))
    perm = A.act_level(g, args.n)
    res = {"n": args.n, "permutation": list(perm.one_based())}
    return Report(res, " ".join(map(str, perm.one_based())))


def cmd_norm(A, args) -> Report:
    x = _expr(A, args.expr)
    if args.max_level is not None:
        prof = lr.norm_profile(x, args.max_level, tol=args.tol, seed=args.seed)
        plain = "\n".join(f"{n} {v!r}" for n, v in prof.values)
        return Report({"profile": prof.values}, plain, reports.norm_rows(prof.values), prof.warnings)
    val = lr.operator_norm_level(x, args.n, tol=args.tol, seed=args.seed)
    return Report({"n": args.n, "norm": val}, repr(val), reports.norm_rows([(args.n, val)]))


def _spec_dict(rep) -> dict:
    return {
        "n": rep.n,
        "method": rep.method,
        "eigenvalues": [{"re": float(z.real), "im": float(z.imag), "multiplicity": m} for z, m in rep.multiset()],
    }


def cmd_spectrum(A, args) -> Report:
    x = _expr(A, args.expr)
    if args.max_level is not None:
        rep = lr.spectrum_union(x, args.max_level, merge_tol=args.merge_tol)
    else:
        rep = lr.spectrum_level(x, args.n)
    plain = "\n".join(
        f"{z.real:.12g} {z.imag:+.12g}i x{m}" for z, m in rep.multiset()
    )
    return Report(_spec_dict(rep), plain, reports.spectrum_rows([rep]))


def cmd_trace(A, args) -> Report:
    x = _expr(A, args.expr)
    if args.n is not None:
        acc = Gaussian(0)
        for w, c in x.items():
            acc = acc + c * bt.tr_level(A, w, args.n)
        out = _fmt_trace(acc)
        return Report({"n": args.n, "tr_n": out}, out)
    out = _fmt_trace(bt.trace_algebra(x))
    return Report({"trace": out}, out)


def cmd_partition(A, args) -> Report:
    part = bt.boundary_partition(A, _word(A, args.word), args.depth)
    res = part.to_dict()
    plain = "\n".join(
        [
            f"T: {' '.join(res['T_roots']) or '-'}",
            f"F: {' '.join(res['F_roots']) or '-'}",
            f"residual: {res['residual_mass']}",
        ]
    )
    return Report(res, plain)


def cmd_free_check(A, args) -> Report:
    rep = bt.essential_freeness_report(A, args.length)
    res = rep.to_dict()
    lines = [f"{w['word']} {w['trace']}" for w in res["witnesses"]] or [res["verdict"]]
    return Report(res, "\n".join(lines))


def cmd_stab_search(A, args) -> Report:
    v = _vertex(A, args.vertex)
    g = A.subtree_stabilizer_search(v, args.length)
    out = None if g is None else format_word(g)
    return Report({"vertex": _vstr(A, v), "witness": out}, out or "absent")


def cmd_phi(A, args) -> Report:
    m = sa.phi_matrix(_expr(A, args.expr), args.n)
    return Report({"n": args.n, "matrix": m.rows()}, str(m))


def _parse_entry(A, n: int, text: str):
    head, sep, body = text.partition(":")
    if not sep:
        raise ValueError(f"entry {text!r} should look like 'i,j:expr'")
    i, j = (int(t) - 1 for t in head.split(","))
    size = A.alphabet_size**n
    if not (0 <= i < size and 0 <= j < size):
        raise ValueError(f"entry index {head} out of range 1..{size}")
    return sa.RecursionMatrix.unit(A, n, i, j, _expr(A, body))


def cmd_expect(A, args) -> Report:
    B = sa.RecursionMatrix(A, args.n)
    for e in args.entry:
        B = B + _parse_entry(A, args.n, e)
    res = sa.conditional_expectation(B, args.search_len)
    warn = [
        f"no lift within length {args.search_len} for entry {sa.format_lift_key(k, A.alphabet_size)}"
        for k in res.exhausted
    ]
    out = {
        "n": args.n,
        "matrix": res.matrix.rows(),
        "search_exhausted": res.search_exhausted,
        "lifts": {sa.format_lift_key(k, A.alphabet_size): format_word(h) for k, h in sorted(res.lifts.items())},
    }
    return Report(out, str(res.matrix), warnings=warn)


def _cert_dict(cert) -> dict:
    if cert is None:
        return {"found": False}
    return {
        "found": True,
        "case": cert.case,
        "element": str(cert.element),
        "factors": [format_word(g) for g in cert.candidate.factors],
        "nonzero": cert.candidate.nonzero,
        "p": cert.p,
        "verified": cert.verified,
    }


def cmd_kernel(A, args) -> Report:
    if args.gens:
        cand = sa.kernel_candidate_stab(A, [_word(A, g) for g in args.gens])
        cert = sa.KernelCertificate(cand, args.p or 1)
    elif args.rist_level is not None:
        cert = sa.rist_product(A, args.rist_level, args.length)
    else:
        cert = sa.kernel_driver(A, args.length)
    if cert is not None and args.verify is not None:
        cert.verified = sa.verify_kernel(cert.element, cert.p, args.verify)
    res = _cert_dict(cert)
    plain = "not found" if cert is None else f"{cert.element}\ncase: {cert.case}\nverified: {cert.verified}"
    return Report(res, plain)


def cmd_verify_kernel(A, args) -> Report:
    x = _expr(A, args.expr)
    ok = sa.verify_kernel(x, args.p, args.max_level)
    return Report({"kernel": ok}, "true" if ok else "false")


def cmd_tensor(A, args) -> Report:
    T = sa.tensor_construction(A, args.times)
    return Report(T.to_raw(), dump_automaton(T).rstrip("\n"))


def cmd_rist(A, args) -> Report:
    v = _vertex(A, args.vertex)
    g = sa.rist_witness(A, v, args.length)
    out = None if g is None else format_word(g)
    return Report({"vertex": _vstr(A, v), "witness": out}, out or "absent")


def cmd_wedderburn(A, args) -> Report:
    B = wb.algebra_closure(A, args.n, max_ball=args.max_ball)
    rep = wb.block_dimensions(B, seed=args.seed)
    warn = ["closure truncated at max_ball"] if B.truncated else []
    plain = "\n".join(f"d={d} m={m}" for d, m in rep.blocks)
    return Report(rep.to_dict(), plain, reports.block_rows([rep]), warn)


def cmd_trend(A, args) -> Report:
    tr = wb.dimension_trend(A, args.max_level, max_ball=args.max_ball, seed=args.seed)
    res = tr.to_dict()
    res["blocks"] = [r.to_dict() for r in tr.reports]
    plain = "\n".join(f"{n} {m}" for n, m in zip(tr.levels, tr.max_block)) + f"\n{tr.verdict}"
    return Report(res, plain, reports.block_rows(tr.reports))


# -- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "plain"), default="plain")
    common.add_argument("--seed", type=lambda s: int(s, 0), default=lr.SEED)
    common.add_argument("--tol", type=float, default=lr.DEFAULT_TOL)
    common.add_argument("-o", "--output", help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="autcstar", description="Computations for automaton groups and their operator algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_, *positional):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("automaton", help="automaton file or bundled fixture name")
        for arg in positional:
            sp.add_argument(arg)
        sp.set_defaults(func=func)
        return sp

    sp = add("validate", cmd_validate, "check an automaton file")
    sp.add_argument("--max-level", type=int, default=3)

    sp = add("act", cmd_act, "image of a vertex, or the permutation of a level", "word")
    sp.add_argument("vertex", nargs="?")
    sp.add_argument("--n", type=int, default=1)

    sp = add("norm", cmd_norm, "operator norm at one level or a profile", "expr")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--max-level", type=int)

    sp = add("spectrum", cmd_spectrum, "eigenvalues at one level or the union up to --max-level", "expr")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--max-level", type=int)
    sp.add_argument("--merge-tol", type=float, default=lr.DEFAULT_MERGE_TOL)

    sp = add("trace", cmd_trace, "exact boundary trace (or level trace with --n)", "expr")
    sp.add_argument("--n", type=int)

    sp = add("partition", cmd_partition, "fixed / free boundary partition", "word")
    sp.add_argument("--depth", type=int, default=6)

    sp = add("free-check", cmd_free_check, "look for nontrivial elements with positive trace")
    sp.add_argument("--length", type=int, default=4)

    sp = add("stab-search", cmd_stab_search, "search for a subtree stabilizer", "vertex")
    sp.add_argument("--length", type=int, default=4)

    sp = add("phi", cmd_phi, "recursion matrix of an element", "expr")
    sp.add_argument("--n", type=int, default=1)

    sp = add("expect", cmd_expect, "conditional expectation of a matrix given entrywise")
    sp.add_argument("--entry", action="append", default=[], metavar="I,J:EXPR", help="1-based entry; repeatable")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--search-len", type=int, default=4)

    sp = add("kernel", cmd_kernel, "build a kernel element of the tree representation")
    sp.add_argument("--gens", nargs="+", help="explicit commuting words; expands prod(1 - g)")
    sp.add_argument("--rist-level", type=int, help="use rigid-stabilizer witnesses at this level")
    sp.add_argument("--length", type=int, default=4)
    sp.add_argument("--p", type=int)
    sp.add_argument("--verify", type=int, metavar="N", help="verify up to level N")

    sp = add("verify-kernel", cmd_verify_kernel, "check that an element kills tensor powers", "expr")
    sp.add_argument("--p", type=int, default=1)
    sp.add_argument("--max-level", type=int, default=6)

    sp = add("tensor", cmd_tensor, "add the (1, g) companions of every state (d = 2)")
    sp.add_argument("--times", type=int, default=1)

    sp = add("rist", cmd_rist, "search for a rigid stabilizer element", "vertex")
    sp.add_argument("--length", type=int, default=4)

    sp = add("wedderburn", cmd_wedderburn, "block decomposition at one level")
    sp.add_argument("--n", type=int, default=2)
    sp.add_argument("--max-ball", type=int, default=wb.DEFAULT_MAX_BALL)

    sp = add("trend", cmd_trend, "largest block per level")
    sp.add_argument("--max-level", type=int, default=3)
    sp.add_argument("--max-ball", type=int, default=wb.DEFAULT_MAX_BALL)
    return p


def _request(args) -> tuple[dict, dict]:
    skip = {"func", "command", "format", "output", "automaton"}
    inputs = {"command": args.command, "automaton": args.automaton}
    params = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        if k in ("expr", "word", "vertex", "entry", "gens"):
            inputs[k] = v
        else:
            params[k] = v
    return inputs, params


def render(args, rep: Report) -> str:
    if args.format == "json":
        inputs, params = _request(args)
        return reports.dump_json(reports.envelope(inputs, params, rep.results, rep.warnings))
    if args.format == "csv":
        if rep.csv is None:
            raise AutcstarError(f"{args.command} has no CSV form; use --format json or plain")
        return rep.csv
    text = rep.plain if rep.plain is not None else json.dumps(reports.jsonable(rep.results), sort_keys=True)
    return text + "\n"


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        A = load_automaton(args.automaton)
        out = render(args, args.func(A, args))
    except AutcstarError as exc:
        _emit(json.dumps(exc.to_dict(), sort_keys=True) + "\n", None)
        return 1
    except FileNotFoundError as exc:
        _emit(json.dumps({"error": "FileNotFound", "message": str(exc)}, sort_keys=True) + "\n", None)
        return 1
    except yaml.YAMLError as exc:
        _emit(json.dumps({"error": "AutomatonSyntax", "message": str(exc)}, sort_keys=True) + "\n", None)
        return 1
    except ValueError as exc:
        # bad numeric parameters (negative levels, malformed entries, ...)
        parser.error(str(exc))
    _emit(out, args.output)
    return 0


if __name__ == "__main__":
    sys.exit(main())
