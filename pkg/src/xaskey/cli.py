"""Command-line interface: ``xaskey eval | verify | orthogonality | ids``.

Exit codes: 0 success, 1 identity failure, 2 configuration or instance
error, 3 pole or quadrature non-convergence.
"""

import argparse
import csv
import dataclasses
import io
import json
import os
import sys
import tempfile

import numpy as np

from .config import ENV_VAR, ConfigError, load_config
from .deformation import DeformedSystem, Inconclusive, eval_Pln, eval_xi, norm_hln
from .families import Family, InvalidParameters, ParamSet, eta, eval_Pn, norm_hn
from .hyperseries import PoleError, SeriesError
from .quadrature import NonConvergence, gram_matrix
from .verify import REGISTRY, SCHEMA_VERSION, identity_ids, run_full_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_POLE = 0, 1, 2, 3

EVAL_COLUMNS = ("x", "eta", "value_re", "value_im")
GRAM_COLUMNS = ("n", "m", "quadrature", "closed_form", "rel_diff", "flag")


class UsageError(Exception):
    pass


def atomic_write(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _params(text):
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if tok.startswith("["):
            raise UsageError("use a+bj for complex parameters on the command line")
        try:
            out.append(complex(tok.replace(" ", "")))
        except ValueError as e:
            raise UsageError(f"bad parameter {tok!r}") from e
    return out


def _instance(args):
    try:
        p = ParamSet(Family(args.family), _params(args.params), args.q)
    except (ValueError, InvalidParameters) as e:
        raise UsageError(str(e)) from e
    if not p.is_valid:
        raise UsageError(f"parameters outside the allowed range: {p.fingerprint}")
    if getattr(args, "deformed", False):
        if args.ell is None:
            raise UsageError("--deformed needs --ell")
        try:
            d = DeformedSystem(p, args.ell)
        except InvalidParameters as e:
            raise UsageError(str(e)) from e
        return d
    return p


def _grid(text):
    try:
        a, b, c = text.split(":")
        return np.linspace(float(a), float(b), int(c))
    except ValueError as e:
        raise UsageError(f"grid must be start:stop:count, got {text!r}") from e


def _emit(rows, columns, fmt, output):
    if fmt == "json":
        text = json.dumps([dict(zip(columns, r)) for r in rows], indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(columns)
        w.writerows(rows)
        text = buf.getvalue()
    if output:
        atomic_write(output, text)
    else:
        sys.stdout.write(text)


def cmd_eval(args):
    ctx = _instance(args)
    xs = _grid(args.grid)
    z = xs.astype(complex)
    if isinstance(ctx, DeformedSystem):
        ctx = ctx.certified() if args.certify else ctx
        vals = eval_xi(ctx, z, args.n) if args.xi else eval_Pln(ctx, args.n, z)
        fam = ctx.family
    else:
        vals = eval_Pn(ctx, args.n, z)
        fam = ctx.family
    vals = np.atleast_1d(vals)
    if not np.all(np.isfinite(vals)):
        raise PoleError("non-finite value on the grid")
    e = np.atleast_1d(eta(fam, xs)).real
    rows = [(float(x), float(ev), float(v.real), float(v.imag)) for x, ev, v in zip(xs, e, vals)]
    _emit(rows, EVAL_COLUMNS, args.format, args.output)
    return EXIT_OK


def _report_files(reports):
    by_id = {}
    for r in reports:
        by_id.setdefault(r.id, []).append(r.to_json())
    return {
        k: {"schema_version": SCHEMA_VERSION, "id": k, "reports": v} for k, v in sorted(by_id.items())
    }


def cmd_verify(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    only = args.only or None
    if only:
        unknown = set(only) - set(REGISTRY)
        if unknown:
            print(f"unknown identity ids: {sorted(unknown)}", file=sys.stderr)
            return EXIT_CONFIG
    try:
        reports = run_full_suite(cfg, only=only, jobs=args.jobs)
    except KeyError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for ident, doc in _report_files(reports).items():
        atomic_write(os.path.join(args.out_dir, f"{ident}.json"), json.dumps(doc, indent=1) + "\n")
    failed = [r for r in reports if not r.passed]
    width = max([len(r.id) for r in reports], default=2)
    for r in reports:
        mark = "pass" if r.passed else "FAIL"
        extra = f"  [{r.error}]" if r.error else ""
        print(f"{mark}  {r.id:<{width}}  {r.instance:<48}  {r.max_scaled_residual:.3e}  (tol {r.tolerance:.0e}){extra}")
    print(f"{len(reports) - len(failed)}/{len(reports)} passed")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_orthogonality(args):
    ctx = _instance(args)
    if isinstance(ctx, DeformedSystem):
        ctx = ctx.certified()
        closed = [norm_hln(ctx, n) for n in range(args.N)]
    else:
        closed = [norm_hn(ctx, n) for n in range(args.N)]
    G = gram_matrix(ctx, args.N).matrix
    rows = []
    for n in range(args.N):
        for m in range(args.N):
            ref = closed[n] if n == m else 0.0
            scale = np.sqrt(abs(G[n, n] * G[m, m]))
            rel = abs(G[n, m] - ref) / (abs(ref) if n == m else scale)
            rows.append((n, m, float(G[n, m]), float(ref), float(rel), "!" if rel > args.threshold else ""))
    _emit(rows, GRAM_COLUMNS, args.format, args.output)
    return EXIT_FAIL if any(r[5] for r in rows) else EXIT_OK


def cmd_ids(args):
    for i in identity_ids():
        s = REGISTRY[i]
        print(f"{i:<26} {s.layer:<10} {s.kind:<9} tol {s.tolerance:.0e}")
    return EXIT_OK


def _add_instance(p):
    p.add_argument("--family", required=True, choices=[f.value for f in Family])
    p.add_argument("--params", required=True, help="comma-separated, complex as a+bj")
    p.add_argument("--q", type=float, default=None, help="AW base q")
    p.add_argument("--deformed", action="store_true", help="use the X_ell deformation")
    p.add_argument("--ell", type=int, default=None)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output", default=None, help="file to write instead of stdout")


def build_parser():
    ap = argparse.ArgumentParser(prog="xaskey", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser(
        "eval",
        help="tabulate P_n, P_{ell,n} or xi_ell on a real grid",
        description="Columns, in order: " + ", ".join(EVAL_COLUMNS) + ".",
    )
    _add_instance(e)
    e.add_argument("--n", type=int, default=0)
    e.add_argument("--grid", default="0:1:5", help="start:stop:count (default 0:1:5)")
    e.add_argument("--xi", action="store_true", help="with --deformed: xi_ell(eta; lambda + n delta)")
    e.add_argument("--certify", action="store_true", help="require a zero-free certificate")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="run the identity suite and write one JSON report per id")
    v.add_argument("--config", default=None, help=f"suite INI file (default ${ENV_VAR}, then bundled)")
    v.add_argument("--only", action="append", default=[], help="restrict to an id (repeatable)")
    v.add_argument("--out-dir", default="reports", help="report directory (default reports)")
    v.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    v.add_argument("--seed", type=int, default=None, help="override the config seed")
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser(
        "orthogonality",
        help="Gram matrix by quadrature against the closed-form norms",
        description="Columns, in order: " + ", ".join(GRAM_COLUMNS) + ".",
    )
    _add_instance(o)
    o.add_argument("--N", type=int, default=4, help="polynomials n = 0..N-1 (default 4)")
    o.add_argument("--threshold", type=float, default=1e-6, help="relative flag threshold (default 1e-6)")
    o.set_defaults(func=cmd_orthogonality)

    i = sub.add_parser("ids", help="list the registered identity ids")
    i.set_defaults(func=cmd_ids)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, InvalidParameters, ConfigError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (PoleError, SeriesError, NonConvergence, Inconclusive, ZeroDivisionError) as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_POLE


if __name__ == "__main__":
    sys.exit(main())
