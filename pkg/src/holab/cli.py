"""Command-line front end: ``holab {catalog,classify,curvature,transport,holonomy,verify}``."""

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import replace

import numpy as np

from . import catalog
from .ambient import AmbientSpace, to_complex, to_real
from .catalog import normalized_jet
from .crtype import classify
from .errors import HolabError, InvalidInputError, PreconditionError
from .holonomy import (HolonomyConfig, circle, holonomy_algebra, line, orthogonality_defect, parallel_transport,
                       plaquette)
from .submanifold import ANALYTIC, FINITE_DIFFERENCE, BASE, Immersion, frame_at, normal_curvature, \
    normal_curvature_coords
from .verify import VerifyOptions, as_entry, check_names, period_loop, run_check, run_suite

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SIG_DIGITS = 12


# ---------------------------------------------------------------------------
# immersion spec files


class SpecError(InvalidInputError):
    pass


def _line_of(text, key):
    needle = f'"{key}"'
    for no, line_ in enumerate(text.splitlines(), 1):
        if needle in line_:
            return no
    return None


def _field_error(text, key, message):
    no = _line_of(text, key)
    where = f" (line {no})" if no else ""
    return SpecError(f"field {key!r}{where}: {message}")


def _grid_immersion(space, k, axes, P, D1, D2, jet_mode, name):
    """Second-order Taylor model around the nearest grid node, renormalized for curved models."""
    axes = [np.asarray(a, float) for a in axes]

    def nearest(u):
        idx = tuple(int(np.argmin(np.abs(ax - x))) for ax, x in zip(axes, u))
        node = np.array([ax[i] for ax, i in zip(axes, idx)])
        return idx, u - node

    def jet_fn(u):
        idx, d = nearest(np.asarray(u, float))
        p0, g1, g2 = P[idx], D1[idx], D2[idx]
        p = p0 + g1 @ d + 0.5 * np.einsum("ijn,i,j->n", g2, d, d)
        d1 = g1 + np.einsum("ijn,i->nj", g2, d)
        if not space.curved:
            return p, d1, g2
        w, w1, w2 = to_complex(p), to_complex(d1.T).T, to_complex(g2)
        z, z1, z2 = normalized_jet(space, w, w1, w2)
        return to_real(z), to_real(z1.T).T, to_real(z2)

    def func(u):
        return jet_fn(u)[0]

    M = Immersion(space, k, func, jet_fn, name=name, level=BASE)
    return M if jet_mode == ANALYTIC else M.with_finite_differences()


def load_spec(path):
    """Read an ImmersionSpec (JSON).  Returns (entry, jet_mode)."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec file {path!r}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec file is not valid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from None
    if not isinstance(doc, dict):
        raise SpecError("spec file must hold a JSON object")
    model = doc.get("model")
    if not isinstance(model, dict) or "c" not in model or "n" not in model:
        raise _field_error(text, "model", "expected an object with keys c and n")
    try:
        space = AmbientSpace(int(model["c"]), int(model["n"]))
    except HolabError as exc:
        raise _field_error(text, "model", str(exc)) from None
    jet_mode = doc.get("jet_mode", ANALYTIC)
    if jet_mode not in (ANALYTIC, FINITE_DIFFERENCE):
        raise _field_error(text, "jet_mode", f"must be {ANALYTIC!r} or {FINITE_DIFFERENCE!r}")
    if "catalog" in doc:
        entry = catalog.get(str(doc["catalog"]))
        if entry.immersion.space != space:
            raise _field_error(text, "model", f"does not match catalog entry {entry.name}")
        if "k" in doc and int(doc["k"]) != entry.immersion.k:
            raise _field_error(text, "k", f"catalog entry {entry.name} has k = {entry.immersion.k}")
        return entry, jet_mode
    k = doc.get("k")
    if not isinstance(k, int) or k < 1:
        raise _field_error(text, "k", "expected a positive integer")
    grid = doc.get("grid")
    if not isinstance(grid, list) or len(grid) != k:
        raise _field_error(text, "grid", f"expected a list of {k} coordinate axes")
    axes = []
    for ax in grid:
        a = np.asarray(ax, float)
        if a.ndim != 1 or a.size < 1 or np.any(np.diff(a) <= 0):
            raise _field_error(text, "grid", "each axis must be a strictly increasing list of numbers")
        axes.append(a)
    shape = tuple(a.size for a in axes)
    D = space.dim
    arrays = {}
    for key, tail in (("points", (D,)), ("d1", (D, k)), ("d2", (k, k, D))):
        if key not in doc:
            raise _field_error(text, key, "missing")
        try:
            arr = np.asarray(doc[key], float)
        except (TypeError, ValueError):
            raise _field_error(text, key, "not a numeric array") from None
        if arr.shape != shape + tail:
            raise _field_error(text, key, f"has shape {arr.shape}, expected {shape + tail}")
        arrays[key] = arr
    name = str(doc.get("name", "spec"))
    M = _grid_immersion(space, k, axes, arrays["points"], arrays["d1"], arrays["d2"], jet_mode, name)
    centre = tuple(float(a[a.size // 2]) for a in axes)
    box = tuple((float(a[0]), float(a[-1])) for a in axes)
    return as_entry(M, doc.get("point", centre), name, box), jet_mode


# ---------------------------------------------------------------------------
# output


def _clean(x):
    """Plain, rounded, JSON-ready data (12 significant digits)."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        v = float(f"{x:.{SIG_DIGITS}g}")
        return 0.0 if v == 0 else v
    if x is None or isinstance(x, str):
        return x
    return str(x)


def matrix(A):
    A = np.atleast_2d(np.asarray(A, float))
    return {"rows": A.shape[0], "cols": A.shape[1], "data": A.ravel().tolist()}


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k in sorted(obj):
            yield from _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and obj and all(isinstance(v, (dict, list)) for v in obj):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{i}]")
    else:
        yield prefix, obj


def render(doc, fmt):
    doc = _clean(doc)
    table = doc.pop("table", None)
    if fmt == "json":
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if table:
            cols = sorted({k for row in table for k in row})
            w.writerow(cols)
            for row in table:
                w.writerow([json.dumps(row.get(c)) if isinstance(row.get(c), (list, dict)) else row.get(c)
                            for c in cols])
        else:
            w.writerow(["key", "value"])
            for k, v in _flatten(doc):
                w.writerow([k, json.dumps(v) if isinstance(v, (list, dict)) else v])
        return buf.getvalue()
    lines = [f"{k}: {json.dumps(v) if isinstance(v, (list, dict)) else v}" for k, v in _flatten(doc)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def _threads():
    raw = os.environ.get("HOLAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InvalidInputError(f"HOLAB_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise InvalidInputError("HOLAB_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _floats(text, what):
    try:
        return [float(x) for x in str(text).split(",") if x.strip() != ""]
    except ValueError:
        raise InvalidInputError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _entry(args):
    if bool(args.example) == bool(args.spec):
        raise InvalidInputError("give exactly one of --example NAME or --spec FILE")
    if args.example:
        entry = catalog.get(args.example)
    else:
        entry, _ = load_spec(args.spec)
    if getattr(args, "jets", "analytic") == "fd":
        M = entry.immersion.with_finite_differences(args.fd_step)
        entry = as_entry(M, entry.default_point, entry.name, entry.sample_box)
    return entry


def _points(args, entry):
    k = entry.immersion.k
    if not args.point:
        return [np.asarray(entry.default_point, float)]
    out = []
    for p in args.point:
        u = np.asarray(_floats(p, "--point"))
        if u.size != k:
            raise InvalidInputError(f"--point {p!r} has {u.size} components, the immersion has k = {k}")
        out.append(u)
    return out


def _inputs(args, entry):
    d = {"example": entry.name, "model": {"c": entry.immersion.space.c, "n": entry.immersion.space.n},
         "k": entry.immersion.k, "jets": entry.immersion.jet_mode}
    for key in ("point", "tol", "steps", "radius_schedule", "seed", "check", "to", "loop", "vector", "samples",
                "loops", "bundle"):
        v = getattr(args, key, None)
        if v is not None:
            d[key] = v
    return d


def cmd_catalog(args):
    rows = []
    for e in catalog.entries():
        gt = e.ground_truth
        rows.append({"name": e.name, "description": e.description, "c": e.immersion.space.c,
                     "n": e.immersion.space.n, "k": e.immersion.k, "cr_label": gt.cr_label,
                     "expected_algebra_dim": gt.expected_algebra_dim, "default_point": list(e.default_point)})
    return {"command": "catalog", "entries": rows, "pass": True, "table": rows}, True


def cmd_classify(args):
    entry = _entry(args)
    rows = []
    for u in _points(args, entry):
        c = classify(entry.immersion, u, args.tol)
        rows.append({"point": u.tolist(), **c.as_dict()})
    residuals = {"coisotropy_defect": max(r["coisotropy_defect"] for r in rows),
                 "frame_gram": max(frame_at(entry.immersion, u).gram_residual() for u in _points(args, entry))}
    return {"command": "classify", "inputs": _inputs(args, entry), "results": rows, "residuals": residuals,
            "pass": True, "table": rows}, True


def cmd_curvature(args):
    entry = _entry(args)
    M = entry.immersion
    out, skew = [], 0.0
    for u in _points(args, entry):
        fr = frame_at(M, u)
        R = normal_curvature(M, u)
        Rc = normal_curvature_coords(M, u)
        skew = max(skew, float(np.max(np.abs(R + np.swapaxes(R, 2, 3)))) if R.size else 0.0)
        frame_mats = [{"i": i, "j": j, "R_perp": matrix(R[i, j])} for i in range(M.k) for j in range(i + 1, M.k)]
        coord_mats = [{"p": p, "q": q, "R_perp": matrix(Rc[p, q])} for p in range(M.k) for q in range(p + 1, M.k)]
        out.append({"point": u.tolist(), "normal_rank": fr.m, "orthonormal_frame": frame_mats,
                    "coordinate_fields": coord_mats, "max_abs": float(np.max(np.abs(R))) if R.size else 0.0})
    table = [{"point": r["point"], "max_abs": r["max_abs"]} for r in out]
    return {"command": "curvature", "inputs": _inputs(args, entry), "results": out, "residuals": {"skew": skew},
            "pass": True, "table": table}, True


def _curve(args, u0, k):
    steps = args.steps
    if args.to is not None:
        target = np.asarray(_floats(args.to, "--to"))
        if target.size != k:
            raise InvalidInputError(f"--to has {target.size} components, expected {k}")
        return line(u0, target, steps)
    if args.loop:
        kind, _, rest = args.loop.partition(":")
        vals = _floats(rest, "--loop")
        if kind not in ("plaquette", "circle") or len(vals) != 3:
            raise InvalidInputError("--loop must be plaquette:i,j,side or circle:i,j,radius")
        i, j, size = int(vals[0]), int(vals[1]), vals[2]
        if not (0 <= i < k and 0 <= j < k and i != j):
            raise InvalidInputError(f"--loop directions must be distinct indices below k = {k}")
        if kind == "plaquette":
            return plaquette(u0, i, j, size, steps)
        center = u0.copy()
        center[i] -= size
        return circle(center, i, j, size, steps)
    raise InvalidInputError("transport needs --to u1,u2,... or --loop ...")


def cmd_transport(args):
    entry = _entry(args)
    M = entry.immersion
    u0 = _points(args, entry)[0]
    curve = _curve(args, u0, M.k)
    fr0 = frame_at(M, u0)
    if args.vector is not None:
        coeffs = np.asarray(_floats(args.vector, "--vector"))
        if coeffs.size != fr0.m:
            raise InvalidInputError(f"--vector has {coeffs.size} coefficients, the normal space has rank {fr0.m}")
    else:
        coeffs = np.eye(fr0.m)[0]
    xi = fr0.normal @ coeffs
    V = parallel_transport(M, curve, np.column_stack([xi, fr0.normal]))
    fr1 = frame_at(M, curve.end)
    out_coeffs = fr1.normal_coords(V[:, :1])[:, 0]
    G = fr1.normal_coords(V[:, 1:])
    res = {"start": u0.tolist(), "end": curve.end.tolist(), "vector_in": coeffs.tolist(),
           "vector_out": out_coeffs.tolist(), "ambient_out": V[:, 0].tolist(), "transport_matrix": matrix(G),
           "orthogonality_defect": orthogonality_defect(G), "closed": bool(curve.is_closed())}
    return {"command": "transport", "inputs": _inputs(args, entry), "results": res, "pass": True,
            "residuals": {"orthogonality": res["orthogonality_defect"]},
            "table": [{"component": i, "in": float(a), "out": float(b)}
                      for i, (a, b) in enumerate(zip(coeffs, out_coeffs))]}, True


def _holonomy_cfg(args):
    kw = {"steps": args.steps, "seed": args.seed, "threads": _threads()}
    if args.radius_schedule:
        radii = _floats(args.radius_schedule, "--radius-schedule")
        if not radii or any(r <= 0 for r in radii):
            raise InvalidInputError("--radius-schedule needs positive radii")
        kw["radii"] = tuple(radii)
    if args.tol is not None:
        kw["rank_tol"] = args.tol
    return HolonomyConfig(**kw)


def cmd_holonomy(args):
    entry = _entry(args)
    u0 = _points(args, entry)[0]
    cfg = _holonomy_cfg(args)
    period = entry.ground_truth.period
    if period and entry.immersion.k == 1:
        # a closed curve: its only loops wind around the period
        cfg = replace(cfg, extra_loops=(period_loop(u0, period),))
    est = holonomy_algebra(entry.immersion, u0, cfg)
    res = {"point": u0.tolist(), "algebra_dim": est.dim, "flat": est.flat,
           "normal_rank": est.normal_frame.shape[1],
           "singular_values": est.singular_values.tolist(), "algebra": [matrix(A) for A in est.algebra],
           "invariant_blocks": [{"dim": b.dim, "trivial": b.trivial, "basis": matrix(b.basis)}
                                for b in est.invariant_blocks],
           "residuals": est.residuals, "trend": [{"radius": r, "max_error": e} for r, e in sorted(est.trend.items())]}
    return {"command": "holonomy", "inputs": _inputs(args, entry), "results": res, "residuals": est.residuals,
            "pass": True, "table": res["trend"]}, True


def _verify_opts(args):
    kw = {"seed": args.seed, "steps": args.steps, "threads": _threads(), "tol": args.tol,
          "samples": args.samples, "loops": args.loops, "bundle": args.bundle}
    if args.radius_schedule:
        kw["radii"] = tuple(_floats(args.radius_schedule, "--radius-schedule"))
    return VerifyOptions(**kw)


def cmd_verify(args):
    entry = _entry(args)
    opts = _verify_opts(args)
    if args.check == "all":
        reports, skipped = run_suite(entry, opts)
    else:
        reports, skipped = [run_check(args.check, entry, opts)], []
    docs = [r.as_dict() for r in reports]
    ok = all(r.passed for r in reports)
    table = [{k: d[k] for k in ("check", "points_sampled", "max_residual", "tolerance", "pass", "status")}
             for d in docs]
    residuals = {d["check"]: d["max_residual"] for d in docs}
    return {"command": "verify", "inputs": _inputs(args, entry), "pass": ok, "reports": docs, "residuals": residuals,
            "skipped": skipped, "table": table}, ok


COMMANDS = {"catalog": cmd_catalog, "classify": cmd_classify, "curvature": cmd_curvature,
            "transport": cmd_transport, "holonomy": cmd_holonomy, "verify": cmd_verify}


def build_parser():
    p = argparse.ArgumentParser(prog="holab", description="Normal holonomy and CR structure of submanifolds "
                                                          "of complex space forms.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", help="write the report here instead of standard output")
    common.add_argument("--timings", action="store_true", help="add wall-clock timings (breaks byte identity)")

    src = argparse.ArgumentParser(add_help=False)
    src.add_argument("--example", help="catalog entry name")
    src.add_argument("--spec", help="ImmersionSpec JSON file")
    src.add_argument("--point", action="append", help="parameter point u1,u2,... (repeatable)")
    src.add_argument("--tol", type=float)
    src.add_argument("--steps", type=int, default=32)
    src.add_argument("--seed", type=int, default=0)
    src.add_argument("--jets", choices=("analytic", "fd"), default="analytic",
                     help="use the analytic jets or central differences of the map")
    src.add_argument("--fd-step", type=float, default=None)

    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("catalog", parents=[common], help="list the built-in examples")
    sub.add_parser("classify", parents=[common, src], help="pointwise CR type")
    sub.add_parser("curvature", parents=[common, src], help="normal curvature at a point")
    t = sub.add_parser("transport", parents=[common, src], help="normal parallel transport")
    t.add_argument("--to", help="end point of a straight parameter segment")
    t.add_argument("--loop", help="plaquette:i,j,side or circle:i,j,radius based at --point")
    t.add_argument("--vector", help="coefficients in the normal frame at the start (default: first vector)")
    h = sub.add_parser("holonomy", parents=[common, src], help="holonomy algebra estimate")
    h.add_argument("--radius-schedule", help="loop radii a,b,c")
    v = sub.add_parser("verify", parents=[common, src], help="run theorem checks")
    v.add_argument("--check", default="all", help="check name or 'all' (" + ", ".join(check_names()) + ")")
    v.add_argument("--radius-schedule", help="loop radii for holonomy estimates")
    v.add_argument("--samples", type=int, default=4)
    v.add_argument("--loops", type=int, default=8)
    v.add_argument("--bundle", default="auto", help="candidate bundle for reduction-conditions")
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "steps", 1) is not None and getattr(args, "steps", 1) < 1:
        parser.error("--steps must be positive")
    if args.command == "verify" and args.check != "all" and args.check not in check_names():
        parser.error(f"unknown check {args.check!r}")
    t0 = time.perf_counter()
    try:
        doc, ok = COMMANDS[args.command](args)
        code = EXIT_OK if ok else EXIT_FAIL
    except PreconditionError as exc:
        doc = {"command": args.command, "error": str(exc), "error_kind": "precondition", "pass": False,
               "point": exc.point, "residual": exc.residual}
        code = EXIT_INPUT
    except (HolabError, ValueError) as exc:
        doc = {"command": args.command, "error": str(exc), "error_kind": type(exc).__name__, "pass": False}
        code = EXIT_INPUT
    if args.timings:
        doc["timings"] = {"wall_seconds": time.perf_counter() - t0}
    text = render(doc, args.format)
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            sys.stderr.write(f"holab: cannot write {args.out}: {exc}\n")
            return EXIT_INPUT
    else:
        sys.stdout.write(text)
    if "error" in doc:
        sys.stderr.write(f"holab: {doc['error']}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
