"""Command-line front end.

Every JSON output carries a ``meta`` block with the input hash, seed,
tolerances and a ``generated_at`` timestamp.  Only the timestamp varies
between identical runs; set ``SOURCE_DATE_EPOCH`` to pin it.
"""

import argparse
import csv
import datetime as _dt
import io
import json
import os
import sys
import warnings

import numpy as np

from . import __version__
from .analysis import Tolerances, certify, converse_prelog, snr_grid, sweep
from .channel import (
    generate_random_channel,
    input_hash,
    load_channel,
    reduce_to_parallel,
)
from .errors import InputError, NumericalError, SdofError
from .linalg import gsvd
from .region import (
    MUTUAL_PRIVACY,
    NO_PRIVACY,
    build_region,
    classify_case,
    enumerate_vertices,
    region_to_dict,
)
from .scheme import allocation_to_dict, check_decodability, parse_target, synthesize

COMMANDS = ("gsvd", "region", "scheme", "sweep", "certify", "converse")


def _dims(text):
    try:
        parts = [int(x) for x in text.lower().split("x")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NTxNR1xNR2, got {text!r}") from None
    if len(parts) != 3 or min(parts) < 1:
        raise argparse.ArgumentTypeError(f"expected three positive sizes NTxNR1xNR2, got {text!r}")
    return tuple(parts)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", metavar="PATH", help="channel JSON file")
    src.add_argument("--random", metavar="NTxNR1xNR2", type=_dims,
                     help="draw a Gaussian channel of these sizes from --seed")
    common.add_argument("--ne", type=int, help="eavesdropper antennas (overrides the file)")
    common.add_argument("--pbar", type=float, help="total power (overrides the file)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol-rank", type=float, default=None, help="absolute rank threshold")
    common.add_argument("--format", choices=("table", "json", "csv"), default="table")
    common.add_argument("--out", metavar="PATH", help="write here instead of stdout")

    target = argparse.ArgumentParser(add_help=False)
    target.add_argument("--target", required=True, metavar="d0,d1,d2")
    target.add_argument("--privacy", action="store_true", help="require mutual privacy")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--snr-min", type=float, default=1e4)
    grid.add_argument("--snr-max", type=float, default=1e12)
    grid.add_argument("--snr-points", type=int, default=9)
    grid.add_argument("--tol-prelog", type=float, default=0.05)
    grid.add_argument("--trials", type=int, default=100, help="sampled eavesdroppers")

    p = argparse.ArgumentParser(prog="sdof", description="Secrecy d.o.f. tools for two-user MIMO broadcast wiretap channels.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("gsvd", parents=[common], help="GSVD factors and rank profile")
    r = sub.add_parser("region", parents=[common], help="s.d.o.f. region facets and vertices")
    r.add_argument("--privacy", action="store_true")
    sub.add_parser("scheme", parents=[common, target], help="dimension allocation for a target")
    sub.add_parser("sweep", parents=[common, target, grid], help="rates and leakage over SNR")
    sub.add_parser("certify", parents=[common, target, grid], help="full pass/fail certificate")
    c = sub.add_parser("converse", parents=[common], help="worst-case eavesdropper cut pre-logs")
    for flag, default in (("--snr-min", 1e4), ("--snr-max", 1e12)):
        c.add_argument(flag, type=float, default=default)
    c.add_argument("--snr-points", type=int, default=9)
    c.add_argument("--tol-prelog", type=float, default=0.05)
    return p


def _timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        t = _dt.datetime.fromtimestamp(int(epoch), tz=_dt.timezone.utc)
    else:
        t = _dt.datetime.now(tz=_dt.timezone.utc)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def _load_spec(args):
    if args.input:
        if not os.path.exists(args.input):
            raise InputError(f"no such file: {args.input}", kind="file_not_found")
        spec, notes = load_channel(args.input)
    else:
        spec = generate_random_channel(*args.random, seed=args.seed, n_e=1)
        notes = []
    changes = {}
    if args.ne is not None:
        changes["n_e"] = args.ne
    if args.pbar is not None:
        changes["p_bar"] = args.pbar
    if changes:
        spec = spec.with_changes(**changes)
    return spec, list(notes)


def _tolerances(args):
    return Tolerances(prelog=getattr(args, "tol_prelog", 0.05), rank=args.tol_rank)


def _meta(args, spec, tol):
    return {
        "tool": "sdof",
        "version": __version__,
        "command": args.command,
        "input_hash": input_hash(spec),
        "input": args.input if args.input else {"random": list(args.random)},
        "seed": args.seed,
        "tolerances": tol.as_dict(),
        "generated_at": _timestamp(),
    }


def _cplx(m):
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


# each handler returns (payload dict, table lines, csv rows)

def _cmd_gsvd(args, spec, tol):
    f = gsvd(spec.h1, spec.h2, tol.rank)
    pc = reduce_to_parallel(spec, tol.rank)
    c, s = f.s1, f.s2
    payload = {
        "profile": f.profile.as_dict(),
        "rank_tol": f.rank_tol,
        "cs_cosines": [float(x) for x in c],
        "cs_sines": [float(x) for x in s],
        "p_singular_values": [float(x) for x in np.linalg.svd(f.p, compute_uv=False)],
        "s_min": pc.s_min,
        "s_p": pc.s_p,
        "residuals": dict(zip(("h1", "h2"), f.residuals(spec.h1, spec.h2))),
        "rank_warnings": list(f.warnings),
        "factors": {"u": _cplx(f.u), "v": _cplx(f.v), "w": _cplx(f.w), "q": _cplx(f.q), "r": _cplx(f.r)},
    }
    pr = f.profile
    lines = [
        f"rank profile  r1={pr.r1} r2={pr.r2} r0={pr.r0} s={pr.s} rt1={pr.rt1} rt2={pr.rt2}",
        "common CS pairs (S1, S2):",
    ]
    lines += [f"  {a:.12f}  {b:.12f}" for a, b in zip(c, s)] or ["  (none)"]
    lines.append(f"s_min={pc.s_min:.6g}  s_p={pc.s_p:.6g}")
    res = payload["residuals"]
    lines.append("residuals: " + "  ".join(f"{k}={v:.2e}" for k, v in res.items()))
    lines += [f"warning: {w}" for w in f.warnings]
    rows = [("index", "S1", "S2")] + [(i, repr(float(a)), repr(float(b))) for i, (a, b) in enumerate(zip(c, s))]
    return payload, lines, rows


def _cmd_region(args, spec, tol):
    pc = reduce_to_parallel(spec, tol.rank)
    mode = MUTUAL_PRIVACY if args.privacy else NO_PRIVACY
    reg = build_region(pc.profile, spec.n_e, mode)
    vs = enumerate_vertices(reg)
    payload = region_to_dict(reg, vs)
    payload["slice_shapes"] = {str(d0): classify_case(pc.profile, spec.n_e, d0, mode)
                               for d0 in vs.fixed_d0_polygons}
    pr = pc.profile
    lines = [f"{mode} region  (r1={pr.r1} r2={pr.r2} r0={pr.r0} s={pr.s}, n_e={spec.n_e})", "facets:"]
    lines += [f"  {c}" for c in reg.constraints]
    lines.append("vertices (d0, d1, d2):")
    lines += [f"  {tuple(v)}" for v in vs.vertices]
    lines.append("fixed-d0 slices (d1, d2):")
    for d0, poly in vs.fixed_d0_polygons.items():
        lines.append(f"  d0={d0} {payload['slice_shapes'][str(d0)]}: " + " ".join(str(tuple(p)) for p in poly))
    rows = [("d0", "d1", "d2")] + [tuple(str(x) for x in v) for v in vs.vertices]
    return payload, lines, rows


def _mode(args):
    return MUTUAL_PRIVACY if args.privacy else NO_PRIVACY


def _cmd_scheme(args, spec, tol):
    pc = reduce_to_parallel(spec, tol.rank)
    alloc = synthesize(pc, spec.n_e, parse_target(args.target), _mode(args))
    payload = allocation_to_dict(alloc)
    reps = check_decodability(alloc)
    reps = reps if isinstance(reps, list) else [reps]
    payload["decodability"] = [{"margins": r.margins, "eve_margin": r.eve_margin, "ok": r.ok} for r in reps]
    lines = [f"achieved d.o.f. {tuple(payload['achieved_dof'])}  mode={alloc.mode}"]
    rows = [("component", "weight", "block", "codebook", "start", "stop")]
    for k, (w, a) in enumerate(zip(payload["time_share"], payload["allocations"])):
        d = a["dims"]
        lines.append(f"[{k}] weight {w}  {a['case_id']} corner={a['corner']}  target {tuple(a['target'])}"
                     f"  |A|={d['A']} |B|={d['B']} |C|={d['C']}  b_split={tuple(a['b_split'])}")
        for b in a["blocks"]:
            lines.append(f"      {b['name']:<4} [{b['start']}, {b['stop']})")
            rows.append((k, w, b["name"], b["name"][0], b["start"], b["stop"]))
        m = payload["decodability"][k]["margins"]
        lines.append("      margins: " + "  ".join(f"{n}={'-' if v is None else f'{v:.4g}'}" for n, v in m.items()))
    return payload, lines, rows


def _grid(args):
    return snr_grid(args.snr_min, args.snr_max, args.snr_points)


def _cmd_sweep(args, spec, tol):
    rep, alloc, _, _ = sweep(spec, parse_target(args.target), _mode(args), _grid(args),
                             args.trials, args.seed, tolerances=tol)
    payload = rep.to_dict()
    payload["scheme"] = allocation_to_dict(alloc)
    lines = [f"target {tuple(payload['target'])}  mode={rep.mode}  n_e={rep.n_e}",
             f"{'p_bar':>10} {'R0':>10} {'R1':>10} {'R2':>10} {'RE':>10} {'leakage':>10}"]
    for pt in payload["points"]:
        lines.append(" ".join(f"{pt[k]:>10.4g}" for k in ("p_bar", "R0", "R1", "R2", "RE", "leakage")))
    lines.append("fitted pre-logs: " + "  ".join(f"{k}={v:.4f}" for k, v in rep.fitted_prelogs.items()))
    return payload, lines, rep


def _cmd_certify(args, spec, tol):
    cert = certify(spec, parse_target(args.target), _mode(args), _grid(args), args.trials,
                   args.seed, tolerances=tol)
    payload = cert.to_dict()
    lines = [f"certificate: {'PASS' if cert.passed else 'FAIL'}"]
    lines += [f"  [{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}" for c in cert.checks]
    lines.append("secrecy accounting: " + ", ".join(f"{k}={v}" for k, v in cert.secrecy.items()))
    rows = [("check", "passed", "detail")] + [(c.name, c.passed, c.detail) for c in cert.checks]
    return payload, lines, rows


def _cmd_converse(args, spec, tol):
    rep = converse_prelog(spec, _grid(args), tol.rank)
    names = ("receiver1", "receiver2", "cooperative")
    cuts = []
    for n, b, sl, c in zip(names, rep.bounds, rep.slopes, rep.constructions):
        cuts.append({"cut": n, "bound": b, "fitted_slope": sl, "rows_removed": c.rows,
                     "rotated": c.rotated, "ok": abs(sl - b) <= tol.prelog})
    payload = {"cuts": cuts, "p_bar": [float(x) for x in rep.snr_points]}
    lines = [f"{'cut':<12} {'bound':>5} {'slope':>8}"]
    lines += [f"{c['cut']:<12} {c['bound']:>5} {c['fitted_slope']:>8.4f}" for c in cuts]
    rows = [("cut", "bound", "fitted_slope")] + [(c["cut"], c["bound"], repr(c["fitted_slope"])) for c in cuts]
    return payload, lines, rows


HANDLERS = {
    "gsvd": _cmd_gsvd,
    "region": _cmd_region,
    "scheme": _cmd_scheme,
    "sweep": _cmd_sweep,
    "certify": _cmd_certify,
    "converse": _cmd_converse,
}


def _render(fmt, meta, payload, lines, rows):
    if fmt == "json":
        return json.dumps({"meta": meta, "result": payload}, indent=2, default=str) + "\n"
    header = [f"{k}: {json.dumps(v, default=str)}" for k, v in meta.items()]
    if fmt == "table":
        return "\n".join(["# " + h for h in header] + lines) + "\n"
    if hasattr(rows, "to_csv"):
        return rows.to_csv(header)
    buf = io.StringIO()
    for h in header:
        buf.write(f"# {h}\n")
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _error_object(exc):
    if isinstance(exc, SdofError):
        d = exc.to_dict()
    else:
        d = {"error": type(exc).__name__, "message": str(exc), "exit_code": 4}
    return json.dumps(d, default=str)


def run(argv=None):
    """Parse `argv`, execute one command and return its exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            spec, notes = _load_spec(args)
            tol = _tolerances(args)
            notes += spec.regime_warnings(tol.rank)
            payload, lines, rows = HANDLERS[args.command](args, spec, tol)
        meta = _meta(args, spec, tol)
        msgs = notes + sorted({str(w.message) for w in caught})
        if msgs:
            meta["warnings"] = msgs
        _emit(_render(args.format, meta, payload, lines, rows), args.out)
        return 0
    except SdofError as e:
        sys.stderr.write(_error_object(e) + "\n")
        return e.exit_code
    except OSError as e:
        err = InputError(str(e), kind="io_error")
        sys.stderr.write(_error_object(err) + "\n")
        return err.exit_code
    except (np.linalg.LinAlgError, FloatingPointError) as e:
        err = NumericalError(str(e))
        sys.stderr.write(_error_object(err) + "\n")
        return err.exit_code
    except Exception as e:  # still report machine-readably
        sys.stderr.write(_error_object(e) + "\n")
        return 4


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
