"""Command-line interface.

Exit codes: 0 success, 1 I/O error, 2 validation failure, 3 zero table too
short, 4 crossover found by the sieve, 5 no certificate or incomplete run.
The last line on stdout is always a one-line JSON summary.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import crossover as cx
from .interval import Interval
from .zeros import (
    AccuracyError,
    CompletenessError,
    ZeroTableError,
    compute_zeros,
    load_zeros,
    save_zeros,
    validate_against,
)

EXIT_OK, EXIT_IO, EXIT_INVALID, EXIT_SHORT, EXIT_CROSSOVER, EXIT_NONE = 0, 1, 2, 3, 4, 5
ZEROS_ENV = "THETA_ZEROS_DIR"
DEFAULT_BOUND = "1e9"

log = logging.getLogger("thetacert")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- config files ------------------------------------------------------------------


def read_config(path) -> dict[str, str]:
    """Flat key=value file; '#' starts a comment, keys use '-' or '_'."""
    out = {}
    with open(path) as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise CliError(f"{path}:{n}: expected key=value", EXIT_INVALID)
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def write_config(values: dict, path) -> None:
    with open(path, "w", newline="\n") as fh:
        for k in sorted(values):
            v = values[k]
            if v is None or isinstance(v, bool) and not v:
                continue
            fh.write(f"{k}={v}\n")


_SKIP = {"command", "action", "func", "config", "save_config", "verbose"}


def resolved(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in _SKIP or callable(v):
            continue
        out[k] = str(v) if isinstance(v, (Fraction, Path)) else v
    return out


# -- helpers ------------------------------------------------------------------------


def _default_zero_path(name: str) -> Path | None:
    d = os.environ.get(ZEROS_ENV)
    return Path(d) / name if d else None


def _zeros_for(path: str | None, T: float, workers: int):
    """Load a zero table, or compute one up to T (cached under THETA_ZEROS_DIR)."""
    if path:
        return _load(path)
    cache = _default_zero_path(f"zeros-{T:g}.txt")
    if cache is not None and cache.exists():
        return _load(cache)
    if T > 1e5:
        raise CliError(f"no zero table given and T = {T:g} is beyond the desk-scale zero finder",
                       EXIT_SHORT)
    log.info("computing zeros up to %g", T)
    z = compute_zeros(max(T, 10.0), workers=workers)
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        save_zeros(z, cache)
    return z


def _load(path):
    try:
        return load_zeros(path)
    except OSError as e:
        raise CliError(f"cannot read {path}: {e}", EXIT_IO)
    except ZeroTableError as e:
        raise CliError(str(e), EXIT_INVALID)


def _params(args) -> cx.BoundParams:
    try:
        return cx.BoundParams(A=args.A, T=args.T, alpha=args.alpha, eta=args.eta, omega=args.omega)
    except (ValueError, ZeroDivisionError) as e:
        raise CliError(f"bad parameter: {e}", EXIT_INVALID)


def _range(text: str) -> tuple[str, str]:
    if ":" in text:
        lo, hi = text.split(":", 1)
        return lo, hi
    return text, text


# -- commands -----------------------------------------------------------------------


def cmd_zeros(args) -> dict:
    if args.action == "compute":
        out = args.out or _default_zero_path(f"zeros-{float(args.t_max):g}.txt")
        if out is None:
            raise CliError("--out is required (or set THETA_ZEROS_DIR)", EXIT_INVALID)
        try:
            z = compute_zeros(float(args.t_max), float(args.accuracy), workers=args.workers)
        except (CompletenessError, AccuracyError) as e:
            raise CliError(str(e), EXIT_INVALID)
        except ValueError as e:
            raise CliError(str(e), EXIT_INVALID)
        try:
            save_zeros(z, out, format=args.format)
        except OSError as e:
            raise CliError(f"cannot write {out}: {e}", EXIT_IO)
        print(f"{len(z)} zeros in (0, {float(args.t_max):g}] written to {out}")
        return {"count": len(z), "out": str(out)}
    z = _load(args.file)
    if args.action == "import":
        out = args.out or _default_zero_path(Path(args.file).name)
        if out is not None:
            try:
                save_zeros(z, out, format=args.format)
            except OSError as e:
                raise CliError(f"cannot write {out}: {e}", EXIT_IO)
        print(f"{len(z)} zeros imported" + (f" to {out}" if out else ""))
        return {"count": len(z), "max_gamma": z.meta.max_gamma, "out": str(out) if out else None}
    # validate
    gaps = z.gap_screen()
    if gaps:
        raise CliError(f"suspicious gap after index {gaps[0]}", EXIT_INVALID)
    res = {"count": len(z), "max_gamma": z.meta.max_gamma}
    if args.reference:
        try:
            rep = validate_against(z, _load(args.reference))
        except ZeroTableError as e:
            raise CliError(str(e), EXIT_INVALID)
        print(rep.summary())
        res.update(compared=rep.compared, max_disagreement=rep.max_disagreement)
    print(f"{len(z)} zeros valid")
    return res


def cmd_scan(args) -> dict:
    lo, hi = _range(args.omega)
    step = args.step
    T = float(cx.parse_exact(args.t))
    alpha = None if str(args.alpha).lower() in ("inf", "none") else args.alpha
    zeros = _zeros_for(args.zeros, T, args.workers)
    try:
        rows = cx.scan(lo, hi, step, zeros, alpha, args.t, workers=args.workers)
    except cx.TableTooShortError as e:
        raise CliError(str(e), EXIT_SHORT)
    except ValueError as e:
        raise CliError(str(e), EXIT_INVALID)
    try:
        if args.out:
            cx.write_scan_csv(rows, args.out)
        else:
            print(cx.SCAN_HEADER)
            for r in rows:
                print(r.csv())
    except OSError as e:
        raise CliError(f"cannot write {args.out}: {e}", EXIT_IO)
    mids = [r.zero_sum.mid for r in rows]
    i = min(range(len(mids)), key=mids.__getitem__)
    return {"rows": len(rows), "min_sum": mids[i], "min_omega": float(rows[i].omega),
            "min_sum_lo": rows[i].zero_sum.lo, "zeros": len(zeros)}


def cmd_certify(args) -> dict:
    p = _params(args)
    bad = cx.validate(p)
    if bad:
        for b in bad:
            print(f"constraint violated: {b}")
        raise CliError("parameter constraints violated: " + "; ".join(bad), EXIT_INVALID)
    if args.dry_run:
        r = cx.error_terms(p)
        total = r[0] + r[1] + r[2] + r[3]
        print("parameters valid; error terms " + ", ".join(f"R{i + 1} <= {x.hi:.6g}" for i, x in enumerate(r)))
        return {"valid": True, "error_total_hi": total.hi}
    if args.integral_lb is not None:
        lb = Interval(cx.parse_exact(args.integral_lb))
        text = f"integral bound supplied: {args.integral_lb}"
        res = {"integral_lb_supplied": str(args.integral_lb)}
    else:
        zeros = _zeros_for(args.zeros, float(p.T), args.workers) if args.zeros or float(p.T) <= 1e5 else None
        if zeros is None:
            raise CliError(f"table too short: no zero table reaches T = {float(p.T):g}", EXIT_SHORT)
        try:
            bd = cx.lower_bound(p, zeros, workers=args.workers)
        except cx.TableTooShortError as e:
            raise CliError(f"table too short: {e}", EXIT_SHORT)
        lb = bd.lower_bound
        text = bd.report()
        res = {"zero_sum_lo": bd.zero_sum.lo, "zero_sum_hi": bd.zero_sum.hi,
               "integral_lb_lo": lb.lo, "integral_lb_hi": lb.hi}
    print(text)
    cert = None
    if p.omega - p.eta > cx.SHARPEN_MIN_GAP:
        cert = cx.sharpen(p, lb, args.eta0)
    else:
        print(f"omega - eta <= {cx.SHARPEN_MIN_GAP}: window not sharpened")
    issued = lb.lo > 0 if cert is None else cert.issued
    if cert is not None:
        print(cert.report())
        if cert.issued:
            res.update(eta0=str(cert.eta0), x_lo=float(cert.x_lo), x_hi=float(cert.x_hi),
                       sharpened_lb_lo=cert.integral_lb.lo,
                       successive_count_log10=cert.successive_count_log10)
    if args.report:
        try:
            with open(args.report, "w", newline="\n") as fh:
                fh.write(text + "\n")
                if cert is not None:
                    fh.write(cert.report() + "\n")
        except OSError as e:
            raise CliError(f"cannot write {args.report}: {e}", EXIT_IO)
    res["certificate"] = bool(issued)
    if not issued:
        raise _NoCert(res)
    return res


class _NoCert(Exception):
    def __init__(self, res):
        self.res = res


def _sieve_finish(ledger, args) -> dict:
    from .sieve import Verdict, aggregate, checkpoint_crosscheck, CheckpointMismatch
    rep = aggregate(ledger)
    res = rep.to_dict()
    if args.pi_table and rep.verdict is Verdict.VERIFIED_BELOW:
        try:
            chk = checkpoint_crosscheck(ledger, args.pi_table)
        except CheckpointMismatch as e:
            raise CliError(f"checkpoint mismatch at {e.boundary}: {e}", EXIT_INVALID)
        except OSError as e:
            raise CliError(f"cannot read {args.pi_table}: {e}", EXIT_IO)
        res["checkpoints"] = chk.checked
    print(f"verdict: {rep.verdict.value} up to {rep.verified_to}; primes {rep.prime_count}; "
          f"theta in [{rep.theta.lo!r}, {rep.theta.hi!r}]")
    if rep.verdict is Verdict.CROSSOVER_FOUND:
        seg = ledger.tiling.segment(rep.failing_segment)
        print(f"safety condition fails in segment {rep.failing_segment} [{seg.x_lo}, {seg.x_hi})")
        res["_code"] = EXIT_CROSSOVER
    elif rep.verdict is Verdict.INCOMPLETE:
        res["_code"] = EXIT_NONE
    return res


def cmd_sieve(args) -> dict:
    from .sieve import Tiling, run
    try:
        if args.tiling:
            tiling = Tiling.parse(args.tiling, args.bound)
        else:
            tiling = Tiling.parse(f"uniform:{args.segment}", args.bound or DEFAULT_BOUND)
    except (ValueError, KeyError) as e:
        raise CliError(f"bad tiling: {e}", EXIT_INVALID)
    if args.dry_run:
        info = tiling.dry_run()
        print(f"{info['segments']} segments up to {info['bound']}; problems: {info['problems'] or 'none'}")
        if info["problems"]:
            raise CliError("; ".join(info["problems"]), EXIT_INVALID)
        return info
    if not args.ledger:
        raise CliError("--ledger is required", EXIT_INVALID)
    try:
        ledger = run(args.ledger, tiling, workers=args.workers, limit=args.limit)
    except OSError as e:
        raise CliError(f"ledger I/O failed: {e}", EXIT_IO)
    return _sieve_finish(ledger, args)


def cmd_sieve_resume(args) -> dict:
    from .sieve import LedgerError, resume, run
    try:
        ledger = resume(args.ledger)
        ledger = run(args.ledger, ledger.tiling, workers=args.workers, limit=args.limit)
    except OSError as e:
        raise CliError(f"ledger I/O failed: {e}", EXIT_IO)
    except LedgerError as e:
        raise CliError(str(e), EXIT_INVALID)
    return _sieve_finish(ledger, args)


def cmd_walk(args) -> dict:
    from .sieve import LedgerError, emit_walk, resume, write_walk_csv
    from .sieve.ledger import WALK_HEADER, walk_summary
    try:
        ledger = resume(args.ledger)
        rows = emit_walk(ledger)
    except OSError as e:
        raise CliError(f"cannot read {args.ledger}: {e}", EXIT_IO)
    except LedgerError as e:
        raise CliError(str(e), EXIT_NONE)
    if args.out:
        try:
            write_walk_csv(rows, args.out)
        except OSError as e:
            raise CliError(f"cannot write {args.out}: {e}", EXIT_IO)
    else:
        print(WALK_HEADER)
        for x, v in rows:
            print(f"{x},{v.mid!r},{v.width!r},{v.lo!r},{v.hi!r}")
    return walk_summary(rows)


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="thetacert", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key=value file; command-line flags take precedence")
    parser.add_argument("--save-config", help="write the resolved configuration to this file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    z = sub.add_parser("zeros", help="compute, import or validate zero tables")
    zs = z.add_subparsers(dest="action", required=True)
    zc = zs.add_parser("compute")
    zc.add_argument("--t-max", required=True)
    zc.add_argument("--accuracy", default="1e-15")
    zc.add_argument("--out")
    zc.add_argument("--format", choices=["text", "packed"], default="text")
    zc.add_argument("--workers", type=int, default=1)
    zi = zs.add_parser("import")
    zi.add_argument("file")
    zi.add_argument("--out")
    zi.add_argument("--format", choices=["text", "packed"], default="text")
    zv = zs.add_parser("validate")
    zv.add_argument("file")
    zv.add_argument("--reference")
    z.set_defaults(func=cmd_zeros)

    s = sub.add_parser("scan", help="zero sum over a grid of omega")
    s.add_argument("--omega", required=True, help="LO:HI or a single value")
    s.add_argument("--step", default=str(cx.DEFAULT_SCAN_STEP))
    s.add_argument("--t", required=True, help="zero cutoff T")
    s.add_argument("--alpha", default="inf")
    s.add_argument("--zeros")
    s.add_argument("--out")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_scan)

    c = sub.add_parser("certify", help="lower bound, sharpening and certificate")
    pp = cx.PAPER_PARAMS
    c.add_argument("--A", default=str(pp.A))
    c.add_argument("--T", default=str(pp.T))
    c.add_argument("--alpha", default=str(pp.alpha))
    c.add_argument("--eta", default=cx._fmt(pp.eta))
    c.add_argument("--omega", default="727.951332655")
    c.add_argument("--eta0", default=None)
    c.add_argument("--integral-lb", default=None, help="use this bound on I(omega, eta) instead of the zero sum")
    c.add_argument("--zeros")
    c.add_argument("--report")
    c.add_argument("--workers", type=int, default=1)
    c.add_argument("--dry-run", action="store_true", help="validate parameters and error terms only")
    c.set_defaults(func=cmd_certify)

    sv = sub.add_parser("sieve", help="verify theta(x) < x below a bound")
    sv.add_argument("--bound", default=None, help="default 1e9, or the end of --tiling")
    sv.add_argument("--segment", default="1e7")
    sv.add_argument("--tiling", help="explicit groups such as 10000x1e13,390x1e14")
    sv.add_argument("--ledger")
    sv.add_argument("--workers", type=int, default=1)
    sv.add_argument("--pi-table")
    sv.add_argument("--limit", type=int, default=None, help="stop after this many segments")
    sv.add_argument("--dry-run", action="store_true")
    sv.set_defaults(func=cmd_sieve)

    sr = sub.add_parser("sieve-resume", help="continue an interrupted sieve ledger")
    sr.add_argument("ledger")
    sr.add_argument("--workers", type=int, default=1)
    sr.add_argument("--pi-table")
    sr.add_argument("--limit", type=int, default=None)
    sr.set_defaults(func=cmd_sieve_resume)

    w = sub.add_parser("walk", help="(x - theta(x))/sqrt(x) at ledger boundaries")
    w.add_argument("ledger")
    w.add_argument("--out")
    w.set_defaults(func=cmd_walk)
    return parser


def _subparsers(parser):
    for a in parser._actions:
        if isinstance(a, argparse._SubParsersAction):
            yield from a.choices.values()
            for p in a.choices.values():
                yield from _subparsers(p)


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    first = argparse.ArgumentParser(add_help=False)
    first.add_argument("--config")
    pre, _ = first.parse_known_args(argv)
    if pre.config:
        cfg = read_config(pre.config)
        for sp in _subparsers(parser):
            known = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in cfg.items() if k in known})
            # a value from the config satisfies a required flag
            for a in sp._actions:
                if a.dest in cfg:
                    a.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse(argv)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        print(json.dumps({"ok": False, "exit": e.code, "error": str(e)}))
        return e.code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        print(json.dumps({"ok": False, "exit": EXIT_IO, "error": str(e)}))
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    cfg = resolved(args)
    log.info("config %s", json.dumps(cfg, sort_keys=True))
    if args.save_config:
        write_config(cfg, args.save_config)
    t0 = time.monotonic()
    code = EXIT_OK
    try:
        res = args.func(args)
        code = res.pop("_code", EXIT_OK)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        res = {"error": str(e)}
        code = e.code
    except _NoCert as e:
        res = e.res
        code = EXIT_NONE
    log.info("finished in %.3f s", time.monotonic() - t0)
    summary = {"ok": code == EXIT_OK, "exit": code, "command": args.command, **res, "config": cfg}
    print(json.dumps(summary, sort_keys=True, default=str))
    return code


if __name__ == "__main__":
    sys.exit(main())
