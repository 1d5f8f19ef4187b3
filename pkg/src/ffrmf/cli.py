"""Command-line entry point: reproducible experiments, machine-readable output.

Subcommands map one-to-one onto the experiment families:

    table   exact counts against the uniform bound (CSV or JSON)
    sample  Monte Carlo normality experiment (JSON report)
    verify  exact desk-scale verification: lemma | gcd | mcleish | exhaustive
    bounds  bound-chain budget and composition sums (JSON)
    asymp   Sathe-Selberg style comparison (JSON)

Reports are byte-stable for identical inputs: exact integers are emitted
as decimal strings, the effective configuration (seed included) is echoed
into every report, and timings are only added on request.  Exit codes:
0 all assertions passed, 1 usage error, 2 a verification assertion
failed, 3 a resource budget was exceeded.
"""

import argparse
import json
import math
import os
import sys
import time

from . import __version__
from .asymptotics import sathe_selberg_estimate
from .bounds import bound_chain_report, composition_sum, composition_sum_envelope
from .counting import (
    count_Pk,
    count_Pk_by_maxdeg,
    hardy_ramanujan_bound,
    int_log,
    is_prime_power,
)
from .errors import FfrmfError, ResourceBudgetError, VerificationError
from .montecarlo import DEFAULT_SEED, run_experiment
from .oracle import (
    exhaustive_moments,
    mcleish_report,
    verify_divisor_pair_bound,
    verify_mixed_moment_bound,
)
from .polyfield import cached_irreducible_table, make_field

__all__ = ["main", "parse_config", "emit_report", "UsageError"]

CACHE_ENV = "FFRMF_CACHE_DIR"


class UsageError(FfrmfError, ValueError):
    """Bad flags or configuration; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_sweep(text):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"bad sweep {text!r}; expected lo:hi or lo:hi:step")
    try:
        lo, hi = int(parts[0]), int(parts[1])
        step = int(parts[2]) if len(parts) == 3 else 1
    except ValueError:
        raise UsageError(f"bad sweep {text!r}; parts must be integers") from None
    if step < 1 or lo > hi:
        raise UsageError(f"empty sweep {text!r}")
    return list(range(lo, hi + 1, step))


_DEFAULTS = {
    "table": {"k": 1, "d": None, "format": "csv"},
    "sample": {"trials": 10000, "seed": DEFAULT_SEED, "threads": 1,
               "dump_samples": None},
    "verify": {"what": "lemma", "t": None, "l": None},
    "bounds": {"r": None},
    "asymp": {"trunc": 40},
}


def _build_parser():
    parser = _Parser(prog="ffrmf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, with_k=True):
        p.add_argument("--config", help="JSON file of defaults; flags override")
        p.add_argument("--q", type=int)
        if with_k:
            p.add_argument("--k", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--timings", action="store_true", default=None,
                       help="include wall-clock timings in the report")

    p = sub.add_parser("table", help="exact counts vs the uniform bound")
    common(p)
    p.add_argument("--n-sweep", dest="n_sweep")
    p.add_argument("--d", type=int, help="restrict to max factor degree exactly d")
    p.add_argument("--format", choices=("csv", "json"))

    p = sub.add_parser("sample", help="Monte Carlo normality experiment")
    common(p)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--dump-samples", dest="dump_samples",
                   help="CSV path for the raw normalized samples")

    p = sub.add_parser("verify", help="exact desk-scale verification")
    common(p)
    p.add_argument("--what", choices=("lemma", "gcd", "mcleish", "exhaustive"))
    p.add_argument("--t", type=int, help="gcd: factor count of the divisor halves")
    p.add_argument("--l", type=int, help="gcd: degree of the divisor halves")

    p = sub.add_parser("bounds", help="bound-chain budget report")
    common(p)
    p.add_argument("--n-sweep", dest="n_sweep")
    p.add_argument("--r", type=int, help="also evaluate the r-fold composition sum")

    p = sub.add_parser("asymp", help="prediction vs exact count")
    common(p)
    p.add_argument("--n-sweep", dest="n_sweep")
    p.add_argument("--trunc", type=int, help="Euler product truncation degree")

    return parser


def parse_config(argv):
    """Parse argv (plus an optional JSON config file) into an argparse namespace.

    File values fill in flags that were not given; flags always win.  The
    effective configuration is validated and echoed into every report.
    """
    args = _build_parser().parse_args(argv)
    cfg = vars(args)
    if cfg.get("config"):
        try:
            with open(cfg["config"]) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        if not isinstance(file_cfg, dict):
            raise UsageError("config file must hold a JSON object")
        known = set(cfg) - {"config", "subcommand"}
        for key, value in file_cfg.items():
            key = key.replace("-", "_")
            if key not in known:
                raise UsageError(f"unknown config file key {key!r}")
            if cfg[key] is None:
                cfg[key] = value
    for key, value in _DEFAULTS.get(cfg["subcommand"], {}).items():
        if cfg.get(key) is None:
            cfg[key] = value
    _validate(cfg)
    return args


def _validate(cfg):
    sub = cfg["subcommand"]
    q = cfg.get("q")
    if q is None:
        raise UsageError("q is required")
    if is_prime_power(q) is None:
        raise UsageError(f"q must be a prime power, got {q}")
    if sub in ("sample", "verify"):
        p, m = is_prime_power(q)
        try:
            make_field(p, m)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if "k" in cfg and cfg.get("k") is not None and cfg["k"] < 1:
        raise UsageError(f"k must be >= 1, got {cfg['k']}")
    if sub != "table" and cfg.get("k") is None:
        raise UsageError("k is required")
    if cfg.get("n") is None and not cfg.get("n_sweep"):
        raise UsageError("n (or --n-sweep) is required")
    if cfg.get("n") is not None and cfg["n"] < 1:
        raise UsageError(f"n must be >= 1, got {cfg['n']}")
    if sub == "sample":
        if cfg["trials"] < 1:
            raise UsageError(f"trials must be >= 1, got {cfg['trials']}")
        if cfg["threads"] < 1:
            raise UsageError(f"threads must be >= 1, got {cfg['threads']}")


def _n_values(cfg):
    if cfg.get("n_sweep"):
        return _parse_sweep(cfg["n_sweep"])
    return [cfg["n"]]


def _echo(cfg):
    skip = {"config", "out", "timings"}
    return {
        k: v for k, v in sorted(cfg.items())
        if k not in skip and v is not None
    }


def emit_report(results, cfg, timings=None):
    """Serialize a report document; JSON unless the table CSV format is chosen.

    Exact integers must already be decimal strings inside ``results``.
    Identical inputs yield byte-identical documents.
    """
    if cfg.get("format") == "csv":
        return results  # already CSV text
    doc = {
        "tool_version": __version__,
        "config": _echo(cfg),
        "results": results,
    }
    if timings is not None:
        doc["timings"] = timings
    return json.dumps(doc, indent=2) + "\n"


def _ratio_to_bound(count, bound):
    if count == 0:
        return 0.0
    return math.exp(int_log(count) - bound.log)


def _run_table(cfg):
    rows = []
    for n in _n_values(cfg):
        k = cfg["k"]
        count = (
            count_Pk_by_maxdeg(cfg["q"], k, n, cfg["d"])
            if cfg["d"] is not None
            else count_Pk(cfg["q"], k, n)
        )
        bound = hardy_ramanujan_bound(cfg["q"], k, n)
        row = {
            "q": cfg["q"],
            "k": k,
            "n": n,
            "count": str(count),
            "hr_bound": bound.value,
            "ratio": _ratio_to_bound(count, bound),
        }
        if cfg["d"] is not None:
            row["d"] = cfg["d"]
        rows.append(row)
    if cfg["format"] == "json":
        return rows, 0
    cols = ["q", "k", "n", "count", "hr_bound", "ratio"]
    if cfg["d"] is not None:
        cols.insert(3, "d")
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(repr(row[c]) if isinstance(row[c], float)
                              else str(row[c]) for c in cols))
    return "\n".join(lines) + "\n", 0


def _run_sample(cfg):
    stats = run_experiment(
        cfg["q"], cfg["k"], cfg["n"], cfg["trials"], cfg["seed"],
        threads=cfg["threads"],
        keep_samples=cfg["dump_samples"] is not None,
        cache_dir=os.environ.get(CACHE_ENV),
    )
    total = stats.count
    per_d = []
    for d in sorted(stats.per_d_variance):
        per_d.append({
            "d": d,
            "observed": stats.per_d_variance[d],
            "exact": count_Pk_by_maxdeg(cfg["q"], cfg["k"], cfg["n"], d) / total,
        })
    results = {
        "count": str(total),
        "moments": {
            "mean": stats.mean,
            "variance": stats.variance,
            "skewness": stats.skewness,
            "excess_kurtosis": stats.excess_kurtosis,
        },
        "power_sums": [str(v) for v in stats.power_sums],
        "ks_distance": stats.ks_distance,
        "histogram": [int(v) for v in stats.histogram],
        "bin_edges": [float(v) for v in stats.bin_edges],
        "per_d": per_d,
    }
    if cfg["dump_samples"] is not None:
        with open(cfg["dump_samples"], "w") as fh:
            fh.write("sample\n")
            for v in stats.samples:
                fh.write(repr(float(v)) + "\n")
    return results, 0


def _run_verify(cfg):
    q, k, n = cfg["q"], cfg["k"], cfg["n"]
    p, m = is_prime_power(q)
    field = make_field(p, m)
    what = cfg["what"]
    cache_dir = os.environ.get(CACHE_ENV)
    failed = False
    if what == "lemma":
        # the full-overlap term enumerates P_{2k-2}(2n-2d) down to d = 1
        depth = max(1, n - 1, 2 * (n - k) + 1)
        table = cached_irreducible_table(field, depth, cache_dir)
        reports = verify_mixed_moment_bound(table, k, n, strict=False)
        out = []
        for r in reports:
            out.append({
                "d": r.d, "e": r.e,
                "mixed": str(r.mixed),
                "bound_main": str(r.bound_main),
                "partial_overlap": str(r.partial_overlap),
                "full_overlap_distinct": str(r.full_overlap_distinct),
                "full_overlap_all_pairs": str(r.full_overlap_all_pairs),
                "passed": r.passed,
            })
            failed |= not r.passed
        results = {"what": what, "cases": out}
    elif what == "gcd":
        t_vals = [cfg["t"]] if cfg["t"] is not None else list(range(1, 4))
        l_vals = [cfg["l"]] if cfg["l"] is not None else list(range(1, 7))
        depth = 2 * max(l_vals)
        table = cached_irreducible_table(field, depth, cache_dir)
        out = []
        for t in t_vals:
            for l in l_vals:
                lhs, rhs = verify_divisor_pair_bound(table, t, l, strict=False)
                ok = lhs <= rhs
                out.append({"t": t, "l": l, "lhs": str(lhs), "rhs": str(rhs),
                            "passed": ok})
                failed |= not ok
        results = {"what": what, "cases": out}
    elif what == "mcleish":
        depth = max(1, n - 1)
        table = cached_irreducible_table(field, depth, cache_dir)
        rep = mcleish_report(table, k, n)
        ok = rep.variance_sum == 1
        failed = not ok
        results = {
            "what": what,
            "variance_sum": str(rep.variance_sum),
            "variance_sum_is_one": ok,
            "fourth_moment_sum": str(rep.fourth_moment_sum),
            "fourth_moment_ratio": rep.fourth_moment_ratio,
            "cross_moment_sum": str(rep.cross_moment_sum),
            "cross_moment_ratio": rep.cross_moment_ratio,
        }
    else:  # exhaustive
        depth = n if k == 1 else max(1, n - k + 1)
        table = cached_irreducible_table(field, depth, cache_dir)
        mom = exhaustive_moments(table, k, n)
        expected = count_Pk(q, k, n)
        ok = mom.mean == 0 and mom.second == expected
        failed = not ok
        results = {
            "what": what,
            "mean": str(mom.mean),
            "second": str(mom.second),
            "fourth": str(mom.fourth),
            "count": str(expected),
            "passed": ok,
        }
    return results, (2 if failed else 0)


def _run_bounds(cfg):
    out = []
    for n in _n_values(cfg):
        rep = bound_chain_report(cfg["q"], cfg["k"], n)
        entry = {
            "n": n,
            "by_max_square_sum": str(rep.by_max_square_sum),
            "partial_overlap": str(rep.partial_overlap),
            "full_overlap": str(rep.full_overlap),
            "total": str(rep.total),
            "count_square": str(rep.count_square),
            "ratio": rep.ratio,
            "log_ratio": rep.log_ratio,
        }
        if cfg["r"] is not None:
            lhs = composition_sum(cfg["q"], cfg["r"], cfg["k"], n)
            env = composition_sum_envelope(cfg["q"], cfg["r"], cfg["k"], n)
            entry["composition"] = {
                "r": cfg["r"],
                "lhs": str(lhs),
                "lhs_log": int_log(lhs) if lhs else None,
                "envelope_log": env.log,
                "log_gap": (int_log(lhs) - env.log) if lhs else None,
            }
        out.append(entry)
    return out, 0


def _run_asymp(cfg):
    out = []
    for n in _n_values(cfg):
        comp = sathe_selberg_estimate(cfg["q"], cfg["k"], n, cfg["trunc"])
        out.append({
            "n": n,
            "exact_log": comp.exact_log,
            "predicted_log": comp.predicted_log,
            "relative_deviation": comp.relative_deviation,
            "g_value": comp.g.value,
            "g_tail_bound": comp.g.tail_bound,
        })
    return out, 0


_RUNNERS = {
    "table": _run_table,
    "sample": _run_sample,
    "verify": _run_verify,
    "bounds": _run_bounds,
    "asymp": _run_asymp,
}


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def main(argv=None):
    """Run the CLI; returns the process exit code."""
    try:
        args = parse_config(argv if argv is not None else sys.argv[1:])
        cfg = vars(args)
        started = time.monotonic()
        results, code = _RUNNERS[cfg["subcommand"]](cfg)
        timings = None
        if cfg.get("timings"):
            timings = {"total_seconds": round(time.monotonic() - started, 6)}
        _write(emit_report(results, cfg, timings), cfg.get("out"))
        return code
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ResourceBudgetError as exc:
        print(f"resource budget exceeded: {exc}", file=sys.stderr)
        return 3
    except VerificationError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
