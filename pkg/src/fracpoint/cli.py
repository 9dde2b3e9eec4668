"""Command-line experiment runner.

Each subcommand is one named experiment producing a table, written as CSV
(with ``#`` metadata lines) or as JSON carrying the same content.  Parameters
come from flags, optionally from a JSON config file; flags win over the file.

Exit status: 0 success, 2 invalid input (including unwritable output),
3 numeric-accuracy failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from . import __version__
from .bernstein import parse_bernstein
from .fracops import OperatorSpec, caputo_mcbride, ek_integral, ml_eigenfunction, mcbride_power
from .hitting import (
    default_horizon,
    hitting_prob_asymptotic,
    hitting_prob_exact,
    hitting_prob_mc_levels,
    hitting_prob_recursive,
)
from .processes import (
    GgbmTime,
    MultiSubordinated,
    SpaceFractional,
    moments_multi_timechanged,
    parse_process,
    pgf,
    pmf_table,
    InfiniteMomentError,
)
from .renewal import default_gamma_grid, renewal_gap_ggbm, renewal_gap_spacetime
from .samplers import (
    RngStream,
    chi_square_gof,
    run_chunked,
    sample_ggbm_clock,
    sample_iterated,
    sample_process,
)
from .specfun import AccuracyError, m_wright, m_wright_cdf_grid, ml

EXPERIMENTS = ("hitting", "pmf", "sample", "iterate", "multi", "ggbm", "renewal", "fracop-check")

# which acceptance checks each experiment reproduces
COVERS = {
    "hitting": "hitting exactness, Monte Carlo hitting, asymptotics",
    "pmf": "pmf normalization and series/Bell agreement",
    "sample": "sampler chi-square fidelity",
    "iterate": "iterated-stable composition identity",
    "multi": "multiple subordination pmf, moments and sampler",
    "ggbm": "ggBm pgf reduction and clock KS distance",
    "renewal": "non-renewal certificate and ggBm renewal dichotomy",
    "fracop-check": "fractional-operator eigenrelation and special-function anchors",
}


class ValidationError(ValueError):
    pass


@dataclass
class Table:
    columns: list
    rows: list
    meta: dict = field(default_factory=dict)


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def _threads(cfg):
    if cfg.get("threads") is not None:
        return int(cfg["threads"])
    env = os.environ.get("FRACPOINT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValidationError(f"FRACPOINT_THREADS must be an integer, got {env!r}") from None
    return 1


def _grid(cfg):
    lo, hi, n = float(cfg["gamma_min"]), float(cfg["gamma_max"]), int(cfg["gamma_points"])
    if not 0 < lo < hi or n < 2:
        raise ValidationError("gamma grid needs 0 < gamma-min < gamma-max and at least 2 points")
    return default_gamma_grid(lo, hi, n)


def _draw(spec, t, n, cfg):
    rng = RngStream(int(cfg["seed"]))
    with warnings.catch_warnings():
        # capped Sibuya jumps are reported per call; the counts are what matter here
        warnings.simplefilter("ignore", RuntimeWarning)
        return run_chunked(lambda g, m: sample_process(spec, t, g, m), n, rng, threads=_threads(cfg))


def _frequency_table(x, table, extra_meta):
    stat, pval, cells = chi_square_gof(x, table.probabilities)
    k_show = min(table.k_max, int(np.max(x)) if x.size else 0, 200)
    counts = np.bincount(np.minimum(x, k_show + 1).astype(np.int64), minlength=k_show + 2)
    rows = [[k, int(counts[k]), counts[k] / x.size, float(table.probabilities[k])] for k in range(k_show + 1)]
    meta = {
        **extra_meta,
        "n_samples": int(x.size),
        "chi2": stat,
        "chi2_cells": cells,
        "chi2_pvalue": pval,
        "beyond_k": int(counts[k_show + 1]),
    }
    return Table(["k", "count", "empirical", "exact"], rows, meta)


def _positive(cfg, *names):
    for n in names:
        if cfg.get(n) is None or not float(cfg[n]) > 0:
            raise ValidationError(f"--{n.replace('_', '-')} must be positive")


def _n_samples(cfg):
    n = int(cfg["n_samples"])
    if n < 1:
        raise ValidationError("--n-samples must be >= 1")
    return n


# --------------------------------------------------------------------------
# experiments
# --------------------------------------------------------------------------


def run_hitting(cfg) -> Table:
    alpha, lam, k_max = float(cfg["alpha"]), float(cfg["lambda"]), int(cfg["k_max"])
    if not 0 < alpha <= 1:
        raise ValidationError("--alpha must lie in (0, 1]")
    if k_max < 1:
        raise ValidationError("--k-max must be >= 1")
    _positive(cfg, "lambda")
    n = _n_samples(cfg)
    ks = np.arange(1, k_max + 1)
    exact = hitting_prob_exact(alpha, ks)
    rec = hitting_prob_recursive(alpha, k_max)
    asym = hitting_prob_asymptotic(alpha, ks) if alpha < 1 else np.ones(k_max)
    horizon = cfg.get("horizon")
    horizon = default_horizon(alpha, lam, k_max) if horizon is None else float(horizon)
    mc = None
    if n >= 2:
        mc = hitting_prob_mc_levels(
            alpha, lam, list(ks), horizon, n, RngStream(int(cfg["seed"])), threads=_threads(cfg)
        )
    rows = []
    for i, k in enumerate(ks):
        row = [int(k), float(exact[i]), float(rec[i]), float(asym[i])]
        if mc is not None:
            r = mc[i]
            row += [r.value, r.stderr, r.truncation_bound, bool(r.covers(float(exact[i])))]
        rows.append(row)
    cols = ["k", "exact", "recursive", "asymptotic"]
    if mc is not None:
        cols += ["monte_carlo", "stderr", "truncation_bound", "covered"]
    return Table(cols, rows, {"horizon": horizon})


def run_pmf(cfg) -> Table:
    spec = _spec(cfg)
    t = float(cfg["t"])
    if t < 0:
        raise ValidationError("--t must be >= 0")
    k_max = cfg.get("k_max")
    table = pmf_table(spec, t, None if k_max is None else int(k_max))
    rows = [[k, float(p)] for k, p in enumerate(table.probabilities)]
    return Table(["k", "probability"], rows, {"process": spec.encode(), "tail_bound": table.tail_bound})


def _spec(cfg):
    text = cfg.get("process")
    if not text:
        raise ValidationError("--process is required (e.g. space:0.7, spacetime:0.5,0.6, gamma:1)")
    _positive(cfg, "lambda")
    try:
        return parse_process(str(text), float(cfg["lambda"]))
    except ValueError as e:
        raise ValidationError(str(e)) from None


def run_sample(cfg) -> Table:
    spec = _spec(cfg)
    _positive(cfg, "t")
    t = float(cfg["t"])
    n = _n_samples(cfg)
    x = _draw(spec, t, n, cfg)
    return _frequency_table(x, pmf_table(spec, t), {"process": spec.encode()})


def run_iterate(cfg) -> Table:
    alpha = float(cfg["alpha"])
    try:
        gammas = [float(v) for v in str(cfg["gammas"]).split(",")]
    except ValueError:
        raise ValidationError("--gammas must be a comma-separated list of numbers") from None
    if not 0 < alpha <= 1 or not all(0 < g <= 1 for g in gammas):
        raise ValidationError("--alpha and every gamma must lie in (0, 1]")
    _positive(cfg, "t", "lambda")
    t, lam = float(cfg["t"]), float(cfg["lambda"])
    n = _n_samples(cfg)
    eff = alpha * math.prod(gammas)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        x = run_chunked(
            lambda g, m: sample_iterated(alpha, gammas, t, g, m, lam=lam),
            n,
            RngStream(int(cfg["seed"])),
            threads=_threads(cfg),
        )
    table = pmf_table(SpaceFractional(eff, lam), t)
    out = _frequency_table(x, table, {"effective_alpha": eff})
    p0 = float(np.mean(x == 0))
    out.meta.update({"p0_empirical": p0, "p0_exact": float(table.probabilities[0]), "p0_degenerate": math.exp(-t)})
    return out


def run_multi(cfg) -> Table:
    try:
        fs = tuple(parse_bernstein(p) for p in str(cfg["fs"]).split("+"))
    except ValueError as e:
        raise ValidationError(str(e)) from None
    nu = cfg.get("nu")
    nu = None if nu is None else float(nu)
    _positive(cfg, "t", "lambda")
    t, lam = float(cfg["t"]), float(cfg["lambda"])
    try:
        spec = MultiSubordinated(fs, lam, nu)
    except ValueError as e:
        raise ValidationError(str(e)) from None
    n = _n_samples(cfg)
    x = _draw(spec, t, n, cfg)
    out = _frequency_table(x, pmf_table(spec, t), {"process": spec.encode()})
    try:
        m = moments_multi_timechanged(fs, lam, 1.0 if nu is None else nu, t)
        out.meta.update({"mean": m.mean, "variance": m.variance, "sample_mean": float(x.mean())})
    except InfiniteMomentError:
        out.meta.update({"mean": math.inf, "variance": math.inf})
    return out


def run_ggbm(cfg) -> Table:
    H, nu, lam = float(cfg["H"]), float(cfg["nu"]), float(cfg["lambda"])
    try:
        spec = GgbmTime(H, nu, lam)
    except ValueError as e:
        raise ValidationError(str(e)) from None
    n = _n_samples(cfg)
    rows = []
    for u in np.linspace(0.0, 0.8, 5):
        for t in np.linspace(0.2, 2.0, 5):
            a = pgf(spec, float(u), float(t))
            b = float(ml(nu / 2, 1.0, -lam * (1 - u) * t ** (H * nu)))
            rows.append([float(u), float(t), a, b, abs(a - b)])
    meta = {}
    if nu < 2:
        # the clock |G(1)| has the M-Wright density M_{nu/2}
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            clock = run_chunked(
                lambda g, m: sample_ggbm_clock(H, nu, 1.0, g, m), n, RngStream(int(cfg["seed"])), _threads(cfg)
            )
        cdf_vals = m_wright_cdf_grid(nu / 2, np.sort(clock))
        i = np.arange(1, clock.size + 1) / clock.size
        ks = float(max(np.max(i - cdf_vals), np.max(cdf_vals - (i - 1.0 / clock.size))))
        meta = {"clock_ks_distance": ks, "clock_samples": int(clock.size)}
    return Table(["u", "t", "pgf", "mittag_leffler", "abs_diff"], rows, meta)


def run_renewal(cfg) -> Table:
    k = int(cfg["k"])
    if k < 0:
        raise ValidationError("--k must be >= 0")
    _positive(cfg, "lambda")
    lam, nu = float(cfg["lambda"]), float(cfg["nu"])
    grid = _grid(cfg)
    if cfg.get("H") is not None:
        H = float(cfg["H"])
        if not 0 < H < 1 or not 0 < nu <= 2:
            raise ValidationError("need H in (0, 1) and nu in (0, 2]")
        res = renewal_gap_ggbm(k, H, nu, lam, grid)
    else:
        alpha = float(cfg["alpha"])
        if not 0 < alpha <= 1 or not 0 < nu <= 1:
            raise ValidationError("need alpha and nu in (0, 1]")
        if k < 1:
            raise ValidationError("--k must be >= 1 for the space-time comparison")
        res = renewal_gap_spacetime(k, alpha, nu, lam, grid)
    names = ["lt_process", "lt_renewal"]
    extra = [c for c in res.columns if c not in names]
    rows = []
    for i, g in enumerate(res.gammas):
        row = [float(g), *[float(res.columns[c][i]) for c in names], float(res.values[i])]
        row += [_plain(res.columns[c][i]) for c in extra]
        rows.append(row)
    return Table(["gamma", *names, "gap", *extra], rows, {"label": res.label, "supremum": res.supremum})


def _plain(v):
    return float(v) if isinstance(v, (float, np.floating, int, np.integer)) else str(v)


def run_fracop_check(cfg) -> Table:
    H, nu, lam = float(cfg["H"]), float(cfg["nu"]), float(cfg["lambda"])
    if not 0 < H < 1 or not 0 < nu <= 2:
        raise ValidationError("need H in (0, 1) and nu in (0, 2]")
    _positive(cfg, "lambda")
    rows = []
    op = OperatorSpec(H, nu / 2)
    for u in (0.0, 0.5):
        # pgf of N(|G(t)|) is E_{nu/2}(-lam (1-u) t^{H nu}), i.e. c = lam (2H)^{nu/2} (1-u)
        c = lam * (2 * H) ** (nu / 2) * (1 - u)
        g, gp, p = ml_eigenfunction(H, nu, c)
        for t in np.linspace(0.1, 2.0, 5):
            val = caputo_mcbride(op, g, gp, [1.0], float(t), smoothing=p)
            ref = -c * float(g(t))
            rows.append(["eigenrelation", float(u), float(t), val, ref, _rel(val, ref)])
    # monomial rule and integer-order anchor
    val = ek_integral(1.0, 0.0, 0.5, lambda s: s, 1.0)
    ref = math.gamma(2) / math.gamma(2.5)
    rows.append(["monomial_rule", "", 1.0, val, ref, _rel(val, ref)])
    val = mcbride_power(OperatorSpec(H, 1.0), lambda s: s**2, lambda s: 2 * s, 1.0)
    rows.append(["order_one_anchor", "", 1.0, val, 2.0, _rel(val, 2.0)])
    # special-function anchors
    for x in (0.5, 5.0, 50.0):
        val, ref = float(ml(1.0, 1.0, -x)), math.exp(-x)
        rows.append(["ml_exponential", "", x, val, ref, _rel(val, ref)])
    for x in (0.0, 1.0, 5.0):
        val, ref = m_wright(0.5, x).value, math.exp(-x * x / 4) / math.sqrt(math.pi)
        rows.append(["mwright_half", "", x, val, ref, _rel(val, ref)])
    for gam in (0.5, 2.0):
        val = _ml_laplace(0.6, lam, gam)
        ref = gam ** (0.6 - 1) / (gam**0.6 + lam)
        rows.append(["ml_laplace", "", gam, val, ref, _rel(val, ref)])
    return Table(["check", "u", "t", "value", "reference", "rel_err"], rows, {"H": H, "nu": nu})


def _ml_laplace(nu, lam, gam):
    f = lambda s: math.exp(-gam * s) * float(ml(nu, 1.0, -lam * s**nu))
    v1, _ = integrate.quad(f, 0, 1, epsabs=1e-13, limit=200)
    v2, _ = integrate.quad(f, 1, np.inf, epsabs=1e-13, limit=200)
    return v1 + v2


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


RUNNERS = {
    "hitting": run_hitting,
    "pmf": run_pmf,
    "sample": run_sample,
    "iterate": run_iterate,
    "multi": run_multi,
    "ggbm": run_ggbm,
    "renewal": run_renewal,
    "fracop-check": run_fracop_check,
}

DEFAULTS = {
    "hitting": {"alpha": 0.5, "lambda": 1.0, "k_max": 8, "n_samples": 100_000, "seed": 0, "horizon": None},
    "pmf": {"process": None, "lambda": 1.0, "t": 1.0, "k_max": None},
    "sample": {"process": None, "lambda": 1.0, "t": 1.0, "n_samples": 100_000, "seed": 0},
    "iterate": {"alpha": 0.8, "gammas": "0.9,0.9", "lambda": 1.0, "t": 1.0, "n_samples": 100_000, "seed": 0},
    "multi": {"fs": "stable:0.5+gamma:1", "nu": None, "lambda": 1.0, "t": 1.0, "n_samples": 100_000, "seed": 0},
    "ggbm": {"H": 0.7, "nu": 0.8, "lambda": 1.0, "n_samples": 100_000, "seed": 0},
    "renewal": {
        "alpha": 0.5,
        "nu": 0.6,
        "H": None,
        "k": 1,
        "lambda": 1.0,
        "gamma_min": 0.1,
        "gamma_max": 100.0,
        "gamma_points": 50,
    },
    "fracop-check": {"H": 0.7, "nu": 0.8, "lambda": 1.0},
}

# flag name -> (type, help)
FLAGS = {
    "alpha": (float, "stability index alpha"),
    "nu": (float, "time-fractional order nu"),
    "H": (float, "Hurst-type exponent H of the ggBm clock"),
    "lambda": (float, "Poisson rate lambda"),
    "t": (float, "time"),
    "k": (int, "level k"),
    "k_max": (int, "largest level / table length"),
    "n_samples": (int, "number of Monte Carlo draws"),
    "seed": (int, "random seed"),
    "horizon": (float, "Monte Carlo horizon (default: truncation bound 1e-4)"),
    "process": (str, "process encoding, e.g. space:0.7, time:0.6, spacetime:0.5,0.6, gamma:1, ggbm:0.7,0.8"),
    "gammas": (str, "comma-separated iteration indices"),
    "fs": (str, "Bernstein functions joined by '+', e.g. stable:0.5+gamma:1"),
    "gamma_min": (float, "smallest Laplace variable"),
    "gamma_max": (float, "largest Laplace variable"),
    "gamma_points": (int, "number of log-spaced Laplace variables"),
}


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _json_safe(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def render(name, cfg, table: Table, fmt: str) -> str:
    params = {k: cfg[k] for k in DEFAULTS[name] if k in cfg}
    header = {
        "experiment": name,
        "version": __version__,
        "seed": cfg.get("seed"),
        "params": params,
        **table.meta,
    }
    if fmt == "json":
        doc = {"meta": header, "columns": table.columns, "rows": table.rows}
        return json.dumps(_json_safe(doc), indent=1, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# fracpoint {__version__} experiment={name}\n")
    buf.write(f"# seed={cfg.get('seed')}\n")
    buf.write(f"# params={json.dumps(_json_safe(params), sort_keys=True)}\n")
    for k, v in table.meta.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


# --------------------------------------------------------------------------
# argument handling
# --------------------------------------------------------------------------


def _add_common(p):
    p.add_argument("--config", help="JSON file with parameters; explicit flags override it", default=argparse.SUPPRESS)
    p.add_argument("-o", "--output", help="output file (default: stdout)", default=argparse.SUPPRESS)
    p.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS, help="output format (default csv)")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (default $FRACPOINT_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracpoint",
        description="Reproducible experiments for subordinated and fractional Poisson processes.",
        epilog="Exit status: 0 success, 2 invalid input, 3 numeric-accuracy failure.",
    )
    parser.add_argument("--version", action="version", version=f"fracpoint {__version__}")
    parser.add_argument("--list", action="store_true", help="list registered experiments and exit")
    sub = parser.add_subparsers(dest="experiment", metavar="EXPERIMENT")
    for name in EXPERIMENTS:
        p = sub.add_parser(name, help=COVERS[name], description=COVERS[name])
        for key in DEFAULTS[name]:
            typ, hlp = FLAGS[key]
            flag = "--" + key.replace("_", "-")
            p.add_argument(flag, dest=key, type=typ, default=argparse.SUPPRESS, help=f"{hlp} (default {DEFAULTS[name][key]})")
        _add_common(p)
    return parser


def list_experiments() -> str:
    return "\n".join(f"{n:<13} {COVERS[n]}" for n in EXPERIMENTS) + "\n"


def _load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise ValidationError(f"cannot read config {path!r}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise ValidationError(f"config {path!r} is not valid JSON: {e}") from None
    if not isinstance(data, dict):
        raise ValidationError("config must be a JSON object")
    out = {}
    for k, v in data.items():
        key = k.replace("-", "_")
        if key == "gamma_grid":
            if isinstance(v, dict):
                out.update({f"gamma_{s}": v[s] for s in ("min", "max", "points") if s in v})
            elif isinstance(v, (list, tuple)) and len(v) == 3:
                out.update(dict(zip(("gamma_min", "gamma_max", "gamma_points"), v)))
            else:
                raise ValidationError("gamma_grid must be {min, max, points} or [min, max, points]")
        else:
            out[key] = v
    return out


def resolve(ns: dict) -> tuple[str, dict]:
    """Merge defaults, config file and flags (in increasing priority)."""
    file_cfg = _load_config(ns["config"]) if ns.get("config") else {}
    name = ns.get("experiment") or file_cfg.get("experiment")
    if name not in RUNNERS:
        raise ValidationError(f"unknown experiment {name!r}; choose from {', '.join(EXPERIMENTS)}")
    allowed = set(DEFAULTS[name]) | {"experiment", "output", "format", "threads", "config"}
    unknown = sorted(set(file_cfg) - allowed)
    if unknown:
        raise ValidationError(f"config keys not used by {name!r}: {', '.join(unknown)}")
    cfg = {**DEFAULTS[name], **file_cfg, **{k: v for k, v in ns.items() if k != "list"}}
    cfg["experiment"] = name
    cfg.setdefault("format", "csv")
    if cfg["format"] not in ("csv", "json"):
        raise ValidationError("format must be csv or json")
    return name, cfg


def run(name: str, cfg: dict) -> str:
    """Run one experiment and return the rendered artifact."""
    if "threads" in cfg and cfg["threads"] is not None and int(cfg["threads"]) < 1:
        raise ValidationError("--threads must be >= 1")
    try:
        table = RUNNERS[name](cfg)
    except (TypeError, KeyError) as e:
        raise ValidationError(f"bad parameter for {name}: {e}") from None
    return render(name, cfg, table, cfg["format"])


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        print("fracpoint: error: no experiment given (try --list or --help)", file=sys.stderr)
        return 2
    # a bare --config may name the experiment itself
    if argv[0] == "--config" and len(argv) >= 2:
        try:
            exp = _load_config(argv[1]).get("experiment")
        except ValidationError as e:
            print(f"fracpoint: error: {e}", file=sys.stderr)
            return 2
        if exp in RUNNERS:
            argv = [exp, *argv]
    try:
        ns = vars(parser.parse_args(argv))
    except SystemExit as e:
        return int(e.code or 0)
    if ns.get("list"):
        sys.stdout.write(list_experiments())
        return 0
    try:
        name, cfg = resolve(ns)
        text = run(name, cfg)
        out = cfg.get("output")
        if out:
            try:
                with open(out, "w", encoding="utf-8", newline="") as fh:
                    fh.write(text)
            except OSError as e:
                raise ValidationError(f"cannot write {out!r}: {e.strerror}") from None
        else:
            sys.stdout.write(text)
    except ValidationError as e:
        print(f"fracpoint: error: {e}", file=sys.stderr)
        return 2
    except AccuracyError as e:
        print(f"fracpoint: accuracy failure in {name}: {e}", file=sys.stderr)
        return 3
    except ValueError as e:
        print(f"fracpoint: error: {e}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
