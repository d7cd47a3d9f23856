"""Command-line sweeps over block length and rate, emitting CSV plus a JSON
sidecar describing the conventions used."""

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import kernels
from .bounds import CodeParams, gallager_bound, rare_bound
from .exact import DecoderSpec, bsc_exact, ge_exact
from .markov import ChannelParams, occupancy_pmf, stationary
from .montecarlo import SimConfig, estimate
from .specialfn import LOG2

QUANTITIES = ("bound_gallager", "bound_rare", "exact_md", "exact_ml", "bsc", "occupancy", "simulate")
COLUMNS = (
    "quantity", "N", "rate_nats", "alpha", "beta", "eps_g", "eps_b", "rho_star", "value",
    "value_gg", "value_gb", "value_bg", "value_bb", "ties", "decoder", "seed",
    "rate", "m", "std_err",
)
FIG_RATES = "0.25,0.3,0.35,0.4,0.45,0.5,0.55,0.6,0.65,0.7,0.75"

PRESETS = {
    "fig2": {
        "quantity": "bound_gallager,bound_rare",
        "rates": FIG_RATES,
        "N": "50,75,100",
        "n_alpha": 4.0,
        "n_beta": 6.0,
        "eps_g": 0.01,
        "eps_b": 0.1,
        "rate_unit": "bits",
        "rho_order": "per_entry",
    },
    "fig3": {
        "quantity": "exact_ml,exact_md,bound_rare",
        "rates": FIG_RATES,
        "N": "50,75",
        "alpha": 4.0 / 75.0,
        "beta": 6.0 / 75.0,
        "eps_g": 0.01,
        "eps_b": 0.1,
        "rate_unit": "bits",
        "ties": "error",
        "rho_order": "per_entry",
    },
}

DEFAULTS = {
    "rate_unit": "nats",
    "decoder": "ml",
    "ties": "error",
    "averaging": "stationary",
    "rho_order": "per_entry",
    "trials": 10_000,
    "seed": 0,
    "jobs": 1,
}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    quantities: tuple
    rates: tuple  # in the input unit
    blocklengths: tuple
    rate_unit: str
    averaging: str
    scaling: str  # "fixed" or "rare"
    alpha: float | None
    beta: float | None
    n_alpha: float | None
    n_beta: float | None
    eps_g: float | None
    eps_b: float | None
    decoder: str
    ties: str
    rho_order: str
    p: float | None
    m_codewords: float | None
    trials: int
    seed: int

    def rate_nats(self, rate):
        return rate * LOG2 if self.rate_unit == "bits" else rate

    def transition_probs(self, n):
        if self.scaling == "rare":
            return self.n_alpha / n, self.n_beta / n
        return self.alpha, self.beta

    def rate_constants(self, n):
        if self.scaling == "rare":
            return self.n_alpha, self.n_beta
        return n * self.alpha, n * self.beta


def _floats(text, name):
    try:
        out = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise UsageError(f"--{name} expects a comma-separated list of numbers, got {text!r}") from None
    if not out:
        raise UsageError(f"--{name} is empty")
    return out


def _ints(text, name):
    vals = _floats(text, name)
    if any(v != int(v) or v < 1 for v in vals):
        raise UsageError(f"--{name} expects positive integers, got {text!r}")
    return tuple(int(v) for v in vals)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="fscbound",
        description="Failure-probability bounds, exact values and simulations for random codes "
        "over the Gilbert-Elliott channel.",
    )
    ap.add_argument("preset", nargs="?", choices=sorted(PRESETS), help="predefined figure sweep")
    ap.add_argument("--quantity", help="comma list of: " + ", ".join(QUANTITIES))
    ap.add_argument("--rates", help="comma list of rates")
    ap.add_argument("--N", dest="N", help="comma list of block lengths")
    ap.add_argument("--alpha", type=float, help="g->b transition probability")
    ap.add_argument("--beta", type=float, help="b->g transition probability")
    ap.add_argument("--n-alpha", type=float, help="N * alpha, held fixed as N varies")
    ap.add_argument("--n-beta", type=float, help="N * beta, held fixed as N varies")
    ap.add_argument("--eps-g", type=float, help="good-state crossover probability")
    ap.add_argument("--eps-b", type=float, help="bad-state crossover probability")
    ap.add_argument("--rate-unit", choices=("nats", "bits"))
    ap.add_argument("--decoder", choices=("md", "ml"), help="decoder for --quantity simulate")
    ap.add_argument("--ties", choices=("error", "random"))
    ap.add_argument("--averaging", choices=("stationary", "per-transition"))
    ap.add_argument("--rho-order", choices=("per_entry", "averaged"),
                    help="minimize rho per (s0, sN) entry or on the averaged value")
    ap.add_argument("--p", type=float, help="crossover probability for --quantity bsc")
    ap.add_argument("--M", type=float, help="codebook size (overrides exp(N R) for bsc and simulate)")
    ap.add_argument("--trials", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--jobs", type=int, help="worker processes for sweep points")
    ap.add_argument("--out", help="CSV path; a <out>.meta.json sidecar is written next to it")
    return ap


def make_spec(args):
    """Merge preset and defaults under explicit flags and validate."""
    merged = dict(DEFAULTS)
    if args.preset:
        preset = dict(PRESETS[args.preset])
        # an explicit transition pair replaces the preset's pair of the other kind
        if args.alpha is not None or args.beta is not None:
            preset.pop("n_alpha", None)
            preset.pop("n_beta", None)
        if args.n_alpha is not None or args.n_beta is not None:
            preset.pop("alpha", None)
            preset.pop("beta", None)
        merged.update(preset)
    for key, val in vars(args).items():
        if val is not None and key not in ("preset", "out"):
            merged[key] = val
    for key in ("quantity", "rates", "N"):
        if key not in merged:
            raise UsageError(f"missing --{key} (or a preset)")
    quantities = tuple(q.strip() for q in merged["quantity"].split(",") if q.strip())
    bad = [q for q in quantities if q not in QUANTITIES]
    if bad or not quantities:
        raise UsageError(f"unknown quantity {bad or merged['quantity']!r}; choose from {', '.join(QUANTITIES)}")
    fixed = merged.get("alpha") is not None or merged.get("beta") is not None
    rare = merged.get("n_alpha") is not None or merged.get("n_beta") is not None
    if fixed and rare:
        raise UsageError("give either --alpha/--beta or --n-alpha/--n-beta, not both")
    if fixed and (merged.get("alpha") is None or merged.get("beta") is None):
        raise UsageError("--alpha and --beta must be given together")
    if rare and (merged.get("n_alpha") is None or merged.get("n_beta") is None):
        raise UsageError("--n-alpha and --n-beta must be given together")
    needs_channel = set(quantities) - {"bsc"}
    if needs_channel and not (fixed or rare):
        raise UsageError(f"{', '.join(sorted(needs_channel))} needs --alpha/--beta or --n-alpha/--n-beta")
    if needs_channel - {"occupancy"} and (merged.get("eps_g") is None or merged.get("eps_b") is None):
        raise UsageError("--eps-g and --eps-b are required")
    if "bsc" in quantities and merged.get("p") is None:
        raise UsageError("--quantity bsc requires --p")
    if "simulate" in quantities:
        m = merged.get("M")
        if m is None or m != int(m) or m < 2:
            raise UsageError("--quantity simulate requires an integer --M >= 2")
    if merged["trials"] < 1:
        raise UsageError("--trials must be >= 1")
    if merged["jobs"] < 1:
        raise UsageError("--jobs must be >= 1")
    rates = _floats(merged["rates"], "rates")
    if any(r <= 0 for r in rates):
        raise UsageError("rates must be positive")
    return SweepSpec(
        quantities=quantities,
        rates=rates,
        blocklengths=_ints(merged["N"], "N"),
        rate_unit=merged["rate_unit"],
        averaging=merged["averaging"],
        scaling="rare" if rare else "fixed",
        alpha=merged.get("alpha"),
        beta=merged.get("beta"),
        n_alpha=merged.get("n_alpha"),
        n_beta=merged.get("n_beta"),
        eps_g=merged.get("eps_g"),
        eps_b=merged.get("eps_b"),
        decoder=merged["decoder"],
        ties=merged["ties"],
        rho_order=merged["rho_order"],
        p=merged.get("p"),
        m_codewords=merged.get("M"),
        trials=int(merged["trials"]),
        seed=int(merged["seed"]),
    )


def _channel(spec, n):
    alpha, beta = spec.transition_probs(n)
    eps_g = spec.eps_g if spec.eps_g is not None else 0.0
    eps_b = spec.eps_b if spec.eps_b is not None else 0.0
    return ChannelParams(alpha, beta, eps_g, eps_b)


def _code(spec, n, rate):
    return CodeParams(n, spec.rate_nats(rate))


def _row(spec, quantity, n, rate, **fields):
    row = dict.fromkeys(COLUMNS)
    row.update(quantity=quantity, N=n)
    if rate is not None:
        row.update(rate=rate, rate_nats=spec.rate_nats(rate))
    if quantity != "bsc":
        row.update(alpha=spec.transition_probs(n)[0], beta=spec.transition_probs(n)[1])
        row.update(eps_g=spec.eps_g, eps_b=spec.eps_b)
    row.update(fields)
    return row


def _table_fields(spec, table, averaged):
    out = {
        "value_gg": table[0, 0], "value_gb": table[0, 1],
        "value_bg": table[1, 0], "value_bb": table[1, 1],
    }
    if spec.averaging == "stationary":
        out["value"] = averaged
    return out


def compute_point(spec, quantity, n, rate):
    """Rows for one sweep point; every value comes straight from the library."""
    if quantity == "occupancy":
        params = _channel(spec, n)
        table = occupancy_pmf(params, n)
        marginal = table.marginal(stationary(params))
        rows = []
        for m in range(n + 1):
            fields = {
                "m": m,
                "value_gg": table.p[m, 0, 0], "value_gb": table.p[m, 0, 1],
                "value_bg": table.p[m, 1, 0], "value_bb": table.p[m, 1, 1],
            }
            if spec.averaging == "stationary":
                fields["value"] = marginal[m]
            rows.append(_row(spec, quantity, n, None, **fields))
        return rows
    code = _code(spec, n, rate)
    if quantity == "bsc":
        m = spec.m_codewords if spec.m_codewords is not None else code.m_codewords
        value = bsc_exact(n, spec.p, m, spec.ties)
        return [_row(spec, quantity, n, rate, value=value, m=m, ties=spec.ties, eps_g=spec.p, eps_b=spec.p)]
    if quantity == "bound_gallager":
        res = gallager_bound(_channel(spec, n), code, order=spec.rho_order)
        return [_row(spec, quantity, n, rate, rho_star=res.rho_star,
                     **_table_fields(spec, res.per_transition, res.averaged))]
    if quantity == "bound_rare":
        a_c, b_c = spec.rate_constants(n)
        res = rare_bound(a_c, b_c, spec.eps_g, spec.eps_b, code, order=spec.rho_order)
        return [_row(spec, quantity, n, rate, rho_star=res.rho_star,
                     **_table_fields(spec, res.per_transition, res.averaged))]
    if quantity in ("exact_md", "exact_ml"):
        decoder = DecoderSpec(quantity[-2:], spec.ties)
        res = ge_exact(_channel(spec, n), code, decoder)
        return [_row(spec, quantity, n, rate, ties=spec.ties, decoder=decoder.rule, m=res.m_codewords,
                     **_table_fields(spec, res.per_transition, res.averaged))]
    if quantity == "simulate":
        m = int(spec.m_codewords)
        cfg = SimConfig(_channel(spec, n), n, m, DecoderSpec(spec.decoder, spec.ties), spec.trials, spec.seed)
        res = estimate(cfg)
        f = res.per_transition_failures
        t = np.maximum(res.per_transition_trials, 1)
        rates = f / t
        return [_row(spec, quantity, n, rate, ties=spec.ties, decoder=spec.decoder, seed=spec.seed, m=m,
                     std_err=res.std_err, **_table_fields(spec, rates, res.p_hat))]
    raise UsageError(f"unknown quantity {quantity!r}")


def _points(spec):
    pts = []
    for q in spec.quantities:
        for n in spec.blocklengths:
            if q == "occupancy":
                pts.append((q, n, None))
            else:
                pts.extend((q, n, r) for r in spec.rates)
    return sorted(set(pts), key=lambda p: (p[0], p[1], -1.0 if p[2] is None else p[2]))


def run_sweep(spec, jobs=1):
    pts = _points(spec)
    if jobs > 1 and len(pts) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(compute_point, [spec] * len(pts), *zip(*pts)))
    else:
        parts = [compute_point(spec, *p) for p in pts]
    return [row for part in parts for row in part]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if v == int(v) and abs(v) < 1e15:
            return str(int(v))
        return format(v, ".9g")
    return str(v)


def to_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in COLUMNS])
    return buf.getvalue()


def metadata(spec, preset):
    from importlib.metadata import PackageNotFoundError, version

    try:
        pkg_version = version("artifact")
    except PackageNotFoundError:
        pkg_version = "unknown"
    return {
        "preset": preset,
        "spec": asdict(spec),
        "conventions": {
            "rate_unit": spec.rate_unit,
            "codebook_size": "M = exp(N * rate_nats), used as a real number",
            "occupancy": "n_g counts good slots among s_0..s_{N-1}",
            "averaging": "sum over s0 of pi(s0) * sum over sN; pi is the stationary law"
            if spec.averaging == "stationary" else "per-transition entries only",
            "rho_minimization": spec.rho_order,
            "tie_policy": spec.ties,
            "ml_score": "ceil(gamma * e_g) + e_b with a 1e-12 integer snap",
            "value_range": "bounds are reported unclamped and may exceed 1",
        },
        "kernel_backend": kernels.backend,
        "version": pkg_version,
    }


def _write_atomic(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    written = []
    try:
        spec = make_spec(args)
        jobs = args.jobs or DEFAULTS["jobs"]
        rows = run_sweep(spec, jobs=jobs)
        text = to_csv(rows)
        if args.out:
            _write_atomic(args.out, text)
            written.append(args.out)
            meta = json.dumps(metadata(spec, args.preset), sort_keys=True, indent=2) + "\n"
            _write_atomic(args.out + ".meta.json", meta)
            written.append(args.out + ".meta.json")
        else:
            sys.stdout.write(text)
    except (ValueError, OSError) as exc:
        for path in written:
            if os.path.exists(path):
                os.unlink(path)
        msg = " ".join(str(exc).split())
        print(f"fscbound: error: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
