"""Command-line validation runs emitting CSV tables.

Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
3 numerical failure, 4 Monte Carlo acceptance too low.
"""

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import __version__
from .config import ConfigError, build_model, load, merge, parse_text, resolve_schedule
from .edgeworth import doubling_discrepancy, sup_error_scan
from .errors import (InfeasibleChainError, InsufficientAcceptanceError, InvalidParameterError,
                     OutOfDomainError, TiltError)
from .gibbs import build_chain, growth_condition, z_smallness_check
from .mc import conditional_density_mc
from .model import classify
from .tilt import (diagnostics, log_mgf_laplace, log_mgf_quadrature, moments_asymptotic,
                   moments_exact, skewness, tilt_solve)

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_MC = 0, 1, 2, 3, 4
NOISE_FLOOR = 1e-10  # values below this count as converged in trend checks
STDERR_BAND = 3.0
DOUBLING_TOL = 1e-6
NEGATIVITY_FLAG = -1e-3


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, command, cfg, header, rows):
    """RFC-4180 CSV preceded by ``#`` lines embedding the full configuration."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# tiltgibbs {__version__} {command}\r\n")
        for key, value in cfg.items():
            fh.write(f"# {key} = {value}\r\n")
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _decreasing(values, strict=True, floor=NOISE_FLOOR):
    """Trend check that treats values under ``floor`` as already converged."""
    v = np.asarray(values, dtype=float)
    if np.all(v < floor):
        return True
    pairs = zip(v[:-1], v[1:])
    if strict:
        return all(b < a or (a < floor and b < floor) for a, b in pairs)
    return all(b <= a or b < floor for a, b in pairs)


class _Checks:
    def __init__(self):
        self.rows = []

    def add(self, name, passed, value):
        self.rows.append((name, bool(passed), value))

    @property
    def passed(self):
        return all(p for _, p, _ in self.rows)

    def report(self, stream):
        for name, passed, value in self.rows:
            print(f"  [{'PASS' if passed else 'FAIL'}] {name} ({_cell(value)})", file=stream)


def _finish(checks, out, command, cfg, stream):
    write_csv(os.path.join(out, f"{command}_checks.csv"), command, cfg,
              ["check", "passed", "value"], checks.rows)
    checks.report(stream)
    return EXIT_OK if checks.passed else EXIT_CHECK


def cmd_classify(cfg, stream=sys.stdout):
    """Regular-variation class of h and Karamata epsilon diagnostics."""
    model = build_model(cfg)
    report = classify(model, eta=cfg.eta)
    out = cfg.out
    write_csv(os.path.join(out, "classify.csv"), "classify", cfg,
              ["check", "passed", "witness"],
              [(c.name, c.passed, c.witness) for c in report.checks])
    write_csv(os.path.join(out, "classify_epsilon.csv"), "classify", cfg,
              ["x", "epsilon"], [tuple(r) for r in report.epsilon_values])
    print(f"{model}: class {report.regularity_class}, "
          f"beta_estimate {_cell(report.beta_estimate) or 'n/a'}", file=stream)
    for c in report.checks:
        print(f"  [{'PASS' if c.passed else 'FAIL'}] {c.name} ({_cell(c.witness)})", file=stream)
    return EXIT_OK if report.all_passed else EXIT_CHECK


def _moment_row(model, t):
    exact = moments_exact(model, t)
    row = {"t": t, "m_exact": exact.m, "s2_exact": exact.s2, "mu3_exact": exact.mu3,
           "skewness": skewness(model, t), "log_phi": log_mgf_quadrature(model, t)}
    try:
        lead = moments_asymptotic(model, t)
        diag = diagnostics(model, t) if t > math.e else None
        laplace = log_mgf_laplace(model, t)
    except OutOfDomainError:
        return row
    row.update(psi=lead.m, m_refined=moments_asymptotic(model, t, "refined").m,
               dpsi=lead.s2, mu3_asym=lead.mu3, log_phi_laplace=laplace,
               laplace_gap=abs(laplace - row["log_phi"]))
    if diag is not None:
        row.update(h2_sigma3=diag.h2_sigma3, h2_sigma4=diag.h2_sigma4,
                   log_sigma_over_K=diag.log_sigma_over_K, sup_h3_window=diag.sup_h3_window)
    return row


MOMENT_COLUMNS = ["t", "m_exact", "psi", "m_refined", "s2_exact", "dpsi", "mu3_exact",
                  "mu3_asym", "skewness", "log_phi", "log_phi_laplace", "laplace_gap",
                  "h2_sigma3", "h2_sigma4", "log_sigma_over_K", "sup_h3_window"]


def cmd_moments(cfg, stream=sys.stdout):
    """Exact versus asymptotic tilted moments and the Laplace MGF over a t grid."""
    model = build_model(cfg)
    grid = sorted(set(cfg.t_grid))
    rows = [_moment_row(model, t) for t in sorted(set([0.0] + grid))]
    write_csv(os.path.join(cfg.out, "moments.csv"), "moments", cfg, MOMENT_COLUMNS,
              [[r.get(c) for c in MOMENT_COLUMNS] for r in rows])
    print(f"{model}: base mean {_cell(rows[0]['m_exact'])}", file=stream)

    checks = _Checks()
    top = [r for r in rows if r["t"] in grid and "psi" in r]
    if len(top) < 2:
        checks.add("t_grid_in_laplace_range", False, len(top))
        return _finish(checks, cfg.out, "moments", cfg, stream)
    rel_m = [abs(r["m_exact"] - r["psi"]) / r["psi"] for r in top]
    rel_s2 = [abs(r["s2_exact"] - r["dpsi"]) / r["dpsi"] for r in top]
    gap = [r["laplace_gap"] for r in top]
    skew = [abs(r["skewness"]) for r in top]
    checks.add("mean_rel_error_decreasing", _decreasing(rel_m), rel_m[-1])
    checks.add("mean_rel_error_below_2pct", rel_m[-1] < 0.02, rel_m[-1])
    checks.add("var_rel_error_decreasing", _decreasing(rel_s2), rel_s2[-1])
    checks.add("var_rel_error_below_2pct", rel_s2[-1] < 0.02, rel_s2[-1])
    if all(r["mu3_asym"] != 0 for r in top):
        rel_mu3 = [abs(r["mu3_exact"] - r["mu3_asym"]) / abs(r["mu3_asym"]) for r in top]
        checks.add("mu3_rel_error_decreasing", _decreasing(rel_mu3), rel_mu3[-1])
        checks.add("mu3_rel_error_below_10pct", rel_mu3[-1] < 0.10, rel_mu3[-1])
    checks.add("laplace_gap_decreasing", _decreasing(gap), gap[-1])
    checks.add("laplace_gap_below_0.05", gap[-1] < 0.05, gap[-1])
    checks.add("skewness_decreasing", _decreasing(skew, floor=1e-6), skew[-1])
    checks.add("skewness_below_0.05", skew[-1] < 0.05, skew[-1])
    return _finish(checks, cfg.out, "moments", cfg, stream)


def cmd_edgeworth(cfg, stream=sys.stdout):
    """Edgeworth expansion against the Fourier oracle along an a_n schedule."""
    cfg = cfg.with_defaults(n_grid=(8, 16, 32, 64), a_schedule="rate:2,0.05")
    model = build_model(cfg)
    levels = resolve_schedule(cfg, model)
    results = [sup_error_scan(model, a, n) for n, a in zip(cfg.n_grid, levels)]
    write_csv(os.path.join(cfg.out, "edgeworth.csv"), "edgeworth", cfg,
              ["n", "a_n", "x", "rho_hat", "rho_oracle", "abs_err"],
              [(r.n, r.a_n, *row) for r in results for row in r.rows()])
    summary = [(r.n, r.a_n, r.sup_err, r.scaled_err, float(np.min(r.rho_hat))) for r in results]
    write_csv(os.path.join(cfg.out, "edgeworth_summary.csv"), "edgeworth", cfg,
              ["n", "a_n", "sup_err", "scaled_err", "min_rho_hat"], summary)
    for row in summary:
        print(f"{model} n={row[0]} a_n={row[1]:.6g}: scaled_err {row[3]:.3e}", file=stream)

    checks = _Checks()
    scaled = [r.scaled_err for r in results]
    checks.add("scaled_err_non_increasing", _decreasing(scaled, strict=False, floor=1e-9),
               scaled[-1])
    first = results[0]
    gap = doubling_discrepancy(model, first.a_n, first.n)
    checks.add("oracle_doubling_identity", gap < DOUBLING_TOL, gap)
    low = min(s[4] for s in summary)
    if low < NEGATIVITY_FLAG:
        print(f"  note: Edgeworth density dips to {low:.3e} (allowed by the expansion)",
              file=stream)
    return _finish(checks, cfg.out, "edgeworth", cfg, stream)


GIBBS_COLUMNS = ["n", "a_n", "k", "log_g_m", "log_g_an", "abs_diff", "growth_value",
                 "growth_pass", "max_abs_z", "sqrt_n_max_z2", "value", "stderr",
                 "n_samples", "acceptance_rate", "seed", "ratio", "ratio_z"]


def cmd_gibbs(cfg, stream=sys.stdout):
    """Re-centred tilt chain versus Monte Carlo conditional density."""
    cfg = cfg.with_defaults(n_grid=(100, 400), a_schedule="3")
    model = build_model(cfg)
    levels = resolve_schedule(cfg, model)
    offsets = np.asarray(cfg.y_offsets)
    rows, chain_rows = [], []
    checks = _Checks()
    for n, a in zip(cfg.n_grid, levels):
        s = math.sqrt(moments_exact(model, tilt_solve(model, a)).s2)
        growth = growth_condition(model, a, n, cfg.growth_threshold)
        if not growth.passed:
            print(f"  warning: growth condition fails at n={n} (value {growth.value:.3g})",
                  file=stream)
        for k in range(1, len(offsets) + 1):
            y = a + s * offsets[:k]
            chain = build_chain(model, a, n, y)
            z = z_smallness_check(chain)
            row = [n, a, k, chain.log_g_m, chain.log_g_an, abs(chain.log_g_m - chain.log_g_an),
                   growth.value, growth.passed, z.max_abs_z, z.sqrt_n_max_z2]
            if cfg.mc:
                est = conditional_density_mc(model, a, n, y, delta=cfg.delta,
                                             n_samples=cfg.samples, seed=cfg.seed)
                theory = math.exp(chain.log_g_m)
                ratio_z = (est.value - theory) / est.stderr
                row += [est.value, est.stderr, est.n_samples, est.acceptance_rate, est.seed,
                        est.value / theory, ratio_z]
                checks.add(f"mc_agrees_n{n}_k{k}", abs(ratio_z) <= STDERR_BAND, ratio_z)
            else:
                row += [None] * 7
            rows.append(row)
        chain_rows += [(n, a, *r) for r in chain.rows()]
    write_csv(os.path.join(cfg.out, "gibbs.csv"), "gibbs", cfg, GIBBS_COLUMNS, rows)
    write_csv(os.path.join(cfg.out, "gibbs_chain.csv"), "gibbs", cfg,
              ["n", "a_n", "i", "t_i", "m_i", "s2_i", "z_i"], chain_rows)
    for k in range(1, len(offsets) + 1):
        diffs = [r[5] for r in rows if r[2] == k]
        checks.add(f"product_gap_decreasing_k{k}", _decreasing(diffs, strict=False), diffs[-1])
    for r in rows:
        extra = f", ratio {r[15]:.4f} ({r[16]:+.2f} se)" if cfg.mc else ""
        print(f"{model} n={r[0]} a_n={r[1]:.6g} k={r[2]}: |log g_m - log g_an| {r[5]:.3e}{extra}",
              file=stream)
    return _finish(checks, cfg.out, "gibbs", cfg, stream)


COMMANDS = {"classify": cmd_classify, "moments": cmd_moments,
            "edgeworth": cmd_edgeworth, "gibbs": cmd_gibbs}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value run configuration (overrides flags)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output directory (default $TILTGIBBS_OUT or .)")
    common.add_argument("--family", help="weibull[:k], exp_exp or power[:beta]")
    common.add_argument("--t-grid", dest="t_grid", help="comma-separated tilt values")
    common.add_argument("--n-grid", dest="n_grid", help="comma-separated sample sizes")
    common.add_argument("--a-schedule", dest="a_schedule", help="rate:a0,delta or a list")
    common.add_argument("--delta", type=float, help="slab half-width")
    common.add_argument("--samples", type=int, help="Monte Carlo sample count")
    common.add_argument("--y-offsets", dest="y_offsets", help="conditioning offsets in units of s")
    common.add_argument("--no-mc", dest="mc", action="store_const", const=False,
                        help="skip the Monte Carlo comparison")
    parser = argparse.ArgumentParser(prog="tiltgibbs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        summary = (fn.__doc__ or name).splitlines()[0].rstrip(".")
        sub.add_parser(name, parents=[common], help=summary)
    return parser


def _flag_values(args):
    raw = {k: getattr(args, k) for k in ("seed", "out", "family", "t_grid", "n_grid",
                                         "a_schedule", "delta", "samples", "y_offsets", "mc")}
    text = "".join(f"{k} = {v}\n" for k, v in raw.items()
                   if v is not None and k in ("t_grid", "n_grid", "y_offsets"))
    values = {k: v for k, v in raw.items() if v is not None}
    values.update(parse_text(text))
    return values


def main(argv=None, stream=None):
    stream = stream or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        file_values = load(args.config) if args.config else {}
        cfg = merge(_flag_values(args), file_values)
        os.makedirs(cfg.out, exist_ok=True)
        return COMMANDS[args.command](cfg, stream)
    except InsufficientAcceptanceError as exc:
        print(f"error: {exc}\nhint: raise --delta or --samples", file=sys.stderr)
        return EXIT_MC
    except (ConfigError, InvalidParameterError, InfeasibleChainError, OutOfDomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (TiltError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
