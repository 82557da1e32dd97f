"""Experiment runner.

Subcommands drive the library modules end to end and write CSV/JSON outputs
plus a manifest (config echo, seed, package versions, wall time) into the
output directory. Outputs are deterministic byte for byte given the same
config and seed; the manifest carries the wall time and is the one file that
is run metadata rather than data.

Config files are plain text `key = value` lines (# comments allowed). Keys:

  d, n, model (nn|spread), L      lattice
  p, p1, p2                       levels for single-level subcommands
  p_grid = 0.05,0.06,...          explicit sweep grid, or
  p_c = ..., lambda_grid = ...,   window-style grid p = p_c + C lam V^(-1/3)
  window_c = 1.0                  the constant C in the window grid
  m_rule = vpow:0.6 | absolute:50 | chi5
  replicates, seed, threads
  eps1, eps2                      sprinkle distances for `spectra`
  kappa_target, window_rtol       `window` target chi = kappa V^(1/3)
  c2, lambda, q                   component-graph weight/intensity knobs
  dt, tol                         `zlambda` discretization
  tau_replicates, j_max           `diagrams`
  c_dl, slack_product, slack_trace4   diagnostic-table constants

Exit codes: 0 success, 2 config error, 3 resource cap, 4 numeric failure.
"""

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np
import scipy

from . import __version__, coalescent, components, delta, diagrams, lattice, oracle, rng, zlambda
from .coupling import CoupledConfiguration
from .errors import (
    ConvergenceError,
    DegenerateIndexError,
    DivergenceError,
    FitError,
    RangeError,
    ResourceCapError,
    SimulationError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERIC = 4


class ConfigError(Exception):
    pass


@dataclass
class ExperimentConfig:
    d: int = 2
    n: int = 8
    model: str = lattice.NEAREST_NEIGHBOR
    L: int = 1
    seed: int = 0
    seed_text: str = "0"
    threads: int = 1
    replicates: int = 10
    p: float = None
    p1: float = None
    p2: float = None
    p_grid: tuple = None
    p_c: float = None
    lambda_grid: tuple = None
    window_c: float = 1.0
    m_rule: str = "vpow:0.6"
    eps1: float = None
    eps2: float = None
    kappa_target: float = 1.0
    window_rtol: float = 0.10
    window_probe_reps: int = 3
    c2: float = 1.0
    lam: float = 0.0
    q: float = None
    dt: float = 1e-4
    tol: float = 0.05
    tau_replicates: int = 200
    j_max: int = 200
    fd_delta: float = 0.005
    c_dl: float = 1.0
    slack_product: float = 0.1
    slack_trace4: float = 0.1
    max_volume: int = lattice.DEFAULT_MAX_VOLUME

    def spec(self):
        return lattice.TorusSpec(d=self.d, n=self.n, model=self.model,
                                 L=self.L, max_volume=self.max_volume)

    def grid(self):
        """The p grid: explicit, or window-style around p_c."""
        if self.p_grid is not None:
            return list(self.p_grid)
        if self.p_c is not None and self.lambda_grid is not None:
            V = self.spec().V
            return [self.p_c + self.window_c * lam * V ** (-1.0 / 3.0)
                    for lam in self.lambda_grid]
        raise ConfigError("need p_grid, or p_c together with lambda_grid")

    def threshold(self, spec, chi_hat=None):
        rule = self.m_rule.strip()
        if rule.startswith("absolute:"):
            return max(1, int(rule.split(":", 1)[1]))
        if rule.startswith("vpow:"):
            return components.default_threshold(spec, float(rule.split(":", 1)[1]))
        if rule == "chi5":
            if chi_hat is None:
                raise ConfigError("chi5 threshold rule needs a chi_hat")
            return components.chi_threshold(chi_hat, spec)
        raise ConfigError(f"unknown m_rule {rule!r}")


_INT_KEYS = {"d", "n", "L", "threads", "replicates", "tau_replicates",
             "j_max", "window_probe_reps", "max_volume"}
_FLOAT_KEYS = {"p", "p1", "p2", "p_c", "window_c", "eps1", "eps2",
               "kappa_target", "window_rtol", "c2", "lam", "q", "dt", "tol",
               "fd_delta", "c_dl", "slack_product", "slack_trace4"}
_GRID_KEYS = {"p_grid", "lambda_grid"}
_ALIASES = {"lambda": "lam", "R": "tau_replicates", "M_rule": "m_rule"}


def load_config(path):
    """Parse a key = value config file into an ExperimentConfig."""
    cfg = ExperimentConfig()
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = _ALIASES.get(key, key)
        if key == "seed":
            cfg.seed = rng.parse_seed(value)
            cfg.seed_text = value
        elif key in _INT_KEYS:
            setattr(cfg, key, int(value))
        elif key in _FLOAT_KEYS:
            setattr(cfg, key, float(value))
        elif key in _GRID_KEYS:
            setattr(cfg, key, tuple(float(tok) for tok in value.split(",") if tok.strip()))
        elif key in ("model", "m_rule"):
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return cfg


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) for x in row) + "\n")


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def _pmap(fn, tasks, threads):
    """Order-preserving map, optionally across worker processes."""
    if threads <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


# --- sweep -------------------------------------------------------------------

SWEEP_HEADER = ["seed", "p", "num_components", "c1", "c2", "c3", "chi_hat",
                "S2_M", "S3_M", "max_size", "M"]


def _sweep_task(args):
    cfg, rep = args
    spec = cfg.spec()
    child = rng.derive_seed(cfg.seed, rep)
    coupled = CoupledConfiguration(spec, child)
    grid = sorted(cfg.grid())
    snaps = components.sweep(coupled, grid)
    rows = []
    for part in snaps:
        chi_hat = part.chi_hat()
        M = cfg.threshold(spec, chi_hat=chi_hat)
        mom = components.cluster_moments(part, M)
        top = list(part.sorted_sizes[:3]) + [0, 0, 0]
        rows.append([child, part.p, part.num_components,
                     int(top[0]), int(top[1]), int(top[2]),
                     mom.chi_hat, mom.s2, mom.s3, mom.max_size, M])
    return rows


def run_sweep(cfg, out):
    tasks = [(cfg, rep) for rep in range(cfg.replicates)]
    per_rep = _pmap(_sweep_task, tasks, cfg.threads)
    rows = [row for rep_rows in per_rep for row in rep_rows]
    path = out / "sweep.csv"
    _write_csv(path, SWEEP_HEADER, rows)
    return [path]


# --- window ------------------------------------------------------------------


def _probe_configs(cfg, reps):
    """Shared probe replicates; the same seeds at every probed level, so the
    probe-mean of chi_hat is a monotone function of p and bisection is exact."""
    spec = cfg.spec()
    return [CoupledConfiguration(spec, rng.derive_seed(cfg.seed, 7000, i))
            for i in range(reps)]


def _chi_mean(probes, p):
    return float(np.mean([components.build_components(c, p).chi_hat()
                          for c in probes]))


def locate_window(cfg, target=None, max_iter=18):
    """Bisect for the level where the probe-mean chi_hat meets the target
    kappa_target * V^(1/3). Common random numbers across levels keep the
    probed function monotone, so the bracket always contains the crossing."""
    spec = cfg.spec()
    target = cfg.kappa_target * spec.V ** (1.0 / 3.0) if target is None else target
    probes = _probe_configs(cfg, cfg.window_probe_reps)
    p_lo = 0.0
    p_hi = 1.0 / max(spec.m - 1, 1)
    chi_mid = _chi_mean(probes, p_hi)
    while chi_mid < target and p_hi < 1.0:
        p_lo = p_hi
        p_hi = min(1.0, p_hi * 1.25)
        chi_mid = _chi_mean(probes, p_hi)
    mid = p_hi
    for _ in range(max_iter):
        mid = 0.5 * (p_lo + p_hi)
        chi_mid = _chi_mean(probes, mid)
        if abs(chi_mid - target) <= 0.5 * cfg.window_rtol * target:
            return mid, chi_mid, target
        if chi_mid < target:
            p_lo = mid
        else:
            p_hi = mid
    return mid, chi_mid, target


def _window_rep_task(args):
    cfg, p_star, rep = args
    spec = cfg.spec()
    child = rng.derive_seed(cfg.seed, 7000, rep)
    part = components.build_components(CoupledConfiguration(spec, child), p_star)
    return [child, p_star, int(part.sorted_sizes[0]), part.chi_hat(),
            part.num_components]


def run_window(cfg, out):
    spec = cfg.spec()
    p_star, chi_star, target = locate_window(cfg)
    tasks = [(cfg, p_star, rep) for rep in range(cfg.replicates)]
    rows = _pmap(_window_rep_task, tasks, cfg.threads)
    path = out / "window.csv"
    _write_csv(path, ["seed", "p", "c1", "chi_hat", "num_components"], rows)
    c1 = np.array([r[2] for r in rows], dtype=np.float64)
    scaled = c1 * spec.V ** (-2.0 / 3.0)
    summary = {
        "p_star": p_star,
        "chi_at_p_star": chi_star,
        "chi_target": target,
        "median_c1": float(np.median(c1)),
        "scaled_c1_quartiles": [float(np.percentile(scaled, q)) for q in (25, 50, 75)],
        "V": spec.V,
    }
    spath = out / "window.json"
    _write_json(spath, summary)
    return [path, spath]


# --- spectra -----------------------------------------------------------------


def _spectra_task(args):
    cfg, rep = args
    spec = cfg.spec()
    child = rng.derive_seed(cfg.seed, rep)
    coupled = CoupledConfiguration(spec, child)
    p = cfg.p
    part = components.build_components(coupled, p)
    chi_hat = part.chi_hat()
    M = cfg.threshold(spec, chi_hat=chi_hat)
    mom = components.cluster_moments(part, M)
    dm = delta.build_delta(coupled, p, M)
    report = {"seed": child, "p": p, "M": M, "K": dm.K, "chi_hat": chi_hat}
    nn = delta.norms(dm)
    report.update(frob2=nn.frob2, max_entry=nn.max_entry,
                  max_row_sq=nn.max_row_sq, trace4=nn.trace4,
                  trace4_is_estimate=nn.trace4_is_estimate)
    consts = delta.OmegaConstants(c_dl=cfg.c_dl, slack_product=cfg.slack_product,
                                  slack_trace4=cfg.slack_trace4)
    report["omega_good"] = [asdict(row) for row in
                            delta.omega_good_report(dm, mom, p, chi_hat, consts)]
    if dm.K >= 2:
        w = delta.w_functional(dm)
        report.update(t_min=w.t_min, w_value=w.w_value, S1=w.S1, S2=w.S2,
                      w_over_chi2=w.w_value / chi_hat**2)
        try:
            top = delta.spectrum(dm, k=min(2, dm.K))
            report["lambda1"] = float(top.eigenvalues[0])
            report["lambda2"] = (float(top.eigenvalues[1])
                                 if len(top.eigenvalues) > 1 else None)
            eps1 = cfg.eps1 if cfg.eps1 is not None else (
                cfg.p_c - p if cfg.p_c is not None else None)
            if eps1 is not None and eps1 > 0:
                eps2 = cfg.eps2 if cfg.eps2 is not None else eps1 / max(
                    np.log(spec.V), 2.0)
                qs = delta.q_system(dm, p, eps1, eps2)
                report.update(p2_star=qs.p2_star, lambda1_Q=qs.lambda1_Q,
                              c_star=qs.c_star)
        except (ConvergenceError, DegenerateIndexError, RangeError) as exc:
            report["spectral_error"] = str(exc)
    return report


def run_spectra(cfg, out):
    if cfg.p is None:
        raise ConfigError("spectra needs p")
    tasks = [(cfg, rep) for rep in range(cfg.replicates)]
    reports = _pmap(_spectra_task, tasks, cfg.threads)
    path = out / "spectra.jsonl"
    with open(path, "w") as fh:
        for rep in reports:
            fh.write(json.dumps(rep, sort_keys=True, default=_json_default) + "\n")
    return [path]


# --- couple ------------------------------------------------------------------


def _couple_task(args):
    cfg, rep = args
    spec = cfg.spec()
    child = rng.derive_seed(cfg.seed, rep)
    coupled = CoupledConfiguration(spec, child)
    p1, p2 = cfg.p1, cfg.p2
    part = components.build_components(coupled, p1)
    chi_hat = part.chi_hat()
    M = cfg.threshold(spec, chi_hat=chi_hat)
    dm = delta.build_delta(coupled, p1, M)
    if dm.K < 2:
        return None
    w = delta.w_functional(dm)
    dlt = cfg.fd_delta
    chi_plus = components.build_components(coupled, min(p1 + dlt, 1.0)).chi_hat()
    chi_minus = components.build_components(coupled, max(p1 - dlt, 0.0)).chi_hat()
    chi_prime = (chi_plus - chi_minus) / (2 * dlt)
    if chi_prime <= 0:
        # degenerate finite difference (tiny realization); fall back to the
        # mean-field derivative scale chi' ~ m chi^2
        chi_prime = spec.m * chi_hat**2
    if cfg.q is not None:
        q_int = cfg.q
    else:
        prefactor = spec.m * chi_hat**2 * w.t_min / ((1.0 - p1) * chi_prime)
        idx_probe = coalescent.WeightedIndex(sizes=dm.sizes, V=spec.V,
                                             c2=cfg.c2, q=0.0)
        q_int = prefactor * (1.0 / idx_probe.sigma2 + cfg.lam)
    idx = coalescent.WeightedIndex(sizes=dm.sizes, V=spec.V, c2=cfg.c2, q=q_int)
    rep_report = coalescent.couple_edges(idx, dm, p1, p2, q=q_int,
                                         seed=rng.derive_seed(child, 11))
    gcomp = coalescent.sample_gcomp(dm, p1, p2, mode="coupled", cfg=coupled)
    merged, _ = coalescent.merged_sizes(gcomp)
    top = list(merged[:10]) + [0.0] * 10
    return {
        "row": [child, p1, p2, dm.K, q_int, rep_report.disagreements,
                rep_report.sum_abs_diff, rep_report.sum_sq_diff, w.w_value]
               + [float(t) for t in top[:10]],
        "w_value": w.w_value,
        "sum_sq_diff": rep_report.sum_sq_diff,
        "disagreements": rep_report.disagreements,
    }


def run_couple(cfg, out):
    if cfg.p1 is None or cfg.p2 is None:
        raise ConfigError("couple needs p1 and p2")
    tasks = [(cfg, rep) for rep in range(cfg.replicates)]
    results = [r for r in _pmap(_couple_task, tasks, cfg.threads) if r is not None]
    header = (["seed", "p1", "p2", "K", "q", "disagreements", "sum_abs_pq",
               "sum_sq_pq", "w_value"] + [f"merged_{i+1}" for i in range(10)])
    path = out / "couple.csv"
    _write_csv(path, header, [r["row"] for r in results])
    summary = {
        "replicates": len(results),
        "mean_disagreements": float(np.mean([r["disagreements"] for r in results]))
        if results else None,
        "mean_sum_sq_pq": float(np.mean([r["sum_sq_diff"] for r in results]))
        if results else None,
        "mean_w_value": float(np.mean([r["w_value"] for r in results]))
        if results else None,
    }
    spath = out / "couple.json"
    _write_json(spath, summary)
    return [path, spath]


# --- zlambda -----------------------------------------------------------------


def _zlambda_task(args):
    cfg, rep = args
    child = rng.derive_seed(cfg.seed, rep)
    ev = zlambda.sample_zlambda(cfg.lam, cfg.dt, seed=child, tol=cfg.tol)
    top = list(ev.lengths[:10]) + [0.0] * 10
    return ([child, cfg.lam, cfg.dt, ev.horizon] + [float(t) for t in top[:10]]
            + [ev.l2_norm()])


def run_zlambda(cfg, out):
    tasks = [(cfg, rep) for rep in range(cfg.replicates)]
    rows = _pmap(_zlambda_task, tasks, cfg.threads)
    header = (["seed", "lambda", "dt", "T"] + [f"len_{i+1}" for i in range(10)]
              + ["l2_norm"])
    path = out / "zlambda.csv"
    _write_csv(path, header, rows)
    return [path]


# --- diagrams ----------------------------------------------------------------


def run_diagrams(cfg, out):
    if cfg.p is None:
        raise ConfigError("diagrams needs p")
    spec = cfg.spec()
    field_ = diagrams.estimate_tau(spec, cfg.seed, cfg.p, cfg.tau_replicates)
    fpath = out / "tau_field.bin"
    diagrams.dump_field(field_, fpath)
    chi_hat = field_.mean_cluster_size()
    plateau = diagrams.plateau_fit(field_, chi_hat)
    bound = diagrams.rw_bound_check(spec, cfg.j_max)
    errors = diagrams.diagram_errors(field_)
    report = {
        "p": cfg.p,
        "replicates": cfg.tau_replicates,
        "mean_cluster_size": chi_hat,
        "triangle": diagrams.triangle_diagram(field_),
        "triangle_se": errors["triangle_se"],
        "square": diagrams.square_diagram(field_),
        "square_se": errors["square_se"],
        "t2_at_0": float(diagrams.convolve_tk(field_, 2).reshape(-1)[0]),
        "rw_fitted_C": bound.fitted_C,
        "rw_all_dominated": bound.all_dominated,
        "plateau_C": plateau.fitted_C,
        "plateau_ratio": plateau.plateau_ratio,
    }
    path = out / "diagrams.json"
    _write_json(path, report)
    return [fpath, path]


# --- oracle check ------------------------------------------------------------


def _mc_tiny(graph, p, R, seed):
    """Production-path Monte Carlo on a tiny graph: chi, P(0<->1), E|C|^2."""
    E = len(graph.edges)
    chi = np.zeros(R)
    conn01 = np.zeros(R)
    second = np.zeros(R)
    for rep in range(R):
        u = rng.uniforms(rng.derive_seed(seed, rep), np.arange(E, dtype=np.uint64))
        open_edges = [graph.edges[i] for i in range(E) if u[i] <= p]
        labels, sizes = oracle._components_of(graph.num_vertices, open_edges)
        chi[rep] = sizes[labels[0]]
        conn01[rep] = 1.0 if labels[0] == labels[1] else 0.0
        second[rep] = sizes[labels[0]] ** 2
    return chi, conn01, second


def run_oracle_check(cfg, out):
    checks = []

    def record(name, ok, detail=""):
        checks.append({"name": name, "pass": bool(ok), "detail": detail})

    R = 20000
    for name, graph in (("triangle", oracle.TinyGraph.cycle(3)),
                        ("4-cycle", oracle.TinyGraph.cycle(4))):
        st = oracle.exact_stats(graph, 0.5)
        chi, conn, second = _mc_tiny(graph, 0.5, R, rng.derive_seed(cfg.seed, 31))
        for label, stat, exact in (
            ("chi", chi, st.chi[0]),
            ("P(0<->1)", conn, st.pair_conn[0, 1]),
            ("E|C|^2", second, st.second_moment[0]),
        ):
            se = stat.std(ddof=1) / np.sqrt(R)
            ok = abs(stat.mean() - exact) <= 4 * max(se, 1e-12)
            record(f"{name} {label}", ok,
                   f"mc={stat.mean():.5f} exact={exact:.5f} se={se:.2g}")

    c4 = oracle.TinyGraph.cycle(4)
    tl = oracle.exact_two_level(c4, 0.3, 0.6, 2)
    record("two-level identity (4-cycle, 81 configs)", tl.identity_matches)

    dm = delta.from_dense([[0, 1, 2], [1, 0, 0], [2, 0, 0]], [1, 2, 3], V=10, m=4)
    w = delta.w_functional(dm)
    grid = np.linspace(0.0, 10 * w.t_min, 1000)
    grid_best = min(delta.w_at(dm, t) for t in grid)
    record("t_min closed form beats grid",
           w.w_value <= grid_best + 1e-9 * w.frob2,
           f"w={w.w_value:.6f} grid={grid_best:.6f}")
    record("hand instance t_min = 20/49", abs(w.t_min - 20.0 / 49.0) < 1e-12)

    spec_small = lattice.TorusSpec(d=2, n=5)
    gen = rng.generator(cfg.seed, 33)
    f = diagrams.field_from_array(spec_small, gen.random(spec_small.V))
    fft3 = diagrams.convolve_tk(f, 3)
    direct3 = diagrams.convolve_direct(f, 3)
    rel = np.max(np.abs(fft3 - direct3)) / np.max(np.abs(direct3))
    record("FFT vs direct T3 (d=2, n=5)", rel < 1e-10, f"rel={rel:.2e}")

    record("rw p_2 = 1/2 on the 4-cycle",
           abs(diagrams.rw_return(lattice.TorusSpec(d=1, n=4), 2) - 0.5) < 1e-12)

    path = out / "oracle_check.json"
    _write_json(path, {"checks": checks, "all_pass": all(c["pass"] for c in checks)})
    for c in checks:
        status = "PASS" if c["pass"] else "FAIL"
        print(f"[{status}] {c['name']}" + (f"  ({c['detail']})" if c["detail"] else ""))
    if not all(c["pass"] for c in checks):
        raise ConvergenceError("oracle check failed")
    return [path]


# --- main --------------------------------------------------------------------

_RUNNERS = {
    "sweep": run_sweep,
    "window": run_window,
    "spectra": run_spectra,
    "couple": run_couple,
    "zlambda": run_zlambda,
    "diagrams": run_diagrams,
    "oracle-check": run_oracle_check,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="torusperc",
        description="percolation experiments on high-dimensional tori",
    )
    parser.add_argument("subcommand", nargs="?", choices=sorted(_RUNNERS))
    parser.add_argument("--subcommand", dest="subcommand_flag",
                        choices=sorted(_RUNNERS), default=None,
                        help="alternative to the positional form")
    parser.add_argument("--config", type=Path, default=None,
                        help="key = value config file")
    parser.add_argument("--seed", type=str, default=None,
                        help="master seed, decimal or 0x-hex")
    parser.add_argument("--out", type=Path, default=Path("runs"),
                        help="output directory")
    parser.add_argument("--threads", type=int, default=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.subcommand_flag is not None:
        args.subcommand = args.subcommand_flag
    if args.subcommand is None:
        print("error: no subcommand given", file=sys.stderr)
        return EXIT_CONFIG
    started = time.time()
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        if args.seed is not None:
            cfg.seed = rng.parse_seed(args.seed)
            cfg.seed_text = args.seed
        if args.threads is not None:
            cfg.threads = args.threads
        out = args.out
        out.mkdir(parents=True, exist_ok=True)
        outputs = _RUNNERS[args.subcommand](cfg, out)
    except (ConfigError, RangeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ConvergenceError, DivergenceError, FitError,
            DegenerateIndexError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest = {
        "subcommand": args.subcommand,
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in asdict(cfg).items()},
        "seed": cfg.seed,
        "seed_text": cfg.seed_text,
        "versions": {
            "torusperc": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_seconds": time.time() - started,
        "outputs": [p.name for p in outputs],
    }
    _write_json(out / "manifest.json", manifest)
    print(f"wrote {', '.join(p.name for p in outputs)} to {out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
