"""Config-driven experiment runner.

Configs are INI files with the sections [experiment], [grid], [tolerances]
and [output]; command-line flags override config values.  Reports are
written as JSON, CSV (one row per seed and grid) or aligned text, with floats
rounded to 12 significant digits so identical runs give identical bytes.
Wall-clock times go to a separate timings.json next to the report.

Exit codes: 0 all checks pass, 1 a check failed or a stage raised,
2 usage or config error.
"""
import argparse
import configparser
import csv
import io
import json
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

EXPERIMENTS = ("obstruction-table", "solve-cp1", "solve-bundle", "solve-cone-l2", "solve-cone-bounded", "verify-suite")
FORMATS = ("json", "csv", "text")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class ConfigError(ValueError):
    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass
class ExperimentConfig:
    experiment: str
    degree: int = 2
    genus: int = 0
    eps: float = 1.0
    kind: str = "exact_smooth"
    seeds: list = field(default_factory=lambda: [0])
    k: int = -1
    m: int = 0
    p: float = 4.0
    triviality_hint: object = None
    use_upper: bool = False
    n_r: int = 32
    n_theta: int = 0
    refine: int = 2
    mu_max: int = 8
    residual_tol: float = 1e-2
    obstruction_tol: float = 1e-4
    drift_tol: float = 2.0
    holder_growth_tol: float = 2.0
    decay_min: float = 0.4
    order_min: float = 1.8
    out: str = "."
    format: str = "json"

    def grids(self):
        """n_r for each refinement level: n_r, 2 n_r, ..."""
        return [self.n_r * 2**i for i in range(self.refine)]


# section -> key -> (field name, parser)
def _bool(text):
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _hint(text):
    v = text.strip().lower()
    return None if v in ("", "none", "unknown") else _bool(v)


def _seeds(text):
    return [int(x) for x in text.replace(",", " ").split()]


SCHEMA = {
    "experiment": {
        "name": ("experiment", str),
        "degree": ("degree", int),
        "genus": ("genus", int),
        "eps": ("eps", float),
        "kind": ("kind", str),
        "seeds": ("seeds", _seeds),
        "k": ("k", int),
        "m": ("m", int),
        "p": ("p", float),
        "triviality_hint": ("triviality_hint", _hint),
        "use_upper": ("use_upper", _bool),
    },
    "grid": {
        "n_r": ("n_r", int),
        "n_theta": ("n_theta", int),
        "refine": ("refine", int),
        "mu_max": ("mu_max", int),
    },
    "tolerances": {
        "residual": ("residual_tol", float),
        "obstruction": ("obstruction_tol", float),
        "drift": ("drift_tol", float),
        "holder_growth": ("holder_growth_tol", float),
        "decay": ("decay_min", float),
        "order": ("order_min", float),
    },
    "output": {
        "path": ("out", str),
        "format": ("format", str),
    },
}

TOLERANCE_FIELDS = ("residual_tol", "obstruction_tol", "drift_tol", "holder_growth_tol", "decay_min", "order_min")


def _read_values(text):
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"unparseable config: {exc}"]) from exc
    values, problems = {}, []
    for section in parser.sections():
        if section not in SCHEMA:
            problems.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            if key not in SCHEMA[section]:
                problems.append(f"unknown key {section}.{key}")
                continue
            name, conv = SCHEMA[section][key]
            try:
                values[name] = conv(raw)
            except ValueError as exc:
                problems.append(f"{section}.{key}: {exc}")
    return values, problems


def validate(cfg):
    """All violations of a config, as messages naming the key."""
    problems = []
    if cfg.experiment not in EXPERIMENTS:
        problems.append(f"experiment.name: unknown experiment {cfg.experiment!r}")
    if cfg.degree < 1:
        problems.append("experiment.degree: must be >= 1")
    if cfg.genus < 0:
        problems.append("experiment.genus: must be >= 0")
    if not cfg.eps > 0:
        problems.append("experiment.eps: must be positive")
    if cfg.kind not in ("exact_smooth", "exact_singular", "bounded_random"):
        problems.append(f"experiment.kind: unknown test form kind {cfg.kind!r}")
    if not cfg.seeds:
        problems.append("experiment.seeds: need at least one seed")
    if any(s < 0 for s in cfg.seeds):
        problems.append("experiment.seeds: seeds must be non-negative")
    if not cfg.p > 2:
        problems.append("experiment.p: Hoelder estimates need p > 2")
    if cfg.n_r < 4:
        problems.append("grid.n_r: must be >= 4")
    if cfg.n_theta < 0 or cfg.n_theta % 2:
        problems.append("grid.n_theta: must be 0 (automatic) or a positive even number")
    if cfg.refine < 1:
        problems.append("grid.refine: refinement count must be >= 1")
    if cfg.mu_max < 0:
        problems.append("grid.mu_max: must be >= 0")
    inverse = {v[0]: f"{s}.{k}" for s, keys in SCHEMA.items() for k, v in keys.items()}
    for name in TOLERANCE_FIELDS:
        if not getattr(cfg, name) > 0:
            problems.append(f"{inverse[name]}: tolerance must be positive")
    if cfg.format not in FORMATS:
        problems.append(f"output.format: expected one of {FORMATS}")
    return problems


def parse_config(text, overrides=None):
    """ExperimentConfig from INI text plus overrides; raises ConfigError listing every problem."""
    values, problems = _read_values(text or "")
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    if "experiment" not in values:
        raise ConfigError(problems + ["experiment.name: missing"])
    cfg = ExperimentConfig(**values)
    problems += validate(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


# ---- reports ----------------------------------------------------------------------


@dataclass
class RunReport:
    config: dict
    stages: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def check(self, name, passed, value=None, threshold=None, grid=None):
        self.checks[name] = {"pass": bool(passed), "value": value, "threshold": threshold, "grid": grid}

    @property
    def passed(self):
        return not self.errors and all(c["pass"] for c in self.checks.values())

    def as_dict(self):
        return {
            "config": self.config,
            "stages": self.stages,
            "rows": self.rows,
            "checks": self.checks,
            "errors": self.errors,
            "extra": self.extra,
            "passed": self.passed,
        }


def _clean(x):
    """JSON-ready copy with floats at 12 significant digits and non-finite values as strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.12g}")
    if isinstance(x, (complex, np.complexfloating)):
        return [_clean(x.real), _clean(x.imag)]
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def render(report, fmt):
    data = _clean(report.as_dict())
    if fmt == "json":
        return json.dumps(data, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        rows = data["rows"]
        cols = sorted({k for r in rows for k in r})
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r.get(c, "")) for c in cols])
        return buf.getvalue()
    if fmt == "text":
        lines = [f"experiment: {data['config']['experiment']}"]
        if "table_text" in report.extra:
            lines.append(report.extra["table_text"].rstrip("\n"))
        for r in data["rows"]:
            lines.append("  ".join(f"{k}={_fmt(r[k])}" for k in sorted(r)))
        width = max((len(n) for n in data["checks"]), default=0)
        for name in sorted(data["checks"]):
            c = data["checks"][name]
            lines.append(f"{name.ljust(width)}  {'PASS' if c['pass'] else 'FAIL'}  value={c['value']} threshold={c['threshold']}")
        for e in data["errors"]:
            lines.append(f"error in {e['stage']}: {e['message']}")
        lines.append("overall: " + ("PASS" if data["passed"] else "FAIL"))
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def emit_report(report, fmt, out_dir):
    """Write report.<ext> and timings.json into out_dir; returns the report path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ext = {"json": "json", "csv": "csv", "text": "txt"}[fmt]
    path = out / f"report.{ext}"
    path.write_text(render(report, fmt))
    (out / "timings.json").write_text(json.dumps(_clean(report.timings), sort_keys=True, indent=2) + "\n")
    return path


# ---- experiments ----------------------------------------------------------------------


class _Stage:
    def __init__(self, report, name):
        self.report, self.name = report, name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.report.timings[self.name] = time.perf_counter() - self.t0
        if exc is not None:
            self.report.errors.append({"stage": self.name, "type": exc_type.__name__, "message": str(exc)})
            return True
        return False


def _orders(values):
    """log2 ratios of successive residuals (grids doubling)."""
    out = []
    for a, b in zip(values, values[1:]):
        out.append(math.log2(a / b) if a > 0 and b > 0 else float("nan"))
    return out


def _drift(values):
    vals = [v for v in values if math.isfinite(v) and v > 0]
    if len(vals) < 2:
        return 1.0
    return max(vals) / min(vals)


def _grid_info(n_r):
    return {"n_r": n_r, "h": 1.0 / n_r}


def run_obstruction_table(cfg, rep):
    from .obstruction import CurveSpec, obstruction_table

    with _Stage(rep, "table"):
        table = obstruction_table(CurveSpec(cfg.genus, cfg.degree, cfg.triviality_hint), k=cfg.k)
        rep.extra["table"] = table.as_dict()
        rep.extra["table_text"] = table.to_text()
        rep.rows = [{"mu": r.mu, "deg": r.deg, "h0": r.h0 if r.h0 is not None else "?", "h1": r.h1 if r.h1 is not None else "?"}
                    for r in table.rows]
        defects = table.riemann_roch_defects()
        rep.check("riemann_roch", not defects, len(defects), 0)


def run_solve_cp1(cfg, rep):
    from .cp1_dbar import TwoChartSolution, fd_residual, holder_quotient_cp1, manufactured_section, weak_residual_cp1
    from .quadrature import DiscGrid

    alpha = 1 - 2 / cfg.p
    for seed in cfg.seeds:
        _, form = manufactured_section(cfg.m, seed)
        fd, hq = [], []
        for n_r in cfg.grids():
            with _Stage(rep, f"cp1 seed={seed} n_r={n_r}"):
                grid = DiscGrid(1.0, n_r, cfg.n_theta)
                u = TwoChartSolution(form, n_r).section()
                row = {"seed": seed, "n_r": n_r, "h": grid.h,
                       "fd_residual": fd_residual(u, form, grid),
                       "weak_residual": weak_residual_cp1(u.chart_a_global, form.chart_a_global),
                       "holder_quotient": holder_quotient_cp1(u, alpha)}
                fd.append(row["fd_residual"])
                hq.append(row["holder_quotient"])
                rep.rows.append(row)
        if fd:
            rep.check(f"residual seed={seed}", fd[-1] < cfg.residual_tol, fd[-1], cfg.residual_tol, cfg.grids()[len(fd) - 1])
        orders = _orders(fd)
        rep.extra[f"orders seed={seed}"] = orders
        if orders:
            rep.check(f"fd_order seed={seed}", min(orders) >= cfg.order_min, min(orders), cfg.order_min)
        if len(hq) >= 2:
            var = abs(hq[-1] - hq[-2]) / max(hq[-1], 1e-300)
            rep.check(f"holder_variation seed={seed}", var < 0.2, var, 0.2, cfg.grids()[-2:])


def _exact_upstairs(cfg, seed):
    from .cone_solver import generate_test_form

    return generate_test_form(cfg.kind, seed, cfg.degree, cfg.eps)


def run_solve_bundle(cfg, rep):
    from .bundle_expansion import solve_dbar_k
    from .cone_solver import test_battery, weak_dbar_residual

    battery = test_battery(cfg.degree, cfg.eps)
    for seed in cfg.seeds:
        form = _exact_upstairs(cfg, seed)
        w = form.upstairs.with_weight(cfg.k)
        res = []
        for n_r in cfg.grids():
            with _Stage(rep, f"bundle seed={seed} n_r={n_r}"):
                eta, ob = solve_dbar_k(w, cfg.k, cfg.mu_max, n_r=n_r, obstruction_tol=cfg.obstruction_tol)
                r = weak_dbar_residual(eta, w, battery)
                res.append(r)
                rep.rows.append({"seed": seed, "n_r": n_r, "h": 1 / n_r, "weak_residual": r, "clean": ob.clean,
                                 "solved": " ".join(map(str, ob.solved))})
                rep.extra[f"obstruction seed={seed} n_r={n_r}"] = ob.as_dict()
                rep.check(f"residual seed={seed} n_r={n_r}", r < cfg.residual_tol, r, cfg.residual_tol, _grid_info(n_r))
                if cfg.kind.startswith("exact"):
                    rep.check(f"exact_nullity seed={seed} n_r={n_r}", ob.clean, ob.as_dict(), cfg.obstruction_tol)
        rep.extra[f"orders seed={seed}"] = _orders(res)


def run_solve_cone(cfg, rep, bounded):
    from .cone_solver import solve_bounded, solve_l2

    for seed in cfg.seeds:
        form = _exact_upstairs(cfg, seed)
        consts, holders = [], []
        for n_r in cfg.grids():
            with _Stage(rep, f"cone seed={seed} n_r={n_r}"):
                if bounded:
                    r = solve_bounded(form, cfg.mu_max, n_r=n_r, seed=seed, use_upper=cfg.use_upper)
                else:
                    r = solve_l2(form, cfg.mu_max, n_r=n_r, obstruction_tol=cfg.obstruction_tol)
                row = {"seed": seed, **{k: v for k, v in r.as_dict().items() if not isinstance(v, (list, dict))}}
                row["h"] = 1 / n_r
                rep.rows.append(row)
                rep.extra[f"obstruction seed={seed} n_r={n_r}"] = r.obstruction.as_dict() if r.obstruction else {}
                if bounded:
                    rep.extra[f"oscillation seed={seed} n_r={n_r}"] = list(r.oscillation)
                consts.append(r.constant_estimate)
                holders.append(r.holder_quotient)
                rep.check(f"residual seed={seed} n_r={n_r}", r.residual < cfg.residual_tol, r.residual, cfg.residual_tol, _grid_info(n_r))
                if bounded:
                    rep.check(f"decay seed={seed} n_r={n_r}", r.decay_exponent >= cfg.decay_min, r.decay_exponent, cfg.decay_min, _grid_info(n_r))
                elif cfg.kind.startswith("exact"):
                    rep.check(f"exact_nullity seed={seed} n_r={n_r}", r.clean, r.obstruction.as_dict(), cfg.obstruction_tol)
        if len(consts) >= 2:
            d = _drift(consts)
            rep.check(f"constant_drift seed={seed}", d < cfg.drift_tol, d, cfg.drift_tol, cfg.grids())
        if bounded and len(holders) >= 2:
            g = _drift(holders)
            rep.check(f"holder_growth seed={seed}", g < cfg.holder_growth_tol, g, cfg.holder_growth_tol, cfg.grids())


def run_verify_suite(cfg, rep):
    from . import verify

    for name, fn in verify.SUITE:
        with _Stage(rep, name):
            value, threshold, ok = fn(cfg)
            rep.check(name, ok, value, threshold, {"n_r": cfg.n_r})


RUNNERS = {
    "obstruction-table": run_obstruction_table,
    "solve-cp1": run_solve_cp1,
    "solve-bundle": run_solve_bundle,
    "solve-cone-l2": lambda cfg, rep: run_solve_cone(cfg, rep, bounded=False),
    "solve-cone-bounded": lambda cfg, rep: run_solve_cone(cfg, rep, bounded=True),
    "verify-suite": run_verify_suite,
}


def run_experiment(cfg):
    """Run the configured experiment; stage failures are captured in the report."""
    # the output location is not part of what was computed
    rep = RunReport(config=_clean({k: v for k, v in asdict(cfg).items() if k != "out"}))
    RUNNERS[cfg.experiment](cfg, rep)
    return rep


# ---- entry point ------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="conedbar", description="dbar experiments on rational normal cones")
    p.add_argument("--experiment", choices=EXPERIMENTS)
    p.add_argument("--config", help="INI config file")
    p.add_argument("--out", help="output directory")
    p.add_argument("--format", choices=FORMATS)
    p.add_argument("--refine", type=int, help="number of grids (n_r doubling)")
    p.add_argument("--seed", type=int, help="single seed, overrides the config's seed list")
    p.add_argument("--degree", type=int, help="cone degree e")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"error: cannot read config: {exc}", file=sys.stderr)
            return EXIT_USAGE
    overrides = {
        "experiment": args.experiment,
        "out": args.out,
        "format": args.format,
        "refine": args.refine,
        "seeds": [args.seed] if args.seed is not None else None,
        "degree": args.degree,
    }
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        for prob in exc.problems:
            print(f"config error: {prob}", file=sys.stderr)
        return EXIT_USAGE
    report = run_experiment(cfg)
    try:
        path = emit_report(report, cfg.format, cfg.out)
    except OSError as exc:
        print(f"error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"{'PASS' if report.passed else 'FAIL'}: {path}")
    return EXIT_OK if report.passed else EXIT_FAIL
