"""Command-line front end: ``singular-langevin run <config> [--set k=v]... [--seed N] [--out DIR]``.

Configs are JSON documents with the blocks ``potential``, ``langevin``,
``experiment`` (tagged by ``kind``), ``integrator``, ``seeds`` and ``output``.
A config argument may also name a bundled config (``fig3-decay-a4`` etc.).

Exit status: 0 when the experiment's checks pass, 2 when a check fails,
1 on any error.
"""

from __future__ import annotations

import argparse
import copy
import csv
import hashlib
import io
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    BoundaryGrowth,
    ConfigParse,
    OutputUnwritable,
    SingularLangevinError,
    UnknownExperiment,
)
from .potential import LangevinParams, PotentialSpec, validate_spec
from .simulate import IntegratorSettings

EXIT_PASS, EXIT_ERROR, EXIT_FAIL = 0, 1, 2

KINDS = ("levelsets", "tabulate-lambda", "certify", "decay", "gibbs", "exp-moment",
         "minorization", "windowed", "simulate")
DYNAMIC_KINDS = {"decay", "gibbs", "exp-moment", "minorization", "windowed", "simulate", "certify"}
BUNDLED = ("fig1-levelsets", "fig2-lambda-levelsets", "fig3-decay-a2", "fig3-decay-a4",
           "fig3-decay-a6", "certify-a4", "gibbs-a4")


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    potential: PotentialSpec
    experiment: dict
    langevin: LangevinParams | None = None
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    master_seed: int = 0
    output_dir: str = "out"
    name: str = "experiment"

    @property
    def kind(self) -> str:
        return self.experiment["kind"]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigParse("config must be a JSON object")
        for key in ("potential", "experiment"):
            if key not in d:
                raise ConfigParse(f"missing required block '{key}'")
        exp = d["experiment"]
        if not isinstance(exp, dict) or "kind" not in exp:
            raise ConfigParse("field 'experiment.kind' is required")
        if exp["kind"] not in KINDS:
            raise UnknownExperiment(f"unknown experiment kind {exp['kind']!r}; expected one of {KINDS}")
        try:
            pot = d["potential"]
            spec = PotentialSpec(tuple((float(t["coefficient"]), float(t["exponent"]))
                                       for t in pot["terms"]), float(pot.get("offset", 0.0)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigParse(f"field 'potential': {exc}") from exc
        langevin = None
        if "langevin" in d:
            try:
                langevin = LangevinParams(float(d["langevin"]["gamma"]),
                                          float(d["langevin"]["temperature"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ConfigParse(f"field 'langevin': {exc}") from exc
        elif exp["kind"] in DYNAMIC_KINDS:
            raise ConfigParse(f"missing required block 'langevin' for experiment '{exp['kind']}'")
        try:
            integ = IntegratorSettings(**d.get("integrator", {}))
        except (TypeError, ValueError) as exc:
            raise ConfigParse(f"field 'integrator': {exc}") from exc
        try:
            seed = int(d.get("seeds", {}).get("master_seed", 0))
        except (TypeError, ValueError, AttributeError) as exc:
            raise ConfigParse(f"field 'seeds.master_seed': {exc}") from exc
        out = d.get("output", {}).get("directory", "out")
        return cls(spec, copy.deepcopy(exp), langevin, integ, seed, str(out), str(d.get("name", "experiment")))

    def to_dict(self) -> dict:
        d = {"name": self.name, "potential": self.potential.to_dict(),
             "experiment": copy.deepcopy(self.experiment)}
        if self.langevin is not None:
            d["langevin"] = {"gamma": self.langevin.gamma, "temperature": self.langevin.temperature}
        d["integrator"] = self.integrator.to_dict()
        d["seeds"] = {"master_seed": self.master_seed}
        d["output"] = {"directory": self.output_dir}
        return d

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        """Hash of everything that determines the results (the output block excluded)."""
        d = self.to_dict()
        d.pop("output")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def bundled_config_path(name: str):
    return resources.files("singular_langevin").joinpath("configs", f"{name}.json")


def read_config_text(source: str) -> str:
    p = Path(source)
    if p.is_file():
        return p.read_text()
    stem = source[:-5] if source.endswith(".json") else source
    if stem in BUNDLED:
        return bundled_config_path(stem).read_text()
    raise ConfigParse(f"config file {source!r} not found (bundled: {', '.join(BUNDLED)})")


def parse_config_text(text: str) -> dict:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _parse_value(raw: str):
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


def apply_overrides(d: dict, overrides) -> dict:
    """Apply ``a.b.c=value`` overrides (values parsed as JSON when possible)."""
    d = copy.deepcopy(d)
    for item in overrides or ():
        if "=" not in item:
            raise ConfigParse(f"override {item!r} is not of the form key=value")
        key, raw = item.split("=", 1)
        parts = key.strip().split(".")
        node = d
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ConfigParse(f"override {key!r}: '{part}' is not a block")
        node[parts[-1]] = _parse_value(raw)
    return d


def load_config(source: str, overrides=(), seed: int | None = None, out: str | None = None
                ) -> ExperimentConfig:
    d = apply_overrides(parse_config_text(read_config_text(source)), overrides)
    if seed is not None:
        d.setdefault("seeds", {})["master_seed"] = int(seed)
    if out is not None:
        d.setdefault("output", {})["directory"] = out
    if "name" not in d:
        d["name"] = Path(source).stem
    return ExperimentConfig.from_dict(d)


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------


@dataclass
class ExperimentResult:
    summary: dict
    passed: bool
    csv_rows: list
    csv_header: list
    overlay: list | None = None  # rows for the two/three-column overlay file
    extra_json: dict | None = None  # written as <name>.<key>.json


def _fmt(x) -> str:
    return repr(float(x))


def _exp_levelsets(cfg: ExperimentConfig) -> ExperimentResult:
    from .lyapunov import orbit_points
    from .orbit import turning_points

    e = cfg.experiment
    spec = cfg.potential
    n = int(e.get("n_points", 256))
    rows, orbits = [], []
    for lam in e.get("lambdas", [1.0]):
        for eta in e.get("etas", [1.0]):
            qm, qp = turning_points(spec, float(eta), float(lam))
            q, p = orbit_points(spec, float(eta), n, float(lam))
            orbits.append({"lambda": lam, "eta": eta, "q_minus": qm, "q_plus": qp})
            rows += [[_fmt(lam), _fmt(eta), _fmt(a), _fmt(b)] for a, b in zip(q, p)]
    if e.get("limit_curve"):
        a1, al = spec.terms[0]
        qs = a1 ** (-1.0 / al)
        for th in np.linspace(0.0, math.pi / 2, n // 2 + 1):
            q = qs * math.sin(th)
            pv = math.sqrt(max(2.0 * (1.0 - a1 * q**al), 0.0))
            rows.append(["inf", "1.0", _fmt(q), _fmt(pv)])
    tol = float(e.get("tolerance", 1e-3))
    checks = []
    for ex in e.get("expected", []):
        got = next((o for o in orbits if math.isclose(o["lambda"], ex["lambda"]) and
                    math.isclose(o["eta"], ex["eta"])), None)
        if got is None:
            checks.append({"expected": ex, "ok": False, "reason": "orbit not computed"})
            continue
        err = max(abs(got["q_minus"] - ex["q_minus"]), abs(got["q_plus"] - ex["q_plus"]))
        checks.append({"expected": ex, "error": err, "ok": err <= tol})
    passed = all(c["ok"] for c in checks)
    max_err = max((c.get("error", math.inf) for c in checks), default=0.0)
    return ExperimentResult({"orbits": orbits, "checks": checks, "tolerance": tol,
                             "max_error": max_err}, passed,
                            rows, ["lambda", "eta", "q", "p"])


def _exp_tabulate(cfg: ExperimentConfig) -> ExperimentResult:
    from .orbit import LambdaTable, eta_star, lambda_star

    e = cfg.experiment
    es = eta_star(cfg.potential).value
    table = LambdaTable(cfg.potential, es, n_nodes=int(e.get("n_nodes", 256)),
                        span=float(e.get("span", 1e9)))
    rows = [[_fmt(a), _fmt(b), _fmt(c), _fmt(a * b)]
            for a, b, c in zip(table.eta, table.values, table.periods)]
    ls = lambda_star(cfg.potential.alpha1)
    tail_err = abs(table.values[-1] - ls) / ls
    tol = float(e.get("tolerance", 1e-3))
    return ExperimentResult({"eta_star": es, "lambda_star": ls, "lambda_at_top": table.values[-1],
                             "tail_relative_error": tail_err, "tolerance": tol},
                            tail_err <= tol, rows, ["eta", "lambda_of_eta", "period", "A_P2"])


def _exp_certify(cfg: ExperimentConfig) -> ExperimentResult:
    from .lyapunov import LyapunovModel, drift_certificate

    e = cfg.experiment
    model = LyapunovModel(cfg.potential, cfg.langevin)
    try:
        cert = drift_certificate(model, delta=float(e.get("delta", 0.2)),
                                 n_levels=int(e.get("n_levels", 64)), n_angles=int(e.get("n_angles", 128)),
                                 h_max=float(e.get("h_max", 1e6)), box=int(e.get("box", 32)),
                                 comparability_cut=float(e.get("comparability_cut", 1e3)),
                                 raise_on_growth=True)
    except BoundaryGrowth as exc:
        cert = exc.certificate
    d = cert.to_dict()
    limit = e.get("delta_H_max")
    comparable = limit is None or (math.isfinite(cert.delta_H) and cert.delta_H <= float(limit))
    summary = {k: d[k] for k in ("delta", "C", "delta_H", "C_H", "grid", "worst_point", "valid")}
    summary.update(boundary_growth=cert.boundary_growth, worst_ratio=cert.worst_ratio,
                   comparability_cut=cert.comparability_cut, delta_H_max=limit)
    rows = [[_fmt(h), _fmt(m)] for h, m in zip(cert.shell_energies, cert.shell_max)]
    return ExperimentResult(summary, bool(cert.valid and comparable), rows, ["H", "shell_max"])


def _exp_decay(cfg: ExperimentConfig) -> ExperimentResult:
    from .diagnostics import energy_decay_experiment

    e = cfg.experiment
    r = energy_decay_experiment(cfg.potential, cfg.langevin, float(e.get("H0", 1e4)),
                                int(e.get("n_paths", 64)), float(e.get("t_end", 6.0)),
                                cfg.integrator, cfg.master_seed, int(e.get("n_times", 401)),
                                float(e.get("window_factor", 100.0)))
    tol = float(e.get("tolerance", 0.1))
    rel = r.fit.relative_error(r.target_slope)
    ps = r.predicted["lambda_star"].eta
    pe = r.predicted["lambda_of_eta"].eta
    rows = [[_fmt(t), _fmt(m), _fmt(md), _fmt(a), _fmt(b)]
            for t, m, md, a, b in zip(r.times, r.mean_H, r.median_H, ps, pe)]
    overlay = [[_fmt(t), _fmt(math.log(m)), _fmt(math.log(a))] for t, m, a in zip(r.times, r.mean_H, ps)]
    summary = {"slope": r.fit.slope, "stderr": r.fit.stderr, "target_slope": r.target_slope,
               "relative_error": rel, "tolerance": tol, "window": list(r.fit.window),
               "n_paths": r.fit.n_paths, "fit_points": r.fit.n_points, "blowups": r.n_blowups,
               "eta_star": r.eta_star}
    return ExperimentResult(summary, rel <= tol and r.n_blowups == 0, rows,
                            ["t", "mean_H", "median_H", "predicted_lambda_star",
                             "predicted_lambda_of_eta"], overlay)


def _exp_gibbs(cfg: ExperimentConfig) -> ExperimentResult:
    from .diagnostics import gibbs_compare

    e = cfg.experiment
    rep = gibbs_compare(cfg.potential, cfg.langevin, float(e.get("burn_in", 100.0)),
                        float(e.get("t_end", 2e4)), tuple(e.get("bins", (128, 128))),
                        cfg.master_seed, tuple(e["start"]) if "start" in e else None,
                        float(e.get("sample_dt", 0.1)), float(e.get("thin", 2.0)),
                        e.get("checkpoints"), cfg.integrator)
    qc, pc = rep.histogram.centers()
    rows = [[_fmt(a), _fmt(b), _fmt(rep.histogram.mass[i, j]), _fmt(rep.target.mass[i, j])]
            for i, a in enumerate(qc) for j, b in enumerate(pc)]
    ks_ok = rep.q_ks < rep.q_ks_critical
    summary = {"p_variance": rep.p_var, "p_variance_se": rep.p_var_se, "temperature": rep.T,
               "variance_ok": rep.variance_ok, "q_ks": rep.q_ks, "q_ks_critical_1pct": rep.q_ks_critical,
               "p_ks": rep.p_ks, "q_mode": rep.q_mode, "q_min": rep.q_min, "tv": rep.tv,
               "checkpoints": rep.checkpoints, "tv_decreasing": rep.tv_decreasing,
               "n_samples": rep.n_samples}
    return ExperimentResult(summary, bool(rep.variance_ok and ks_ok and rep.tv_decreasing), rows,
                            ["q", "p", "empirical_mass", "target_mass"])


def _exp_moment(cfg: ExperimentConfig) -> ExperimentResult:
    from .diagnostics import exp_moment_check

    e = cfg.experiment
    T = cfg.langevin.temperature
    beta = float(e.get("beta", 1.0 / T if T > 0 else 0.0))
    s = exp_moment_check(cfg.potential, cfg.langevin, beta, int(e.get("n_paths", 256)),
                         float(e.get("t_end", 10.0)), cfg.master_seed,
                         e.get("H_start"), None, int(e.get("n_times", 101)), cfg.integrator)
    rows = [[_fmt(t), _fmt(v)] for t, v in zip(s.times, s.log_values)]
    summary = {"beta": beta, "kappa": s.kappa, "log_K": s.log_K, "bounded": s.bounded, "finite": s.finite,
               "n_paths": s.n_paths}
    return ExperimentResult(summary, bool(s.bounded and s.finite), rows, ["t", "log_mean_exp_beta_H"])


def _exp_minorization(cfg: ExperimentConfig) -> ExperimentResult:
    from .diagnostics import minorization_probe

    e = cfg.experiment
    m = minorization_probe(cfg.potential, cfg.langevin, float(e.get("eta", 4.0)),
                           e.get("times", [0.5, 1.0, 2.0, 4.0]), int(e.get("n_paths", 10000)),
                           int(e.get("bins", 48)), cfg.master_seed, settings=cfg.integrator)
    rows = [[_fmt(t), _fmt(o), _fmt(s)] for t, o, s in zip(m.times, m.overlap, m.overlap_se)]
    t_pos = float(e.get("positive_at", 2.0))
    positive = all(o > 0 for t, o in zip(m.times, m.overlap) if t >= t_pos)
    monotone = all(b >= a - 3.0 * math.hypot(sa, sb) for a, b, sa, sb in
                   zip(m.overlap, m.overlap[1:], m.overlap_se, m.overlap_se[1:]))
    summary = {"eta": m.eta, "times": m.times, "overlap": m.overlap, "overlap_se": m.overlap_se,
               "positive_at": t_pos, "positive": positive, "non_decreasing": monotone, "n_paths": m.n_paths}
    return ExperimentResult(summary, positive and monotone, rows, ["t", "overlap", "overlap_se"])


def _exp_windowed(cfg: ExperimentConfig) -> ExperimentResult:
    from .diagnostics import wiggle_amplitude, windowed_energy_average
    from .orbit import lambda_star, make_orbit, period
    from .simulate import integrate_reduced

    e = cfg.experiment
    spec = cfg.potential
    tau = period(spec, float(e.get("tau_energy", 1e6)))
    H0 = float(e.get("H0", 1e4))
    n_per = float(e.get("periods", 30))
    orb = make_orbit(spec, H0)
    rec = integrate_reduced(spec, cfg.langevin, (orb.qp, 0.0), n_per * tau, cfg.integrator,
                            cfg.master_seed)
    with warnings.catch_warnings():  # the windowed average targets alpha1 = 2 on purpose
        warnings.simplefilter("ignore")
        rate = lambda_star(spec.alpha1)
    w = windowed_energy_average(rec.times, rec.energies, tau, cfg.langevin.gamma, rate,
                                cfg.langevin.sigma)
    wv = wiggle_amplitude(w.times, w.V, tau)
    wh = wiggle_amplitude(w.times, w.H, tau)
    rows = [[_fmt(t), _fmt(h), _fmt(v), _fmt(a), _fmt(b)]
            for t, h, v, a, b in zip(w.times, w.H, w.V, w.window_decay, w.predicted_decay)]
    summary = {"tau_star": tau, "wiggle_V": wv, "wiggle_H": wh, "ratio": wv / wh,
               "terminated": rec.terminated}
    return ExperimentResult(summary, wv < 0.25 * wh, rows,
                            ["t", "H", "V", "window_decay", "predicted_decay"])


def _exp_simulate(cfg: ExperimentConfig) -> ExperimentResult:
    from .potential import FullState
    from .simulate import integrate_full, integrate_reduced

    e = cfg.experiment
    t_end = float(e.get("t_end", 10.0))
    if e.get("system", "reduced") == "full":
        st = FullState(*[float(x) for x in e.get("start", [1.0, -1.0, 0.0, 0.0])])
        rec = integrate_full(cfg.potential, cfg.langevin, st, t_end, cfg.integrator, cfg.master_seed)
    else:
        st = [float(x) for x in e.get("start", [1.0, 0.0])]
        rec = integrate_reduced(cfg.potential, cfg.langevin, st, t_end, cfg.integrator, cfg.master_seed)
    rows = [[_fmt(t), *(_fmt(x) for x in s), _fmt(h)]
            for t, s, h in zip(rec.times, rec.states, rec.energies)]
    summary = {"terminated": rec.terminated, "n_steps": rec.n_steps, "n_records": len(rec.times),
               "final_energy": float(rec.energies[-1])}
    return ExperimentResult(summary, rec.terminated == "completed", rows, rec.columns())


RUNNERS = {
    "levelsets": _exp_levelsets,
    "tabulate-lambda": _exp_tabulate,
    "certify": _exp_certify,
    "decay": _exp_decay,
    "gibbs": _exp_gibbs,
    "exp-moment": _exp_moment,
    "minorization": _exp_minorization,
    "windowed": _exp_windowed,
    "simulate": _exp_simulate,
}


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    validate_spec(cfg.potential, allow_quadratic=True)
    return RUNNERS[cfg.kind](cfg)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


def _csv_text(header, rows, comment: str) -> str:
    buf = io.StringIO()
    buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def emit_report(cfg: ExperimentConfig, result: ExperimentResult, wall_time: float) -> dict:
    """Write ``<name>.csv``, ``<name>.json`` and (if any) ``<name>.overlay.dat``; return paths."""
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputUnwritable(f"cannot create {out}: {exc}") from exc
    h = cfg.config_hash()
    comment = f"seed={cfg.master_seed} config_hash={h} kind={cfg.kind}"
    files = {"csv": out / f"{cfg.name}.csv", "json": out / f"{cfg.name}.json"}
    summary = {"name": cfg.name, "kind": cfg.kind, "passed": bool(result.passed),
               "config_hash": h, "seed": cfg.master_seed, "version": __version__,
               "wall_time_s": round(wall_time, 3), "config": cfg.to_dict(),
               "results": _jsonable(result.summary)}
    try:
        files["csv"].write_text(_csv_text(result.csv_header, result.csv_rows, comment))
        files["json"].write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        if result.overlay is not None:
            files["overlay"] = out / f"{cfg.name}.overlay.dat"
            lines = [f"# {comment}", "# t log_mean_H log_predicted"]
            lines += [" ".join(r) for r in result.overlay]
            files["overlay"].write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OutputUnwritable(f"cannot write to {out}: {exc}") from exc
    return files


def summary_line(cfg: ExperimentConfig, result: ExperimentResult) -> str:
    keys = {"decay": ("slope", "target_slope", "relative_error"),
            "certify": ("C", "delta_H", "valid"),
            "gibbs": ("p_variance", "q_ks", "tv_decreasing"),
            "levelsets": ("max_error",),
            "tabulate-lambda": ("lambda_at_top", "lambda_star"),
            "exp-moment": ("kappa", "bounded"),
            "minorization": ("overlap",),
            "windowed": ("ratio",),
            "simulate": ("terminated", "n_steps")}[cfg.kind]
    parts = []
    for k in keys:
        v = result.summary.get(k)
        if isinstance(v, float):
            v = f"{v:.6g}"
        elif isinstance(v, list):
            v = "[" + ",".join(f"{x:.4g}" for x in v) + "]"
        parts.append(f"{k}={v}")
    return f"{cfg.name} [{cfg.kind}] {'PASS' if result.passed else 'FAIL'} " + " ".join(parts)


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="singular-langevin", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run the experiment named in the config"),
                        ("tabulate-lambda", "tabulate Lambda(eta), period and A(P^2) for the config's potential"),
                        ("certify", "grid-scan drift certificate for the config's potential")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="config file or bundled config name")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config field (dotted path); repeatable")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument("--out", default=None, help="output directory")
    sub.add_parser("list-configs", help="list bundled configs")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-configs":
        for name in BUNDLED:
            print(name)
        return EXIT_PASS
    try:
        overrides = list(args.overrides)
        if args.command != "run":
            overrides.insert(0, f"experiment.kind={json.dumps(args.command)}")
        cfg = load_config(args.config, overrides, args.seed, args.out)
        if args.command != "run" and not cfg.name.endswith(args.command):
            cfg.name = f"{cfg.name}-{args.command}"
        t0 = time.perf_counter()
        result = run_experiment(cfg)
        emit_report(cfg, result, time.perf_counter() - t0)
        print(summary_line(cfg, result))
        return EXIT_PASS if result.passed else EXIT_FAIL
    except SingularLangevinError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # every termination path maps to an exit code
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
