"""Command-line experiment runner.

Settings come from built-in defaults, then the ``--config`` JSON file, then
command-line flags (later sources win). Every result is computed before
anything is written; files are written atomically, so a failed run leaves
no partial output. Exit codes: 0 success, 1 numeric-domain failure,
2 configuration or I/O failure.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import bounds
from .chebgrid import fit, lebesgue_factor, make_grid
from .errors import CapabilityError, DomainError, InputError
from .estimators import (
    ExactData,
    GaussianNoise,
    GqpeEstimator,
    ShotNoise,
    cost_scan,
    crossover_epsilon,
    estimate_trotter_error,
    extrapolate_expectation,
    extrapolate_ground_energy,
)
from .operators import HamiltonianModel, build_pauli_term, build_tfim, load_model, model_from_dict
from .phase_est import GaussianWindowSpec, measured_window_error, window_error_budget
from .svg import line_plot, read_csv_columns, to_floats
from .trotter import st_scheme

DEFAULTS = {
    "model": {"tfim": {"num_spins": 2, "J": 1.0, "g": 1.0}},
    "order": 2,
    "orders": [2, 4],
    "t": None,
    "n": None,
    "a": None,
    "estimator": "exact",
    "data_model": "exact",
    "state": None,
    "observable": None,
    "pad": 0.2,
    "phase_noise": None,
    "seed": 0,
    "epsilon": {"min": 1e-8, "max": 1e-2, "count": 13},
    "window": {"m": [4, 5, 6, 7, 8], "q_extra": 4, "T": 1.0},
    "Gamma": 0.0,
    "target_error": 1e-3,
    "delta": 0.05,
    "output_dir": ".",
}

# per-command defaults for settings left as null
COMMAND_DEFAULTS = {
    "energy": {"t": 0.1, "a": 1.0, "n": [2, 4, 6, 8]},
    "truncation": {"t": 0.1, "a": 1.0, "n": [2, 4, 6, 8]},
    "cost": {"t": 0.1, "a": 1.0, "n": [2, 4, 6, 8]},
    "expval": {"t": 1.0, "a": "auto", "n": [2, 4, 6, 8]},
    "trotter-error": {"t": 0.5, "a": 0.5, "n": [2, 4, 6]},
    "bounds": {"t": 0.1, "a": 1.0, "n": [2, 4, 6, 8]},
    "window": {"n": [2]},
}

THREADS_ENV = "CHEBTROT_THREADS"


class ConfigError(InputError):
    pass


# -- configuration ------------------------------------------------------------


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("model", "estimator", "data_model"):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def load_config(path: str | None, command: str) -> dict:
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        cfg = _merge(cfg, user)
    for key, val in COMMAND_DEFAULTS.get(command, {}).items():
        if cfg.get(key) is None:
            cfg[key] = val
    return cfg


def validate_config(cfg: dict) -> None:
    ns = cfg["n"]
    if isinstance(ns, int):
        ns = cfg["n"] = [ns]
    if not ns or any((not isinstance(n, int)) or n < 2 or n % 2 for n in ns):
        raise ConfigError(f"every n must be an even integer >= 2, got {ns}")
    for key in ("order",):
        if not isinstance(cfg[key], int) or cfg[key] < 2 or cfg[key] % 2:
            raise ConfigError(f"{key} must be an even integer >= 2")
    if any(not isinstance(o, int) or o < 2 or o % 2 for o in cfg["orders"]):
        raise ConfigError("orders must be even integers >= 2")
    if cfg["t"] is not None and not (isinstance(cfg["t"], (int, float)) and cfg["t"] > 0):
        raise ConfigError("t must be positive")


def build_model(cfg: dict) -> HamiltonianModel:
    spec = cfg["model"]
    if not isinstance(spec, dict):
        raise ConfigError("model must be an object")
    if "tfim" in spec:
        p = spec["tfim"]
        return build_tfim(int(p.get("num_spins", 2)), float(p.get("J", 1.0)), float(p.get("g", 1.0)))
    if "file" in spec:
        try:
            return load_model(spec["file"])
        except OSError as exc:
            raise ConfigError(f"cannot read model file: {exc}") from None
    return model_from_dict(spec)


def resolve_a(cfg: dict, model: HamiltonianModel, order: int, t: float) -> float:
    """``"auto"`` places the outermost node on the edge of the derivative-bound domain."""
    a = cfg["a"]
    if a == "auto":
        k = order // 2
        return math.pi / 20 / (k * (5.0 / 3.0) ** k * model.m * model.hmax * t)
    if not isinstance(a, (int, float)) or a <= 0:
        raise ConfigError(f"a must be positive or 'auto', got {a!r}")
    return float(a)


def epsilon_grid(cfg: dict) -> np.ndarray:
    e = cfg["epsilon"]
    if isinstance(e, list):
        return np.array(e, dtype=float)
    lo, hi, count = float(e["min"]), float(e["max"]), int(e["count"])
    if not 0 < lo < hi:
        raise ConfigError("epsilon range must satisfy 0 < min < max")
    return np.logspace(math.log10(hi), math.log10(lo), count)


def make_estimator(cfg: dict):
    est = cfg["estimator"]
    if est in (None, "exact"):
        return ExactData()
    if isinstance(est, dict) and "gqpe" in est:
        g = est["gqpe"]
        m = int(g.get("m", 6))
        T = float(g.get("T", 1.0))
        ratio = float(g.get("sigma_over_T", math.sqrt(2 ** m)))
        spec = GaussianWindowSpec(m=m, q=int(g.get("q", m + 2)), sigma=ratio * T, T=T)
        return GqpeEstimator(spec, shots=int(g.get("shots", 1000)), seed=int(cfg["seed"]))
    raise ConfigError(f"unknown estimator {est!r}")


def make_data_model(cfg: dict):
    dm = cfg["data_model"]
    if dm in (None, "exact"):
        return ExactData()
    if isinstance(dm, dict) and "gaussian_noise" in dm:
        g = dm["gaussian_noise"]
        return GaussianNoise(float(g["sigma"]), int(cfg["seed"]), bool(g.get("independent_mirror", False)))
    if isinstance(dm, dict) and "shot" in dm:
        return ShotNoise(int(dm["shot"]["shots"]), int(cfg["seed"]))
    raise ConfigError(f"unknown data model {dm!r}")


def initial_state(cfg: dict, num_qubits: int) -> np.ndarray:
    bits = cfg["state"] or "0" * num_qubits
    if len(bits) != num_qubits or set(bits) - {"0", "1"}:
        raise ConfigError(f"state must be a {num_qubits}-bit string, got {bits!r}")
    psi = np.zeros(2 ** num_qubits, dtype=complex)
    psi[int(bits, 2)] = 1.0
    return np.outer(psi, psi.conj())


def observable(cfg: dict, num_qubits: int) -> np.ndarray:
    label = cfg["observable"] or "Z" + "I" * (num_qubits - 1)
    if len(label) != num_qubits:
        raise ConfigError(f"observable must be a {num_qubits}-character Pauli string")
    return np.array(build_pauli_term(1.0, label).matrix)


# -- CSV helpers ---------------------------------------------------------------


def _num(v) -> str:
    if v is None:
        return "unavailable"
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if math.isinf(v):
        return "unavailable"
    return repr(v)


def csv_text(header: list[str], rows, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment is not None:
        buf.write("# " + comment + "\r\n")
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_num(v) if not isinstance(v, str) else v for v in row])
    return buf.getvalue()


# -- plots (each derived from one CSV) -----------------------------------------


def _fit_svg(text: str, title: str, ylabel: str) -> str:
    cols = read_csv_columns(text)
    s = to_floats(cols["s"])
    y = to_floats(cols["value"])
    n = len(s)
    a = s[0] / math.cos(math.pi / (2 * n))
    f = fit(make_grid(n, a), y)
    xs = list(np.linspace(-a, a, 101))
    return line_plot(
        [("data", s, y, True), ("interpolant", xs, list(f(np.array(xs))), False), ("estimate at 0", [0.0], [f.estimate_at_zero], True)],
        title=title, xlabel="s", ylabel=ylabel,
    )


def _summary_svg(text: str, x: str, ys: list[str], title: str, ylabel: str, log_x=False) -> str:
    cols = read_csv_columns(text)
    xv = to_floats(cols[x])
    return line_plot(
        [(name, xv, to_floats(cols[name]), True) for name in ys],
        title=title, xlabel=x, ylabel=ylabel, log_x=log_x, log_y=True,
    )


def _window_svg(text: str) -> str:
    cols = read_csv_columns(text)
    ms = [int(v) for v in cols["m"]]
    qs = to_floats(cols["q"])
    series = []
    for m in sorted(set(ms)):
        idx = [i for i, mm in enumerate(ms) if mm == m]
        series.append((f"measured m={m}", [qs[i] for i in idx], [to_floats(cols["measured"])[i] for i in idx], True))
        series.append((f"budget m={m}", [qs[i] for i in idx], [to_floats(cols["eps_total"])[i] for i in idx], False))
    return line_plot(series, title="upsampled window error", xlabel="q", ylabel="2-norm error", log_y=True)


def render_svg(csv_name: str, text: str) -> str:
    """Regenerate the plot that accompanies ``csv_name`` from its CSV text."""
    stem = Path(csv_name).stem
    if stem.startswith("energy_n"):
        return _fit_svg(text, f"ground energy fit, {stem[7:]}", "energy")
    if stem.startswith("expval_n"):
        return _fit_svg(text, f"expectation value fit, {stem[7:]}", "value")
    if stem.startswith("trotter_error_n"):
        return _fit_svg(text, f"distance phase fit, {stem[14:]}", "asin sqrt p")
    if stem == "energy_summary":
        return _summary_svg(text, "n", ["systematic_error", "bound"], "ground energy error", "error")
    if stem == "expval_summary":
        return _summary_svg(text, "n", ["systematic_error", "single_node_error"], "expectation value error", "error")
    if stem == "trotter_error_summary":
        return _summary_svg(text, "n", ["abs_error"], "distance estimate error", "error")
    if stem == "truncation":
        cols = read_csv_columns(text)
        series = []
        for order in sorted(set(cols["order"]), key=int):
            idx = [i for i, o in enumerate(cols["order"]) if o == order]
            n = [float(cols["n"][i]) for i in idx]
            series.append((f"exact k={int(order) // 2}", n, [to_floats(cols["exact_error"])[i] for i in idx], True))
            series.append((f"bound k={int(order) // 2}", n, [to_floats(cols["bernstein_bound"])[i] for i in idx], False))
        return line_plot(series, title="truncation error", xlabel="n", ylabel="error", log_y=True)
    if stem == "cost":
        return _summary_svg(text, "epsilon", ["cost_single", "cost_extrap"], "exponentials vs target error", "exponentials", log_x=True)
    if stem == "window":
        return _window_svg(text)
    raise KeyError(csv_name)


def with_plots(files: dict[str, str], plotted: list[str]) -> dict[str, str]:
    out = dict(files)
    for name in plotted:
        out[name[:-4] + ".svg"] = render_svg(name, files[name])
    return out


# -- commands ------------------------------------------------------------------


def _pool_map(fn, items, threads: int):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def cmd_energy(cfg: dict, threads: int) -> dict:
    model = build_model(cfg)
    order, t = cfg["order"], float(cfg["t"])
    a = resolve_a(cfg, model, order, t)
    est = make_estimator(cfg)

    def run(n):
        return extrapolate_ground_energy(model, order, t, n, a, est, pad=float(cfg["pad"]), with_bound=True)

    results = _pool_map(run, cfg["n"], threads)
    files = {}
    rows = []
    for n, r in zip(cfg["n"], results):
        files[f"energy_n{n}.csv"] = r.to_csv()
        rows.append([n, r.estimate, r.exact_reference, r.systematic_error, r.bound, r.cost.exponentials_total])
    files["energy_summary.csv"] = csv_text(
        ["n", "estimate", "reference", "systematic_error", "bound", "exponentials"], rows
    )
    records = [r.as_dict() for r in results]
    return {"files": files, "plots": list(files), "records": records}


def cmd_expval(cfg: dict, threads: int) -> dict:
    model = build_model(cfg)
    order, t = cfg["order"], float(cfg["t"])
    a = resolve_a(cfg, model, order, t)
    rho = initial_state(cfg, model.num_qubits)
    obs = observable(cfg, model.num_qubits)
    dm = make_data_model(cfg)

    def run(n):
        return extrapolate_expectation(model, rho, obs, order, t, n, a, dm)

    results = _pool_map(run, cfg["n"], threads)
    files, rows = {}, []
    for n, r in zip(cfg["n"], results):
        files[f"expval_n{n}.csv"] = r.to_csv()
        single = abs(r.per_node[0].value - r.exact_reference)
        rows.append([n, r.estimate, r.exact_reference, r.systematic_error, single, r.cost.exponentials_total])
    files["expval_summary.csv"] = csv_text(
        ["n", "estimate", "reference", "systematic_error", "single_node_error", "exponentials"], rows
    )
    return {"files": files, "plots": list(files), "records": [r.as_dict() for r in results]}


def cmd_trotter_error(cfg: dict, threads: int) -> dict:
    model = build_model(cfg)
    order, t = cfg["order"], float(cfg["t"])
    a = resolve_a(cfg, model, order, t)

    def run(n):
        return estimate_trotter_error(model, order, t, n, a, cfg["phase_noise"], int(cfg["seed"]))

    results = _pool_map(run, cfg["n"], threads)
    files, rows = {}, []
    for n, r in zip(cfg["n"], results):
        files[f"trotter_error_n{n}.csv"] = r.to_csv()
        rows.append([n, r.estimate, r.exact_reference, r.systematic_error, r.cost.exponentials_total])
    files["trotter_error_summary.csv"] = csv_text(["n", "estimate", "reference", "abs_error", "exponentials"], rows)
    return {"files": files, "plots": list(files), "records": [r.as_dict() for r in results]}


def cmd_truncation(cfg: dict, threads: int) -> dict:
    model = build_model(cfg)
    t = float(cfg["t"])
    jobs = [(order, n) for order in cfg["orders"] for n in cfg["n"]]

    def run(job):
        order, n = job
        a = resolve_a(cfg, model, order, t)
        r = extrapolate_ground_energy(model, order, t, n, a, with_bound=True, pad=float(cfg["pad"]))
        return [order, n, r.systematic_error, r.bound]

    rows = _pool_map(run, jobs, threads)
    files = {"truncation.csv": csv_text(["order", "n", "exact_error", "bernstein_bound"], rows)}
    records = [
        {"order": o, "n": n, "exact_error": e, "bernstein_bound": None if b is None or math.isinf(b) else b}
        for o, n, e, b in rows
    ]
    return {"files": files, "plots": list(files), "records": records}


def cmd_cost(cfg: dict, threads: int) -> dict:
    model = build_model(cfg)
    order, t = cfg["order"], float(cfg["t"])
    a = resolve_a(cfg, model, order, t)
    rows = cost_scan(model, order, t, epsilon_grid(cfg), a)
    star = crossover_epsilon(rows)
    files = {
        "cost.csv": csv_text(
            ["epsilon", "cost_single", "cost_extrap", "n_used"],
            [[r.epsilon, r.cost_single, r.cost_extrap, r.n_used] for r in rows],
        ),
        "cost_crossover.csv": csv_text(["order", "epsilon_star"], [[order, star]]),
    }
    records = {"epsilon_star": star, "rows": [r.__dict__ for r in rows]}
    return {"files": files, "plots": ["cost.csv"], "records": records}


def cmd_window(cfg: dict, threads: int) -> dict:
    w = cfg["window"]
    T = float(w.get("T", 1.0))
    jobs = [(m, q) for m in w["m"] for q in range(m, m + int(w.get("q_extra", 4)) + 1)]

    def run(job):
        m, q = job
        ratio = float(w["sigma_over_T"]) if "sigma_over_T" in w else math.sqrt(2 ** m)
        spec = GaussianWindowSpec(m=m, q=q, sigma=ratio * T, T=T)
        b = window_error_budget(spec)
        meas = measured_window_error(spec)
        return [m, q, ratio, meas, b.trunc, b.alias, b.renorm, b.total, meas <= b.total]

    rows = _pool_map(run, jobs, threads)
    comment = json.dumps({"window": w}, sort_keys=True)
    header = ["m", "q", "sigma_over_T", "measured", "eps_trunc", "eps_alias", "eps_renorm", "eps_total", "within_budget"]
    files = {"window.csv": csv_text(header, rows, comment=comment)}
    return {"files": files, "plots": list(files), "records": [dict(zip(header, r)) for r in rows]}


def cmd_bounds(cfg: dict, threads: int) -> dict:
    model = build_model(cfg)
    order, t = cfg["order"], float(cfg["t"])
    a = resolve_a(cfg, model, order, t)
    k = order // 2
    scheme = st_scheme(order, model.m)
    eps = float(cfg["target_error"])
    c_param = k * (5.0 / 3.0) ** k * model.m * model.hmax * t
    rows = []

    def add(name, n, report):
        if isinstance(report, bounds.BoundReport):
            rows.append([name, n, report.value, report.log10_value, report.domain_ok])
        else:
            v = float(report)
            rows.append([name, n, v, math.log10(v) if v > 0 and math.isfinite(v) else None, True])

    for n in cfg["n"]:
        deriv = bounds.heff_derivative_bound(n, k, model.m, model.hmax, t, s=a)
        add("derivative_sup", n, deriv)
        add("interpolation_error", n, bounds.cheb_error_bound(n, a, deriv.value))
        add("total_steps", n, bounds.total_steps_bound(n, a))
        add("heff_distance_at_a", n, bounds.heff_distance_bound(model, scheme, t, a))
        add("bernstein_energy", n, bounds.bernstein_energy_bound(model, scheme, t, n, a))
        add("expval_interpolation", n, bounds.expval_deriv_bound(n, c_param, a)["best_interp"])
        eps_data = eps / (2 * lebesgue_factor(n))
        try:
            add("iqae_oracles", n, bounds.iqae_oracle_count(eps_data, 1.0, n, float(cfg["delta"])))
        except DomainError:
            rows.append(["iqae_oracles", n, None, None, False])
    params = bounds.pe_interp_params(model.m, k, model.hmax, float(cfg["Gamma"]), eps)
    rows.append(["node_count_real", "", params.n_real, math.log10(params.n_real), True])
    rows.append(["node_count", "", params.n_star, math.log10(params.n_star), True])
    rows.append(["half_width", "", params.a, math.log10(params.a), True])
    header = ["bound", "n", "value", "log10_value", "domain_ok"]
    files = {"bounds.csv": csv_text(header, rows)}
    records = [dict(zip(header, r)) for r in rows]
    return {"files": files, "plots": [], "records": records, "table": (header, rows)}


COMMANDS = {
    "energy": cmd_energy,
    "expval": cmd_expval,
    "trotter-error": cmd_trotter_error,
    "truncation": cmd_truncation,
    "cost": cmd_cost,
    "window": cmd_window,
    "bounds": cmd_bounds,
}


# -- output --------------------------------------------------------------------


def atomic_write(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _json_text(obj) -> str:
    def clean(v):
        if isinstance(v, float) and not math.isfinite(v):
            return None
        if isinstance(v, dict):
            return {k: clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v

    return json.dumps(clean(json.loads(json.dumps(obj, default=_json_default))), indent=2, sort_keys=True) + "\n"


def _aligned(header, rows) -> str:
    cells = [header] + [[_num(v) if not isinstance(v, str) else v for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        return max(1, flag)
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chebtrot",
        description="Chebyshev extrapolation of Trotterized simulation data to zero step size.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--out", help="output directory (must exist)")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int, help=f"worker threads (default: ${THREADS_ENV} or 1)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = load_config(args.config, args.command)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.out is not None:
        cfg["output_dir"] = args.out
    validate_config(cfg)
    out_dir = Path(cfg["output_dir"])
    if not out_dir.is_dir():
        raise ConfigError(f"output directory {out_dir} does not exist")
    threads = resolve_threads(args.threads)
    result = COMMANDS[args.command](cfg, threads)
    stem = args.command.replace("-", "_")
    if args.format == "json":
        files = {f"{stem}.json": _json_text({"config": cfg, "results": result["records"]})}
    else:
        files = with_plots(result["files"], result["plots"])
    for name in sorted(files):
        atomic_write(out_dir / name, files[name])
    if args.command == "bounds":
        header, rows = result["table"]
        sys.stdout.write(_aligned(header, rows) if args.format == "csv" else files[f"{stem}.json"])
    else:
        for name in sorted(files):
            print(out_dir / name)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except DomainError as exc:
        print(f"chebtrot: numeric domain error: {exc}", file=sys.stderr)
        return 1
    except (InputError, CapabilityError, OSError) as exc:
        print(f"chebtrot: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
