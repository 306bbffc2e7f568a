"""Command-line interface: ``multisync <command> ...``.

Exit codes: 0 positive verdict, 1 negative verdict, 2 input error,
3 violated hypothesis, 4 numerical divergence or solver failure.
Every command parses and validates all inputs before computing, and output
files are written only after the computation has finished.

System files are JSON objects::

    {
      "layers": [{"graph_file": "g1.json", "scale": 1.0, "D": [[1, 0], [0, 0]]},
                 {"laplacian": [[...]], "D": [[...]]},
                 {"G": [[...]], "D": [[...]]}],
      "lipschitz_c": 1.0, "V": [[...]], "P": [[...]],
      "xi": 0.5, "U": [[...]],
      "dynamics": {"kind": "lorenz" | "affine" | "logistic" | "tabulated", ...},
      "x0": [...] | {"center": [...], "spread": 0.1},
      "u": null | [[...]] | {"kind": "geometric", "amplitude": [...], "ratio": 0.5}
                          | {"kind": "constant", "value": [...]},
      "modes": [{"layers": [...]}], "dwell": 1.0
    }

Relative ``graph_file`` paths resolve against the system file's directory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .criteria import (
    GridSpec,
    MultiNetworkSystem,
    check_balanced_criterion,
    check_certificate_criterion,
    check_coupling_lmi,
    check_spanning_tree_threshold,
    discrete_criterion,
    is_synchronizing_linear,
    stability_region,
)
from .errors import DivergenceError, HypothesisError, SolverError, ValidationError
from .graphs import (
    WeightedDigraph,
    graph_from_json,
    graph_sum,
    has_spanning_directed_tree,
    is_balanced,
    is_strongly_connected,
    laplacian,
    reversal,
    three_layer_example,
    two_layer_circulant_example,
)
from .matrixcore import as_square
from .sim import (
    SYNC_THRESHOLD,
    affine,
    initial_states,
    logistic_map,
    lorenz,
    simulate_ct,
    simulate_dt,
    sync_error,
    tabulated,
)
from .spectra import make_family
from .ximax import (
    DEFAULT_EPS,
    FEAS_TOL,
    BracketError,
    SdpProblem,
    mu2,
    sdp_feasible,
    xi_lower_bound,
    xi_max,
    xi_upper_bound,
)

log = logging.getLogger("multisync")

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_INPUT, EXIT_HYPOTHESIS, EXIT_DIVERGENCE = 0, 1, 2, 3, 4
SIG_DIGITS = 12
# public criterion tokens and the descriptive names used in verdicts
CRITERIA = {
    "theorem3": "coupling_lmi",
    "theorem4": "certificate",
    "theorem5": "balanced",
    "corollary4": "spanning_tree_threshold",
    "eq4": "discrete",
    "linear": "linear",
}
BUILTINS = {"three-layer": three_layer_example, "circulant6": two_layer_circulant_example}
MAX_TRACE_SAMPLES = 2000


class InputError(ValidationError):
    """Malformed command-line input or input file."""


@dataclass
class AnalysisConfig:
    """Everything that determines a run: with the input files and the seed,
    the outputs are reproducible byte for byte."""

    command: str
    inputs: list
    params: dict = field(default_factory=dict)
    out: str | None = None
    seed: int = 0
    tol: float | None = None


# ---------------------------------------------------------------- formatting


def fmt_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(x, f".{SIG_DIGITS}g")
    return "0" if s == "-0" else s


def _plain(obj):
    """Convert numpy/complex/tuple content to JSON-ready values with
    floats rounded to 12 significant digits."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_plain(obj.real), _plain(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        text = fmt_float(obj)
        return text if text in ("nan", "inf", "-inf") else float(text)
    if isinstance(obj, (set, frozenset)):
        return sorted(_plain(v) for v in obj)
    return obj


def dumps(obj) -> str:
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, (int, np.integer)) else fmt_float(v) for v in row])
    return buf.getvalue()


# ---------------------------------------------------------------- input parsing


def _load_json(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _matrix(obj, name):
    try:
        arr = np.array(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not a numeric matrix") from exc
    return as_square(arr, name)


def _vector(obj, size, name):
    try:
        arr = np.array(obj, dtype=float).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise InputError(f"{name}: not a numeric vector") from exc
    if arr.size != size:
        raise InputError(f"{name}: expected {size} entries, got {arr.size}")
    return arr


def _graph_laplacians(paths, builtin=None):
    if builtin is not None:
        if paths:
            raise InputError("give graph files or --builtin, not both")
        return [laplacian(g) if isinstance(g, WeightedDigraph) else np.array(g, dtype=float)
                for g in BUILTINS[builtin]()]
    if not paths:
        raise InputError("no graph files given")
    Ls = [laplacian(graph_from_json(_load_json(p))) for p in paths]
    if len({L.shape[0] for L in Ls}) != 1:
        raise InputError("graphs have different numbers of vertices")
    return Ls


def _layer_matrix(entry, base, name):
    if not isinstance(entry, dict):
        raise InputError(f"{name}: layer must be an object")
    keys = [k for k in ("G", "laplacian", "graph", "graph_file") if k in entry]
    if len(keys) != 1:
        raise InputError(f"{name}: give exactly one of G, laplacian, graph, graph_file")
    key = keys[0]
    if key == "G":
        G = _matrix(entry["G"], name)
    elif key == "laplacian":
        G = laplacian(graph_from_json({"n": len(entry["laplacian"]),
                                       "laplacian": entry["laplacian"]}))
    elif key == "graph":
        G = laplacian(graph_from_json(entry["graph"]))
    else:
        G = laplacian(graph_from_json(_load_json(base / entry["graph_file"])))
    return float(entry.get("scale", 1.0)) * G


def _layers(entries, base, tag="layer"):
    if not isinstance(entries, list) or not entries:
        raise InputError("system needs a nonempty 'layers' list")
    Gs, Ds = [], []
    for k, entry in enumerate(entries):
        name = f"{tag} {k + 1}"
        Gs.append(_layer_matrix(entry, base, name))
        if "D" not in entry:
            raise InputError(f"{name}: missing inner coupling matrix D")
        Ds.append(_matrix(entry["D"], f"{name} D"))
    return Gs, Ds


def parse_dynamics(obj, m):
    if obj is None:
        return None
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError("dynamics must be an object with a 'kind'")
    kind = obj["kind"]
    if kind == "affine":
        f = affine(_matrix(obj["A"], "dynamics A"), obj.get("b"))
    elif kind == "lorenz":
        f = lorenz(*(float(obj.get(k, d)) for k, d in
                     (("sigma", 10.0), ("rho", 28.0), ("beta", 8.0 / 3.0))))
    elif kind == "logistic":
        f = logistic_map(float(obj.get("a", 3.9)))
    elif kind == "tabulated":
        f = tabulated(obj["xs"], obj["ys"])
    else:
        raise InputError(f"unknown dynamics kind {kind!r}")
    if f.m != m:
        raise InputError(f"dynamics have dimension {f.m}, inner matrices are {m} x {m}")
    return f


def _parse_u(obj, N, steps):
    if obj is None:
        return None
    if isinstance(obj, list):
        arr = np.array(obj, dtype=float)
        if arr.shape != (steps, N):
            raise InputError(f"u must have shape ({steps}, {N}), got {arr.shape}")
        return arr
    kind = obj.get("kind") if isinstance(obj, dict) else None
    if kind == "constant":
        value = _vector(obj["value"], N, "u value")
        return np.tile(value, (steps, 1))
    if kind == "geometric":
        amp = _vector(obj["amplitude"], N, "u amplitude")
        ratio = float(obj["ratio"])
        offset = _vector(obj.get("offset", np.zeros(N)), N, "u offset")
        return offset[None, :] + amp[None, :] * ratio ** np.arange(steps)[:, None]
    raise InputError("u must be null, an array, or {kind: constant|geometric}")


@dataclass
class SystemSpec:
    system: MultiNetworkSystem
    raw: dict
    base: Path
    dynamics: object = None
    laplacians: list | None = None


def load_system(path) -> SystemSpec:
    raw = _load_json(path)
    if not isinstance(raw, dict):
        raise InputError("system file must hold a JSON object")
    base = Path(path).resolve().parent
    Gs, Ds = _layers(raw.get("layers"), base)
    modes = []
    for k, mode in enumerate(raw.get("modes", [])):
        modes.append(_layers(mode.get("layers"), base, tag=f"mode {k + 1} layer"))
    system = MultiNetworkSystem(
        Gs, Ds,
        lipschitz_c=float(raw.get("lipschitz_c", 1.0)),
        V=None if raw.get("V") is None else _matrix(raw["V"], "V"),
        P=None if raw.get("P") is None else _matrix(raw["P"], "P"),
        modes=tuple(modes),
        dwell=float(raw.get("dwell", 1.0)),
    )
    f = parse_dynamics(raw.get("dynamics"), system.m)
    return SystemSpec(system, raw, base, f)


def _x0(spec: SystemSpec, seed):
    n, m = spec.system.n, spec.system.m
    x0 = spec.raw.get("x0")
    if x0 is None:
        raise InputError("simulation needs 'x0'")
    if isinstance(x0, dict):
        center = _vector(x0.get("center", np.zeros(m)), m, "x0 center")
        return initial_states(n, m, center, float(x0.get("spread", 0.1)), seed=seed)
    return _vector(x0, n * m, "x0")


# ---------------------------------------------------------------- commands


@dataclass
class Outcome:
    code: int
    text: str
    files: dict = field(default_factory=dict)


def cmd_spanning_tree(cfg: AnalysisConfig) -> Outcome:
    Ls = _graph_laplacians(cfg.inputs, cfg.params.get("builtin"))
    from .graphs import from_laplacian

    graphs = [from_laplacian(L) for L in Ls]
    layers = []
    for k, g in enumerate(graphs):
        ok, roots = has_spanning_directed_tree(reversal(g))
        layers.append({"layer": k + 1, "strongly_connected": is_strongly_connected(g),
                       "balanced": is_balanced(g), "spanning_tree": ok, "roots": roots})
    ok, roots = has_spanning_directed_tree(reversal(graph_sum(graphs)))
    report = {"n": graphs[0].n, "layers": layers, "graph_sum": {
        "spanning_tree": ok, "roots": roots,
        "strongly_connected": is_strongly_connected(graph_sum(graphs))}}
    text = dumps(report)
    return Outcome(EXIT_POSITIVE if ok else EXIT_NEGATIVE, text, {"spanning_tree.json": text})


def _bounds(Ls):
    return {"lower": xi_lower_bound(Ls), "upper": xi_upper_bound(Ls),
            "mu2": [mu2(L) for L in Ls]}


def _xi_result_dict(res, Ls):
    cert = res.certificate_at_lb
    return {
        "xi_max": res.value,
        "bracket": list(res.bracket),
        "epsilon": res.epsilon,
        "iterations": res.iterations,
        "nonconverged_as_infeasible": res.nonconverged_as_infeasible,
        "history": [{"xi": xi, "feasible": ok} for xi, ok in res.history],
        "certificate": {"xi": cert.xi, "verified": cert.verified, "U": cert.U,
                        "checks": cert.slacks},
        "bounds": _bounds(Ls),
    }


def _threads():
    raw = os.environ.get("MULTISYNC_THREADS", "")
    try:
        return max(1, int(raw)) if raw else (os.cpu_count() or 1)
    except ValueError as exc:
        raise InputError("MULTISYNC_THREADS must be a positive integer") from exc


def cmd_xi_max(cfg: AnalysisConfig) -> Outcome:
    Ls = _graph_laplacians(cfg.inputs, cfg.params.get("builtin"))
    p = cfg.params
    eps = p.get("epsilon", DEFAULT_EPS)
    if not eps > 0:
        raise InputError("epsilon must be positive")
    tol = FEAS_TOL if cfg.tol is None else cfg.tol
    threads = _threads()
    res = xi_max(Ls, eps, p.get("lb"), p.get("ub"), tol=tol)
    report = _xi_result_dict(res, Ls)
    if p.get("individual"):
        with ThreadPoolExecutor(max_workers=min(threads, len(Ls))) as pool:
            singles = list(pool.map(lambda L: xi_max([L], eps, tol=tol), Ls))
        values = [s.value for s in singles]
        report["individual"] = {
            "values": values,
            "min": min(values),
            "joint_strictly_below_min": bool(res.value < min(values)),
            "certificates_verified": [s.certificate_at_lb.verified for s in singles],
        }
    code = EXIT_POSITIVE if res.certificate_at_lb.verified else EXIT_NEGATIVE
    text = dumps(report)
    return Outcome(code, text, {"xi_max.json": text})


def cmd_bounds(cfg: AnalysisConfig) -> Outcome:
    Ls = _graph_laplacians(cfg.inputs, cfg.params.get("builtin"))
    b = _bounds(Ls)
    b["positive"] = bool(b["lower"] > 0 or b["upper"] > 0)
    text = dumps(b)
    return Outcome(EXIT_POSITIVE, text, {"bounds.json": text})


def _need(raw, key, override=None):
    if override is not None:
        return override
    if key not in raw:
        raise InputError(f"this criterion needs '{key}' in the system file or on the command line")
    return raw[key]


def cmd_check(cfg: AnalysisConfig) -> Outcome:
    name = CRITERIA.get(cfg.params["criterion"], cfg.params["criterion"])
    if len(cfg.inputs) != 1:
        raise InputError("check takes exactly one system file")
    spec = load_system(cfg.inputs[0])
    sysm, raw = spec.system, spec.raw
    xi_arg = cfg.params.get("xi")
    kw = {} if cfg.tol is None else {"tol": cfg.tol}
    if name == "coupling_lmi":
        U = _matrix(_need(raw, "U"), "U")
        verdict = check_coupling_lmi(sysm, U, **kw)
    elif name == "certificate":
        xi = float(_need(raw, "xi", xi_arg))
        if raw.get("U") is not None:
            U = _matrix(raw["U"], "U")
        else:
            out = sdp_feasible(SdpProblem(list(sysm.G_list), xi), maximize=True)
            if not out.feasible:
                text = dumps({"criterion": "certificate", "satisfied": False,
                              "margin": out.slack_upper, "strict": False,
                              "details": {"xi": xi, "sdp_slack_upper": out.slack_upper}})
                return Outcome(EXIT_NEGATIVE, text, {"verdict.json": text})
            U = out.certificate.U
        verdict = check_certificate_criterion(sysm.G_list, sysm.D_list, sysm.V, xi, U, **kw)
        verdict.details["U"] = U
    elif name == "balanced":
        verdict = check_balanced_criterion(sysm.G_list, float(_need(raw, "xi", xi_arg)), **kw)
    elif name == "spanning_tree_threshold":
        fam = make_family(list(sysm.G_list), seed=cfg.seed)
        verdict = check_spanning_tree_threshold(fam, sysm.D_list, sysm.lipschitz_c,
                                   float(_need(raw, "xi", xi_arg)))
    elif name == "discrete":
        fam = make_family(list(sysm.G_list), seed=cfg.seed)
        verdict = discrete_criterion(fam, sysm.D_list, sysm.V, sysm.lipschitz_c, **kw)
    elif name == "linear":
        f = spec.dynamics
        if f is None or f.kind != "affine":
            raise InputError("the linear criterion needs affine dynamics")
        fam = make_family(list(sysm.G_list), seed=cfg.seed)
        verdict = is_synchronizing_linear(f.params["A"], f.params["b"], fam, sysm.D_list, **kw)
    else:
        raise InputError(f"unknown criterion {name!r}")
    text = dumps(asdict(verdict))
    return Outcome(EXIT_POSITIVE if verdict.satisfied else EXIT_NEGATIVE, text,
                   {"verdict.json": text})


def cmd_simulate(cfg: AnalysisConfig) -> Outcome:
    mode = cfg.params["mode"]
    if len(cfg.inputs) != 1:
        raise InputError("simulate takes exactly one system file")
    spec = load_system(cfg.inputs[0])
    sysm, f = spec.system, spec.dynamics
    if f is None:
        raise InputError("simulation needs a 'dynamics' descriptor")
    x0 = _x0(spec, cfg.seed)
    threshold = cfg.params.get("threshold") or SYNC_THRESHOLD
    p = cfg.params
    if mode == "ct":
        dt, T = p.get("dt") or 1e-3, p.get("T") or 10.0
        if not dt > 0 or not T >= dt:
            raise InputError("need dt > 0 and T >= dt")
        every = p.get("record_every") or max(1, int(round(T / dt)) // MAX_TRACE_SAMPLES)
        if spec.raw.get("u") is not None:
            raise InputError("inputs u(p) apply to discrete-time runs only")
        trace = simulate_ct(sysm, f, x0, dt=dt, T=T, record_every=every)
    else:
        steps = p.get("steps") or 1000
        if steps < 1:
            raise InputError("steps must be positive")
        u = _parse_u(spec.raw.get("u"), sysm.n * sysm.m, steps)
        trace = simulate_dt(sysm, f, x0, steps, u=u)
    rep = sync_error(trace, threshold=threshold)
    summary = {"mode": mode, "final_error": rep.final_error, "decay_rate": rep.decay_rate,
               "decay_ratio": rep.decay_ratio, "synchronized": rep.synchronized,
               "threshold": rep.threshold, "samples": len(trace.times),
               "n": sysm.n, "m": sysm.m}
    text = dumps(summary)
    files = {"report.json": text,
             "trace.csv": _csv_text(["t", "node", "component", "value"], trace.rows())}
    return Outcome(EXIT_POSITIVE if rep.synchronized else EXIT_NEGATIVE, text, files)


def cmd_region(cfg: AnalysisConfig) -> Outcome:
    if len(cfg.inputs) < 2:
        raise InputError("region needs an A file and at least one D file")
    mats = []
    for path in cfg.inputs:
        obj = _load_json(path)
        if isinstance(obj, dict):
            keys = [k for k in ("A", "D", "matrix") if k in obj]
            if len(keys) != 1:
                raise InputError(f"{path}: expected one of A, D, matrix")
            obj = obj[keys[0]]
        mats.append(_matrix(obj, path))
    A, Ds = mats[0], mats[1:]
    if len(Ds) > 2:
        raise InputError("grid sampling supports at most two layers")
    if any(D.shape != A.shape for D in Ds):
        raise InputError("A and every D must have the same order")
    p = cfg.params
    grid = GridSpec(p["re_min"], p["re_max"], p["re_num"], p["im_min"], p["im_max"],
                    p["im_num"], tuple(p.get("slices") or ()))
    if grid.re_num < 1 or grid.im_num < 1:
        raise InputError("grid sizes must be positive")
    region = stability_region(A, Ds, grid)
    text = _csv_text(region.header(), region.rows())
    return Outcome(EXIT_POSITIVE, text, {"region.csv": text})


COMMANDS = {
    "spanning-tree": cmd_spanning_tree,
    "xi-max": cmd_xi_max,
    "bounds": cmd_bounds,
    "check": cmd_check,
    "simulate": cmd_simulate,
    "region": cmd_region,
}


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for every random choice")
    common.add_argument("--tol", type=float, default=None, help="verdict/feasibility tolerance")
    common.add_argument("--out", default=None, help="directory for output files")

    parser = argparse.ArgumentParser(prog="multisync", parents=[common],
                                     description="Synchronization of multi-layer networks.")
    sub = parser.add_subparsers(dest="command", required=True)

    def graph_cmd(name, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("graphs", nargs="*", help="graph JSON files")
        p.add_argument("--builtin", choices=sorted(BUILTINS), default=None)
        return p

    graph_cmd("spanning-tree", "spanning directed tree of the graph-sum reversal")
    p = graph_cmd("xi-max", "bisection for xi_M with certificate")
    p.add_argument("--epsilon", type=float, default=DEFAULT_EPS)
    p.add_argument("--lb", type=float, default=None)
    p.add_argument("--ub", type=float, default=None)
    p.add_argument("--individual", action="store_true", help="also xi_M of each layer")
    graph_cmd("bounds", "analytic lower and upper bounds on xi_M")

    p = sub.add_parser("check", parents=[common], help="evaluate a synchronization criterion")
    p.add_argument("criterion", choices=sorted({*CRITERIA, *CRITERIA.values()}))
    p.add_argument("system")
    p.add_argument("--xi", type=float, default=None)

    p = sub.add_parser("simulate", parents=[common], help="simulate a coupled system")
    p.add_argument("mode", choices=("ct", "dt"))
    p.add_argument("system")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--T", type=float, default=None)
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--record-every", type=int, default=None)
    p.add_argument("--threshold", type=float, default=None)

    p = sub.add_parser("region", parents=[common], help="phi on a grid of joint eigenvalues")
    p.add_argument("matrices", nargs="+", help="A file followed by one or two D files")
    for name, default in (("re-min", -2.0), ("re-max", 2.0), ("im-min", -2.0), ("im-max", 2.0)):
        p.add_argument(f"--{name}", type=float, default=default)
    p.add_argument("--re-num", type=int, default=41)
    p.add_argument("--im-num", type=int, default=41)
    p.add_argument("--slices", type=complex, nargs="*", default=None,
                   help="second-layer eigenvalues, one grid per value")
    return parser


def config_from_args(args) -> AnalysisConfig:
    params = {k: v for k, v in vars(args).items()
              if k not in ("command", "seed", "tol", "out", "graphs", "system", "matrices")}
    if args.command == "check":
        inputs = [args.system]
    elif args.command == "simulate":
        inputs = [args.system]
    elif args.command == "region":
        inputs = list(args.matrices)
        params = {k.replace("-", "_"): v for k, v in params.items()}
    else:
        inputs = list(args.graphs)
    return AnalysisConfig(args.command, inputs, params, args.out, args.seed, args.tol)


def _write(out_dir, cfg, files):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = asdict(cfg)
    config["params"] = {k: (str(v) if isinstance(v, complex) else v)
                        for k, v in config["params"].items()}
    if config["params"].get("slices"):
        config["params"]["slices"] = [str(s) for s in cfg.params["slices"]]
    files = {**files, "config.json": dumps(config)}
    for name, text in files.items():
        (out / name).write_text(text, encoding="utf-8")


def run(cfg: AnalysisConfig) -> Outcome:
    """Run a configured command, mapping failures to exit codes."""
    try:
        return COMMANDS[cfg.command](cfg)
    except HypothesisError as exc:
        return Outcome(EXIT_HYPOTHESIS, dumps({"error": "hypothesis", "reason": exc.reason,
                                               "message": str(exc)}))
    except DivergenceError as exc:
        return Outcome(EXIT_DIVERGENCE, dumps({"error": "divergence", "step": exc.step,
                                               "message": str(exc)}))
    except SolverError as exc:
        return Outcome(EXIT_DIVERGENCE, dumps({"error": "solver", "message": str(exc)}))
    except (ValidationError, BracketError, KeyError, TypeError, ValueError) as exc:
        msg = f"missing field {exc}" if isinstance(exc, KeyError) else str(exc)
        return Outcome(EXIT_INPUT, dumps({"error": "input", "message": msg}))


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_POSITIVE
    cfg = config_from_args(args)
    outcome = run(cfg)
    if outcome.files and cfg.out is not None and outcome.code in (EXIT_POSITIVE, EXIT_NEGATIVE):
        _write(cfg.out, cfg, outcome.files)
    stream = sys.stdout if outcome.code in (EXIT_POSITIVE, EXIT_NEGATIVE) else sys.stderr
    stream.write(outcome.text)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
