"""Command line front end.

Subcommands write their artifacts (JSON, CSV) plus a ``manifest.json`` into
``--out``.  Options can also come from a JSON file given with ``--config``;
explicit flags take precedence.  Errors are reported as a JSON object on
stderr and in ``error.json`` with the exit code of the error class.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import CascadeError, InputError, NumericalError, ResourceBudgetError
from .genset import GenerationSet, check_acceptable, construct_paper, construct_search
from .genset.geometry import norm_explosion_ratio
from .pipeline import end_to_end_growth
from .resonant import cached_index, lift_and_compare, sweep
from .toy import ToyParams, cascade, derive_hamiltonian, fit_stage_times, integrate

THREADS_ENV = "SOBOLEV_CASCADE_THREADS"
MANIFEST = "manifest.json"

# option name -> (type, default); ``None`` defaults mean "not set"
OPTIONS = {
    "N": (int, None), "d": (int, 2), "s": (float, 1.5), "seed": (int, 0),
    "method": (str, "paper"), "height": (int, 100_000), "budget": (int, 200_000),
    "nondeg": (str, "full"), "set": (str, None), "out": (str, "."),
    "mode": (str, "leading"), "b0": (str, None), "horizon": (float, None),
    "tol": (float, 1e-12), "delta": (list, [1e-3]), "rho": (list, [10.0]),
    "margin": (int, 1), "samples": (int, 401), "threads": (int, None),
    "j_budget": (float, 1e-9), "h_budget": (float, 1e-8), "cache": (str, None),
    "manifests": (list, []), "verify": (bool, False), "hamiltonian": (str, None),
}


class IOFailure(CascadeError):
    exit_code = 5


# -- plumbing ---------------------------------------------------------------

def sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _read_text(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc}") from exc


def _write(path: Path, text: str) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise IOFailure(f"cannot write {path}: {exc}") from exc
    return path


def _json(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return str(obj)


def resolve_config(args: argparse.Namespace) -> dict:
    """Flags over config file over defaults; unknown config keys are rejected."""
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(_read_text(args.config))
        except json.JSONDecodeError as exc:
            raise InputError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(cfg, dict):
            raise InputError("config must be a JSON object")
        unknown = sorted(set(cfg) - set(OPTIONS))
        if unknown:
            raise InputError(f"unknown config keys: {unknown}")
    out = {}
    for key, (typ, default) in OPTIONS.items():
        flag = getattr(args, key, None)
        if flag is not None and flag != []:
            out[key] = flag
        elif key in cfg:
            val = cfg[key]
            if typ is list:
                out[key] = val if isinstance(val, list) else [val]
            elif typ is bool:
                out[key] = bool(val)
            else:
                try:
                    out[key] = typ(val)
                except (TypeError, ValueError) as exc:
                    raise InputError(f"config key {key!r}: {exc}") from exc
        else:
            out[key] = default
    if out["threads"] is None:
        out["threads"] = int(os.environ.get(THREADS_ENV, "1"))
    _validate(out)
    return out


def _validate(c: dict) -> None:
    if c["N"] is not None and not 2 <= c["N"] <= 10:
        raise InputError("N must lie in 2..10")
    if c["d"] < 2:
        raise InputError("d must be at least 2")
    if not 1e-13 <= c["tol"] <= 1e-6:
        raise InputError("tol must lie in [1e-13, 1e-6]")
    if c["margin"] not in (0, 1):
        raise InputError("margin must be 0 or 1")
    if c["threads"] < 1:
        raise InputError("thread count must be positive")
    if any(not 0 < float(x) <= 0.1 for x in c["delta"]):
        raise InputError("delta must lie in (0, 0.1]")
    if any(float(x) <= 0 for x in c["rho"]):
        raise InputError("rho must be positive")
    if c["mode"] not in ("leading", "full"):
        raise InputError("mode must be 'leading' or 'full'")


class Run:
    """Collects outputs, timings and outcome flags for the manifest."""

    def __init__(self, command: str, cfg: dict):
        self.command = command
        self.cfg = cfg
        self.out = Path(cfg["out"])
        self.inputs: dict = {}
        self.outputs: dict = {}
        self.timings: dict = {}
        self.outcome: dict = {}
        self._t0 = time.perf_counter()

    def stage(self, name: str, t0: float) -> None:
        self.timings[name] = time.perf_counter() - t0

    def input(self, path) -> None:
        self.inputs[str(path)] = sha256(path)

    def write(self, name: str, text: str) -> Path:
        p = _write(self.out / name, text)
        self.outputs[name] = sha256(p)
        return p

    def write_with(self, name: str, writer) -> Path:
        p = self.out / name
        try:
            p.parent.mkdir(parents=True, exist_ok=True)
            writer(p)
        except OSError as exc:
            raise IOFailure(f"cannot write {p}: {exc}") from exc
        self.outputs[name] = sha256(p)
        return p

    def finish(self) -> Path:
        self.timings["total"] = time.perf_counter() - self._t0
        manifest = {
            "command": self.command, "config": self.cfg, "seed": self.cfg["seed"],
            "threads": self.cfg["threads"], "inputs": self.inputs, "outputs": self.outputs,
            "versions": {"package": __version__, "python": platform.python_version(),
                         "numpy": np.__version__, "scipy": scipy.__version__},
            "timings": self.timings, "outcome": self.outcome,
        }
        return _write(self.out / MANIFEST, _json(manifest))


def load_set(path, verify: bool = False) -> GenerationSet:
    """Read a set file, checking it against a sibling manifest when present."""
    path = Path(path)
    text = _read_text(path)
    man = path.parent / MANIFEST
    if man.exists():
        try:
            recorded = json.loads(man.read_text()).get("outputs", {}).get(path.name)
        except json.JSONDecodeError:
            recorded = None
        if recorded is not None and recorded != sha256(path):
            raise InputError(f"{path} does not match the hash recorded in {man}")
    try:
        S = GenerationSet.from_json(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc
    if not S.satisfies_families():
        raise InputError(f"{path} violates its family relations")
    if verify and not check_acceptable(S).all_ok:
        raise InputError(f"{path} fails verification")
    return S


def parse_b0(spec: str | None, N: int) -> np.ndarray:
    """``unit:j`` (all mass on generation ``j``) or comma separated complex numbers."""
    if spec is None:
        spec = "unit:1"
    if spec.startswith("unit:"):
        j = int(spec[5:])
        if not 1 <= j <= N:
            raise InputError(f"generation {j} outside 1..{N}")
        b = np.zeros(N, dtype=complex)
        b[j - 1] = 1.0
        return b
    try:
        b = np.array([complex(x.replace(" ", "")) for x in spec.split(",")])
    except ValueError as exc:
        raise InputError(f"cannot parse b0: {exc}") from exc
    if b.shape != (N,):
        raise InputError(f"b0 has {len(b)} entries, expected {N}")
    return b


def _toy_params(cfg: dict, N: int) -> ToyParams:
    if cfg["mode"] == "leading":
        return ToyParams(N, cfg["d"], "leading_order")
    from .toy import PolyHamiltonian
    h = (PolyHamiltonian.from_json(_read_text(cfg["hamiltonian"])) if cfg["hamiltonian"]
         else derive_hamiltonian(N, cfg["d"]))
    return ToyParams(N, cfg["d"], "full_poly", h)


# -- subcommands --------------------------------------------------------------

def cmd_construct(cfg: dict) -> int:
    if cfg["N"] is None:
        raise InputError("construct needs --N")
    run = Run("construct", cfg)
    t0 = time.perf_counter()
    if cfg["method"] == "paper":
        S = construct_paper(cfg["N"], cfg["d"], cfg["seed"], nondeg=cfg["nondeg"])
    elif cfg["method"] == "search":
        S = construct_search(cfg["N"], cfg["d"], cfg["height"], cfg["seed"], budget=cfg["budget"])
    else:
        raise InputError("method must be 'paper' or 'search'")
    run.stage("construct", t0)
    run.write("set.json", S.to_json() + "\n")
    return _verify_into(run, S)


def _verify_into(run: Run, S: GenerationSet) -> int:
    s = _exact_s(run.cfg["s"])
    run.outcome = {"m": S.m, "N": S.N}
    if S.N >= 4:
        ratio = norm_explosion_ratio(S, s)
        run.outcome["explosion_ratio"] = ratio.value
        run.outcome["explosion_threshold"] = 2 ** ((S.N - 6) * (run.cfg["s"] - 1))
        run.outcome["explosion_ok"] = ratio.exceeds_threshold()
    t0 = time.perf_counter()
    try:
        rep = check_acceptable(S, run.cfg["d"], s, budget=run.cfg["budget"] * 25)
    except ResourceBudgetError as exc:
        # the partial report keeps what was decided before the budget ran out
        run.stage("verify", t0)
        run.write("report.json", _json({"all_ok": None, "completed_stages": exc.completed_stages,
                                        "budget_stats": exc.stats,
                                        "norm_explosion_ok": run.outcome.get("explosion_ok"),
                                        "construction": S.metadata}))
        run.outcome["all_ok"] = None
        run.finish()
        raise
    run.stage("verify", t0)
    run.write("report.json", rep.to_json() + "\n")
    run.outcome["all_ok"] = rep.all_ok
    run.finish()
    return 0 if rep.all_ok else 1


def _exact_s(s: float):
    from fractions import Fraction
    f = Fraction(s).limit_denominator(1000)
    return f if float(f) == s else s


def cmd_verify(cfg: dict) -> int:
    if cfg["set"] is None:
        raise InputError("verify needs --set")
    run = Run("verify", cfg)
    S = load_set(cfg["set"])
    run.input(cfg["set"])
    return _verify_into(run, S)


def cmd_derive(cfg: dict) -> int:
    run = Run("derive", cfg)
    N = cfg["N"]
    if cfg["set"] is not None:
        S = load_set(cfg["set"])
        run.input(cfg["set"])
        N = S.N
    if N is None:
        raise InputError("derive needs --N or --set")
    t0 = time.perf_counter()
    h = derive_hamiltonian(N, cfg["d"], budget=cfg["budget"] * 100)
    run.stage("derive", t0)
    run.write("hamiltonian.json", h.to_json() + "\n")
    run.outcome = {"N": N, "d": cfg["d"], "powers": [str(p) for p in h.powers()],
                   "real": h.is_real(), "gauge_invariant": h.is_gauge_invariant()}
    run.finish()
    return 0


def _set_and_N(cfg: dict, run: Run):
    if cfg["set"] is not None:
        S = load_set(cfg["set"], cfg["verify"])
        run.input(cfg["set"])
        return S, S.N
    if cfg["N"] is None:
        raise InputError("simulate needs --set or --N")
    return None, cfg["N"]


def _budget_exit(run: Run, drifts: dict) -> int:
    breached = [k for k, (v, cap) in drifts.items() if not v <= cap]
    run.outcome["budgets"] = {k: {"value": v, "cap": cap} for k, (v, cap) in drifts.items()}
    run.outcome["breached"] = breached
    run.finish()
    if breached:
        raise NumericalError(f"budget breached: {', '.join(breached)}")
    return 0


def cmd_sim_toy(cfg: dict) -> int:
    run = Run("simulate toy", cfg)
    _, N = _set_and_N(cfg, run)
    params = _toy_params(cfg, N)
    b0 = parse_b0(cfg["b0"], N)
    t0 = time.perf_counter()
    traj = integrate(params, b0, cfg["horizon"] or 10.0, cfg["tol"], samples=cfg["samples"])
    run.stage("integrate", t0)
    run.write_with("trajectory.csv", traj.to_csv)
    amp = np.abs(traj.b)
    diag = {"J_drift": traj.J_drift, "h_drift": traj.h_drift,
            "amplitude_range": [[float(a.min()), float(a.max())] for a in amp.T]}
    run.write("diagnostics.json", _json(diag))
    run.outcome.update(diag)
    return _budget_exit(run, {"J_drift": (traj.J_drift, cfg["j_budget"]),
                              "h_drift": (traj.h_drift, cfg["h_budget"])})


def cmd_sim_cascade(cfg: dict) -> int:
    run = Run("simulate cascade", cfg)
    S, N = _set_and_N(cfg, run)
    params = _toy_params(cfg, N)
    results, worst_J, worst_h = [], 0.0, 0.0
    for delta in map(float, cfg["delta"]):
        t0 = time.perf_counter()
        res = cascade(params, delta, tol=cfg["tol"])
        run.stage(f"cascade_{delta:g}", t0)
        results.append(res)
        run.write_with(f"cascade_{delta:g}.csv", res.trajectory.to_csv)
        worst_J = max(worst_J, res.trajectory.J_drift)
        worst_h = max(worst_h, res.trajectory.h_drift)
    diag = {"runs": [r.to_dict() for r in results]}
    if len(results) >= 2:
        diag["fit"] = fit_stage_times(results)
    if S is not None and N >= 7:
        diag["growth"] = [end_to_end_growth(S, cfg["s"], r.delta, result=r).to_dict()
                          for r in results]
    run.write("diagnostics.json", _json(diag))
    run.outcome.update({"runs": [{"delta": r.delta, "tau": r.to_dict()["tau"], "T0": r.T0}
                                 for r in results],
                        "fit": diag.get("fit"), "growth": diag.get("growth")})
    return _budget_exit(run, {"J_drift": (worst_J, cfg["j_budget"]),
                              "h_drift": (worst_h, cfg["h_budget"])})


def cmd_sim_resonant(cfg: dict) -> int:
    run = Run("simulate resonant", cfg)
    S, N = _set_and_N(cfg, run)
    if S is None:
        raise InputError("simulate resonant needs --set")
    t0 = time.perf_counter()
    idx = cached_index(S, cfg["d"], cfg["cache"])
    run.stage("index", t0)
    params = ToyParams(N, cfg["d"], "full_poly", derive_hamiltonian(N, cfg["d"]))
    b0 = parse_b0(cfg["b0"], N) if cfg["b0"] else _default_b0(N)
    t0 = time.perf_counter()
    rep = lift_and_compare(S, cfg["d"], idx, params, b0, cfg["horizon"] or 0.5, cfg["tol"],
                           cfg["samples"])
    run.stage("lift_and_compare", t0)
    run.write_with("deviation.csv", lambda p: _csv(p, ["t", "l1_deviation"],
                                                   zip(rep.t, rep.deviation)))
    run.write("diagnostics.json", _json(dict(rep.to_dict(), monomials=len(idx),
                                             index_hash=idx.content_hash)))
    run.outcome.update(rep.to_dict())
    return _budget_exit(run, {"l1_deviation": (rep.max_l1_deviation, 10 * rep.tolerance),
                              "spread": (rep.max_spread, 1e-10)})


def _default_b0(N: int) -> np.ndarray:
    from .resonant import default_seed
    return default_seed(N)


def _csv(path, header, rows) -> None:
    import csv
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])


def cmd_sim_approx(cfg: dict) -> int:
    run = Run("simulate approx", cfg)
    S, N = _set_and_N(cfg, run)
    if S is None:
        raise InputError("simulate approx needs --set")
    rhos = [float(r) for r in cfg["rho"]]
    t0 = time.perf_counter()
    runs, fit = sweep(S, cfg["d"], rhos, cfg["horizon"] or 2.0, cfg["margin"],
                      tol=max(cfg["tol"], 1e-10), samples=cfg["samples"])
    run.stage("sweep", t0)
    for r in runs:
        run.write_with(f"approx_rho{r.rho:g}.csv", r.to_csv)
    fit["runs"] = [dict(r.meta, rho=r.rho, max_xi=r.max_xi) for r in runs]
    run.write("diagnostics.json", _json(fit))
    run.outcome.update(fit)
    run.finish()
    return 0


def cmd_report(cfg: dict) -> int:
    paths = cfg["manifests"]
    if not paths:
        raise InputError("report needs at least one manifest")
    rows = {"explosion": [], "stages": [], "fits": [], "growth": [], "approx": []}
    for p in paths:
        try:
            man = json.loads(_read_text(p))
        except json.JSONDecodeError as exc:
            raise InputError(f"{p} is not valid JSON: {exc}") from exc
        o, cmd = man.get("outcome", {}), man.get("command", "")
        if "explosion_ratio" in o:
            rows["explosion"].append({"manifest": p, "N": o.get("N"),
                                      "ratio": o["explosion_ratio"],
                                      "threshold": o.get("explosion_threshold"),
                                      "exceeds": o["explosion_ratio"] > o.get("explosion_threshold", math.inf)})
        if cmd == "simulate cascade":
            for r in o.get("runs", []):
                tau = r["tau"]
                keys = sorted(tau, key=int)
                # the last stage runs from its threshold to the final peak at T0
                ends = [tau[b] for b in keys[1:]] + [r["T0"]]
                for a, end in zip(keys, ends):
                    rows["stages"].append({"manifest": p, "delta": r["delta"],
                                           "generation": int(a), "start": tau[a],
                                           "duration": end - tau[a]})
            if o.get("fit"):
                rows["fits"].append(dict(o["fit"], manifest=p))
            for g in o.get("growth") or []:
                rows["growth"].append(dict(g, manifest=p))
        if cmd == "simulate approx":
            for r in sorted(o.get("max_xi", {}).items(), key=lambda kv: float(kv[0])):
                rows["approx"].append({"manifest": p, "rho": float(r[0]), "max_xi": r[1],
                                       "C": o.get("C"), "slack": o.get("slack")})
    out = Path(cfg["out"])
    _write(out / "summary.json", _json(rows))
    _write(out / "summary.md", _markdown(rows))
    return 0


def _markdown(rows: dict) -> str:
    lines = ["# Run summary", ""]
    titles = {"explosion": "Explosion ratios", "stages": "Cascade stages",
              "fits": "Stage-time fits", "growth": "Sobolev growth",
              "approx": "Approximation deviation"}
    for key, title in titles.items():
        if not rows[key]:
            continue
        cols = [c for c in rows[key][0] if not isinstance(rows[key][0][c], (dict, list))]
        lines += [f"## {title}", "", "| " + " | ".join(cols) + " |",
                  "|" + "---|" * len(cols)]
        for r in rows[key]:
            lines.append("| " + " | ".join(_cell(r.get(c)) for c in cols) + " |")
        lines.append("")
    return "\n".join(lines)


def _cell(v) -> str:
    return f"{v:.6g}" if isinstance(v, float) else str(v)


# -- parser -----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sobolev-cascade", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file with option defaults")
        sp.add_argument("--out", help="output directory (default: .)")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--threads", type=int, help=f"thread count (default: ${THREADS_ENV} or 1)")
        sp.add_argument("--d", type=int)
        sp.add_argument("--s", type=float, help="Sobolev exponent (default 1.5)")

    c = sub.add_parser("construct", help="build and verify a generation set")
    common(c)
    c.add_argument("--N", type=int)
    c.add_argument("--method", choices=["paper", "search"])
    c.add_argument("--height", type=int)
    c.add_argument("--budget", type=int)
    c.add_argument("--nondeg", choices=["full", "light"])

    v = sub.add_parser("verify", help="verify an existing set file")
    common(v)
    v.add_argument("--set")
    v.add_argument("--budget", type=int)

    d = sub.add_parser("derive", help="derive the exact toy Hamiltonian")
    common(d)
    d.add_argument("--N", type=int)
    d.add_argument("--set")
    d.add_argument("--budget", type=int)

    s = sub.add_parser("simulate", help="run a simulation")
    ssub = s.add_subparsers(dest="kind", required=True)
    for kind in ("toy", "cascade", "resonant", "approx"):
        k = ssub.add_parser(kind)
        common(k)
        k.add_argument("--set")
        k.add_argument("--N", type=int)
        k.add_argument("--verify", action="store_true", default=None,
                       help="run the full verification on the set first")
        k.add_argument("--tol", type=float)
        k.add_argument("--horizon", type=float)
        k.add_argument("--samples", type=int)
        k.add_argument("--mode", choices=["leading", "full"])
        k.add_argument("--hamiltonian", help="derived Hamiltonian JSON for --mode full")
        k.add_argument("--b0", help="'unit:j' or comma separated complex amplitudes")
        k.add_argument("--j-budget", dest="j_budget", type=float)
        k.add_argument("--h-budget", dest="h_budget", type=float)
        if kind == "cascade":
            k.add_argument("--delta", type=float, nargs="+", default=[])
        if kind == "resonant":
            k.add_argument("--cache", help="directory for cached resonant indices")
        if kind == "approx":
            k.add_argument("--rho", type=float, nargs="+", default=[])
            k.add_argument("--margin", type=int)

    r = sub.add_parser("report", help="summarise manifests")
    r.add_argument("manifests", nargs="*", default=[])
    r.add_argument("--config")
    r.add_argument("--out")
    return p


COMMANDS = {"construct": cmd_construct, "verify": cmd_verify, "derive": cmd_derive,
            "report": cmd_report, ("simulate", "toy"): cmd_sim_toy,
            ("simulate", "cascade"): cmd_sim_cascade,
            ("simulate", "resonant"): cmd_sim_resonant,
            ("simulate", "approx"): cmd_sim_approx}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    key = ("simulate", args.kind) if args.command == "simulate" else args.command
    try:
        cfg = resolve_config(args)
        return COMMANDS[key](cfg)
    except CascadeError as exc:
        return _fail(args, exc, exc.exit_code)
    except OSError as exc:
        return _fail(args, exc, IOFailure.exit_code)


def _fail(args, exc: Exception, code: int) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("completed_stages", "stats", "last_stage", "time", "family"):
        if getattr(exc, attr, None) is not None:
            err[attr] = getattr(exc, attr)
    text = _json(err)
    sys.stderr.write(text)
    out = getattr(args, "out", None)
    if out:
        try:
            _write(Path(out) / "error.json", text)
        except IOFailure:
            pass
    return code


if __name__ == "__main__":
    sys.exit(main())
