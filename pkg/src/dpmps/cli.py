"""Config-driven command line front end.

Reads a JSON run configuration, dispatches to the solver, the oracles, or
the commuting refinement, and writes a machine-readable result document.
Exit codes: 0 success, 2 config error, 3 infeasible size guard, 4
numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import dataclass

from . import commuting as cm
from . import dp, epsnet, oracle
from .errors import (AnnihilationError, ConfigError, EmptyNetError,
                     NetSizeError, NoAdmissibleSequenceError,
                     NoAdmissibleTransitionError, NoFeasibleEigenspaceError,
                     SizeGuardError)
from .hamiltonian import build_model, group_boundaries, is_commuting
from .mps import canonicalize, mps_to_json, product_basis_state

MODES = ("solve", "oracle", "enumerate", "commuting", "net-stats", "baseline")
DEFAULT_CAP = 10**7


@dataclass
class RunConfig:
    """Validated run configuration with defaults filled in."""

    model_name: str
    model_params: dict
    n: int
    seed: int | None
    D: int
    delta: float
    epsilon_op: float | None
    target_error: float | None
    epsilon: float | None
    cap: int
    mode: str
    out_path: str | None
    emit_mps: bool
    start: str
    sweeps: int
    threads: int = 1
    verbose: bool = False


def parse_config(text: str) -> RunConfig:
    """Parse and validate a JSON config document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config root must be an object")
    model = doc.get("model", {})
    solver = doc.get("solver", {})
    run = doc.get("run", {})
    output = doc.get("output", {})

    name = model.get("name")
    if not isinstance(name, str):
        raise ConfigError("model.name is required")
    n = model.get("n")
    if not isinstance(n, int) or n < 3:
        raise ConfigError("model.n must be an integer >= 3")
    seed = model.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError("model.seed must be an integer")

    D = solver.get("D", 1)
    if not isinstance(D, int) or D < 1:
        raise ConfigError("solver.D must be an integer >= 1")
    delta = solver.get("delta", 0.25)
    if not isinstance(delta, (int, float)) or not 0.0 < delta <= 0.5:
        raise ConfigError("solver.delta must lie in (0, 0.5]")
    cap = solver.get("cap", DEFAULT_CAP)
    if not isinstance(cap, int) or cap < 1:
        raise ConfigError("solver.cap must be a positive integer")
    for key in ("epsilon_op", "target_error", "epsilon"):
        val = solver.get(key)
        if val is not None and (not isinstance(val, (int, float)) or val <= 0):
            raise ConfigError(f"solver.{key} must be a positive number")

    mode = run.get("mode")
    if mode not in MODES:
        raise ConfigError(f"run.mode must be one of {MODES}")
    sweeps = run.get("sweeps", 4)
    if not isinstance(sweeps, int) or sweeps < 0:
        raise ConfigError("run.sweeps must be a nonnegative integer")
    start = run.get("start", "all_up")
    if start not in ("all_up", "all_down"):
        raise ConfigError("run.start must be 'all_up' or 'all_down'")

    return RunConfig(
        model_name=name, model_params=model.get("params", {}) or {},
        n=n, seed=seed, D=D, delta=float(delta),
        epsilon_op=solver.get("epsilon_op"),
        target_error=solver.get("target_error"),
        epsilon=solver.get("epsilon"),
        cap=cap, mode=mode,
        out_path=output.get("path"), emit_mps=bool(output.get("emit_mps")),
        start=start, sweeps=sweeps,
    )


def _result_skeleton(cfg: RunConfig) -> dict:
    return {
        "mode": cfg.mode,
        "model": {"name": cfg.model_name, "params": cfg.model_params,
                  "n": cfg.n, "seed": cfg.seed},
        "warnings": [],
        "timings": {},
    }


def _epsilon_op_for(cfg: RunConfig, h_grouped) -> float | None:
    if cfg.epsilon_op is not None:
        return cfg.epsilon_op
    if cfg.target_error is not None:
        return dp.epsilon_for_target(cfg.target_error, h_grouped.J, cfg.D,
                                     h_grouped.n)
    return None


def execute(cfg: RunConfig) -> dict:
    """Run the configured mode and return the result document."""
    res = _result_skeleton(cfg)
    t0 = time.perf_counter()
    h0 = build_model(cfg.model_name, cfg.model_params, cfg.n, cfg.seed)

    if cfg.mode == "solve":
        hg = group_boundaries(h0, cfg.D)
        sr = dp.solve(hg, cfg.D, cfg.delta,
                      epsilon_op=_epsilon_op_for(cfg, hg), cap=cfg.cap,
                      threads=cfg.threads)
        res.update({
            "e_alg": sr.e_alg, "e_true": sr.e_true,
            "lower_bound": sr.lower_bound, "upper_slack": sr.upper_slack,
            "N": sr.N, "end_net_size": sr.n_end,
            "epsilon_cert": sr.epsilon_used, "epsilon_op": sr.epsilon_op,
            "assignment": sr.assignment, "digest": sr.digest,
        })
        res["timings"].update(sr.timings)
        if sr.epsilon_used >= 1.0:
            res["warnings"].append("certified epsilon exceeds 1: bounds vacuous")
        if cfg.emit_mps and cfg.out_path:
            with open(cfg.out_path + ".mps.json", "w", encoding="utf-8") as f:
                json.dump(mps_to_json(sr.omega), f)
    elif cfg.mode == "oracle":
        gt = oracle.exact_ground(h0)
        res.update({"e_exact": gt.e0, "degeneracy": gt.degeneracy,
                    "gap": gt.gap})
    elif cfg.mode == "enumerate":
        hg = group_boundaries(h0, cfg.D)
        eps_op = _epsilon_op_for(cfg, hg)
        if eps_op is None:
            eps_op = 2.0 * 59.0 * (hg.dims[1] * cfg.D) * cfg.delta
        pn = epsnet.build_pair_net(cfg.D, hg.dims[1], cfg.delta, eps_op,
                                   cfg.cap)
        en = epsnet.build_end_net(cfg.D, hg.dims[0], cfg.delta, cfg.cap)
        e_alg, assignment = oracle.enumerate_net_optimum(hg, en, pn, eps_op)
        res.update({"e_alg": e_alg, "assignment": assignment,
                    "N": pn.size, "end_net_size": en.size,
                    "epsilon_cert": pn.epsilon_cert, "epsilon_op": eps_op})
    elif cfg.mode == "commuting":
        if not is_commuting(h0):
            raise ConfigError(
                f"model {cfg.model_name!r} is not commuting; "
                "commuting mode requires pairwise-commuting terms"
            )
        gt = oracle.exact_ground(h0)
        omega = canonicalize(gt.ground_vector, h0.n, h0.dims[1], None,
                             h0.dims[0])
        rr = cm.refine_to_eigenstate(omega, h0)
        res.update({
            "energy": rr.energy, "e_exact": gt.e0,
            "chosen": [[t, j, c] for t, j, c in rr.chosen],
            "residual_max": max(rr.residuals),
            "matched_exact": bool(abs(rr.energy - gt.e0) <= 1e-8),
        })
    elif cfg.mode == "net-stats":
        hg = group_boundaries(h0, cfg.D)
        d = hg.dims[1]
        eps = cfg.epsilon if cfg.epsilon is not None \
            else 2.0 * 59.0 * (d * cfg.D) * cfg.delta
        bound = epsnet.net_size_estimate(cfg.D, d, eps)
        eps_op = _epsilon_op_for(cfg, hg) or eps
        pn = epsnet.build_pair_net(cfg.D, d, cfg.delta, eps_op, cfg.cap)
        en = epsnet.build_end_net(cfg.D, hg.dims[0], cfg.delta, cfg.cap)
        res.update({
            "paper_bound": str(bound),
            "paper_bound_log10": len(str(bound)) - 1,
            "N": pn.size, "end_net_size": en.size,
            "epsilon": eps, "epsilon_cert": pn.epsilon_cert,
        })
        if eps >= 1.0:
            res["warnings"].append("certified epsilon exceeds 1: bounds vacuous")
    elif cfg.mode == "baseline":
        k = 0 if cfg.start == "all_up" else h0.dims[0] - 1
        v = product_basis_state(h0.n, h0.dims[1], h0.dims[0], [k] * h0.n)
        start = canonicalize(v, h0.n, h0.dims[1], cfg.D, h0.dims[0])
        e = oracle.local_sweep_baseline(h0, cfg.D, start, cfg.sweeps)
        res.update({"e_baseline": e, "sweeps": cfg.sweeps,
                    "start": cfg.start})
    res["timings"]["total_ms"] = 1e3 * (time.perf_counter() - t0)
    res["digest"] = res.get("digest") or _doc_digest(res)
    return res


def _doc_digest(res: dict) -> str:
    doc = {k: v for k, v in res.items() if k not in ("timings", "digest")}
    return hashlib.sha256(
        json.dumps(doc, sort_keys=True, default=repr).encode()
    ).hexdigest()


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="dpmps",
        description="Net-based dynamic programming for MPS ground states",
    )
    ap.add_argument("--config", required=True, help="path to JSON run config")
    ap.add_argument("--threads", type=int, default=1,
                    help="worker threads for the DP inner loop")
    ap.add_argument("--cap-net-size", type=int, default=None,
                    help="override the net candidate cap")
    ap.add_argument("--verbose", action="store_true")
    args = ap.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as f:
            cfg = parse_config(f.read())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    cfg.threads = max(1, args.threads)
    cfg.verbose = args.verbose
    if args.cap_net_size is not None:
        cfg.cap = args.cap_net_size

    try:
        res = execute(cfg)
    except (NetSizeError, SizeGuardError) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 3
    except (AnnihilationError, EmptyNetError, NoAdmissibleSequenceError,
            NoAdmissibleTransitionError, NoFeasibleEigenspaceError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    text = json.dumps(res, indent=2, default=float)
    if cfg.out_path:
        with open(cfg.out_path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        if cfg.verbose:
            print(f"wrote {cfg.out_path}")
    else:
        print(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
