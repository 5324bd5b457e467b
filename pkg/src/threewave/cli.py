"""Command-line driver: config ingestion, experiment orchestration, CSV output.

Subcommands: simulate, equilibrium, stability, verify, sweep.  All numeric
output is serialized with 17 significant digits so files round-trip doubles
exactly and reruns of the same config are byte-identical (the manifest's
wall-clock field is the sole non-reproducible value).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .equilibrium import (
    beta_approx,
    bose_einstein,
    check_be_identities,
    final_energy_approx,
    initial_energy,
    solve_beta,
)
from .kinetics import (
    IntegratorSettings,
    KineticOperator,
    StepUnderflowError,
    Trajectory,
    integrate,
    rhs_quadratic,
    stationarity_scale,
)
from .model import (
    ConstantProduct,
    CouplingModel,
    Explicit,
    ExponentialDecay,
    InitialCondition,
    ModeLadder,
    PopulationState,
    QuadraticCoupling,
    SingleMode,
    Tabular,
)
from .stability import kappa

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_INTEGRATION_ERROR = 3

# occupations below this are written to CSV as exact 0
CSV_UNDERFLOW = 1e-300
# modes with occupation below this are excluded from beta fits
FIT_FLOOR = 1e-40


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    ladder: ModeLadder
    coupling: CouplingModel
    initial: InitialCondition
    tau_end: float
    record_every: float
    settings: IntegratorSettings
    method: str = "exact-sum"
    sweep_k_ini: Optional[list] = None
    raw: dict = field(default_factory=dict)


def _reject_unknown(d: dict, allowed: set, where: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")


def _parse_coupling(d: dict) -> CouplingModel:
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError("coupling must be an object with a 'type' field")
    t = d["type"]
    if t == "exponential_decay":
        _reject_unknown(d, {"type", "gamma0", "gamma"}, "coupling")
        return ExponentialDecay(gamma0=float(d["gamma0"]), gamma=float(d["gamma"]))
    if t == "constant_product":
        _reject_unknown(d, {"type", "c"}, "coupling")
        return ConstantProduct(c=float(d["c"]))
    if t == "tabular":
        _reject_unknown(d, {"type", "a2", "b2"}, "coupling")
        return Tabular(a2=np.array(d["a2"], dtype=float), b2=np.array(d["b2"], dtype=float))
    raise ConfigError(f"unknown coupling type {t!r}")


def _parse_initial(d: dict) -> InitialCondition:
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError("initial must be an object with a 'type' field")
    t = d["type"]
    if t == "single_mode":
        _reject_unknown(d, {"type", "k_ini", "occupancy"}, "initial")
        return SingleMode(k_ini=int(d["k_ini"]), occupancy=float(d.get("occupancy", 1.0)))
    if t == "explicit":
        _reject_unknown(d, {"type", "n"}, "initial")
        return Explicit(n=np.array(d["n"], dtype=float))
    raise ConfigError(f"unknown initial condition type {t!r}")


def parse_config(raw: dict) -> RunConfig:
    allowed = {
        "n_modes",
        "delta_omega",
        "coupling",
        "initial",
        "tau_end",
        "record_every",
        "integrator",
        "method",
        "sweep",
    }
    _reject_unknown(raw, allowed, "config")
    try:
        ladder = ModeLadder(int(raw["n_modes"]), float(raw.get("delta_omega", 1.0)))
        coupling = _parse_coupling(raw["coupling"])
        initial = _parse_initial(raw["initial"])
        tau_end = float(raw.get("tau_end", 150.0))
        record_every = float(raw.get("record_every", 1.0))
        integ = dict(raw.get("integrator", {}))
        _reject_unknown(
            integ, {"rel_tol", "abs_tol", "max_step", "min_step"}, "integrator"
        )
        settings = IntegratorSettings(record_every=record_every, **{
            k: float(v) for k, v in integ.items()
        })
        method = raw.get("method", "exact-sum")
        if method not in ("exact-sum", "integral-approx"):
            raise ConfigError(f"unknown method {method!r}")
        sweep = raw.get("sweep")
        sweep_k_ini = None
        if sweep is not None:
            _reject_unknown(dict(sweep), {"k_ini"}, "sweep")
            sweep_k_ini = [int(k) for k in sweep["k_ini"]]
            if not sweep_k_ini:
                raise ConfigError("sweep.k_ini must be non-empty")
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        ladder=ladder,
        coupling=coupling,
        initial=initial,
        tau_end=tau_end,
        record_every=record_every,
        settings=settings,
        method=method,
        sweep_k_ini=sweep_k_ini,
        raw=raw,
    )


def load_config(path: Path) -> RunConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(raw)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def fit_beta(state: PopulationState) -> tuple:
    """Least-squares slope of ln(n_k^-1 + 1) vs k over modes with n >= FIT_FLOOR.

    Returns (beta_fitted, r_squared)."""
    n = state.n
    k = np.arange(1, n.shape[0] + 1, dtype=float)
    mask = n >= FIT_FLOOR
    if mask.sum() < 2:
        raise ValueError("too few occupied modes to fit a temperature")
    y = np.log(1.0 / n[mask] + 1.0)
    x = k[mask]
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def _derived(config: RunConfig) -> dict:
    u_ini = initial_energy(config.initial, config.ladder)
    sol = solve_beta(u_ini, config.ladder)
    d = {
        "u_ini": u_ini,
        "beta_exact": sol.beta,
        "beta_approx": beta_approx(config.initial.k_ini)
        if isinstance(config.initial, SingleMode)
        else None,
    }
    return d


def _manifest(config: RunConfig, derived: dict, started: float, extra: dict) -> dict:
    m = {
        "artifact_version": __version__,
        "config": config.raw,
        "wall_clock_seconds": time.monotonic() - started,
    }
    m.update(derived)
    m.update(extra)
    return m


def _write_manifest(out_dir: Path, manifest: dict) -> None:
    with open(out_dir / "manifest.json", "w", newline="") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_trajectory(path: Path, traj: Trajectory) -> None:
    rows = []
    n_modes = traj.states.shape[1]
    for i in range(traj.n_times):
        tau = traj.taus[i]
        for m in range(n_modes):
            occ = traj.states[i, m]
            rows.append((_fmt(tau), m + 1, _fmt(occ) if occ >= CSV_UNDERFLOW else "0"))
    _write_csv(path, ["tau", "mode", "occupation"], rows)


def run_simulate(config: RunConfig, out_dir: Path) -> dict:
    started = time.monotonic()
    out_dir.mkdir(parents=True, exist_ok=True)
    derived = _derived(config)
    traj = integrate(
        config.initial, config.coupling, config.ladder, config.tau_end, config.settings
    )
    _write_trajectory(out_dir / "trajectory.csv", traj)
    u0 = traj.energies[0]
    drift = float(np.max(np.abs(traj.energies - u0)) / u0) if u0 > 0 else 0.0
    manifest = _manifest(
        config,
        derived,
        started,
        {"energy_drift_max_rel": drift, "n_records": traj.n_times},
    )
    _write_manifest(out_dir, manifest)
    return manifest


def run_equilibrium(config: RunConfig, out_dir: Path) -> dict:
    started = time.monotonic()
    out_dir.mkdir(parents=True, exist_ok=True)
    derived = _derived(config)
    if config.method == "integral-approx":
        if not isinstance(config.initial, SingleMode):
            raise ConfigError("integral-approx method needs a single_mode initial state")
        beta = beta_approx(config.initial.k_ini)
    else:
        beta = derived["beta_exact"]
    pops = bose_einstein(beta, config.ladder)
    rows = []
    for m, occ in enumerate(pops.n, start=1):
        inv = np.exp(beta * m)  # n_B^-1 + 1 = e^{beta k} exactly
        rows.append((m, _fmt(occ) if occ >= CSV_UNDERFLOW else "0", _fmt(inv)))
    _write_csv(out_dir / "equilibrium.csv", ["mode", "n_B", "inv_n_plus_1"], rows)
    manifest = _manifest(config, derived, started, {"method": config.method, "beta_used": beta})
    _write_manifest(out_dir, manifest)
    return manifest


def run_stability(config: RunConfig, out_dir: Path) -> dict:
    started = time.monotonic()
    out_dir.mkdir(parents=True, exist_ok=True)
    derived = _derived(config)
    spec = kappa(derived["beta_exact"], config.coupling, config.ladder)
    rows = [(m + 1, _fmt(v)) for m, v in enumerate(spec.kappa)]
    _write_csv(out_dir / "kappa.csv", ["mode", "kappa"], rows)
    manifest = _manifest(config, derived, started, {})
    _write_manifest(out_dir, manifest)
    return manifest


def run_sweep(config: RunConfig, out_dir: Path) -> int:
    if not config.sweep_k_ini:
        raise ConfigError("sweep requires a 'sweep': {'k_ini': [...]} config entry")
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    failures = 0
    for k_ini in config.sweep_k_ini:
        sub_raw = {k: v for k, v in config.raw.items() if k != "sweep"}
        sub_raw["initial"] = {"type": "single_mode", "k_ini": k_ini, "occupancy": 1.0}
        sub = parse_config(sub_raw)
        run_dir = out_dir / f"k_ini_{k_ini}"
        try:
            run_simulate(sub, run_dir)
            traj_state = _final_state_from_csv(run_dir / "trajectory.csv", sub.ladder)
            b_exact = solve_beta(initial_energy(sub.initial, sub.ladder), sub.ladder).beta
            b_approx = beta_approx(k_ini)
            b_fit, _ = fit_beta(traj_state)
            rel_err = abs(b_fit - b_exact) / b_exact
            rows.append(
                (k_ini, _fmt(b_exact), _fmt(b_approx), _fmt(b_fit), _fmt(rel_err))
            )
        except (StepUnderflowError, ValueError) as exc:
            failures += 1
            rows.append((k_ini, "failed", "failed", "failed", str(exc)))
    _write_csv(
        out_dir / "summary.csv",
        ["k_ini", "beta_exact", "beta_approx", "beta_fitted", "rel_err_fit"],
        rows,
    )
    return EXIT_OK if failures == 0 else EXIT_INTEGRATION_ERROR


def _final_state_from_csv(path: Path, ladder: ModeLadder) -> PopulationState:
    taus = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            taus.setdefault(float(row["tau"]), {})[int(row["mode"])] = float(
                row["occupation"]
            )
    last = taus[max(taus)]
    n = np.array([last[m] for m in range(1, ladder.n_modes + 1)])
    return PopulationState(n)


def _is_zero_coupling(model: CouplingModel) -> bool:
    if isinstance(model, ExponentialDecay):
        return model.gamma0 == 0.0
    if isinstance(model, ConstantProduct):
        return model.c == 0.0
    if isinstance(model, Tabular):
        return bool(np.all(model.a2 == 0) or np.all(model.b2 == 0))
    return False


def run_verify(config: RunConfig, stream=None) -> int:
    """Invariant suite: stationarity, energy conservation, identities,
    Jacobian diagonal vs kappa, quadratic null.  Exit 0 iff all pass."""
    if stream is None:
        stream = sys.stdout
    ladder = config.ladder
    model = config.coupling
    checks = []

    derived = _derived(config)
    beta = derived["beta_exact"]
    n_b = bose_einstein(beta, ladder)
    op = KineticOperator(model, ladder)

    scale = stationarity_scale(n_b, model, ladder)
    resid = float(np.max(np.abs(op.rhs(n_b.n))))
    if scale > 0:
        checks.append(("stationarity of n_B", resid <= 1e-12 * scale, f"residual {resid:.3g}"))
    else:
        checks.append(("stationarity of n_B", resid == 0.0, "zero coupling"))

    try:
        traj = integrate(
            config.initial, model, ladder, min(config.tau_end, 10.0), config.settings
        )
        u0 = traj.energies[0]
        drift = float(np.max(np.abs(traj.energies - u0)) / u0) if u0 > 0 else 0.0
        checks.append(
            (
                "energy conservation",
                drift <= 10.0 * config.settings.rel_tol,
                f"max relative drift {drift:.3g}",
            )
        )
    except StepUnderflowError as exc:
        checks.append(("energy conservation", False, str(exc)))

    worst = 0.0
    for b in (0.1, 0.5, 1.0, 5.0):
        for j in (2, 7, 30, min(100, ladder.n_modes)):
            if j > ladder.n_modes:
                continue
            for k in (1, j // 2 or 1, j - 1):
                r1, r2 = check_be_identities(b, j, max(1, min(k, j - 1)))
                worst = max(worst, r1, r2)
    checks.append(("Bose-Einstein identities", worst <= 1e-12, f"max residual {worst:.3g}"))

    jd = op.jacobian_diag(n_b.n)
    kap = kappa(beta, model, ladder).kappa
    if _is_zero_coupling(model):
        checks.append(("kappa vs Jacobian diagonal", bool(np.all(kap == 0)), "zero coupling"))
        checks.append(("kappa positivity", True, "skipped (zero coupling)"))
    else:
        denom = np.maximum(np.abs(kap), 1e-300)
        rel = float(np.max(np.abs(jd + kap) / denom))
        checks.append(("kappa vs Jacobian diagonal", rel <= 1e-10, f"max rel diff {rel:.3g}"))
        checks.append(("kappa positivity", bool(np.all(kap > 0)), f"min {kap.min():.3g}"))

    rng = np.random.default_rng(2026)
    nq = min(ladder.n_modes, 50)
    qladder = ModeLadder(nq, ladder.delta_omega)
    qstate = PopulationState(rng.uniform(0.0, 2.0, nq))
    qcoup = QuadraticCoupling(rng.normal(size=(nq, nq)))
    qrhs = rhs_quadratic(qstate, qcoup, qladder)
    checks.append(("quadratic-coupling null", bool(np.all(qrhs == 0.0)), "exact zeros"))

    width = max(len(name) for name, _, _ in checks)
    all_ok = True
    for name, ok, note in checks:
        status = "PASS" if ok else "FAIL"
        all_ok &= ok
        print(f"{name:<{width}}  {status}  {note}", file=stream)
    return EXIT_OK if all_ok else EXIT_VERIFY_FAILED


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="threewave",
        description="Kinetic simulation of three-wave-mixing thermalization "
        "in a multimode cavity",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("simulate", "equilibrium", "stability", "verify", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, type=Path)
        p.add_argument("--out", type=Path, default=Path("."))
        p.add_argument("--tau-end", type=float, default=None)
        p.add_argument("--record-every", type=float, default=None)
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config)
        overrides = {}
        if args.tau_end is not None:
            overrides["tau_end"] = args.tau_end
        if args.record_every is not None:
            overrides["record_every"] = args.record_every
        if overrides:
            raw = dict(config.raw)
            raw.update(overrides)
            config = parse_config(raw)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        if args.command == "simulate":
            run_simulate(config, args.out)
        elif args.command == "equilibrium":
            run_equilibrium(config, args.out)
        elif args.command == "stability":
            run_stability(config, args.out)
        elif args.command == "verify":
            return run_verify(config)
        elif args.command == "sweep":
            return run_sweep(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    except (StepUnderflowError, FloatingPointError) as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
