"""Scenario runner: reproduce the estimation-bound tables from the shell.

Usage examples::

    qfi --scenario squeezed --r 1 --phi 0.3 --N 10 --trials 100000 --seed 7
    qfi --scenario phase --d 64 --fock-state 5
    qfi --scenario clock --K 16 --M 256
    qfi --scenario squeezed --sweep theta --sweep-start -0.8 --sweep-stop 0.8 \
        --sweep-points 101

Each run writes an estimation report (JSON or CSV) plus a closed-form
sidecar JSON, prints a one-line summary, and exits 0 iff every in-scenario
bound audit passes (1: audit failure, 2: invalid configuration).  The
default output directory comes from ``QFI_OUTPUT_DIR`` (falling back to the
working directory).
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .estimate import (
    CSV_COLUMNS,
    EstimationReport,
    bound_audit,
    deviation_moment,
    trial_seed,
)
from .metric import qfi_unitary
from .povm import classical_fisher, optimality_test, validate_povm
from .scenarios import (
    SqueezedParams,
    binomial_state,
    chirped_state,
    fock_phase_scenario,
    gamma,
    number_state,
    optimal_sector_frame,
    ring_spectrum,
    squeezed_covariance,
    squeezed_nsr,
    squeezed_optimal,
    squeezed_mc_scenario,
    two_sector_time_povm,
)

SCENARIOS = ("squeezed", "phase", "clock")
SWEEP_VARIABLES = {
    "squeezed": ("theta", "r", "phi", "N", "X"),
    "phase": ("N", "X"),
    "clock": ("N", "X"),
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="qfi",
        description="Run a quantum parameter-estimation scenario and audit its bounds.",
    )
    p.add_argument("--version", action="version", version=f"qfi {__version__}")
    p.add_argument("--scenario", required=True, help="one of: " + ", ".join(SCENARIOS))
    p.add_argument("--r", type=float, default=1.0, help="squeeze parameter (squeezed)")
    p.add_argument("--phi", type=float, default=0.0, help="squeeze angle (squeezed)")
    p.add_argument("--d", type=int, default=64, help="Fock truncation (phase)")
    p.add_argument("--K", type=int, default=16, help="ring levels (clock)")
    p.add_argument("--M", type=int, default=None, help="outcome grid size")
    p.add_argument("--X", type=float, default=0.0, help="true parameter value")
    p.add_argument("--N", type=int, default=10, help="measurements per trial")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--estimator", choices=("sample_mean", "mle"), default=None,
                   help="default: sample_mean (phase), mle (clock)")
    p.add_argument("--fock-state", type=int, default=None,
                   help="use the number state |n> as the phase probe")
    p.add_argument("--binomial-modes", type=int, default=None,
                   help="binomial probe width (phase; default d/2)")
    p.add_argument("--chirp", type=float, default=0.0,
                   help="quadratic-phase chirp rate applied to the probe")
    p.add_argument("--clock-state", choices=("symmetric", "asymmetric"),
                   default="symmetric")
    p.add_argument("--output", type=str, default=None, help="report file path")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--sweep", type=str, default=None,
                   help="sweep variable: theta, r, phi, N or X")
    p.add_argument("--sweep-start", type=float, default=None)
    p.add_argument("--sweep-stop", type=float, default=None)
    p.add_argument("--sweep-points", type=int, default=None)
    p.add_argument("--sweep-values", type=str, default=None,
                   help="comma-separated sweep values (alternative to start/stop)")
    return p


class ConfigError(ValueError):
    pass


def _output_dir():
    return Path(os.environ.get("QFI_OUTPUT_DIR", "."))


def _gaussian_report(sigma2, var_p, x, n, trials, seed, extras):
    """Monte-Carlo sample-mean run on an exact Gaussian outcome law."""
    rng = np.random.default_rng(seed)
    samples = x + math.sqrt(sigma2) * rng.standard_normal((trials, n))
    mse = float(np.mean((samples.mean(axis=1) - x) ** 2))
    return EstimationReport(
        scenario="squeezed",
        estimator="sample_mean",
        trials=trials,
        n=n,
        mse=mse,
        slope=1.0,
        fisher=1.0 / sigma2,
        qfi=4.0 * var_p,
        seed=int(seed),
        generator_variance=var_p,
        extras=extras,
    )


def _run_squeezed(args, seed=None, n=None, x=None, theta=None):
    params = SqueezedParams(args.r, args.phi)
    seed = args.seed if seed is None else seed
    n = args.N if n is None else n
    x = args.X if x is None else x
    if theta is None:
        report = squeezed_mc_scenario(params, x=x, n=n, trials=args.trials, seed=seed)
    else:
        nsr = squeezed_nsr(params, theta)
        var_x, var_p, cov = squeezed_covariance(params)
        opt = squeezed_optimal(params)
        g = gamma(params).value
        report = _gaussian_report(
            nsr, var_p, x, n, args.trials, seed,
            extras={
                "r": params.r, "phi": params.phi, "theta": theta, "nsr": nsr,
                "gamma_re": g.real, "gamma_im": g.imag,
                "tan_theta": opt.tan_theta, "var_xhat": opt.var_xhat,
                "var_x": var_x, "var_p": var_p, "cov_xp": cov,
            },
        )
    sidecar = {k: report.extras[k] for k in sorted(report.extras)}
    return report, sidecar


def _phase_probe(args):
    d = args.d
    if args.fock_state is not None:
        probe = number_state(d, args.fock_state)
    else:
        modes = args.binomial_modes if args.binomial_modes is not None else d // 2
        probe = binomial_state(d, modes)
    if args.chirp:
        probe = chirped_state(probe, args.chirp)
    return probe


def _run_phase(args, seed=None, n=None, x=None):
    probe = _phase_probe(args)
    grid = args.M
    scenario = fock_phase_scenario(args.d, probe.amplitudes, grid_size=grid)
    report = deviation_moment(
        scenario.povm,
        scenario.family,
        x=args.X if x is None else x,
        n=args.N if n is None else n,
        trials=args.trials,
        estimator=args.estimator or "sample_mean",
        seed=args.seed if seed is None else seed,
        scenario="phase",
    )
    opt = optimality_test(scenario.povm, probe, tol=1e-8)
    report.extras.update(
        mean_n=-opt.generator_mean,
        optimality_residual=opt.phase_residual,
        symmetry_residual=opt.symmetry_residual,
    )
    sidecar = {
        "d": args.d,
        "grid_size": scenario.povm.grid_size,
        "fisher": report.fisher,
        "qfi": report.qfi,
        "var_n": report.generator_variance,
        "optimality_passed": bool(opt.passed),
        "optimality_residual": opt.phase_residual,
        "symmetry_residual": opt.symmetry_residual,
        "diverged": report.diverged,
    }
    return report, sidecar


def _clock_fiducial(spectrum, kind, seed):
    """Probe states for the ring clock.

    symmetric: populations on the mirror-closed energy set {4, 36, 49, 81}
    (both pair sums 85, mean 42.5; energy differences are coprime, so the
    elapsed time is identifiable over the whole period) with random sector
    splits; asymmetric: same support with tilted populations, which no
    measurement frame can fix.
    """
    rng = np.random.default_rng(seed)
    k = spectrum.n_pairs
    idx = [1, 5, 6, 8]  # ring levels n = 2, 6, 7, 9 -> energies 4, 36, 49, 81
    if kind == "symmetric":
        weights = {1: 0.3, 5: 0.2, 6: 0.2, 8: 0.3}
    else:
        weights = {1: 0.45, 5: 0.15, 6: 0.25, 8: 0.15}
    amp = np.zeros((k, 2), dtype=complex)
    for i in idx:
        split = rng.uniform(0.2, 0.8)
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, size=2))
        amp[i, 0] = math.sqrt(weights[i] * split) * phases[0]
        amp[i, 1] = math.sqrt(weights[i] * (1 - split)) * phases[1]
    from .hilbert import PureState

    return PureState(amp.reshape(-1))


def _run_clock(args, seed=None, n=None, x=None):
    if args.K < 8:
        raise ConfigError("clock scenario needs --K >= 8")
    spectrum = ring_spectrum(args.K)
    seed = args.seed if seed is None else seed
    probe = _clock_fiducial(spectrum, args.clock_state, seed)
    framed = optimal_sector_frame(spectrum, probe)
    grid = args.M if args.M is not None else 16 * args.K
    povm = two_sector_time_povm(framed, grid)
    family = framed.family(probe)
    # the likelihood oscillates at the probe's largest energy difference;
    # the coarse MLE grid must resolve it
    pop = np.sum(np.abs(probe.amplitudes.reshape(-1, 2)) ** 2, axis=1)
    live = spectrum.energies[pop > 1e-12]
    coarse = max(64, int(4 * (live.max() - live.min())))
    report = deviation_moment(
        povm,
        family,
        x=args.X if x is None else x,
        n=args.N if n is None else n,
        trials=args.trials,
        estimator=args.estimator or "mle",
        seed=seed,
        scenario="clock",
        coarse_points=coarse,
    )
    completeness = povm.completeness_residual()
    displacement = povm.displacement_residual()
    report.extras.update(
        completeness_residual=completeness,
        displacement_residual=displacement,
    )
    sidecar = {
        "K": args.K,
        "grid_size": grid,
        "completeness_residual": completeness,
        "displacement_residual": displacement,
        "fisher": report.fisher,
        "qfi": report.qfi,
        "fisher_over_qfi": report.fisher / report.qfi if report.qfi else math.nan,
        "clock_state": args.clock_state,
    }
    return report, sidecar


def _run_one(args, seed=None, n=None, x=None, theta=None):
    if args.scenario == "squeezed":
        return _run_squeezed(args, seed=seed, n=n, x=x, theta=theta)
    if args.scenario == "phase":
        if theta is not None:
            raise ConfigError("theta sweeps apply to the squeezed scenario only")
        return _run_phase(args, seed=seed, n=n, x=x)
    if args.scenario == "clock":
        if theta is not None:
            raise ConfigError("theta sweeps apply to the squeezed scenario only")
        return _run_clock(args, seed=seed, n=n, x=x)
    raise ConfigError(f"unknown scenario {args.scenario!r}")


def _sweep_values(args):
    if args.sweep_values:
        try:
            values = [float(v) for v in args.sweep_values.split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --sweep-values: {exc}") from exc
    elif args.sweep_start is not None and args.sweep_stop is not None:
        points = args.sweep_points if args.sweep_points else 11
        values = np.linspace(args.sweep_start, args.sweep_stop, points).tolist()
    else:
        raise ConfigError("sweep needs --sweep-values or --sweep-start/--sweep-stop")
    if not values:
        raise ConfigError("sweep range is empty")
    return values


def _run_sweep(args, out_path):
    var = args.sweep
    allowed = SWEEP_VARIABLES.get(args.scenario, ())
    if var not in allowed:
        raise ConfigError(
            f"sweep variable {var!r} not supported for {args.scenario} "
            f"(allowed: {', '.join(allowed)})"
        )
    values = _sweep_values(args)
    rows = []
    header = None
    all_pass = True
    for i, value in enumerate(values):
        seed = trial_seed(args.seed, i)
        kwargs = {"seed": seed}
        if var == "theta":
            kwargs["theta"] = value
        elif var == "r":
            args.r = value
        elif var == "phi":
            args.phi = value
        elif var == "N":
            kwargs["n"] = max(1, int(round(value)))
        elif var == "X":
            kwargs["x"] = value
        report, _ = _run_one(args, **kwargs)
        report.extras.setdefault("sweep_value", value)
        verdict = bound_audit(report)
        all_pass = all_pass and verdict.passed
        if header is None:
            header = report.csv_header()
        rows.append(report.to_csv_row())
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    print(f"sweep {args.scenario}/{var}: {len(rows)} rows -> {out_path}")
    return 0 if all_pass else 1


def _summary_line(report, verdict):
    n_mse = report.mse * report.n
    status = "DIVERGED" if report.diverged else ("PASS" if verdict.passed else "FAIL")
    return (
        f"scenario={report.scenario} N={report.n} trials={report.trials} "
        f"N*mse={n_mse:.6g} fisher={report.fisher:.6g} qfi={report.qfi:.6g} "
        f"ratio_classical={report.bound_ratio_classical:.4f} "
        f"ratio_quantum={report.bound_ratio_quantum:.4f} {status}"
    )


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return int(exc.code) if exc.code else 0

    try:
        if args.scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario {args.scenario!r}; expected one of "
                + ", ".join(SCENARIOS)
            )
        if args.trials < 100:
            raise ConfigError("--trials must be at least 100")
        out_dir = _output_dir()
        out_dir.mkdir(parents=True, exist_ok=True)

        if args.sweep:
            out_path = (
                Path(args.output)
                if args.output
                else out_dir / f"{args.scenario}_sweep_{args.sweep}.csv"
            )
            return _run_sweep(args, out_path)

        report, sidecar = _run_one(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    verdict = bound_audit(report)
    suffix = "json" if args.format == "json" else "csv"
    out_path = (
        Path(args.output) if args.output else out_dir / f"{args.scenario}_report.{suffix}"
    )
    with open(out_path, "w") as fh:
        fh.write(report.to_json() if args.format == "json" else report.to_csv())
    sidecar_path = out_path.with_name(f"{args.scenario}_closed_forms.json")
    with open(sidecar_path, "w") as fh:
        json.dump({"schema": 1, **sidecar}, fh, indent=2, default=float)

    print(_summary_line(report, verdict))
    if not verdict.passed:
        for failed in verdict.failures():
            print(f"bound audit failed: {failed}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
