"""Command-line entry point: ``specband <command> ...``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .covest import estimate_covariance
from .harness import McConfig, run_campaign
from .io import read_panel, write_json, write_panel
from .kernel import PriorHyperParams, build_signal_cov, concentration_matrix
from .mapest import MapProblem, decaying_ridge, map_refine
from .signal import PanelConfig, generate_panel, snr_to_noise_variance
from .subspace import estimate_centers


def _floats(text: str) -> list:
    return [float(v) for v in text.replace(",", " ").split()]


def _panel_config(raw: dict) -> PanelConfig:
    sigma2 = float(raw.get("amp_variance", 1.0))
    if "noise_variance" in raw:
        noise = float(raw["noise_variance"])
    elif "snr_db" in raw:
        noise = snr_to_noise_variance(float(raw["snr_db"]), sigma2)
    else:
        noise = 0.0
    centers = raw["centers"]
    W = raw.get("half_bandwidth", raw.get("w"))
    if W is None:
        raise ValueError("config needs 'half_bandwidth' (or 'w')")
    prior = PriorHyperParams(centers, float(W), sigma2, noise)
    return PanelConfig(prior, int(raw["N"]), int(raw["L"]), raw.get("amp_law", "gaussian"), int(raw.get("seed", 0)))


def cmd_signal_gen(args):
    cfg = _panel_config(json.loads(Path(args.config).read_text()))
    write_panel(generate_panel(cfg), args.out)


def cmd_covest(args):
    est = estimate_covariance(
        read_panel(args.panel), args.nu, search_max=args.search_max, estimator=args.estimator
    )
    write_json(est.to_dict(), args.out)


def cmd_estimate(args):
    res = estimate_centers(
        read_panel(args.panel), args.nu, rank=args.rank, method=args.method, search_max=args.search_max
    )
    write_json(res.to_dict(), args.out)


def cmd_map(args):
    schedule = decaying_ridge() if args.ridge else None
    prob = MapProblem.from_panel(
        read_panel(args.panel),
        _floats(args.theta0),
        args.w,
        ridge_schedule=schedule,
        tol=args.tol,
        max_iters=args.max_iters,
        reestimate_amplitudes=not args.freeze_amplitudes,
    )
    write_json(map_refine(prob).to_dict(), args.out)


def cmd_kernel_eig(args):
    prior = PriorHyperParams(_floats(args.centers), args.w, args.sigma2)
    if args.normalized:
        lam = concentration_matrix(prior.support(), args.n).eigen().values
    else:
        lam = build_signal_cov(prior, args.n).eigen().values
    out = open(args.out, "w", newline="") if args.out != "-" else sys.stdout
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["index", "eigenvalue"])
        for i, v in enumerate(lam, start=1):
            w.writerow([i, repr(float(v))])
    finally:
        if out is not sys.stdout:
            out.close()


def cmd_mc_run(args):
    cfg = McConfig.from_json(args.config)
    if args.trials is not None:
        cfg.trials = args.trials
    out = args.out or cfg.outputs or "mc_out"
    summary, _ = run_campaign(cfg, out)
    for p in summary["points"]:
        med = p["theta_rel_err"].get("median", np.nan)
        print(f"N={p['N']} L={p['L']} snr={p['snr_db']:g}dB  median center err={med:.4g}  failed={p['failed']}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="specband", description="Frequency estimation with uniform frequency priors")
    sub = ap.add_subparsers(dest="command", required=True)

    sig = sub.add_parser("signal", help="synthetic panels").add_subparsers(dest="action", required=True)
    p = sig.add_parser("gen", help="simulate a panel from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_signal_gen)

    p = sub.add_parser("covest", help="Toeplitz covariance, rank and bandwidth")
    p.add_argument("--panel", required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--search-max", type=int)
    p.add_argument("--estimator", choices=["toeplitz", "outer"], default="toeplitz")
    p.set_defaults(func=cmd_covest)

    p = sub.add_parser("estimate", help="subspace center estimate")
    p.add_argument("--panel", required=True)
    p.add_argument("--nu", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--rank", type=int)
    p.add_argument("--search-max", type=int)
    p.add_argument("--method", choices=["gap", "optimal", "kmeans"], default="gap")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("map", help="MAP refinement inside the prior box")
    p.add_argument("--panel", required=True)
    p.add_argument("--theta0", required=True, help="comma separated centers")
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--ridge", action="store_true", help="decaying ridge penalty")
    p.add_argument("--freeze-amplitudes", action="store_true")
    p.set_defaults(func=cmd_map)

    ker = sub.add_parser("kernel", help="kernel spectra").add_subparsers(dest="action", required=True)
    p = ker.add_parser("eig", help="eigenvalues of the modulated sinc covariance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--centers", required=True)
    p.add_argument("--w", type=float, required=True)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--normalized", action="store_true", help="concentration matrix of the support instead")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_kernel_eig)

    mc = sub.add_parser("mc", help="Monte-Carlo campaigns").add_subparsers(dest="action", required=True)
    p = mc.add_parser("run", help="run a campaign from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--trials", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_mc_run)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (ValueError, OSError, np.linalg.LinAlgError) as exc:
        print(f"specband: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
