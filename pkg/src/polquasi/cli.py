"""Command-line entry point ``polquasi``.

Exit status: 0 on success, 2 for invalid input, 3 for numerical failure.
Diagnostics go to stderr; tables go to stdout unless ``--out`` is given.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .errors import NumericalError, StageError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3
log = logging.getLogger("polquasi")


def _emit(text, out):
    if out:
        from .io import atomic_write

        atomic_write(out, text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def cmd_simulate(args):
    from .io import save_dataset
    from .simulate import SourceModel, simulate_dataset
    from .tomography import waveplate_grid

    src = SourceModel(args.source, visibility=args.visibility, shots_per_setting=args.shots)
    data = simulate_dataset(src, waveplate_grid(args.step), seed=args.seed)
    save_dataset(data, args.out)
    log.info("%d settings, %d shots each -> %s", len(data), args.shots, args.out)


def cmd_reconstruct(args):
    from .io import format_table, load_dataset, save_density
    from .pipeline import density_rows

    from .tomography import reconstruct_density

    recon = reconstruct_density(load_dataset(args.dataset), args.n_photons, psd_project=args.psd_project)
    for msg in recon.warnings:
        log.warning(msg)
    if args.out:
        save_density(recon.density, args.out)
        log.info("wrote %s", args.out)
    else:
        sys.stdout.write(format_table(["row", "col", "re", "im", "sigma"], density_rows(recon.density)))


def cmd_qpqc(args):
    from .io import format_table, load_density
    from .qpqc import decompose
    from .stats import monte_carlo_qpqc

    rho = load_density(args.density)
    dec = decompose(rho, method=args.method)
    sigma = [np.nan] * len(dec.solutions)
    if args.mc_samples > 0 and rho.sigma is not None and rho.n_photons == 2:
        mc = monte_carlo_qpqc(rho, dec, args.mc_samples, args.seed)
        sigma = mc.std
        if mc.incomplete:
            log.warning("%d of %d samples lacked a full stationary set", mc.incomplete, mc.n_samples)
    if dec.residual_norm > 1e-8:
        log.warning("decomposition residual %.3g; quasiprobabilities are a least-squares fit", dec.residual_norm)
    rows = [
        (s.label, *s.gamma, s.g, p, sg, "yes" if p < -args.sigma_z * sg else "no")
        for s, p, sg in zip(dec.solutions, dec.quasi_probs, sigma)
    ]
    header = ["state", "gamma_x", "gamma_y", "gamma_z", "g", "P", "sigma_P", "significant_negative"]
    _emit(format_table(header, rows), args.out)


def cmd_witness(args):
    from .io import format_table, load_density
    from .witness import witness_evaluate

    rho = load_density(args.density)
    ks = range(rho.n_photons + 1) if args.k is None else [args.k]
    rows = []
    for k in ks:
        w = witness_evaluate(rho, k=k, z=args.sigma_z)
        rows.append((w.test_operator, w.g_max, w.expectation, w.margin,
                     np.nan if w.sigma_margin is None else w.sigma_margin, w.verdict))
    _emit(format_table(["operator", "g_max", "expectation", "margin", "sigma_margin", "verdict"], rows), args.out)


def cmd_coherence_scan(args):
    from .coherence import coherence_scan
    from .io import format_table, load_density

    rho = load_density(args.density)
    n = int(round((args.stop - args.start) / args.step))
    thetas = args.start + args.step * np.arange(n + 1)
    rows = coherence_scan(rho, thetas, axis=args.axis, seed=args.seed)
    _emit(format_table(["theta_deg", "c_l2", "sigma"], rows), args.out)


def cmd_report(args):
    from .io import load_dataset
    from .pipeline import PipelineOptions, run_pipeline, write_report

    opts = PipelineOptions(
        n_photons=args.n_photons,
        psd_project=args.psd_project,
        mc_samples=args.mc_samples,
        sigma_z=args.sigma_z,
        seed=args.seed,
        workers=args.workers,
    )
    bundle = run_pipeline(load_dataset(args.dataset), opts)
    for path in write_report(bundle, args.outdir, figures=not args.no_figures):
        log.info("wrote %s", path)


def build_parser():
    parser = argparse.ArgumentParser(prog="polquasi", description="Polarization tomography and quasiprobabilities.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate coincidence counts on the waveplate grid")
    p.add_argument("--source", choices=("ideal_pair", "distinguishable_pair"), default="ideal_pair")
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--shots", type=int, default=100_000, help="shots per setting")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--step", type=float, default=15.0, help="grid step of the doubled waveplate angles")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="linear-inversion tomography")
    p.add_argument("dataset")
    p.add_argument("--n-photons", type=int, default=2)
    p.add_argument("--psd-project", action="store_true")
    p.add_argument("--out", help="density JSON (table on stdout otherwise)")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("qpqc", help="stationary states and quasiprobabilities")
    p.add_argument("density")
    p.add_argument("--method", choices=("exact", "numeric"), default="exact")
    p.add_argument("--mc-samples", type=int, default=30000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma-z", type=float, default=5.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_qpqc)

    p = sub.add_parser("witness", help="Dicke-state witnesses")
    p.add_argument("density")
    p.add_argument("--k", type=int, help="excitation number (all by default)")
    p.add_argument("--sigma-z", type=float, default=5.0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("coherence-scan", help="l2 coherence against the basis angle")
    p.add_argument("density")
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=180.0)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("--axis", choices=("linear", "x", "z"), default="linear")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_coherence_scan)

    p = sub.add_parser("report", help="full pipeline with tables, manifest and figures")
    p.add_argument("dataset")
    p.add_argument("--outdir", required=True)
    p.add_argument("--n-photons", type=int, default=2)
    p.add_argument("--psd-project", action="store_true")
    p.add_argument("--mc-samples", type=int, default=30000)
    p.add_argument("--sigma-z", type=float, default=5.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="polquasi: %(levelname)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
    try:
        args.func(args)
    except StageError as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL if isinstance(exc.cause, NumericalError) else EXIT_INVALID
    except NumericalError as exc:
        log.error("%s", exc)
        return EXIT_NUMERICAL
    except (ValidationError, ValueError, OSError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
