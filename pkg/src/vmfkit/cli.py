"""Command-line interface.

Subcommands: ``sample``, ``fit``, ``fit-mix``, ``cluster``, ``bessel``,
and ``experiment table1|mixture-synth``. Every stochastic command takes a
seed (flag, or the ``VMFKIT_SEED`` environment variable as the default)
and produces identical output files when rerun with identical settings.

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O
error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .bessel import bessel_ratio, log_bessel_i
from .cluster import adjusted_rand_index, assign, kmeans, normalized_mutual_information
from .errors import NumericalError
from .estimators import SgdConfig, fit_batch, fit_sgd
from .experiments import ExperimentSpec, report_header, run_mixture_synth, run_table1
from .io import (
    load_json,
    load_labels,
    load_matrix,
    model_from_dict,
    model_to_dict,
    save_json,
    save_labels,
    save_matrix,
)
from .mixture import EmConfig, MixtureParams, fit_em, fit_mix_sgd, permutation_matched_error
from .sampler import SamplerConfig, sample_vmf
from .vmf import VmfParams, normalize

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

SEED_ENV_VAR = "VMFKIT_SEED"


def _default_seed() -> int:
    return int(os.environ.get(SEED_ENV_VAR, "0"))


def _add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--seed",
        type=int,
        default=_default_seed(),
        help=f"RNG seed (default: ${SEED_ENV_VAR} or 0)",
    )


def _add_sgd_flags(
    parser: argparse.ArgumentParser,
    lr: float,
    batch_size: int,
    lr_decay: float = 0.95,
    epochs: int = 100,
) -> None:
    parser.add_argument("--lr", type=float, default=lr)
    parser.add_argument("--lr-decay", type=float, default=lr_decay)
    parser.add_argument("--batch-size", type=int, default=batch_size)
    parser.add_argument("--epochs", type=int, default=epochs)
    parser.add_argument("--optimizer", choices=["adam", "sgd"], default="adam")
    parser.add_argument("--kappa-floor", type=float, default=1e-6)
    parser.add_argument("--kappa-ceiling", type=float, default=1e6)


def _sgd_config(args: argparse.Namespace) -> SgdConfig:
    return SgdConfig(
        lr=args.lr,
        lr_decay_per_epoch=args.lr_decay,
        batch_size=args.batch_size,
        epochs=args.epochs,
        optimizer=args.optimizer,
        kappa_floor=args.kappa_floor,
        kappa_ceiling=args.kappa_ceiling,
        seed=args.seed,
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vmfkit",
        description="von Mises-Fisher modelling on the unit hypersphere",
    )
    parser.add_argument("--version", action="version", version=f"vmfkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw vMF samples into a CSV file")
    p.add_argument("--dim", type=int, help="dimension (required with --mu-e1)")
    p.add_argument("--kappa", type=float, required=True)
    mu = p.add_mutually_exclusive_group(required=True)
    mu.add_argument("--mu-file", type=Path, help="CSV file holding the unit mean direction")
    mu.add_argument("--mu-e1", action="store_true", help="use the first canonical axis")
    p.add_argument("--n", type=int, required=True)
    _add_seed(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--header", action="store_true", help="write a header row")

    p = sub.add_parser("fit", help="fit a single vMF density")
    p.add_argument("--method", choices=["batch", "sgd"], required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--truth", type=Path, help="model JSON with the true parameters")
    _add_sgd_flags(p, lr=0.01, batch_size=128)
    _add_seed(p)
    p.add_argument("--out", type=Path, required=True, help="fitted model JSON")
    p.add_argument("--report", type=Path, required=True, help="fit report JSON")

    p = sub.add_parser("fit-mix", help="fit a vMF mixture")
    p.add_argument("--method", choices=["em", "sgd"], required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--truth", type=Path, help="mixture model JSON to score against")
    p.add_argument("--max-iters", type=int, default=100, help="EM iteration cap")
    p.add_argument("--tol", type=float, default=1e-5, help="EM relative improvement tolerance")
    _add_sgd_flags(p, lr=0.1, batch_size=64)
    _add_seed(p)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--report", type=Path, required=True)

    p = sub.add_parser("cluster", help="cluster unit-norm embeddings and score against labels")
    p.add_argument("--data", type=Path, required=True, help="CSV of unit-norm rows")
    p.add_argument("--labels", type=Path, required=True, help="reference labels, one int per line")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--method", choices=["em", "sgd", "kmeans"], required=True)
    _add_sgd_flags(p, lr=0.02, batch_size=256, lr_decay=0.92, epochs=80)
    p.add_argument("--em-max-iters", type=int, default=100)
    _add_seed(p)
    p.add_argument("--report", type=Path, required=True, help="metrics JSON")
    p.add_argument("--out-labels", type=Path, help="optionally write predicted labels")

    p = sub.add_parser("bessel", help="print log I_s(x) or the ratio I_{s+1}/I_s")
    p.add_argument("--order", type=float, required=True)
    p.add_argument("--arg", type=float, required=True)
    p.add_argument("--ratio", action="store_true", help="print the ratio instead of the log value")

    p = sub.add_parser("experiment", help="run a canned synthetic experiment")
    p.add_argument("kind", choices=["table1", "mixture-synth"])
    p.add_argument("--dims", default="5,20,100", help="comma-separated dimensions (table1)")
    p.add_argument("--kappas", default="50,500", help="comma-separated concentrations (table1)")
    p.add_argument("--n", type=int, default=None, help="samples per run (table1: 10000, mixture-synth: 1000)")
    p.add_argument("--seeds", default="0,1,2,3,4", help="comma-separated seeds")
    p.add_argument("--order", type=int, default=3, help="mixture order (mixture-synth)")
    p.add_argument("--out-dir", type=Path, required=True)

    return parser


def _load_vmf_truth(path: Path) -> VmfParams:
    model = model_from_dict(load_json(path))
    if not isinstance(model, VmfParams):
        raise ValueError(f"{path}: expected a single-density model document")
    return model


def _load_mixture_truth(path: Path) -> MixtureParams:
    model = model_from_dict(load_json(path))
    if not isinstance(model, MixtureParams):
        raise ValueError(f"{path}: expected a mixture model document")
    return model


def _cmd_sample(args: argparse.Namespace) -> int:
    if args.mu_e1:
        if args.dim is None:
            raise ValueError("--mu-e1 requires --dim")
        if args.dim < 2:
            raise ValueError("--dim must be at least 2")
        mu = np.zeros(args.dim)
        mu[0] = 1.0
    else:
        mu = load_matrix(args.mu_file).ravel()
        if args.dim is not None and args.dim != mu.size:
            raise ValueError(f"--dim {args.dim} does not match the {mu.size}-vector in --mu-file")
    params = VmfParams(mu=mu, kappa=args.kappa)
    data = sample_vmf(params, args.n, SamplerConfig(seed=args.seed))
    save_matrix(args.out, data, header=args.header)
    return EXIT_OK


def _cmd_fit(args: argparse.Namespace) -> int:
    data = load_matrix(args.data)
    truth = _load_vmf_truth(args.truth) if args.truth else None
    if args.method == "batch":
        report = fit_batch(data, truth=truth)
    else:
        report = fit_sgd(data, _sgd_config(args), truth=truth)
    save_json(args.out, model_to_dict(report.params))
    save_json(
        args.report,
        {
            "header": report_header({"command": "fit", "method": args.method}, (args.seed,)),
            "method": args.method,
            "ll_trace": list(report.ll_trace),
            "e_mu": report.e_mu,
            "e_kappa": report.e_kappa,
        },
    )
    return EXIT_OK


def _cmd_fit_mix(args: argparse.Namespace) -> int:
    data = load_matrix(args.data)
    truth = _load_mixture_truth(args.truth) if args.truth else None
    if args.method == "em":
        params, trace = fit_em(
            data,
            args.order,
            EmConfig(max_iters=args.max_iters, rel_ll_tol=args.tol, seed=args.seed),
        )
    else:
        params, trace = fit_mix_sgd(data, args.order, _sgd_config(args))
    doc = {
        "header": report_header(
            {"command": "fit-mix", "method": args.method, "order": args.order}, (args.seed,)
        ),
        "method": args.method,
        "order": args.order,
        "ll_trace": list(trace),
        "errors": None,
    }
    if truth is not None and truth.order == params.order:
        match = permutation_matched_error(params, truth)
        doc["errors"] = {
            "alpha_l1": match.alpha_l1,
            "mu_l1": match.mu_l1,
            "kappa_l1": match.kappa_l1,
            "perm": list(match.perm),
        }
    save_json(args.out, model_to_dict(params))
    save_json(args.report, doc)
    return EXIT_OK


def _cmd_cluster(args: argparse.Namespace) -> int:
    data = load_matrix(args.data)
    labels = load_labels(args.labels)
    if labels.size != data.shape[0]:
        raise ValueError(
            f"{labels.size} labels for {data.shape[0]} rows; the files do not match"
        )
    if args.method == "kmeans":
        predicted = kmeans(data, args.k, seed=args.seed)
    elif args.method == "em":
        params, _ = fit_em(data, args.k, EmConfig(max_iters=args.em_max_iters, seed=args.seed))
        predicted = assign(params, data)
    else:
        args.batch_size = min(args.batch_size, data.shape[0])
        params, _ = fit_mix_sgd(data, args.k, _sgd_config(args))
        predicted = assign(params, data)
    metrics = {
        "header": report_header(
            {"command": "cluster", "method": args.method, "k": args.k}, (args.seed,)
        ),
        "method": args.method,
        "k": args.k,
        "ari": adjusted_rand_index(labels, predicted),
        "nmi": normalized_mutual_information(labels, predicted),
        "nmi_normalization": "arithmetic",
    }
    save_json(args.report, metrics)
    if args.out_labels:
        save_labels(args.out_labels, predicted)
    return EXIT_OK


def _cmd_bessel(args: argparse.Namespace) -> int:
    if args.ratio:
        print(repr(bessel_ratio(args.order, args.arg)))
    else:
        print(repr(log_bessel_i(args.order, args.arg)))
    return EXIT_OK


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def _parse_float_list(text: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in text.split(",") if tok.strip())


def _cmd_experiment(args: argparse.Namespace) -> int:
    if args.kind == "table1":
        spec = ExperimentSpec(
            kind="table1",
            dims=_parse_int_list(args.dims),
            kappas=_parse_float_list(args.kappas),
            n=args.n if args.n is not None else 10_000,
            seeds=_parse_int_list(args.seeds),
            output_dir=args.out_dir,
        )
        run_table1(spec)
    else:
        spec = ExperimentSpec(
            kind="mixture-synth",
            dims=(5,),
            kappas=(100.0, 50.0, 100.0),
            n=args.n if args.n is not None else 1_000,
            seeds=_parse_int_list(args.seeds),
            output_dir=args.out_dir,
        )
        run_mixture_synth(spec, order=args.order)
    return EXIT_OK


_COMMANDS = {
    "sample": _cmd_sample,
    "fit": _cmd_fit,
    "fit-mix": _cmd_fit_mix,
    "cluster": _cmd_cluster,
    "bessel": _cmd_bessel,
    "experiment": _cmd_experiment,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
