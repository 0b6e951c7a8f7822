"""Command line entry point: ``mesocorr <subcommand> [options]``.

Exit status: 0 on success, 2 on invalid input, 3 when a capacity ceiling or a
table's coverage is exceeded.
"""

from __future__ import annotations

import argparse
import sys

from mesocorr.errors import CapacityError, CoverageError, ValidationError
from mesocorr.harness import ExperimentConfig, config_from_mapping, parse_config_file, run_experiment
from mesocorr.limits import KINDS

_SUBCOMMANDS = {
    "cue-clt": "cue_clt",
    "zeta-model": "zeta_model",
    "counting": "counting_corr",
    "lemmas": "lemma_sweep",
    "tree": "tree_check",
    "bd-process": "bd_process",
    "ingest-zeros": "ingest_zeros",
}


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pairs(text: str) -> list:
    out = []
    for item in text.split(","):
        try:
            a, b = item.split(":")
            out.append((float(a), float(b)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected pairs like 0:1,1:2, got {text!r}") from None
    return out


def _words(text: str) -> list:
    return [w.strip() for w in text.split(",") if w.strip()]


def _common(p: argparse.ArgumentParser, replicas: bool = True):
    p.add_argument("--config", help="flat key = value file; flags override its values")
    p.add_argument("--seed", type=int, help="64-bit seed (default 0)")
    if replicas:
        p.add_argument("--replicas", type=int, help="Monte Carlo replicas (default 1000)")
    p.add_argument("--out", dest="output_path", help="report path ('-' for stdout, default)")
    p.add_argument("--format", choices=("csv", "json"), help="report format (default csv)")
    p.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")


def _shift_args(p: argparse.ArgumentParser):
    p.add_argument("--gaps", type=_floats, help="gap exponents c_{k,k+1}, comma separated")
    p.add_argument("--eps-exponent", dest="eps_exponent", type=float,
                   help="eps = scale^-e; 'inf' puts the points on the circle (default)")
    p.add_argument("--gap-unit", dest="gap_unit", type=float,
                   help="multiplier of every gap (a gap exponent 0 gives a constant gap of this size)")
    p.add_argument("--regime", choices=("macro", "micro", "auto"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mesocorr",
        description="Mesoscopic correlation experiments for CUE characteristic polynomials and zeta.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cue-clt", help="covariance of normalized log Z at shifted points")
    _common(p)
    p.add_argument("--n", dest="n_or_t", type=int, help="matrix dimension")
    _shift_args(p)
    p.add_argument("--method", choices=("szego", "haar"))

    p = sub.add_parser("zeta-model", help="Dirichlet-polynomial model of log zeta")
    _common(p)
    p.add_argument("--t", dest="n_or_t", type=float, help="height t")
    p.add_argument("--x", type=float, help="prime cutoff (default t)")
    _shift_args(p)
    p.add_argument("--method", choices=("auto", "direct", "nufft"))
    p.add_argument("--prime-cache", dest="prime_cache", help="directory for cached prime tables")

    p = sub.add_parser("counting", help="correlations of counting fluctuations in mesoscopic windows")
    _common(p)
    p.add_argument("--n", dest="n_or_t", type=int, help="CUE dimension")
    p.add_argument("--zeros", help="zero table instead of CUE (plain text or .gz)")
    p.add_argument("--base-height", dest="base_height", type=float)
    p.add_argument("--delta", type=float, help="window scale exponent in [0, 1)")
    p.add_argument("--pairs", type=_pairs, help="windows alpha:beta, comma separated")
    p.add_argument("--method", choices=("auto", "eig", "szego"))

    p = sub.add_parser("lemmas", help="convergence of the four normalized sums")
    _common(p, replicas=False)
    p.add_argument("--kinds", type=_words, help=f"subset of {','.join(KINDS)}")
    p.add_argument("--c", dest="cs", type=_floats, help="exponents c")
    p.add_argument("--sizes", type=_floats, help="increasing n or x values")

    p = sub.add_parser("tree", help="tree Gaussian vector against the min-rule covariance")
    _common(p)
    p.add_argument("--levels", type=_floats)

    p = sub.add_parser("bd-process", help="B_d + D_{1-d} process against its covariance")
    _common(p)
    p.add_argument("--grid", type=_floats)

    p = sub.add_parser("ingest-zeros", help="validate a zero table and summarize it")
    _common(p, replicas=False)
    p.add_argument("zeros", help="table path (plain text or .gz)")
    p.add_argument("--base-height", dest="base_height", type=float)
    return parser


_NOT_PARAMS = {"command", "config"}


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    experiment = _SUBCOMMANDS[args.command]
    given = {k: v for k, v in vars(args).items() if k not in _NOT_PARAMS and v is not None}
    if args.config:
        values = parse_config_file(args.config)
        if values.setdefault("experiment", experiment) != experiment:
            raise ValidationError(f"config is for {values['experiment']}, not {experiment}")
        return config_from_mapping({**values, **given})
    return config_from_mapping({"experiment": experiment, **given})


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run_experiment(config_from_args(args))
    except (CapacityError, CoverageError) as exc:
        print(f"mesocorr: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, OSError) as exc:
        print(f"mesocorr: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
