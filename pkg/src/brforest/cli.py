"""Command-line entry point: ``brforest <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import characteristics, harness, preprocess, sampling, stats, synthetic
from .errors import DomainError

EXIT_DOMAIN = 2


def _split_cols(value: str | None) -> list[str]:
    return [c.strip() for c in value.split(",") if c.strip()] if value else []


def _load_dataset(args):
    hints = {c: "categorical" for c in _split_cols(args.categorical)}
    hints.update({c: "numeric" for c in _split_cols(args.numeric)})
    raw = preprocess.load_csv(args.input, args.target, hints)
    data, plog = preprocess.preprocess(raw)
    logging.getLogger("brforest").info("preprocessed %s: %s", args.input, plog)
    return data


def _read_numbers(path) -> np.ndarray:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc}") from exc
    try:
        return np.array([float(t) for t in text.replace(",", " ").split()])
    except ValueError as exc:
        raise DomainError(f"{path}: {exc}") from exc


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_expected_distinct(args):
    spec = sampling.BootstrapSpec(args.n, args.rate)
    exact = sampling.expected_distinct(args.n, args.rate)
    out = {
        "n": args.n,
        "rate": args.rate,
        "sample_size": spec.sample_size,
        "expected_distinct": exact,
        "expected_fraction": exact / args.n,
        "limit_fraction": sampling.expected_distinct_limit(args.rate),
    }
    print(json.dumps(out))


def cmd_synth_regions(args):
    data, truth = synthetic.gen_regions(args.sigma, args.seed, draw=args.draw)
    data.to_csv(args.out)
    if args.truth:
        _write(args.truth, json.dumps({"levels": truth.levels.tolist()}) + "\n")


def cmd_synth_noise(args):
    spec = synthetic.NoiseSpec(sigma=args.sigma, n=args.n, x_range=(args.x_min, args.x_max),
                               mu=args.mu)
    synthetic.gen_pure_noise(spec, args.seed, draw=args.draw).to_csv(args.out)


def cmd_characterize(args):
    data = _load_dataset(args)
    report = characteristics.characterize(data, seed=args.seed, threads=args.threads)
    _write(args.out, json.dumps(report.to_dict(), indent=2) + "\n")


def cmd_stats(args):
    a = _read_numbers(args.a)
    b = _read_numbers(args.b) if args.b else None
    if b is None:
        raise DomainError("--b is required")
    if args.test == "t":
        res = stats.paired_t_one_sided(a, b, alternative=args.alternative or "less")
        out = vars(res)
    elif args.test == "mwu":
        res = stats.mann_whitney_u(a, b, alternative=args.alternative or "two-sided")
        out = vars(res)
    elif args.test == "cohend":
        out = {"statistic": stats.cohens_d(a, b)}
    else:
        res = stats.spearman(a, b)
        out = vars(res) if res is not None else {"statistic": None, "p_value": None}
    print(json.dumps(out))


def cmd_sweep(args):
    data = _load_dataset(args)
    plan = harness.SweepPlan.from_json(args.plan) if args.plan else harness.SweepPlan()
    result = harness.run_sweep(data, plan, threads=args.threads, dataset_id=args.input)
    _write(args.out, result.to_json() + "\n")
    if args.csv:
        _write(args.csv, result.to_csv())
    best = harness.select_best(result)
    summary = {"best_config": best.config, "best_br": best.br, "mean_mse": best.mean_mse,
               "tie": best.tie}
    if {harness.br_group(b) for b in plan.br_values} == {"le_1", "gt_1"}:
        cmp = harness.compare_br_groups(result)
        summary.update(winner_group=cmp.winner_group, max_p_value=cmp.max_p_value)
    print(json.dumps(summary), file=sys.stderr)


def cmd_curve(args):
    with open(args.results, encoding="utf-8") as fh:
        result = harness.SweepResult.from_dict(json.load(fh))
    rows = harness.emit_br_curve(result, args.config)
    text = harness.curve_to_csv(rows) if args.format == "csv" else harness.curve_to_json(rows) + "\n"
    _write(args.out, text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="brforest", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("expected-distinct", help="expected distinct rows in a bootstrap sample")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--rate", type=float, required=True)
    s.set_defaults(func=cmd_expected_distinct)

    s = sub.add_parser("synth-regions", help="24-region piecewise-constant dataset")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--draw", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--truth", help="also write region levels as JSON")
    s.set_defaults(func=cmd_synth_regions)

    s = sub.add_parser("synth-noise", help="pure-noise dataset")
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--draw", type=int, default=0)
    s.add_argument("--x-min", type=float, default=0.0)
    s.add_argument("--x-max", type=float, default=5.0)
    s.add_argument("--mu", type=float, default=0.0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth_noise)

    for name, func, help_ in (
        ("characterize", cmd_characterize, "dataset characteristics report"),
        ("sweep", cmd_sweep, "config x bootstrap-rate cross-validation sweep"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--input", required=True)
        s.add_argument("--target", required=True)
        s.add_argument("--categorical", help="comma-separated columns forced categorical")
        s.add_argument("--numeric", help="comma-separated columns forced numeric")
        s.add_argument("--out", default="-")
        s.add_argument("--threads", type=int, default=1)
        s.set_defaults(func=func)
        if name == "characterize":
            s.add_argument("--seed", type=int, default=0)
        else:
            s.add_argument("--plan")
            s.add_argument("--csv")

    s = sub.add_parser("stats", help="two-sample statistics")
    s.add_argument("--test", choices=["t", "mwu", "cohend", "spearman"], required=True)
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--alternative", choices=["less", "greater", "two-sided"])
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("curve", help="BR curve of one config from a sweep result")
    s.add_argument("--results", required=True)
    s.add_argument("--config", required=True)
    s.add_argument("--format", choices=["csv", "json"], default="csv")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_curve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())
