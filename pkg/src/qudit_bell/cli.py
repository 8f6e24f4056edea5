"""``bell`` command-line interface.

Exit status: 0 on success, 2 for an invalid configuration, 3 when a
computation is refused (enumeration cap, singular formula).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import (
    PAIR_KEYS,
    PAIRS,
    CANONICAL_SETTINGS,
    SETTINGS_PRESETS,
    ComputationRefused,
    Kernel,
    evaluate_kernel,
    kernel_to_json,
    load_settings,
    random_product_behavior,
)
from .correlators import (
    Verdict,
    cd_family,
    cglmp_family,
    closed_form_correlator,
    condition_check,
    family_from_json,
    family_sum,
    family_values,
    general_family,
    two_level_family,
)
from .kernels import (
    KERNEL_LABELING,
    CANONICAL_SLK_PARAMS,
    KERNEL_NAMES,
    SLK_PRESETS,
    SlkParams,
    build_kernel,
    cd_quantum_closed_form,
    cglmp_coefficient,
    cglmp_k_max,
    noise_threshold,
    slk_coefficients,
    slk_lhv_formula,
)
from .lhv import default_workers, lhv_fast, lhv_oracle, noise_crossover, noise_tolerance_scan, violation_report
from .quantum import noisy_behavior, oracle_behavior, qubit_pure_vs_mixed_demo
from .tightness import tightness_report, transformed_generators

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_REFUSED = 0, 2, 3

COMMANDS = (
    "quantum-value",
    "lhv-bound",
    "violation",
    "noise-scan",
    "noise-threshold",
    "tightness",
    "correlators",
    "kernel-export",
    "demo-qubit",
)


class ConfigError(ValueError):
    pass


def _d_range(text: str) -> list[int]:
    """``"5"``, an inclusive range ``"2:100"``, or a comma list of either (``"2:10,500"``)."""
    values = []
    try:
        for part in text.split(","):
            if ":" in part:
                lo, hi = (int(x) for x in part.split(":"))
                values.extend(range(lo, hi + 1))
            else:
                values.append(int(part))
    except ValueError:
        raise argparse.ArgumentTypeError(f"--d must be an integer or LO:HI range, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"--d range {text!r} is empty")
    if min(values) < 2:
        raise argparse.ArgumentTypeError(f"--d must be at least 2, got {text!r}")
    return values


def _existing_path(text: str) -> str:
    if text in SETTINGS_PRESETS or text in SLK_PRESETS:
        return text
    if not Path(text).is_file():
        raise argparse.ArgumentTypeError(f"file not found: {text}")
    return text


def _probability(text: str) -> float:
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--p-noise must be a number, got {text!r}") from None
    if not 0.0 <= p <= 1.0:
        raise argparse.ArgumentTypeError(f"--p-noise must lie in [0, 1], got {p}")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "table"), default="json", dest="output_format")
    common.add_argument("--settings", type=_existing_path, help="settings JSON file or preset name (canonical)")
    common.add_argument("--slk-params", type=_existing_path, help="SLK parameter JSON file or preset name")
    common.add_argument("--k-max", type=int)
    common.add_argument("--workers", type=int, default=None, help="enumeration threads (default: CPU count)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    def kernel_arg(p):
        p.add_argument("--kernel", choices=KERNEL_NAMES, default="cd")

    parser = argparse.ArgumentParser(prog="bell", description="Bipartite qudit Bell-inequality analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("quantum-value", parents=[common], help="kernel value on the Bell state")
    kernel_arg(p)
    p.add_argument("--d", type=_d_range, required=True)

    p = sub.add_parser("lhv-bound", parents=[common], help="local maximum/minimum by enumeration")
    kernel_arg(p)
    p.add_argument("--d", type=_d_range, required=True)
    p.add_argument("--engine", choices=("fast", "oracle", "both"), default="fast")
    p.add_argument("--random-kernels", type=int, default=0, help="also cross-check engines on N random kernels per d")

    p = sub.add_parser("violation", parents=[common], help="quantum value against the local bound")
    kernel_arg(p)
    p.add_argument("--d", type=_d_range, required=True)
    p.add_argument("--p-noise", type=_probability, default=0.0)

    p = sub.add_parser("noise-scan", parents=[common], help="kernel value over a white-noise grid")
    kernel_arg(p)
    p.add_argument("--d", type=_d_range, required=True)
    p.add_argument("--steps", type=int, default=101)

    p = sub.add_parser("noise-threshold", parents=[common], help="critical noise fraction for C_d")
    p.add_argument("--d", type=_d_range, required=True)
    p.add_argument("--summary", action="store_true", help="one record: endpoints and monotonicity of the sweep")

    p = sub.add_parser("tightness", parents=[common], help="facet test of C_d <= 2")
    p.add_argument("--d", type=_d_range, required=True)

    p = sub.add_parser("correlators", parents=[common], help="correlator family report")
    p.add_argument("--d", type=_d_range, required=True)
    p.add_argument("--family", choices=("cd", "cglmp", "general", "survey"), default="cd")
    p.add_argument("--family-file", type=_existing_path, help="family descriptor JSON")
    p.add_argument("--pair", choices=("11", "12", "21", "22"), default="12")
    p.add_argument("--k", type=int, default=0)
    p.add_argument("--alpha", type=int, default=0)
    p.add_argument("--beta", type=int, default=1)
    p.add_argument("--sigma", type=int, choices=(-1, 1), default=1)
    p.add_argument("--behavior", choices=("quantum", "random-product"), default="quantum")
    p.add_argument("--trials", type=int, default=1000, help="random product behaviors for --family survey")
    p.add_argument("--labeling", choices=("auto", "sum", "difference"), default="auto")
    p.add_argument("--p-noise", type=_probability, default=0.0)

    p = sub.add_parser("kernel-export", parents=[common], help="write a kernel as JSON")
    kernel_arg(p)
    p.add_argument("--d", type=_d_range, required=True)
    p.add_argument("--output", help="output file (default: stdout)")

    p = sub.add_parser("demo-qubit", parents=[common], help="two-qubit pure vs dephased example")
    p.add_argument("--xi", type=float, default=math.pi / 4)
    p.add_argument("--trials", type=int, default=0, help="random product behaviors for the C0*C1 <= 0 check")
    return parser


# ---------------------------------------------------------------------------
# helpers


def _settings(args):
    if not args.settings:
        return CANONICAL_SETTINGS
    try:
        return load_settings(args.settings)
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"--settings: {exc}") from None


def _slk_params(args) -> SlkParams | None:
    if not args.slk_params:
        return None
    if args.slk_params in SLK_PRESETS:
        return SLK_PRESETS[args.slk_params]
    try:
        with open(args.slk_params) as fh:
            return SlkParams.from_json(json.load(fh))
    except (ValueError, json.JSONDecodeError) as exc:
        raise ConfigError(f"--slk-params: {exc}") from None


def _single_d(args) -> int:
    if len(args.d) != 1:
        raise ConfigError(f"--d: {args.command} takes a single dimension")
    return args.d[0]


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else float(x)
    return x


def _fmt(x) -> str:
    if isinstance(x, bool) or x is None:
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.7g}"
    if isinstance(x, (list, tuple)):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def _emit(records: list[dict], fmt: str, out) -> None:
    records = [_jsonable(r) for r in records]
    if fmt == "json":
        payload = records[0] if len(records) == 1 else records
        out.write(json.dumps(payload, indent=2) + "\n")
    elif fmt == "table":
        for n, rec in enumerate(records):
            if n:
                out.write("\n")
            width = max(len(k) for k in rec)
            for key, value in rec.items():
                out.write(f"{key:<{width}}  {_fmt(value)}\n")
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["d", "quantity", "value"])
        for rec in records:
            for key, value in rec.items():
                if key == "d":
                    continue
                writer.writerow([rec.get("d", ""), key, _fmt(value) if isinstance(value, (list, tuple, bool)) else value])
        out.write(buf.getvalue())


def _quantum_closed_form(name: str, d: int, k_max: int | None):
    if name == "cd":
        return cd_quantum_closed_form(d)
    if name == "slk":
        return float(d - 1)
    preset = "full" if name == "cglmp-paper-range" else "conventional"
    k_max = cglmp_k_max(d, preset) if k_max is None else k_max
    return sum(float(cglmp_coefficient(d, k)) * 4 * d * closed_form_correlator(d, k) for k in range(k_max + 1))


# ---------------------------------------------------------------------------
# commands

# lhv_fast allocates O(d**3) arrays; past this the SLK bound is only reported as a formula
SLK_ENUMERATION_MAX_D = 60


def _slk_extras(d: int, kernel, behavior, params) -> dict:
    per_pair = [float(evaluate_kernel(_restrict(kernel, pair), behavior)) for pair in PAIRS]
    params = params or CANONICAL_SLK_PARAMS
    coefficient_sum = max(abs(math.fsum(slk_coefficients(d, params, pair))) for pair in PAIRS)
    formula = slk_lhv_formula(d)
    out = {
        "pair_contributions": per_pair,
        "coefficient_sum_max_abs": coefficient_sum,
        "lhv_formula": formula,
        "lhv_formula_per_outcome": formula / (d - 1),
    }
    if d <= SLK_ENUMERATION_MAX_D:
        lhv_max = float(lhv_fast(kernel).max_value)
        out["lhv_max"] = lhv_max
        out["lhv_formula_gap"] = lhv_max - formula
    return out


def _restrict(kernel: Kernel, pair) -> Kernel:
    coeffs = np.zeros_like(kernel.coeffs)
    i, j = pair
    coeffs[i - 1, j - 1] = kernel.coeffs[i - 1, j - 1]
    return Kernel(kernel.d, coeffs)


def cmd_quantum_value(args, out):
    settings = _settings(args)
    params = _slk_params(args)
    records = []
    for d in args.d:
        kernel = build_kernel(args.kernel, d, k_max=args.k_max, slk_params=params)
        behavior = oracle_behavior(d, settings, KERNEL_LABELING[args.kernel])
        rec = {"kernel": args.kernel, "d": d, "quantum": float(evaluate_kernel(kernel, behavior))}
        if settings == CANONICAL_SETTINGS and not args.slk_params:
            rec["closed_form"] = _quantum_closed_form(args.kernel, d, args.k_max)
        if args.kernel == "slk":
            rec.update(_slk_extras(d, kernel, behavior, params))
        records.append(rec)
    _emit(records, args.output_format, out)


def _lhv_record(res, engine: str) -> dict:
    return {
        "engine": engine,
        "lhv_max": res.max_value,
        "lhv_argmax": list(res.argmax.key()),
        "lhv_min": res.min_value,
        "lhv_argmin": list(res.argmin.key()),
    }


def _same(r1, r2) -> bool:
    return (r1.max_value, r1.argmax, r1.min_value, r1.argmin) == (r2.max_value, r2.argmax, r2.min_value, r2.argmin)


def cmd_lhv_bound(args, out):
    workers = args.workers or default_workers()
    if args.random_kernels and args.engine != "both":
        raise ConfigError("--random-kernels needs --engine both")
    rng = np.random.default_rng(args.seed)
    records = []
    for d in args.d:
        kernel = build_kernel(args.kernel, d, k_max=args.k_max, slk_params=_slk_params(args))
        rec = {"kernel": args.kernel, "d": d}
        if args.engine == "fast":
            rec.update(_lhv_record(lhv_fast(kernel), "fast"))
        else:
            oracle = lhv_oracle(kernel, workers=workers)
            rec.update(_lhv_record(oracle, args.engine))
            if args.engine == "both":
                rec["engines_agree"] = _same(oracle, lhv_fast(kernel))
        rec["strategy_count"] = d**4
        if args.random_kernels:
            agree = 0
            for _ in range(args.random_kernels):
                k = Kernel(d, rng.standard_normal((2, 2, d, d)))
                agree += _same(lhv_oracle(k, workers=workers), lhv_fast(k))
            rec["random_kernels"] = args.random_kernels
            rec["random_kernels_agree"] = agree
        if args.kernel == "slk":
            rec["lhv_formula"] = slk_lhv_formula(d)
            rec["lhv_formula_gap"] = float(rec["lhv_max"]) - rec["lhv_formula"]
        records.append(rec)
    _emit(records, args.output_format, out)


def cmd_violation(args, out):
    records = [
        violation_report(
            args.kernel, d, p_noise=args.p_noise, settings=_settings(args), k_max=args.k_max, slk_params=_slk_params(args)
        ).to_json()
        for d in args.d
    ]
    _emit(records, args.output_format, out)


def cmd_noise_scan(args, out):
    if args.steps < 2:
        raise ConfigError(f"--steps must be at least 2, got {args.steps}")
    scans = []
    for d in args.d:
        rows = noise_tolerance_scan(
            args.kernel, d, args.steps, settings=_settings(args), k_max=args.k_max, slk_params=_slk_params(args)
        )
        scans.append((d, rows, noise_crossover(rows)))
    if args.output_format == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["d", "p_noise", "value", "violated"])
        for d, rows, _ in scans:
            for p, value, violated in rows:
                writer.writerow([d, p, value, str(violated).lower()])
        return
    if args.output_format == "table":
        for d, rows, bracket in scans:
            out.write(f"d = {d}\n{'p_noise':>10}  {'value':>12}  violated\n")
            for p, value, violated in rows:
                out.write(f"{p:>10.7g}  {value:>12.7g}  {str(violated).lower()}\n")
            out.write(f"crossover: {_fmt(list(bracket) if bracket else None)}\n")
        return
    payloads = []
    for d, rows, bracket in scans:
        payload = {
            "kernel": args.kernel,
            "d": d,
            "rows": [{"p_noise": p, "value": v, "violated": viol} for p, v, viol in rows],
            "crossover": list(bracket) if bracket else None,
        }
        if args.kernel == "cd":
            payload["threshold"] = noise_threshold(d)
            payload["threshold_bracketed"] = bool(bracket) and bracket[0] <= payload["threshold"] <= bracket[1]
        payloads.append(payload)
    _emit(payloads, "json", out)


def cmd_noise_threshold(args, out):
    records = [{"d": d, "quantum": cd_quantum_closed_form(d), "threshold": noise_threshold(d)} for d in args.d]
    if args.summary:
        values = [r["quantum"] for r in records]
        records = [
            {
                "d_first": records[0]["d"],
                "d_last": records[-1]["d"],
                "quantum_first": values[0],
                "quantum_last": values[-1],
                "threshold_last": records[-1]["threshold"],
                "strictly_increasing": all(b > a for a, b in zip(values, values[1:])),
            }
        ]
    _emit(records, args.output_format, out)


def cmd_tightness(args, out):
    records = []
    for d in args.d:
        rec = tightness_report(d).to_json()
        try:
            labels = transformed_generators(d)
            rec["bijection"] = sorted(labels) == [(v, n) for v in range(d) for n in range(4)]
        except RuntimeError as exc:
            log.warning("d=%d: %s", d, exc)
            rec["bijection"] = False
        records.append(rec)
    _emit(records, args.output_format, out)


def _load_family(args, d: int, pair):
    if args.family_file:
        with open(args.family_file) as fh:
            try:
                fam = family_from_json(json.load(fh))
            except (ValueError, json.JSONDecodeError) as exc:
                raise ConfigError(f"--family-file: {exc}") from None
        if fam.d != d:
            raise ConfigError(f"--family-file: descriptor has d={fam.d} but --d is {d}")
        return fam
    if args.family == "cd":
        return cd_family(d, pair)
    if args.family == "cglmp":
        if not 0 <= args.k <= d // 2:
            raise ConfigError(f"--k must lie in [0, {d // 2}], got {args.k}")
        return cglmp_family(d, pair, args.k)
    return general_family(d, pair, args.alpha, args.beta, sigma=args.sigma)


def _survey(d: int, trials: int, rng, p_noise: float, settings) -> dict:
    """Positivity of the C_d families, CGLMP families against closed forms, product exclusion."""
    sum_behavior = noisy_behavior(d, settings, p_noise, "sum")
    diff_behavior = noisy_behavior(d, settings, p_noise, "difference")
    cd = {PAIR_KEYS[pair]: family_values(sum_behavior, cd_family(d, pair)) for pair in PAIRS}
    deviation = 0.0
    for k in range(d // 2 + 1):
        expected = closed_form_correlator(d, k)
        for pair in PAIRS:
            for v in family_values(diff_behavior, cglmp_family(d, pair, k)):
                deviation = max(deviation, abs(v - expected))
    families = [cd_family(d, pair) for pair in PAIRS]
    families += [cglmp_family(d, pair, k) for pair in PAIRS for k in range(d // 2 + 1)]
    definite = 0
    for _ in range(trials):
        b = random_product_behavior(d, rng)
        definite += sum(
            condition_check(family_values(b, fam)).classification is not Verdict.INDEFINITE for fam in families
        )
    return {
        "d": d,
        "cd_classification": {key: condition_check(v).classification.value for key, v in cd.items()},
        "cd_min_value": min(min(v) for v in cd.values()),
        "cglmp_closed_form_max_deviation": deviation,
        "product_trials": trials,
        "product_families": len(families),
        "product_definite_count": definite,
    }


def cmd_correlators(args, out):
    pair = (int(args.pair[0]), int(args.pair[1]))
    rng = np.random.default_rng(args.seed)
    records = []
    for d in args.d:
        if args.family == "survey" and not args.family_file:
            records.append(_survey(d, args.trials, rng, args.p_noise, _settings(args)))
            continue
        fam = _load_family(args, d, pair)
        labeling = fam.labeling if args.labeling == "auto" else args.labeling
        if args.behavior == "quantum":
            behavior = noisy_behavior(d, _settings(args), args.p_noise, labeling)
        else:
            behavior = random_product_behavior(d, rng)
        values = family_values(behavior, fam)
        rec = {
            "d": d,
            "family": fam.to_json(),
            "behavior": args.behavior,
            "labeling": labeling if args.behavior == "quantum" else None,
            "values": values,
            "sum": family_sum(behavior, fam),
            "classification": condition_check(values).classification.value,
        }
        if args.output_format == "csv":
            rec = {"d": d, "sum": rec["sum"], "classification": rec["classification"]} | {
                f"C_{m}": v for m, v in enumerate(values)
            }
        records.append(rec)
    _emit(records, args.output_format, out)


def cmd_kernel_export(args, out):
    d = _single_d(args)
    kernel = build_kernel(args.kernel, d, k_max=args.k_max, slk_params=_slk_params(args))
    text = json.dumps(kernel_to_json(kernel), indent=2) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.write(text)


def cmd_demo_qubit(args, out):
    if not 0.0 <= args.xi <= math.pi / 2:
        raise ConfigError(f"--xi must lie in [0, pi/2], got {args.xi}")
    pure, mixed = qubit_pure_vs_mixed_demo(args.xi)
    rec = {"xi": args.xi, "c_pure": pure, "c_mixed": mixed, "c_pure_expected": 1 + math.sin(2 * args.xi)}
    if args.trials:
        rng = np.random.default_rng(args.seed)
        worst = -math.inf
        for _ in range(args.trials):
            b = random_product_behavior(2, rng)
            for pair in PAIRS:
                c0, c1 = family_values(b, two_level_family(pair))
                worst = max(worst, c0 * c1)
        rec["product_trials"] = args.trials
        rec["product_max_c0_c1"] = worst
    _emit([rec], args.output_format, out)


HANDLERS = {
    "quantum-value": cmd_quantum_value,
    "lhv-bound": cmd_lhv_bound,
    "violation": cmd_violation,
    "noise-scan": cmd_noise_scan,
    "noise-threshold": cmd_noise_threshold,
    "tightness": cmd_tightness,
    "correlators": cmd_correlators,
    "kernel-export": cmd_kernel_export,
    "demo-qubit": cmd_demo_qubit,
}


def run(argv: list[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        HANDLERS[args.command](args, out)
    except ComputationRefused as exc:
        print(f"bell: refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except ValueError as exc:
        print(f"bell: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())
