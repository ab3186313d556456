"""Command line front end.

Every subcommand prints one report, as JSON (a config echo plus a result
block) or as delimited CSV.  Numeric CSV cells carry 12 significant digits
next to a rounded 4-decimal column for quick reading.  Exit codes: 0 ok,
2 bad arguments, 3 a size guard refused the computation, 4 a state file was
rejected, 5 the filesystem failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import analysis, ccp, linalg, quantum
from .errors import BudgetExceededError, StateFormatError
from .rng import SEED_ENV_VAR, resolve_seed
from .scenario import (MAX_STRATEGY_BITS, BellScenario,
                       brute_force_classical_bound)


def read_state_file(path: str) -> np.ndarray:
    """Load a JSON state file and return a validated density matrix.

    Expected shape: {"n_parties": N, "matrix": [[[re, im], ...], ...]} where
    matrix is a 2**N by 2**N grid and every entry is a two-element [re, im]
    pair.  Malformed or unphysical content raises StateFormatError; missing
    files surface as plain OSError.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw = fh.read()
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict) or "n_parties" not in doc or "matrix" not in doc:
        raise StateFormatError(
            f"{path}: expected an object with 'n_parties' and 'matrix'")
    n = doc["n_parties"]
    if not isinstance(n, int) or n < 1:
        raise StateFormatError(f"{path}: n_parties must be a positive integer")
    try:
        pairs = np.array(doc["matrix"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise StateFormatError(f"{path}: matrix is not numeric ({exc})") from exc
    dim = 2**n
    if pairs.shape != (dim, dim, 2):
        raise StateFormatError(
            f"{path}: matrix must be {dim}x{dim} [re, im] pairs for "
            f"n_parties={n}, got shape {pairs.shape}")
    value = pairs[..., 0] + 1j * pairs[..., 1]
    try:
        return quantum.validate_density(quantum.density_matrix(value))
    except BudgetExceededError:
        raise
    except ValueError as exc:
        raise StateFormatError(f"{path}: {exc}") from exc


def _resolve_state(args) -> np.ndarray:
    if args.family == "ghz":
        return quantum.density_matrix(quantum.ghz_state(args.n))
    if args.family == "gen-ghz":
        return quantum.density_matrix(
            quantum.generalized_ghz_state(args.n, args.alpha))
    if args.family == "dur":
        return quantum.dur_state(args.n, args.phase)
    rho = read_state_file(args.state_file)
    n = int(rho.shape[0]).bit_length() - 1
    if n != args.n:
        raise StateFormatError(
            f"{args.state_file}: file describes {n} parties, --n is {args.n}")
    return rho


def _parse_blocks(text: str, n_parties: int):
    # "0,1|2|3" puts parties 0 and 1 in one block and the rest alone
    blocks = []
    for chunk in text.split("|"):
        try:
            block = tuple(int(p) for p in chunk.split(",") if p.strip() != "")
        except ValueError:
            raise ValueError(f"bad block list {text!r}")
        if block:
            blocks.append(block)
    listed = sorted(p for b in blocks for p in b)
    if listed != list(range(n_parties)):
        raise ValueError(
            f"blocks {text!r} must cover every party 0..{n_parties - 1} once")
    return blocks


def cmd_bound(args):
    sc = BellScenario(args.n, args.m)
    config = {"command": "bound", "n": args.n, "m": args.m}
    in_budget = args.m * (args.n - 1) <= MAX_STRATEGY_BITS
    brute = brute_force_classical_bound(sc) if in_budget else None
    result = {
        "classical_bound": sc.classical_bound,
        "brute_force_bound": brute,
        "bound_difference": (None if brute is None
                             else sc.classical_bound - brute),
        "brute_force_in_budget": in_budget,
        "quantum_bound": sc.quantum_bound,
        "violation_factor": sc.violation_factor,
    }
    return config, result


def cmd_operator_check(args):
    sc = BellScenario(args.n, args.m)
    config = {"command": "operator-check", "n": args.n, "m": args.m}
    built = quantum.bell_operator_sum(sc)
    direct = quantum.bell_operator_closed(sc)
    dim = built.shape[0]
    peak = sc.quantum_bound
    target = sc.n_settings ** (2 * sc.n_parties) / 2.0
    herm_dev = float(np.abs(built - built.conj().T).max())
    corner_dev = float(np.abs(built - direct).max())
    eigs = linalg.hermitian_eigenvalues(built)
    expected = np.concatenate([[-peak], np.zeros(dim - 2), [peak]])
    spectrum_dev = float(np.abs(eigs - expected).max())
    trace_closed = float(linalg.trace_product(direct, direct).real)
    result = {
        "dimension": dim,
        "peak_value": peak,
        "trace_target": target,
        "trace_sum_sum": float(linalg.trace_product(built, built).real),
        "trace_sum_closed": float(linalg.trace_product(built, direct).real),
        "trace_closed_closed": trace_closed,
        "hermiticity_deviation": herm_dev,
        "elementwise_deviation": corner_dev,
        "spectrum_deviation": spectrum_dev,
        "trace_square_deviation": float(abs(trace_closed - target)),
    }
    if dim <= 32:
        jac = linalg.jacobi_eigenvalues(built)
        result["solver_cross_deviation"] = float(np.abs(jac - eigs).max())
    checks = [v for k, v in result.items() if k.endswith("deviation")]
    result["ok"] = bool(max(checks) <= 1e-9 * max(1.0, peak))
    return config, result


def cmd_violation(args):
    sc = BellScenario(args.n, args.m)
    seed = resolve_seed(args.seed)
    rho = _resolve_state(args)
    config = {"command": "violation", "n": args.n, "m": args.m,
              "family": args.family, "alpha": args.alpha, "phase": args.phase,
              "state_file": args.state_file, "twirl": args.twirl,
              "restarts": args.restarts, "seed": seed}
    if args.twirl:
        value = quantum.best_phase_value(sc, rho)
        bound = sc.classical_bound
        factor = value / bound
        violated = bool(factor > 1.0)
        result = {
            "value": value,
            "classical_bound": bound,
            "violation_factor": factor,
            "violated": violated,
            "max_is_heuristic": not violated,
            "method": "twirled-corner",
        }
        return config, result
    report = analysis.violates(sc, rho, restarts=args.restarts, seed=seed)
    result = {
        "value": report.value,
        "classical_bound": report.classical_bound,
        "violation_factor": report.factor,
        "violated": report.violated,
        "max_is_heuristic": report.max_is_heuristic,
        "method": report.method,
    }
    if report.optimum is not None:
        result["frame_angles"] = [[float(x) for x in row]
                                  for row in report.optimum.angles]
    return config, result


def cmd_ppt(args):
    sc = BellScenario(args.n, args.m)
    rho = _resolve_state(args)
    blocks = (_parse_blocks(args.blocks, args.n)
              if args.blocks else [(k,) for k in range(args.n)])
    cuts = quantum.transposition_cuts(rho, args.n, blocks)
    scale = max(1.0, linalg.frobenius(rho))
    config = {"command": "ppt", "n": args.n, "m": args.m,
              "family": args.family, "alpha": args.alpha, "phase": args.phase,
              "state_file": args.state_file,
              "blocks": args.blocks or "|".join(str(k) for k in range(args.n))}
    cut_rows = [{
        "transposed_parties": list(parties),
        "min_eigenvalue": low,
        "psd": bool(low >= -linalg.PSD_TOL * scale),
    } for parties, low in cuts]
    value = quantum.quantum_value(sc, rho)
    bound = analysis.ppt_block_bound(args.n, args.m, len(blocks))
    result = {
        "n_blocks": len(blocks),
        "cuts": cut_rows,
        "all_cuts_psd": bool(all(r["psd"] for r in cut_rows)),
        "bell_value": value,
        "ppt_value_bound": bound,
        "within_bound": bool(abs(value) <= bound * (1 + 1e-12)),
    }
    return config, result


def cmd_table1(args):
    if args.n_max < 2:
        raise ValueError("--n-max must be at least 2")
    n_values = list(range(2, args.n_max + 1))
    m_values = sorted(set(args.m_list))
    config = {"command": "table1", "n_values": n_values,
              "m_values": m_values, "limit_column": not args.no_limit}
    rows = []
    for n in n_values:
        for m in m_values:
            rows.append({"n_parties": n, "n_settings": str(m),
                         "success_ratio": ccp.success_ratio(BellScenario(n, m))})
        if not args.no_limit:
            rows.append({"n_parties": n, "n_settings": "inf",
                         "success_ratio": ccp.success_ratio_limit(n)})
    return config, {"rows": rows}


def cmd_fig1(args):
    if args.m_max < 2:
        raise ValueError("--m-max must be at least 2")
    n_values = sorted(set(args.n_values))
    m_values = list(range(2, args.m_max + 1))
    curves = [(n, analysis.violation_curve(n, m_values)) for n in n_values]
    limits = {n: analysis.violation_factor_limit(n) for n in n_values}
    figure_path = args.figure
    if figure_path is None:
        figure_path = "fig1.svg" if args.svg else "fig1.png"
    from . import plotting
    plotting.render_factor_curves(figure_path, m_values, curves, svg=args.svg,
                                  limits=limits)
    config = {"command": "fig1", "n_values": n_values, "m_max": args.m_max,
              "svg": args.svg, "figure": figure_path}
    rows = []
    for n, factors in curves:
        for m, v in zip(m_values, factors):
            rows.append({"n_parties": n, "n_settings": str(m),
                         "violation_factor": float(v)})
        rows.append({"n_parties": n, "n_settings": "inf",
                     "violation_factor": limits[n]})
    return config, {"rows": rows, "figure": figure_path}


def _estimate_report(est: ccp.ProtocolEstimate) -> dict:
    return {
        "n_trials": est.n_trials,
        "successes": est.successes,
        "probability": est.probability,
        "stderr": est.stderr,
        "exact": est.exact,
        "abs_error": abs(est.probability - est.exact),
        "within_3_sigma": bool(abs(est.probability - est.exact)
                               <= 3.0 * est.stderr + 1e-15),
    }


def cmd_ccp(args):
    sc = BellScenario(args.n, args.m)
    seed = resolve_seed(args.seed)
    config = {"command": "ccp", "n": args.n, "m": args.m,
              "trials": args.trials, "seed": seed}
    result = {
        "total_weight": ccp.total_weight(sc),
        "classical_success": ccp.classical_success(sc),
        "quantum_success": ccp.quantum_success(sc),
        "success_ratio": ccp.success_ratio(sc),
        "bias_ratio": ccp.bias_ratio(sc),
        "violation_factor": sc.violation_factor,
    }
    if args.trials > 0:
        for kind in ("classical", "quantum"):
            est = ccp.simulate_protocol(sc, kind, args.trials, seed=seed)
            result[f"{kind}_estimate"] = _estimate_report(est)
    return config, result


def _fmt_cell(value):
    if isinstance(value, bool):
        return (str(value).lower(), "")
    if isinstance(value, float):
        return (format(value, ".12g"), format(value, ".4f"))
    return (str(value), "")


def _write_csv(stream, result) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    rows = result.get("rows")
    if rows is not None:
        keys = list(rows[0].keys())
        value_key = keys[-1]
        writer.writerow(keys + [value_key + "_4dp"])
        for row in rows:
            cells = [str(row[k]) for k in keys[:-1]]
            main, short = _fmt_cell(row[value_key])
            writer.writerow(cells + [main, short])
        return
    writer.writerow(["quantity", "value", "value_4dp"])
    for key, value in result.items():
        if isinstance(value, (list, dict)):
            continue
        if isinstance(value, bool):
            writer.writerow([key, str(value).lower(), ""])
        elif value is None:
            writer.writerow([key, "", ""])
        else:
            main, short = _fmt_cell(value)
            writer.writerow([key, main, short])


def _emit(config, result, fmt: str, out_path) -> None:
    buf = io.StringIO()
    if fmt == "json":
        json.dump({"config": config, "result": result}, buf, indent=2,
                  sort_keys=True)
        buf.write("\n")
    else:
        _write_csv(buf, result)
    text = buf.getvalue()
    if out_path:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_output_options(p, default_format):
    p.add_argument("--out", default=None, metavar="PATH",
                   help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default=default_format,
                   help=f"report format (default {default_format})")


def _add_state_options(p):
    p.add_argument("--family", required=True,
                   choices=("ghz", "gen-ghz", "dur", "file"),
                   help="which state to analyze")
    p.add_argument("--alpha", type=float, default=np.pi / 4,
                   help="weight angle for gen-ghz (default pi/4)")
    p.add_argument("--phase", type=float, default=0.0,
                   help="corner phase for dur (default 0)")
    p.add_argument("--state-file", default=None, metavar="PATH",
                   help="JSON state file, required with --family file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bellwb",
        description="Workbench for multisetting correlation inequalities.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="classical and quantum bounds")
    p.add_argument("--n", type=int, required=True, help="number of parties")
    p.add_argument("--m", type=int, required=True, help="settings per party")
    _add_output_options(p, "json")
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("operator-check",
                       help="residuals of the correlation operator identities")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    _add_output_options(p, "json")
    p.set_defaults(handler=cmd_operator_check)

    p = sub.add_parser("violation",
                       help="optimized inequality value for a state")
    _add_state_options(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--twirl", action="store_true",
                   help="score the phase-twirled corner instead of "
                        "optimizing frames")
    p.add_argument("--restarts", type=int, default=analysis.DEFAULT_RESTARTS)
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (falls back to ${SEED_ENV_VAR})")
    _add_output_options(p, "json")
    p.set_defaults(handler=cmd_violation)

    p = sub.add_parser("ppt", help="positivity under partial transposition")
    _add_state_options(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, default=2,
                   help="settings per party for the value bound (default 2)")
    p.add_argument("--blocks", default=None,
                   help="party partition like '0,1|2|3' (default: singletons)")
    _add_output_options(p, "json")
    p.set_defaults(handler=cmd_ppt)

    p = sub.add_parser("table1",
                       help="quantum/classical success ratio table")
    p.add_argument("--n-max", type=int, default=5,
                   help="largest party count (rows are 2..n-max)")
    p.add_argument("--m-list", type=int, nargs="+", default=[2, 3, 4, 5],
                   help="setting counts for the columns")
    p.add_argument("--no-limit", action="store_true",
                   help="skip the large-M column")
    _add_output_options(p, "csv")
    p.set_defaults(handler=cmd_table1)

    p = sub.add_parser("fig1", help="violation factor curves plus a figure")
    p.add_argument("--n-values", type=int, nargs="+", default=[2, 3, 4, 5])
    p.add_argument("--m-max", type=int, default=12)
    p.add_argument("--svg", action="store_true",
                   help="render the figure as SVG instead of PNG")
    p.add_argument("--figure", default=None, metavar="PATH",
                   help="figure output path (default fig1.png or fig1.svg)")
    _add_output_options(p, "csv")
    p.set_defaults(handler=cmd_fig1)

    p = sub.add_parser("ccp", help="guessing-game probabilities, optional MC")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=0,
                   help="Monte Carlo rounds per protocol (0 disables)")
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (falls back to ${SEED_ENV_VAR})")
    _add_output_options(p, "json")
    p.set_defaults(handler=cmd_ccp)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "family", None) == "file" and not args.state_file:
        parser.error("--family file needs --state-file")
    try:
        config, result = args.handler(args)
        _emit(config, result, args.format, args.out)
    except StateFormatError as exc:
        print(f"bellwb: bad state file: {exc}", file=sys.stderr)
        return 4
    except BudgetExceededError as exc:
        print(f"bellwb: over budget: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"bellwb: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bellwb: io error: {exc}", file=sys.stderr)
        return 5
    return 0


if __name__ == "__main__":
    sys.exit(main())
