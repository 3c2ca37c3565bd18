"""Command-line surface: estimation, graph recovery, and simulations.

Subcommands:
  estimate  - latent correlation matrix of a CSV file
  graph     - estimate, project to PSD, graphical lasso + HBIC, graph export
  simulate  - run the error-curve or concentration experiments

All runs write a run_report.json listing the artifacts produced.  On
failure a machine-readable error summary (errors.json) is written and
the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import glasso, simulate
from .estimator import (
    ColumnSpec,
    estimate_latent_correlation,
    infer_column_specs,
    project_psd,
)

__all__ = ["main"]

_OPTION_KEYS = ("tau", "seed", "hbic_cn", "lambda_path")


class CliError(Exception):
    """User-facing failure with a machine-readable payload."""

    def __init__(self, stage: str, message: str, **details):
        super().__init__(message)
        self.stage = stage
        self.details = details


def read_csv(path: str) -> tuple[list[str], np.ndarray]:
    """Comma-separated, first row header, empty cell = missing value.

    Raises CliError naming the 1-based line of the first malformed row
    or cell.
    """
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise CliError("input", f"{path}: {exc.strerror}", path=path) from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CliError("parse", f"{path}: empty file", path=path, line=1) from None
        header = [h.strip() for h in header]
        if not header or any(not h for h in header):
            raise CliError("parse", f"{path}: line 1: blank column name in header", path=path, line=1)
        rows = []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise CliError(
                    "parse",
                    f"{path}: line {line_no}: expected {len(header)} fields, got {len(row)}",
                    path=path, line=line_no,
                )
            values = []
            for col, cell in zip(header, row):
                cell = cell.strip()
                if cell == "":
                    values.append(np.nan)
                    continue
                try:
                    values.append(float(cell))
                except ValueError:
                    raise CliError(
                        "parse",
                        f"{path}: line {line_no}: column {col!r}: not a number: {cell!r}",
                        path=path, line=line_no, column=col,
                    ) from None
            rows.append(values)
    if not rows:
        raise CliError("parse", f"{path}: no data rows", path=path, line=2)
    return header, np.asarray(rows, dtype=float)


def read_manifest(path: str) -> tuple[dict[str, int | None], dict[str, str]]:
    """Flat 'name = kind' text: kind is 'continuous' or 'ordinal:p'.

    Reserved option keys (tau, seed, hbic_cn, lambda_path) may also
    appear; command-line flags take precedence over them.  Returns
    (column kinds, options).
    """
    kinds: dict[str, int | None] = {}
    options: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise CliError("input", f"{path}: {exc.strerror}", path=path) from exc
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(
                "parse", f"{path}: line {line_no}: expected 'name = kind'",
                path=path, line=line_no,
            )
        name, value = (part.strip() for part in line.split("=", 1))
        if name in _OPTION_KEYS:
            options[name] = value
            continue
        if value == "continuous":
            kinds[name] = None
        elif value.startswith("ordinal"):
            _, _, levels = value.partition(":")
            try:
                p = int(levels)
            except ValueError:
                raise CliError(
                    "parse",
                    f"{path}: line {line_no}: ordinal kind needs a level count, e.g. ordinal:3",
                    path=path, line=line_no,
                ) from None
            if p < 2:
                raise CliError(
                    "parse", f"{path}: line {line_no}: ordinal level count must be >= 2",
                    path=path, line=line_no,
                )
            kinds[name] = p
        else:
            raise CliError(
                "parse",
                f"{path}: line {line_no}: unknown kind {value!r} "
                "(use 'continuous' or 'ordinal:p')",
                path=path, line=line_no,
            )
    return kinds, options


def _build_specs(header, data, kinds) -> list[ColumnSpec]:
    unknown = set(kinds) - set(header)
    if unknown:
        raise CliError(
            "manifest",
            f"manifest names not in the CSV header: {sorted(unknown)}",
            names=sorted(unknown),
        )
    inferred = infer_column_specs(data, header)
    return [
        ColumnSpec(name, kinds[name]) if name in kinds else inferred[j]
        for j, name in enumerate(header)
    ]


def _write_matrix(path: Path, names, matrix) -> None:
    with open(path, "w") as fh:
        fh.write("\t".join(["name", *names]) + "\n")
        for name, row in zip(names, matrix):
            fh.write("\t".join([name, *(f"{v:.12g}" for v in row)]) + "\n")


def _write_method_report(path: Path, names, est) -> None:
    with open(path, "w") as fh:
        fh.write("j\tk\tname_j\tname_k\tmethod\tclamped\n")
        d = len(names)
        for j in range(d):
            for k in range(j + 1, d):
                fh.write(
                    f"{j}\t{k}\t{names[j]}\t{names[k]}\t"
                    f"{est.method[j, k]}\t{int(est.clamped[j, k])}\n"
                )


def _run_estimate_stage(args):
    header, data = read_csv(args.data)
    kinds, options = ({}, {})
    if args.manifest:
        kinds, options = read_manifest(args.manifest)
    tau = args.tau or options.get("tau", "a")
    if tau not in ("a", "b"):
        raise CliError("options", f"tau variant must be 'a' or 'b', got {tau!r}")
    specs = _build_specs(header, data, kinds)
    try:
        est = estimate_latent_correlation(
            data, specs, variant=tau,
            on_unsupported="missing" if args.allow_partial else "raise",
        )
    except CliError:
        raise
    except Exception as exc:
        raise CliError("estimate", str(exc)) from exc
    return header, data, est, options


def _unsupported_pairs(est, names):
    return [
        {"j": j, "k": k, "name_j": names[j], "name_k": names[k]}
        for j in range(est.d)
        for k in range(j + 1, est.d)
        if est.method[j, k] == "unsupported"
    ]


def cmd_estimate(args, report):
    names, _, est, _ = _run_estimate_stage(args)
    out = Path(args.out_dir)
    _write_matrix(out / "correlation.tsv", names, est.values)
    _write_method_report(out / "method_report.tsv", names, est)
    report["artifacts"] += ["correlation.tsv", "method_report.tsv"]
    report["clamped_entries"] = int(np.triu(est.clamped, 1).sum())
    report["unsupported_pairs"] = _unsupported_pairs(est, names)
    return 0


def _parse_lambda_path(raw):
    try:
        path = tuple(float(v) for v in raw.split(","))
    except ValueError:
        raise CliError("options", f"bad lambda path {raw!r}: expected comma-separated numbers") from None
    if not path or any(v <= 0 for v in path):
        raise CliError("options", "lambda path values must be positive")
    return path


def cmd_graph(args, report):
    names, data, est, options = _run_estimate_stage(args)
    if np.isnan(est.values).any():
        raise CliError(
            "estimate",
            "matrix has missing entries (unsupported pairs); graph estimation "
            "needs a complete matrix",
            unsupported_pairs=_unsupported_pairs(est, names),
        )
    out = Path(args.out_dir)
    try:
        r_psd = project_psd(est.values)
        raw_path = args.lambda_path or options.get("lambda_path")
        lam_path = _parse_lambda_path(raw_path) if raw_path else None
        cn = args.hbic_cn if args.hbic_cn is not None else float(options.get("hbic_cn", 3.0))
        config = glasso.GlassoConfig(lambda_path=lam_path, hbic_cn=cn)
        best, fits = glasso.select_hbic(r_psd, data.shape[0], config)
    except CliError:
        raise
    except Exception as exc:
        raise CliError("glasso", str(exc)) from exc

    _write_matrix(out / "correlation.tsv", names, est.values)
    _write_method_report(out / "method_report.tsv", names, est)
    _write_matrix(out / "precision.tsv", names, best.omega)
    with open(out / "edges.tsv", "w") as fh:
        fh.write("j\tk\tname_j\tname_k\tomega\tpartial_correlation\n")
        for j, k in best.edges:
            pc = -best.omega[j, k] / np.sqrt(best.omega[j, j] * best.omega[k, k])
            fh.write(f"{j}\t{k}\t{names[j]}\t{names[k]}\t{best.omega[j, k]:.12g}\t{pc:.12g}\n")
    with open(out / "hbic_trace.tsv", "w") as fh:
        fh.write("lambda\thbic\tn_edges\tobjective\tselected\n")
        for fit in fits:
            fh.write(
                f"{fit.lam:.12g}\t{fit.hbic:.12g}\t{fit.n_edges}\t"
                f"{fit.objective:.12g}\t{int(fit.lam == best.lam)}\n"
            )
    _write_dot(out / "graph.dot", names, best.omega, best.edges)
    report["artifacts"] += [
        "correlation.tsv", "method_report.tsv", "precision.tsv",
        "edges.tsv", "hbic_trace.tsv", "graph.dot",
    ]
    report["clamped_entries"] = int(np.triu(est.clamped, 1).sum())
    report["selected_lambda"] = best.lam
    report["n_edges"] = best.n_edges
    return 0


def _write_dot(path: Path, names, omega, edges) -> None:
    lines = ["graph latent_conditional_independence {"]
    for name in names:
        lines.append(f'  "{name}";')
    for j, k in edges:
        pc = -omega[j, k] / np.sqrt(omega[j, j] * omega[k, k])
        lines.append(f'  "{names[j]}" -- "{names[k]}" [label="{pc:.2f}"];')
    lines.append("}")
    path.write_text("\n".join(lines) + "\n")


def cmd_simulate(args, report):
    out = Path(args.out_dir)
    seed = args.seed if args.seed is not None else 0
    if args.scenario in ("1", "2"):
        runner = simulate.scenario1 if args.scenario == "1" else simulate.scenario2
        p_values = _parse_p_values(args.p_values) if args.p_values else range(2, 17)
        r_grid = None
        if args.r_step:
            r_grid = np.round(
                np.arange(0.0, simulate.R_GRID_CAP + 1e-9, args.r_step), 10
            )
        curves = runner(p_values=p_values, r_grid=r_grid, n=args.n, reps=args.reps, seed=seed)
        name = f"scenario{args.scenario}_curves.tsv"
        (out / name).write_text(simulate.error_curves_to_text(curves))
        report["artifacts"].append(name)
        report["curves"] = len(curves)
    elif args.scenario == "concentration":
        n_grid, err, slope = simulate.concentration_check(seed=seed)
        with open(out / "concentration.tsv", "w") as fh:
            fh.write("n\tsup_error\n")
            for n, e in zip(n_grid, err):
                fh.write(f"{n}\t{e:.12g}\n")
        report["artifacts"].append("concentration.tsv")
        report["log_log_slope"] = slope
    else:
        raise CliError(
            "options", f"unknown scenario {args.scenario!r} (use 1, 2 or concentration)"
        )
    return 0


def _parse_p_values(raw):
    try:
        return [int(v) for v in raw.split(",")]
    except ValueError:
        raise CliError("options", f"bad p values {raw!r}: expected comma-separated integers") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="latentcorr",
        description="Latent Gaussian copula correlation and graph estimation "
        "for mixed ordinal/continuous data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, data_required):
        if data_required:
            p.add_argument("--data", required=True, help="input CSV (header row; empty cell = missing)")
            p.add_argument("--manifest", help="column kinds: lines of 'name = continuous' or 'name = ordinal:p'")
            p.add_argument("--tau", choices=("a", "b"), help="Kendall variant (default a)")
            p.add_argument("--allow-partial", action="store_true",
                           help="mark unsupported pairs missing instead of aborting")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--out-dir", default=".", help="directory for output artifacts")
        p.add_argument("--threads", type=int, default=1,
                       help="reserved; estimation currently runs single-threaded")

    p_est = sub.add_parser("estimate", help="latent correlation matrix of a CSV file")
    common(p_est, True)

    p_graph = sub.add_parser("graph", help="full pipeline: correlation, PSD projection, "
                             "graphical lasso, HBIC selection, DOT export")
    common(p_graph, True)
    p_graph.add_argument("--lambda-path", help="comma-separated penalty values (default: 10 from m/10 to m)")
    p_graph.add_argument("--hbic-cn", type=float, help="HBIC penalty constant (default 3.0)")

    p_sim = sub.add_parser("simulate", help="run the error-curve or concentration experiments")
    p_sim.add_argument("scenario", choices=("1", "2", "concentration"))
    p_sim.add_argument("--n", type=int, default=100, help="sample size per replicate")
    p_sim.add_argument("--reps", type=int, default=80, help="replicates per grid point")
    p_sim.add_argument("--p-values", help="comma-separated level counts (default 2..16)")
    p_sim.add_argument("--r-step", type=float, help="latent correlation grid step (default 0.01)")
    common(p_sim, False)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = Path(args.out_dir)
    report = {
        "command": args.command,
        "argv": list(argv) if argv is not None else sys.argv[1:],
        "started": time.strftime("%Y-%m-%dT%H:%M:%S"),
        "artifacts": [],
    }
    handlers = {"estimate": cmd_estimate, "graph": cmd_graph, "simulate": cmd_simulate}
    try:
        out.mkdir(parents=True, exist_ok=True)
        code = handlers[args.command](args, report)
        report["status"] = "ok"
        (out / "run_report.json").write_text(json.dumps(report, indent=2) + "\n")
        return code
    except CliError as exc:
        summary = {
            "status": "error",
            "stage": exc.stage,
            "message": str(exc),
            **exc.details,
        }
        try:
            (out / "errors.json").write_text(json.dumps(summary, indent=2) + "\n")
        except OSError:
            pass
        print(json.dumps(summary), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
