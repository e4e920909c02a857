"""
Command-line surface.

Subcommands:
    constant  Theorem 2 best constant (and Theorem 1 exponent with --theorem1)
    norm      Norm estimate of a product, random or file form
    verify    Check the inequality on seeded random forms
    search    Search for forms with a large diagonal ratio
    fit       Search over an n-grid and fit the growth exponent

Exit codes: 0 success, 1 usage or input error, 2 out-of-regime input,
3 inequality violation found by verify.

Machine-readable output (--format json|jsonl|csv) depends only on argv, so
a fixed --seed reproduces it byte for byte. jsonl writes one record per
line: verify and fit emit their records followed by a summary line.
Logging goes to stderr.
"""

import argparse
import io
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

from .config_manager import ConfigManager
from .constants import (
    ConstantQuery, best_constant, best_constant_regime, power_of_n, regime_report,
    theorem1_exponent, theorem1_gap,
)
from .errors import DiagsumError, OutOfRegimeError
from .experiments import SearchBudget, growth_scan, search_best_constant, verify_inequality
from .forms import COMPLEX, REAL, MultilinearForm, SpaceSpec, product_form, random_form
from .io import (
    CSV_COLUMNS, csv_text, dumps_json, format_number, load_form, validate_form_file,
    write_json_lines, write_plot_file,
)
from .normest import NormBudget, best_available_norm
from .session_logger import SessionLogger
from .spaces import positive_fraction

logger = logging.getLogger(__name__)

DEFAULT_SEED = 12345

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_OUT_OF_REGIME = 2
EXIT_VIOLATION = 3

GRAMMAR = """\
diagsum constant --m INT --n INT --p LIST --s RAT [--theorem1]
diagsum norm --form {product|random|file PATH} [--seed INT] --m INT --n INT --p LIST
             [--starts INT --tol REAL --max-sweeps INT --distribution DIST]
diagsum verify --m INT --n INT --p LIST --s RAT --trials INT [--seed INT]
diagsum search --m INT --n INT --p LIST --s RAT [--trials INT --steps INT --seed INT]
diagsum fit --m INT --p LIST --s RAT --ngrid LIST [--seed INT --plot PATH]
common: --format {table|json|jsonl|csv} --out PATH --complex --seed INT --config PATH
        --session --verbose --progress
"""

NORM_COLUMNS = ("m", "n", "p_list", "form", "norm_value", "norm_kind", "method",
                "sweeps", "starts_used", "seed")
CONSTANT_COLUMNS = CSV_COLUMNS


class UsageError(DiagsumError):
    """Command line does not parse against the grammar."""
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _exponent_list(text: str) -> SpaceSpec:
    return SpaceSpec.parse(text)


def _int_list(text: str) -> List[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values or any(value < 1 for value in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _rational(text: str):
    return positive_fraction(text, "s")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=("table", "json", "jsonl", "csv"), default="table")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--complex", action="store_true",
                        help="complex scalars (informational, never gating)")
    common.add_argument("--seed", type=int, default=None, help=f"seed (default {DEFAULT_SEED})")
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--session", action="store_true",
                        help="create a session folder with log.txt and parameters.json")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--progress", action="store_true", help="progress bars on stderr")

    parser = _Parser(prog="diagsum", description="Diagonal s-sum inequalities for m-linear forms on l_p^n")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    constant = sub.add_parser("constant", parents=[common], help="best constant")
    constant.add_argument("--m", type=int, required=True)
    constant.add_argument("--n", type=int, required=True)
    constant.add_argument("--p", type=_exponent_list, required=True)
    constant.add_argument("--s", type=_rational, required=True)
    constant.add_argument("--theorem1", action="store_true",
                          help="also report the Theorem 1 regime (equal exponents)")

    norm = sub.add_parser("norm", parents=[common], help="norm estimate")
    norm.add_argument("--form", nargs="+", required=True, metavar="KIND",
                      help="product | random | file PATH")
    norm.add_argument("--m", type=int)
    norm.add_argument("--n", type=int)
    norm.add_argument("--p", type=_exponent_list, required=True)
    norm.add_argument("--distribution", default=None)
    norm.add_argument("--starts", type=int)
    norm.add_argument("--tol", type=float)
    norm.add_argument("--max-sweeps", type=int)

    verify = sub.add_parser("verify", parents=[common], help="inequality check")
    verify.add_argument("--m", type=int, required=True)
    verify.add_argument("--n", type=int, required=True)
    verify.add_argument("--p", type=_exponent_list, required=True)
    verify.add_argument("--s", type=_rational, required=True)
    verify.add_argument("--trials", type=int, required=True)
    verify.add_argument("--distribution", default=None)
    verify.add_argument("--starts", type=int)
    verify.add_argument("--max-sweeps", type=int)

    search = sub.add_parser("search", parents=[common], help="best-constant search")
    search.add_argument("--m", type=int, required=True)
    search.add_argument("--n", type=int, required=True)
    search.add_argument("--p", type=_exponent_list, required=True)
    search.add_argument("--s", type=_rational, required=True)
    search.add_argument("--trials", type=int)
    search.add_argument("--steps", type=int)
    search.add_argument("--step-size", type=float)
    search.add_argument("--distribution", default=None)

    fit = sub.add_parser("fit", parents=[common], help="growth exponent fit")
    fit.add_argument("--m", type=int, required=True)
    fit.add_argument("--p", type=_exponent_list, required=True)
    fit.add_argument("--s", type=_rational, required=True)
    fit.add_argument("--ngrid", type=_int_list, default=None)
    fit.add_argument("--trials", type=int)
    fit.add_argument("--steps", type=int)
    fit.add_argument("--distribution", default=None)
    fit.add_argument("--plot", default=None, help="plot file (default fit_plot.dat)")
    return parser


@dataclass
class CommandResult:
    """Rendered output of one subcommand."""
    payload: object
    rows: List[Dict]
    columns: tuple
    table: str
    exit_code: int = EXIT_OK
    summary: Dict = field(default_factory=dict)
    saved_files: List[str] = field(default_factory=list)
    records: List[Dict] = field(default_factory=list)

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return dumps_json(self.payload) + "\n"
        if fmt == "jsonl":
            buffer = io.StringIO()
            write_json_lines(buffer, self.records or [self.payload])
            return buffer.getvalue()
        if fmt == "csv":
            return csv_text(self.rows, self.columns)
        return self.table


def _table(pairs) -> str:
    width = max(len(key) for key, _ in pairs)
    return "".join(f"{key:<{width}}  {value}\n" for key, value in pairs)


def _seed(args) -> int:
    return DEFAULT_SEED if args.seed is None else args.seed


def _scalar_mode(args) -> str:
    return COMPLEX if args.complex else REAL


def _norm_budget(args, config: ConfigManager) -> NormBudget:
    section = config.section("normest")
    for key, attr in (("starts", "starts"), ("tol", "tol"), ("max_sweeps", "max_sweeps")):
        value = getattr(args, attr, None)
        if value is not None:
            section[key] = value
    return NormBudget.from_config(section, _seed(args))


def _distribution(args, config: ConfigManager) -> str:
    return args.distribution or config.get("experiments", "distribution", default="gaussian")


def _search_budget(args, config: ConfigManager) -> SearchBudget:
    section = config.section("search")
    for key, attr in (("random_trials", "trials"), ("ascent_steps", "steps"), ("step_size", "step_size")):
        value = getattr(args, attr, None)
        if value is not None:
            section[key] = value
    return SearchBudget.from_config(section, config.section("normest"), _seed(args),
                                    _distribution(args, config))


def _query(args, n: Optional[int] = None) -> ConstantQuery:
    return ConstantQuery(args.m, args.n if n is None else n, args.p, args.s)


def cmd_constant(args, config: ConfigManager) -> CommandResult:
    q = _query(args)
    tag = best_constant_regime(q)
    value = best_constant(q)
    payload = {
        "m": q.m, "n": q.n, "p_list": [str(p) for p in q.exponents], "s": str(q.s),
        "regime": tag.label.value, "exponent_of_n": str(tag.exponent_of_n), "constant": value,
        "tags": [t.label.value for t in regime_report(q)],
    }
    pairs = [("regime", tag.label.value), ("exponent_of_n", str(tag.exponent_of_n)),
             ("constant", format_number(value))]
    if args.theorem1:
        if not q.exponents.is_uniform:
            raise OutOfRegimeError(f"Theorem 1 needs equal exponents, got ({q.exponents})")
        p = q.exponents[0]
        t1 = theorem1_exponent(q.m, p, q.s)
        gap = theorem1_gap(q.m, p, q.s)
        payload["theorem1"] = {
            "regime": t1.label.value, "exponent_of_n": str(t1.exponent_of_n),
            "bound": power_of_n(q.n, t1.exponent_of_n), "gap_to_exact": str(gap),
        }
        pairs += [("theorem1_regime", t1.label.value),
                  ("theorem1_exponent", str(t1.exponent_of_n)),
                  ("theorem1_gap", str(gap))]
    row = {"m": q.m, "n": q.n, "p_list": str(q.exponents), "s": str(q.s),
           "regime": tag.label.value, "theoretical_constant": repr(value)}
    return CommandResult(payload, [row], CONSTANT_COLUMNS, _table(pairs),
                         summary={"regime": tag.label.value, "constant": value})


def _build_form(args) -> Tuple[MultilinearForm, str]:
    kind = args.form[0]
    if kind == "file":
        if len(args.form) != 2:
            raise UsageError("--form file needs exactly one PATH")
        metadata = validate_form_file(args.form[1])
        for name in ("m", "n"):
            given = getattr(args, name)
            if given is not None and given != metadata[name]:
                raise UsageError(f"--{name} {given} disagrees with the file ({metadata[name]})")
        T = load_form(args.form[1])
        return T, f"file({args.form[1]})"
    if len(args.form) != 1 or kind not in ("product", "random"):
        raise UsageError(f"--form must be product, random or file PATH, got {' '.join(args.form)}")
    if args.m is None or args.n is None:
        raise UsageError(f"--form {kind} needs --m and --n")
    if kind == "product":
        T = product_form(args.m, args.n)
        if args.complex:
            T = MultilinearForm(T.coeffs.astype(complex))
        return T, "product"
    dist = args.distribution or "gaussian"
    T = random_form(args.m, args.n, _seed(args), dist, _scalar_mode(args))
    return T, f"random(seed={_seed(args)},distribution={dist})"


def _vector_json(x) -> list:
    if getattr(x, "dtype", None) is not None and x.dtype.kind == "c":
        return [[float(z.real), float(z.imag)] for z in x]
    return [float(v) for v in x]


def cmd_norm(args, config: ConfigManager) -> CommandResult:
    T, descriptor = _build_form(args)
    budget = _norm_budget(args, config)
    estimate = best_available_norm(T, args.p, budget)
    payload = {"m": T.order, "n": T.dim, "p_list": [str(p) for p in args.p], "form": descriptor,
               "scalar_mode": T.scalar_mode, "seed": budget.seed}
    payload.update(estimate.summary())
    payload["witnesses"] = [_vector_json(x) for x in estimate.witnesses]
    row = {"m": T.order, "n": T.dim, "p_list": str(args.p), "form": descriptor,
           "norm_value": repr(estimate.value), "norm_kind": estimate.kind.value,
           "method": estimate.method, "sweeps": estimate.sweeps,
           "starts_used": estimate.starts_used, "seed": budget.seed}
    pairs = [("form", descriptor), ("value", format_number(estimate.value)),
             ("kind", estimate.kind.value), ("method", estimate.method),
             ("sweeps", estimate.sweeps), ("starts_used", estimate.starts_used)]
    return CommandResult(payload, [row], NORM_COLUMNS, _table(pairs),
                         summary=estimate.summary())


def cmd_verify(args, config: ConfigManager) -> CommandResult:
    q = _query(args)
    report = verify_inequality(q, args.trials, _seed(args), _distribution(args, config),
                               _norm_budget(args, config), _scalar_mode(args), args.progress)
    informational = args.complex
    payload = report.to_dict()
    payload["informational"] = informational
    pairs = [("regime", report.regime), ("constant", format_number(report.theoretical_constant)),
             ("trials", report.trials), ("skipped", report.skipped),
             ("max_ratio", format_number(report.max_ratio)),
             ("violations", len(report.violations))]
    if informational:
        pairs.append(("note", "complex mode is informational; violations do not fail"))
    exit_code = EXIT_VIOLATION if report.violations and not informational else EXIT_OK
    rows = [record.csv_row() for record in report.violations]
    summary_line = {key: value for key, value in payload.items() if key != "violations"}
    return CommandResult(payload, rows, CSV_COLUMNS, _table(pairs), exit_code,
                         summary={"violations": len(report.violations), "max_ratio": report.max_ratio},
                         records=payload["violations"] + [summary_line])


def cmd_search(args, config: ConfigManager) -> CommandResult:
    q = _query(args)
    best, record = search_best_constant(q, _search_budget(args, config), _scalar_mode(args),
                                        args.progress)
    payload = {"best_ratio": best, "record": record.to_dict()}
    pairs = [("regime", record.regime), ("constant", format_number(record.theoretical_constant)),
             ("best_ratio", format_number(best)), ("form", record.form_descriptor),
             ("norm_kind", record.norm["kind"])]
    return CommandResult(payload, [record.csv_row()], CSV_COLUMNS, _table(pairs),
                         summary={"best_ratio": best, "form": record.form_descriptor},
                         records=[record.to_dict()])


def cmd_fit(args, config: ConfigManager, session: Optional[SessionLogger] = None) -> CommandResult:
    ngrid = args.ngrid or config.get("experiments", "ngrid", default=[2, 4, 8, 16, 32])
    scan = growth_scan(args.m, args.p, args.s, ngrid, _search_budget(args, config),
                       _scalar_mode(args), args.progress)
    if session is not None:
        for r in scan.records:
            session.log_progress(f"n={r.query.n}: measured {r.measured_ratio!r}, "
                                 f"constant {r.theoretical_constant!r} ({r.norm['kind']})")
        for n in scan.skipped:
            session.log_warning(f"n={n} skipped: n^{args.m} coefficients exceed the size guard")
    default_plot = os.path.join(session.session_path, "fit_plot.dat") if session is not None else "fit_plot.dat"
    plot_path = args.plot or default_plot
    write_plot_file(plot_path, scan.plot_rows)

    fit_line = {
        "fit": scan.fit.to_dict(),
        "predicted_exponent": scan.predicted_exponent,
        "skipped": list(scan.skipped),
        "plot_file": plot_path,
    }
    payload = {"records": [record.to_dict() for record in scan.records]}
    payload.update(fit_line)
    width = max(len(str(r.query.n)) for r in scan.records)
    lines = [f"{'n':>{width}}  {'constant':>14}  {'measured':>14}  norm_kind"]
    for r in scan.records:
        lines.append(f"{r.query.n:>{width}}  {format_number(r.theoretical_constant):>14}  "
                     f"{format_number(r.measured_ratio):>14}  {r.norm['kind']}")
    table = "\n".join(lines) + "\n\n" + _table([
        ("slope", format_number(scan.fit.slope)),
        ("intercept", format_number(scan.fit.intercept)),
        ("residual", format_number(scan.fit.residual)),
        ("predicted_exponent", scan.predicted_exponent),
        ("plot_file", plot_path),
    ])
    rows = [record.csv_row() for record in scan.records]
    return CommandResult(payload, rows, CSV_COLUMNS, table,
                         summary={"slope": scan.fit.slope, "residual": scan.fit.residual},
                         saved_files=[plot_path],
                         records=payload["records"] + [fit_line])


COMMANDS: Dict[str, Callable] = {
    "constant": cmd_constant,
    "norm": cmd_norm,
    "verify": cmd_verify,
    "search": cmd_search,
}


def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def _usage(message: str) -> int:
    sys.stderr.write(f"error: {message}\n\nusage:\n{GRAMMAR}")
    return EXIT_USAGE


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, execute the subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        return _usage(str(e))
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    _configure_logging(args.verbose)
    config = ConfigManager(args.config, create_default=False)

    session_path, session = None, None
    if args.session:
        session_path = config.create_session_folder()
        session = SessionLogger(session_path)
        session.start_session(" ".join(argv if argv is not None else sys.argv[1:]))
        logger.info(f"Session log: {session.get_log_file()}")
        parameters = {key: str(value) for key, value in sorted(vars(args).items())}
        session.log_parameters(parameters)
        config.save_session_parameters(session_path, parameters)

    try:
        if args.command == "fit":
            result = cmd_fit(args, config, session)
        else:
            result = COMMANDS[args.command](args, config)
    except UsageError as e:
        code = _usage(str(e))
    except OutOfRegimeError as e:
        sys.stderr.write(f"out of regime: {e}\n")
        code = EXIT_OUT_OF_REGIME
    except (DiagsumError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        code = EXIT_USAGE
    else:
        text = result.render(args.format)
        out_path = args.out
        if out_path is None and session_path is not None:
            extension = {"table": "txt", "json": "json", "jsonl": "jsonl", "csv": "csv"}[args.format]
            out_path = os.path.join(session_path, f"{args.command}.{extension}")
        if out_path:
            with open(out_path, "w", encoding="utf-8", newline="") as f:
                f.write(text)
            result.saved_files.append(out_path)
            logger.info(f"Wrote {args.format} output to {out_path}")
        else:
            sys.stdout.write(text)
        code = result.exit_code
        if session is not None:
            session.log_result(result.summary)
            session.log_saved_files(result.saved_files)

    if session is not None:
        if code != EXIT_OK:
            session.log_error(f"command finished with exit code {code}")
        session.end_session(code)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
