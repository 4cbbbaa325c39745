"""Command-line interface: ``defcohom <command> --model ... [options]``.

Every command loads a model (a path, a path under ``data/`` or a corpus name),
optionally a deformation, runs one engine operation and writes the payload as
canonical JSON or as a text table. Exit codes: 0 success, 1 usage error,
2 invalid input, 3 internal invariant violation.
"""

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Tuple

from src import DATA_DIR, EXIT_INPUT, EXIT_INTERNAL, EXIT_OK
from src.cohomology import FORM, TANGENT, cohomology_basis
from src.data_loader import (
    DeformationDocument,
    corpus_path,
    deformation_path,
    load_first_order,
    load_model,
    load_series,
    model_ring,
    parse_direction,
    parse_form,
    parse_vform,
    read_deformation,
    read_json,
)
from src.deformation import (
    BeltramiSeries,
    kodaira_spencer,
    kodaira_spencer_map,
    mc_defect,
    mc_solve,
)
from src.errors import DefcohomError, PreconditionError, UsageError
from src.forms import ComplexModel
from src.frame import CONVENTIONS, build_frame, verify_conjugation_identity
from src.hodge import CENTRAL, MODES, SAMPLED, annotate_consistency, hodge_numbers
from src.obstruction import (
    default_directions,
    extend_class,
    obstruction_report,
    obstruction_sweep,
)
from src.reports import (
    cohomology_payload,
    conjugation_payload,
    extension_payload,
    hodge_payload,
    ks_map_payload,
    ks_payload,
    mc_check_payload,
    mc_solve_payload,
    obstruction_payload,
    render_text,
    validate_payload,
)
from src.utils import canonical_json, resolve_seed, write_output

logger = logging.getLogger("defcohom")

FORMATS = ("json", "text")

Bidegree = Tuple[int, int]


class ArgumentParser(argparse.ArgumentParser):
    """argparse parser whose errors become UsageError (exit 1) instead of SystemExit(2)."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_bidegree(text: str) -> Bidegree:
    """Parse "p,q" into a pair of non-negative integers."""
    parts = text.split(",")
    try:
        p, q = (int(part) for part in parts)
    except ValueError as exc:
        raise UsageError(f"Invalid bidegree {text!r}; expected 'p,q'") from exc
    if p < 0 or q < 0:
        raise UsageError(f"Invalid bidegree {text!r}; entries must be non-negative")
    return p, q


@dataclass(frozen=True)
class RunConfig:
    """One validated CLI invocation."""

    command: str
    model: str
    deformation: Optional[str] = None
    order: Optional[int] = None
    max_order: Optional[int] = None
    bidegree: Optional[Bidegree] = None
    bidegrees: Tuple[Bidegree, ...] = ()
    tangent: Optional[int] = None
    class_index: Optional[int] = None
    representative: Optional[str] = None
    direction: Optional[str] = None
    all_directions: bool = False
    sweep: bool = False
    mode: str = CENTRAL
    convention: Optional[str] = None
    consistency: bool = True
    seed: int = 0
    fmt: str = "json"
    out: Optional[str] = None
    holomorphic: bool = False

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        """Validate parsed arguments.

        Raises:
            UsageError: On out-of-range orders or malformed selectors
        """
        for name in ("order", "max_order"):
            value = getattr(args, name, None)
            if value is not None and value < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be >= 1, got {value}")
        class_index = getattr(args, "class_index", None)
        if class_index is not None and class_index < 0:
            raise UsageError(f"--class must be >= 0, got {class_index}")
        bidegree = getattr(args, "bidegree", None)
        tangent = getattr(args, "tangent", None)
        if isinstance(bidegree, str) and tangent is not None:
            raise UsageError("--bidegree and --tangent are mutually exclusive")
        if tangent is not None and tangent < 0:
            raise UsageError(f"--tangent must be >= 0, got {tangent}")
        bidegrees: Tuple[Bidegree, ...] = ()
        if isinstance(bidegree, list):
            bidegrees = tuple(parse_bidegree(b) for b in bidegree)
            bidegree = None
        elif bidegree is not None:
            bidegree = parse_bidegree(bidegree)
        return cls(
            command=args.command,
            model=args.model,
            deformation=args.deformation,
            order=args.order,
            max_order=getattr(args, "max_order", None),
            bidegree=bidegree,
            bidegrees=bidegrees,
            tangent=tangent,
            class_index=class_index,
            representative=getattr(args, "representative", None),
            direction=getattr(args, "direction", None),
            all_directions=getattr(args, "all_directions", False),
            sweep=getattr(args, "all", False),
            mode=getattr(args, "mode", CENTRAL),
            convention=getattr(args, "convention", None),
            consistency=not getattr(args, "skip_consistency", False),
            seed=resolve_seed(args.seed),
            fmt=args.format,
            out=args.out,
            holomorphic=args.holomorphic,
        )

    @property
    def kind(self) -> str:
        return TANGENT if self.tangent is not None else FORM

    @property
    def degree(self) -> Tuple[int, int]:
        """(p, q) of the selected cohomology; p is 0 for tangent classes."""
        if self.tangent is not None:
            return 0, self.tangent
        if self.bidegree is None:
            raise UsageError(f"{self.command}: --bidegree p,q or --tangent q is required")
        return self.bidegree


def _common_options() -> argparse.ArgumentParser:
    parent = ArgumentParser(add_help=False)
    parent.add_argument("--model", required=True, help="Model JSON path or corpus name")
    parent.add_argument("--deformation", help="Deformation JSON path or bundled name")
    parent.add_argument("--order", type=int, help="Jet order (overrides the documents)")
    parent.add_argument("--seed", help="Sampling seed, decimal or 0x hex (env DEFCOHOM_SEED)")
    parent.add_argument("--format", choices=FORMATS, default="json", help="Output format")
    parent.add_argument("--out", help="Write the result to this file instead of stdout")
    parent.add_argument(
        "--holomorphic", action="store_true", help="Restrict jets to t-only monomials"
    )
    parent.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG"
    )
    return parent


def _add_selector(parser: argparse.ArgumentParser, with_class: bool = True) -> None:
    parser.add_argument("--bidegree", help="Form cohomology H^(p,q), as 'p,q'")
    parser.add_argument("--tangent", type=int, help="Tangent cohomology H^q(T^1,0)")
    if with_class:
        parser.add_argument(
            "--class", dest="class_index", type=int, help="Basis index into the cohomology"
        )
        parser.add_argument(
            "--representative", help="JSON file of terms for a custom closed representative"
        )


def build_parser() -> ArgumentParser:
    """The argparse tree for every command."""
    common = _common_options()
    parser = ArgumentParser(
        prog="defcohom",
        description="Exact deformation computations on invariant Dolbeault models.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    sub.add_parser("validate", parents=[common], help="Validate a model")

    p = sub.add_parser("cohomology", parents=[common], help="Dolbeault or tangent cohomology")
    _add_selector(p, with_class=False)

    sub.add_parser("mc-check", parents=[common], help="Maurer-Cartan defect of a series")
    sub.add_parser("mc-solve", parents=[common], help="Solve Maurer-Cartan from phi1")

    p = sub.add_parser("ks", parents=[common], help="Kodaira-Spencer class or map")
    p.add_argument("--direction", help="Base direction, e.g. 't11' or 't11=1,t12=1/2'")
    p.add_argument(
        "--all-directions", action="store_true", help="Kodaira-Spencer map over all parameters"
    )

    p = sub.add_parser("extend", parents=[common], help="Extend a class along the deformation")
    _add_selector(p)

    p = sub.add_parser("obstruct", parents=[common], help="Obstruction classes")
    _add_selector(p)
    p.add_argument("--direction", help="Base direction (default: every active coordinate)")
    p.add_argument("--all", action="store_true", help="Sweep every basis class and order")
    p.add_argument("--max-order", type=int, help="Highest order in a sweep")

    p = sub.add_parser("hodge", parents=[common], help="Hodge numbers and jumps")
    p.add_argument("--mode", choices=MODES, default=CENTRAL)
    p.add_argument(
        "--bidegree", action="append", help="Restrict to bidegree 'p,q' (repeatable)"
    )
    p.add_argument(
        "--skip-consistency",
        action="store_true",
        help="Skip the obstruction/jump comparison in sampled mode",
    )

    p = sub.add_parser("verify-identities", parents=[common], help="Conjugation identity report")
    p.add_argument("--convention", choices=CONVENTIONS, help="Single frame convention")
    return parser


# Loading


def resolve_path(value: str, finder: Callable[[str], Path]) -> Path:
    """A literal path, a path under data/, or a bundled name looked up by ``finder``."""
    for candidate in (Path(value), DATA_DIR / value):
        if candidate.is_file():
            return candidate
    return finder(Path(value).stem)


def load_inputs(config: RunConfig) -> Tuple[ComplexModel, Optional[DeformationDocument]]:
    """Model and deformation document sharing one jet ring."""
    model_doc = read_json(resolve_path(config.model, corpus_path))
    deformation = None
    if config.deformation:
        deformation = read_deformation(resolve_path(config.deformation, deformation_path))
    ring = model_ring(model_doc, deformation, config.order)
    model = load_model(model_doc, ring)
    logger.info("Loaded %s (m=%d) over %r at order %d", model.name, model.dim, ring.params, ring.order)
    return model, deformation


def _require_deformation(config: RunConfig, deformation) -> DeformationDocument:
    if deformation is None:
        raise UsageError(f"{config.command}: --deformation is required")
    return deformation


def load_beltrami(config: RunConfig, model: ComplexModel, deformation) -> BeltramiSeries:
    """The series of a 'phi' document, or the Maurer-Cartan solution grown from 'phi1'."""
    deformation = _require_deformation(config, deformation)
    if deformation.phi is not None:
        return load_series(model, deformation, config.holomorphic)
    holomorphic = config.holomorphic or deformation.holomorphic
    series, report = mc_solve(load_first_order(model, deformation, holomorphic), holomorphic=holomorphic)
    if not report.success:
        raise PreconditionError(
            f"phi1 of {deformation.name or config.deformation} is obstructed at order "
            f"{report.obstruction['order']}; no Beltrami series to work with"
        )
    return series


def select_class(config: RunConfig, model: ComplexModel):
    """(representative, label) from --class or --representative."""
    kind = config.kind
    p, q = config.degree
    if config.representative:
        terms = read_json(config.representative)
        if not isinstance(terms, list):
            terms = terms.get("terms", [])
        rep = parse_vform(model, terms, q) if kind == TANGENT else parse_form(model, terms)
        return rep, "custom"
    if config.class_index is None:
        raise UsageError(f"{config.command}: --class or --representative is required")
    basis = cohomology_basis(model, kind, p, q)
    if config.class_index >= basis.h:
        raise UsageError(
            f"--class {config.class_index} out of range; {basis.label()} has dimension {basis.h}"
        )
    return basis.representatives[config.class_index], f"{basis.label()}[{config.class_index}]"


# Commands


def run_validate(config: RunConfig):
    model, _ = load_inputs(config)
    return validate_payload(model)


def run_cohomology(config: RunConfig):
    model, _ = load_inputs(config)
    p, q = config.degree
    return cohomology_payload(cohomology_basis(model, config.kind, p, q))


def run_mc_check(config: RunConfig):
    model, deformation = load_inputs(config)
    deformation = _require_deformation(config, deformation)
    if deformation.phi is not None:
        series = load_series(model, deformation, config.holomorphic)
    else:
        series = BeltramiSeries(load_first_order(model, deformation, config.holomorphic))
    defect = mc_defect(series)
    if defect:
        logger.info("Maurer-Cartan fails: %d defect term(s)", len(defect.terms))
    return mc_check_payload(series, defect)


def run_mc_solve(config: RunConfig):
    model, deformation = load_inputs(config)
    deformation = _require_deformation(config, deformation)
    holomorphic = config.holomorphic or deformation.holomorphic
    phi1 = load_first_order(model, deformation, holomorphic)
    series, report = mc_solve(phi1, config.order, holomorphic=holomorphic)
    return mc_solve_payload(series, report)


def run_ks(config: RunConfig):
    model, deformation = load_inputs(config)
    series = load_beltrami(config, model, deformation)
    if config.direction and not config.all_directions:
        u = parse_direction(config.direction, model.ring)
        return ks_payload(kodaira_spencer(series, u))
    return ks_map_payload(kodaira_spencer_map(series))


def run_extend(config: RunConfig):
    model, deformation = load_inputs(config)
    series = load_beltrami(config, model, deformation)
    rep, label = select_class(config, model)
    ext = extend_class(rep, series, model.ring.order, kind=config.kind, label=label)
    return extension_payload(ext)


def run_obstruct(config: RunConfig):
    model, deformation = load_inputs(config)
    series = load_beltrami(config, model, deformation)
    directions = None
    if config.direction:
        directions = [parse_direction(config.direction, model.ring)]

    if config.sweep:
        p, q = config.degree
        max_order = config.max_order or model.ring.order
        if max_order > model.ring.order:
            raise UsageError(f"--max-order {max_order} exceeds the ring order {model.ring.order}")
        reports = obstruction_sweep(model, series, config.kind, p, q, max_order, directions)
        return [obstruction_payload(r) for r in reports]

    rep, label = select_class(config, model)
    n = model.ring.order
    ext = extend_class(rep, series, n - 1, kind=config.kind, label=label)
    if not ext.success:
        raise PreconditionError(
            f"{label} is obstructed at order {ext.achieved_order + 1}; "
            f"no order-{n} obstruction to report"
        )
    payloads = [
        obstruction_payload(obstruction_report(ext, u, n, class_index=config.class_index))
        for u in (directions or default_directions(series))
    ]
    payloads.sort(key=lambda item: item["direction"])
    return payloads[0] if directions else payloads


def run_hodge(config: RunConfig):
    model, deformation = load_inputs(config)
    series = None
    if config.mode != CENTRAL:
        series = load_beltrami(config, model, deformation)
    table = hodge_numbers(model, series, list(config.bidegrees) or None, config.mode, config.seed)
    if config.mode == SAMPLED and config.consistency:
        annotate_consistency(model, series, table)
    for change in table.jumps:
        logger.info(change["message"])
    return hodge_payload(table)


def run_verify_identities(config: RunConfig):
    model, deformation = load_inputs(config)
    series = load_beltrami(config, model, deformation)
    conventions = [config.convention] if config.convention else list(CONVENTIONS)
    reports = [verify_conjugation_identity(build_frame(model, series.phi, c)) for c in conventions]
    return conjugation_payload(reports)


HANDLERS = {
    "validate": run_validate,
    "cohomology": run_cohomology,
    "mc-check": run_mc_check,
    "mc-solve": run_mc_solve,
    "ks": run_ks,
    "extend": run_extend,
    "obstruct": run_obstruct,
    "hodge": run_hodge,
    "verify-identities": run_verify_identities,
}


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(
        level=level,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def run(config: RunConfig) -> str:
    """Execute a command and return its rendered output."""
    payload = HANDLERS[config.command](config)
    if config.fmt == "text":
        return render_text(config.command, payload)
    return canonical_json(payload)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point; returns the process exit code."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        configure_logging(0)
        logger.error(str(exc))
        return exc.exit_code
    except SystemExit as exc:
        # --help and --version
        return exc.code if isinstance(exc.code, int) else EXIT_OK

    configure_logging(args.verbose)
    try:
        config = RunConfig.from_args(args)
        text = run(config)
        write_output(text, config.out)
    except DefcohomError as exc:
        logger.error(str(exc))
        return exc.exit_code
    except FileNotFoundError as exc:
        logger.error(str(exc))
        return EXIT_INPUT
    except Exception:
        logger.exception("Internal error")
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
