"""latticeforge command-line entry point.

Builds lattices, analyzes them, checks identities, searches embeddings,
emits Hasse diagrams and runs the reproduce battery.

Exit codes:
    0 = Success (identity holds, embedding found, all claims pass)
    1 = Mathematical failure (identity fails, no embedding, a claim fails);
        --expect-fail swaps 0 and 1 for check, embed and embed-scan
    2 = Input, configuration or resource error
"""

import argparse
import logging
import re
import sys
from pathlib import Path
from typing import Optional

# Add src/ to path for imports
sys.path.insert(0, str(Path(__file__).resolve().parent))

from bmn import build_bmn
from cambrian import CambrianSpec, build_cambrian, tamari
from config import Config, load_config
from dot_export import write_dot
from errors import BadParamsError, InputError, LatticeForgeError, ResourceError
from identities import GazpachoIndex, dual_identity, format_term, gazpacho, holds, named_identity
from lattice import (
    FiniteLattice,
    LatticeMap,
    boolean_lattice,
    chain,
    double_interval,
    dual,
    is_bounded,
    is_semidistributive,
    is_subdirectly_irreducible,
    join_dependency,
    m3,
    n5,
    product,
)
from lattice_io import (
    load_report,
    read_identity,
    read_lattice,
    save_report,
    write_lattice,
    write_map,
    write_measure,
)
from measures import (
    bm1_measure,
    bm2_measure,
    generator_embedding_search,
    hom_properties,
    measure_to_hom,
    si_embedding_scan,
    tamari_measure,
)
from reproduce import CLAIMS, ReproduceOptions, run_reproduce
from weak_order import build_permutohedron

logger = logging.getLogger("latticeforge")

BUILD_KINDS = (
    "permutohedron", "tamari", "cambrian", "bmn", "double", "product", "dual",
    "chain", "boolean", "n5", "m3",
)


def parse_int_list(text: Optional[str]) -> list[int]:
    """"4,5" -> [4, 5]; empty or None -> []."""
    if not text:
        return []
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise BadParamsError(f"expected comma-separated integers, got {text!r}") from e


def parse_cambrian_ref(text: str) -> CambrianSpec:
    """"n=6,u=4,5" -> A_{4,5}(6)."""
    match = re.fullmatch(r"\s*n=(\d+)\s*(?:,\s*u=([\d,\s]*))?", text)
    if not match:
        raise BadParamsError(f"expected 'n=<int>,u=<list>', got {text!r}")
    return CambrianSpec.of(int(match.group(1)), parse_int_list(match.group(2)))


def _require(value: Optional[int], flag: str, kind: str) -> int:
    if value is None:
        raise BadParamsError(f"build {kind} needs {flag}")
    return value


def _element(lattice: FiniteLattice, ref: Optional[str], flag: str) -> int:
    if ref is None:
        raise BadParamsError(f"{flag} is required")
    if ref in lattice.names:
        return lattice.names.index(ref)
    try:
        x = int(ref)
    except ValueError:
        raise BadParamsError(f"{flag} {ref!r} is neither an element name nor an id")
    if not 0 <= x < lattice.size:
        raise BadParamsError(f"{flag} {x} is out of range")
    return x


def build_lattice(args: argparse.Namespace, config: Config) -> FiniteLattice:
    kind = args.kind
    if kind == "permutohedron":
        return build_permutohedron(
            _require(args.n, "--n", kind), max_n=config.max_permutohedron,
            dense_limit=config.dense_limit, table_limit=config.table_limit,
        )
    if kind == "tamari":
        return build_cambrian(
            tamari(_require(args.n, "--n", kind)), max_n=config.max_cambrian,
            dense_limit=config.dense_limit, table_limit=config.table_limit,
        )
    if kind == "cambrian":
        spec = CambrianSpec.of(_require(args.n, "--n", kind), parse_int_list(args.u))
        return build_cambrian(
            spec, max_n=config.max_cambrian,
            dense_limit=config.dense_limit, table_limit=config.table_limit,
        )
    if kind == "bmn":
        return build_bmn(
            _require(args.m, "--m", kind), _require(args.n, "--n", kind),
            max_atoms=config.max_bmn_atoms,
            dense_limit=config.dense_limit, table_limit=config.table_limit,
        ).lattice
    if kind == "chain":
        return chain(_require(args.n, "--n", kind))
    if kind == "boolean":
        return boolean_lattice(_require(args.n, "--n", kind))
    if kind == "n5":
        return n5()
    if kind == "m3":
        return m3()
    if args.source is None:
        raise BadParamsError(f"build {kind} needs --source")
    source = read_lattice(args.source, config.table_limit)
    if kind == "dual":
        return dual(source)
    if kind == "double":
        return double_interval(source, _element(source, args.a, "--a"), _element(source, args.b, "--b"))
    if args.other is None:
        raise BadParamsError("build product needs --other")
    return product(source, read_lattice(args.other, config.table_limit))


def cmd_build(args: argparse.Namespace, config: Config) -> int:
    lattice = build_lattice(args, config)
    logger.info(f"Built {args.kind}: {lattice.size} elements, {len(lattice.covers)} covers")
    if args.out:
        write_lattice(lattice, args.out)
    else:
        print(f"{args.kind}: {lattice.size} elements, {len(lattice.ji)} join-irreducibles")
    return 0


def cmd_analyze(args: argparse.Namespace, config: Config) -> int:
    lattice = read_lattice(args.lattice, config.table_limit)
    ji = set(lattice.ji)
    d_edges = sum(1 for a, q in join_dependency(lattice) if a in ji)
    print(f"size: {lattice.size}")
    print(f"join-irreducibles: {len(lattice.ji)}")
    print(f"meet-irreducibles: {len(lattice.mi)}")
    print(f"bounded: {is_bounded(lattice)}")
    print(f"semidistributive: {is_semidistributive(lattice)}")
    print(f"subdirectly irreducible: {is_subdirectly_irreducible(lattice)}")
    print(f"D edges: {d_edges}")
    return 0


def _outcome(success: bool, expect_fail: bool) -> int:
    return 0 if success != expect_fail else 1


def cmd_check(args: argparse.Namespace, config: Config) -> int:
    lattice = read_lattice(args.lattice, config.table_limit)
    if args.gzp:
        identity = gazpacho(GazpachoIndex.parse(args.gzp), max_branches=config.max_gazpacho_branches)
    elif args.identity:
        if Path(args.identity).suffix == ".json" or Path(args.identity).exists():
            identity = read_identity(args.identity)
        else:
            identity = named_identity(args.identity)
    else:
        raise BadParamsError("check needs --identity or --gzp")
    if args.dual:
        identity = dual_identity(identity)

    verdict = holds(
        lattice, identity, parallel=args.parallel,
        threads=args.threads or config.threads, budget=args.budget or config.evaluation_budget,
    )
    if verdict.holds:
        print(f"{identity.name}: Holds")
    else:
        names = lattice.names
        assignment = ", ".join(f"x{i}={names[v]}" for i, v in enumerate(verdict.counterexample))
        print(f"{identity.name}: Fails at {assignment}")
        print(f"  lhs = {names[verdict.lhs_value]}, rhs = {names[verdict.rhs_value]}")
        logger.debug(f"lhs term: {format_term(identity.lhs)}")
    return _outcome(verdict.holds, args.expect_fail)


def cmd_reproduce(args: argparse.Namespace, config: Config) -> int:
    options = ReproduceOptions.from_config(config, parallel=not args.no_parallel)
    if args.threads:
        options.threads = args.threads
    if args.budget:
        options.evaluation_budget = args.budget
    options.corrupt_splitting = args.corrupt_splitting
    only = args.only.split(",") if args.only else None
    if only:
        known = {claim_id for claim_id, _, _ in CLAIMS}
        unknown = [c for c in only if c not in known]
        if unknown:
            raise BadParamsError(f"unknown claims: {', '.join(unknown)}")

    report_path = args.out or config.report_file_path
    previous = load_report(report_path)
    report = run_reproduce(options, only)
    for claim in report.claims:
        status = "PASS" if claim.passed else "FAIL"
        print(f"{status}  {claim.claim_id:<20} {claim.seconds:>8.2f}s  {claim.detail}")
    for change in report.changes_since(previous):
        logger.warning(f"Verdict changed since {previous.get('generated_at')}: {change}")
        print(f"changed  {change}")
    save_report(report.to_dict(), report_path)
    return 0 if report.passed else 1


def cmd_dot(args: argparse.Namespace, config: Config) -> int:
    lattice = read_lattice(args.lattice, config.table_limit)
    out = args.out or str(Path(args.lattice).with_suffix(".dot"))
    write_dot(lattice, out, title=Path(args.lattice).stem, max_size=config.max_dot_size)
    return 0


def cmd_measure(args: argparse.Namespace, config: Config) -> int:
    if args.kind == "tamari":
        mu = tamari_measure(_require(args.n, "--n", "measure tamari"))
    elif args.kind == "bm1":
        mu = bm1_measure(_require(args.m, "--m", "measure bm1"))
    else:
        mu = bm2_measure(_require(args.m, "--m", "measure bm2"))
    phi = measure_to_hom(mu)
    props = hom_properties(mu, phi)
    print(f"measure on {mu.length} points into a {mu.target.size}-element lattice, {mu.spec()}")
    print(f"zero-free: {props.zero_empty}, one-to-one: {props.injective}, lattice hom: {props.lattice_hom}")
    if args.out:
        write_measure(mu, args.out)
    return 0


def _print_map(mapping: LatticeMap) -> None:
    for x, y in enumerate(mapping.images):
        print(f"  {mapping.source.names[x]} -> {mapping.target.names[y]}")


def cmd_embed(args: argparse.Namespace, config: Config) -> int:
    source = read_lattice(args.source, config.table_limit)
    if args.target_cambrian:
        spec = parse_cambrian_ref(args.target_cambrian)
        target = build_cambrian(
            spec, max_n=config.max_cambrian,
            dense_limit=config.dense_limit, table_limit=config.table_limit,
        )
        label = str(spec)
    elif args.target:
        target = read_lattice(args.target, config.table_limit)
        label = args.target
    else:
        raise BadParamsError("embed needs --target or --target-cambrian")
    mapping = generator_embedding_search(
        source, target, budget=args.budget or config.search_budget,
        parallel=args.parallel, threads=args.threads or config.threads,
    )
    if mapping is None:
        print(f"no embedding into {label}")
        return _outcome(False, args.expect_fail)
    print(f"embedding into {label}:")
    _print_map(mapping)
    if args.out:
        write_map(mapping, args.out)
    return _outcome(True, args.expect_fail)


def cmd_embed_scan(args: argparse.Namespace, config: Config) -> int:
    source = read_lattice(args.source, config.table_limit)
    for n in range(1, args.max_n + 1):
        found = si_embedding_scan(
            source, n, budget=args.budget or config.search_budget,
            parallel=args.parallel, threads=args.threads or config.threads,
        )
        if found is not None:
            spec, mapping = found
            print(f"embedding into {spec} (hence into P({n})):")
            _print_map(mapping)
            if args.out:
                write_map(mapping, args.out)
            return _outcome(True, args.expect_fail)
        print(f"no embedding into P({n})")
    return _outcome(False, args.expect_fail)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="latticeforge", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="alternative configuration file")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def scan_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--parallel", action="store_true")
        p.add_argument("--threads", type=int)
        p.add_argument("--budget", type=int)
        p.add_argument("--expect-fail", action="store_true")

    p = sub.add_parser("build", help="build a lattice and write it as JSON")
    p.add_argument("kind", choices=BUILD_KINDS)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--u", help="comma-separated U for cambrian")
    p.add_argument("--source", help="input lattice for double, product and dual")
    p.add_argument("--other", help="second factor for product")
    p.add_argument("--a", help="lower end of the doubled interval (name or id)")
    p.add_argument("--b", help="upper end of the doubled interval (name or id)")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_build)

    p = sub.add_parser("analyze", help="print structural properties")
    p.add_argument("--lattice", required=True)
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("check", help="check an identity exhaustively")
    p.add_argument("--lattice", required=True)
    p.add_argument("--identity", help="veg1, veg2, split-b33 or an identity JSON file")
    p.add_argument("--gzp", help="Gazpacho index m1,m2,...")
    p.add_argument("--dual", action="store_true", help="check the dual identity")
    scan_flags(p)
    p.set_defaults(handler=cmd_check)

    p = sub.add_parser("reproduce", help="run the claim battery")
    p.add_argument("--only", help="comma-separated claim ids")
    p.add_argument("--threads", type=int)
    p.add_argument("--budget", type=int)
    p.add_argument("--no-parallel", action="store_true")
    p.add_argument("--corrupt-splitting", action="store_true", help="negative control")
    p.add_argument("--out")
    p.set_defaults(handler=cmd_reproduce)

    p = sub.add_parser("dot", help="write a Hasse diagram in DOT")
    p.add_argument("--lattice", required=True)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_dot)

    p = sub.add_parser("measure", help="build a polarized measure")
    p.add_argument("kind", choices=("tamari", "bm1", "bm2"))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_measure)

    p = sub.add_parser("embed", help="search an embedding by generator images")
    p.add_argument("--source", required=True)
    p.add_argument("--target")
    p.add_argument("--target-cambrian", help="n=<int>,u=<list>")
    p.add_argument("--out")
    scan_flags(p)
    p.set_defaults(handler=cmd_embed)

    p = sub.add_parser("embed-scan", help="search embeddings into every A_U(n)")
    p.add_argument("--source", required=True)
    p.add_argument("--max-n", type=int, required=True)
    p.add_argument("--out")
    scan_flags(p)
    p.set_defaults(handler=cmd_embed_scan)
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    """Dispatch a subcommand and map errors to exit codes."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config)
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"Configuration error: {e}")
        return 2

    try:
        return args.handler(args, config)
    except (InputError, ResourceError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 2
    except LatticeForgeError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
