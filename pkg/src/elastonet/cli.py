"""Command-line front end.

Subcommands::

    respond       network.json -> responses.json (Laplace/frequency sweep)
    extract       network.json -> canonical.json (pole-residue form)
    characterize  network.json | canonical.json -> report.json
    synthesize    canonical.json -> generalized_network.json (+ verification)
    loci          (alpha, beta) -> loci.csv of realizable resonances
    roundtrip     extract + characterize + synthesize + compare in one pass

Exit codes: 0 success / checks pass, 1 checks fail, 2 parse or argument
failure, 3 all sweep points resonant, 4 inconsistent floppy mode, 5 response
not admissible, 6 internal-node placement failed.

All outputs are canonical JSON (sorted keys, two-space indent, shortest
round-trip floats): identical inputs and seed give byte-identical files.
The environment variable ELASTONET_SEED overrides --seed everywhere.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import jsonio
from .characterize import DEFAULT_TOL, check_canonical
from .errors import (
    AtResonance,
    ElastonetError,
    FloppyModeInconsistent,
    NotCharacterizable,
    PlacementFailed,
    SchemaError,
)
from .model import RayleighParams, assemble, network_from_dict
from .resonances import locus_table
from .response import (
    CLUSTER_TOL,
    FLOPPY_TOL,
    canonical_from_dict,
    canonical_to_dict,
    eliminate_massless,
    evaluate_reduced,
    extract_canonical,
)
from .synthesize import (
    SYNTH_ROUNDTRIP_TOL,
    generalized_to_dict,
    synthesize,
    verify_synthesis,
)

EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_ALL_RESONANT = 3
EXIT_FLOPPY = 4
EXIT_NOT_CHARACTERIZABLE = 5
EXIT_PLACEMENT = 6


def _seed(args):
    env = os.environ.get("ELASTONET_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise SchemaError(f"ELASTONET_SEED: not an integer ({env!r})") from exc
    return args.seed


def _write(args, payload):
    text = jsonio.dumps_canonical(payload)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_network(path):
    return network_from_dict(jsonio.load_json(path))


def _sweep_points(args):
    if args.lam:
        points = []
        for k, raw in enumerate(args.lam):
            try:
                re, im = (float(v) for v in raw.split(","))
            except ValueError as exc:
                raise SchemaError(
                    f"--lam[{k}]: expected RE,IM, got {raw!r}"
                ) from exc
            points.append(complex(re, im))
        return points
    if args.omega is None:
        raise SchemaError("respond needs either --omega START STOP COUNT or --lam")
    start, stop, count = args.omega
    count = int(count)
    if count < 1:
        raise SchemaError("--omega: COUNT must be >= 1")
    if args.scale == "log":
        if start <= 0 or stop <= 0:
            raise SchemaError("--omega: log scale needs positive START and STOP")
        omegas = np.logspace(np.log10(start), np.log10(stop), count)
    else:
        omegas = np.linspace(start, stop, count)
    return [1j * w for w in omegas]


def cmd_respond(args):
    net = _load_network(args.input)
    red = eliminate_massless(assemble(net))
    points = _sweep_points(args)

    def sample(lam):
        try:
            w = evaluate_reduced(red, lam, tol=args.tol).W.a
        except AtResonance:
            return {"lambda": jsonio.complex_pair(lam), "at_resonance": True}
        return {"lambda": jsonio.complex_pair(lam), "W": jsonio.matrix_pairs(w)}

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            entries = list(pool.map(sample, points))
    else:
        entries = [sample(lam) for lam in points]
    _write(args, entries)
    if all(e.get("at_resonance") for e in entries):
        return EXIT_ALL_RESONANT
    return 0


def cmd_extract(args):
    net = _load_network(args.input)
    cr = extract_canonical(
        assemble(net),
        tol_floppy=args.tol_floppy,
        tol_cluster=args.tol_cluster,
        seed=_seed(args),
    )
    _write(args, canonical_to_dict(cr))
    return 0


def _load_canonical_or_network(path):
    obj = jsonio.load_json(path)
    if isinstance(obj, dict) and "nodes" in obj:
        return network_from_dict(obj), None
    return None, canonical_from_dict(obj)


def cmd_characterize(args):
    net, cr = _load_canonical_or_network(args.input)
    if cr is None:
        cr = extract_canonical(assemble(net), seed=_seed(args))
    report = check_canonical(cr, tol=args.tol)
    _write(args, report.to_dict())
    return 0 if report.passed else EXIT_CHECK_FAILED


def _load_forbidden(path, d):
    if path is None:
        return ()
    obj = jsonio.load_json(path)
    points = jsonio.as_matrix(obj, "forbidden")
    if points.size and points.shape[1] != d:
        raise SchemaError(f"forbidden: expected {d} coordinates per point")
    return points


def cmd_synthesize(args):
    cr = canonical_from_dict(jsonio.load_json(args.input))
    seed = _seed(args)
    gn = synthesize(
        cr,
        epsilon_hull=args.epsilon,
        forbidden=_load_forbidden(args.forbidden, cr.dimension),
        seed=seed,
        check=False,
    )
    worst = verify_synthesis(gn, cr, n_samples=args.samples, seed=seed + 1)
    payload = generalized_to_dict(gn)
    payload["verification"] = {
        "n_lambda_samples": args.samples,
        "max_rel_error": float(worst),
    }
    _write(args, payload)
    return 0 if worst <= SYNTH_ROUNDTRIP_TOL else EXIT_CHECK_FAILED


def cmd_loci(args):
    if args.alpha < 0 or args.beta < 0:
        raise SchemaError("loci: alpha and beta must be >= 0")
    if args.points < 2:
        raise SchemaError("loci: --points must be >= 2")
    rows = locus_table(RayleighParams(args.alpha, args.beta), args.points)
    lines = ["re,im,sigma,piece_label"]
    for row in rows:
        lines.append(
            f"{row['re']!r},{row['im']!r},{row['sigma']!r},{row['piece_label']}"
        )
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_roundtrip(args):
    net = _load_network(args.input)
    seed = _seed(args)
    cr = extract_canonical(assemble(net), seed=seed)
    report = check_canonical(cr, tol=args.tol)
    payload = {
        "canonical": canonical_to_dict(cr),
        "characterization": report.to_dict(),
    }
    if report.passed:
        gn = synthesize(
            cr,
            epsilon_hull=args.epsilon,
            forbidden=_load_forbidden(args.forbidden, cr.dimension),
            seed=seed,
            check=False,
        )
        worst = verify_synthesis(gn, cr, n_samples=args.samples, seed=seed + 1)
        payload["network"] = generalized_to_dict(gn)
        payload["verification"] = {
            "n_lambda_samples": args.samples,
            "max_rel_error": float(worst),
        }
        passed = bool(worst <= SYNTH_ROUNDTRIP_TOL)
    else:
        passed = False
    payload["pass"] = passed
    _write(args, payload)
    return 0 if passed else EXIT_CHECK_FAILED


def build_parser():
    parser = argparse.ArgumentParser(
        prog="elastonet",
        description=(
            "Frequency response, admissibility checking and synthesis of "
            "proportionally damped mass-spring networks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, seed_default=0):
        p.add_argument("-o", "--output", help="output file (default: stdout)")
        p.add_argument(
            "--seed",
            type=int,
            default=seed_default,
            help=f"random seed (default {seed_default}; ELASTONET_SEED overrides)",
        )

    p = sub.add_parser("respond", help="evaluate the terminal response on a sweep")
    p.add_argument("input", help="network JSON file")
    p.add_argument(
        "--omega",
        nargs=3,
        type=float,
        metavar=("START", "STOP", "COUNT"),
        help="frequency sweep; evaluates lambda = i*omega",
    )
    p.add_argument("--scale", choices=("linear", "log"), default="linear")
    p.add_argument(
        "--lam",
        action="append",
        metavar="RE,IM",
        help="explicit complex Laplace point (repeatable; overrides --omega)",
    )
    p.add_argument("--jobs", type=int, default=1, help="parallel sweep evaluation")
    p.add_argument(
        "--tol",
        type=float,
        default=1e-10,
        help="relative singular-value threshold for resonance detection "
        "(default 1e-10)",
    )
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.set_defaults(func=cmd_respond)

    p = sub.add_parser("extract", help="extract the pole-residue canonical form")
    p.add_argument("input", help="network JSON file")
    p.add_argument(
        "--tol-floppy",
        type=float,
        default=FLOPPY_TOL,
        help=f"relative zero-stiffness mode threshold (default {FLOPPY_TOL})",
    )
    p.add_argument(
        "--tol-cluster",
        type=float,
        default=CLUSTER_TOL,
        help=f"relative eigenvalue clustering tolerance (default {CLUSTER_TOL})",
    )
    add_common(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser(
        "characterize",
        help="check admissibility of a network's response or a canonical form",
    )
    p.add_argument("input", help="network or canonical JSON file")
    p.add_argument(
        "--tol",
        type=float,
        default=DEFAULT_TOL,
        help=f"condition tolerance (default {DEFAULT_TOL})",
    )
    add_common(p)
    p.set_defaults(func=cmd_characterize)

    p = sub.add_parser("synthesize", help="build a network realizing a canonical form")
    p.add_argument("input", help="canonical JSON file")
    p.add_argument(
        "--epsilon",
        type=float,
        default=0.1,
        help="allowed distance of internal nodes from the terminal hull "
        "(default 0.1)",
    )
    p.add_argument("--forbidden", help="JSON file with points internal nodes avoid")
    p.add_argument(
        "--samples",
        type=int,
        default=50,
        help="number of verification points (default 50)",
    )
    add_common(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("loci", help="emit realizable resonance loci as CSV")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--points", type=int, default=100, help="points (default 100)")
    p.add_argument("-o", "--output", help="output CSV file (default: stdout)")
    p.set_defaults(func=cmd_loci)

    p = sub.add_parser(
        "roundtrip", help="extract, check, synthesize and compare in one pass"
    )
    p.add_argument("input", help="network JSON file")
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--forbidden", help="JSON file with points internal nodes avoid")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)
    add_common(p)
    p.set_defaults(func=cmd_roundtrip)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except FloppyModeInconsistent as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FLOPPY
    except NotCharacterizable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_CHARACTERIZABLE
    except PlacementFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PLACEMENT
    except ElastonetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
