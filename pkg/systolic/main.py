import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from systolic.config import get_settings
from systolic.models.errors import InputError, SystolicError

# Configure logging
logging.basicConfig(
    level=getattr(logging, get_settings().LOG_LEVEL.upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

GRAM_HELP = 'JSON file {"dim": b, "gram": [[...], ...]}; entries may be decimal strings in exact mode'


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", choices=["exact", "float"], default="float",
                        help="exact rational certification or double precision (default: float)")
    parser.add_argument("--seed", type=int, default=0, help="seed recorded in the report and used for randomness")
    parser.add_argument("--out", default=None, help="report path (default: stdout)")


def create_application() -> argparse.ArgumentParser:
    """Create and configure the command-line parser"""
    settings = get_settings()

    parser = argparse.ArgumentParser(
        prog=settings.APP_NAME,
        description="Lattice, flat-torus and discrete systolic computations. "
                    "Exit codes: 0 success, 1 failed verification, 2 input error.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.APP_VERSION}")
    subcommands = parser.add_subparsers(dest="command", required=True)

    svp = subcommands.add_parser("svp", help="shortest vectors and λ1 of a lattice")
    svp.add_argument("--gram", required=True, help=GRAM_HELP)
    _common(svp)

    dual = subcommands.add_parser("dual", help="dual Gram matrix, its short vectors and isoduality")
    dual.add_argument("--gram", required=True, help=GRAM_HELP)
    _common(dual)

    for name, helptext in (("bm", "λ1(L)·λ1(L*) with its dual-critical certificate, or `bm optimize`"),
                           ("optimize", "random ascent of λ1(L)·λ1(L*) over unit-determinant lattices")):
        command = subcommands.add_parser(name, help=helptext)
        if name == "bm":
            command.add_argument("action", nargs="?", choices=["optimize"], default=None)
            command.add_argument("--gram", help=GRAM_HELP)
            command.add_argument("--dim", type=int, default=None, help="dimension for optimize")
        else:
            command.add_argument("--dim", type=int, required=True, help="lattice dimension, 1 to 6")
        command.add_argument("--restarts", type=int, default=10)
        command.add_argument("--iters", "--max-iters", dest="max_iters", type=int, default=3000,
                             help="iteration budget per restart")
        _common(command)

    perfect = subcommands.add_parser("perfect", help="dual perfection of the short-vector footprint")
    perfect.add_argument("--gram", required=True, help=GRAM_HELP)
    _common(perfect)

    torus = subcommands.add_parser("torus", help="systole identities and the main inequality on a flat torus")
    torus.add_argument("action", choices=["verify"])
    torus.add_argument("--gram", required=True, help=GRAM_HELP)
    _common(torus)

    hodge = subcommands.add_parser("hodge", help="harmonic forms, Hölder chains and loops on a meshed 2-torus")
    hodge.add_argument("action", choices=["run"])
    hodge.add_argument("--lattice", default=None,
                       help='JSON file {"basis": [v1, v2]} or a Gram document (default: unit square)')
    hodge.add_argument("--n", type=int, default=32, help="mesh resolution N (at least 8)")
    hodge.add_argument("--phi", default=None,
                       help="conformal potential in fractional coordinates x, y, e.g. a*sin(2*pi*x)*sin(2*pi*y)")
    hodge.add_argument("--param", action="append", default=None, help="bind a free symbol, name=value")
    hodge.add_argument("--classes", default="1,0;0,1", help='cohomology classes, e.g. "1,0;0,1"')
    hodge.add_argument("--ps", default="1,2,4,inf", help="exponents, must include 2")
    hodge.add_argument("--minimize", action="store_true", help="minimize the L^p norm for finite p > 2")
    hodge.add_argument("--csv", default=None, help="norm table CSV path")
    hodge.add_argument("--off", default=None, help="mesh OFF export path")
    _common(hodge)

    construct = subcommands.add_parser("construct", help="submersion metric from fiber densities and its checks")
    construct.add_argument("action", choices=["run"])
    construct.add_argument("--rho", required=True, help="fiber density ρ(u, v), periodic on [0,1)²")
    construct.add_argument("--c", default="0", help="kernel parameter c(u)")
    construct.add_argument("--l", type=float, default=1.0, help="base circle length")
    construct.add_argument("--grid", default="128x128", help="M x K grid")
    construct.add_argument("--n", type=int, default=64, help="mesh resolution for the Hodge checks")
    construct.add_argument("--param", action="append", default=None, help="bind a free symbol, name=value")
    construct.add_argument("--checks", default="all", help="all, or a comma list of submersion,minimality,harmonic,hebda")
    _common(construct)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    from systolic.routes import dispatch

    args = create_application().parse_args(argv)
    logger.info("Running %s", args.command)
    try:
        return dispatch(args)
    except ValidationError as e:
        logger.error("InputError: %s", e)
        return InputError.exit_code
    except SystolicError as e:
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
