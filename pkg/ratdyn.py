"""
ratdyn command-line entry point

    python ratdyn.py simulate --p 3 --q 1 --r 2 --x0 1 --x1 1 --steps 100
    python ratdyn.py analyze --p 9 --q 0.5 --r 2
    python ratdyn.py certify --claim claim3 --out report.json

Exit codes: 0 success, 1 usage error, 2 parameter or domain error, 3 refuted certificate.
"""
import argparse
import json
import logging
import sys
from typing import Callable, Dict, List, Optional

import config
from analysis import behavior_report, period_two_solutions, prime_period_two, refine_invariant_interval, schur_cohn_las
from certify.certificates import CLAIMS, run_claim
from certify.plans import SUBCASES
from dynamics import classify_limit, envelope, simulate, simulate_params33, subsequence_trend
from errors import CertificateRefuted, DomainError, ParameterError, PolycoreError
from params import Form, NormParams, Params33, to_pqr, to_pqr_l, validate
from sweep import Range, SweepConfig, run_sweep, validate_theorem, write_csv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_REFUTED = 3


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code 1 instead of 2"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(data) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2) + "\n"


def _emit(text: str, out: Optional[str]):
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)


def _add_pqr(parser: argparse.ArgumentParser, six: bool = True):
    parser.add_argument("--p", type=float)
    parser.add_argument("--q", type=float)
    parser.add_argument("--r", type=float)
    parser.add_argument("--L", type=float, help="lower end of the state space (ThreeTwoL form)")
    if six:
        for name in ("alpha", "beta", "gamma", "A", "B", "C"):
            parser.add_argument(f"--{name}", type=float)


def _params33(args) -> Optional[Params33]:
    names = ("alpha", "beta", "gamma", "A", "B", "C")
    given = [getattr(args, name, None) for name in names]
    if all(v is None for v in given):
        return None
    if any(v is None for v in given):
        raise UsageError("six-parameter form needs all of --alpha --beta --gamma --A --B --C")
    params = Params33(*given)
    report = validate(params)
    if not report.valid:
        raise ParameterError("; ".join(report.messages))
    return params


def _norm(args) -> NormParams:
    """NormParams from --p --q --r [--L] or from the six-parameter flags"""
    params = _params33(args)
    if params is not None:
        if params.A == 0:
            return to_pqr(params)
        norm, _ = to_pqr_l(params)
        return norm
    if args.p is None or args.q is None or args.r is None:
        raise UsageError("give --p --q --r or the six parameters --alpha ... --C")
    if args.L is not None:
        return NormParams.three_two_l(args.p, args.q, args.r, args.L)
    return NormParams.three_two(args.p, args.q, args.r)


def simulate_command(args) -> int:
    if args.steps < 0:
        raise UsageError("--steps must be nonnegative")
    params = _params33(args)
    if params is not None:
        values = simulate_params33(params, args.x0, args.x1, args.steps)
        limit = None
    else:
        norm = _norm(args)
        orbit = simulate(norm, args.x0, args.x1, args.steps)
        values = orbit.samples
        limit = classify_limit(orbit, args.tol, args.window) if orbit.length > args.window else None

    if args.format == "json":
        data = {'values': [float(v) for v in values], 'limit': limit.to_dict() if limit else None}
        _emit(_dump(data), args.out)
    else:
        # x_{-1} is an input; rows start at x_0
        lines = ["index,value"] + [f"{i},{v:.17g}" for i, v in enumerate(values[1:])]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def analyze_command(args) -> int:
    norm = _norm(args)
    report = behavior_report(norm)
    data = {
        'params': norm.to_dict(),
        'envelope': envelope(norm).to_dict() if norm.form == Form.THREE_TWO or norm.origin else None,
        'stability': schur_cohn_las(norm.p, norm.q, norm.r).to_dict(),
        'behavior': report.to_dict(),
    }
    if args.trend:
        orbit = simulate(norm, norm.equilibrium * 0.5 + norm.L, norm.equilibrium * 2.0, args.trend)
        data['trend'] = {key: value.value for key, value in subsequence_trend(orbit).items()}
    _emit(_dump(data), args.out)
    return EXIT_OK


def period2_command(args) -> int:
    norm = _norm(args)
    solver = prime_period_two if args.prime else period_two_solutions
    pair = solver(norm.p, norm.q, norm.r, norm.L)
    _emit("none\n" if pair is None else f"{pair.m:.17g},{pair.M:.17g}\n", args.out)
    return EXIT_OK


def interval_command(args) -> int:
    norm = _norm(args)
    nest = refine_invariant_interval(norm, args.tol, args.max_iter)
    logger.info(f"Interval nest {nest.outcome.value} after {len(nest.levels) - 1} refinements")
    lines = ["level,m,M"] + [f"{i},{m:.17g},{M:.17g}" for i, (m, M) in enumerate(nest.levels)]
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def certify_command(args) -> int:
    if args.subcase and args.claim not in ("claim3", "claim4"):
        raise UsageError("--subcase applies to claim3 and claim4 only")
    certificates = run_claim(args.claim, args.subcase, samples=args.samples, seed=args.seed,
                             threads=args.threads, timing=not args.no_timing)
    refuted = [cert for cert in certificates if cert['verdict'] == "Refuted"]
    data = {'success': not refuted, 'claim': args.claim, 'certificates': certificates}
    _emit(_dump(data), args.out)
    if refuted:
        raise CertificateRefuted(refuted[0]['claim'], refuted[0]['witness'])
    return EXIT_OK


def _range(values: List[float]) -> Range:
    lo, hi = values[:2]
    steps = int(values[2]) if len(values) == 3 else 1
    return Range(lo, hi, steps)


def _sweep_config(args) -> SweepConfig:
    return SweepConfig(
        p=_range(args.p_range),
        q=_range(args.q_range),
        r=_range(args.r_range),
        orbits=args.orbits,
        seed=args.seed,
        step_cap=args.step_cap,
        tol=args.tol,
        window=args.window,
    )


def sweep_command(args) -> int:
    rows = run_sweep(_sweep_config(args), args.threads)
    _emit(write_csv(rows), args.out)
    failed = sum(1 for row in rows if row['error'])
    logger.info(f"{'✅' if not failed else '❌'} sweep finished: {len(rows)} cells, {failed} failed")
    return EXIT_OK


def validate_theorem_command(args) -> int:
    report = validate_theorem(_sweep_config(args), cells=args.cells, threads=args.threads)
    _emit(_dump(report.to_dict()), args.out)
    return EXIT_OK


COMMANDS: Dict[str, Callable] = {
    "simulate": simulate_command,
    "analyze": analyze_command,
    "period2": period2_command,
    "interval": interval_command,
    "certify": certify_command,
    "sweep": sweep_command,
    "validate-theorem": validate_theorem_command,
}


def build_parser() -> CliParser:
    parser = CliParser(prog="ratdyn", description="Global dynamics of x_{n+1} = (r + p x_n + x_{n-1}) / (q x_n + x_{n-1})")
    parser.add_argument("--log-level", default=config.LOG_LEVEL,
                        choices=("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"))
    parser.add_argument("--threads", type=int, default=config.THREADS, help="worker cap (RATDYN_THREADS)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="iterate the map and print the orbit")
    _add_pqr(p)
    p.add_argument("--x0", type=float, required=True, help="x_{-1}")
    p.add_argument("--x1", type=float, required=True, help="x_0")
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--tol", type=float, default=config.TOL)
    p.add_argument("--window", type=int, default=config.WINDOW)
    p.add_argument("--out")

    p = sub.add_parser("analyze", help="behavior report as JSON")
    _add_pqr(p)
    p.add_argument("--trend", type=int, default=0, help="also simulate this many steps and report subsequence trends")
    p.add_argument("--out")

    p = sub.add_parser("period2", help="solve for the (m, M) pair")
    _add_pqr(p)
    p.add_argument("--prime", action="store_true", help="solve for a genuine two-cycle instead")
    p.add_argument("--out")

    p = sub.add_parser("interval", help="invariant interval nest as CSV")
    _add_pqr(p)
    p.add_argument("--tol", type=float, default=config.REFINE_TOL)
    p.add_argument("--max-iter", type=int, default=config.REFINE_MAX_ITER)
    p.add_argument("--out")

    p = sub.add_parser("certify", help="exact positivity and identity certificates")
    p.add_argument("--claim", choices=CLAIMS, required=True)
    p.add_argument("--subcase", choices=SUBCASES)
    p.add_argument("--samples", type=int, default=config.SAMPLES)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-timing", action="store_true", help="omit wall_time for byte-identical reruns")
    p.add_argument("--out")

    for name, help_text, defaults in (
        ("sweep", "grid sweep over (p, q, r) as CSV", ([0.5, 2.0, 5], [0.5, 2.0, 5], [0.0, 4.0, 5])),
        ("validate-theorem", "Monte-Carlo check of the convergence theorem", ([0.05, 10.0], [0.05, 10.0], [0.0, 10.0])),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--p-range", type=float, nargs="+", default=defaults[0], metavar="V")
        p.add_argument("--q-range", type=float, nargs="+", default=defaults[1], metavar="V")
        p.add_argument("--r-range", type=float, nargs="+", default=defaults[2], metavar="V")
        p.add_argument("--orbits", type=int, default=20)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--step-cap", type=int, default=config.STEP_CAP)
        p.add_argument("--tol", type=float, default=config.TOL)
        p.add_argument("--window", type=int, default=config.WINDOW)
        p.add_argument("--out")
        if name == "validate-theorem":
            p.add_argument("--cells", type=int, default=200)
    return parser


def main(argv: List[str] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(format=config.LOG_FORMAT, level=getattr(logging, args.log_level), stream=sys.stderr)

    for name in ("p_range", "q_range", "r_range"):
        values = getattr(args, name, None)
        if values is not None and len(values) not in (2, 3):
            parser.error(f"--{name.replace('_', '-')} takes MIN MAX [STEPS]")

    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.error(str(e))
    except (ParameterError, DomainError) as e:
        logger.error(f"❌ {e}")
        return EXIT_DOMAIN
    except PolycoreError as e:
        logger.error(f"❌ {e}")
        return EXIT_DOMAIN
    except CertificateRefuted as e:
        logger.error(f"❌ {e}")
        return EXIT_REFUTED


if __name__ == '__main__':
    sys.exit(main())
