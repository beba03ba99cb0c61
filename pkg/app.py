"""
QMF Toolkit - Command Line
==========================
Designs, verifies and deploys 0-SYM linear-phase IIR quadrature mirror filters.

Commands:
- maxflat / design / stopband: write a filter document
- verify: print a JSON report; exit 2 when a check fails
- fir: FIR cascade document at a requested accuracy
- sample / freq / family: CSV grids for plots
- roundtrip: perfect-reconstruction error of the cascade filter bank

Exit codes: 0 success, 1 input or validation error, 2 verification failure.
Run: python app.py <command> --help
"""

import argparse
import json
import logging
import sys

import numpy as np

import settings
from analysis import verify_filter
from cascade import Signal, filterbank_roundtrip, fir_approximate
from documents import load_cascade, load_filter, save_cascade, save_filter
from qmf_errors import QmfError, ValidationError
from symdesign import MaxflatId, PreimageSpec, build_from_preimages, design_stopband, maxflat, maxflat_family
from synthesis import freq_response, scaling_samples, wavelet_samples

logger = logging.getLogger("qmf")

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_FAILED = 2


# ==============================================================================
# ARGUMENT PARSING
# ==============================================================================

class _Parser(argparse.ArgumentParser):
    """Reports bad arguments as ValidationError so they exit with code 1."""

    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}", invariant="arguments")


def parse_lambda(text):
    """``re,im`` or ``circ:t`` for e^(i pi t)."""
    text = text.strip()
    try:
        if text.startswith("circ:"):
            return complex(np.exp(1j * np.pi * float(text[5:])))
        parts = text.split(",")
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise ValidationError(f"cannot read preimage {text!r}; use re,im or circ:t", invariant="lambda format")


def parse_angle(text):
    """Radians, or a multiple of pi written ``0.6pi``."""
    text = text.strip().lower()
    try:
        if text.endswith("pi"):
            factor = text[:-2].rstrip("*") or "1"
            return float(factor) * np.pi
        return float(text)
    except ValueError:
        raise ValidationError(f"cannot read angle {text!r}", invariant="angle format") from None


def parse_sign(text):
    try:
        value = int(text)
    except ValueError:
        value = None
    if value not in (1, -1):
        raise ValidationError(f"sign must be +1 or -1, got {text!r}", invariant="sign")
    return value


def build_parser():
    parser = _Parser(prog="qmf", description="Zero-symmetry QMF design toolkit",
                     formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--verbose", action="store_true", help="DEBUG-level logging")
    parser.add_argument("--log-file", help="also write log records to this file")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = commands.add_parser("maxflat", help="maximally flat filter E(n, delta)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_maxflat)

    p = commands.add_parser("design", help="filter from its preimages of one")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sign", type=parse_sign, default=1)
    p.add_argument("--lambda", dest="lambdas", type=parse_lambda, action="append", default=[])
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_design)

    p = commands.add_parser("stopband", help="filter with prescribed stopband zeros")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--sign", type=parse_sign, default=1)
    p.add_argument("--theta", dest="thetas", type=parse_angle, action="append", default=[])
    p.add_argument("--extra", type=parse_lambda, action="append", default=[])
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_stopband)

    p = commands.add_parser("verify", help="run every filter check")
    p.add_argument("--filter", required=True)
    p.add_argument("--grid", type=int, default=settings.ANALYSIS_GRID)
    p.add_argument("--cohen-max-cycle", type=int, default=settings.COHEN_MAX_CYCLE)
    p.set_defaults(handler=cmd_verify)

    p = commands.add_parser("fir", help="FIR cascade approximation")
    p.add_argument("--filter", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_fir)

    p = commands.add_parser("sample", help="scaling function or wavelet samples")
    p.add_argument("--cascade", required=True)
    p.add_argument("--function", choices=["scaling", "wavelet"], default="scaling")
    p.add_argument("--levels", type=int, default=settings.CASCADE_LEVELS)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_sample)

    p = commands.add_parser("freq", help="frequency response grid")
    p.add_argument("--filter", required=True)
    p.add_argument("--points", type=int, default=settings.FREQ_POINTS)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_freq)

    p = commands.add_parser("family", help="closed-form maxflat responses, one column per n")
    p.add_argument("--n", dest="ns", type=int, action="append", required=True)
    p.add_argument("--delta", type=int, default=0)
    p.add_argument("--points", type=int, default=settings.FREQ_POINTS)
    p.add_argument("--out", required=True)
    p.set_defaults(handler=cmd_family)

    p = commands.add_parser("roundtrip", help="two-channel filter bank reconstruction error")
    p.add_argument("--cascade", required=True)
    p.add_argument("--signal", required=True)
    p.set_defaults(handler=cmd_roundtrip)
    return parser


# ==============================================================================
# COMMANDS
# ==============================================================================

def cmd_maxflat(args):
    H = maxflat(MaxflatId(args.n, args.delta))
    save_filter(H, args.out)
    logger.info("✅ maxflat n=%d delta=%d (order %d) -> %s", args.n, args.delta, H.order, args.out)
    return EXIT_OK


def cmd_design(args):
    H = build_from_preimages(PreimageSpec(m=args.m, sign_at_i=args.sign, lambdas=tuple(args.lambdas)))
    save_filter(H, args.out)
    logger.info("✅ designed filter of order %d -> %s", H.order, args.out)
    return EXIT_OK


def cmd_stopband(args):
    H = design_stopband(args.m, args.sign, thetas=args.thetas, extra=args.extra)
    save_filter(H, args.out)
    logger.info("✅ stopband filter of order %d -> %s", H.order, args.out)
    return EXIT_OK


def cmd_verify(args):
    H = load_filter(args.filter)
    report = verify_filter(H, grid=args.grid, max_cycle=args.cohen_max_cycle)
    sys.stdout.write(json.dumps(report.to_dict(), indent=2) + "\n")
    if report.passed:
        logger.info("✅ %s passed every check", args.filter)
        return EXIT_OK
    failed = [name for name, ok in (("QMF", report.is_qmf), ("0-SYM", report.is_zero_symmetric),
                                    ("Cohen", report.cohen.passed)) if not ok]
    logger.warning("⚠️ %s failed: %s", args.filter, ", ".join(failed))
    return EXIT_FAILED


def cmd_fir(args):
    H = load_filter(args.filter)
    F = fir_approximate(H, args.eps)
    save_cascade(F, args.out)
    logger.info("✅ cascade with achieved error %.3g -> %s", F.achieved, args.out)
    return EXIT_OK


def cmd_sample(args):
    F = load_cascade(args.cascade)
    sampler = scaling_samples if args.function == "scaling" else wavelet_samples
    grid = sampler(F, args.levels)
    grid.to_csv(args.out)
    logger.info("✅ %d %s samples -> %s", len(grid), args.function, args.out)
    return EXIT_OK


def cmd_freq(args):
    grid = freq_response(load_filter(args.filter), args.points)
    grid.to_csv(args.out)
    logger.info("✅ %d response points -> %s", len(grid), args.out)
    return EXIT_OK


def cmd_family(args):
    frame = maxflat_family(args.ns, delta=args.delta, points=args.points)
    frame.to_csv(args.out, index=False, float_format=settings.CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info("✅ maxflat family %s -> %s", args.ns, args.out)
    return EXIT_OK


def cmd_roundtrip(args):
    F = load_cascade(args.cascade)
    x = Signal.from_csv(args.signal)
    error = filterbank_roundtrip(F, x)
    bound = 10.0 * F.epsilon * float(np.max(np.abs(x.samples))) + 1e-12
    sys.stdout.write(json.dumps({"max_error": error, "bound": bound, "length": len(x)}, indent=2) + "\n")
    if error <= bound:
        logger.info("✅ reconstruction error %.3g within %.3g", error, bound)
        return EXIT_OK
    logger.warning("⚠️ reconstruction error %.3g above %.3g", error, bound)
    return EXIT_FAILED


# ==============================================================================
# ENTRY POINT
# ==============================================================================

def configure_logging(verbose=False, log_file=None):
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, mode="w"))
        log_format = "%(asctime)s - %(levelname)s - %(name)s - %(message)s"
    else:
        log_format = "%(levelname)s %(message)s"
    logging.basicConfig(handlers=handlers, level=logging.DEBUG if verbose else logging.INFO,
                        format=log_format, force=True)


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except ValidationError as exc:
        configure_logging()
        logger.error("❌ %s", exc)
        return EXIT_INVALID

    configure_logging(args.verbose, args.log_file)
    try:
        return args.handler(args)
    except QmfError as exc:
        invariant = getattr(exc, "invariant", None)
        logger.error("❌ %s%s", exc, f" [{invariant}]" if invariant else "")
        return EXIT_INVALID
    except OSError as exc:
        logger.error("❌ %s", exc)
        return EXIT_INVALID


if __name__ == "__main__":
    raise SystemExit(main())
