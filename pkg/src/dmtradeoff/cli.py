"""Command-line front end.

CSV goes to stdout, a short human-readable summary to stderr. Exit codes:
0 success, 2 validation error, 3 insufficient data for a fit.
"""

import argparse
import csv
import io
import logging
import math
import sys

from . import code_criterion as cc
from .codebook_io import CodebookFormatError, read_codebook
from .config import SEED_ENV, FALLBACK_SEED, ConfigError, ExperimentConfig, coerce, load_config
from .info_metrics import SnrPoint
from .montecarlo import InsufficientDataError, fit_exponent, loglog_fit, sweep
from .tradeoff_curves import evaluate, jensen_curve

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_INSUFFICIENT = 3

OUTAGE_COLUMNS = ("snr_db", "r", "mode", "trials", "outages", "p_hat", "ci_lo", "ci_hi")
_D = ExperimentConfig()


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _complexes(text):
    try:
        return [complex(v.strip().replace(" ", "")) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated complex numbers, got {text!r}")


def _common_parser():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("experiment")
    g.add_argument("--config", help="TOML experiment manifest; flags override its keys")
    g.add_argument("--pdp", type=_floats, help=f"tap variances, e.g. 0.5,0.5 (default: {','.join(map(str, _D.pdp))})")
    g.add_argument("--correlation", type=_complexes,
                   help="slot correlation lags r(0..N-1), e.g. 1,0.5-0.5j (default: unset, PDP used)")
    g.add_argument("--N", type=int, help="number of slots (default: length of the PDP or correlation)")
    g.add_argument("--mt", dest="m_t", type=int, help=f"transmit antennas (default: {_D.m_t})")
    g.add_argument("--mr", dest="m_r", type=int, help=f"receive antennas (default: {_D.m_r})")
    g.add_argument("--snr-db", dest="snr_db", type=_floats,
                   help=f"SNR grid in dB (default: {','.join(map(str, _D.snr_db))})")
    g.add_argument("--rates", type=_floats, help=f"multiplexing rates (default: {','.join(map(str, _D.rates))})")
    g.add_argument("--trials", type=int, help=f"Monte Carlo trials per point (default: {_D.trials})")
    g.add_argument("--seed", type=int, help=f"master seed (default: ${SEED_ENV} or {FALLBACK_SEED})")
    g.add_argument("--workers", type=int, help=f"worker threads; never changes results (default: {_D.workers})")
    g.add_argument("--min-events", dest="min_events", type=int,
                   help=f"outage events needed for a point to enter a fit (default: {_D.min_events})")
    return p


def build_parser():
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="dmtradeoff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curve", parents=[common], help="theoretical tradeoff curve")
    p.add_argument("--rho", type=int, help="covariance rank (default: rank of the configured channel)")
    p.add_argument("--taps", type=int, help="tap count L of a frequency-selective channel (same as --rho)")
    p.add_argument("--step", type=float, help="also sample the curve every STEP in r (default: vertices only)")

    p = sub.add_parser("outage", parents=[common], help="Monte Carlo outage probabilities")
    p.add_argument("--event", choices=("levels", "mi"),
                   help=f"singularity-level event or mutual-information rate event (default: {_D.event})")

    p = sub.add_parser("jensen", parents=[common], help="Monte Carlo Jensen outage probabilities")
    p.add_argument("--mode", choices=("exact", "reduced"), help=f"Jensen channel form (default: {_D.mode})")

    p = sub.add_parser("exponent", parents=[common], help="fit outage exponents over the SNR grid")
    p.add_argument("--target", choices=("outage", "outage-mi", "jensen", "jensen-reduced"), default="outage",
                   help="event to simulate (default: outage)")
    p.add_argument("--probabilities", metavar="CSV",
                   help="fit given probabilities instead of simulating; columns snr_db,p[,trials,outages][,r]")

    p = sub.add_parser("criterion", parents=[common], help="check a codebook against the rank criterion")
    p.add_argument("codebook", help="codebook file")

    p = sub.add_parser("pep", parents=[common], help="pairwise error and union bounds of a codebook")
    p.add_argument("codebook", help="codebook file")
    p.add_argument("--pairs", action="store_true", help="emit one row per codeword pair")
    return parser


def _config_from_args(args, **extra):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    keys = ("pdp", "correlation", "N", "m_t", "m_r", "snr_db", "rates", "trials", "seed",
            "workers", "min_events", "event", "mode")
    overrides = {k: getattr(args, k, None) for k in keys}
    overrides.update(extra)
    return coerce(cfg, **overrides).resolved()


def cmd_curve(args, cfg):
    rho = args.rho if args.rho is not None else args.taps
    if args.rho is not None and args.taps is not None and args.rho != args.taps:
        raise ConfigError("--rho and --taps disagree")
    if rho is None:
        rho = cfg.covariance().rank
    if rho < 1:
        raise ConfigError("rank must be at least 1")
    curve = jensen_curve(rho, cfg.antennas)
    rows = {float(r): d for r, d in curve.vertices}
    if args.step is not None:
        if args.step <= 0:
            raise ConfigError("--step must be positive")
        k = 0
        while k * args.step < curve.m_min:
            r = round(k * args.step, 12)
            rows.setdefault(r, evaluate(curve, r))
            k += 1
    out = [(int(r) if float(r).is_integer() else r, d) for r, d in sorted(rows.items())]
    sys.stdout.write(_csv_text(("r", "d"), out))
    print(f"rho={rho} m_min={cfg.antennas.m_min} m_max={cfg.antennas.m_max} "
          f"d(0)={curve.vertices[0][1]}", file=sys.stderr)
    return EXIT_OK


def _outage_rows(estimates, label):
    rows = []
    for e in estimates:
        lo, hi = e.ci95
        rows.append((round(e.snr.db, 10), e.rate, label, e.trials, e.outages, e.p_hat, lo, hi))
    return rows


def _snrs(cfg):
    return [SnrPoint.from_db(db) for db in cfg.snr_db]


def cmd_outage(args, cfg):
    target = "outage" if cfg.event == "levels" else "outage-mi"
    est = sweep(cfg.covariance(), cfg.antennas, cfg.rates, _snrs(cfg), cfg.trials, cfg.seed,
                targets=(target,), workers=cfg.workers)
    sys.stdout.write(_csv_text(OUTAGE_COLUMNS, _outage_rows(est, cfg.event)))
    print(f"{len(est)} points, {cfg.trials} trials each, seed {cfg.seed}", file=sys.stderr)
    return EXIT_OK


def cmd_jensen(args, cfg):
    target = "jensen" if cfg.mode == "exact" else "jensen-reduced"
    est = sweep(cfg.covariance(), cfg.antennas, cfg.rates, _snrs(cfg), cfg.trials, cfg.seed,
                targets=(target,), workers=cfg.workers)
    sys.stdout.write(_csv_text(OUTAGE_COLUMNS, _outage_rows(est, cfg.mode)))
    print(f"{len(est)} points, {cfg.trials} trials each, seed {cfg.seed}", file=sys.stderr)
    return EXIT_OK


def _read_probabilities(path, default_rate):
    """Rows of (r, snr_db, p, trials, outages) from a synthetic-injection CSV."""
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(line for line in fh if not line.lstrip().startswith("#"))
            out = []
            for lineno, row in enumerate(reader, start=2):
                try:
                    snr_db = float(row["snr_db"])
                    p = float(row["p"]) if row.get("p") not in (None, "") else None
                    trials = int(row["trials"]) if row.get("trials") not in (None, "") else None
                    outages = int(row["outages"]) if row.get("outages") not in (None, "") else None
                    r = float(row["r"]) if row.get("r") not in (None, "") else default_rate
                except (KeyError, ValueError, TypeError) as exc:
                    raise ConfigError(f"{path}: line {lineno}: bad row ({exc})") from None
                if p is None:
                    if trials is None or outages is None:
                        raise ConfigError(f"{path}: line {lineno}: need p or trials+outages")
                    p = outages / trials
                if not 0 < p <= 1:
                    raise ConfigError(f"{path}: line {lineno}: probability {p} not in (0, 1]")
                out.append((r, snr_db, p, trials, outages))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    if not out:
        raise ConfigError(f"{path}: no data rows")
    return out


def _fit_given(rows, min_events):
    """Fit injected probabilities; rows with counts honour ``min_events``."""
    used = [row for row in rows if row[4] is None or row[4] >= min_events]
    excluded = tuple(row[1] for row in rows if row not in used)
    if len({row[1] for row in used}) < 2:
        raise InsufficientDataError(f"{len(used)} usable point(s); need 2 distinct SNRs")
    x = [row[1] / 10.0 for row in used]
    y = [math.log10(row[2]) for row in used]
    var = None
    if all(row[4] is not None for row in used):
        var = [(1 - row[2]) / (row[4] * math.log(10) ** 2) for row in used]
    slope, _, se = loglog_fit(x, y, var)
    return -slope, se, len(used), excluded


def cmd_exponent(args, cfg):
    cov = cfg.covariance()
    ant = cfg.antennas
    curve = jensen_curve(cov.rank, ant)
    results = []
    if args.probabilities:
        rows = _read_probabilities(args.probabilities, cfg.rates[0])
        for r in sorted({row[0] for row in rows}):
            d_hat, se, used, excluded = _fit_given([row for row in rows if row[0] == r], cfg.min_events)
            results.append((r, d_hat, se, used, excluded))
    else:
        est = sweep(cov, ant, cfg.rates, _snrs(cfg), cfg.trials, cfg.seed,
                    targets=(args.target,), workers=cfg.workers)
        for r in cfg.rates:
            fit = fit_exponent([e for e in est if e.rate == r], min_events=cfg.min_events)
            results.append((r, fit.d_hat, fit.stderr, fit.used_points, fit.excluded))
    rows = []
    for r, d_hat, se, used, excluded in results:
        theory = evaluate(curve, r)
        rows.append((r, d_hat, se, used, ";".join(_fmt(float(x)) for x in excluded), theory, d_hat - theory))
        print(f"r={_fmt(r)}: d_hat={d_hat:.4f} +/- {se:.4f} (theory {theory:.4f}, gap {d_hat - theory:+.4f}); "
              f"excluded {list(excluded) or 'none'}", file=sys.stderr)
    sys.stdout.write(_csv_text(
        ("r", "d_hat", "stderr", "used_points", "excluded_snr_db", "d_theory", "gap"), rows))
    return EXIT_OK


def _load_codebook_for(args, cfg):
    try:
        book = read_codebook(args.codebook)
    except OSError as exc:
        raise ConfigError(f"cannot read codebook {args.codebook}: {exc}") from None
    if cfg.N is None and cfg.slots != book.N and cfg.correlation is None:
        cfg = coerce(cfg, N=book.N)
    if cfg.slots != book.N:
        raise ConfigError(f"codebook block length N={book.N} differs from channel N={cfg.slots}")
    if book.m_t != cfg.m_t:
        raise ConfigError(f"codebook has m_t={book.m_t} but the channel config has m_t={cfg.m_t}")
    if len(book) < 2:
        raise ConfigError("codebook needs at least two codewords")
    cov = cfg.covariance()
    need = cov.rank * book.m_t
    if book.N < need:
        raise ConfigError(
            f"block length N={book.N} is below rho*m_t={cov.rank}*{book.m_t}={need}; "
            f"the rank criterion requires N >= rho*m_t"
        )
    return cfg, cov, book


def cmd_criterion(args, cfg):
    cfg, cov, book = _load_codebook_for(args, cfg)
    report = cc.check_codebook(cov, book)
    rows = [(p.i, p.j, p.rank, report.required_rank, p.passed, p.margin, p.lambda_min_nz)
            for p in report.pairs]
    sys.stdout.write(_csv_text(("i", "j", "rank", "required_rank", "pass", "margin", "lambda_min_nz"), rows))
    zero = [(p.i, p.j) for p in report.pairs if p.rank == 0]
    if zero:
        print(f"zero-difference pairs: {zero}", file=sys.stderr)
    print(f"lambda={_fmt(report.lambda_min_nz)} block_length_ok={report.block_length_ok} "
          f"required_rank={report.required_rank} verdict={'PASS' if report.passed else 'FAIL'}",
          file=sys.stderr)
    return EXIT_OK


def cmd_pep(args, cfg):
    cfg, cov, book = _load_codebook_for(args, cfg)
    ant = cfg.antennas
    cw = book.codewords
    if args.pairs:
        rows = [(db, i, j, cc.pep_upper_bound(cov, cw[i] - cw[j], ant, SnrPoint.from_db(db)))
                for db in cfg.snr_db for i, j in book.pairs()]
        sys.stdout.write(_csv_text(("snr_db", "i", "j", "pep_bound"), rows))
        return EXIT_OK
    rows = []
    for db in cfg.snr_db:
        for r in cfg.rates:
            if r <= 0:
                raise ConfigError("union bound needs r > 0")
            rep = cc.union_bound(cov, book, ant, SnrPoint.from_db(db), r)
            rows.append((db, r, rep.lam, rep.pep_sum, rep.union_bound))
    sys.stdout.write(_csv_text(("snr_db", "r", "lambda", "pep_sum", "union_bound"), rows))
    return EXIT_OK


COMMANDS = {
    "curve": cmd_curve,
    "outage": cmd_outage,
    "jensen": cmd_jensen,
    "exponent": cmd_exponent,
    "criterion": cmd_criterion,
    "pep": cmd_pep,
}


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigError, CodebookFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return EXIT_INSUFFICIENT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
