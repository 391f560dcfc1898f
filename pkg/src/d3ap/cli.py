"""Command-line front end.

Every subcommand writes one CSV file and prints a one-line summary.  Exit
status: 0 success, 1 a check failed, 2 bad configuration.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import cancellation, csvio, experiments, identities, selftest, trace_fn, windows
from .divisor import SCAN_HEADER
from .ff_core import DegenerateInput, is_prime

OUTPUT_ENV = "D3AP_OUTPUT_DIR"


class ConfigError(Exception):
    pass


class CheckFailed(Exception):
    pass


def _ints(text):
    return [int(t) for t in str(text).replace(",", " ").split()]


def _floats(text):
    return [float(t) for t in str(text).replace(",", " ").split()]


def _scales(text):
    vals = _floats(text)
    if len(vals) != 3:
        raise argparse.ArgumentTypeError("expected three scales")
    return vals


def _int_or_power(text):
    """Accepts 1000000, 1e6 or 10**6."""
    t = str(text).strip()
    if "**" in t:
        b, e = t.split("**")
        return int(b) ** int(e)
    v = float(t)
    if v != int(v):
        raise argparse.ArgumentTypeError(f"{text} is not an integer")
    return int(v)


def _xs(text):
    return [_int_or_power(t) for t in str(text).replace(",", " ").split()]


# --- subcommands ------------------------------------------------------------------------

def cmd_kloosterman(args):
    if not is_prime(args.p):
        raise ConfigError("--p must be prime")
    if not 2 <= args.k <= 8:
        raise ConfigError("--k must lie in [2, 8]")
    spec = trace_fn.KloostermanSpec(args.k, args.shift, args.p)
    if args.weight:
        K = trace_fn.sheaf_weight_function(spec)
    else:
        table = trace_fn.kloosterman_all(args.k, args.p)
        K = trace_fn.PeriodicFunction(args.p, table[np.arange(args.p) * args.shift % args.p])
    rows = [[r, v.real, v.imag] for r, v in enumerate(K.values)]
    path = _write(args, ["residue", "re", "im"], rows)
    worst = float(np.abs(K.values[1:]).max())
    print(f"kloosterman k={args.k} p={args.p}: max |value| = {worst:.6g} (bound {args.k}) -> {path}")
    if worst > args.k + 1e-9:
        raise CheckFailed("Weil bound violated")


def cmd_verify_identities(args):
    p = args.p
    if not is_prime(p):
        raise ConfigError("--p must be prime")
    rng = np.random.default_rng(args.seed)
    Vs = [windows.dyadic_window(M) for M in args.scales]
    K = trace_fn.PeriodicFunction.random(p, rng)
    checks = []  # (IdentityCheck, allowed residual)
    for V in Vs[:2]:
        checks.append((identities.check_poisson(K, V, tol=args.tol), args.tol))
        a = int(rng.integers(1, p))
        checks.append((identities.check_poisson_progression(a, V, p, tol=args.tol), args.tol))
    checks.append((identities.check_tempered_voronoi(K, (Vs[0], Vs[1]), tol=args.voronoi_tol),
                   args.voronoi_tol))
    residues = range(1, p) if args.a is None else [a % p for a in args.a]
    for a in residues:
        if a == 0:
            raise ConfigError("residues must be nonzero mod p")
        Ka = trace_fn.PeriodicFunction.delta(a, p)
        rep = identities.compute_abcd(Vs, p, Ka, tol=args.tol)
        rep.params["a"] = a
        checks.append((rep.as_check(), max(1e-6 * abs(rep.lhs), args.tol)))
    if p <= 53:
        dev = identities.check_lemma_1060(p)
        checks.append((identities.IdentityCheck("delta-transform-vs-kl3", {"p": p}, dev, 0.0, dev, 0.0), 1e-10))
    rows = [c.row() + [allowed, c.residual <= allowed] for c, allowed in checks]
    path = _write(args, identities.CSV_HEADER + ["allowed", "passed"], rows)
    failed = [c.name for c, allowed in checks if not c.residual <= allowed]
    worst = max(c.residual for c, _ in checks)
    print(f"verify-identities p={p}: {len(checks)} checks, {len(failed)} failed, "
          f"max residual {worst:.3g} -> {path}")
    if failed:
        raise CheckFailed(f"identities failed: {sorted(set(failed))}")


def _scan_config(args, **extra):
    try:
        return experiments.ScanConfig(tuple(args.x), a=args.a, A=args.A, threads=args.threads, **extra)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_divisor_scan(args):
    if args.theta is None and not args.q:
        raise ConfigError("give --theta or --q")
    cfg = _scan_config(args, theta=args.theta, moduli=tuple(args.q) if args.q else None,
                       max_moduli=args.max_moduli, check_every=args.check_every)
    try:
        recs = experiments.single_scan(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    except AssertionError as exc:
        raise CheckFailed(str(exc)) from exc
    path = _write(args, SCAN_HEADER, [r.row() for r in recs])
    worst = max((abs(r.normalized) for r in recs), default=0.0)
    print(f"divisor-scan: {len(recs)} records, max q|Delta|/x = {worst:.6g} -> {path}")


def cmd_averaged_scan(args):
    cfg = _scan_config(args, q_exponents=tuple(args.q_exponent), smooth=not args.sharp_only)
    try:
        reps = experiments.averaged_scan(cfg)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    path = _write(args, experiments.AVERAGED_HEADER, [r.row() for r in reps])
    bad = [r for r in reps if abs(r.sigma0 - r.sigma1) > r.sum_abs_delta]
    parts = ", ".join(f"x={r.x} Q={r.Q:.4g}: {r.count} primes, ratio {r.ratio:.4g}" for r in reps)
    print(f"averaged-scan: {parts} -> {path}")
    if bad:
        raise CheckFailed("triangle inequality violated")


def _sheaf(args):
    if not is_prime(args.p):
        raise ConfigError("--p must be prime")
    if args.shift % args.p == 0:
        raise ConfigError("--shift must be nonzero mod p")
    return trace_fn.sheaf_weight_function(trace_fn.KloostermanSpec(args.k, args.shift, args.p))


def cmd_bilinear(args):
    K = _sheaf(args)
    M1 = args.m1 if args.m1 else math.sqrt(args.p)
    M2 = args.m2 if args.m2 else math.sqrt(args.p)
    V = windows.dyadic_window(1)
    rep = cancellation.bilinear_sum(K, V, V, M1, M2)
    path = _write(args, cancellation.BILINEAR_HEADER, [rep.row()])
    print(f"bilinear p={args.p} M1={M1:.6g} M2={M2:.6g}: |sum| = {abs(rep.value):.6g}, "
          f"ratio to trivial {rep.ratio_trivial:.4g}, to envelope {rep.ratio_envelope:.4g} -> {path}")
    if abs(rep.value) > rep.trivial_bound:
        raise CheckFailed("trivial bound violated")


def cmd_trilinear(args):
    K = _sheaf(args)
    N = (args.n1, args.n2, args.n3)
    if min(N) < 1:
        raise ConfigError("N values must be >= 1")
    rng = np.random.default_rng(args.seed)
    if args.coefficients == "ones":
        coeffs = [np.ones(2 * n + 1) for n in N]
    else:
        coeffs = [np.exp(2j * np.pi * rng.random(2 * n + 1)) for n in N]
    rep = cancellation.trilinear_sum(K, *coeffs, *N)
    path = _write(args, cancellation.TRILINEAR_HEADER, [rep.row()])
    print(f"trilinear p={args.p} N={N}: |sum| = {abs(rep.value):.6g}, grouping error "
          f"{rep.grouping_error:.3g}, ratio to envelope {rep.ratio_envelope:.4g} -> {path}")
    if rep.grouping_error > 1e-10 or abs(rep.value) > rep.trivial_bound:
        raise CheckFailed("trilinear consistency check failed")


def cmd_region_check(args):
    mu3 = args.mu3
    mu1, mu2 = args.mu1, args.mu2
    if mu1 is None and mu2 is None:
        mu1 = mu2 = (1 - mu3) / 2
    elif mu1 is None or mu2 is None:
        raise ConfigError("give both --mu1 and --mu2, or neither")
    try:
        prof = windows.ExponentProfile(args.kappa, (mu1, mu2, mu3), eta=args.eta, B=args.B)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    det = windows.region_detail(prof)
    rows = [[args.kappa, mu1, mu2, mu3, args.eta, str(det.verdict), *det.first_slack, *det.second_slack]]
    _write(args, ["kappa", "mu1", "mu2", "mu3", "eta", "verdict", "first_kappa_slack",
                  "first_mu3_slack", "second_kappa_slack", "second_mu3_lower_slack",
                  "second_mu3_upper_slack"], rows)
    print(det.verdict)


def cmd_selftest(args):
    rows = selftest.run(seed=args.seed, threads=args.threads)
    path = _write(args, selftest.HEADER, rows)
    failed = [f"{r[0]}.{r[1]}" for r in rows if not r[-1]]
    print(f"selftest: {len(rows)} checks, {len(failed)} failed -> {path}")
    if failed:
        raise CheckFailed(", ".join(failed))


# --- parser and config -----------------------------------------------------------------------

def _common(sp):
    sp.add_argument("--config", help="file of key = value lines; flags override it")
    sp.add_argument("--out", help="CSV path (default: <output dir>/<subcommand>.csv)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="d3ap", description="Finite-field transforms, "
                                     "summation identities and d_3 progression experiments.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    sp = sub.add_parser("kloosterman", help="tabulate Kl_k(a h; p)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=2)
    sp.add_argument("--shift", type=int, default=1)
    sp.add_argument("--weight", action="store_true", help="emit the signed weight function instead")
    sp.set_defaults(func=cmd_kloosterman)

    sp = sub.add_parser("verify-identities", help="Poisson, Voronoi and combined-formula residuals")
    sp.add_argument("--p", type=int, default=11)
    sp.add_argument("--tol", type=float, default=1e-8)
    sp.add_argument("--voronoi-tol", type=float, default=1e-7)
    sp.add_argument("--scales", type=_scales, default=[4.0, 4.0, 8.0])
    sp.add_argument("--a", type=_ints, default=None, help="residues (default: all units)")
    sp.set_defaults(func=cmd_verify_identities)

    sp = sub.add_parser("divisor-scan", help="Delta(x; q, a) for prime moduli")
    sp.add_argument("--x", type=_xs, required=True)
    sp.add_argument("--theta", type=float)
    sp.add_argument("--q", type=_ints)
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--A", type=float, default=1.0)
    sp.add_argument("--max-moduli", type=int)
    sp.add_argument("--check-every", type=int, default=1)
    sp.set_defaults(func=cmd_divisor_scan)

    sp = sub.add_parser("averaged-scan", help="sum over q ~ Q of |Delta(x; q, a)|")
    sp.add_argument("--x", type=_xs, required=True)
    sp.add_argument("--q-exponent", type=_floats, default=[0.45])
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--A", type=float, default=1.0)
    sp.add_argument("--sharp-only", action="store_true", help="skip the smooth sign convention")
    sp.set_defaults(func=cmd_averaged_scan)

    sp = sub.add_parser("bilinear", help="sum K(m1 m2) V(m1/M1) W(m2/M2)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--shift", type=int, default=1)
    sp.add_argument("--m1", type=float)
    sp.add_argument("--m2", type=float)
    sp.set_defaults(func=cmd_bilinear)

    sp = sub.add_parser("trilinear", help="type-III sum against the Kl_k weight")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--shift", type=int, default=1)
    sp.add_argument("--n1", type=int, default=8)
    sp.add_argument("--n2", type=int, default=8)
    sp.add_argument("--n3", type=int, default=16)
    sp.add_argument("--coefficients", choices=["ones", "random"], default="random")
    sp.set_defaults(func=cmd_trilinear)

    sp = sub.add_parser("region-check", help="which estimate covers an exponent triple")
    sp.add_argument("--kappa", type=float, required=True)
    sp.add_argument("--mu1", type=float)
    sp.add_argument("--mu2", type=float)
    sp.add_argument("--mu3", type=float, required=True)
    sp.add_argument("--eta", type=float, default=1e-3)
    sp.add_argument("--B", type=float, default=1.0)
    sp.set_defaults(func=cmd_region_check)

    sp = sub.add_parser("selftest", help="fast invariant suite over every module")
    sp.set_defaults(func=cmd_selftest)

    for sp in sub.choices.values():
        _common(sp)
    return parser


def read_config(path):
    """key = value lines, '#' comments; keys may use '-' or '_'."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    for i, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{i}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(subparser, values):
    actions = {a.dest: a for a in subparser._actions if a.dest not in ("help", "config")}
    defaults = {}
    for key, raw in values.items():
        if key not in actions:
            raise ConfigError(f"unknown config key: {key}")
        act = actions[key]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[key] = raw.lower() in ("1", "true", "yes", "on")
            continue
        try:
            val = act.type(raw) if act.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"bad value for {key}: {raw}") from exc
        if act.choices and val not in act.choices:
            raise ConfigError(f"bad value for {key}: {raw}")
        defaults[key] = val
        act.required = False
    subparser.set_defaults(**defaults)


def _write(args, header, rows):
    path = args.out
    if not path:
        path = os.path.join(os.environ.get(OUTPUT_ENV, "."), f"{args.command}.csv")
    return csvio.write_csv(path, header, rows)


def _prescan(argv):
    """The subcommand and --config value, found before full parsing."""
    command = next((a for a in argv if not a.startswith("-")), None)
    config = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            config = argv[i + 1]
        elif a.startswith("--config="):
            config = a.split("=", 1)[1]
    return command, config


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    subparsers = parser._subparsers._group_actions[0].choices
    command, config = _prescan(argv)
    try:
        if config and command in subparsers:
            _apply_config(subparsers[command], read_config(config))
        try:
            args = parser.parse_args(argv)
        except SystemExit as exc:
            return int(exc.code or 0)
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        args.func(args)
    except ConfigError as exc:
        print(f"d3ap: configuration error: {exc}", file=sys.stderr)
        return 2
    except (DegenerateInput, ValueError) as exc:
        print(f"d3ap: configuration error: {exc}", file=sys.stderr)
        return 2
    except (CheckFailed, identities.TruncationError) as exc:
        print(f"d3ap: check failed: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
