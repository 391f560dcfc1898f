"""Error-term scans for d_3 in progressions to prime moduli, and related checks."""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
import math

import numpy as np

from .divisor import (
    MAX_LIMIT,
    DivisorTable,
    all_progression_sums,
    coprime_sum,
    error_term,
    sieve_dk,
    smooth_coprime_sum,
    smooth_weight_table,
)
from .ff_core import euler_phi, is_prime, num_divisors, primes_in
from .summation import csum
from .windows import dyadic_window, fourier_continuous

THETA_MAX = Fraction(99, 100)


@dataclass
class ScanConfig:
    x_values: tuple
    theta: float | None = None  # moduli are the primes in (x^theta / 2, x^theta]
    moduli: tuple | None = None  # explicit prime moduli, used instead of theta
    q_exponents: tuple = (0.45,)  # averaged scans use q ~ Q = x^e, i.e. Q < q <= 2Q
    a: int = 1
    A: float = 1.0
    B: float = 1.0
    max_moduli: int | None = None  # keep at most this many moduli per x, evenly spaced
    check_every: int = 1  # full unit sweep on every k-th modulus
    smooth: bool = True  # also compute the smooth sign convention in averaged scans
    threads: int = 1
    output: str | None = None

    def __post_init__(self):
        xs = tuple(int(x) for x in self.x_values)
        if not xs:
            raise ValueError("need at least one x")
        if list(xs) != sorted(xs) or len(set(xs)) != len(xs):
            raise ValueError("x values must be strictly ascending")
        if xs[0] < 2 or xs[-1] > MAX_LIMIT:
            raise ValueError(f"x values must lie in [2, {MAX_LIMIT}]")
        self.x_values = xs
        if int(self.a) == 0:
            raise ValueError("a must be nonzero")
        self.a = int(self.a)
        if self.theta is not None and not 0 < self.theta <= THETA_MAX:
            raise ValueError("theta must lie in (0, 99/100]")
        for e in self.q_exponents:
            if not 0 < e <= THETA_MAX:
                raise ValueError("Q exponents must lie in (0, 99/100]")
        if self.moduli is not None:
            self.moduli = tuple(int(q) for q in self.moduli)
            for q in self.moduli:
                if not is_prime(q):
                    raise ValueError(f"modulus {q} is not prime")
        if self.check_every < 1 or self.threads < 1:
            raise ValueError("check_every and threads must be >= 1")


def _pool_map(fn, items, threads):
    """Ordered map; results come back in input order whatever the thread count."""
    if threads <= 1 or len(items) <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _thin(qs, k):
    if k is None or len(qs) <= k:
        return qs
    idx = np.linspace(0, len(qs) - 1, k).round().astype(int)
    return [qs[i] for i in sorted(set(idx))]


def scan_moduli(cfg: ScanConfig, x: int) -> list:
    if cfg.moduli is not None:
        qs = list(cfg.moduli)
        if cfg.theta is not None:
            top = x ** cfg.theta
            bad = [q for q in qs if q > top]
            if bad:
                raise ValueError(f"moduli {bad} exceed x^theta")
    elif cfg.theta is not None:
        top = math.floor(x ** cfg.theta)
        qs = primes_in(top // 2 + 1, top)
    else:
        raise ValueError("need theta or explicit moduli")
    qs = [q for q in qs if cfg.a % q != 0]
    return _thin(qs, cfg.max_moduli)


def unit_sweep(table: DivisorTable, q: int) -> Fraction:
    """Sum over all units a mod q of Delta(x; q, a), exactly; always 0."""
    sums = all_progression_sums(table, q)
    star = coprime_sum(table, q)
    units = int(sums[1:].sum())
    if units != star:
        raise AssertionError(f"progression partition broken at q={q}")
    return Fraction(units) - Fraction(star, euler_phi(q)) * (q - 1)


def single_scan(cfg: ScanConfig, tables: dict | None = None) -> list:
    """ScanRecord for each x and each modulus; exact unit sweeps on a sample."""
    out = []
    for x in cfg.x_values:
        table = (tables or {}).get(x) or sieve_dk(x, 3)
        qs = scan_moduli(cfg, x)

        def work(iq):
            i, q = iq
            rec = error_term(table, q, cfg.a)
            if i % cfg.check_every == 0 and unit_sweep(table, q) != 0:
                raise AssertionError(f"sum over units of Delta is nonzero at q={q}")
            return rec

        out.extend(_pool_map(work, list(enumerate(qs)), cfg.threads))
    return out


# --- averaged scans -----------------------------------------------------------------------

def _sign(v) -> int:
    return (v > 0) - (v < 0)


@dataclass
class AveragedReport:
    x: int
    Q: float
    a: int
    count: int
    sum_abs_delta: Fraction  # sum over q of |Delta(x; q, a)|
    sigma0: Fraction  # sum c_q S(x; q, a)
    sigma1: Fraction  # sum c_q S*(x; q) / phi(q)
    scale: float  # x / L^A
    signs: tuple = ()  # c_q in ascending q, sharp convention
    smooth: dict = field(default_factory=dict)

    @property
    def ratio(self) -> float:
        return float(self.sum_abs_delta) / self.scale

    def row(self):
        return [self.Q, self.x, self.a, self.sum_abs_delta, self.sigma0, self.sigma1, self.scale]


AVERAGED_HEADER = ["Q", "x", "a", "sum_abs_delta", "sigma0", "sigma1", "scale"]


def smooth_windows_for(x: int):
    """Three equal dyadic windows with M1 M2 M3 support inside [1, x]."""
    M = 2 ** max(0, math.floor(math.log2(x ** (1 / 3) / 2)))
    return [dyadic_window(M)] * 3


def averaged_report(table: DivisorTable, Q: float, a: int, A: float = 1.0,
                    weights: np.ndarray | None = None, threads: int = 1) -> AveragedReport:
    """Sum over primes Q < q <= 2Q, q not dividing a, of |Delta(x; q, a)|.

    c_q is the sign of the sharp difference; with ``weights`` (the smooth d_3
    weight table) the smooth sums give a second sign sequence, reported in
    ``smooth``.
    """
    x = table.limit
    qs = [q for q in primes_in(math.floor(Q) + 1, math.floor(2 * Q)) if a % q != 0]
    total = math.fsum(weights) if weights is not None else 0.0

    def work(q):
        rec = error_term(table, q, a)
        sm = None
        if weights is not None:
            r = a % q
            s = math.fsum(weights[r::q])
            star = total - math.fsum(weights[::q])
            sm = (s, star / euler_phi(q))
        return rec, sm

    results = _pool_map(work, qs, threads)
    signs = tuple(_sign(rec.delta) for rec, _ in results)
    # ordered, exact reductions
    sum_abs = sum((abs(rec.delta) for rec, _ in results), Fraction(0))
    sigma0 = sum((c * rec.S for c, (rec, _) in zip(signs, results)), Fraction(0))
    sigma1 = sum((c * rec.main for c, (rec, _) in zip(signs, results)), Fraction(0))
    L = math.log(2 * x)
    report = AveragedReport(x, Q, a, len(qs), sum_abs, sigma0, sigma1, x / L**A, signs)
    if weights is not None:
        sm_signs = [_sign(s - m) for _, (s, m) in results]
        report.smooth = {
            "sigma0": csum([c * s for c, (_, (s, _m)) in zip(sm_signs, results)]),
            "sigma1": csum([c * m for c, (_, (_s, m)) in zip(sm_signs, results)]),
            "sum_abs_delta": csum([abs(s - m) for _, (s, m) in results]),
            "sigma0_sharp_signs": csum([c * s for c, (_, (s, _m)) in zip(signs, results)]),
            "sigma1_sharp_signs": csum([c * m for c, (_, (_s, m)) in zip(signs, results)]),
            "sign_agreement": (sum(c == d for c, d in zip(signs, sm_signs)) / len(qs)) if qs else 1.0,
        }
    return report


def averaged_scan(cfg: ScanConfig, tables: dict | None = None) -> list:
    """One AveragedReport per (x, Q = x^e) pair, in config order."""
    out = []
    for x in cfg.x_values:
        table = (tables or {}).get(x) or sieve_dk(x, 3)
        weights = smooth_weight_table(smooth_windows_for(x)) if cfg.smooth else None
        for e in cfg.q_exponents:
            Q = x ** e
            if not 1 < Q < x:
                raise ValueError("Q must lie in (1, x)")
            out.append(averaged_report(table, Q, cfg.a, cfg.A, weights, cfg.threads))
    return out


# --- the coprime smooth-sum average ---------------------------------------------------------

@dataclass
class CoprimeAverageCheck:
    lhs: float
    main: float
    deviation: float
    envelope: float  # M2 M3 max d(q)^3 L^{6B}, constant 1

    @property
    def ratio(self):
        return self.deviation / self.envelope if self.envelope else 0.0


def check_lemma_6_4(sigma, Vs, Q=None, B: float = 1.0) -> CoprimeAverageCheck:
    """sum_q sigma_q S*(M; q) / phi(q) against V1^(0) V2^(0) V3^(0) sum_q sigma_q (phi(q)/q)^3 / phi(q).

    ``sigma`` is a mapping q -> sigma_q, or a constant / callable applied to
    the primes Q < q <= 2Q.
    """
    if isinstance(sigma, dict):
        items = sorted(sigma.items())
    else:
        if Q is None:
            raise ValueError("Q is needed unless sigma is a mapping")
        qs = primes_in(math.floor(Q) + 1, math.floor(2 * Q))
        items = [(q, sigma(q) if callable(sigma) else sigma) for q in qs]
    for q, s in items:
        if abs(s) > 1 + 1e-12:
            raise ValueError("need |sigma_q| <= 1")
    items = [(q, s) for q, s in items if s != 0]
    if not items:
        return CoprimeAverageCheck(0.0, 0.0, 0.0, 0.0)
    v0 = math.prod(fourier_continuous(V, 0.0).real for V in Vs)
    lhs_terms, main_terms = [], []
    for q, s in items:
        phi = euler_phi(q)
        lhs_terms.append(s * smooth_coprime_sum(Vs, q) / phi)
        main_terms.append(s * v0 * (phi / q) ** 3 / phi)
    lhs, main = csum(lhs_terms), csum(main_terms)
    Ms = sorted(V.hi / 2 for V in Vs)
    L = math.log(2 * math.prod(Ms))
    dq = max(num_divisors(q) for q, _ in items)
    env = Ms[1] * Ms[2] * dq**3 * L ** (6 * B)
    return CoprimeAverageCheck(lhs, main, abs(lhs - main), env)


# --- feasibility of the large-sieve hypothesis ------------------------------------------------

@dataclass(frozen=True)
class BFIFeasibility:
    feasible: bool
    lower: float  # log_x of x^eta max{...}
    upper: float  # log_x of x^(1-eta)
    qr_ok: bool


def bfi_feasibility(x: float, M: float, Q: float, R: float, eta: float) -> BFIFeasibility:
    """Region arithmetic for x^(1-eta) > M > x^eta max{Q, QR^4/x, Q^(1/2) R, Q^3 R^4/x^2}, QR < x.

    Done on log_x scale so large parameters cannot overflow.
    """
    if min(x, M, Q, R) < 1 or x <= 1:
        raise ValueError("parameters must be >= 1 and x > 1")
    lx = math.log(x)
    m, q, r = math.log(M) / lx, math.log(Q) / lx, math.log(R) / lx
    lower = eta + max(q, q + 4 * r - 1, q / 2 + r, 3 * q + 4 * r - 2)
    upper = 1 - eta
    qr_ok = q + r < 1
    return BFIFeasibility(qr_ok and lower < m < upper, lower, upper, qr_ok)
