"""Forward energy-transfer quantities of the two constructions.

Everything here is computed from exact triad sums: the transfer coefficient
at the probe wavevector xi_q = (lambda_q, 1) for the Euler datum, the shell
L^1 ratio of the advection term, the A/B/C split of the shell flux for the
lattice-block datum, and a disjoint-bucket Bony split of a trilinear sum.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .constructions import MATERIALIZE_BUDGET, NseDatum, validate_gaps
from .errors import ConfigError, InfeasibleError
from .littlewood_paley import (
    BesovParams,
    active_shells,
    besov_norm,
    lam,
    shell_project,
)
from .spectral import (
    SparseSpectralField,
    advect,
    advect_at,
    leray_project,
    lp_norm,
    synthesize,
    trilinear,
)

# ---------------------------------------------------------------------------
# transfer at the probe wavevector


def probe_wavevector(q: int) -> np.ndarray:
    """xi_q = (lambda_q, 1)."""
    return np.array([int(2**q), 1], dtype=np.int64)


def euler_truncation(u0: SparseSpectralField) -> int:
    """Largest Q with a stored mode at (2^Q, 0)."""
    kx = u0.k[(u0.k[:, 1] == 0) & (u0.k[:, 0] > 0), 0]
    if len(kx) == 0:
        raise ConfigError("field carries no (2^q, 0) modes")
    return int(math.log2(int(kx.max())))


@dataclass(frozen=True)
class TransferReport:
    q: int
    s: float
    xi: tuple
    f: np.ndarray  # complex 2-vector
    leading_magnitude: float  # |f . e2| / lambda_q^(1-s)
    residual: float  # |f - (f . e2) e2|

    @property
    def residual_scaled(self) -> float:
        return self.residual * lam(self.q) ** self.s

    @property
    def probe_angle(self) -> float:
        return float(np.angle(self.f[1]))


def transfer_coefficient(u0: SparseSpectralField, q: int, s: float, Q: int | None = None) -> TransferReport:
    """f_q = p(xi_q) (u0 . grad u0)^(xi_q) by an exact triad sum."""
    if Q is None:
        Q = euler_truncation(u0)
    if not 1 <= q <= Q - 1:
        raise ConfigError(f"probe shell q={q} outside the validated range 1..{Q - 1}")
    xi = probe_wavevector(q)
    f = leray_project(xi.astype(float), advect_at(u0, u0, xi)[0])
    L = lam(q)
    return TransferReport(q, float(s), tuple(int(x) for x in xi), f,
                          abs(f[1]) / L ** (1.0 - s), float(abs(f[0])))


def mild_increment_prediction(u0: SparseSpectralField, q: int, s: float, t: float, Q: int | None = None) -> np.ndarray:
    """First-order prediction of u_hat(xi_q, t) from u_hat(xi_q, 0) = 0.

    The velocity obeys u_t = -p(u . grad u), so the increment is -t f_q.
    """
    return -float(t) * transfer_coefficient(u0, q, s, Q).f


def write_transfer_csv(reports: list[TransferReport], path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["q", "re_f1", "im_f1", "re_f2", "im_f2", "leading_magnitude", "residual_scaled"])
        for r in reports:
            wr.writerow([r.q, repr(float(r.f[0].real)), repr(float(r.f[0].imag)), repr(float(r.f[1].real)),
                         repr(float(r.f[1].imag)), repr(float(r.leading_magnitude)), repr(float(r.residual_scaled))])


# ---------------------------------------------------------------------------
# nonlinear shell estimate


def shell_l1(w: SparseSpectralField, max_points: int = 512 * 512, rtol: float = 1e-6) -> float:
    """|w|_1 on T^n by trapezoid quadrature, refined by grid doubling.

    |w| is not band-limited, so the alias-free grid is not enough: the grid
    starts at 4x oversampling and doubles until the value settles to ``rtol``
    or the next grid would exceed ``max_points``.
    """
    if len(w) == 0:
        return 0.0
    N = 1 << max(2, math.ceil(math.log2(4 * (w.max_abs_k() + 1))))
    if N**w.dim > max_points:
        raise InfeasibleError(f"L1 quadrature needs a {N}^{w.dim} grid (budget {max_points})")
    val = lp_norm(synthesize(w, N), 1)
    while (2 * N) ** w.dim <= max_points:
        N *= 2
        new = lp_norm(synthesize(w, N), 1)
        done = abs(new - val) <= rtol * abs(new)
        val = new
        if done:
            break
    return val


def shell_advect_l1_ratio(u: SparseSpectralField, v: SparseSpectralField, q: int, s: float, r: float,
                          policy=None) -> float:
    """|(u . grad v)_q|_1 lambda_q^(s-1) / (|u|_X |v|_X) with X = B^s_{r,inf}."""
    X = BesovParams(s, r, math.inf)
    nv = besov_norm(v, X, policy)
    if nv == 0:
        return 0.0
    nu = besov_norm(u, X, policy)
    wq = shell_project(advect(u, v), q)
    return shell_l1(wq) * lam(q) ** (s - 1.0) / (nu * nv)


# ---------------------------------------------------------------------------
# A / B / C decomposition of the shell flux


@dataclass
class TriadReport:
    j: int
    q: int
    A: float
    B: float
    C: float
    total: float | None = None
    bony_terms: dict = field(default_factory=dict)

    @property
    def B_over_lambda(self) -> float:
        return self.B / lam(self.q)

    @property
    def consistency_error(self) -> float:
        if self.total is None:
            return math.nan
        s = self.A + self.B + self.C
        return abs(s - self.total) / max(abs(self.total), abs(self.B), 1e-300)


def triad_energy_terms(datum: NseDatum, j: int, *, check: bool = True, rtol: float = 1e-10,
                       max_points: int | None = None) -> TriadReport:
    """A = sum_{k>j} <W_k, W_k, S_j>, B = <L_j, S_j, S_j>, C = -<S_j, S_j, U_below>.

    Here S_j is the shell piece of block j, L_j its lower piece, W_k the
    window (lower + shell) of block k and U_below all blocks before j.  With
    ``check`` the sum is compared against an independently grouped
    evaluation of <U, U, S_j>.
    """
    if not 1 <= j <= datum.J:
        raise ConfigError(f"block index j={j} outside 1..{datum.J}")
    kw = {} if max_points is None else {"max_points": max_points}
    budget = MATERIALIZE_BUDGET if max_points is None else max_points
    # every factor is materialized; refuse before doing any work
    needed = [("window", k) for k in range(j, datum.J + 1)] + [("below", j)]
    if check:
        needed.append(("all", None))
    for which, k in needed:
        if datum.count(which, k) > budget:
            raise InfeasibleError(f"triad terms for j={j} need the {which} piece (j={k}) with "
                                  f"{datum.count(which, k):.3g} lattice points (budget {budget:.3g})")
    S = datum.block_field("shell", j, **kw)
    L = datum.block_field("lower", j, **kw)
    A = 0.0
    for k in range(j + 1, datum.J + 1):
        Wk = datum.block_field("window", k, **kw)
        A += trilinear(Wk, Wk, S)
    B = trilinear(L, S, S)
    C = -trilinear(S, S, datum.block_field("below", j, **kw)) if j > 1 else 0.0
    rep = TriadReport(j, datum.q(j), A, B, C)
    if check:
        U = datum.block_field("all", **kw)
        rep.total = trilinear(U, U, S)
        if rep.consistency_error > rtol:
            raise ArithmeticError(f"A+B+C differs from <U,U,S_j> by {rep.consistency_error:.3e} (j={j})")
    return rep


def write_triads_csv(reports: list[TriadReport], datum: NseDatum, path):
    ratios = {b: r for a, b, r, _ in validate_gaps(datum.params).pairs}
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["j", "A", "B", "C", "B_over_lambda", "gap_ratio"])
        for r in reports:
            gap = ratios.get(r.q, math.nan)
            wr.writerow([r.j, repr(float(r.A)), repr(float(r.B)), repr(float(r.C)),
                         repr(float(r.B_over_lambda)), repr(float(gap))])


# ---------------------------------------------------------------------------
# Bony-type split


@dataclass(frozen=True)
class BonySplit:
    q: int
    high_high: float
    low_high: float
    high_low: float
    remainder: float
    total: float
    pairs: dict  # (p', p'') -> (bucket, value)

    @property
    def parts_sum(self) -> float:
        return self.high_high + self.low_high + self.high_low + self.remainder


def _bucket(p1: int, p2: int, q: int) -> str:
    if p1 >= q and p2 >= q and abs(p1 - p2) <= 2:
        return "high_high"
    if p1 <= q and q - 1 <= p2 <= q + 1:
        return "low_high"
    if q - 1 <= p1 <= q + 1 and p2 <= q:
        return "high_low"
    return "remainder"


def bony_split(a, b, q: int, c=None) -> BonySplit:
    """Split <a, b, c> (default c = b_q) over shell pairs (p', p'') of (a, b).

    Each pair of Littlewood-Paley pieces is assigned to exactly one bucket in
    the priority order high-high, low-high, high-low; pairs matching none go
    to ``remainder``.  The buckets therefore partition the triad sum.
    """
    if q < 0:
        raise ConfigError(f"shell index q={q} must be >= 0")
    if c is None:
        c = shell_project(b, q)
    sums = {"high_high": 0.0, "low_high": 0.0, "high_low": 0.0, "remainder": 0.0}
    pairs = {}
    b_pieces = {p: shell_project(b, p) for p in active_shells(b)}
    for p1 in active_shells(a):
        ap = shell_project(a, p1)
        for p2, bp in b_pieces.items():
            val = trilinear(ap, bp, c)
            name = _bucket(p1, p2, q)
            sums[name] += val
            pairs[(p1, p2)] = (name, val)
    total = trilinear(a, b, c)
    return BonySplit(q, sums["high_high"], sums["low_high"], sums["high_low"], sums["remainder"], total, pairs)


def write_bony_csv(splits: list[BonySplit], path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["q", "high_high", "low_high", "high_low", "remainder", "total"])
        for s in splits:
            wr.writerow([s.q, repr(s.high_high), repr(s.low_high), repr(s.high_low), repr(s.remainder), repr(s.total)])
