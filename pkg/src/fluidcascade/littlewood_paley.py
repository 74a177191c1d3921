"""Dyadic cutoffs, Littlewood-Paley shell projections and Besov norms.

Shell q >= 0 uses phi_q(xi) = chi(|xi|/2^(q+1)) - chi(|xi|/2^q), supported in
2^(q-1) <= |xi| <= 2^(q+1); shell -1 is chi itself.  The cutoff chi equals 1
on [0, 1/2], vanishes on [1, inf) and is glued smoothly in between.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleShellError
from .spectral import (
    BlockField,
    SparseSpectralField,
    l2_norm_exact,
    lp_norm,
    synthesize,
)

log = logging.getLogger(__name__)


def lam(q) -> float:
    """Dyadic scale 2^q."""
    return float(2.0**q)


def _psi(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = np.exp(-1.0 / x[pos])
    return out


def chi(t):
    """Smooth radial cutoff: 1 for t <= 1/2, 0 for t >= 1."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("chi is defined for nonnegative radii only")
    out = np.where(t <= 0.5, 1.0, 0.0)
    mid = (t > 0.5) & (t < 1.0)
    if np.any(mid):
        a = _psi(2.0 - 2.0 * t[mid])
        b = _psi(2.0 * t[mid] - 1.0)
        out[mid] = a / (a + b)
    return out if out.ndim else float(out)


def phi(t):
    t = np.asarray(t, dtype=float)
    return chi(t / 2.0) - chi(t)


def phi_radial(t, q: int):
    """phi_q evaluated at radius |xi| = t."""
    if q < -1:
        raise ValueError(f"shell index must be >= -1, got {q}")
    if q == -1:
        return chi(t)
    t = np.asarray(t, dtype=float)
    return chi(t / lam(q + 1)) - chi(t / lam(q))


def phi_q(xi, q: int):
    """phi_q at a wavevector (or each row of an (M, n) array)."""
    xi = np.asarray(xi, dtype=float)
    return phi_radial(np.linalg.norm(xi, axis=-1), q)


def low_pass_symbol(t, q: int):
    """Symbol of u_{<=q} = sum_{p=-1}^{q} u_p, telescoped to chi(|xi|/2^(q+1))."""
    if q < -1:
        raise ValueError(f"shell index must be >= -1, got {q}")
    return chi(np.asarray(t, dtype=float) / lam(q + 1))


def window_symbol(t, q: int):
    """Symbol of u_{q-1} + u_q + u_{q+1} (with u_{-2} = 0)."""
    if q < -1:
        raise ValueError(f"shell index must be >= -1, got {q}")
    t = np.asarray(t, dtype=float)
    upper = chi(t / lam(q + 2))
    if q - 1 <= -1:
        return upper
    return upper - chi(t / lam(q - 1))


def apply_radial(u, fn):
    """Apply a radial Fourier multiplier to a sparse or block field."""
    if isinstance(u, SparseSpectralField):
        return u.scale_modes(fn(u.norms()))
    if isinstance(u, BlockField):
        return u.scale_radial(fn)
    raise TypeError(f"unsupported field type {type(u).__name__}")


def shell_project(u, q: int):
    """Littlewood-Paley piece u_q."""
    return apply_radial(u, lambda t: phi_radial(t, q))


def low_pass(u, q: int):
    return apply_radial(u, lambda t: low_pass_symbol(t, q))


def window(u, q: int):
    return apply_radial(u, lambda t: window_symbol(t, q))


def active_shells(u) -> list[int]:
    """Shell indices q >= -1 on which u has nonzero content."""
    if isinstance(u, SparseSpectralField):
        r = u.norms()
        if len(r) == 0:
            return []
        rmin, rmax = r.min(), r.max()
    else:
        rmax = float(np.sqrt(u.dim) * u.max_abs_k())
        rmin = 0.0
    top = int(math.ceil(math.log2(rmax))) + 1 if rmax >= 1 else 0
    out = []
    for q in range(-1, top + 1):
        if q >= 0 and rmax <= lam(q - 1):
            continue
        if q >= 0 and rmin >= lam(q + 1):
            continue
        if isinstance(u, SparseSpectralField) and not np.any(phi_radial(r, q) != 0):
            continue
        out.append(q)
    return out


@dataclass(frozen=True)
class BesovParams:
    """Exponents of B^s_{r,l}: smoothness s, integrability r, summation l."""

    s: float
    r: float = 2.0
    l: float = math.inf

    def __post_init__(self):
        if not self.r >= 1 or not self.l >= 1:
            raise ValueError(f"Besov exponents need r >= 1 and l >= 1, got r={self.r}, l={self.l}")

    @property
    def r_conjugate(self) -> float:
        if self.r == 1:
            return math.inf
        if math.isinf(self.r):
            return 1.0
        return self.r / (self.r - 1.0)


@dataclass(frozen=True)
class ResolutionPolicy:
    """How per-shell L^r norms are evaluated.

    ``max_points`` caps the grid size N^n of any single shell synthesis.
    Shells above ``parseval_cap`` are only evaluated when r = 2.
    """

    max_points: int = 1 << 23
    sup_oversample: int = 2
    sup_rtol: float = 1e-6
    refine_sup: bool = True
    parseval_cap: int | None = None


@dataclass(frozen=True)
class ShellNorm:
    q: int
    lambda_q: float
    shell_lr_norm: float
    weighted: float
    method: str


def _pow2_at_least(x) -> int:
    return 1 << max(1, int(math.ceil(math.log2(max(x, 2)))))


def shell_lr_norm(uq: SparseSpectralField, r: float, policy: ResolutionPolicy, q: int = 0):
    """|u_q|_r for one shell piece; returns (value, method)."""
    if r == 2:
        return l2_norm_exact(uq), "parseval"
    if len(uq) == 0:
        return 0.0, "quadrature"
    if policy.parseval_cap is not None and q > policy.parseval_cap:
        raise InfeasibleShellError(q, f"shell q={q} is above the feasibility cap; only r=2 is available")
    n = uq.dim
    base = _pow2_at_least(2 * (1 + uq.max_abs_k()))
    if math.isinf(r):
        N = base * policy.sup_oversample
        if N**n > policy.max_points:
            N = base
    else:
        N = base
    if N**n > policy.max_points:
        raise InfeasibleShellError(q, f"shell q={q} needs a {N}^{n} grid (budget {policy.max_points})")
    val = lp_norm(synthesize(uq, N), r)
    if math.isinf(r) and policy.refine_sup:
        while (2 * N) ** n <= policy.max_points:
            N *= 2
            new = lp_norm(synthesize(uq, N), r)
            change = abs(new - val) / max(abs(new), 1e-300)
            val = max(val, new)
            if change < policy.sup_rtol:
                break
        else:
            log.debug("sup-norm refinement for shell %d stopped at budget N=%d", q, N)
    return val, "quadrature"


def besov_profile(u, params: BesovParams, policy: ResolutionPolicy | None = None) -> list[ShellNorm]:
    """Per-shell rows (q, lambda_q, |u_q|_r, lambda_q^s |u_q|_r, method)."""
    policy = policy or ResolutionPolicy()
    if isinstance(u, BlockField):
        if params.r != 2:
            raise InfeasibleShellError(-1, "block fields support only r=2 (Parseval) in besov_profile")
    rows = []
    for q in active_shells(u):
        uq = shell_project(u, q)
        if isinstance(uq, BlockField):
            val, method = l2_norm_exact(uq), "parseval"
        else:
            val, method = shell_lr_norm(uq, params.r, policy, q)
        lq = lam(q)
        rows.append(ShellNorm(q, lq, val, lq**params.s * val, method))
    return rows


def besov_norm(u, params: BesovParams, policy: ResolutionPolicy | None = None) -> float:
    """(sum_q (lambda_q^s |u_q|_r)^l)^(1/l), the sup when l = inf."""
    w = np.array([row.weighted for row in besov_profile(u, params, policy)])
    if len(w) == 0:
        return 0.0
    if math.isinf(params.l):
        return float(w.max())
    m = w.max()
    if m == 0:
        return 0.0
    return float(m * np.sum((w / m) ** params.l) ** (1.0 / params.l))


def write_besov_csv(rows: list[ShellNorm], path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["q", "lambda_q", "shell_lr_norm", "weighted", "method"])
        for row in rows:
            wr.writerow([row.q, repr(row.lambda_q), repr(row.shell_lr_norm), repr(row.weighted), row.method])
