"""Dealiased pseudo-spectral RK4 integration of Galerkin-truncated Euler (2D) and NSE (3D).

The state is the array of Fourier amplitudes u_hat(k) on the rfft half
lattice of an N^n grid, with every mode outside the cube |k_i| <= K removed
(K = floor(dealias N / 2), 3K < N), so quadratic products are exact within
the retained band.  This solves the truncated system, not the PDE.
"""
from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import BandError, ConfigError, NumericalError
from .littlewood_paley import BesovParams, ResolutionPolicy, besov_norm, phi_radial
from .spectral import TWO_PI, SparseSpectralField, _positive_half, leray_project

log = logging.getLogger(__name__)

MODELS = {"euler": 2, "nse": 3}


@dataclass(frozen=True)
class SolverConfig:
    model: str = "euler"
    nu: float = 0.0
    N: int = 64
    dt: float = 1e-4
    T: float = 1e-3
    dealias: float = 2.0 / 3.0
    probes: tuple = ()
    shell_probes: tuple = ()
    record_every: int = 1
    besov: tuple = ()  # (s, r) pairs for distances to the initial datum
    nonlinear: bool = True  # test hook: False integrates the heat/Stokes part only

    def __post_init__(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {sorted(MODELS)}, got {self.model!r}")
        if self.model == "euler" and self.nu != 0:
            log.warning("euler model forces nu = 0 (got %g)", self.nu)
            object.__setattr__(self, "nu", 0.0)
        if self.model == "nse" and not self.nu > 0:
            raise ConfigError("nse model requires nu > 0")
        if self.N < 8 or self.N & (self.N - 1):
            raise ConfigError(f"N must be a power of two >= 8, got {self.N}")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.T >= 0:
            raise ConfigError("T must be nonnegative")
        if not 0 < self.dealias <= 2.0 / 3.0:
            raise ConfigError("dealias fraction must lie in (0, 2/3]")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigError("record_every must be a positive integer")
        n = self.dim
        probes = tuple(tuple(int(c) for c in p) for p in self.probes)
        if any(len(p) != n for p in probes):
            raise ConfigError(f"probes must be {n}-vectors")
        object.__setattr__(self, "probes", probes)
        object.__setattr__(self, "shell_probes", tuple(int(q) for q in self.shell_probes))
        object.__setattr__(self, "besov", tuple((float(s), float(r)) for s, r in self.besov))
        steps = self.T / self.dt
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ConfigError(f"T={self.T} is not an integer multiple of dt={self.dt}")

    @property
    def dim(self) -> int:
        return MODELS[self.model]

    @property
    def nsteps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def kmax(self) -> int:
        return int(math.floor(self.dealias * self.N / 2 + 1e-12))

    def to_dict(self):
        d = asdict(self)
        d["probes"] = [list(p) for p in self.probes]
        d["shell_probes"] = list(self.shell_probes)
        d["besov"] = [list(b) for b in self.besov]
        return d


class Grid:
    """Wavenumber arrays and masks for the rfft half lattice."""

    def __init__(self, cfg: SolverConfig):
        n, N = cfg.dim, cfg.N
        self.n, self.N = n, N
        full = sfft.fftfreq(N, 1.0 / N)
        half = sfft.rfftfreq(N, 1.0 / N)
        axes = [full] * (n - 1) + [half]
        self.k = np.stack(np.meshgrid(*axes, indexing="ij"), axis=0)  # (n, ..., N//2+1)
        self.k2 = np.sum(self.k**2, axis=0)
        self.kabs = np.sqrt(self.k2)
        K = cfg.kmax
        self.K = K
        self.mask = np.all(np.abs(self.k) <= K, axis=0)
        self.k_masked = self.k * self.mask
        self.k2_masked = self.k2 * self.mask
        self.inv_k2 = np.divide(1.0, self.k2, out=np.zeros_like(self.k2), where=self.k2 > 0)
        # rfft half-plane double counting weights for Parseval sums
        w = np.full(self.k2.shape, 2.0)
        w[..., 0] = 1.0
        if N % 2 == 0:
            w[..., -1] = 1.0
        self.weight = w
        self.shape = (N,) * n

    def parseval(self, a, b=None, symbol=None) -> float:
        """(2pi)^n sum_k symbol(k) conj(a_hat).b_hat over the full lattice."""
        b = a if b is None else b
        dens = np.real(np.sum(np.conj(a) * b, axis=0)) * self.weight
        if symbol is not None:
            dens = dens * symbol
        return float(TWO_PI**self.n * dens.sum())

    def to_physical(self, uh):
        return sfft.irfftn(uh, s=self.shape, axes=tuple(range(-self.n, 0)), norm="forward")

    def to_spectral(self, u):
        return sfft.rfftn(u, axes=tuple(range(-self.n, 0)), norm="forward")

    def index(self, k):
        """Array index of wavevector k, plus whether the conjugate must be taken."""
        k = np.asarray(k, dtype=int)
        conj = k[-1] < 0
        if conj:
            k = -k
        return tuple(int(c) % self.N for c in k), conj


def encode_state(u: SparseSpectralField, cfg: SolverConfig, grid: Grid | None = None) -> np.ndarray:
    """Place a sparse field on the solver lattice; refuses modes outside the band."""
    grid = grid or Grid(cfg)
    if u.dim != cfg.dim:
        raise ConfigError(f"initial datum has dimension {u.dim}, model {cfg.model} needs {cfg.dim}")
    bad = np.any(np.abs(u.k) > grid.K, axis=1)
    if np.any(bad):
        raise BandError(u.k[bad], grid.K)
    uh = np.zeros((cfg.dim,) + grid.k2.shape, dtype=complex)
    sel = u.k[:, -1] >= 0
    idx = tuple((u.k[sel] % cfg.N).T)
    for c in range(cfg.dim):
        uh[(c,) + idx] = u.amp[sel, c]
    return uh


def decode_state(uh: np.ndarray, grid: Grid) -> SparseSpectralField:
    """All nonzero retained modes of a state as a sparse field (conjugates rebuilt)."""
    nz = np.any(uh != 0, axis=0) & grid.mask
    idx = np.argwhere(nz)
    k = np.stack([grid.k[d][tuple(idx.T)] for d in range(grid.n)], axis=1).astype(np.int64)
    amp = uh[(slice(None),) + tuple(idx.T)].T
    # k_n > 0 entries are independent; the k_n = 0 plane holds both k and -k
    pos = _positive_half(k)
    keep = (k[:, -1] > 0) | pos
    k, amp, pos = k[keep], amp[keep], pos[keep]
    k[~pos] *= -1
    amp[~pos] = np.conj(amp[~pos])
    zero = np.all(k == 0, axis=1)
    amp[zero] = amp[zero].real
    return SparseSpectralField.from_modes(grid.n, k, amp, add_conjugates=True, check_reality=False)


def _advection(uh, grid: Grid):
    """Dealiased (u . grad u)^ = div(u (x) u)^ for divergence-free u."""
    return 1j * _advection_k(uh, grid)


def _advection_k(uh, grid: Grid):
    """sum_i k_i (u_i u_j)^ on the band; the advection term is i times this."""
    n, km = grid.n, grid.k_masked
    u = grid.to_physical(uh)
    out = np.zeros_like(uh)
    for i in range(n):
        for j in range(i, n):
            pij = grid.to_spectral(u[i] * u[j])
            out[j] += km[i] * pij
            if j != i:
                out[i] += km[j] * pij
    return out


def _leray(vh, grid: Grid):
    dot = np.sum(grid.k * vh, axis=0) * grid.inv_k2
    return vh - grid.k * dot[None]


def rhs(uh, cfg: SolverConfig, grid: Grid | None = None) -> np.ndarray:
    """-P(u . grad u) - nu |k|^2 u_hat, restricted to the dealiased band."""
    grid = grid or Grid(cfg)
    if cfg.nonlinear:
        s = _leray(_advection_k(uh, grid), grid)
        s *= -1j
    else:
        s = np.zeros_like(uh)
    if cfg.nu:
        s -= (cfg.nu * grid.k2_masked) * uh
    return s


def step_rk4(uh, dt: float, cfg: SolverConfig, grid: Grid | None = None) -> np.ndarray:
    grid = grid or Grid(cfg)
    k1 = rhs(uh, cfg, grid)
    k2 = rhs(uh + 0.5 * dt * k1, cfg, grid)
    k3 = rhs(uh + 0.5 * dt * k2, cfg, grid)
    k4 = rhs(uh + dt * k3, cfg, grid)
    return uh + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class DiagnosticsSeries:
    config: SolverConfig
    times: list = field(default_factory=list)
    energy: list = field(default_factory=list)
    dissipation_rate: list = field(default_factory=list)  # |grad u|_2^2
    dissipation_integral: list = field(default_factory=list)  # E(t)
    mode_values: dict = field(default_factory=dict)  # probe -> list of complex n-vectors
    shell_pairing: dict = field(default_factory=dict)  # q -> int u~_q . u_q
    shell_energies: dict = field(default_factory=dict)  # q -> |u~_q|_2^2
    shell_viscous: dict = field(default_factory=dict)  # q -> int grad u~_q . grad u_q
    shell_flux: dict = field(default_factory=dict)  # q -> <u, u, u_q>
    besov_distance: dict = field(default_factory=dict)  # (s, r) -> distances to u(0)

    def arrays(self, name):
        return np.asarray(getattr(self, name))

    def probe(self, xi) -> np.ndarray:
        return np.asarray(self.mode_values[tuple(int(c) for c in xi)])

    def __len__(self):
        return len(self.times)


class _Recorder:
    def __init__(self, cfg: SolverConfig, grid: Grid, u_init: SparseSpectralField, policy):
        self.cfg, self.grid, self.policy = cfg, grid, policy
        self.reference = u_init
        self.series = DiagnosticsSeries(cfg)
        self.phi = {q: phi_radial(grid.kabs, q) for q in cfg.shell_probes}
        self.window = {}
        for q in cfg.shell_probes:
            w = sum(phi_radial(grid.kabs, p) for p in (q - 1, q, q + 1) if p >= -1)
            self.window[q] = w
        for p in cfg.probes:
            if max(abs(c) for c in p) > grid.K:
                raise BandError(np.array([p]), grid.K)
            self.series.mode_values[p] = []
        for q in cfg.shell_probes:
            for d in (self.series.shell_pairing, self.series.shell_energies,
                      self.series.shell_viscous, self.series.shell_flux):
                d[q] = []
        for b in cfg.besov:
            self.series.besov_distance[b] = []

    def rate(self, uh) -> float:
        return self.grid.parseval(uh, symbol=self.grid.k2)

    def record(self, t, uh, E):
        g, s = self.grid, self.series
        s.times.append(float(t))
        s.energy.append(g.parseval(uh))
        s.dissipation_rate.append(self.rate(uh))
        s.dissipation_integral.append(float(E))
        for p in self.cfg.probes:
            idx, conj = g.index(p)
            v = uh[(slice(None),) + idx]
            s.mode_values[p].append(np.conj(v) if conj else v.copy())
        if self.cfg.shell_probes:
            adv = _advection(uh, g)
            for q in self.cfg.shell_probes:
                phi, win = self.phi[q], self.window[q]
                s.shell_pairing[q].append(g.parseval(uh, symbol=phi * win))
                s.shell_energies[q].append(g.parseval(uh, symbol=win * win))
                s.shell_viscous[q].append(g.parseval(uh, symbol=phi * win * g.k2))
                # <u, u, u_q> = -int (u . grad u) . u_q for divergence-free u
                s.shell_flux[q].append(-g.parseval(adv, uh, symbol=phi))
        if self.cfg.besov:
            diff = decode_state(uh, g) - self.reference
            for b in self.cfg.besov:
                s.besov_distance[b].append(besov_distance(diff, None, b[0], b[1], self.policy))


def run(u_init: SparseSpectralField, cfg: SolverConfig, policy: ResolutionPolicy | None = None,
        *, return_state: bool = False):
    """Integrate from u_init to T, sampling diagnostics every ``record_every`` steps."""
    grid = Grid(cfg)
    uh = encode_state(u_init, cfg, grid)
    rec = _Recorder(cfg, grid, u_init, policy)
    E = 0.0
    rate = rec.rate(uh)
    rec.record(0.0, uh, E)
    for n in range(1, cfg.nsteps + 1):
        # overflow is detected below and reported as NumericalError
        with np.errstate(over="ignore", invalid="ignore"):
            uh = step_rk4(uh, cfg.dt, cfg, grid)
        if not np.all(np.isfinite(uh)):
            raise NumericalError(f"non-finite state at step {n} (t={n * cfg.dt:.6g})")
        new_rate = rec.rate(uh)
        E += 0.5 * cfg.dt * (rate + new_rate)
        rate = new_rate
        if n % cfg.record_every == 0 or n == cfg.nsteps:
            rec.record(n * cfg.dt, uh, E)
    if return_state:
        return rec.series, uh
    return rec.series


# ---------------------------------------------------------------------------
# post-processing


@dataclass(frozen=True)
class BalanceReport:
    q: int
    times: np.ndarray
    residual: np.ndarray
    scale: float

    @property
    def max_residual(self) -> float:
        return float(np.abs(self.residual).max()) if len(self.residual) else 0.0


def shell_energy_balance(series: DiagnosticsSeries, q: int) -> BalanceReport:
    """r = (1/2) dS/dt + nu V - F at interior samples, dS/dt by centered differences.

    S = int u~_q . u_q, V = int grad u~_q . grad u_q and F = <u, u, u_q>.
    Requires a uniform sampling interval.
    """
    if q not in series.shell_pairing:
        raise ConfigError(f"shell {q} was not recorded; add it to shell_probes")
    t = np.asarray(series.times)
    if len(t) < 3:
        raise ConfigError("balance needs at least three samples")
    h = np.diff(t)
    if np.any(np.abs(h - h[0]) > 1e-9 * h[0]):
        raise ConfigError("balance needs uniformly spaced samples")
    S = np.asarray(series.shell_pairing[q])
    V = np.asarray(series.shell_viscous[q])
    F = np.asarray(series.shell_flux[q])
    dS = (S[2:] - S[:-2]) / (2.0 * h[0])
    nu = series.config.nu
    r = 0.5 * dS + nu * V[1:-1] - F[1:-1]
    scale = float(max(np.abs(F).max(), nu * np.abs(V).max(), 1e-300))
    return BalanceReport(q, t[1:-1], r, scale)


def besov_distance(state: SparseSpectralField, reference: SparseSpectralField | None, s: float, r: float,
                   policy: ResolutionPolicy | None = None) -> float:
    """|state - reference|_{B^s_{r,inf}}; ``reference=None`` measures ``state`` itself."""
    diff = state if reference is None else state - reference
    return besov_norm(diff, BesovParams(s, r, math.inf), policy)


def restrict_to_band(u: SparseSpectralField, cfg: SolverConfig) -> SparseSpectralField:
    """Drop the modes that do not fit the dealiased band of ``cfg``."""
    return u.restrict(np.all(np.abs(u.k) <= cfg.kmax, axis=1))


def _fmt(x: float) -> str:
    return repr(float(x))


def diagnostics_header(series: DiagnosticsSeries) -> list[str]:
    cols = ["t", "E_kin", "E_diss_integral", "dissipation_rate"]
    for p in series.mode_values:
        tag = "_".join(str(c) for c in p)
        for c in range(series.config.dim):
            cols += [f"probe_{tag}_re{c + 1}", f"probe_{tag}_im{c + 1}"]
    for q in series.shell_pairing:
        cols += [f"shell{q}_energy", f"shell{q}_pairing", f"shell{q}_viscous", f"shell{q}_flux"]
    for s, r in series.besov_distance:
        cols.append(f"besov_s{s:g}_r{r:g}")
    return cols


def write_diagnostics_csv(series: DiagnosticsSeries, path):
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(diagnostics_header(series))
        for i, t in enumerate(series.times):
            row = [_fmt(t), _fmt(series.energy[i]), _fmt(series.dissipation_integral[i]),
                   _fmt(series.dissipation_rate[i])]
            for vals in series.mode_values.values():
                for c in vals[i]:
                    row += [_fmt(c.real), _fmt(c.imag)]
            for q in series.shell_pairing:
                row += [_fmt(series.shell_energies[q][i]), _fmt(series.shell_pairing[q][i]),
                        _fmt(series.shell_viscous[q][i]), _fmt(series.shell_flux[q][i])]
            for b in series.besov_distance:
                row.append(_fmt(series.besov_distance[b][i]))
            wr.writerow(row)
