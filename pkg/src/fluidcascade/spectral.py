"""Exact sparse Fourier-field algebra on the torus T^n, n = 2 or 3.

Convention: u(x) = sum_k u_hat(k) exp(i k.x) on [0, 2pi)^n.  All norms use
unnormalized Lebesgue measure on [0, 2pi)^n, so ``|u|_2^2 = (2pi)^n sum|u_hat|^2``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from . import _clusters
from .errors import AliasingError, InfeasibleError

TWO_PI = 2.0 * np.pi
# key encoding for integer wavevectors: |k_i| < 2**20 per component
_KEY_BITS = 21
_KEY_OFFSET = 1 << 20
EXACT_RTOL = 1e-12
DIRECT_PAIR_BUDGET = 4_000_000
ADVECT_PAIR_BUDGET = 50_000_000


def encode(k: np.ndarray) -> np.ndarray:
    """Pack integer wavevectors (M, n) into sortable int64 keys."""
    k = np.asarray(k, dtype=np.int64)
    if k.size and np.abs(k).max() >= _KEY_OFFSET:
        raise InfeasibleError(f"wavevector component exceeds {_KEY_OFFSET - 1}")
    key = np.zeros(k.shape[0], dtype=np.int64)
    for d in range(k.shape[1]):
        key = (key << _KEY_BITS) | (k[:, d] + _KEY_OFFSET)
    return key


def leray_project(xi, v):
    """Apply the Leray symbol I - xi xi^T/|xi|^2 to ``v``.

    Works on a single vector or row-wise on arrays of shape (M, n).  The
    zero wavevector passes ``v`` through unchanged.
    """
    xi = np.asarray(xi, dtype=float)
    v = np.asarray(v)
    single = xi.ndim == 1
    xi2 = np.atleast_2d(xi)
    v2 = np.atleast_2d(v)
    k2 = np.einsum("mi,mi->m", xi2, xi2)
    safe = np.where(k2 == 0, 1.0, k2)
    dot = np.einsum("mi,mi->m", xi2, v2)
    out = v2 - xi2 * (np.where(k2 == 0, 0.0, dot / safe))[:, None]
    return out[0] if single else out


@dataclass(frozen=True, eq=False)
class SparseSpectralField:
    """Finite map from integer wavevectors to complex amplitude vectors.

    Modes are stored sorted by key, conjugate-complete and without exact
    zeros.  Instances are immutable.
    """

    dim: int
    k: np.ndarray
    amp: np.ndarray

    @classmethod
    def from_modes(cls, dim, k, amp, *, add_conjugates=False, check_reality=True, rtol=1e-12):
        """Build a canonical field; duplicate wavevectors are summed."""
        if dim not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {dim}")
        k = np.asarray(k, dtype=np.int64).reshape(-1, dim)
        amp = np.asarray(amp, dtype=complex).reshape(-1, dim)
        if add_conjugates:
            nonzero = np.any(k != 0, axis=1)
            k = np.concatenate([k, -k[nonzero]])
            amp = np.concatenate([amp, np.conj(amp[nonzero])])
        keys = encode(k)
        uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
        if len(uniq) != len(keys):
            summed = np.zeros((len(uniq), dim), dtype=complex)
            np.add.at(summed, inv.ravel(), amp)
            k, amp = k[first], summed
        else:
            k, amp = k[first], amp[first]
        keep = np.any(amp != 0, axis=1)
        field = cls(dim, np.ascontiguousarray(k[keep]), np.ascontiguousarray(amp[keep]))
        if check_reality:
            err = field.reality_defect()
            scale = float(np.abs(field.amp).max()) if len(field) else 0.0
            if err > rtol * max(scale, 1e-300):
                raise ValueError(f"field violates reality condition (defect {err:.3e})")
        return field

    @classmethod
    def zero(cls, dim):
        return cls(dim, np.zeros((0, dim), dtype=np.int64), np.zeros((0, dim), dtype=complex))

    @classmethod
    def from_dict(cls, dim, modes: dict, **kw):
        ks = list(modes.keys())
        return cls.from_modes(dim, ks, [modes[kk] for kk in ks], **kw)

    def __len__(self):
        return len(self.k)

    @property
    def n_modes(self):
        return len(self.k)

    @cached_property
    def keys(self):
        return encode(self.k)

    def __repr__(self):
        return f"SparseSpectralField(dim={self.dim}, n_modes={len(self)})"

    def reality_defect(self) -> float:
        """max |u_hat(-k) - conj(u_hat(k))| over stored modes."""
        if len(self) == 0:
            return 0.0
        other = self.lookup(-self.k)
        return float(np.abs(other - np.conj(self.amp)).max())

    def lookup(self, kq) -> np.ndarray:
        """Amplitudes at the given wavevectors (zero where absent)."""
        kq = np.asarray(kq, dtype=np.int64).reshape(-1, self.dim)
        out = np.zeros((len(kq), self.dim), dtype=complex)
        if len(self) == 0 or len(kq) == 0:
            return out
        q = encode(kq)
        idx = np.searchsorted(self.keys, q)
        idx = np.minimum(idx, len(self) - 1)
        hit = self.keys[idx] == q
        out[hit] = self.amp[idx[hit]]
        return out

    def __getitem__(self, kk):
        return self.lookup([kk])[0]

    def to_dict(self):
        return {tuple(int(c) for c in kk): a.copy() for kk, a in zip(self.k, self.amp)}

    # arithmetic -----------------------------------------------------------
    def _combine(self, other, sign):
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        return SparseSpectralField.from_modes(
            self.dim, np.concatenate([self.k, other.k]),
            np.concatenate([self.amp, sign * other.amp]), check_reality=False)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return SparseSpectralField(self.dim, self.k, -self.amp)

    def __mul__(self, alpha):
        alpha = float(alpha)
        if alpha == 0:
            return SparseSpectralField.zero(self.dim)
        return SparseSpectralField(self.dim, self.k, self.amp * alpha)

    __rmul__ = __mul__

    def scale_modes(self, weights) -> "SparseSpectralField":
        """Multiply each mode by a real weight (a Fourier multiplier)."""
        w = np.asarray(weights, dtype=float)
        keep = w != 0
        return SparseSpectralField(self.dim, self.k[keep], self.amp[keep] * w[keep, None])

    def restrict(self, mask) -> "SparseSpectralField":
        mask = np.asarray(mask, dtype=bool)
        return SparseSpectralField(self.dim, self.k[mask], self.amp[mask])

    def max_abs_k(self) -> int:
        """Largest |k|_inf over stored modes (0 for the zero field)."""
        return int(np.abs(self.k).max()) if len(self) else 0

    def norms(self) -> np.ndarray:
        return np.sqrt(np.einsum("mi,mi->m", self.k.astype(float), self.k.astype(float)))

    @cached_property
    def clusters(self):
        return _clusters.clusters_from_modes(self.k, self.amp)

    def to_sparse(self, max_modes=None):
        return self

    # serialization ----------------------------------------------------------
    def to_json_dict(self):
        """Half-space representation; conjugate modes are implied."""
        half = _positive_half(self.k)
        modes = [
            {"k": [int(c) for c in kk], "re": [float(x) for x in a.real], "im": [float(x) for x in a.imag]}
            for kk, a in zip(self.k[half], self.amp[half])
        ]
        return {"dim": self.dim, "modes": modes}

    @classmethod
    def from_json_dict(cls, data):
        dim = int(data["dim"])
        ks, amps = [], []
        for m in data["modes"]:
            kk = [int(c) for c in m["k"]]
            if len(kk) != dim or len(m["re"]) != dim or len(m["im"]) != dim:
                raise ValueError(f"mode {kk} has wrong length for dim={dim}")
            if not _positive_half(np.array([kk]))[0]:
                raise ValueError(f"mode {kk} is not in the stored half-space")
            ks.append(kk)
            amps.append(np.asarray(m["re"], float) + 1j * np.asarray(m["im"], float))
        if not ks:
            return cls.zero(dim)
        k = np.array(ks, dtype=np.int64)
        amp = np.array(amps)
        zero = np.all(k == 0, axis=1)
        amp[zero] = amp[zero].real
        return cls.from_modes(dim, k, amp, add_conjugates=True)

    def dumps(self) -> str:
        return json.dumps(self.to_json_dict(), indent=1)

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_json_dict(json.load(fh))


def _positive_half(k):
    """Mask of k = 0 or k lexicographically positive."""
    k = np.asarray(k)
    out = np.zeros(len(k), dtype=bool)
    undecided = np.ones(len(k), dtype=bool)
    for d in range(k.shape[1]):
        pos = undecided & (k[:, d] > 0)
        neg = undecided & (k[:, d] < 0)
        out |= pos
        undecided &= ~(pos | neg)
    return out | undecided


@dataclass(frozen=True, eq=False)
class GridField:
    """Real samples of an n-vector field on the uniform N^n grid of [0, 2pi)^n."""

    dim: int
    values: np.ndarray  # shape (n, N, ..., N)

    @property
    def resolution(self) -> int:
        return self.values.shape[1]

    def magnitude(self) -> np.ndarray:
        return np.sqrt(np.sum(self.values**2, axis=0))


# ---------------------------------------------------------------------------
# operations


def project_field(u: SparseSpectralField) -> SparseSpectralField:
    """Leray-project every mode; numerically annihilated modes are dropped."""
    out = leray_project(u.k, u.amp)
    before = np.linalg.norm(u.amp, axis=1)
    after = np.linalg.norm(out, axis=1)
    keep = after > 1e-14 * before
    return SparseSpectralField(u.dim, u.k[keep], out[keep])


def divergence_residual(u: SparseSpectralField) -> float:
    """max_k |k . u_hat(k)|; zero iff u is weakly divergence-free."""
    if len(u) == 0:
        return 0.0
    return float(np.abs(np.einsum("mi,mi->m", u.k.astype(float), u.amp)).max())


def _check_divfree(u, what="u"):
    scale = max(float(np.abs(u.amp).max()) * max(u.max_abs_k(), 1), 1e-300) if len(u) else 1.0
    if divergence_residual(u) > 1e-10 * scale:
        raise ValueError(f"{what} must be divergence-free")


def advect(u: SparseSpectralField, v: SparseSpectralField, *, check=True) -> SparseSpectralField:
    """Exact (u . grad) v by direct triad convolution over the stored modes."""
    if u.dim != v.dim:
        raise ValueError("dimension mismatch")
    if check:
        _check_divfree(u)
    if len(u) == 0 or len(v) == 0:
        return SparseSpectralField.zero(u.dim)
    if len(u) * len(v) > ADVECT_PAIR_BUDGET:
        raise InfeasibleError(f"advect needs {len(u) * len(v):.3g} pair evaluations")
    ks, amps = [], []
    step = max(1, 2_000_000 // len(v))
    kv = v.k.astype(float)
    for s in range(0, len(u), step):
        ku, au = u.k[s:s + step], u.amp[s:s + step]
        coef = 1j * (au @ kv.T)  # (mu, mv): u_hat(k1) . i k2
        out_k = (ku[:, None, :] + v.k[None, :, :]).reshape(-1, u.dim)
        out_a = (coef[:, :, None] * v.amp[None, :, :]).reshape(-1, u.dim)
        ks.append(out_k)
        amps.append(out_a)
    return SparseSpectralField.from_modes(u.dim, np.concatenate(ks), np.concatenate(amps), check_reality=False)


def advect_at(u: SparseSpectralField, v: SparseSpectralField, xi) -> np.ndarray:
    """(u . grad v)^ evaluated at the wavevectors ``xi`` only."""
    xi = np.asarray(xi, dtype=np.int64).reshape(-1, u.dim)
    out = np.zeros((len(xi), u.dim), dtype=complex)
    for n, x in enumerate(xi):
        k2 = x[None, :] - u.k
        vv = v.lookup(k2)
        coef = 1j * np.einsum("mi,mi->m", u.amp, k2.astype(float))
        out[n] = np.sum(coef[:, None] * vv, axis=0)
    return out


def trilinear(u, v, w, *, budget=_clusters.DEFAULT_MEMORY_BUDGET) -> float:
    """Exact value of  int v_i d_i w_j u_j dx  over T^n via triad sums.

    Accepts sparse fields or block-structured fields (anything exposing
    ``dim`` and ``clusters``).
    """
    if not (u.dim == v.dim == w.dim):
        raise ValueError("dimension mismatch")
    n = u.dim
    sparse = all(isinstance(f, SparseSpectralField) for f in (u, v, w))
    if sparse and len(u) * len(v) <= DIRECT_PAIR_BUDGET:
        val = _trilinear_direct(u, v, w)
        scale = _trilinear_scale_sparse(u, v, w)
    else:
        val = _clusters.trilinear_clusters(u.clusters, v.clusters, w.clusters, budget)
        scale = _trilinear_scale_clusters(u, v, w)
    val *= TWO_PI**n
    scale *= TWO_PI**n
    if abs(val.imag) > 1e-10 * max(scale, abs(val.real), 1e-300):
        raise ArithmeticError(f"trilinear form has imaginary residual {val.imag:.3e}; fields not real?")
    return float(val.real)


def _trilinear_scale_sparse(u, v, w):
    if min(len(u), len(v), len(w)) == 0:
        return 0.0
    kw = np.linalg.norm(w.k.astype(float), axis=1)
    return float(np.abs(u.amp).sum() * np.abs(v.amp).sum() * (kw * np.abs(w.amp).max(axis=1)).max())


def _trilinear_scale_clusters(u, v, w):
    def l1(f):
        return float(sum(np.abs(c.amp).sum() for c in f.clusters))

    wmax = max((float(np.abs(c.amp).max()) for c in w.clusters), default=0.0)
    return l1(u) * l1(v) * wmax * np.sqrt(w.dim) * max(w.max_abs_k(), 1)


def _trilinear_direct(u, v, w) -> complex:
    if min(len(u), len(v), len(w)) == 0:
        return 0j
    total = 0j
    step = max(1, 1_000_000 // len(v))
    for s in range(0, len(u), step):
        ku, au = u.k[s:s + step], u.amp[s:s + step]
        k3 = -(ku[:, None, :] + v.k[None, :, :]).reshape(-1, u.dim)
        ww = w.lookup(k3)
        hit = np.any(ww != 0, axis=1)
        if not hit.any():
            continue
        i1, i2 = np.divmod(np.nonzero(hit)[0], len(v))
        k3h = k3[hit].astype(float)
        dv = 1j * np.einsum("pi,pi->p", v.amp[i2], k3h)
        total += np.sum(dv * np.einsum("pj,pj->p", ww[hit], au[i1]))
    return total


def required_resolution(u: SparseSpectralField) -> int:
    """Smallest power of two N with N >= 2 (1 + max |k|_inf)."""
    need = 2 * (1 + u.max_abs_k())
    return 1 << max(1, int(np.ceil(np.log2(need))))


def synthesize(u: SparseSpectralField, N: int, *, check=True) -> GridField:
    """Evaluate u on the N^n grid; imaginary parts must vanish."""
    if N < 2 * (1 + u.max_abs_k()):
        raise AliasingError(f"resolution N={N} too small for max |k|_inf={u.max_abs_k()}")
    n = u.dim
    spec = np.zeros((n,) + (N,) * n, dtype=complex)
    if len(u):
        idx = tuple((u.k % N).T)
        for c in range(n):
            spec[(c,) + idx] = u.amp[:, c]
    vals = sfft.ifftn(spec, axes=tuple(range(1, n + 1)), norm="forward")
    if check and len(u):
        scale = float(np.abs(u.amp).sum())
        imag = float(np.abs(vals.imag).max())
        if imag > 1e-10 * max(scale, 1.0):
            raise ArithmeticError(f"synthesized field has imaginary part {imag:.3e}")
    return GridField(n, np.ascontiguousarray(vals.real))


def analyze(g: GridField, *, rtol=1e-13) -> SparseSpectralField:
    """Inverse of :func:`synthesize`: grid samples to (symmetrized) Fourier modes."""
    n, N = g.dim, g.resolution
    spec = sfft.fftn(g.values, axes=tuple(range(1, n + 1)), norm="forward")
    mag = np.sqrt(np.sum(np.abs(spec) ** 2, axis=0))
    peak = mag.max()
    if peak == 0:
        return SparseSpectralField.zero(n)
    idx = np.argwhere(mag > rtol * peak)
    k = np.where(idx > N // 2, idx - N, idx)
    amp = spec[(slice(None),) + tuple(idx.T)].T
    field = SparseSpectralField.from_modes(n, k, amp, check_reality=False)
    conj = field.lookup(-field.k)
    sym = 0.5 * (field.amp + np.conj(conj))
    return SparseSpectralField.from_modes(n, field.k, sym, check_reality=False)


def lp_norm(g: GridField, r: float) -> float:
    """(int |g|^r dx)^(1/r) on [0,2pi)^n by uniform-grid quadrature; r=inf is the max."""
    r = float(r)
    if r < 1:
        raise ValueError(f"exponent r must be >= 1, got {r}")
    mag = g.magnitude()
    if np.isinf(r):
        return float(mag.max())
    cell = (TWO_PI / g.resolution) ** g.dim
    m = mag.max()
    if m == 0:
        return 0.0
    return float(m * (cell * np.sum((mag / m) ** r)) ** (1.0 / r))


def l2_norm_exact(u) -> float:
    """Parseval: (2pi)^(n/2) (sum_k |u_hat(k)|^2)^(1/2)."""
    if isinstance(u, SparseSpectralField):
        s = float(np.sum(np.abs(u.amp) ** 2))
    else:
        s = float(sum(np.sum(np.abs(c.amp) ** 2) for c in u.clusters))
    return float(TWO_PI ** (u.dim / 2) * np.sqrt(s))


class BlockField:
    """Spectral field stored as a formal sum of dense lattice-box clusters.

    Used for the lattice-block datum, whose blocks are far too large to list
    mode by mode yet are exact boxes.  Clusters may overlap; amplitudes add.
    """

    def __init__(self, dim, clusters):
        self.dim = dim
        self.clusters = tuple(clusters)

    def __repr__(self):
        shapes = [c.shape for c in self.clusters]
        return f"BlockField(dim={self.dim}, clusters={shapes})"

    def __add__(self, other):
        if isinstance(other, SparseSpectralField):
            other = BlockField(other.dim, other.clusters)
        if other.dim != self.dim:
            raise ValueError("dimension mismatch")
        return BlockField(self.dim, self.clusters + other.clusters)

    __radd__ = __add__

    def __mul__(self, alpha):
        return BlockField(self.dim, [_clusters.Cluster(c.lo, c.amp * float(alpha)) for c in self.clusters])

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    @property
    def volume(self) -> int:
        return sum(c.volume for c in self.clusters)

    def max_abs_k(self) -> int:
        if not self.clusters:
            return 0
        return int(max(max(np.abs(c.lo).max(), np.abs(c.hi).max()) for c in self.clusters))

    def scale_radial(self, fn) -> "BlockField":
        """Multiply amplitudes by ``fn(|k|)`` (a radial Fourier multiplier)."""
        out = []
        for c in self.clusters:
            grids = np.meshgrid(*[c.lo[d] + np.arange(c.shape[d]) for d in range(self.dim)], indexing="ij")
            r = np.sqrt(sum(g.astype(float) ** 2 for g in grids))
            w = fn(r)
            if np.any(w != 0):
                out.append(_clusters.Cluster(c.lo, c.amp * w[None]))
        return BlockField(self.dim, out)

    def to_sparse(self, max_modes=50_000_000) -> SparseSpectralField:
        if self.volume > max_modes:
            raise InfeasibleError(f"block field has {self.volume:.3g} lattice points (budget {max_modes:.3g})")
        if not self.clusters:
            return SparseSpectralField.zero(self.dim)
        ks, amps = zip(*(c.modes() for c in self.clusters))
        return SparseSpectralField.from_modes(self.dim, np.concatenate(ks), np.concatenate(amps), check_reality=False)


def _half_clusters(clusters, dim):
    """Keep the positive half-space of each cluster (k=0 at weight 1/2), so u = 2 Re(half)."""
    out = []
    for c in clusters:
        grids = np.meshgrid(*[c.lo[d] + np.arange(c.shape[d]) for d in range(dim)], indexing="ij")
        w = np.zeros(c.shape)
        undecided = np.ones(c.shape, dtype=bool)
        for g in grids:
            w[undecided & (g > 0)] = 1.0
            undecided &= g == 0
        w[undecided] = 0.5
        if np.any(w != 0):
            out.append(_clusters.Cluster(c.lo, c.amp * w[None]))
    return out


def _eval_points(clusters, dim, axes_pts) -> np.ndarray:
    """Exact 2 Re(sum) of half-clusters on the tensor grid ``axes_pts``; returns (n, *shape)."""
    shape = tuple(len(a) for a in axes_pts)
    acc = np.zeros((dim,) + shape, dtype=complex)
    for c in clusters:
        t = c.amp
        for d in range(dim):
            k = c.lo[d] + np.arange(c.shape[d])
            E = np.exp(1j * np.outer(axes_pts[d], k))
            t = np.moveaxis(np.tensordot(E, t, axes=(1, d + 1)), 0, d + 1)
        acc += t
    return 2.0 * acc.real


def sup_norm_sampled(u, N: int | None = None, *, oversample: int = 2, top: int = 8, zoom: int = 3):
    """Lower bound for sup_x |u(x)| by sliced sampling plus local zoom refinement.

    The N^n grid is swept one x-plane at a time: the x-sum is a small matrix
    product and the remaining axes a single FFT of size N^(n-1) with
    wavenumbers wrapped mod N, which samples the field exactly at the grid
    points.  The ``top`` best samples are then refined on successively finer
    local grids.  Returns ``(value, x_argmax)``.
    """
    n = u.dim
    half = _half_clusters(u.clusters, n)
    if not half:
        return 0.0, np.zeros(n)
    if N is None:
        N = sfft.next_fast_len(2 * oversample * (1 + u.max_abs_k()))
    xs = TWO_PI * np.arange(N) / N
    rest = (N,) * (n - 1)
    best = []  # (value, index tuple)
    for ix, x0 in enumerate(xs):
        plane = np.zeros((n,) + rest, dtype=complex)
        for c in half:
            k1 = c.lo[0] + np.arange(c.shape[0])
            T = np.tensordot(c.amp, np.exp(1j * k1 * x0), axes=(1, 0))
            idx = np.ix_(*[(c.lo[d] + np.arange(c.shape[d])) % N for d in range(1, n)])
            for comp in range(n):
                plane[comp][idx] += T[comp]
        vals = 2.0 * sfft.ifftn(plane, axes=tuple(range(1, n)), norm="forward").real
        mag = np.sqrt(np.sum(vals**2, axis=0))
        flat = np.argpartition(mag.ravel(), -top)[-top:] if mag.size > top else np.arange(mag.size)
        for f in flat:
            best.append((float(mag.ravel()[f]), (ix,) + np.unravel_index(f, rest)))
        best = sorted(best, reverse=True)[:top]
    h = TWO_PI / N
    value, where = best[0][0], np.array(best[0][1]) * h
    for _, index in best:
        center = np.array(index, dtype=float) * h
        width = h
        for _ in range(zoom):
            offs = np.linspace(-width, width, 17)
            pts = [center[d] + offs for d in range(n)]
            vals = _eval_points(half, n, pts)
            mag = np.sqrt(np.sum(vals**2, axis=0))
            i = np.unravel_index(int(np.argmax(mag)), mag.shape)
            center = np.array([pts[d][i[d]] for d in range(n)])
            if mag[i] > value:
                value, where = float(mag[i]), center.copy()
            width /= 8.0
    return value, np.mod(where, TWO_PI)


def random_field(dim: int, n_modes: int, kmax: int, rng: np.random.Generator, *,
                 divergence_free=True, mean=False) -> SparseSpectralField:
    """Random real field with ``n_modes`` stored wavevectors (conjugates included) in |k|_inf <= kmax."""
    half_count = n_modes // 2
    pool = np.stack(np.meshgrid(*[np.arange(-kmax, kmax + 1)] * dim, indexing="ij"), axis=-1).reshape(-1, dim)
    pool = pool[_positive_half(pool) & np.any(pool != 0, axis=1)]
    pick = pool[rng.choice(len(pool), size=min(half_count, len(pool)), replace=False)]
    amp = rng.normal(size=(len(pick), dim)) + 1j * rng.normal(size=(len(pick), dim))
    if mean:
        pick = np.vstack([pick, np.zeros((1, dim), dtype=int)])
        amp = np.vstack([amp, rng.normal(size=(1, dim)) + 0j])
    u = SparseSpectralField.from_modes(dim, pick, amp, add_conjugates=True)
    return project_field(u) if divergence_free else u
