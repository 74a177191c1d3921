"""Box-cluster machinery behind the exact triad sums.

A spectral field is viewed as a formal sum of *clusters*: dense amplitude
arrays attached to an integer lattice box.  Triad sums over three clusters are
evaluated either by direct pair enumeration or by a local FFT on a periodic
grid large enough that no spurious wrap-around triads appear.  Both paths are
algebraically exact; they only differ in floating-point rounding.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import InfeasibleError

# direct enumeration is preferred below this many pair evaluations per FFT point
_DIRECT_PER_FFT_POINT = 30.0
# number of P^n complex work arrays alive during one FFT triple
_FFT_WORK_ARRAYS = 8
DEFAULT_MEMORY_BUDGET = 1.5e9  # bytes
_PAIR_CHUNK = 2_000_000


@dataclass
class Cluster:
    """Dense amplitudes ``amp[c, m]`` for wavevectors ``lo + m`` on a lattice box."""

    lo: np.ndarray
    amp: np.ndarray
    _modes: tuple | None = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple:
        return self.amp.shape[1:]

    @property
    def hi(self) -> np.ndarray:
        return self.lo + np.asarray(self.shape) - 1

    @property
    def volume(self) -> int:
        return int(np.prod(self.shape))

    def modes(self):
        """Nonzero ``(k, amp)`` pairs of this cluster."""
        if self._modes is None:
            nz = np.any(self.amp != 0, axis=0)
            idx = np.argwhere(nz)
            k = idx + self.lo
            a = self.amp[(slice(None),) + tuple(idx.T)].T
            self._modes = (k.astype(np.int64), np.ascontiguousarray(a))
        return self._modes

    def nnz(self) -> int:
        return len(self.modes()[0])

    def split(self):
        """Halve the box along its longest axis."""
        d = int(np.argmax(self.shape))
        h = self.shape[d] // 2
        sl_a = [slice(None)] * (self.dim + 1)
        sl_b = [slice(None)] * (self.dim + 1)
        sl_a[d + 1] = slice(0, h)
        sl_b[d + 1] = slice(h, None)
        lo_b = self.lo.copy()
        lo_b[d] += h
        return Cluster(self.lo.copy(), self.amp[tuple(sl_a)]), Cluster(lo_b, self.amp[tuple(sl_b)])


def partition_modes(k: np.ndarray, fill: float = 0.3, small: int = 32, small_vol: int = 4096):
    """Split a point set into boxes by recursive largest-gap bisection.

    Returns a list of index arrays.  A subset becomes a leaf once it fills at
    least ``fill`` of its bounding box, or it is small with a small box.
    """
    n = k.shape[1]
    leaves = []
    stack = [np.arange(len(k))]
    while stack:
        idx = stack.pop()
        if len(idx) == 0:
            continue
        pts = k[idx]
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        ext = hi - lo + 1
        vol = float(np.prod(ext.astype(float)))
        if len(idx) == 1 or len(idx) >= fill * vol or (len(idx) <= small and vol <= small_vol):
            leaves.append(idx)
            continue
        best = None
        for d in range(n):
            u = np.unique(pts[:, d])
            if len(u) < 2:
                continue
            g = np.diff(u)
            i = int(np.argmax(g))
            if g[i] > 1 and (best is None or g[i] > best[0]):
                best = (g[i], d, u[i])
        if best is not None:
            _, d, cut = best
            mask = pts[:, d] <= cut
        else:
            d = int(np.argmax(ext))
            mask = pts[:, d] < lo[d] + ext[d] // 2
        stack.append(idx[mask])
        stack.append(idx[~mask])
    return leaves


def clusters_from_modes(k: np.ndarray, amp: np.ndarray) -> list[Cluster]:
    out = []
    if len(k) == 0:
        return out
    for idx in partition_modes(k):
        kk = k[idx]
        lo = kk.min(axis=0)
        ext = kk.max(axis=0) - lo + 1
        dense = np.zeros((k.shape[1],) + tuple(int(e) for e in ext), dtype=complex)
        dense[(slice(None),) + tuple((kk - lo).T)] = amp[idx].T
        out.append(Cluster(lo.astype(np.int64), dense, (kk, amp[idx])))
    return out


def _closes(X: Cluster, Y: Cluster, Z: Cluster) -> bool:
    lo = X.lo + Y.lo + Z.lo
    hi = X.hi + Y.hi + Z.hi
    return bool(np.all(lo <= 0) and np.all(hi >= 0))


def _direct_triple(X: Cluster, Y: Cluster, Z: Cluster) -> complex:
    k1, a1 = X.modes()
    k2, a2 = Y.modes()
    if len(k1) == 0 or len(k2) == 0:
        return 0j
    zshape = np.asarray(Z.shape)
    total = 0j
    step = max(1, _PAIR_CHUNK // max(1, len(k2)))
    for s in range(0, len(k1), step):
        kk1 = k1[s:s + step]
        aa1 = a1[s:s + step]
        k3 = -(kk1[:, None, :] + k2[None, :, :])
        rel = k3 - Z.lo
        ok = np.all((rel >= 0) & (rel < zshape), axis=-1)
        if not ok.any():
            continue
        i1, i2 = np.nonzero(ok)
        r = rel[i1, i2]
        w = Z.amp[(slice(None),) + tuple(r.T)].T
        k3v = k3[i1, i2]
        dv = 1j * np.einsum("pi,pi->p", a2[i2], k3v)
        total += np.sum(dv * np.einsum("pj,pj->p", w, aa1[i1]))
    return total


def _fft_triple(X: Cluster, Y: Cluster, Z: Cluster) -> complex:
    n = X.dim
    ext = np.asarray(X.shape) + np.asarray(Y.shape) + np.asarray(Z.shape) - 2
    P = tuple(sfft.next_fast_len(int(e)) for e in ext)
    s = -(X.lo + Y.lo + Z.lo)
    shift = tuple(int(-v) for v in s)
    axes = tuple(range(n))
    npts = math.prod(P)

    def synth(arr, roll=None):
        pad = np.zeros(P, dtype=complex)
        pad[tuple(slice(0, m) for m in arr.shape)] = arr
        if roll is not None:
            pad = np.roll(pad, roll, axis=axes)
        return sfft.ifftn(pad, overwrite_x=True) * npts

    zgrids = np.meshgrid(*[Z.lo[d] + np.arange(Z.shape[d]) for d in range(n)], indexing="ij")
    vt = [synth(Y.amp[i]) for i in range(n)]
    total = 0j
    for j in range(n):
        acc = np.zeros(P, dtype=complex)
        for i in range(n):
            acc += vt[i] * synth(1j * zgrids[i] * Z.amp[j], roll=shift)
        acc *= synth(X.amp[j])
        total += acc.sum()
    return total / npts


def _triple_cost(X: Cluster, Y: Cluster, Z: Cluster):
    ext = np.asarray(X.shape) + np.asarray(Y.shape) + np.asarray(Z.shape) - 2
    fft_pts = float(np.prod([sfft.next_fast_len(int(e)) for e in ext]))
    return fft_pts


def _triple(X, Y, Z, budget) -> complex:
    fft_pts = _triple_cost(X, Y, Z)
    pairs = float(X.volume) * float(Y.volume)
    if pairs <= _DIRECT_PER_FFT_POINT * fft_pts or pairs <= 4096:
        pairs = float(X.nnz()) * float(Y.nnz())
        if pairs <= _DIRECT_PER_FFT_POINT * fft_pts or pairs <= 4096:
            return _direct_triple(X, Y, Z)
    if fft_pts * 16 * _FFT_WORK_ARRAYS <= budget:
        return _fft_triple(X, Y, Z)
    # shrink the largest box and recurse
    parts = [X, Y, Z]
    big = max(range(3), key=lambda i: parts[i].volume)
    if max(parts[big].shape) < 2:
        raise InfeasibleError("triad FFT grid exceeds memory budget")
    total = 0j
    for half in parts[big].split():
        sub = list(parts)
        sub[big] = half
        if _closes(*sub):
            total += _triple(*sub, budget)
    return total


def trilinear_clusters(cu, cv, cw, budget: float = DEFAULT_MEMORY_BUDGET) -> complex:
    """Return sum over triads k1+k2+k3=0 of u_j(k1) v_i(k2) (i k3_i) w_j(k3).

    The (2 pi)^n measure factor is applied by the caller.
    """
    total = 0j
    for X in cu:
        for Y in cv:
            for Z in cw:
                if _closes(X, Y, Z):
                    total += _triple(X, Y, Z, budget)
    return total
