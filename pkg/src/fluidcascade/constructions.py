"""The two explicit initial data.

* ``euler_u0``: the 2D shear-plus-lacunary-cosine datum
  e1 cos(y) + e2 sum_{q=0}^{Q} 2^(-qs) cos(2^q x).
* ``NseDatum`` / ``nse_U``: the 3D datum built from integer lattice boxes
  A_j, B_j, C_j = A_j + B_j and their negatives at widely separated dyadic
  shells q_1 < q_2 < ...
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._clusters import Cluster
from .errors import ConfigError, InfeasibleError
from .littlewood_paley import lam
from .spectral import TWO_PI, BlockField, SparseSpectralField, leray_project

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E2_MINUS_E1 = E2 - E1
# lattice boxes with more points than this are summed by Euler-Maclaurin
ENUMERATION_BUDGET = 20_000_000
MATERIALIZE_BUDGET = 30_000_000
_ROUND_TOL = 1e-9


# ---------------------------------------------------------------------------
# Euler datum


@dataclass(frozen=True)
class EulerInitParams:
    s: float
    Q: int

    def __post_init__(self):
        if int(self.Q) != self.Q or self.Q < 1:
            raise ConfigError(f"Q must be an integer >= 1, got {self.Q}")
        if not math.isfinite(self.s):
            raise ConfigError("s must be finite")

    def check_range(self, r: float, n: int = 2):
        """Raise unless (s, r) lies in the range s > 0 (r > 2), s > n(2/r - 1) (r <= 2)."""
        bound = 0.0 if r > 2 else n * (2.0 / r - 1.0)
        if not self.s > bound:
            raise ConfigError(f"s={self.s} outside the admissible range s > {bound:g} for r={r}")


def euler_u0(p: EulerInitParams) -> SparseSpectralField:
    """e1 cos(y) + e2 sum_{q=0}^{Q} lambda_q^(-s) cos(lambda_q x), as exact modes."""
    ks = [(0, 1)]
    amps = [(0.5, 0.0)]
    for q in range(int(p.Q) + 1):
        ks.append((int(2**q), 0))
        amps.append((0.0, 0.5 * lam(q) ** (-p.s)))
    return SparseSpectralField.from_modes(2, ks, amps, add_conjugates=True)


# ---------------------------------------------------------------------------
# lattice blocks


@dataclass(frozen=True)
class LatticeBlock:
    """All integer points of the closed box [lo, hi] (componentwise)."""

    lo: tuple
    hi: tuple

    @classmethod
    def from_intervals(cls, intervals):
        lo = tuple(int(math.ceil(a - _ROUND_TOL)) for a, _ in intervals)
        hi = tuple(int(math.floor(b + _ROUND_TOL)) for _, b in intervals)
        return cls(lo, hi)

    @property
    def dim(self):
        return len(self.lo)

    @property
    def shape(self):
        return tuple(max(0, h - l + 1) for l, h in zip(self.lo, self.hi))

    @property
    def count(self) -> int:
        return math.prod(self.shape)

    @property
    def empty(self) -> bool:
        return self.count == 0

    def __neg__(self):
        return LatticeBlock(tuple(-h for h in self.hi), tuple(-l for l in self.lo))

    def __add__(self, other):
        """Minkowski sum; exact for integer boxes."""
        return LatticeBlock(tuple(a + b for a, b in zip(self.lo, other.lo)),
                            tuple(a + b for a, b in zip(self.hi, other.hi)))

    def intersects(self, other) -> bool:
        return all(max(a, c) <= min(b, d) for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))

    def min_norm(self) -> float:
        nearest = [min(max(0, l), h) for l, h in zip(self.lo, self.hi)]
        return float(np.linalg.norm(nearest))

    def max_norm(self) -> float:
        far = [max(abs(l), abs(h)) for l, h in zip(self.lo, self.hi)]
        return float(np.linalg.norm(far))

    def axes(self):
        return [np.arange(l, h + 1) for l, h in zip(self.lo, self.hi)]

    def points(self, max_points=ENUMERATION_BUDGET) -> np.ndarray:
        if self.count > max_points:
            raise InfeasibleError(f"block has {self.count:.3g} points (budget {max_points:.3g})")
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


@dataclass(frozen=True)
class BlockSet:
    j: int
    q: int
    A: LatticeBlock
    B: LatticeBlock
    C: LatticeBlock

    @property
    def A_star(self):
        return -self.A

    @property
    def B_star(self):
        return -self.B

    @property
    def C_star(self):
        return -self.C

    def as_tuple(self):
        return (self.A, self.B, self.C, self.A_star, self.B_star, self.C_star)


@dataclass(frozen=True)
class GapReport:
    epsilon: float
    pairs: tuple  # (q_i, q_{i+1}, ratio, ok)

    @property
    def passed(self) -> bool:
        return all(ok for *_, ok in self.pairs)


@dataclass(frozen=True)
class NseInitParams:
    """Block half-width fraction c, gap target epsilon, shells q_1 < q_2 < ..."""

    c: float = 0.2
    epsilon: float = 0.5
    shells: tuple = (3, 8)
    unit_lower_block: bool = False

    def __post_init__(self):
        shells = tuple(int(q) for q in self.shells)
        object.__setattr__(self, "shells", shells)
        if not 0 < self.c < 1:
            raise ConfigError(f"c must lie in (0, 1), got {self.c}")
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if len(shells) == 0:
            raise ConfigError("at least one shell is required")
        if shells[0] < 1:
            raise ConfigError("shells must be >= 1 (the lower block lives at q_j - 1)")
        if any(b <= a for a, b in zip(shells, shells[1:])):
            raise ConfigError(f"shells must be strictly increasing, got {shells}")

    @property
    def J(self) -> int:
        return len(self.shells)


def validate_gaps(p: NseInitParams) -> GapReport:
    """Per-pair ratios lambda_{q_i}^2 / lambda_{q_{i+1}} against epsilon (strict)."""
    pairs = []
    for a, b in zip(p.shells, p.shells[1:]):
        ratio = lam(a) ** 2 / lam(b)
        pairs.append((a, b, ratio, ratio < p.epsilon))
    return GapReport(p.epsilon, tuple(pairs))


def make_blocks(j: int, p: NseInitParams) -> BlockSet:
    """Exact boxes A_j, B_j, C_j (1-based j); negatives via the ``*_star`` properties."""
    if not 1 <= j <= p.J:
        raise ConfigError(f"block index j={j} outside 1..{p.J}")
    q = p.shells[j - 1]
    c = p.c
    L, Lm = lam(q), lam(q - 1)
    A = LatticeBlock.from_intervals([((1 - c) * L, (1 + c) * L), (-c * L, c * L), (-c * L, c * L)])
    B = LatticeBlock.from_intervals([(-c * Lm, c * Lm), (-c * Lm, c * Lm), ((1 - c) * Lm, (1 + c) * Lm)])
    if A.empty or B.empty:
        raise ConfigError(f"empty lattice block at j={j} (q={q}); c={c} too small")
    return BlockSet(j, q, A, B, A + B)


def check_blocks(p: NseInitParams):
    """Shell containment, disjointness and gap validation; raises ConfigError."""
    report = validate_gaps(p)
    if not report.passed:
        bad = [(a, b, r) for a, b, r, ok in report.pairs if not ok]
        raise ConfigError(f"gap condition lambda_qi^2/lambda_qi+1 < epsilon={p.epsilon} fails for {bad}")
    sets = [make_blocks(j, p) for j in range(1, p.J + 1)]
    for bs in sets:
        q = bs.q
        for name, blk in (("A", bs.A), ("C", bs.C)):
            if not (blk.min_norm() > lam(q - 1) and blk.max_norm() < lam(q + 1)):
                raise ConfigError(f"block {name}_{bs.j} leaves shell q={q}; reduce c")
        if not (bs.B.min_norm() > lam(q - 2) and bs.B.max_norm() < lam(q)):
            raise ConfigError(f"block B_{bs.j} leaves shell q={q - 1}; reduce c")
        blocks = bs.as_tuple()
        for a in range(6):
            for b in range(a + 1, 6):
                if blocks[a].intersects(blocks[b]):
                    raise ConfigError(f"blocks overlap within j={bs.j}; reduce c")
    for lo, hi in zip(sets, sets[1:]):
        top = max(b.max_norm() for b in lo.as_tuple())
        bottom = min(b.min_norm() for b in hi.as_tuple())
        if not top < bottom:
            raise ConfigError(f"blocks j={lo.j} and j={hi.j} overlap; shells too close")
    return sets


# ---------------------------------------------------------------------------
# amplitudes and lattice sums


@dataclass(frozen=True)
class BlockPiece:
    """A lattice block carrying amplitude ``coef * p(xi) v``."""

    block: LatticeBlock
    coef: complex
    v: tuple

    def amplitudes(self, k: np.ndarray) -> np.ndarray:
        vv = np.broadcast_to(np.asarray(self.v, dtype=float), k.shape)
        return self.coef * leray_project(k.astype(float), vv)

    def cluster(self, max_points=MATERIALIZE_BUDGET) -> Cluster:
        if self.block.count > max_points:
            raise InfeasibleError(
                f"lattice block {self.block.lo}..{self.block.hi} has {self.block.count:.3g} points "
                f"(budget {max_points:.3g})")
        grids = np.meshgrid(*self.block.axes(), indexing="ij")
        xi = np.stack(grids, axis=0).astype(float)
        v = np.asarray(self.v, dtype=float)
        r2 = np.sum(xi**2, axis=0)
        dot = np.tensordot(v, xi, axes=(0, 0)) / np.where(r2 == 0, 1.0, r2)
        amp = self.coef * (v[:, None, None, None] - xi * dot[None])
        return Cluster(np.asarray(self.block.lo, dtype=np.int64), amp.astype(complex))

    def min_projection(self) -> float:
        """min |p(xi) v| over the box corners and center (degeneracy guard)."""
        corners = np.array(np.meshgrid(*[[l, h] for l, h in zip(self.block.lo, self.block.hi)],
                                       indexing="ij")).reshape(3, -1).T
        center = 0.5 * (np.asarray(self.block.lo) + np.asarray(self.block.hi))
        pts = np.vstack([corners, center[None]]).astype(float)
        vv = np.broadcast_to(np.asarray(self.v, dtype=float), pts.shape)
        return float(np.linalg.norm(leray_project(pts, vv), axis=1).min())

    def energy_sum(self, max_points=ENUMERATION_BUDGET) -> float:
        """sum over the block of |coef p(xi) v|^2."""
        return abs(self.coef) ** 2 * projected_box_sum(self.block, self.v, max_points)


def _projected_sq(xi, v):
    """|p(xi) v|^2 = |v|^2 - (xi.v)^2/|xi|^2 for xi (..., 3)."""
    r2 = np.sum(xi * xi, axis=-1)
    a = xi @ v
    return v @ v - a * a / r2


def _projected_sq_grad(xi, v, d):
    r2 = np.sum(xi * xi, axis=-1)
    a = xi @ v
    return -2.0 * a * (v[d] * r2 - a * xi[..., d]) / (r2 * r2)


def projected_box_sum(block: LatticeBlock, v, max_points=ENUMERATION_BUDGET, *, force_em=False) -> float:
    """sum_{xi in block} |p(xi) v|^2, the block's Parseval sum.

    Blocks up to ``max_points`` are enumerated exactly.  Larger blocks (which
    must avoid the origin) use midpoint Euler-Maclaurin summation: the
    integral over the half-cell-expanded box plus first-order face
    corrections, each evaluated by Gauss-Legendre quadrature.  The neglected
    terms are O(1/(L^3 N)) relative for a box of side N at distance L.
    """
    v = np.asarray(v, dtype=float)
    if block.count <= max_points and not force_em:
        total = 0.0
        ax = block.axes()
        for x in ax[0]:
            yy, zz = np.meshgrid(ax[1], ax[2], indexing="ij")
            xi = np.stack([np.full(yy.shape, x, dtype=float), yy.astype(float), zz.astype(float)], axis=-1)
            r2 = np.sum(xi * xi, axis=-1)
            if np.any(r2 == 0):
                f = np.where(r2 == 0, v @ v, _projected_sq(np.where(r2[..., None] == 0, 1.0, xi), v))
            else:
                f = _projected_sq(xi, v)
            total += float(np.sum(f))
        return total
    if block.min_norm() < 2.0:
        raise InfeasibleError("Euler-Maclaurin box sums require blocks away from the origin")
    return _em_box_sum(block, v)


def _em_box_sum(block: LatticeBlock, v, nodes: int = 48) -> float:
    x, w = np.polynomial.legendre.leggauss(nodes)
    a = np.asarray(block.lo, dtype=float) - 0.5
    b = np.asarray(block.hi, dtype=float) + 0.5
    pts = [0.5 * (b[d] - a[d]) * x + 0.5 * (b[d] + a[d]) for d in range(3)]
    wts = [0.5 * (b[d] - a[d]) * w for d in range(3)]
    g = np.stack(np.meshgrid(*pts, indexing="ij"), axis=-1)
    W = wts[0][:, None, None] * wts[1][None, :, None] * wts[2][None, None, :]
    total = float(np.sum(W * _projected_sq(g, v)))
    for d in range(3):
        others = [e for e in range(3) if e != d]
        fw = wts[others[0]][:, None] * wts[others[1]][None, :]
        diff = 0.0
        for end, sign in ((b[d], 1.0), (a[d], -1.0)):
            axes = [None, None, None]
            axes[d] = np.array([end])
            axes[others[0]] = pts[others[0]]
            axes[others[1]] = pts[others[1]]
            gg = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
            fd = _projected_sq_grad(gg, v, d)
            diff += sign * float(np.sum(fw * np.squeeze(fd, axis=d)))
        total -= diff / 24.0
    return total


# ---------------------------------------------------------------------------
# the lattice-block datum


@dataclass
class NseDatum:
    """Structured U = sum_j (U_{q_j} + U_{q_j - 1}).

    ``U_{q_j}`` (the *shell piece*) lives on A_j, A_j*, C_j, C_j*; the *lower
    piece* ``U_{q_j - 1}`` lives on B_j, B_j*.  Every amplitude is a
    Leray-projected constant vector, so U is real and divergence-free.
    """

    params: NseInitParams
    blocksets: list = field(default_factory=list)

    @classmethod
    def build(cls, p: NseInitParams) -> "NseDatum":
        sets = check_blocks(p)
        datum = cls(p, sets)
        for j in range(1, p.J + 1):
            for piece in datum.pieces(j, "window"):
                if piece.min_projection() < 0.5:
                    raise ConfigError(f"degenerate Leray direction in block j={j}")
        return datum

    @property
    def J(self):
        return self.params.J

    def q(self, j):
        return self.params.shells[j - 1]

    def lower_coef(self, j) -> float:
        return 1.0 if self.params.unit_lower_block else lam(self.q(j)) ** -2

    def pieces(self, j: int, which: str = "window") -> list[BlockPiece]:
        """Block pieces of block j: 'shell' (U_{q_j}), 'lower' (U_{q_j-1}) or 'window' (both)."""
        bs = self.blocksets[j - 1]
        a = lam(bs.q) ** -2
        shell = [
            BlockPiece(bs.A, a, tuple(E2)),
            BlockPiece(bs.A_star, a, tuple(E2)),
            BlockPiece(bs.C, 1j * a, tuple(E2_MINUS_E1)),
            BlockPiece(bs.C_star, -1j * a, tuple(E2_MINUS_E1)),
        ]
        b = self.lower_coef(j)
        lower = [BlockPiece(bs.B, b, tuple(E1)), BlockPiece(bs.B_star, b, tuple(E1))]
        if which == "shell":
            return shell
        if which == "lower":
            return lower
        if which == "window":
            return lower + shell
        raise ValueError(f"unknown piece selector {which!r}")

    def _select(self, which: str, j: int | None):
        if which in ("shell", "lower", "window"):
            return self.pieces(j, which)
        if which == "below":
            return [p for i in range(1, j) for p in self.pieces(i, "window")]
        if which == "above":
            return [p for i in range(j + 1, self.J + 1) for p in self.pieces(i, "window")]
        if which == "all":
            return [p for i in range(1, self.J + 1) for p in self.pieces(i, "window")]
        raise ValueError(f"unknown piece selector {which!r}")

    def count(self, which="all", j=None) -> int:
        return sum(p.block.count for p in self._select(which, j))

    def block_field(self, which="all", j=None, max_points=MATERIALIZE_BUDGET) -> BlockField:
        pieces = self._select(which, j)
        total = sum(p.block.count for p in pieces)
        if total > max_points:
            raise InfeasibleError(f"{which} piece (j={j}) spans {total:.3g} lattice points (budget {max_points:.3g})")
        return BlockField(3, [p.cluster(max_points) for p in pieces])

    def field(self, which="all", j=None, max_points=MATERIALIZE_BUDGET) -> SparseSpectralField:
        return self.block_field(which, j, max_points).to_sparse(max_points)

    def l2_squared(self, which="all", j=None, max_points=ENUMERATION_BUDGET) -> float:
        """Parseval |piece|_2^2 = (2pi)^3 sum |amp|^2 via exact or Euler-Maclaurin box sums."""
        return TWO_PI**3 * sum(p.energy_sum(max_points) for p in self._select(which, j))


def build_nse_datum(p: NseInitParams) -> NseDatum:
    return NseDatum.build(p)


def nse_U(p: NseInitParams, max_points=MATERIALIZE_BUDGET) -> SparseSpectralField:
    """The full lattice-block datum as an explicit sparse field."""
    return NseDatum.build(p).field("all", max_points=max_points)


def sobolev_profile(datum: NseDatum, s: float) -> list[tuple]:
    """Rows (j, q_j, lambda^s |U_{q_j}|_2, lambda^s |U_{q_j - 1}|_2) for H^s membership."""
    rows = []
    for j in range(1, datum.J + 1):
        L = lam(datum.q(j))
        rows.append((j, datum.q(j), L**s * math.sqrt(datum.l2_squared("shell", j)),
                     (L / 2) ** s * math.sqrt(datum.l2_squared("lower", j))))
    return rows
