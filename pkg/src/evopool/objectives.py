"""Benchmark objectives: deceptive bit traps and the shifted rotated Rastrigin group benchmark.

Two problem families are provided:

- Concatenated trap blocks over a bitstring (maximization). Each block of
  ``l`` bits scores by its unitation ``u`` (number of ones):
  ``a * (z - u) / z`` when ``u <= z``, else ``b * (u - z) / (l - z)``.
  With ``b > a`` the unique global optimum is the all-ones string while the
  gradient below the threshold points toward all-zeros.

- A group-rotated, shifted Rastrigin function over real vectors
  (minimization). The candidate is shifted by ``o``, its coordinates are
  scattered into D/m groups by a permutation, and each group is rotated by
  one shared orthogonal m x m matrix before the plain Rastrigin sum
  ``sum(x_i^2 - 10*cos(2*pi*x_i) + 10)`` is applied.

Everything here is pure and deterministic; instance generation is driven by
a single seeded MT19937 generator with a fixed draw order so that equal
seeds reproduce bit-identical instances.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "TrapParams",
    "trap_fitness",
    "trap_fitness_batch",
    "rastrigin",
    "rastrigin_batch",
    "rotated_rastrigin",
    "F15Spec",
    "f15",
    "f15_batch",
    "make_f15_spec",
]

# Pivot norms below this during orthonormalization trigger a full redraw.
_SINGULAR_EPS = 1e-12
_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class TrapParams:
    """Parameters of a concatenated deceptive trap function.

    l: bits per block, a: deceptive peak height, b: global peak height
    (must exceed ``a``), z: unitation threshold with 0 < z < l,
    num_blocks: number of concatenated blocks.
    """

    l: int = 4
    a: float = 1.0
    b: float = 2.0
    z: int = 3
    num_blocks: int = 40

    def __post_init__(self) -> None:
        if self.l < 2:
            raise ValueError(f"block length must be >= 2, got {self.l}")
        if not 0 < self.z < self.l:
            raise ValueError(f"threshold z must satisfy 0 < z < l, got z={self.z}, l={self.l}")
        if self.num_blocks < 1:
            raise ValueError(f"num_blocks must be >= 1, got {self.num_blocks}")
        if self.a <= 0:
            raise ValueError(f"deceptive peak a must be positive, got {self.a}")
        if self.b <= self.a:
            raise ValueError(f"global peak b must exceed a, got a={self.a}, b={self.b}")

    @property
    def genome_length(self) -> int:
        return self.l * self.num_blocks

    @property
    def max_fitness(self) -> float:
        """Value of the unique global optimum, the all-ones string."""
        return self.b * self.num_blocks


def _block_values(unitation: np.ndarray, p: TrapParams) -> np.ndarray:
    u = unitation.astype(np.float64)
    deceptive = p.a * (p.z - u) / p.z
    optimal = p.b * (u - p.z) / (p.l - p.z)
    return np.where(u <= p.z, deceptive, optimal)


def trap_fitness(bits, p: TrapParams) -> float:
    """Total trap value of one chromosome (maximization).

    ``bits`` is any 0/1 sequence of length ``p.l * p.num_blocks``.
    """
    c = np.asarray(bits, dtype=np.uint8)
    if c.ndim != 1 or c.size != p.genome_length:
        raise ValueError(
            f"chromosome length {c.size} does not match l*num_blocks = {p.genome_length}"
        )
    u = c.reshape(p.num_blocks, p.l).sum(axis=1)
    return float(_block_values(u, p).sum())


def trap_fitness_batch(pop: np.ndarray, p: TrapParams) -> np.ndarray:
    """Trap values for a (n, l*num_blocks) population matrix."""
    if pop.ndim != 2 or pop.shape[1] != p.genome_length:
        raise ValueError(
            f"population shape {pop.shape} does not match l*num_blocks = {p.genome_length}"
        )
    u = pop.reshape(pop.shape[0], p.num_blocks, p.l).sum(axis=2)
    return _block_values(u, p).sum(axis=1)


def rastrigin(x) -> float:
    """Plain separable Rastrigin value, sum(x_i^2 - 10*cos(2*pi*x_i) + 10)."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a vector, got array of shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("rastrigin requires finite inputs")
    return float(np.sum(v * v - 10.0 * np.cos(2.0 * np.pi * v) + 10.0))


def rastrigin_batch(X: np.ndarray) -> np.ndarray:
    """Row-wise Rastrigin values for an (n, D) matrix of finite reals."""
    return np.sum(X * X - 10.0 * np.cos(2.0 * np.pi * X) + 10.0, axis=-1)


def rotated_rastrigin(x, M: np.ndarray) -> float:
    """Rastrigin evaluated on the rotated row vector ``x @ M``."""
    v = np.asarray(x, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"rotation matrix must be square, got shape {M.shape}")
    if v.ndim != 1 or v.size != M.shape[0]:
        raise ValueError(f"vector length {v.size} does not match matrix size {M.shape[0]}")
    return rastrigin(v @ M)


@dataclass(frozen=True)
class F15Spec:
    """One concrete instance of the group-rotated shifted Rastrigin benchmark.

    Groups are formed by splitting the permutation ``P`` (0-based coordinate
    indices) into consecutive runs of ``m``; one shared orthogonal ``m x m``
    matrix rotates every group. The global minimum 0 is attained at ``o``.
    """

    D: int
    m: int
    seed: int
    lower_bound: float
    upper_bound: float
    o: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    P: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.D % self.m != 0:
            raise ValueError(f"dimension {self.D} is not divisible by group size {self.m}")
        if self.lower_bound >= self.upper_bound:
            raise ValueError(
                f"invalid bounds ({self.lower_bound}, {self.upper_bound})"
            )
        o = np.asarray(self.o, dtype=np.float64)
        M = np.asarray(self.M, dtype=np.float64)
        P = np.asarray(self.P, dtype=np.int64)
        object.__setattr__(self, "o", o)
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "P", P)
        if o.shape != (self.D,):
            raise ValueError(f"shift vector has shape {o.shape}, expected ({self.D},)")
        if np.any(o < self.lower_bound) or np.any(o > self.upper_bound):
            raise ValueError("shift vector leaves the search domain")
        if M.shape != (self.m, self.m):
            raise ValueError(f"rotation matrix has shape {M.shape}, expected ({self.m}, {self.m})")
        err = np.max(np.abs(M @ M.T - np.eye(self.m)))
        if err >= _ORTHO_TOL:
            raise ValueError(f"rotation matrix is not orthogonal (max |M M^T - I| = {err:.3e})")
        if P.shape != (self.D,) or not np.array_equal(np.sort(P), np.arange(self.D)):
            raise ValueError("P is not a permutation of 0..D-1")

    @property
    def num_groups(self) -> int:
        return self.D // self.m

    def to_json(self) -> str:
        """Archival JSON document; floats round-trip losslessly."""
        return json.dumps(
            {
                "D": self.D,
                "m": self.m,
                "seed": self.seed,
                "bounds": [self.lower_bound, self.upper_bound],
                "o": self.o.tolist(),
                "M": self.M.tolist(),
                "P": self.P.tolist(),
            }
        )

    @classmethod
    def from_json(cls, doc: str) -> "F15Spec":
        d = json.loads(doc)
        return cls(
            D=d["D"],
            m=d["m"],
            seed=d["seed"],
            lower_bound=d["bounds"][0],
            upper_bound=d["bounds"][1],
            o=np.array(d["o"], dtype=np.float64),
            M=np.array(d["M"], dtype=np.float64),
            P=np.array(d["P"], dtype=np.int64),
        )


def f15(x, spec: F15Spec) -> float:
    """Benchmark value of one candidate vector (minimization, 0 at ``spec.o``)."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size != spec.D:
        raise ValueError(f"candidate length {v.size} does not match dimension {spec.D}")
    if not np.all(np.isfinite(v)):
        raise ValueError("candidate must be finite")
    z = (v - spec.o)[spec.P].reshape(spec.num_groups, spec.m)
    return float(rastrigin_batch(z @ spec.M).sum())


def f15_batch(X: np.ndarray, spec: F15Spec) -> np.ndarray:
    """Benchmark values for an (n, D) matrix of candidates."""
    if X.ndim != 2 or X.shape[1] != spec.D:
        raise ValueError(f"population shape {X.shape} does not match dimension {spec.D}")
    Z = (X - spec.o)[:, spec.P].reshape(X.shape[0], spec.num_groups, spec.m)
    return rastrigin_batch(Z @ spec.M).sum(axis=1)


def _orthonormalize_rows(a: np.ndarray) -> np.ndarray | None:
    """Modified Gram-Schmidt on rows, two projection passes per row.

    Returns None when a pivot norm falls below the singularity threshold
    (probability ~0 for Gaussian input, but the caller must stay
    deterministic and redraws from the same stream).
    """
    q = np.array(a, dtype=np.float64)
    n = q.shape[0]
    for i in range(n):
        for _ in range(2):
            for j in range(i):
                q[i] -= (q[j] @ q[i]) * q[j]
        norm = float(np.linalg.norm(q[i]))
        if norm < _SINGULAR_EPS:
            return None
        q[i] /= norm
    return q


def make_f15_spec(
    D: int,
    m: int,
    seed: int,
    bounds: tuple[float, float] = (-5.0, 5.0),
) -> F15Spec:
    """Generate a reproducible benchmark instance from a single seed.

    All randomness comes from one MT19937 stream seeded with ``seed``; the
    draw order is part of the contract:

    1. shift vector ``o``: D uniforms over ``bounds``,
    2. rotation ``M``: an m x m standard-normal matrix orthonormalized by
       rows (redrawn whole from the same stream if near-singular),
    3. permutation ``P``: one unbiased shuffle of 0..D-1.
    """
    if D % m != 0:
        raise ValueError(f"dimension {D} is not divisible by group size {m}")
    lower, upper = float(bounds[0]), float(bounds[1])
    if lower >= upper:
        raise ValueError(f"invalid bounds ({lower}, {upper})")
    rng = np.random.Generator(np.random.MT19937(seed))
    o = rng.uniform(lower, upper, size=D)
    M = None
    while M is None:
        M = _orthonormalize_rows(rng.standard_normal((m, m)))
    P = rng.permutation(D)
    return F15Spec(
        D=D, m=m, seed=seed, lower_bound=lower, upper_bound=upper, o=o, M=M, P=P
    )
