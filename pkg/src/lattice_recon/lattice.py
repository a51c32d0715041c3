"""Rank-1 lattices: point generation, tent/cosine point transforms,
equal-weight cubature and the naive exactness checks.

The exactness checks (`character`, `dual_check`, `plan_c_check_naive`) run in
pure Python integer arithmetic.  They are deliberately independent from the
accelerated verifiers in :mod:`lattice_recon.cbc` and serve as the oracles
the fast paths are tested against.
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from .indexset import IndexSet, unique_sign_changes

_INT32_LIMIT = 2**31


class TransformKind(str, Enum):
    """Point transform applied to the raw lattice points."""

    IDENTITY = "identity"
    TENT = "tent"
    COSINE_OF_TENT = "cosine_of_tent"


def tent(x):
    """Tent transform 1 - |2x - 1|, componentwise."""
    return 1.0 - np.abs(2.0 * np.asarray(x) - 1.0)


class Rank1Lattice:
    """Rank-1 lattice with n points and generating vector z.

    Components of z are stored reduced mod n and must be nonzero
    residues.  Points are generated on demand; nothing of size n is kept
    on the instance.
    """

    __slots__ = ("n", "z")

    def __init__(self, n: int, z):
        n = int(n)
        if n < 2:
            raise ValueError("need at least two lattice points")
        if n >= _INT32_LIMIT:
            raise ValueError("n must fit in 32 bits")
        z = tuple(int(zj) % n for zj in z)
        if not z:
            raise ValueError("generating vector must be nonempty")
        if any(zj == 0 for zj in z):
            raise ValueError("generating vector component divisible by n")
        self.n = n
        self.z = z

    @property
    def dimension(self) -> int:
        return len(self.z)

    def __repr__(self) -> str:
        return f"Rank1Lattice(n={self.n}, z={self.z})"

    def __eq__(self, other):
        if not isinstance(other, Rank1Lattice):
            return NotImplemented
        return self.n == other.n and self.z == other.z

    def __hash__(self):
        return hash((self.n, self.z))

    # -- points ---------------------------------------------------------

    def residue_matrix(self, start: int = 0, stop: int | None = None):
        """Integer residues (i * z mod n) for i in [start, stop)."""
        if stop is None:
            stop = self.n
        i = np.arange(start, stop, dtype=np.int64)
        return np.outer(i, np.asarray(self.z, dtype=np.int64)) % self.n

    def points(self, kind: TransformKind = TransformKind.IDENTITY,
               start: int = 0, stop: int | None = None) -> np.ndarray:
        """Transformed lattice points as a ((stop-start), d) float array."""
        kind = TransformKind(kind)
        res = self.residue_matrix(start, stop)
        if kind == TransformKind.COSINE_OF_TENT:
            # cos(pi * tent(i z / n)) equals cos(2 pi i z / n)
            return np.cos((2.0 * np.pi / self.n) * res)
        if kind == TransformKind.TENT:
            # integer folding: tent(r/n) = (n - |2r - n|) / n, so the
            # symmetry between residues r and n - r is exact in floats
            return (self.n - np.abs(2 * res - self.n)) / float(self.n)
        return res / float(self.n)

    def iter_points(self, kind: TransformKind = TransformKind.IDENTITY,
                    block: int = 65536):
        """Yield transformed points one at a time without materializing n x d."""
        for lo in range(0, self.n, block):
            hi = min(lo + block, self.n)
            for row in self.points(kind, lo, hi):
                yield row

    # -- cubature -------------------------------------------------------

    def cubature(self, f, kind: TransformKind = TransformKind.IDENTITY,
                 folded: bool | None = None, block: int = 65536):
        """Equal-weight average (1/n) sum_i f(point_i).

        ``f`` is evaluated on (m, d) blocks of points and must return a
        length-m vector.  For the cosine-of-tent points, ``folded=True``
        (the default there) evaluates only the floor(n/2)+1 distinct
        points with weights 1/n at the ends and 2/n in between.
        """
        kind = TransformKind(kind)
        if folded is None:
            folded = kind == TransformKind.COSINE_OF_TENT
        if folded and kind != TransformKind.COSINE_OF_TENT:
            raise ValueError("folded cubature requires cosine_of_tent points")
        n = self.n
        if folded:
            half = n // 2
            total = 0.0
            for lo in range(0, half + 1, block):
                hi = min(lo + block, half + 1)
                vals = np.asarray(f(self.points(kind, lo, hi)))
                weights = np.full(hi - lo, 2.0, dtype=np.float64)
                if lo == 0:
                    weights[0] = 1.0
                if n % 2 == 0 and hi == half + 1:
                    weights[-1] = 1.0
                total = total + np.sum(weights * vals)
            return total / n
        total = 0.0
        for lo in range(0, n, block):
            hi = min(lo + block, n)
            total = total + np.sum(np.asarray(f(self.points(kind, lo, hi))))
        return total / n

    # -- exact integer checks (oracle grade) -----------------------------

    def character(self, h) -> int:
        """1 if h.z = 0 mod n else 0; the value of Q_n on the h-th
        exponential, computed exactly."""
        h = tuple(int(hj) for hj in h)
        if len(h) != self.dimension:
            raise ValueError("index dimension mismatch")
        return 1 if sum(hj * zj for hj, zj in zip(h, self.z)) % self.n == 0 else 0

    def dual_check(self, A: IndexSet) -> bool:
        """True iff no nonzero index of A lies in the dual lattice.

        Pure-Python modular arithmetic; this is the oracle every fast
        verifier is tested against.
        """
        if A.dimension != self.dimension:
            raise ValueError("index set dimension mismatch")
        n = self.n
        z = self.z
        for h in A:
            if all(hj == 0 for hj in h):
                continue
            if sum(hj * zj for hj, zj in zip(h, z)) % n == 0:
                return False
        return True

    def plan_c_check_naive(self, L: IndexSet):
        """Naive pairwise check of the self-aliasing reconstruction
        condition; returns (ok, c_table or None).

        Requires sigma(k').z != k.z mod n for all k != k' in L and all
        sign changes sigma; on success c_table[k] counts the sign changes
        of k aliasing to k itself.
        """
        n = self.n
        z = self.z
        dots = {}
        orbits = {}
        for k in L:
            dots[k] = sum(kj * zj for kj, zj in zip(k, z)) % n
            orbits[k] = [
                sum(hj * zj for hj, zj in zip(h, z)) % n
                for h in unique_sign_changes(k)
            ]
        for k in L:
            for kp in L:
                if k == kp:
                    continue
                if dots[k] in orbits[kp]:
                    return False, None
        c_table = {k: orbits[k].count(dots[k]) for k in L}
        return True, c_table

    def unique_tent_point_count(self) -> int:
        """Number of distinct tent-transformed points, by exact residue
        comparison.

        Tent values of residue r and n - r coincide, so points are
        fingerprinted componentwise by min(r, n - r).  Equals
        floor(n/2 + 1) whenever gcd(n, z_j) = 1 for some j.
        """
        res = self.residue_matrix()
        folded = np.minimum(res, self.n - res)
        return int(np.unique(folded, axis=0).shape[0])

    # -- file format ------------------------------------------------------

    def to_line(self) -> str:
        return f"n={self.n} z=" + ",".join(str(zj) for zj in self.z)


def lattice_from_line(line: str) -> Rank1Lattice:
    fields = dict(item.split("=", 1) for item in line.split())
    return Rank1Lattice(int(fields["n"]),
                        [int(v) for v in fields["z"].split(",")])


def write_lattice(L: Rank1Lattice, path, c_table: dict | None = None) -> None:
    """Single-line lattice format, optionally followed by plan-C ``c:``
    lines ``c: <index components> <c_k>``."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(L.to_line() + "\n")
        if c_table:
            for k in sorted(c_table):
                comps = " ".join(str(kj) for kj in k)
                fh.write(f"c: {comps} {c_table[k]}\n")


def read_lattice(path) -> tuple[Rank1Lattice, dict | None]:
    with open(path, "r", encoding="ascii") as fh:
        lattice = lattice_from_line(fh.readline())
        c_table = {}
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if not line.startswith("c:"):
                raise ValueError(f"unexpected line in lattice file: {line!r}")
            parts = line[2:].split()
            c_table[tuple(int(v) for v in parts[:-1])] = int(parts[-1])
    return lattice, (c_table or None)
