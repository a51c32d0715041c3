"""Fast maps between function values at (transformed) lattice points and
series coefficients.

One complex FFT of length n does all the work in every space: a coefficient
for index k sits in spectrum slot (k.z mod n).  For the cosine and Chebyshev
spaces the sampled value vector is symmetric (f_i = f_{n-i}), the spectrum
is real and symmetric, and a half-length DCT-I (even n) or DCT-V (odd n) can
replace the FFT.  The Chebyshev maps are the cosine maps verbatim; only the
sampling locations differ.

The DFT supports arbitrary n: powers of two go straight to numpy, everything
else runs through a chirp/convolution step with power-of-two inner length.
``dft_direct`` is the O(n^2) reference evaluation kept as the test oracle
and used below n = 64.
"""

from __future__ import annotations

import math

import numpy as np

from .cbc import (_residues, verify_fourier, verify_plan_a, verify_plan_b,
                  verify_plan_c)
from .indexset import (IndexSet, mirror_expand, unique_sign_changes,
                       zero_count)
from .lattice import Rank1Lattice, TransformKind


class AliasingDetected(RuntimeError):
    """The lattice fails the reconstruction condition for this index set."""


class MissingCTable(ValueError):
    """Plan C needs the self-aliasing counts c_k."""


# ---------------------------------------------------------------------------
# one-dimensional transforms

_DIRECT_CUTOFF = 64


def dft_direct(x, direction: str = "forward") -> np.ndarray:
    """Direct O(n^2) DFT; forward is normalized by 1/n, inverse by 1."""
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[0]
    sign = -2j if direction == "forward" else 2j
    i = np.arange(n)
    matrix = np.exp(sign * np.pi / n * np.outer(i, i))
    out = matrix @ x
    return out / n if direction == "forward" else out


def _bluestein(x: np.ndarray, sign: float) -> np.ndarray:
    """Unnormalized DFT of arbitrary length via chirp multiplication and a
    power-of-two circular convolution."""
    n = x.shape[0]
    m = 1 << (2 * n - 1).bit_length()
    i = np.arange(n, dtype=np.int64)
    # w^(i^2/2) has period 2n in i^2; reduce first so the angles stay small
    half_sq = (i * i) % (2 * n)
    chirp = np.exp(sign * 1j * np.pi / n * half_sq)
    a = np.zeros(m, dtype=np.complex128)
    a[:n] = x * chirp
    b = np.zeros(m, dtype=np.complex128)
    b[:n] = np.conj(chirp)
    if n > 1:
        b[-(n - 1):] = np.conj(chirp[1:])[::-1]
    conv = np.fft.ifft(np.fft.fft(a) * np.fft.fft(b))
    return conv[:n] * chirp


def dft(x, direction: str = "forward") -> np.ndarray:
    """Length-n DFT, any n >= 1.

    forward:  F_kappa = (1/n) sum_i x_i e^(-2 pi i i kappa / n)
    inverse:  x_i = sum_kappa F_kappa e^(+2 pi i i kappa / n)
    """
    if direction not in ("forward", "inverse"):
        raise ValueError(f"unknown direction {direction!r}")
    x = np.asarray(x, dtype=np.complex128)
    n = x.shape[0]
    if n == 0:
        raise ValueError("empty input")
    if n < _DIRECT_CUTOFF:
        return dft_direct(x, direction)
    if n & (n - 1) == 0:
        out = np.fft.fft(x) if direction == "forward" else np.fft.ifft(x) * n
    else:
        out = _bluestein(x, -1.0 if direction == "forward" else 1.0)
    return out / n if direction == "forward" else out


def dct_i(x) -> np.ndarray:
    """DCT-I of length m+1 with the lattice normalization:
    F_kappa = (1/m) (x_0/2 + sum_{i=1}^{m-1} x_i cos(pi i kappa / m)
    + (x_m / 2) cos(pi kappa))."""
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0] - 1
    if m < 1:
        raise ValueError("DCT-I needs at least two samples")
    kappa = np.arange(m + 1)
    out = 0.5 * x[0] + 0.5 * x[m] * np.where(kappa % 2 == 0, 1.0, -1.0)
    if m > 1:
        i = np.arange(1, m)
        out = out + np.cos(np.pi / m * np.outer(kappa, i)) @ x[1:m]
    return out / m


def dct_v(x) -> np.ndarray:
    """DCT-V of length m with the lattice normalization for n = 2m-1:
    F_kappa = (1/(2m-1)) (x_0 + 2 sum_{i=1}^{m-1} x_i cos(2 pi i kappa / (2m-1)))."""
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0]
    if m < 1:
        raise ValueError("DCT-V needs at least one sample")
    n = 2 * m - 1
    out = np.full(m, x[0], dtype=np.float64)
    if m > 1:
        kappa = np.arange(m)
        i = np.arange(1, m)
        out = out + 2.0 * (np.cos(2.0 * np.pi / n * np.outer(kappa, i)) @ x[1:])
    return out / n


# ---------------------------------------------------------------------------
# coefficient tables

class CoefficientTable:
    """Map from multi-index to a series coefficient.

    ``space`` is one of fourier/cosine/chebyshev; Fourier entries are
    complex, the others real.
    """

    __slots__ = ("space", "dimension", "entries")

    def __init__(self, space: str, dimension: int, entries: dict):
        if space not in ("fourier", "cosine", "chebyshev"):
            raise ValueError(f"unknown space {space!r}")
        self.space = space
        self.dimension = int(dimension)
        self.entries = {tuple(int(c) for c in k): v
                        for k, v in entries.items()}

    def __getitem__(self, k):
        return self.entries[tuple(k)]

    def get(self, k, default=0.0):
        return self.entries.get(tuple(k), default)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries))

    def items(self):
        return ((k, self.entries[k]) for k in sorted(self.entries))

    def __repr__(self):
        return (f"CoefficientTable(space={self.space}, "
                f"dim={self.dimension}, size={len(self.entries)})")


# ---------------------------------------------------------------------------
# sampling

def sample_values(f, lattice: Rank1Lattice, kind: TransformKind) -> np.ndarray:
    """Length-n value vector of f at the transformed lattice points.

    For the tent and cosine-of-tent points only floor(n/2)+1 evaluations
    are made; the remaining slots are mirrored (f_{n-i} = f_i).
    """
    kind = TransformKind(kind)
    n = lattice.n
    if kind == TransformKind.IDENTITY:
        return np.asarray(f(lattice.points(kind)))
    half = n // 2
    head = np.asarray(f(lattice.points(kind, 0, half + 1)))
    values = np.empty(n, dtype=head.dtype)
    values[:half + 1] = head
    values[half + 1:] = values[1:n - half][::-1]
    return values


def _residue_slots(lattice: Rank1Lattice, L: IndexSet) -> np.ndarray:
    return _residues(L.as_array(), lattice.z, lattice.n)


# ---------------------------------------------------------------------------
# Fourier maps

def fourier_coeffs_from_values(lattice: Rank1Lattice, L: IndexSet, values,
                               unsafe: bool = False) -> CoefficientTable:
    """Fourier coefficients on L from samples at the raw lattice points."""
    values = np.asarray(values, dtype=np.complex128)
    if values.shape[0] != lattice.n:
        raise ValueError("value vector length differs from n")
    if not unsafe and not verify_fourier(lattice.z, lattice.n, L):
        raise AliasingDetected("two indices share a residue slot")
    spectrum = dft(values, "forward")
    slots = _residue_slots(lattice, L)
    entries = {k: complex(spectrum[r]) for k, r in zip(L, slots)}
    return CoefficientTable("fourier", L.dimension, entries)


def fourier_values_from_coeffs(lattice: Rank1Lattice, L: IndexSet,
                               coeffs) -> np.ndarray:
    """Values of the series at the lattice points by slot scatter + IFFT."""
    spectrum = np.zeros(lattice.n, dtype=np.complex128)
    slots = _residue_slots(lattice, L)
    for k, r in zip(L, slots):
        spectrum[r] += coeffs.get(k, 0.0) if hasattr(coeffs, "get") \
            else coeffs[k]
    return dft(spectrum, "inverse")


# ---------------------------------------------------------------------------
# cosine / Chebyshev maps (one engine; the spaces are isomorphic)

_PLAN_VERIFIERS = {"A": verify_plan_a, "B": verify_plan_b, "C": verify_plan_c}


def _check_plan(lattice: Rank1Lattice, L: IndexSet, plan: str) -> None:
    verifier = _PLAN_VERIFIERS[plan]
    if not verifier(lattice.z, lattice.n, L):
        raise AliasingDetected(f"lattice fails the plan {plan} "
                               "reconstruction condition")


def _spectrum_folded(values: np.ndarray, method: str) -> np.ndarray:
    """Real symmetric spectrum of a symmetric value vector, by FFT or by
    the half-length DCT (DCT-I for even n, DCT-V for odd n)."""
    n = values.shape[0]
    if method == "fft":
        return dft(values, "forward").real
    spectrum = np.empty(n, dtype=np.float64)
    if n % 2 == 0:
        m = n // 2
        half = dct_i(values[:m + 1])
        spectrum[:m + 1] = half
        spectrum[m + 1:] = half[1:m][::-1]
    else:
        m = (n + 1) // 2
        half = dct_v(values[:m])
        spectrum[:m] = half
        spectrum[m:] = half[1:][::-1]
    return spectrum


def cosine_coeffs_from_values(lattice: Rank1Lattice, L: IndexSet, plan: str,
                              values, c_table: dict | None = None,
                              method: str = "auto",
                              unsafe: bool = False) -> CoefficientTable:
    """Cosine coefficients on L from samples at tent-transformed points.

    The value vector must satisfy f_i = f_{n-i} (it does when produced by
    :func:`sample_values`).  Coefficient k is sqrt(2)^|k|_0 F_(k.z mod n),
    divided by c_k under plan C.
    """
    return _folded_coeffs_from_values("cosine", lattice, L, plan, values,
                                      c_table, method, unsafe)


def chebyshev_coeffs_from_values(lattice: Rank1Lattice, L: IndexSet,
                                 plan: str, values,
                                 c_table: dict | None = None,
                                 method: str = "auto",
                                 unsafe: bool = False) -> CoefficientTable:
    """Chebyshev coefficients on L from samples at the cosine-of-tent
    points; numerically identical to the cosine map."""
    return _folded_coeffs_from_values("chebyshev", lattice, L, plan, values,
                                      c_table, method, unsafe)


def _folded_coeffs_from_values(space, lattice, L, plan, values, c_table,
                               method, unsafe):
    if plan not in ("A", "B", "C"):
        raise ValueError(f"unknown plan {plan!r}")
    if method not in ("auto", "fft", "dct"):
        raise ValueError(f"unknown method {method!r}")
    if len(L) and L.as_array().min() < 0:
        raise ValueError(f"{space} indices must be nonnegative")
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] != lattice.n:
        raise ValueError("value vector length differs from n")
    if plan == "C" and c_table is None:
        raise MissingCTable("plan C needs the c_k table")
    if not unsafe:
        _check_plan(lattice, L, plan)
    # symmetrize i <-> n-i first: a no-op for sampled vectors, unchanged
    # coefficients otherwise (the dual functions are even in i), and the
    # half-length DCT path then applies to arbitrary inputs as well
    sym = values.copy()
    sym[1:] = 0.5 * (values[1:] + values[:0:-1])
    spectrum = _spectrum_folded(sym, "fft" if method == "auto" else method)
    entries = {}
    if plan == "A":
        # plan A integrates against the tent-composed basis itself, which
        # is the mean over the sign orbit of the plan-B dual functions, so
        # its coefficient averages the spectrum over the orbit slots (for
        # functions supported on L all orbit slots agree and this reduces
        # to the single lookup)
        rows, group_start = mirror_expand(L)
        orbit_slots = _residues(rows, lattice.z, lattice.n)
        for g, k in enumerate(L):
            lo, hi = group_start[g], group_start[g + 1]
            mean = float(np.mean(spectrum[orbit_slots[lo:hi]]))
            entries[k] = math.sqrt(2.0) ** zero_count(k) * mean
        return CoefficientTable(space, L.dimension, entries)
    slots = _residue_slots(lattice, L)
    for k, r in zip(L, slots):
        if plan == "C":
            try:
                ck = c_table[k]
            except KeyError:
                raise MissingCTable(f"no c entry for index {k}") from None
        else:
            ck = 1
        entries[k] = math.sqrt(2.0) ** zero_count(k) * spectrum[r] / ck
    return CoefficientTable(space, L.dimension, entries)


def cosine_values_from_coeffs(lattice: Rank1Lattice, L: IndexSet,
                              coeffs) -> np.ndarray:
    """Values of the cosine series at the tent-transformed lattice points.

    Every sign change of every index accumulates into its residue slot
    (plan-C sign orbits may share a slot, hence the +=), then one inverse
    FFT evaluates the series at all points.
    """
    n = lattice.n
    spectrum = np.zeros(n, dtype=np.float64)
    z = lattice.z
    for k in L:
        coeff = coeffs.get(k, 0.0) if hasattr(coeffs, "get") else coeffs[k]
        scaled = coeff / math.sqrt(2.0) ** zero_count(k)
        for h in unique_sign_changes(k):
            spectrum[sum(hj * zj for hj, zj in zip(h, z)) % n] += scaled
    return dft(spectrum, "inverse").real


def chebyshev_values_from_coeffs(lattice: Rank1Lattice, L: IndexSet,
                                 coeffs) -> np.ndarray:
    """Values of the Chebyshev series at the cosine-of-tent points."""
    return cosine_values_from_coeffs(lattice, L, coeffs)


# ---------------------------------------------------------------------------
# file formats

def write_values(values, path, n: int | None = None) -> None:
    """Value-vector file: ``n=<n>`` header, one value per line (complex
    values as ``<re> <im>``)."""
    values = np.asarray(values)
    n = values.shape[0] if n is None else n
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"n={n}\n")
        if np.iscomplexobj(values):
            for v in values:
                fh.write(f"{float(v.real)!r} {float(v.imag)!r}\n")
        else:
            for v in values:
                fh.write(f"{float(v)!r}\n")


def read_values(path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().split()
        n = int(dict(item.split("=", 1) for item in header)["n"])
        rows = [line.split() for line in fh if line.strip()]
    if len(rows) != n:
        raise ValueError(f"value file announces n={n} but holds {len(rows)}")
    if rows and len(rows[0]) == 2:
        return np.asarray([complex(float(a), float(b)) for a, b in rows])
    return np.asarray([float(r[0]) for r in rows])


def write_coefficients(table: CoefficientTable, path) -> None:
    """Coefficient file: ``dim=<d> space=<space>`` header, then one line
    ``<index components> <re> [<im>]`` per entry."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"dim={table.dimension} space={table.space}\n")
        for k, v in table.items():
            comps = " ".join(str(kj) for kj in k)
            if table.space == "fourier":
                v = complex(v)
                fh.write(f"{comps} {v.real!r} {v.imag!r}\n")
            else:
                fh.write(f"{comps} {float(v)!r}\n")


def read_coefficients(path) -> CoefficientTable:
    with open(path, "r", encoding="ascii") as fh:
        header = dict(item.split("=", 1) for item in fh.readline().split())
        d = int(header["dim"])
        space = header["space"]
        entries = {}
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            k = tuple(int(v) for v in parts[:d])
            if space == "fourier":
                entries[k] = complex(float(parts[d]), float(parts[d + 1]))
            else:
                entries[k] = float(parts[d])
    return CoefficientTable(space, d, entries)
