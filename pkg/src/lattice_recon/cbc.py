"""Component-by-component construction of lattice generating vectors.

Covers the generic nonzero-residue condition (integration in all spaces,
Fourier reconstruction, plans A and B for the cosine/Chebyshev spaces) and
the self-aliasing condition of plan C, with three search strategies:

* ``brute_force`` walks candidates cyclically and validates each with the
  linear-time lookup verifiers on full projections,
* ``elimination`` removes the single bad candidate per auxiliary index via
  modular inverses (prime n only),
* ``mixed`` starts brute force and switches to elimination once the failure
  count at a step exceeds a threshold.

Every constructed vector is re-validated against the pure-Python oracle
checks of :class:`lattice_recon.lattice.Rank1Lattice` before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .indexset import (IndexSet, difference_set, mirror_expand, mirrored,
                       project, properties, sum_set, unique_sign_changes)
from .lattice import Rank1Lattice

SPACES = ("fourier", "cosine", "chebyshev")
GOALS = ("integration", "reconstruction")
PLANS = ("A", "B", "C")
STRATEGIES = ("brute_force", "elimination", "mixed")
PROJECTIONS = ("zero", "full")

_INT32_LIMIT = 2**31


class InvalidTask(ValueError):
    """Inconsistent CBC task parameters."""


class EmptyCandidateSet(RuntimeError):
    """Elimination removed every candidate at one step."""


class RetryLimitExceeded(RuntimeError):
    """Construction kept failing after the configured number of prime
    escalations."""


# ---------------------------------------------------------------------------
# primes: deterministic Miller-Rabin, valid far beyond any n used here

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17)
_MR_VALID_BELOW = 341550071728321  # first composite passing these witnesses


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17):
        if n % p == 0:
            return n == p
    if n >= _MR_VALID_BELOW:
        raise ValueError("primality witnesses only valid below 3.4e14")
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    candidate = max(2, n + 1)
    while not is_prime(candidate):
        candidate += 1
    return candidate


# ---------------------------------------------------------------------------
# task description

@dataclass(frozen=True)
class CbcTask:
    """One CBC construction problem.

    ``n = 0`` selects the smallest prime satisfying the task's existence
    bound (see :func:`required_n`).  ``plan`` is meaningful only for
    reconstruction in the cosine/Chebyshev spaces.  ``projection`` selects
    the index-set projections the elimination strategy works on; the
    lookup verifiers of the brute-force path and plan C always need the
    full projection.
    """

    space: str
    goal: str
    base_set: IndexSet
    plan: str | None = None
    n: int = 0
    projection: str = "full"
    strategy: str = "mixed"
    mixed_switch_factor: float = 1.0
    retry_limit: int = 64
    reduce_n: bool = False

    def __post_init__(self):
        if self.space not in SPACES:
            raise InvalidTask(f"unknown space {self.space!r}")
        if self.goal not in GOALS:
            raise InvalidTask(f"unknown goal {self.goal!r}")
        if self.strategy not in STRATEGIES:
            raise InvalidTask(f"unknown strategy {self.strategy!r}")
        if self.projection not in PROJECTIONS:
            raise InvalidTask(f"unknown projection {self.projection!r}")
        if len(self.base_set) == 0:
            raise InvalidTask("base set is empty")
        nonperiodic = self.space in ("cosine", "chebyshev")
        if nonperiodic and self.base_set.as_array().size \
                and self.base_set.as_array().min() < 0:
            raise InvalidTask(f"{self.space} space needs indices in N_0^d")
        wants_plan = nonperiodic and self.goal == "reconstruction"
        if wants_plan:
            if self.plan not in PLANS:
                raise InvalidTask("cosine/chebyshev reconstruction needs "
                                  "plan A, B or C")
        elif self.plan is not None:
            raise InvalidTask(f"plan is meaningless for {self.space} "
                              f"{self.goal}")
        if self.plan == "C" and self.projection != "full":
            raise InvalidTask("plan C requires the full projection")
        if self.strategy in ("brute_force", "mixed") \
                and self.projection != "full":
            raise InvalidTask("the lookup verifiers require the full "
                              "projection")
        if self.n:
            if self.n < 2:
                raise InvalidTask("n must be at least 2")
            if self.strategy != "brute_force" and not is_prime(self.n):
                raise InvalidTask("composite n is only accepted with the "
                                  "brute-force strategy")
        if self.retry_limit < 1:
            raise InvalidTask("retry limit must be positive")
        if self.mixed_switch_factor < 0:
            raise InvalidTask("mixed switch factor must be nonnegative")


def _aux_set(task: CbcTask) -> IndexSet:
    """The auxiliary index set A of the generic condition h.z != 0 mod n."""
    L = task.base_set
    if task.goal == "integration":
        return L if task.space == "fourier" else mirrored(L)
    if task.space == "fourier":
        return difference_set(L)
    if task.plan == "A":
        M = mirrored(L)
        return sum_set(M, M)
    if task.plan == "B":
        return sum_set(L, mirrored(L))
    raise ValueError("plan C has no generic auxiliary set")


def required_n(task: CbcTask) -> int:
    """Smallest prime strictly above the task's CBC existence bound.

    Bounds (kappa = 2 for centrally symmetric auxiliary sets):
    integration  n > |A \\ {0}| / kappa + 1 and n > max(L);
    Fourier reconstruction n > (|L (-) L| + 1) / 2 and n > 2 max(L);
    plan A  n > (|M (+) M| + 1) / 2, plan B  n > |L (+) M|,
    plan C  n > |L| |M|, each together with n > 2 max(L).
    """
    L = task.base_set
    max_l = L.max_abs()
    if task.goal == "integration":
        A = _aux_set(task)
        size = len(A) - (1 if A.has_zero() else 0)
        if task.space == "fourier":
            kappa = 2 if properties(L).centrally_symmetric else 1
        else:
            kappa = 2  # mirrored sets are centrally symmetric
        n = 2
        while not (n * kappa > size + kappa and n > max_l):
            n = next_prime(n)
        return n
    if task.plan == "C":
        bound_card = len(L) * len(mirrored(L))
        n = 2
        while not (n > bound_card and n > 2 * max_l):
            n = next_prime(n)
        return n
    A = _aux_set(task)
    n = 2
    if task.plan == "B":
        while not (n > len(A) and n > 2 * max_l):
            n = next_prime(n)
    else:
        while not (2 * n > len(A) + 1 and n > 2 * max_l):
            n = next_prime(n)
    return n


# ---------------------------------------------------------------------------
# verifiers (lookup algorithms on full projections)

@dataclass(frozen=True)
class VerifyResult:
    """Outcome of a lookup verifier.

    ``visits`` counts the residues the scan examined; it equals the number
    of prepared rows on success and is 0 on failure.  ``c_table`` carries
    the plan-C self-aliasing counts.
    """

    ok: bool
    visits: int
    c_table: dict | None = None

    def __bool__(self) -> bool:
        return self.ok


def _as_rows(arr: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(arr, dtype=np.int64)
    if rows.size and np.abs(rows).max() >= _INT32_LIMIT:
        raise ValueError("index components must fit in 32 bits")
    return rows


def _z_vector(z, n: int) -> np.ndarray:
    zv = np.asarray([int(zj) % n for zj in z], dtype=np.int64)
    return zv


def _residues(rows: np.ndarray, z, n: int) -> np.ndarray:
    return kernels.dot_mod(_as_rows(rows), _z_vector(z, n), int(n))


def verify_fourier(z, n: int, Ls: IndexSet) -> VerifyResult:
    """All dot products of Ls distinct mod n (Fourier reconstruction)."""
    res = _residues(Ls.as_array(), z, n)
    ok, visits = kernels.check_distinct(res, int(n))
    return VerifyResult(bool(ok), int(visits))


def verify_plan_a(z, n: int, Ls: IndexSet, halved: bool = False) -> VerifyResult:
    """All dot products of the mirrored set of Ls distinct mod n."""
    if halved:
        return _verify_plan_a_halved(z, n, Ls)
    rows, _ = mirror_expand(Ls)
    res = _residues(rows, z, n)
    ok, visits = kernels.check_distinct(res, int(n))
    return VerifyResult(bool(ok), int(visits))


def _verify_plan_a_halved(z, n: int, Ls: IndexSet) -> VerifyResult:
    # fix the sign of the first nonzero component and mark both alpha and
    # n - alpha per visited row; marking order follows the plain scan
    n = int(n)
    seen = np.zeros(n, dtype=bool)
    visits = 0
    zero = (0,) * Ls.dimension
    if zero in Ls:
        seen[0] = True
        visits += 1
    zv = [int(zj) % n for zj in z]
    for k in Ls:
        if k == zero:
            continue
        first_nz = next(j for j, kj in enumerate(k) if kj != 0)
        for h in unique_sign_changes(k):
            if h[first_nz] != k[first_nz]:  # keep the +1 half of the orbit
                continue
            alpha = sum(hj * zj for hj, zj in zip(h, zv)) % n
            visits += 1
            if seen[alpha]:
                return VerifyResult(False, 0)
            seen[alpha] = True
            mirror = (n - alpha) % n
            if seen[mirror]:
                return VerifyResult(False, 0)
            seen[mirror] = True
    return VerifyResult(True, visits)


def verify_plan_b(z, n: int, Ls: IndexSet) -> VerifyResult:
    """Two-bit-string plan-B check: no sign change of any index may hit the
    plain dot product of any index."""
    rows, group_start = mirror_expand(Ls)
    res = _residues(rows, z, n)
    ok, visits = kernels.check_plan_b(res, group_start, int(n))
    return VerifyResult(bool(ok), int(visits))


def verify_plan_c(z, n: int, Ls: IndexSet) -> VerifyResult:
    """Plan-C check allowing self-aliasing; on success carries the c_k
    counts (1 <= c_k <= 2^|k|_0)."""
    rows, group_start = mirror_expand(Ls)
    res = _residues(rows, z, n)
    ok, visits, c = kernels.check_plan_c(res, group_start, int(n))
    table = None
    if ok:
        table = {k: int(ck) for k, ck in zip(Ls, c)}
    return VerifyResult(bool(ok), int(visits), table)


def verify_nonzero(z, n: int, A_s: IndexSet) -> VerifyResult:
    """All nonzero indices of A_s stay out of the dual lattice."""
    rows = A_s.without_zero().as_array()
    res = _residues(rows, z, n)
    ok, visits = kernels.check_nonzero(res)
    return VerifyResult(bool(ok), int(visits))


# ---------------------------------------------------------------------------
# elimination

class CandidateList:
    """Good-candidate structure over Z_n^* = {1, .., n-1}.

    Doubly linked pointers over the value range give O(1) removal and O(1)
    extraction of the smallest survivor; index 0 is the head sentinel and
    index n the tail sentinel.
    """

    __slots__ = ("n", "_next", "_prev", "_count")

    def __init__(self, n: int, bad: np.ndarray | None = None):
        self.n = int(n)
        good = np.flatnonzero(~bad[1:self.n]) + 1 if bad is not None \
            else np.arange(1, self.n)
        chain = np.concatenate(([0], good, [self.n])).astype(np.int64)
        self._next = np.full(self.n + 1, self.n, dtype=np.int64)
        self._prev = np.zeros(self.n + 1, dtype=np.int64)
        self._next[chain[:-1]] = chain[1:]
        self._prev[chain[1:]] = chain[:-1]
        self._count = int(good.shape[0])

    def __len__(self) -> int:
        return self._count

    def first(self) -> int | None:
        head = int(self._next[0])
        return None if head == self.n else head

    def remove(self, value: int) -> None:
        nxt = int(self._next[value])
        prv = int(self._prev[value])
        self._next[prv] = nxt
        self._prev[nxt] = prv
        self._count -= 1

    def __iter__(self):
        value = int(self._next[0])
        while value != self.n:
            yield value
            value = int(self._next[value])

    def to_array(self) -> np.ndarray:
        return np.fromiter(self, dtype=np.int64, count=self._count)


def eliminate_step(A_s: IndexSet, z_prefix, n: int) -> CandidateList:
    """Generic elimination for one step: every (h, h_s) in A_s \\ {0} with
    h_s != 0 mod n and h.z != 0 mod n removes the single candidate solving
    h_s z_s = -h.z mod n.

    Raises :class:`EmptyCandidateSet` when nothing survives.
    """
    if not is_prime(n):
        raise ValueError("elimination needs a prime n")
    s = A_s.dimension
    if len(z_prefix) != s - 1:
        raise ValueError("prefix length must be s - 1")
    rows = _as_rows(A_s.without_zero().as_array())
    bad = np.zeros(n, dtype=bool)
    if rows.shape[0]:
        if s == 1:
            prefix = np.zeros(rows.shape[0], dtype=np.int64)
        else:
            prefix = _residues(rows[:, :s - 1], z_prefix, n)
        last = rows[:, s - 1] % n
        kernels.mark_bad_generic(prefix, last, int(n), bad)
    survivors = CandidateList(n, bad)
    if len(survivors) == 0:
        raise EmptyCandidateSet(f"all candidates eliminated ({n=})")
    return survivors


def eliminate_step_plan_c(L_s: IndexSet, z_prefix, n: int) -> CandidateList:
    """Plan-C elimination over distinct full-projection index pairs and all
    sign changes of the second pair member."""
    if not is_prime(n):
        raise ValueError("elimination needs a prime n")
    s = L_s.dimension
    if len(z_prefix) != s - 1:
        raise ValueError("prefix length must be s - 1")
    leads = _as_rows(L_s.as_array())
    mrows, group_start = mirror_expand(L_s)
    mrows = _as_rows(mrows)
    counts = np.diff(group_start)
    mir_group = np.repeat(np.arange(len(L_s), dtype=np.int64), counts)
    if s == 1:
        lead_prefix = np.zeros(leads.shape[0], dtype=np.int64)
        mir_prefix = np.zeros(mrows.shape[0], dtype=np.int64)
    else:
        lead_prefix = _residues(leads[:, :s - 1], z_prefix, n)
        mir_prefix = _residues(mrows[:, :s - 1], z_prefix, n)
    lead_last = leads[:, s - 1] % n
    mir_last = mrows[:, s - 1] % n
    bad = np.zeros(n, dtype=bool)
    kernels.mark_bad_plan_c(lead_prefix, lead_last, mir_prefix, mir_last,
                            mir_group, int(n), bad)
    survivors = CandidateList(n, bad)
    if len(survivors) == 0:
        raise EmptyCandidateSet(f"all candidates eliminated ({n=})")
    return survivors


# ---------------------------------------------------------------------------
# construction

@dataclass
class StepStats:
    step: int
    strategy: str
    n_fail: int = 0
    eliminated: int = 0


@dataclass
class CbcStats:
    n_sequence: list = field(default_factory=list)
    restarts: int = 0
    switch_step: int | None = None
    steps: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_sequence": list(self.n_sequence),
            "restarts": self.restarts,
            "switch_step": self.switch_step,
            "steps": [vars(st) for st in self.steps],
        }


@dataclass(frozen=True)
class CbcResult:
    z: tuple
    n: int
    c_table: dict | None
    stats: CbcStats

    def lattice(self) -> Rank1Lattice:
        return Rank1Lattice(self.n, self.z)


class _StepFailed(Exception):
    def __init__(self, step: int, reason: str):
        super().__init__(f"step {step}: {reason}")
        self.step = step
        self.reason = reason


class _Builder:
    """Holds the projection data of one task; reused across n escalations."""

    def __init__(self, task: CbcTask):
        self.task = task
        L = task.base_set
        self.d = L.dimension
        _as_rows(L.as_array())  # 32-bit guard
        if task.goal == "integration":
            self.cond = kernels.COND_NONZERO
        elif task.space == "fourier":
            self.cond = kernels.COND_DISTINCT
        elif task.plan == "A":
            self.cond = kernels.COND_DISTINCT
        elif task.plan == "B":
            self.cond = kernels.COND_PLAN_B
        else:
            self.cond = kernels.COND_PLAN_C
        # full projections drive the lookup verifiers (and plan C always)
        self.proj = [None] + [project(L, s, "full")
                              for s in range(1, self.d + 1)]
        self._dummy = np.zeros(1, dtype=np.int64)
        self.step_rows = [None]
        self.step_groups = [None]
        self.thresholds = [None]
        for s in range(1, self.d + 1):
            Ls = self.proj[s]
            if self.cond == kernels.COND_NONZERO:
                source = Ls if task.space == "fourier" else mirrored(Ls)
                rows = _as_rows(source.without_zero().as_array())
                groups = self._dummy
            elif task.space == "fourier":
                rows = _as_rows(Ls.as_array())
                groups = self._dummy
            else:
                rows, groups = mirror_expand(Ls)
                rows = _as_rows(rows)
            self.step_rows.append(rows)
            self.step_groups.append(groups)
            # brute-force switching threshold: |L_s| for Fourier, |M(L_s)|
            # otherwise (sign orbits of distinct nonnegative indices are
            # disjoint, so |M(L_s)| equals the summed orbit sizes)
            if task.space == "fourier":
                self.thresholds.append(len(Ls))
            else:
                self.thresholds.append(Ls.sum_two_pow())
        self.generic_A = None
        if not (task.goal == "reconstruction" and task.plan == "C"):
            self.generic_A = _aux_set(task)
            _as_rows(self.generic_A.as_array())

    # -- step condition check for a fixed candidate vector ---------------

    def check_step(self, z, n: int, s: int) -> bool:
        rows = self.step_rows[s]
        if rows.shape[0] == 0:
            return True
        res = _residues(rows, z, n)
        if self.cond == kernels.COND_NONZERO:
            return bool(kernels.check_nonzero(res)[0])
        if self.cond == kernels.COND_DISTINCT:
            return bool(kernels.check_distinct(res, int(n))[0])
        if self.cond == kernels.COND_PLAN_B:
            return bool(kernels.check_plan_b(res, self.step_groups[s],
                                             int(n))[0])
        return bool(kernels.check_plan_c(res, self.step_groups[s],
                                         int(n))[0])

    # -- elimination data for one step -----------------------------------

    def _generic_step_set(self, s: int, projection: str) -> IndexSet:
        A = self.generic_A
        arr = A.as_array()
        if projection == "zero":
            keep = np.all(arr[:, s:] == 0, axis=1) if s < self.d \
                else np.ones(arr.shape[0], dtype=bool)
            return IndexSet(arr[keep][:, :s], dimension=s, domain=A.domain)
        return IndexSet(arr[:, :s], dimension=s, domain=A.domain)

    def eliminate(self, z, n: int, s: int, projection: str) -> CandidateList:
        if self.cond == kernels.COND_PLAN_C:
            return eliminate_step_plan_c(self.proj[s], z, n)
        return eliminate_step(self._generic_step_set(s, projection), z, n)

    # -- one full pass at a fixed n ---------------------------------------

    def construct_at(self, n: int):
        task = self.task
        z: list[int] = []
        steps: list[StepStats] = []
        switch_step: int | None = None
        eliminating = task.strategy == "elimination"
        for s in range(1, self.d + 1):
            if s == 1:
                z = [1]
                label = "elimination" if eliminating else "brute_force"
                if eliminating and self.cond != kernels.COND_PLAN_C:
                    # the elimination induction only needs the projected
                    # auxiliary set, which may be smaller than the full one
                    A1 = self._generic_step_set(1, task.projection)
                    ok1 = bool(verify_nonzero(z, n, A1))
                else:
                    ok1 = self.check_step(z, n, 1)
                if not ok1:
                    raise _StepFailed(1, "z_1 = 1 violates the step "
                                         "condition (n too small)")
                steps.append(StepStats(1, label))
                continue
            brute_fails = 0
            if not eliminating:
                rows = self.step_rows[s]
                prefix = _residues(rows[:, :s - 1], z, n) \
                    if rows.shape[0] else np.zeros(0, dtype=np.int64)
                last = rows[:, s - 1] % n if rows.shape[0] \
                    else np.zeros(0, dtype=np.int64)
                if task.strategy == "mixed":
                    max_fail = int(task.mixed_switch_factor
                                   * self.thresholds[s])
                else:
                    max_fail = n
                zs, n_fail = kernels.brute_force_step(
                    prefix, last, self.step_groups[s], int(n),
                    int(z[-1] + 1), int(max_fail), int(self.cond))
                if zs > 0:
                    z.append(int(zs))
                    steps.append(StepStats(s, "brute_force", n_fail=int(n_fail)))
                    continue
                if task.strategy == "mixed" and n_fail > max_fail:
                    eliminating = True
                    switch_step = s
                    brute_fails = int(n_fail)
                else:
                    raise _StepFailed(s, "brute force exhausted all "
                                         "candidates")
            # elimination path (strategy, or mixed after the switch)
            projection = "zero" if task.strategy == "mixed" \
                else task.projection
            try:
                survivors = self.eliminate(z, n, s, projection)
            except EmptyCandidateSet as exc:
                raise _StepFailed(s, str(exc))
            zs = survivors.first()
            z.append(int(zs))
            eliminated = (n - 1) - len(survivors)
            steps.append(StepStats(s, "elimination", n_fail=brute_fails,
                                   eliminated=int(eliminated)))
        return z, steps, switch_step


def _validate_full(task: CbcTask, lattice: Rank1Lattice):
    """Naive-oracle validation of a finished vector; returns
    (ok, c_table or None)."""
    L = task.base_set
    if task.goal == "reconstruction" and task.plan == "C":
        return lattice.plan_c_check_naive(L)
    A = _aux_set(task)
    return lattice.dual_check(A), None


def cbc_construct(task: CbcTask) -> CbcResult:
    """Run the CBC construction for a task; escalates n to the next prime
    and restarts whenever a step fails, up to ``task.retry_limit`` tries."""
    builder = _Builder(task)
    n = task.n if task.n else required_n(task)
    stats = CbcStats()
    last_failure = None
    for _ in range(task.retry_limit):
        stats.n_sequence.append(n)
        try:
            z, steps, switch_step = builder.construct_at(n)
        except _StepFailed as exc:
            last_failure = exc
            stats.restarts += 1
            n = next_prime(n)
            continue
        lattice = Rank1Lattice(n, z)
        ok, c_table = _validate_full(task, lattice)
        if not ok:
            # cannot happen when the step checks are sound; escalate anyway
            last_failure = _StepFailed(builder.d, "oracle validation failed")
            stats.restarts += 1
            n = next_prime(n)
            continue
        stats.steps = steps
        stats.switch_step = switch_step
        if task.reduce_n:
            n, z, c_table = _reduce_n(task, n, z, c_table)
        return CbcResult(tuple(z), n, c_table, stats)
    raise RetryLimitExceeded(
        f"no valid vector after {task.retry_limit} attempts; last failure: "
        f"{last_failure}")


def _reduce_n(task: CbcTask, n: int, z, c_table):
    """Try successively smaller primes for the fixed z, keeping the last
    value that still passes the full oracle validation."""
    best = (n, list(z), c_table)
    p = n
    while True:
        p = _previous_prime(p)
        if p is None:
            break
        zp = [zj % p for zj in z]
        if any(v == 0 for v in zp):
            break
        ok, table = _validate_full(task, Rank1Lattice(p, zp))
        if not ok:
            break
        best = (p, zp, table)
    return best[0], best[1], best[2]


def _previous_prime(n: int):
    candidate = n - 1
    while candidate >= 2:
        if is_prime(candidate):
            return candidate
        candidate -= 1
    return None


def mixed_strategy_driver(task: CbcTask) -> CbcResult:
    """Convenience wrapper forcing the mixed strategy."""
    if task.strategy != "mixed":
        task = replace(task, strategy="mixed")
    return cbc_construct(task)
