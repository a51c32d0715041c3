import itertools

import numpy as np
import pytest

from lattice_recon import (CbcTask, EmptyCandidateSet, IndexSet, InvalidTask,
                           Rank1Lattice, RetryLimitExceeded, cbc_construct,
                           difference_set, eliminate_step,
                           eliminate_step_plan_c, is_prime,
                           mirrored, mixed_strategy_driver, next_prime,
                           project, required_n, sum_set, verify_fourier,
                           verify_nonzero, verify_plan_a, verify_plan_b,
                           verify_plan_c)
from lattice_recon.cbc import CandidateList
from conftest import random_downward, random_nonneg_set, random_signed_set


# ---------------------------------------------------------------------------
# primes

def test_is_prime_small_values():
    primes = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 10007}
    for n in range(-5, 40):
        assert is_prime(n) == (n in primes)
    assert is_prime(10007)
    assert not is_prime(10005)


def test_next_prime():
    assert next_prime(1) == 2
    assert next_prime(2) == 3
    assert next_prime(13) == 17
    assert next_prime(89) == 97


# ---------------------------------------------------------------------------
# required_n examples

def box(n, d=2):
    return IndexSet(list(itertools.product(range(n), repeat=d)),
                    domain="nonneg")


def test_required_n_fourier_reconstruction():
    task = CbcTask("fourier", "reconstruction", box(3))
    assert required_n(task) == 17  # |L (-) L| = 25, bound 13, next prime 17


def test_required_n_plan_c():
    L = IndexSet([(0,), (1,)], domain="nonneg")
    task = CbcTask("cosine", "reconstruction", L, plan="C")
    assert required_n(task) == 7  # bound max(2 * 3, 2) = 6


def test_required_n_fourier_integration_with_symmetry():
    L = IndexSet([(0,), (1,), (-1,)])
    assert required_n(CbcTask("fourier", "integration", L)) == 3
    # without central symmetry kappa drops to 1
    L2 = IndexSet([(0,), (1,), (2,)])
    assert required_n(CbcTask("fourier", "integration", L2)) == 5


def test_required_n_other_plans():
    L = IndexSet([(0,), (1,)], domain="nonneg")
    # M = {-1,0,1}; M+M = {-2..2} -> (5+1)/2 = 3, 2max = 2 -> prime 5
    assert required_n(CbcTask("cosine", "reconstruction", L, plan="A")) == 5
    # L+M = {-1,0,1,2} -> size 4, bound max(4, 2) -> prime 5
    assert required_n(CbcTask("cosine", "reconstruction", L, plan="B")) == 5
    # integration: |M \ 0| = 2 -> 2/2+1 = 2, max = 1 -> prime 3
    assert required_n(CbcTask("cosine", "integration", L)) == 3


# ---------------------------------------------------------------------------
# verifiers: spec examples

def test_verify_plan_a_examples():
    L = IndexSet([(0,), (1,)], domain="nonneg")
    assert verify_plan_a((1,), 5, L).ok
    assert not verify_plan_a((1,), 2, L).ok
    assert verify_plan_a((1,), 7, IndexSet([(0,)], domain="nonneg")).ok


def test_verify_plan_a_halved_agrees(rng):
    for _ in range(200):
        d = int(rng.integers(1, 4))
        L = random_nonneg_set(rng, d, int(rng.integers(1, 8)), 3)
        n = int(rng.integers(2, 60))
        z = tuple(int(v) for v in rng.integers(1, n, size=d))
        plain = verify_plan_a(z, n, L)
        halved = verify_plan_a(z, n, L, halved=True)
        assert plain.ok == halved.ok


def test_verify_plan_b_examples():
    L = IndexSet([(0,), (1,)], domain="nonneg")
    assert verify_plan_b((1,), 3, L).ok
    assert not verify_plan_b((1,), 2, IndexSet([(1,)], domain="nonneg")).ok
    assert verify_plan_b((1,), 5, IndexSet([(0,)], domain="nonneg")).ok


def test_verify_plan_c_examples():
    result = verify_plan_c((1,), 2, IndexSet([(1,)], domain="nonneg"))
    assert result.ok and result.c_table == {(1,): 2}

    result = verify_plan_c((1,), 5, IndexSet([(0,), (1,)], domain="nonneg"))
    assert result.ok and set(result.c_table.values()) == {1}

    # composite n allowed in verification; (2,) aliases with itself only
    L = IndexSet([(0,), (1,), (2,)], domain="nonneg")
    result = verify_plan_c((1,), 4, L)
    assert result.ok
    assert result.c_table == {(0,): 1, (1,): 1, (2,): 2}


def test_verify_fourier_examples():
    L = IndexSet(list(itertools.product((0, 1), repeat=2)), domain="nonneg")
    assert verify_fourier((1, 4), 17, L).ok
    assert not verify_fourier((1,), 17, IndexSet([(0,), (17,)])).ok
    assert verify_fourier((1,), 17, IndexSet([(5,)])).ok


def test_verifier_visit_counts(rng):
    for _ in range(50):
        d = int(rng.integers(1, 4))
        L = random_nonneg_set(rng, d, int(rng.integers(1, 8)), 3)
        n = next_prime(int(rng.integers(50, 400)))
        z = (1,) + tuple(int(v) for v in rng.integers(1, n, size=d - 1))
        mirror_size = L.sum_two_pow()
        r = verify_fourier(z, n, L)
        if r.ok:
            assert r.visits == len(L)
        for verifier in (verify_plan_a, verify_plan_b, verify_plan_c):
            r = verifier(z, n, L)
            if r.ok:
                assert r.visits == mirror_size


# ---------------------------------------------------------------------------
# verifier vs oracle equivalence and nesting

def _random_triple(rng):
    d = int(rng.integers(1, 5))
    L = random_nonneg_set(rng, d, int(rng.integers(1, 10)), 4)
    n = int(rng.integers(2, 102))
    z = tuple(int(v) for v in rng.integers(1, n, size=d))
    return L, n, z


def test_verifiers_match_naive_oracles(rng):
    for _ in range(300):
        L, n, z = _random_triple(rng)
        lat = Rank1Lattice(n, z)
        M = mirrored(L)
        assert verify_fourier(z, n, L).ok == lat.dual_check(difference_set(L))
        assert verify_plan_a(z, n, L).ok == lat.dual_check(sum_set(M, M))
        assert verify_plan_b(z, n, L).ok == lat.dual_check(sum_set(L, M))
        fast = verify_plan_c(z, n, L)
        naive_ok, naive_c = lat.plan_c_check_naive(L)
        assert fast.ok == naive_ok
        if fast.ok:
            assert fast.c_table == naive_c


def test_condition_nesting(rng):
    for _ in range(300):
        L, n, z = _random_triple(rng)
        a = verify_plan_a(z, n, L).ok
        b = verify_plan_b(z, n, L).ok
        c = verify_plan_c(z, n, L)
        if a:
            assert b
        if b:
            assert c.ok
            assert all(v == 1 for v in c.c_table.values())


# ---------------------------------------------------------------------------
# elimination

def test_eliminate_step_bootstrap_no_elimination():
    survivors = eliminate_step(IndexSet([(1,)]), (), 5)
    assert survivors.to_array().tolist() == [1, 2, 3, 4]


def test_eliminate_step_removes_unique_candidate():
    # row (h, h_s) = (1, 2), prefix z = (1): 2 z_s = -1 mod 5 -> z_s = 2
    survivors = eliminate_step(IndexSet([(1, 2)]), (1,), 5)
    assert survivors.to_array().tolist() == [1, 3, 4]


def test_eliminate_step_empty():
    rows = IndexSet([(1, 1), (1, 2), (1, 3), (1, 4)])
    with pytest.raises(EmptyCandidateSet):
        eliminate_step(rows, (1,), 5)


def test_eliminate_step_requires_prime():
    with pytest.raises(ValueError):
        eliminate_step(IndexSet([(1, 1)]), (1,), 6)


def test_eliminated_candidates_fail_the_condition(rng):
    # every removed candidate must genuinely violate the condition and
    # every survivor must satisfy it, provided the prefix satisfies the
    # step-(s-1) condition as the induction requires
    done = 0
    while done < 20:
        A = random_signed_set(rng, 3, 12, 4)
        n = next_prime(int(rng.integers(20, 80)))
        z_prefix = tuple(int(v) for v in rng.integers(1, n, size=2))
        A3 = project(A, 3, "full")
        prefix_set = project(A, 2, "zero")
        if not verify_nonzero(z_prefix, n, prefix_set).ok:
            continue
        done += 1
        survivors = set(eliminate_step(A3, z_prefix, n).to_array().tolist())
        for zs in range(1, n):
            z = z_prefix + (zs,)
            ok = verify_nonzero(z, n, A3).ok
            assert ok == (zs in survivors)


def test_plan_c_elimination_matches_verifier(rng):
    for _ in range(20):
        L = random_nonneg_set(rng, 2, 5, 3)
        n = next_prime(int(rng.integers(40, 200)))
        z_prefix = (1,)
        survivors = set(
            eliminate_step_plan_c(L, z_prefix, n).to_array().tolist())
        for zs in range(1, n):
            ok = verify_plan_c(z_prefix + (zs,), n, L).ok
            assert ok == (zs in survivors)


def test_candidate_list_operations():
    bad = np.zeros(7, dtype=bool)
    bad[3] = True
    cl = CandidateList(7, bad)
    assert len(cl) == 5
    assert cl.first() == 1
    cl.remove(1)
    assert cl.first() == 2
    assert list(cl) == [2, 4, 5, 6]
    for v in (2, 4, 5, 6):
        cl.remove(v)
    assert cl.first() is None


# ---------------------------------------------------------------------------
# construction

ALL_TASKS = [
    ("fourier", "integration", None),
    ("fourier", "reconstruction", None),
    ("cosine", "integration", None),
    ("cosine", "reconstruction", "A"),
    ("cosine", "reconstruction", "B"),
    ("cosine", "reconstruction", "C"),
    ("chebyshev", "reconstruction", "B"),
]


def _oracle_ok(task, lattice):
    L = task.base_set
    if task.goal == "integration":
        A = L if task.space == "fourier" else mirrored(L)
        return lattice.dual_check(A)
    if task.space == "fourier":
        return lattice.dual_check(difference_set(L))
    M = mirrored(L)
    if task.plan == "A":
        return lattice.dual_check(sum_set(M, M))
    if task.plan == "B":
        return lattice.dual_check(sum_set(L, M))
    return lattice.plan_c_check_naive(L)[0]


def test_construct_degenerate_zero_set():
    L = IndexSet([(0, 0, 0)], domain="nonneg")
    result = cbc_construct(CbcTask("fourier", "reconstruction", L))
    assert result.z == (1, 1, 1)


def test_construct_fourier_box_17():
    L = box(2)
    result = cbc_construct(CbcTask("fourier", "reconstruction", L, n=17))
    assert result.n == 17
    assert result.z[0] == 1
    assert verify_fourier(result.z, 17, L).ok
    assert _oracle_ok(CbcTask("fourier", "reconstruction", L),
                      result.lattice())


def test_construct_plan_a_d1():
    L = IndexSet([(0,), (1,)], domain="nonneg")
    result = cbc_construct(CbcTask("cosine", "reconstruction", L, plan="A",
                                   n=5))
    assert result.n == 5 and result.z == (1,)


@pytest.mark.parametrize("space,goal,plan", ALL_TASKS)
@pytest.mark.parametrize("strategy", ("brute_force", "elimination", "mixed"))
def test_strategies_all_produce_valid_vectors(space, goal, plan, strategy,
                                              rng):
    for _ in range(3):
        d = int(rng.integers(1, 5))
        L = random_downward(rng, d, int(rng.integers(2, 14)))
        task = CbcTask(space, goal, L, plan=plan, strategy=strategy)
        result = cbc_construct(task)
        assert result.z[0] == 1
        assert all(1 <= zj <= result.n - 1 for zj in result.z)
        assert _oracle_ok(task, result.lattice())
        if plan == "C":
            assert all(1 <= c <= 2 ** sum(1 for v in k if v)
                       for k, c in result.c_table.items())


@pytest.mark.parametrize("space,goal,plan", ALL_TASKS)
def test_existence_at_required_n(space, goal, plan, rng):
    # at n = required_n the elimination construction may never fail
    for _ in range(10):
        d = int(rng.integers(1, 6))
        L = random_downward(rng, d, int(rng.integers(2, 30)))
        task = CbcTask(space, goal, L, plan=plan, strategy="elimination")
        result = cbc_construct(task)
        assert result.stats.restarts == 0
        assert result.n == required_n(task)


def test_escalation_from_small_n():
    L = box(3)  # needs n = 17
    task = CbcTask("fourier", "reconstruction", L, n=5)
    result = cbc_construct(task)
    assert result.stats.restarts >= 1
    assert result.stats.n_sequence[0] == 5
    assert _oracle_ok(task, result.lattice())


def test_retry_limit():
    L = box(3)
    task = CbcTask("fourier", "reconstruction", L, n=5, retry_limit=1)
    with pytest.raises(RetryLimitExceeded):
        cbc_construct(task)


def test_composite_n_brute_force():
    L = IndexSet([(0,), (1,), (2,)], domain="nonneg")
    task = CbcTask("cosine", "reconstruction", L, plan="C", n=9,
                   strategy="brute_force")
    result = cbc_construct(task)
    assert result.n == 9
    assert result.lattice().plan_c_check_naive(L)[0]


def test_reduce_n():
    L = box(2)
    task = CbcTask("fourier", "reconstruction", L, n=101, reduce_n=True)
    result = cbc_construct(task)
    assert result.n < 101
    assert _oracle_ok(CbcTask("fourier", "reconstruction", L),
                      result.lattice())
    # reduced n still prime and the vector reduced accordingly
    assert is_prime(result.n)


def test_mixed_switch_recorded_and_valid(rng):
    # force the switch with a zero threshold factor on a case where the
    # first candidates fail
    L = random_downward(np.random.default_rng(7), 3, 12)
    task = CbcTask("cosine", "reconstruction", L, plan="B",
                   strategy="mixed", mixed_switch_factor=0.0)
    result = cbc_construct(task)
    assert _oracle_ok(task, result.lattice())
    if result.stats.switch_step is not None:
        labels = {st.step: st.strategy for st in result.stats.steps}
        assert labels[result.stats.switch_step] == "elimination"


def test_mixed_equals_brute_force_in_d1():
    L = IndexSet([(0,), (3,)], domain="nonneg")
    a = cbc_construct(CbcTask("cosine", "reconstruction", L, plan="B",
                              strategy="mixed"))
    b = cbc_construct(CbcTask("cosine", "reconstruction", L, plan="B",
                              strategy="brute_force"))
    assert a.z == b.z and a.n == b.n


def test_mixed_strategy_driver_wrapper():
    L = box(2)
    result = mixed_strategy_driver(
        CbcTask("fourier", "reconstruction", L, strategy="brute_force"))
    assert _oracle_ok(CbcTask("fourier", "reconstruction", L),
                      result.lattice())


def test_central_symmetry_halves_eliminations(rng):
    # for centrally symmetric auxiliary sets, paired indices eliminate the
    # same candidate: per-step eliminations <= (|A_s| - |A_{s-1}|)/2 + 1
    for _ in range(10):
        d = int(rng.integers(2, 5))
        L = random_downward(rng, d, int(rng.integers(4, 20)))
        task = CbcTask("fourier", "reconstruction", L,
                       strategy="elimination", projection="zero")
        result = cbc_construct(task)
        A = difference_set(L)
        sizes = [len(project(A, s, "zero")) for s in range(1, d + 1)]
        for st in result.stats.steps[1:]:
            allowed = (sizes[st.step - 1] - sizes[st.step - 2]) / 2 + 1
            assert st.eliminated <= allowed


def test_invalid_tasks():
    L = IndexSet([(0,), (1,)], domain="nonneg")
    with pytest.raises(InvalidTask):
        CbcTask("fourier", "reconstruction", L, plan="A")
    with pytest.raises(InvalidTask):
        CbcTask("cosine", "reconstruction", L)  # plan missing
    with pytest.raises(InvalidTask):
        CbcTask("cosine", "integration", L, plan="B")
    with pytest.raises(InvalidTask):
        CbcTask("cosine", "reconstruction", L, plan="C", projection="zero")
    with pytest.raises(InvalidTask):
        CbcTask("cosine", "reconstruction", L, plan="B",
                strategy="brute_force", projection="zero")
    with pytest.raises(InvalidTask):
        CbcTask("cosine", "reconstruction", L, plan="B", n=9,
                strategy="elimination")
    with pytest.raises(InvalidTask):
        CbcTask("fourier", "reconstruction",
                IndexSet([], dimension=2))
    with pytest.raises(InvalidTask):
        CbcTask("cosine", "reconstruction", IndexSet([(-1,)]), plan="B")


def test_mixed_generous_n_never_switches():
    L = box(2)
    task = CbcTask("fourier", "reconstruction", L, n=101, strategy="mixed")
    result = cbc_construct(task)
    assert result.stats.switch_step is None
    assert all(st.strategy == "brute_force" for st in result.stats.steps)


def test_fourier_reconstruction_on_signed_set(rng):
    rows = {tuple(int(v) for v in rng.integers(-3, 4, size=3))
            for _ in range(12)}
    L = IndexSet(sorted(rows | {(0, 0, 0)}))
    for strategy in ("brute_force", "elimination", "mixed"):
        task = CbcTask("fourier", "reconstruction", L, strategy=strategy)
        result = cbc_construct(task)
        assert result.lattice().dual_check(difference_set(L))


def test_components_must_fit_32_bits():
    L = IndexSet([(2**31,)])
    with pytest.raises(ValueError, match="32 bits"):
        verify_fourier((1,), 7, L)


def test_construction_is_deterministic(rng):
    L = random_downward(rng, 3, 12)
    task = CbcTask("cosine", "reconstruction", L, plan="B")
    first = cbc_construct(task)
    second = cbc_construct(task)
    assert first.z == second.z and first.n == second.n
