"""Hot integer kernels behind the CBC search and the residue verifiers.

Every kernel exists twice: an ``@njit`` loop (``*_loop``) and a vectorized
numpy twin (``*_numpy``).  The public name is bound to the loop version when
numba is active (see :mod:`lattice_recon._accel`), otherwise to the numpy
version.  Both implementations must agree exactly; the test suite runs the
pairs against each other on random inputs.

All residue arithmetic is exact 64-bit integer arithmetic with per-term
reduction mod n, valid as long as every |h_j|, z_j and n fits in 32 bits.

Condition codes shared by the candidate-search kernels:

====  =========================================================
code  condition on the residues of the prepared rows
====  =========================================================
0     all residues nonzero                 (integral exactness)
1     all residues pairwise distinct       (Fourier / plan A)
2     two-bit-string check per sign group  (plan B)
3     self-aliasing allowed per group      (plan C)
====  =========================================================
"""

import numpy as np

from ._accel import HAVE_NUMBA, njit

COND_NONZERO = 0
COND_DISTINCT = 1
COND_PLAN_B = 2
COND_PLAN_C = 3


# ---------------------------------------------------------------------------
# dot products mod n

@njit(cache=True)
def _dot_mod_loop(rows, z, n):
    out = np.empty(rows.shape[0], dtype=np.int64)
    for i in range(rows.shape[0]):
        acc = np.int64(0)
        for j in range(rows.shape[1]):
            acc = (acc + (rows[i, j] % n) * z[j]) % n
        out[i] = acc
    return out


def _dot_mod_numpy(rows, z, n):
    if rows.shape[0] == 0:
        return np.empty(0, dtype=np.int64)
    terms = np.mod(rows, n) * np.mod(z, n) % n
    return terms.sum(axis=1) % n


# ---------------------------------------------------------------------------
# verifier checks on precomputed residues
#
# `visits` is the number of residues the canonical scan examines; it equals
# len(res) on success and is reported as 0 on failure so that the two
# backends stay bit-identical.

@njit(cache=True)
def _check_nonzero_loop(res):
    for i in range(res.shape[0]):
        if res[i] == 0:
            return False, 0
    return True, res.shape[0]


def _check_nonzero_numpy(res):
    if np.any(res == 0):
        return False, 0
    return True, int(res.shape[0])


@njit(cache=True)
def _check_distinct_loop(res, n):
    seen = np.zeros(n, dtype=np.uint8)
    for i in range(res.shape[0]):
        a = res[i]
        if seen[a]:
            return False, 0
        seen[a] = 1
    return True, res.shape[0]


def _check_distinct_numpy(res, n):
    if np.unique(res).shape[0] != res.shape[0]:
        return False, 0
    return True, int(res.shape[0])


@njit(cache=True)
def _check_plan_b_loop(res, group_start, n):
    # s1 marks plain-index residues, s2 marks every residue (s1 is a subset
    # of s2).  s1[a] is set before the sign rows are scanned, so a sign row
    # may not collide with its own plain residue: no self-aliasing.
    s1 = np.zeros(n, dtype=np.uint8)
    s2 = np.zeros(n, dtype=np.uint8)
    for g in range(group_start.shape[0] - 1):
        lo = group_start[g]
        hi = group_start[g + 1]
        a = res[lo]
        if s2[a]:
            return False, 0
        s2[a] = 1
        s1[a] = 1
        for r in range(lo + 1, hi):
            a2 = res[r]
            if s1[a2]:
                return False, 0
            s2[a2] = 1
    return True, res.shape[0]


def _check_plan_b_numpy(res, group_start, n):
    leads = res[group_start[:-1]]
    if np.unique(leads).shape[0] != leads.shape[0]:
        return False, 0
    is_lead = np.zeros(res.shape[0], dtype=bool)
    is_lead[group_start[:-1]] = True
    if np.isin(res[~is_lead], leads).any():
        return False, 0
    return True, int(res.shape[0])


@njit(cache=True)
def _check_plan_c_loop(res, group_start, n):
    # Same two bit strings as plan B, but s1[a] is set only after the sign
    # rows are scanned: a sign residue may equal its own plain residue
    # (self-aliasing) and c counts how often that happens.
    ngroups = group_start.shape[0] - 1
    c = np.ones(ngroups, dtype=np.int64)
    s1 = np.zeros(n, dtype=np.uint8)
    s2 = np.zeros(n, dtype=np.uint8)
    for g in range(ngroups):
        lo = group_start[g]
        hi = group_start[g + 1]
        a = res[lo]
        if s2[a]:
            return False, 0, c
        s2[a] = 1
        for r in range(lo + 1, hi):
            a2 = res[r]
            if a2 == a:
                c[g] += 1
            if s1[a2]:
                return False, 0, c
            s2[a2] = 1
        s1[a] = 1
    return True, res.shape[0], c


def _check_plan_c_numpy(res, group_start, n):
    ngroups = group_start.shape[0] - 1
    c = np.ones(ngroups, dtype=np.int64)
    leads = res[group_start[:-1]]
    order = np.argsort(leads, kind="stable")
    sorted_leads = leads[order]
    if np.any(sorted_leads[1:] == sorted_leads[:-1]):
        return False, 0, c
    is_lead = np.zeros(res.shape[0], dtype=bool)
    is_lead[group_start[:-1]] = True
    sign_rows = np.flatnonzero(~is_lead)
    signs = res[sign_rows]
    sign_group = np.searchsorted(group_start[1:], sign_rows, side="right")
    pos = np.minimum(np.searchsorted(sorted_leads, signs), ngroups - 1)
    hit = sorted_leads[pos] == signs
    hit_group = order[pos[hit]]
    own = hit_group == sign_group[hit]
    if np.any(~own):
        return False, 0, c
    np.add.at(c, hit_group[own], 1)
    return True, int(res.shape[0]), c


# ---------------------------------------------------------------------------
# brute-force candidate search for one CBC step
#
# Residue of row i under candidate zs is (prefix[i] + last[i] * zs) % n with
# prefix and last already reduced mod n.  Candidates run cyclically through
# 1..n-1 starting at `start`.  Returns (zs, n_fail); zs = -1 when no
# candidate was accepted, in which case n_fail > max_fail means the search
# was capped rather than exhausted.

@njit(cache=True)
def _brute_force_step_loop(prefix, last, group_start, n, start, max_fail,
                           cond):
    nrows = prefix.shape[0]
    stamp1 = np.zeros(n, dtype=np.int64)
    stamp2 = np.zeros(n, dtype=np.int64)
    n_fail = 0
    for t in range(n - 1):
        zs = (start - 1 + t) % (n - 1) + 1
        tick = t + 1
        ok = True
        if cond == COND_NONZERO:
            for i in range(nrows):
                if (prefix[i] + last[i] * zs) % n == 0:
                    ok = False
                    break
        elif cond == COND_DISTINCT:
            for i in range(nrows):
                a = (prefix[i] + last[i] * zs) % n
                if stamp1[a] == tick:
                    ok = False
                    break
                stamp1[a] = tick
        elif cond == COND_PLAN_B:
            for g in range(group_start.shape[0] - 1):
                lo = group_start[g]
                hi = group_start[g + 1]
                a = (prefix[lo] + last[lo] * zs) % n
                if stamp2[a] == tick:
                    ok = False
                    break
                stamp2[a] = tick
                stamp1[a] = tick
                for r in range(lo + 1, hi):
                    a2 = (prefix[r] + last[r] * zs) % n
                    if stamp1[a2] == tick:
                        ok = False
                        break
                    stamp2[a2] = tick
                if not ok:
                    break
        else:
            for g in range(group_start.shape[0] - 1):
                lo = group_start[g]
                hi = group_start[g + 1]
                a = (prefix[lo] + last[lo] * zs) % n
                if stamp2[a] == tick:
                    ok = False
                    break
                stamp2[a] = tick
                for r in range(lo + 1, hi):
                    a2 = (prefix[r] + last[r] * zs) % n
                    if stamp1[a2] == tick:
                        ok = False
                        break
                    stamp2[a2] = tick
                if not ok:
                    break
                stamp1[a] = tick
        if ok:
            return zs, n_fail
        n_fail += 1
        if n_fail > max_fail:
            return -1, n_fail
    return -1, n_fail


def _brute_force_step_numpy(prefix, last, group_start, n, start, max_fail,
                            cond):
    n_fail = 0
    for t in range(n - 1):
        zs = (start - 1 + t) % (n - 1) + 1
        res = (prefix + last * zs) % n
        if cond == COND_NONZERO:
            ok = _check_nonzero_numpy(res)[0]
        elif cond == COND_DISTINCT:
            ok = _check_distinct_numpy(res, n)[0]
        elif cond == COND_PLAN_B:
            ok = _check_plan_b_numpy(res, group_start, n)[0]
        else:
            ok = _check_plan_c_numpy(res, group_start, n)[0]
        if ok:
            return zs, n_fail
        n_fail += 1
        if n_fail > max_fail:
            return -1, n_fail
    return -1, n_fail


# ---------------------------------------------------------------------------
# modular exponentiation (n prime, so inverses come from Fermat)

@njit(cache=True)
def _mod_pow_scalar(base, exp, n):
    result = np.int64(1)
    b = base % n
    e = exp
    while e > 0:
        if e & 1:
            result = result * b % n
        b = b * b % n
        e >>= 1
    return result


def _mod_pow_numpy(base, exp, n):
    result = np.ones_like(base)
    b = np.mod(base, n)
    e = exp
    while e > 0:
        if e & 1:
            result = result * b % n
        b = b * b % n
        e >>= 1
    return result


# ---------------------------------------------------------------------------
# elimination kernels
#
# The generic kernel marks, for every row (h, h_s) with h_s != 0 mod n and
# h.z != 0 mod n, the unique bad candidate z_s = -(h.z) * h_s^{-1} mod n.
# Rows are passed as prefix dots (mod n) and last components (mod n); the
# zero row must have been stripped by the caller.

@njit(cache=True)
def _mark_bad_generic_loop(prefix, last, n, bad):
    inv_cache = np.zeros(n, dtype=np.int64)
    for i in range(prefix.shape[0]):
        l = last[i]
        p = prefix[i]
        if l == 0 or p == 0:
            continue
        if inv_cache[l] == 0:
            inv_cache[l] = _mod_pow_scalar(l, n - 2, n)
        bad[(n - p) * inv_cache[l] % n] = True


def _mark_bad_generic_numpy(prefix, last, n, bad):
    mask = (last != 0) & (prefix != 0)
    if not mask.any():
        return
    inv = _mod_pow_numpy(last[mask], n - 2, n)
    bad[(n - prefix[mask]) * inv % n] = True


# Plan C elimination over distinct full-projection index pairs: for the pair
# (k, k_s) != (k', k_s') and sign change (sigma, sigma_s) of (k', k_s'), the
# bad candidate solves (sigma_s k_s' - k_s) z_s = -(sigma(k').z - k.z) mod n.
# Mirror rows are grouped by their source index; rows of the own group are
# skipped (self-aliasing is allowed).

@njit(cache=True)
def _mark_bad_plan_c_loop(lead_prefix, lead_last, mir_prefix, mir_last,
                          mir_group, n, bad):
    inv_cache = np.zeros(n, dtype=np.int64)
    for g in range(lead_prefix.shape[0]):
        lp = lead_prefix[g]
        ll = lead_last[g]
        for r in range(mir_prefix.shape[0]):
            if mir_group[r] == g:
                continue
            beta = (mir_last[r] - ll) % n
            if beta == 0:
                continue
            gamma = (mir_prefix[r] - lp) % n
            if gamma == 0:
                continue
            if inv_cache[beta] == 0:
                inv_cache[beta] = _mod_pow_scalar(beta, n - 2, n)
            bad[(n - gamma) * inv_cache[beta] % n] = True


def _mark_bad_plan_c_numpy(lead_prefix, lead_last, mir_prefix, mir_last,
                           mir_group, n, bad):
    ngroups = lead_prefix.shape[0]
    beta = (mir_last[None, :] - lead_last[:, None]) % n
    gamma = (mir_prefix[None, :] - lead_prefix[:, None]) % n
    mask = (beta != 0) & (gamma != 0)
    mask &= mir_group[None, :] != np.arange(ngroups, dtype=np.int64)[:, None]
    if not mask.any():
        return
    inv = _mod_pow_numpy(beta[mask], n - 2, n)
    bad[(n - gamma[mask]) * inv % n] = True


# ---------------------------------------------------------------------------
# backend dispatch

if HAVE_NUMBA:
    dot_mod = _dot_mod_loop
    check_nonzero = _check_nonzero_loop
    check_distinct = _check_distinct_loop
    check_plan_b = _check_plan_b_loop
    check_plan_c = _check_plan_c_loop
    brute_force_step = _brute_force_step_loop
    mark_bad_generic = _mark_bad_generic_loop
    mark_bad_plan_c = _mark_bad_plan_c_loop
else:
    dot_mod = _dot_mod_numpy
    check_nonzero = _check_nonzero_numpy
    check_distinct = _check_distinct_numpy
    check_plan_b = _check_plan_b_numpy
    check_plan_c = _check_plan_c_numpy
    brute_force_step = _brute_force_step_numpy
    mark_bad_generic = _mark_bad_generic_numpy
    mark_bad_plan_c = _mark_bad_plan_c_numpy
