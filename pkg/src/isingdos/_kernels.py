"""Numba kernels for the tight Monte Carlo loops.

All randomness inside the kernels comes from a per-stream xorshift64*
generator.  Stream k of a run with root seed ``r`` is initialized with the
SplitMix64 mix of ``r + (k + 1) * GAMMA`` (the stateless form of the
SplitMix64 sequence), which makes every read / chain / walker reproducible
in isolation and independent of thread scheduling.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

U64 = np.uint64
GAMMA = U64(0x9E3779B97F4A7C15)
_MULT = U64(0x2545F4914F6CDD1D)


@njit(cache=True)
def _mix64(z):
    z = (z ^ (z >> U64(30))) * U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> U64(27))) * U64(0x94D049BB133111EB)
    return z ^ (z >> U64(31))


@njit(cache=True)
def stream_seed(root_seed, stream_index):
    """Initial xorshift64* state for stream ``stream_index`` of ``root_seed``."""
    s = _mix64(U64(root_seed) + (U64(stream_index) + U64(1)) * GAMMA)
    if s == U64(0):
        s = GAMMA
    return s


@njit(cache=True, inline="always")
def _next_u64(state):
    x = state
    x ^= x >> U64(12)
    x ^= x << U64(25)
    x ^= x >> U64(27)
    return x * _MULT, x


@njit(cache=True, inline="always")
def _uniform(state):
    v, state = _next_u64(state)
    return (v >> U64(11)) * (1.0 / 9007199254740992.0), state


@njit(cache=True, inline="always")
def _random_spins(n, state, out):
    for i in range(n):
        u, state = _uniform(state)
        out[i] = 1 if u < 0.5 else -1
    return state


@njit(cache=True, inline="always")
def _total_energy(spins, indptr, nbr, nbw, h):
    e = 0.0
    for i in range(len(spins)):
        e += h[i] * spins[i]
        acc = 0.0
        for k in range(indptr[i], indptr[i + 1]):
            acc += nbw[k] * spins[nbr[k]]
        e += 0.5 * acc * spins[i]
    return e


@njit(cache=True, inline="always")
def _delta_energy(spins, indptr, nbr, nbw, h, site):
    loc = h[site]
    for k in range(indptr[site], indptr[site + 1]):
        loc += nbw[k] * spins[nbr[k]]
    return -2.0 * spins[site] * loc


@njit(cache=True, inline="always")
def _metropolis_proposals(spins, e, indptr, nbr, nbw, h, beta, n_proposals, state):
    n = len(spins)
    for _ in range(n_proposals):
        u, state = _uniform(state)
        site = int(u * n)
        de = _delta_energy(spins, indptr, nbr, nbw, h, site)
        accept = de <= 0.0
        if not accept:
            u2, state = _uniform(state)
            accept = u2 < np.exp(-beta * de)
        if accept:
            spins[site] = -spins[site]
            e += de
    return e, state


@njit(cache=True)
def metropolis_chain_kernel(indptr, nbr, nbw, h, beta, n_steps, burn_in, state):
    """Single-spin-flip Metropolis chain from a random start.

    Records the current energy after every post-burn-in proposal
    (accepted or not).  Returns (energies, final_spins).
    """
    n = len(h)
    spins = np.empty(n, dtype=np.int8)
    state = _random_spins(n, state, spins)
    e = _total_energy(spins, indptr, nbr, nbw, h)
    energies = np.empty(n_steps - burn_in, dtype=np.float64)
    for step in range(n_steps):
        u, state = _uniform(state)
        site = int(u * n)
        de = _delta_energy(spins, indptr, nbr, nbw, h, site)
        accept = de <= 0.0
        if not accept:
            u2, state = _uniform(state)
            accept = u2 < np.exp(-beta * de)
        if accept:
            spins[site] = -spins[site]
            e += de
        if step >= burn_in:
            energies[step - burn_in] = e
    return energies, spins


@njit(cache=True, parallel=True)
def forward_reads_kernel(
    indptr, nbr, nbw, h, beta, n_reads, n_proposals, root_seed, read_offset
):
    """Independent equilibration reads; read r uses stream read_offset + r.

    Each read starts from its own uniform random configuration and runs
    ``n_proposals`` Metropolis updates at ``beta``.  Returns the final
    configurations (n_reads, N) and their energies.
    """
    n = len(h)
    configs = np.empty((n_reads, n), dtype=np.int8)
    energies = np.empty(n_reads, dtype=np.float64)
    for r in prange(n_reads):
        state = stream_seed(root_seed, read_offset + r)
        spins = np.empty(n, dtype=np.int8)
        state = _random_spins(n, state, spins)
        e = _total_energy(spins, indptr, nbr, nbw, h)
        e, state = _metropolis_proposals(
            spins, e, indptr, nbr, nbw, h, beta, n_proposals, state
        )
        configs[r] = spins
        energies[r] = e
    return configs, energies


@njit(cache=True)
def qemc_kernel(
    indptr, nbr, nbw, h, beta, flip_prob, chain_length, relax_proposals, init, state
):
    """Iterated perturb-and-relax chain starting from ``init``.

    Iteration k flips each spin of the previous configuration independently
    with probability ``flip_prob``, relaxes with ``relax_proposals``
    Metropolis updates at ``beta``, and records the result.
    """
    n = len(init)
    configs = np.empty((chain_length, n), dtype=np.int8)
    energies = np.empty(chain_length, dtype=np.float64)
    spins = init.copy()
    for k in range(chain_length):
        if flip_prob > 0.0:
            for i in range(n):
                u, state = _uniform(state)
                if u < flip_prob:
                    spins[i] = -spins[i]
        e = _total_energy(spins, indptr, nbr, nbw, h)
        if relax_proposals > 0:
            e, state = _metropolis_proposals(
                spins, e, indptr, nbr, nbw, h, beta, relax_proposals, state
            )
        configs[k] = spins
        energies[k] = e
    return configs, energies


@njit(cache=True)
def wl_advance_kernel(
    indptr,
    nbr,
    nbw,
    h,
    spins,
    e_current,
    ln_g,
    visits,
    offset,
    ln_f,
    epsilon,
    flatness_p,
    check_interval,
    max_steps,
    state,
):
    """Advance a Wang-Landau walker by at most ``max_steps`` proposals.

    Energy levels are integers indexed as E + offset into ``ln_g`` and
    ``visits``.  Acceptance is min{1, g(E)/g(E')} with the *current* DoS
    estimate; after every proposal the walker's energy level gets
    ln_g += ln_f and one visit.  When the visit histogram over the bins
    seen this stage is flat (min >= p * mean), ln_f halves and the visits
    reset.  Returns (steps_done, accepted, e_current, ln_f, state, converged).
    """
    n = len(spins)
    steps = 0
    accepted = 0
    idx = int(round(e_current)) + offset
    since_check = 0
    while ln_f > epsilon and steps < max_steps:
        u, state = _uniform(state)
        site = int(u * n)
        de = _delta_energy(spins, indptr, nbr, nbw, h, site)
        new_idx = int(round(e_current + de)) + offset
        accept = ln_g[idx] >= ln_g[new_idx]
        if not accept:
            u2, state = _uniform(state)
            accept = u2 < np.exp(ln_g[idx] - ln_g[new_idx])
        if accept:
            spins[site] = -spins[site]
            e_current += de
            idx = new_idx
            accepted += 1
        ln_g[idx] += ln_f
        visits[idx] += 1
        steps += 1
        since_check += 1
        if since_check >= check_interval:
            since_check = 0
            total = 0
            nbins = 0
            lowest = np.int64(0)
            first = True
            for k in range(len(visits)):
                v = visits[k]
                if v > 0:
                    total += v
                    nbins += 1
                    if first or v < lowest:
                        lowest = v
                        first = False
            if nbins > 0 and lowest >= flatness_p * (total / nbins):
                ln_f *= 0.5
                visits[:] = 0
    return steps, accepted, e_current, ln_f, state, ln_f <= epsilon
