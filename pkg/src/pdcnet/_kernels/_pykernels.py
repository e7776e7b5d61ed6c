"""Pure-Python kernels. Bit-for-bit identical to the compiled versions in _ckernels.pyx."""

import numpy as np

M64 = 0xFFFFFFFFFFFFFFFF
GOLDEN = 0x9E3779B97F4A7C15


def mix64(z):
    """splitmix64 output finalizer (Stafford variant 13)."""
    z &= M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return z ^ (z >> 31)


def hash_ints(values, seed):
    """Order-sensitive 64-bit hash of a sequence of (possibly negative) integers."""
    h = mix64((seed + GOLDEN * (len(values) + 1)) & M64)
    for v in values:
        h = mix64(((h ^ (v & M64)) + GOLDEN) & M64)
    return h


def splitmix64_next(state):
    """Advance a splitmix64 state; returns (new_state, output)."""
    state = (state + GOLDEN) & M64
    return state, mix64(state)


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M64


def xoshiro_next(s):
    """xoshiro256** step on a 4-element list, mutated in place."""
    s0, s1, s2, s3 = s
    result = (_rotl((s1 * 5) & M64, 7) * 9) & M64
    t = (s1 << 17) & M64
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    s[0], s[1], s[2], s[3] = s0, s1, s2, s3
    return result


def xoshiro_fill_uniform(s, n):
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = (xoshiro_next(s) >> 11) * (1.0 / 9007199254740992.0)
    return out


def nw_score(a, b, match=1, mismatch=0, gap=0):
    """Global alignment score with linear gap penalty, two-row dynamic programming."""
    n, m = len(a), len(b)
    prev = [j * gap for j in range(m + 1)]
    for i in range(1, n + 1):
        cur = [i * gap] + [0] * m
        ai = a[i - 1]
        for j in range(1, m + 1):
            diag = prev[j - 1] + (match if ai == b[j - 1] else mismatch)
            up = prev[j] + gap
            left = cur[j - 1] + gap
            cur[j] = max(diag, up, left)
        prev = cur
    return prev[m]
