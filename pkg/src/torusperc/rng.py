"""Counter-based pseudorandom weights.

Every edge weight is a pure function of (master seed, edge id): the weight of
edge i is the i-th output of a SplitMix64 stream seeded with the master seed.
No state is stored, so weights can be evaluated lazily, in any order, and in
parallel, and the same (seed, edge) pair always yields the same value.

Seeds for replicates and other derived streams come from `derive_seed`, which
folds indices into the master seed through the same 64-bit finalizer but with
a different salt, keeping child streams disjoint from the edge stream.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SALT = np.uint64(0xD1B54A32D192ED03)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_INV_2_53 = 1.0 / float(1 << 53)


def _finalize(z):
    """SplitMix64 output function on a uint64 array (wraps mod 2^64)."""
    z = z ^ (z >> np.uint64(30))
    z = z * _MUL1
    z = z ^ (z >> np.uint64(27))
    z = z * _MUL2
    z = z ^ (z >> np.uint64(31))
    return z


def hash_u64(seed, counters):
    """Raw 64-bit hash of counter values under `seed`.

    hash_u64(s, i) equals the (i+1)-th output of the reference SplitMix64
    generator seeded with s.
    """
    c = np.asarray(counters, dtype=np.uint64)
    s = np.uint64(int(seed) & 0xFFFFFFFFFFFFFFFF)
    state = (c + np.uint64(1)) * GOLDEN + s
    return _finalize(state)


def uniforms(seed, counters):
    """Uniform[0,1) floats with 53 random mantissa bits, one per counter."""
    return (hash_u64(seed, counters) >> np.uint64(11)).astype(np.float64) * _INV_2_53


def uniform(seed, counter):
    """Scalar convenience wrapper around `uniforms`."""
    return float(uniforms(seed, np.asarray([counter], dtype=np.uint64))[0])


def derive_seed(master, *indices):
    """Derive an independent child seed from (master, index, index, ...).

    Used for replicate streams, per-task seeds and auxiliary generators. The
    salt keeps derived seeds off the edge-weight counter sequence.
    """
    # 1-element arrays keep the arithmetic on the silent-wraparound path
    s = np.array([int(master) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    for k in indices:
        idx = np.array([int(k) & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
        s = _finalize(s ^ _finalize(idx * GOLDEN + _SALT))
    return int(s[0])


def generator(master, *indices):
    """numpy Generator seeded deterministically from (master, indices)."""
    return np.random.default_rng(derive_seed(master, *indices))


def parse_seed(text):
    """Parse a seed given as decimal or hex (0x...) text."""
    t = str(text).strip()
    if t.lower().startswith(("0x", "-0x")):
        return int(t, 16)
    return int(t, 10)
