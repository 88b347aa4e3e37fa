"""Pure numpy implementations of the compiled kernels."""
import numpy as np


def fwht(a):
    """Unnormalized in-place Walsh-Hadamard transform of a length-2^n array."""
    size = a.shape[0]
    if size & (size - 1):
        raise ValueError("length must be a power of two")
    half = 1
    while half < size:
        view = a.reshape(-1, 2, half)
        upper = view[:, 0, :].copy()
        lower = view[:, 1, :]
        view[:, 0, :] += lower
        view[:, 1, :] = upper - lower
        half *= 2


def _popcount_parity(values):
    values = values.copy()
    parity = np.zeros(values.shape, dtype=np.uint64)
    while values.any():
        parity ^= values & np.uint64(1)
        values >>= np.uint64(1)
    return parity


def parity_vector(mask, n):
    """Truth table of chi_mask over all 2^n inputs as int8 +-1."""
    xs = np.arange(1 << n, dtype=np.uint64)
    odd = _popcount_parity(xs & np.uint64(mask))
    return (1 - 2 * odd.astype(np.int8)).astype(np.int8)


def parity_batch(masks, xs):
    """chi_{masks[i]}(xs[i]) elementwise as int8 +-1."""
    masks = np.asarray(masks, dtype=np.uint64)
    xs = np.asarray(xs, dtype=np.uint64)
    if masks.shape != xs.shape:
        raise ValueError("masks and xs must have equal length")
    odd = _popcount_parity(masks & xs)
    return (1 - 2 * odd.astype(np.int8)).astype(np.int8)
