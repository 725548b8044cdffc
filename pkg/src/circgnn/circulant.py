"""Block-circulant weight matrices with a spectral (FFT) multiply path.

A rows x cols weight matrix is partitioned into p x q square blocks of size
n (p = ceil(rows / n), q = ceil(cols / n); the ragged remainder is padded).
Each block is generated by a single length-n defining vector w, expanded as

    Block[a, b] = w[(a - b) % n]

so column 0 of the block is w itself and every later column is the previous
one rotated down one step.  Under this convention a block times a vector is
the circular convolution w (*) x, hence

    Block @ x == ifft(fft(w) * fft(x))

exactly, which is the identity the whole multiply path rests on.  Storage
drops by a factor of n; multiplies drop by roughly n / log2(n).

The matvec over the full block matrix accumulates the per-block spectral
products first and runs a single inverse transform per block row (p inverse
transforms total instead of p * q).  ``bc_matvec_per_block`` keeps the
unoptimized route alive as a cross-check.

All transforms here are hand-rolled radix-2 so the module can count the
work it does: ``op_counts()`` exposes transform-call and complex-multiply
counters used by the equivalence and operation-count tests.  Counters are
process-global and not thread-safe; they are diagnostics, not results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import InternalConsistencyError, SchemaError

# Relative imaginary residue above which a spectral-path result is rejected.
_IMAG_TOL = 1e-9


@dataclass
class OpCounts:
    """Work counters: transform calls count individual length-n transforms."""

    fft_calls: int = 0
    ifft_calls: int = 0
    rfft_calls: int = 0
    irfft_calls: int = 0
    multiplies: int = 0  # complex multiplies in butterflies and spectral products
    matvec_calls: int = 0


_counts = OpCounts()


def reset_op_counts() -> None:
    global _counts
    _counts = OpCounts()


def op_counts() -> OpCounts:
    """Snapshot of the counters accumulated since the last reset."""
    return replace(_counts)


def is_power_of_two(k: int) -> bool:
    return k >= 1 and (k & (k - 1)) == 0


_REV_CACHE: dict[int, np.ndarray] = {}
_TWIDDLE_CACHE: dict[tuple[int, bool], np.ndarray] = {}


def _bit_reversal(n: int) -> np.ndarray:
    rev = _REV_CACHE.get(n)
    if rev is None:
        bits = n.bit_length() - 1
        rev = np.zeros(n, dtype=np.int64)
        for i in range(1, n):
            rev[i] = (rev[i >> 1] >> 1) | ((i & 1) << (bits - 1))
        _REV_CACHE[n] = rev
    return rev


def _twiddles(size: int, inverse: bool) -> np.ndarray:
    key = (size, inverse)
    tw = _TWIDDLE_CACHE.get(key)
    if tw is None:
        sign = 2j if inverse else -2j
        tw = np.exp(sign * np.pi * np.arange(size // 2) / size)
        _TWIDDLE_CACHE[key] = tw
    return tw


def fft(x, inverse: bool = False) -> np.ndarray:
    """Radix-2 transform along the last axis; lengths must be powers of two.

    inverse=True applies conjugate twiddles and the 1/n scale.  Leading axes
    are treated as a batch and each batch row counts as one transform call.
    """
    a = np.asarray(x, dtype=np.complex128)
    n = a.shape[-1]
    if not is_power_of_two(n):
        raise SchemaError(f"transform length must be a power of two, got {n}")
    batch = int(np.prod(a.shape[:-1], dtype=np.int64)) if a.ndim > 1 else 1
    if inverse:
        _counts.ifft_calls += batch
    else:
        _counts.fft_calls += batch
    if n == 1:
        return a.copy()

    out_shape = a.shape
    a = a.reshape(batch, n)[:, _bit_reversal(n)]
    size = 2
    while size <= n:
        half = size // 2
        tw = _twiddles(size, inverse)
        v = a.reshape(batch, n // size, size)
        upper = v[:, :, :half]
        lower = v[:, :, half:] * tw
        _counts.multiplies += batch * (n // 2)
        a = np.concatenate([upper + lower, upper - lower], axis=2).reshape(batch, n)
        size *= 2
    if inverse:
        a = a / n
    return a.reshape(out_shape)


def rfft(x) -> np.ndarray:
    """Forward transform of real input, returning the n/2 + 1 non-redundant bins.

    Implemented by packing even/odd samples into one half-length complex
    transform plus an O(n) untangling pass, so it does roughly half the work
    of the full complex transform.
    """
    a = np.asarray(x, dtype=np.float64)
    n = a.shape[-1]
    if not is_power_of_two(n) or n < 2:
        raise SchemaError(f"rfft length must be a power of two >= 2, got {n}")
    batch = int(np.prod(a.shape[:-1], dtype=np.int64)) if a.ndim > 1 else 1
    _counts.rfft_calls += batch
    m = n // 2
    z = fft(a[..., 0::2] + 1j * a[..., 1::2])
    zr = np.conj(z[..., (-np.arange(m)) % m])
    even = 0.5 * (z + zr)
    odd = -0.5j * (z - zr)
    head = even + _twiddles(n, False) * odd
    _counts.multiplies += batch * m
    tail = (even[..., :1] - odd[..., :1])
    return np.concatenate([head, tail], axis=-1)


def irfft(spectrum, n: int) -> np.ndarray:
    """Inverse of :func:`rfft`: half-spectrum with n/2 + 1 bins back to n reals."""
    s = np.asarray(spectrum, dtype=np.complex128)
    if not is_power_of_two(n) or n < 2:
        raise SchemaError(f"irfft length must be a power of two >= 2, got {n}")
    m = n // 2
    if s.shape[-1] != m + 1:
        raise SchemaError(f"expected {m + 1} spectrum bins for length {n}, got {s.shape[-1]}")
    batch = int(np.prod(s.shape[:-1], dtype=np.int64)) if s.ndim > 1 else 1
    _counts.irfft_calls += batch
    head = s[..., :m]
    mirror = np.conj(s[..., m - np.arange(m)])
    even = 0.5 * (head + mirror)
    odd = 0.5 * (head - mirror) * _twiddles(n, True)
    _counts.multiplies += batch * m
    z = fft(even + 1j * odd, inverse=True)
    out = np.empty(s.shape[:-1] + (n,), dtype=np.float64)
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def _block_counts(rows: int, cols: int, block_size: int) -> tuple[int, int]:
    return -(-rows // block_size), -(-cols // block_size)


@dataclass
class SpectralWeights:
    """Frequency-domain form of a block-circulant matrix, ready to multiply."""

    rows: int
    cols: int
    block_size: int
    blocks: np.ndarray  # complex, shape (p, q, block_size)

    @property
    def p(self) -> int:
        return self.blocks.shape[0]

    @property
    def q(self) -> int:
        return self.blocks.shape[1]


@dataclass
class BlockCirculantMatrix:
    """Compressed rows x cols matrix: one defining vector per n x n block."""

    rows: int
    cols: int
    block_size: int
    defining_vectors: np.ndarray  # shape (p, q, block_size)
    _spectral: SpectralWeights | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise SchemaError("matrix dimensions must be positive")
        if not is_power_of_two(self.block_size) or self.block_size < 2:
            raise SchemaError(
                f"block size must be a power of two >= 2, got {self.block_size}"
            )
        self.defining_vectors = np.asarray(self.defining_vectors, dtype=np.float64)
        p, q = _block_counts(self.rows, self.cols, self.block_size)
        if self.defining_vectors.shape != (p, q, self.block_size):
            raise SchemaError(
                f"defining vectors must have shape {(p, q, self.block_size)}, "
                f"got {self.defining_vectors.shape}"
            )

    @property
    def p(self) -> int:
        return self.defining_vectors.shape[0]

    @property
    def q(self) -> int:
        return self.defining_vectors.shape[1]

    @property
    def storage_reals(self) -> int:
        """Reals actually stored; n-fold fewer than dense when n divides both dims."""
        return int(self.defining_vectors.size)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def spectral(self) -> SpectralWeights:
        if self._spectral is None:
            self._spectral = precompute_spectral(self)
        return self._spectral


def new_random(rows: int, cols: int, block_size: int, seed: int) -> BlockCirculantMatrix:
    """Random compressed matrix with entries uniform in [-1/sqrt(cols), 1/sqrt(cols)]."""
    p, q = _block_counts(rows, cols, block_size)
    rng = np.random.default_rng(seed)
    bound = 1.0 / math.sqrt(cols)
    vecs = rng.uniform(-bound, bound, size=(p, q, block_size))
    return BlockCirculantMatrix(rows, cols, block_size, vecs)


def precompute_spectral(w: BlockCirculantMatrix) -> SpectralWeights:
    """Transform every defining vector once; p*q transforms, reusable across matvecs."""
    return SpectralWeights(w.rows, w.cols, w.block_size, fft(w.defining_vectors))


def _pad_input(weights: SpectralWeights, h) -> np.ndarray:
    h = np.asarray(h, dtype=np.float64)
    if h.shape != (weights.cols,):
        raise SchemaError(
            f"input vector has shape {h.shape}, weight expects ({weights.cols},)"
        )
    n, q = weights.block_size, weights.q
    padded = np.zeros(q * n)
    padded[: weights.cols] = h
    return padded.reshape(q, n)


def _real_or_raise(values: np.ndarray, context: str) -> np.ndarray:
    bound = _IMAG_TOL * (1.0 + np.abs(values.real))
    worst = np.max(np.abs(values.imag) - bound)
    if worst >= 0:
        raise InternalConsistencyError(
            f"{context}: imaginary residue exceeds {_IMAG_TOL} relative tolerance"
        )
    return values.real


def bc_matvec(weights: SpectralWeights, h) -> np.ndarray:
    """Multiply a compressed matrix by a real vector through the spectral path.

    The input is zero-padded to q*n, transformed once per block column, and
    the per-block spectral products are summed in the frequency domain, so
    only one inverse transform runs per block row.  The result is truncated
    back to ``rows`` entries.
    """
    _counts.matvec_calls += 1
    n, p, q = weights.block_size, weights.p, weights.q
    spectrum = fft(_pad_input(weights, h))  # q transforms
    acc = np.einsum("pqn,qn->pn", weights.blocks, spectrum)
    _counts.multiplies += p * q * n
    out = fft(acc, inverse=True)  # p inverse transforms, one per block row
    return _real_or_raise(out, "bc_matvec").reshape(p * n)[: weights.rows]


def bc_matvec_per_block(weights: SpectralWeights, h) -> np.ndarray:
    """Reference route: inverse-transform every block product, accumulate spatially.

    Runs p*q inverse transforms instead of p.  Kept as the independent side
    of the spectral-accumulation equivalence check.
    """
    _counts.matvec_calls += 1
    n, p, q = weights.block_size, weights.p, weights.q
    spectrum = fft(_pad_input(weights, h))
    products = weights.blocks * spectrum[np.newaxis, :, :]
    _counts.multiplies += p * q * n
    per_block = fft(products, inverse=True)  # p*q inverse transforms
    out = _real_or_raise(per_block, "bc_matvec_per_block").sum(axis=1)
    return out.reshape(p * n)[: weights.rows]


def rfft_matvec(weights: SpectralWeights, h) -> np.ndarray:
    """Spectral matvec on the real-input fast path.

    Real inputs have conjugate-symmetric spectra, so only the first n/2 + 1
    bins of each block spectrum participate.  Numerically identical to
    :func:`bc_matvec`; does noticeably fewer multiplies.
    """
    _counts.matvec_calls += 1
    n, p, q = weights.block_size, weights.p, weights.q
    half = n // 2 + 1
    spectrum = rfft(_pad_input(weights, h))  # q half transforms
    acc = np.einsum("pqn,qn->pn", weights.blocks[:, :, :half], spectrum)
    _counts.multiplies += p * q * half
    out = irfft(acc, n)  # p half inverse transforms
    return out.reshape(p * n)[: weights.rows]


def to_dense(w: BlockCirculantMatrix) -> np.ndarray:
    """Expand to the equivalent dense matrix, dropping padded rows and columns."""
    n = w.block_size
    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    blocks = w.defining_vectors[:, :, idx]  # (p, q, n, n)
    dense = blocks.transpose(0, 2, 1, 3).reshape(w.p * n, w.q * n)
    return dense[: w.rows, : w.cols]


def project_to_block_circulant(dense, block_size: int) -> BlockCirculantMatrix:
    """Least-squares projection of a dense matrix onto block-circulant form.

    Under the Frobenius norm the optimal defining vector averages each
    wrapped diagonal of each block.  Entries lying in the zero-padded ragged
    region do not take part in the averages; diagonal classes with no valid
    entries store zero.
    """
    dense = np.asarray(dense, dtype=np.float64)
    if dense.ndim != 2:
        raise SchemaError("projection input must be a matrix")
    rows, cols = dense.shape
    if not is_power_of_two(block_size) or block_size < 2:
        raise SchemaError(f"block size must be a power of two >= 2, got {block_size}")
    n = block_size
    p, q = _block_counts(rows, cols, n)

    padded = np.zeros((p * n, q * n))
    padded[:rows, :cols] = dense
    valid = np.zeros((p * n, q * n), dtype=bool)
    valid[:rows, :cols] = True
    blocks = padded.reshape(p, n, q, n).transpose(0, 2, 1, 3)
    masks = valid.reshape(p, n, q, n).transpose(0, 2, 1, 3)

    idx = (np.arange(n)[:, None] - np.arange(n)[None, :]) % n
    masked = np.where(masks, blocks, 0.0)
    sums = np.zeros((p, q, n))
    counts = np.zeros((p, q, n))
    for k in range(n):
        on_diag = idx == k
        sums[:, :, k] = masked[:, :, on_diag].sum(axis=2)
        counts[:, :, k] = masks[:, :, on_diag].sum(axis=2)
    vectors = np.divide(sums, counts, out=np.zeros_like(sums), where=counts > 0)
    return BlockCirculantMatrix(rows, cols, n, vectors)


@dataclass(frozen=True)
class CompressionStats:
    """Theoretical compression and speedup ratios for one weight matrix."""

    theoretical_compute_reduction: float  # n / log2(n)
    storage_reduction: float  # n
    dense_reals: int
    stored_reals: int


def compression_stats(rows: int, cols: int, block_size: int) -> CompressionStats:
    """Ratios for a rows x cols matrix at the given block size (1 = uncompressed)."""
    if rows < 1 or cols < 1:
        raise SchemaError("matrix dimensions must be positive")
    if block_size == 1:
        return CompressionStats(1.0, 1.0, rows * cols, rows * cols)
    if not is_power_of_two(block_size):
        raise SchemaError(f"block size must be a power of two, got {block_size}")
    p, q = _block_counts(rows, cols, block_size)
    return CompressionStats(
        theoretical_compute_reduction=block_size / math.log2(block_size),
        storage_reduction=float(block_size),
        dense_reals=rows * cols,
        stored_reals=p * q * block_size,
    )
