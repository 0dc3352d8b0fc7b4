"""Operator construction for the extended Dicke model.

N two-level atoms act as one collective spin S = N/2 coupled to a single
cavity mode,

    H = omega * a^dag a + g (a^dag + a) Sz - v Sx^2,

with all energies in angular-frequency units (hbar = 1).  The product
basis is boson-major: flat index = n * (N + 1) + (m + S), where n <= M is
the boson occupation and m is the Sz eigenvalue, ascending from -S.  In
this basis H is real symmetric, so everything here stays in real
arithmetic; the one operator that is intrinsically complex for odd N (the
parity operator) is stored as a real matrix plus a global phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sparse

from .errors import ResourceError, ValidationError

DEFAULT_MAX_NONZEROS = 5_000_000


@dataclass(frozen=True)
class ModelParams:
    """The physical quadruple (N, omega, g, v) of one simulation run.

    N: atom count; omega: cavity frequency; g: atom-field coupling;
    v: collective atom-atom interaction strength.  Derived quantities:
    S = N/2 and u = g**2/omega.
    """

    N: int
    omega: float
    g: float
    v: float

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N!r}")
        if not (self.omega > 0) or not math.isfinite(self.omega):
            raise ValidationError(f"omega must be positive and finite, got {self.omega!r}")
        if self.v < 0 or not math.isfinite(self.v):
            raise ValidationError(f"v must be >= 0 and finite, got {self.v!r}")
        if not math.isfinite(self.g):
            raise ValidationError(f"g must be finite, got {self.g!r}")

    @property
    def S(self) -> float:
        return self.N / 2

    @property
    def u(self) -> float:
        return self.g**2 / self.omega


@dataclass(frozen=True)
class BasisIndex:
    """Flat indexing of the truncated |n> (x) |S, m> product basis.

    flat = n * (N + 1) + (m + S); the map is a bijection between
    [0, total_dim) and pairs (n, m) with 0 <= n <= fock_cutoff and
    m in {-S, -S+1, ..., S}.
    """

    N: int
    fock_cutoff: int

    def __post_init__(self):
        if self.N < 1:
            raise ValidationError(f"N must be >= 1, got {self.N}")
        if self.fock_cutoff < 0:
            raise ValidationError(f"fock_cutoff must be >= 0, got {self.fock_cutoff}")

    @property
    def spin_dim(self) -> int:
        return self.N + 1

    @property
    def total_dim(self) -> int:
        return (self.fock_cutoff + 1) * (self.N + 1)

    def flat(self, n: int, m: float) -> int:
        col = int(round(m + self.N / 2))
        if not 0 <= n <= self.fock_cutoff:
            raise ValidationError(f"boson number {n} outside [0, {self.fock_cutoff}]")
        if not 0 <= col <= self.N or abs(col - (m + self.N / 2)) > 1e-9:
            raise ValidationError(f"m = {m} is not a valid Sz eigenvalue for N = {self.N}")
        return n * self.spin_dim + col

    def unflat(self, i: int) -> tuple[int, float]:
        if not 0 <= i < self.total_dim:
            raise ValidationError(f"flat index {i} outside [0, {self.total_dim})")
        n, col = divmod(i, self.spin_dim)
        return n, col - self.N / 2


class SparseOperator:
    """Real-symmetric sparse operator with both triangles stored.

    Duplicate (row, col) entries are summed during assembly, so the
    canonical storage has none; matvec acts as the full symmetric matrix.
    """

    def __init__(self, dim: int, rows, cols, vals):
        if dim < 1:
            raise ValidationError(f"dim must be >= 1, got {dim}")
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= dim or cols.min() < 0 or cols.max() >= dim):
            raise ValidationError("entry index outside [0, dim)")
        coo = sparse.coo_matrix((vals, (rows, cols)), shape=(dim, dim))
        coo.sum_duplicates()
        self._csr = coo.tocsr()
        self.dim = dim

    @classmethod
    def from_scipy(cls, mat) -> "SparseOperator":
        coo = sparse.coo_matrix(mat)
        return cls(coo.shape[0], coo.row, coo.col, coo.data)

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._csr @ x

    def matmat(self, X: np.ndarray) -> np.ndarray:
        return self._csr @ X

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def to_csr(self):
        return self._csr

    def coo_entries(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self._csr.tocoo()
        return coo.row, coo.col, coo.data

    def frobenius_norm(self) -> float:
        return float(np.sqrt(np.sum(self._csr.data**2)))

    def is_symmetric(self) -> bool:
        diff = self._csr - self._csr.T
        return diff.nnz == 0 or not np.any(diff.data)

    def __matmul__(self, other):
        if isinstance(other, SparseOperator):
            return self._csr @ other._csr
        return self._csr @ other

    def __rmatmul__(self, other):
        return other @ self._csr


@dataclass(frozen=True)
class SpinOperatorSet:
    """Collective spin matrices of dimension 2S+1 in the ascending-m basis.

    sy_imag holds the real matrix K with Sy = i*K, so all storage is real.
    """

    S: float
    sx: np.ndarray
    sz: np.ndarray
    sy_imag: np.ndarray
    sp: np.ndarray
    sm: np.ndarray


def collective_spin_matrices(S: float) -> SpinOperatorSet:
    """Standard angular-momentum matrices for spin quantum number S.

    Ladder convention: S+|S,m> = sqrt(S(S+1) - m(m+1)) |S,m+1>.
    """
    twoS = 2 * S
    if twoS <= 0 or abs(twoS - round(twoS)) > 1e-12:
        raise ValidationError(f"S must be a positive half-integer, got {S!r}")
    dim = int(round(twoS)) + 1
    m = -S + np.arange(dim)
    c = np.sqrt(S * (S + 1) - m[:-1] * (m[:-1] + 1))
    sp = np.zeros((dim, dim))
    sp[np.arange(1, dim), np.arange(dim - 1)] = c
    sm = sp.T.copy()
    sx = (sp + sm) / 2
    sy_imag = (sm - sp) / 2
    sz = np.diag(m)
    return SpinOperatorSet(S=S, sx=sx, sz=sz, sy_imag=sy_imag, sp=sp, sm=sm)


def _estimate_nonzeros(N: int, M: int, g: float, v: float) -> int:
    diag = (M + 1) * (N + 1)
    spin_off = 2 * (M + 1) * max(N - 1, 0) if v != 0 else 0
    # g couplings vanish on m = 0 (present only for even N)
    m_nonzero = N + 1 - (1 if N % 2 == 0 else 0)
    boson = 2 * M * m_nonzero if g != 0 else 0
    return diag + spin_off + boson


def build_full_hamiltonian(
    p: ModelParams, M: int, max_nonzeros: int = DEFAULT_MAX_NONZEROS
) -> SparseOperator:
    """Assemble H = omega a^dag a + g (a^dag + a) Sz - v Sx^2, truncated at n <= M.

    Couplings to n > M are dropped.  Nonzero pattern: the diagonal, the
    |m' - m| = 2 elements of Sx^2 within each boson block, and the
    g sqrt(n+1) m elements between (n, m) and (n+1, m).
    """
    if M < 0:
        raise ValidationError(f"fock cutoff M must be >= 0, got {M}")
    if _estimate_nonzeros(p.N, M, p.g, p.v) > max_nonzeros:
        raise ResourceError(
            f"Hamiltonian for N={p.N}, M={M} needs more than {max_nonzeros} nonzeros"
        )
    basis = BasisIndex(p.N, M)
    ns = basis.spin_dim
    spin = collective_spin_matrices(p.S)
    sx2 = spin.sx @ spin.sx
    m_vals = -p.S + np.arange(ns)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []

    # diagonal: omega*n - v*(Sx^2)_{mm}
    all_idx = np.arange(basis.total_dim)
    n_of = all_idx // ns
    col_of = all_idx % ns
    rows.append(all_idx)
    cols.append(all_idx)
    vals.append(p.omega * n_of - p.v * np.diag(sx2)[col_of])

    # -v (Sx^2)_{m+2, m} within each boson block, both triangles
    if p.v != 0 and ns >= 3:
        ms = np.arange(ns - 2)
        elem = -p.v * sx2[ms + 2, ms]
        for n in range(M + 1):
            base = n * ns
            rows.append(base + ms + 2)
            cols.append(base + ms)
            vals.append(elem)
            rows.append(base + ms)
            cols.append(base + ms + 2)
            vals.append(elem)

    # g sqrt(n+1) m between (n, m) and (n+1, m), both triangles
    if p.g != 0 and M >= 1:
        live = np.nonzero(m_vals != 0)[0]
        for n in range(M):
            coef = p.g * np.sqrt(n + 1) * m_vals[live]
            lo = n * ns + live
            hi = (n + 1) * ns + live
            rows.append(hi)
            cols.append(lo)
            vals.append(coef)
            rows.append(lo)
            cols.append(hi)
            vals.append(coef)

    return SparseOperator(
        basis.total_dim,
        np.concatenate(rows),
        np.concatenate(cols),
        np.concatenate(vals),
    )


def polaron_spin_hamiltonian(p: ModelParams) -> np.ndarray:
    """Displaced-frame spin Hamiltonian H_spin = -u Sz^2 - v Sx^2, u = g^2/omega.

    Obtained by displacing the cavity conditioned on Sz, which removes the
    g (a^dag + a) Sz coupling, and dropping the displacement dressing that
    the same transform applies to the Sx^2 term.  The reduction is exact
    when g = 0 or v = 0; otherwise the dressing shifts the spectrum, so
    treat this as the reference spin model, not an identity.
    """
    spin = collective_spin_matrices(p.S)
    return -p.u * (spin.sz @ spin.sz) - p.v * (spin.sx @ spin.sx)


@dataclass(frozen=True)
class ParityOperator:
    """R = exp(i pi a^dag a) (x) exp(-i pi Sx), stored real.

    ``op`` is the real signed-permutation part; ``phase`` is the global
    factor (1 for integer S, -1j for half-integer S) so that
    phase * op equals the full complex operator.  The phase drops out of
    commutators and eigenvalue-pairing checks.
    """

    op: SparseOperator
    phase: complex
    spin_sign: int = 1


def symmetry_operator(p: ModelParams, M: int) -> ParityOperator:
    """Joint parity: flips the cavity quadratures (a -> -a) and Sz -> -Sz.

    In the Sz basis, exp(-i pi Sx) is (global phase) * sign * J with J the
    m -> -m exchange matrix; sign = (-1)^S for integer S and (-1)^(S-1/2)
    for half-integer S.  The boson factor is diag((-1)^n).  R commutes
    with the Hamiltonian built by :func:`build_full_hamiltonian`.
    """
    basis = BasisIndex(p.N, M)
    ns = basis.spin_dim
    if p.N % 2 == 0:
        sign = -1 if int(round(p.S)) % 2 else 1
        phase: complex = 1.0
    else:
        sign = -1 if int(round(p.S - 0.5)) % 2 else 1
        phase = -1j

    idx = np.arange(basis.total_dim)
    n_of = idx // ns
    col_of = idx % ns
    flipped = n_of * ns + (ns - 1 - col_of)
    vals = sign * np.where(n_of % 2 == 0, 1.0, -1.0)
    op = SparseOperator(basis.total_dim, idx, flipped, vals)
    return ParityOperator(op=op, phase=phase, spin_sign=sign)
