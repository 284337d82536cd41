"""Single-qubit state and process tomography of the memory channel.

Conventions: the computational basis is (|g>, |e>) with <Z> = +1 for |g>.
The chi matrix is expressed in the Pauli basis (I, X, Y, Z):

    E(rho) = sum_mn chi[m, n] P_m rho P_n.

Process fidelity against the ideal (identity) channel is the II element of
chi.  The memory protocol imparts a deterministic frame phase, so the
fidelity is also reported after optimizing a single Z rotation.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULIS = (I2, PAULI_X, PAULI_Y, PAULI_Z)

KET_G = np.array([1.0, 0.0], dtype=complex)
KET_E = np.array([0.0, 1.0], dtype=complex)
KET_PLUS = np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0)
KET_PLUS_I = np.array([1.0, 1.0j], dtype=complex) / math.sqrt(2.0)

# standard four-state tomography input set
INPUT_STATES = tuple(np.outer(k, k.conj())
                     for k in (KET_G, KET_E, KET_PLUS, KET_PLUS_I))


def state_tomography(measure):
    """Reconstruct rho = (I + xX + yY + zZ)/2 from an expectation provider.

    ``measure`` maps "X" | "Y" | "Z" to the corresponding expectation value.
    Bloch vectors outside the unit ball (measurement noise) are radially
    projected back onto the sphere.
    """
    r = np.array([float(measure(axis)) for axis in ("X", "Y", "Z")])
    norm = np.linalg.norm(r)
    if norm > 1.0:
        r = r / norm
    return 0.5 * (I2 + r[0] * PAULI_X + r[1] * PAULI_Y + r[2] * PAULI_Z)


@dataclass
class ChiMatrix:
    """Process matrix in the Pauli basis, plus the raw (unprojected) form."""

    entries: np.ndarray
    raw: np.ndarray = None

    HERM_TOL = 1e-10
    TRACE_TOL = 1e-8
    EIG_TOL = -1e-9

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=complex)
        if self.entries.shape != (4, 4):
            raise DimensionError("chi matrix must be 4x4")
        if self.raw is None:
            self.raw = self.entries.copy()

    def validate(self):
        if np.max(np.abs(self.entries - self.entries.conj().T)) > self.HERM_TOL:
            raise DimensionError("chi is not Hermitian within tolerance")
        if abs(np.trace(self.entries) - 1.0) > self.TRACE_TOL:
            raise DimensionError("chi trace is not 1 within tolerance")
        if np.min(np.linalg.eigvalsh(self.entries)) < self.EIG_TOL:
            raise DimensionError("chi has a negative eigenvalue beyond tolerance")
        return self

    def apply(self, rho):
        """Act with the channel on a 2x2 density matrix."""
        out = np.zeros((2, 2), dtype=complex)
        for m in range(4):
            for n in range(4):
                out += self.entries[m, n] * (PAULIS[m] @ rho @ PAULIS[n])
        return out

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.entries)


def _physicality_projection(chi):
    """Hermitize, clip negative eigenvalues and renormalize the trace."""
    chi = 0.5 * (chi + chi.conj().T)
    w, v = np.linalg.eigh(chi)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        raise ParameterError("chi projection failed: all eigenvalues clipped")
    chi = (v * w) @ v.conj().T
    return chi / np.trace(chi)


def chi_from_channel_fn(channel):
    """Linear-inversion chi matrix of a channel evaluated on the 4 inputs.

    ``channel`` maps a 2x2 density matrix to its (possibly trace-deficient)
    2x2 output.  The 16 linear equations sum_mn chi_mn P_m rho_k P_n =
    E(rho_k) are solved directly, then the result is projected onto the
    physical (Hermitian, positive, unit-trace) cone.  Deterministic.
    """
    outputs = [np.asarray(channel(rho), dtype=complex) for rho in INPUT_STATES]
    a_mat = np.zeros((16, 16), dtype=complex)
    b_vec = np.zeros(16, dtype=complex)
    row = 0
    for rho, out in zip(INPUT_STATES, outputs):
        for i in range(2):
            for j in range(2):
                for m in range(4):
                    for n in range(4):
                        a_mat[row, 4 * m + n] = (PAULIS[m] @ rho @ PAULIS[n])[i, j]
                b_vec[row] = out[i, j]
                row += 1
    try:
        chi_vec = np.linalg.solve(a_mat, b_vec)
    except np.linalg.LinAlgError as exc:
        raise ParameterError(f"chi reconstruction is singular: {exc}") from exc
    raw = chi_vec.reshape(4, 4)
    return ChiMatrix(_physicality_projection(raw), raw=raw)


def process_tomography(channel):
    """Alias following the experiment naming: reconstruct the chi matrix."""
    return chi_from_channel_fn(channel)


def chi_from_kraus(kraus_ops):
    """Brute-force chi from Kraus operators: chi_mn = sum_k c_km c_kn*
    with K_k = sum_m c_km P_m / normalization."""
    chi = np.zeros((4, 4), dtype=complex)
    for k in kraus_ops:
        k = np.asarray(k, dtype=complex)
        c = np.array([np.trace(p.conj().T @ k) / 2.0 for p in PAULIS])
        chi += np.outer(c, c.conj())
    return ChiMatrix(chi)


def process_fidelity(chi: ChiMatrix, chi_ideal: ChiMatrix | None = None):
    """F = trace(chi @ chi_ideal); for the ideal identity channel this is the
    II element of chi."""
    if chi_ideal is None:
        return float(np.real(chi.entries[0, 0]))
    return float(np.real(np.trace(chi.entries @ chi_ideal.entries)))


Z_SCAN_RESOLUTION = 1e-3  # rad


def fidelity_with_z_optimization(chi: ChiMatrix, resolution=Z_SCAN_RESOLUTION):
    """Best identity-process fidelity over a single Z-rotation of the output.

    For Rz(theta) applied after the channel, the fidelity is a sinusoid in
    theta; it is scanned at the given resolution and the maximum returned as
    (theta_best, fidelity).  Never smaller than the raw fidelity (theta=0 is
    in the scan).
    """
    thetas = np.arange(0.0, 2.0 * math.pi, resolution)
    # tr(Rz(th) K)/2 components in the Pauli basis: cos(th/2) on I, -i sin on Z
    c = np.cos(0.5 * thetas)
    s = np.sin(0.5 * thetas)
    chi_m = chi.entries
    f = (c**2 * np.real(chi_m[0, 0]) + s**2 * np.real(chi_m[3, 3])
         + 2.0 * c * s * np.imag(chi_m[3, 0]))
    k = int(np.argmax(f))
    return float(thetas[k]), float(f[k])


def apply_z_rotation(chi: ChiMatrix, theta):
    """Chi matrix of (Rz(theta) after the channel)."""
    rz = np.array([[np.exp(-0.5j * theta), 0.0], [0.0, np.exp(0.5j * theta)]])

    def rotated(rho):
        return rz @ chi.apply(rho) @ rz.conj().T

    return chi_from_channel_fn(rotated)


def chi_export_dict(chi: ChiMatrix):
    """JSON-ready real/imaginary parts plus |chi_ij| rows for CSV plotting."""
    return {
        "basis": ["I", "X", "Y", "Z"],
        "real": np.real(chi.entries).tolist(),
        "imag": np.imag(chi.entries).tolist(),
        "abs": np.abs(chi.entries).tolist(),
    }
