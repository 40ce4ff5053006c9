"""Single-scatterer response and the self-consistent multiple-scattering solve.

Multipole coefficients are indexed by order -N_m..N_m against the outgoing
basis H_n^(1)(k0 r) exp(i n theta) and the regular basis J_n(k0 r)
exp(i n theta). The array response at the reference scatterer solves

    (1 - S Sigma) b = S a.
"""

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, LatticeResonance

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class ScatteringMatrix:
    """Multipole scattering matrix of one resonator.

    With ``lossless=True`` the matrix must conserve energy, i.e.
    ``1 + 2 S`` is unitary; for a single monopole channel this is the 2-D
    optical theorem ``Re(s0) = -|s0|^2``.
    """

    entries: np.ndarray
    lossless: bool = False

    def __post_init__(self):
        ent = np.array(self.entries, dtype=complex)
        if ent.ndim != 2 or ent.shape[0] != ent.shape[1] or ent.shape[0] % 2 == 0:
            raise DomainError(f"S must be square with odd size, got shape {ent.shape}")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)
        if self.lossless:
            defect = self.unitarity_defect()
            if defect > 1e-12:
                raise DomainError(f"S declared lossless but |(1+2S)^H (1+2S) - 1| = {defect:.3g}")

    @property
    def n_multipole(self):
        return (self.entries.shape[0] - 1) // 2

    def unitarity_defect(self):
        u = np.eye(self.entries.shape[0]) + 2.0 * self.entries
        return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))

    def embed(self, n_multipole):
        """Zero-pad (or reject truncating) to a larger multipole order."""
        n = self.n_multipole
        if n_multipole < n:
            raise DomainError("embedding cannot drop multipole channels")
        size = 2 * n_multipole + 1
        out = np.zeros((size, size), dtype=complex)
        lo = n_multipole - n
        out[lo: lo + 2 * n + 1, lo: lo + 2 * n + 1] = self.entries
        return ScatteringMatrix(out, lossless=False)

    def scaled(self, factor):
        return ScatteringMatrix(self.entries * factor, lossless=False)

    def to_json(self):
        rows = [[float(z.real), float(z.imag)] for z in self.entries.ravel()]
        return {"n_multipole": self.n_multipole, "entries": rows, "lossless": self.lossless}

    @classmethod
    def from_json(cls, doc):
        """Build from ``{"n_multipole": int, "entries": [[re, im], ...]}``.

        ``doc`` may be a mapping, a JSON string or a path to a JSON file.
        Entries are row-major.
        """
        if isinstance(doc, str) and doc.lstrip().startswith("{"):
            doc = json.loads(doc)
        elif isinstance(doc, (str, Path)):
            doc = json.loads(Path(doc).read_text())
        n = int(doc["n_multipole"])
        size = 2 * n + 1
        flat = doc["entries"]
        if len(flat) != size * size:
            raise DomainError(f"expected {size * size} entries for n_multipole={n}, got {len(flat)}")
        vals = np.array([complex(re, im) for re, im in flat]).reshape(size, size)
        return cls(vals, lossless=bool(doc.get("lossless", False)))


def lossless_channel(phase):
    """Energy-conserving single-channel coefficient -(1 + exp(i phase))/2."""
    return -(1.0 + np.exp(1j * phase)) / 2.0


def monopole(phase, n_multipole=0):
    """Lossless electric-dipole (monopole line source) scatterer."""
    s = np.zeros((2 * n_multipole + 1,) * 2, dtype=complex)
    s[n_multipole, n_multipole] = lossless_channel(phase)
    return ScatteringMatrix(s, lossless=True)


def dipole(phase0, phase1, n_multipole=1):
    """Lossless resonator with independent monopole and +/-1 channels.

    The +/-1 channels share ``phase1`` (a rotationally symmetric rod), so S
    is diagonal with S_11 = S_-1-1.
    """
    if n_multipole < 1:
        raise DomainError("a magnetic-dipole family needs n_multipole >= 1")
    s = np.zeros((2 * n_multipole + 1,) * 2, dtype=complex)
    c = n_multipole
    s[c, c] = lossless_channel(phase0)
    s[c - 1, c - 1] = s[c + 1, c + 1] = lossless_channel(phase1)
    return ScatteringMatrix(s, lossless=True)


FAMILIES = {"monopole": monopole, "dipole": dipole}


@dataclass(frozen=True)
class DipoleMoments:
    """Self-consistent coefficients b0 (orders -N_m..N_m) and derived moments.

    ``Pz = b_0``, ``Mx = b_1 + b_-1``, ``My = i (b_1 - b_-1)``, so that
    ``m = Mx + i My = 2 b_-1`` and ``m_star = Mx - i My = 2 b_1``.
    Without +/-1 channels the magnetic moment is zero.
    """

    b0: np.ndarray

    def __post_init__(self):
        b = np.array(self.b0, dtype=complex).ravel()
        if b.size % 2 == 0:
            raise DomainError("coefficient vector must have odd length")
        b.setflags(write=False)
        object.__setattr__(self, "b0", b)

    @property
    def n_multipole(self):
        return (self.b0.size - 1) // 2

    def coeff(self, n):
        c = self.n_multipole
        return complex(self.b0[c + n]) if abs(n) <= c else 0j

    @property
    def Pz(self):
        return self.coeff(0)

    @property
    def Mx(self):
        return self.coeff(1) + self.coeff(-1)

    @property
    def My(self):
        return 1j * (self.coeff(1) - self.coeff(-1))

    @property
    def m(self):
        return self.Mx + 1j * self.My

    @property
    def m_star(self):
        return self.Mx - 1j * self.My

    def as_dict(self):
        pair = lambda z: [z.real, z.imag]  # noqa: E731
        return {
            "b0": [pair(complex(z)) for z in self.b0],
            "Pz": pair(self.Pz),
            "Mx": pair(self.Mx),
            "My": pair(self.My),
            "m": pair(self.m),
            "m_star": pair(self.m_star),
        }


def incident_coeffs(cfg, direction="down", n_multipole=None):
    """Jacobi-Anger coefficients of the unit plane wave about the origin.

    ``direction="down"`` is exp(i(alpha0 x - beta0 y)), ``"up"`` is
    exp(i(alpha0 x + beta0 y)). With (cos phi, sin phi) the unit propagation
    direction, a_n = i^n exp(-i n phi).
    """
    if direction not in ("down", "up"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    n_multipole = cfg.n_multipole if n_multipole is None else n_multipole
    ky = -cfg.beta0.real if direction == "down" else cfg.beta0.real
    phi = math.atan2(ky, cfg.alpha0)
    n = np.arange(-n_multipole, n_multipole + 1)
    return (1j ** n) * np.exp(-1j * n * phi)


def solve_moments(S, Sigma, a):
    """Solve (1 - S Sigma) b0 = S a by a dense LU solve.

    Raises:
        LatticeResonance: when (1 - S Sigma) is singular or its condition
            number exceeds 1e12 (a collective resonance of the array).
    """
    smat = S.entries if isinstance(S, ScatteringMatrix) else np.asarray(S, dtype=complex)
    Sigma = np.asarray(Sigma, dtype=complex)
    a = np.asarray(a, dtype=complex)
    if smat.shape != Sigma.shape or smat.shape[0] != a.size:
        raise DomainError(f"dimension mismatch: S {smat.shape}, Sigma {Sigma.shape}, a {a.shape}")
    system = np.eye(a.size) - smat @ Sigma
    cond = np.linalg.cond(system)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise LatticeResonance(f"1 - S Sigma is ill-conditioned (cond = {cond:.3g})")
    try:
        b = np.linalg.solve(system, smat @ a)
    except np.linalg.LinAlgError as exc:
        raise LatticeResonance(str(exc)) from exc
    return DipoleMoments(b)


def scalar_b00(s0, Sigma0):
    """Monopole-only response s0 / (1 - s0 Sigma0)."""
    den = 1.0 - s0 * Sigma0
    if abs(den) <= 1e-14:
        raise LatticeResonance(f"|1 - s0 Sigma0| = {abs(den):.3g}")
    return s0 / den
