"""Shanks-type acceleration of slowly convergent oscillatory series.

Lattice sums over a line of scatterers have terms that decay like m**-1/2
while rotating with a fixed phase step. Partial sums are sampled once every
half period of that rotation and handed to Wynn's epsilon algorithm, which
computes the iterated Shanks transforms of the sampled sequence.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceFailure


@dataclass(frozen=True)
class AccelSpec:
    """How to sum an oscillatory tail.

    Attributes:
        scheme: ``"shanks"`` (production) or ``"none"`` (raw partial sum of
            ``max_terms`` terms, only useful as a slow oracle).
        max_terms: hard cap on the number of series terms evaluated.
        tol: absolute tolerance on the error estimate.
        window: number of sampled partial sums fed to the epsilon table.
    """

    scheme: str = "shanks"
    max_terms: int = 100_000
    tol: float = 1e-8
    window: int = 24

    def __post_init__(self):
        if self.scheme not in ("shanks", "none"):
            raise ValueError(f"unknown acceleration scheme {self.scheme!r}")
        if self.window < 4:
            raise ValueError("window must hold at least 4 partial sums")


@dataclass(frozen=True)
class SeriesResult:
    value: complex
    error: float
    terms: int


def _epsilon_estimate(seq):
    """Last entry of the deepest finite even column of the epsilon table."""
    prev = np.zeros(len(seq) + 1, dtype=complex)
    cur = np.asarray(seq, dtype=complex)
    best = cur[-1]
    col = 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        while cur.size > 1:
            nxt = prev[1: cur.size] + 1.0 / np.diff(cur)
            prev, cur = cur, nxt
            col += 1
            if not np.all(np.isfinite(cur)):
                break
            if col % 2 == 0:
                best = cur[-1]
    return complex(best)


def wynn_epsilon(partial_sums):
    """Accelerated limit of a sequence of partial sums.

    Returns:
        ``(estimate, error)`` where the error is the difference between the
        estimates obtained with and without the last partial sum.
    """
    seq = np.asarray(partial_sums, dtype=complex)
    if seq.size < 3:
        raise ValueError("need at least three partial sums")
    est = _epsilon_estimate(seq)
    err = abs(est - _epsilon_estimate(seq[:-1]))
    return est, float(err)


def stride_for_phase(phase):
    """Number of terms per half period of the oscillation exp(i*phase*m)."""
    folded = abs(np.angle(np.exp(1j * phase)))
    if folded < 1e-12:
        return None
    return max(1, int(round(np.pi / folded)))


def oscillatory_sum(term, phase, spec=AccelSpec()):
    """Sum ``term(m)`` for m = 1, 2, ... .

    Args:
        term: vectorised callable returning the complex terms for an integer
            array of indices.
        phase: asymptotic phase advance per term (radians); terms behave
            like ``exp(1j*phase*m) * m**-1/2`` for large m.
        spec: acceleration settings.

    Raises:
        ConvergenceFailure: when the error estimate stays above ``spec.tol``
            within ``spec.max_terms`` terms (e.g. close to a Wood anomaly).
    """
    if spec.scheme == "none":
        m = np.arange(1, spec.max_terms + 1)
        partial = np.cumsum(term(m))
        lag = stride_for_phase(phase) or 1
        err = abs(partial[-1] - partial[-1 - min(lag, len(partial) - 1)])
        return SeriesResult(complex(partial[-1]), float(err), spec.max_terms)

    stride = stride_for_phase(phase)
    if stride is None or stride * (spec.window + 2) > spec.max_terms:
        raise ConvergenceFailure(
            f"phase step {phase!r} is too close to a multiple of 2*pi to accelerate",
            terms=0,
        )

    offset = max(2 * stride, 16)
    cumulative = np.zeros(0, dtype=complex)
    best = None
    while offset + stride * spec.window <= spec.max_terms:
        needed = offset + stride * spec.window
        if needed > cumulative.size:
            m = np.arange(cumulative.size + 1, needed + 1)
            chunk = np.cumsum(term(m))
            if cumulative.size:
                chunk += cumulative[-1]
            cumulative = np.concatenate([cumulative, chunk])
        samples = cumulative[offset - 1 + stride * np.arange(spec.window + 1)]
        est, err = wynn_epsilon(samples)
        if best is None or err < best.error:
            best = SeriesResult(est, err, needed)
        if err <= spec.tol:
            return SeriesResult(est, err, needed)
        offset *= 4
    raise ConvergenceFailure(
        f"error estimate {best.error if best else float('nan'):.3g} above tolerance {spec.tol:.3g}",
        best=None if best is None else best.value,
        error=None if best is None else best.error,
        terms=None if best is None else best.terms,
    )
