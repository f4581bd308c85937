from __future__ import annotations

import numpy as np

from .result import EigenResult, is_real


def real_eigs_outside_bulk(res: EigenResult, delta: float = 0.02) -> tuple[np.ndarray, int]:
    """Real eigenvalues beyond the estimated bulk edge and their count.

    The bulk radius is taken as ``sqrt(mu_1)`` for the leading eigenvalue
    ``mu_1``; an eigenvalue counts when it is real (imaginary part at most
    ``1e-6 * max(1, |mu|)``) and ``|mu| > sqrt(mu_1) * (1 + delta)``.  The
    count (leading eigenvalue included) estimates the number of groups.
    """
    vals = np.asarray(res.values, dtype=complex)
    if vals.size == 0:
        raise ValueError("empty eigenvalue list")
    lead = vals[np.argmax(np.abs(vals))]
    if not is_real(lead) or lead.real <= 0:
        raise ValueError(f"leading eigenvalue {lead} is not real and positive; graph may be degenerate")
    radius = np.sqrt(lead.real) * (1.0 + delta)
    mask = is_real(vals) & (np.abs(vals) > radius)
    outside = vals[mask].real
    return outside, int(outside.size)
