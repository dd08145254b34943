"""Realizable resonance loci for fixed proportional-damping constants.

Every resonance of a proportionally damped network is a root of
``lambda^2 + (alpha*sigma + beta)*lambda + sigma`` for some interior modal
stiffness ``sigma > 0``. Sweeping sigma traces curves in the complex plane
whose shape depends only on (alpha, beta); ``locus`` returns the classical
piecewise description (the closure of the attainable set), while ``contains``
answers exact membership by solving for sigma and re-checking the roots.
"""

from dataclasses import dataclass

import numpy as np

from .model import RayleighParams


def resonances_of(sigma, rayleigh):
    """Both roots of ``lambda^2 + (alpha*sigma + beta)*lambda + sigma``.

    Returns ``(lambda_plus, lambda_minus)`` using the numerically stable
    quadratic formula: the larger-magnitude real root is computed first and
    the other recovered from the product ``lambda_plus * lambda_minus =
    sigma``, avoiding cancellation when ``(alpha*sigma + beta)^2 >> 4 sigma``.
    """
    sigma = float(sigma)
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    b = rayleigh.alpha * sigma + rayleigh.beta
    disc = b * b - 4.0 * sigma
    if disc >= 0.0:
        # sigma > 0 forces b > 0 here, so lam_minus < 0 and the division is safe
        lam_minus = -(b + np.sqrt(disc)) / 2.0
        lam_plus = sigma / lam_minus
        return complex(lam_plus), complex(lam_minus)
    im = np.sqrt(-disc) / 2.0
    return complex(-b / 2.0, im), complex(-b / 2.0, -im)


@dataclass(frozen=True)
class LocusPiece:
    """One curve of a resonance locus.

    ``kind`` is one of ``segment`` (real interval), ``ray`` (negative real
    axis), ``line`` (vertical line), ``circle`` or ``imaginary_axis``;
    ``params`` holds the defining constants (endpoints, center, radius...).
    """

    kind: str
    params: dict


@dataclass(frozen=True)
class LocusDescription:
    """Classified resonance locus for fixed (alpha, beta).

    The pieces record the classical closed-form description; the origin is
    never attainable (the root product equals sigma > 0). Exact membership,
    including the parts of the real axis the closed-form picture overstates,
    is decided by :func:`contains`.
    """

    case: str
    rayleigh: RayleighParams
    pieces: tuple


def classify(rayleigh):
    a, b = rayleigh.alpha, rayleigh.beta
    if a == 0.0 and b == 0.0:
        return "undamped"
    if a == 0.0:
        return "node_damping_only"
    if b == 0.0:
        return "dashpot_only"
    return "underdamped_mixed" if a * b < 1.0 else "overdamped_mixed"


def locus(rayleigh):
    """Piecewise description of the resonance locus for (alpha, beta)."""
    a, b = rayleigh.alpha, rayleigh.beta
    case = classify(rayleigh)
    if case == "undamped":
        pieces = (LocusPiece("imaginary_axis", {"origin_excluded": True}),)
    elif case == "node_damping_only":
        pieces = (
            LocusPiece("segment", {"start": -b, "end": 0.0, "end_open": True}),
            LocusPiece("line", {"re": -b / 2.0}),
        )
    elif case == "dashpot_only":
        pieces = (
            LocusPiece("ray", {"end": 0.0, "end_open": True}),
            LocusPiece(
                "circle",
                {"center": -1.0 / a, "radius": 1.0 / a, "origin_excluded": True},
            ),
        )
    elif case == "underdamped_mixed":
        pieces = (
            LocusPiece("ray", {"end": 0.0, "end_open": True}),
            LocusPiece(
                "circle",
                {
                    "center": -1.0 / a,
                    "radius": np.sqrt(1.0 - a * b) / a,
                    "origin_excluded": True,
                },
            ),
        )
    else:
        pieces = (LocusPiece("ray", {"end": 0.0, "end_open": True}),)
    return LocusDescription(case, rayleigh, pieces)


def contains(rayleigh, lam, tol=1e-9):
    """Exact locus membership: is ``lam`` a resonance for some sigma > 0?

    Returns ``(True, sigma)`` with the realizing modal stiffness, or
    ``(False, None)``. For an off-axis point the candidate is the conjugate
    root product ``|lam|^2``; for a real point it is the unique solution of
    the characteristic polynomial for sigma. Every candidate is verified by
    recomputing the roots.
    """
    lam = complex(lam)
    if lam == 0:
        return False, None
    scale = 1.0 + abs(lam)
    candidates = []
    denom = 1.0 + rayleigh.alpha * lam.real
    if abs(lam.imag) <= tol * scale and abs(denom) > 1e-300:
        candidates.append(-(lam.real**2 + rayleigh.beta * lam.real) / denom)
    candidates.append(abs(lam) ** 2)
    for sigma in candidates:
        if not np.isfinite(sigma) or sigma <= 0:
            continue
        roots = resonances_of(sigma, rayleigh)
        if min(abs(r - lam) for r in roots) <= tol * scale:
            return True, float(sigma)
    return False, None


def _piece_label(rayleigh, lam, tol=1e-12):
    case = classify(rayleigh)
    if case == "undamped":
        return "imaginary_axis"
    on_axis = abs(lam.imag) <= tol * (1.0 + abs(lam))
    if case == "node_damping_only":
        return "segment" if on_axis else "line"
    if case == "overdamped_mixed":
        return "ray"
    return "ray" if on_axis else "circle"


def sample_locus(rayleigh, n_points, sigma_range=(1e-2, 1e2)):
    """Resonances for a log-spaced sigma sweep, ``n_points`` in total."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    n_sigma = (n_points + 1) // 2
    sigmas = np.logspace(np.log10(sigma_range[0]), np.log10(sigma_range[1]), n_sigma)
    points = []
    for s in sigmas:
        points.extend(resonances_of(s, rayleigh))
    return np.array(points[:n_points], dtype=complex)


def locus_table(rayleigh, n_points, sigma_range=(1e-2, 1e2)):
    """Rows (re, im, sigma, piece_label) for CSV emission."""
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    n_sigma = (n_points + 1) // 2
    sigmas = np.logspace(np.log10(sigma_range[0]), np.log10(sigma_range[1]), n_sigma)
    rows = []
    for s in sigmas:
        for lam in resonances_of(s, rayleigh):
            rows.append(
                {
                    "re": lam.real,
                    "im": lam.imag,
                    "sigma": float(s),
                    "piece_label": _piece_label(rayleigh, lam),
                }
            )
    return rows[:n_points]
