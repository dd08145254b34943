"""Admissibility checks for candidate pole-residue responses.

A candidate is the response of some proportionally damped network iff every
residue is PSD with positive modal stiffness, the terminal mass block is
nonnegative diagonal, the instantaneous stiffness block is PSD, all poles
sit in the closed left half plane, and the static slice ``W(0)`` is PSD
with every column a balanced force system at the terminals. Passivity
(``omega * Im W(i omega)`` PSD for real omega) follows from those
conditions; it is sampled here anyway as a regression guard on the
numerical extraction.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AtResonance, DimensionMismatch
from .geometry import balance_residual
from .linalg import is_psd, min_eig
from .response import evaluate_canonical

PASSIVITY_GRID_POINTS = 41  # per sign, spanning omega in [1e-2, 1e2]
DEFAULT_TOL = 1e-9

CONDITION_NAMES = (
    "R_psd",
    "sigma_positive",
    "M_diag_psd",
    "A_psd",
    "poles_left_half",
    "static_psd",
    "static_balanced",
    "passivity_sampled",
)


@dataclass(frozen=True)
class ConditionResult:
    passed: bool
    worst_violation: float
    witness: str


@dataclass(frozen=True)
class CharacterizationReport:
    """Per-condition outcome of the admissibility check."""

    conditions: dict
    warnings: tuple = ()

    @property
    def passed(self):
        return all(c.passed for c in self.conditions.values())

    def failing(self):
        return [n for n, c in self.conditions.items() if not c.passed]

    def to_dict(self):
        return {
            "pass": self.passed,
            "conditions": {
                name: {
                    "pass": c.passed,
                    "worst_violation": c.worst_violation,
                    "witness": c.witness,
                }
                for name, c in self.conditions.items()
            },
            "warnings": list(self.warnings),
        }


def check_balanced(F, positions, tol=1e-10):
    """Are all columns of ``F`` balanced force systems at ``positions``?

    ``F`` is a (n*d, m) matrix (or a single (n*d,) vector); each column is
    read node-major. Returns ``(passed, worst_residual)`` where the pass
    threshold is ``tol * (1 + max|F|)`` so the test is insensitive to force
    units.
    """
    positions = np.atleast_2d(np.asarray(positions, dtype=float))
    n, d = positions.shape
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if F.ndim != 2 or F.shape[0] != n * d:
        raise DimensionMismatch(
            f"force matrix has shape {F.shape}, expected ({n * d}, m)"
        )
    if F.shape[1] == 0:
        raise DimensionMismatch("force matrix must have at least one column")
    worst = 0.0
    for col in F.T:
        worst = max(worst, balance_residual(positions, col.reshape(n, d)))
    passed = worst <= tol * (1.0 + np.abs(F).max())
    return bool(passed), float(worst)


def _pole_roots(sigma, rayleigh):
    # closed-form quadratic roots; sigma <= 0 (hand-edited candidates) included
    b = rayleigh.alpha * sigma + rayleigh.beta
    sq = np.sqrt(complex(b * b - 4.0 * sigma))
    return ((-b + sq) / 2.0, (-b - sq) / 2.0)


def passivity_margin(cr, omega):
    """Smallest eigenvalue of ``omega * Im W(i omega)``.

    Nonnegative for admissible responses at every real omega: damping can
    only consume energy.
    """
    sample = evaluate_canonical(cr, 1j * float(omega))
    return min_eig(float(omega) * sample.W.a.imag)


def check_canonical(cr, tol=DEFAULT_TOL, n_omega=PASSIVITY_GRID_POINTS):
    """Evaluate every admissibility condition on a candidate response.

    Never raises on a bad candidate: all failures are carried in the
    report. ``worst_violation`` is zero for a clean pass and otherwise the
    magnitude of the worst offence; ``witness`` names the offender.
    """
    conditions = {}

    worst = 0.0
    witness = "no modes" if not cr.modes else ""
    ok = True
    for k, mode in enumerate(cr.modes):
        low = min_eig(mode.R.a)
        if not is_psd(mode.R, tol=tol):
            ok = False
        if low < -worst:
            worst = -low
            witness = f"mode {k} residue min eigenvalue {low:.3e}"
    conditions["R_psd"] = ConditionResult(ok, worst, witness or "all residues PSD")

    sig = [m.sigma for m in cr.modes]
    ok = all(s > 0.0 for s in sig)
    worst = max([0.0] + [-s for s in sig if s <= 0.0])
    conditions["sigma_positive"] = ConditionResult(
        ok, worst, f"min sigma = {min(sig):.6g}" if sig else "no modes"
    )

    low = float(cr.Mbb.min()) if cr.Mbb.size else 0.0
    conditions["M_diag_psd"] = ConditionResult(
        low >= -tol, max(0.0, -low), f"min terminal mass entry {low:.6g}"
    )

    low = min_eig(cr.A.a)
    conditions["A_psd"] = ConditionResult(
        is_psd(cr.A, tol=tol), max(0.0, -low), f"A min eigenvalue {low:.3e}"
    )

    worst_re = 0.0
    witness = "no poles" if not cr.modes else ""
    for mode in cr.modes:
        re = max(float(r.real) for r in _pole_roots(mode.sigma, cr.rayleigh))
        if re > worst_re:
            worst_re = re
            witness = f"pole with Re = {re:.3e} from sigma = {mode.sigma:.6g}"
    conditions["poles_left_half"] = ConditionResult(
        worst_re <= tol, max(0.0, worst_re), witness or "all poles in Re <= 0"
    )

    w0 = cr.static_response()
    low = min_eig(w0.a)
    conditions["static_psd"] = ConditionResult(
        is_psd(w0, tol=tol), max(0.0, -low), f"W(0) min eigenvalue {low:.3e}"
    )

    ok, residual = check_balanced(w0.a, cr.terminal_positions, tol=tol)
    conditions["static_balanced"] = ConditionResult(
        ok, residual, f"worst force/torque residual {residual:.3e}"
    )

    # the pass test is relative to the sampled matrix magnitude: at large
    # omega the PSD quantity is rounding in W(0) amplified by alpha*omega^2,
    # which an absolute threshold cannot absorb
    grid = np.logspace(-2.0, 2.0, n_omega)
    worst_margin = np.inf
    worst_ratio = np.inf
    witness = ""
    skipped = 0
    for omega in np.concatenate([-grid[::-1], grid]):
        try:
            sample = evaluate_canonical(cr, 1j * float(omega))
        except AtResonance:
            skipped += 1
            continue
        dissipation = float(omega) * sample.W.a.imag
        margin = min_eig(dissipation)
        ratio = margin / (1.0 + np.abs(dissipation).max())
        if ratio < worst_ratio:
            worst_ratio = ratio
            worst_margin = margin
            witness = f"min eig(omega Im W) = {margin:.3e} at omega = {omega:.6g}"
    if skipped:
        witness += f" ({skipped} resonant grid points skipped)"
    conditions["passivity_sampled"] = ConditionResult(
        bool(worst_ratio >= -tol), max(0.0, -float(worst_margin)), witness
    )

    warnings = []
    if cr.Mbb.size:
        blocks = cr.Mbb.reshape(cr.n_terminals, cr.dimension)
        spread = np.abs(blocks - blocks[:, :1]).max()
        if spread > 1e-12 * (1.0 + np.abs(cr.Mbb).max()):
            warnings.append(
                "terminal mass diagonal varies within a node's coordinate "
                f"block (spread {spread:.3e}); such a response has no "
                "realization by isotropic nodal masses"
            )
    return CharacterizationReport(conditions, tuple(warnings))
