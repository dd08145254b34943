"""Terminal response evaluation and pole-residue extraction.

The displacement-to-force map at the terminals is the Schur complement of
the interior block of ``K + lambda*C + lambda^2*M``. For proportional
damping this map always collapses to the closed pole-residue form

    W(lambda) = (1+alpha*lambda)*A + (beta*lambda+lambda^2)*diag(Mbb)
                - sum_j (1+alpha*lambda)^2 * R_j / q_j(lambda),

    q_j(lambda) = sigma_j + (alpha*sigma_j+beta)*lambda + lambda^2,

which this module extracts constructively: eliminate massless interior
nodes statically (the elimination preserves the proportional-damping
structure), mass-normalize the remaining interior stiffness,
eigendecompose, and cluster the rank-one residues by eigenvalue.
"""

from dataclasses import dataclass

import numpy as np

from . import jsonio
from .errors import (
    AtResonance,
    ElastonetError,
    FloppyModeInconsistent,
    RayleighStructureBroken,
    ReconstructionMismatch,
    SchemaError,
    SingularBlock,
)
from .linalg import BlockPartition, SymMatrix, is_psd, schur_complement
from .model import RayleighParams
from .resonances import resonances_of

# Defaults shared with the CLI flags.
FLOPPY_TOL = 1e-9
CLUSTER_TOL = 1e-8
RESONANCE_CLEARANCE = 1e-3
ROUNDTRIP_TOL = 1e-8


@dataclass(frozen=True)
class ResponseSample:
    """Terminal response matrix at one Laplace parameter."""

    lam: complex
    W: SymMatrix


@dataclass(frozen=True)
class Mode:
    """One resonant term: modal stiffness ``sigma`` and PSD residue ``R``."""

    sigma: float
    R: SymMatrix


@dataclass(frozen=True)
class CanonicalResponse:
    """Pole-residue form of a proportionally damped terminal response.

    Only structural well-formedness is enforced here (shapes, real symmetric
    blocks); admissibility (PSD-ness, pole locations, balanced static slice)
    is the characterizer's job, so hand-edited candidates can be represented
    and then rejected with a detailed report.
    """

    rayleigh: RayleighParams
    A: SymMatrix
    Mbb: np.ndarray
    modes: tuple
    terminal_positions: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "Mbb", np.asarray(self.Mbb, dtype=float))
        object.__setattr__(
            self, "terminal_positions", np.asarray(self.terminal_positions, dtype=float)
        )
        object.__setattr__(self, "modes", tuple(self.modes))
        n = self.A.order
        if self.A.field != "real":
            raise ValueError("static stiffness block A must be real")
        if self.Mbb.shape != (n,):
            raise ValueError(f"Mbb has shape {self.Mbb.shape}, expected ({n},)")
        if self.terminal_positions.ndim != 2 or (
            self.terminal_positions.shape[0] * self.terminal_positions.shape[1] != n
        ):
            raise ValueError(
                f"terminal positions {self.terminal_positions.shape} do not fill "
                f"order {n}"
            )
        for k, mode in enumerate(self.modes):
            if mode.R.order != n or mode.R.field != "real":
                raise ValueError(f"mode {k} residue must be real of order {n}")

    @property
    def order(self):
        return self.A.order

    @property
    def dimension(self):
        return self.terminal_positions.shape[1]

    @property
    def n_terminals(self):
        return self.terminal_positions.shape[0]

    def static_response(self):
        """W(0) = A - sum_j R_j / sigma_j."""
        w0 = self.A.a.copy()
        for mode in self.modes:
            w0 = w0 - mode.R.a / mode.sigma
        return SymMatrix(w0)

    def resonances(self):
        """All poles (roots of the q_j), duplicates removed."""
        roots = []
        for mode in self.modes:
            roots.extend(resonances_of(mode.sigma, self.rayleigh))
        distinct = []
        for r in roots:
            if all(abs(r - s) > 1e-12 * (1.0 + abs(r)) for s in distinct):
                distinct.append(r)
        return distinct


@dataclass(frozen=True)
class ReducedSystem:
    """System over terminals plus massive interior, massless nodes removed."""

    Ktilde: SymMatrix
    Ctilde: SymMatrix
    Mbb: np.ndarray
    Mjj: np.ndarray
    dimension: int
    rayleigh: RayleighParams
    terminal_positions: np.ndarray

    @property
    def n_b(self):
        return len(self.Mbb)

    @property
    def n_j(self):
        return len(self.Mjj)


def _pencil(sys, lam):
    lam = complex(lam)
    p = sys.K.a + lam * sys.C.a + lam * lam * sys.M.a
    return SymMatrix(p)


def evaluate_response(sys, lam, mode="inverse", tol=1e-10):
    """Terminal response W(lambda) of an assembled system.

    Forms ``K + lambda*C + lambda^2*M`` and takes the Schur complement of
    the interior block. ``mode="pseudoinverse"`` handles systems whose
    interior pencil is exactly singular at every lambda (massless interior
    nodes with floppy directions); the truncated directions carry no
    coupling to the terminals, so the response is unchanged.
    """
    try:
        w = schur_complement(_pencil(sys, lam), sys.partition, mode=mode, tol=tol)
    except SingularBlock as exc:
        raise AtResonance(
            f"lambda = {lam} is numerically a resonance: {exc}",
            singular_values=exc.smallest_singular_value,
        ) from exc
    return ResponseSample(complex(lam), w)


def _node_block_masses(mass_coords, d, label):
    blocks = mass_coords.reshape(-1, d)
    if blocks.size and not np.all(blocks == blocks[:, :1]):
        raise ElastonetError(
            f"{label} mass entries differ within a node's coordinate block"
        )
    return blocks


def eliminate_massless(sys, tol=1e-10):
    """Statically eliminate massless interior nodes.

    Interior coordinates split by exact ``mass == 0`` test into massive (J)
    and massless (L). The massless block is removed by a pseudoinverse Schur
    complement of ``K`` and of ``C`` separately; the result provably keeps
    the proportional-damping identity ``Ctilde = alpha*Ktilde +
    beta*diag(Mbb, Mjj)``, which is asserted to ``tol * max|Ktilde|``
    (:class:`RayleighStructureBroken` if the input damping was not
    proportional). The reduced interior blocks are asserted PSD.
    """
    d = sys.dimension
    masses = sys.mass_vector()
    boundary = list(sys.partition.boundary)
    interior = list(sys.partition.interior)
    _node_block_masses(masses[interior], d, "interior")
    j_coords = [c for c in interior if masses[c] != 0.0]
    l_coords = [c for c in interior if masses[c] == 0.0]

    keep = boundary + j_coords
    if l_coords:
        part = BlockPartition(keep, l_coords)
        ktilde = schur_complement(sys.K, part, mode="pseudoinverse", tol=tol)
        ctilde = schur_complement(sys.C, part, mode="pseudoinverse", tol=tol)
    else:
        ix = np.ix_(keep, keep)
        ktilde = SymMatrix(sys.K.a[ix])
        ctilde = SymMatrix(sys.C.a[ix])

    mbb = masses[boundary]
    mjj = masses[j_coords]
    alpha, beta = sys.rayleigh.alpha, sys.rayleigh.beta
    expected_c = alpha * ktilde.a + beta * np.diag(np.concatenate([mbb, mjj]))
    gap = np.abs(ctilde.a - expected_c).max() if ctilde.order else 0.0
    knorm = np.abs(ktilde.a).max() if ktilde.order else 0.0
    # Mechanism networks reduce to Ktilde == 0 exactly, so the guard scale
    # must also see the damping magnitude and the rounding floor of the two
    # pseudoinverse eliminations (computed from O(|K|), O(|C|) inputs); a
    # genuinely non-proportional C violates the identity at O(|C|).
    cnorm = np.abs(ctilde.a).max() if ctilde.order else 0.0
    rounding = 1e-3 * max(np.abs(sys.K.a).max(), np.abs(sys.C.a).max(), 0.0)
    scale = max(knorm, cnorm, beta * (masses.max() if masses.size else 0.0), rounding)
    if gap > tol * max(scale, 1e-300):
        raise RayleighStructureBroken(
            f"reduced damping deviates from alpha*Ktilde + beta*M by {gap:.3e} "
            f"(threshold {tol * scale:.3e}); input damping was not proportional"
        )
    nb = len(mbb)
    for name, mat in (("stiffness", ktilde), ("damping", ctilde)):
        block = mat.a[nb:, nb:]
        if block.size and not is_psd(SymMatrix(block), tol=1e-9):
            raise ElastonetError(
                f"reduced interior {name} block is not positive semidefinite"
            )
    return ReducedSystem(
        Ktilde=ktilde,
        Ctilde=ctilde,
        Mbb=mbb,
        Mjj=mjj,
        dimension=d,
        rayleigh=sys.rayleigh,
        terminal_positions=sys.terminal_positions,
    )


def evaluate_reduced(red, lam, mode="inverse", tol=1e-10):
    """Response of a reduced system: Schur complement of its interior block."""
    lam = complex(lam)
    nb, nj = red.n_b, red.n_j
    m = np.diag(np.concatenate([red.Mbb, red.Mjj]))
    p = SymMatrix(red.Ktilde.a + lam * red.Ctilde.a + lam * lam * m)
    part = BlockPartition(range(nb), range(nb, nb + nj))
    try:
        w = schur_complement(p, part, mode=mode, tol=tol)
    except SingularBlock as exc:
        raise AtResonance(
            f"lambda = {lam} is numerically a resonance of the reduced system: {exc}",
            singular_values=exc.smallest_singular_value,
        ) from exc
    return ResponseSample(lam, w)


def system_resonances(rayleigh, sigmas, include_damper_pole=True):
    """Candidate resonances for modal stiffnesses ``sigmas``.

    Includes the roots of every ``q(lambda)`` (with sigma clipped at zero:
    floppy modes contribute the roots 0 and -beta) and, when alpha > 0, the
    point ``-1/alpha`` where the spring-damper factor ``1 + alpha*lambda``
    vanishes and massless interior blocks degenerate.
    """
    points = []
    for sigma in sigmas:
        s = max(float(sigma), 0.0)
        if s > 0.0:
            points.extend(resonances_of(s, rayleigh))
        else:
            points.extend([0.0 + 0.0j, complex(-rayleigh.beta)])
    if include_damper_pole and rayleigh.alpha > 0.0:
        points.append(complex(-1.0 / rayleigh.alpha))
    return points


def sample_nonresonant(
    rng,
    avoid,
    count,
    modulus_range=(0.1, 10.0),
    clearance=RESONANCE_CLEARANCE,
    max_tries=10000,
):
    """Random complex Laplace points staying clear of the avoid set.

    Moduli are log-uniform in ``modulus_range``; points within ``clearance``
    of any avoided resonance are redrawn.
    """
    avoid = np.asarray(list(avoid), dtype=complex)
    lo, hi = np.log(modulus_range[0]), np.log(modulus_range[1])
    out = []
    tries = 0
    while len(out) < count:
        if tries > max_tries:
            raise ElastonetError("could not sample non-resonant points")
        tries += 1
        lam = np.exp(rng.uniform(lo, hi)) * np.exp(2j * np.pi * rng.uniform())
        if avoid.size and np.abs(avoid - lam).min() < clearance:
            continue
        out.append(lam)
    return np.array(out, dtype=complex)


def _cluster_ascending(sigmas, tol):
    """Group indices of ascending ``sigmas`` whose relative gaps are <= tol."""
    groups = []
    for idx, s in enumerate(sigmas):
        if groups and (s - sigmas[groups[-1][-1]]) <= tol * s:
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def reduced_modal_stiffnesses(red):
    """Eigenvalues of the mass-normalized interior stiffness of a reduced system.

    These are the modal stiffnesses whose characteristic polynomials carry
    every resonance of the network; useful for building avoid sets when
    sampling non-resonant points.
    """
    if not red.n_j:
        return np.zeros(0)
    inv_sqrt = 1.0 / np.sqrt(red.Mjj)
    kjj = red.Ktilde.a[red.n_b:, red.n_b:]
    return np.linalg.eigvalsh(SymMatrix(np.outer(inv_sqrt, inv_sqrt) * kjj).a)


def extract_canonical(
    sys,
    tol_floppy=FLOPPY_TOL,
    tol_cluster=CLUSTER_TOL,
    seed=0,
    check=True,
    n_check=20,
):
    """Extract the pole-residue form of an assembled system.

    Massless interior nodes are eliminated first; the massive interior
    stiffness is mass-normalized and eigendecomposed, giving modal
    stiffnesses ``sigma_i`` with coupling columns ``v_i``; zero-stiffness
    (floppy) interior modes must not couple to the terminals
    (:class:`FloppyModeInconsistent` otherwise) and are dropped; the
    remaining rank-one residues are clustered by relative eigenvalue gap
    ``tol_cluster`` so repeated modal stiffnesses share one residue.

    When ``check`` is set the result is validated against the direct Schur
    response at ``n_check`` random non-resonant points
    (:class:`ReconstructionMismatch` beyond ``ROUNDTRIP_TOL`` relative).
    """
    red = eliminate_massless(sys)
    nb, nj = red.n_b, red.n_j
    a_arr = red.Ktilde.a[:nb, :nb]
    # a boundary block below the rounding floor of the elimination is an
    # exact physical zero (mechanisms, single-terminal balance); snapping it
    # keeps pure noise out of the canonical data
    if a_arr.size and np.abs(a_arr).max() <= 1e-12 * np.abs(sys.K.a).max():
        a_arr = np.zeros_like(a_arr)
    a_block = SymMatrix(a_arr)
    modes = []
    all_sigmas = []
    if nj:
        inv_sqrt = 1.0 / np.sqrt(red.Mjj)
        kjj = red.Ktilde.a[nb:, nb:]
        normalized = SymMatrix(np.outer(inv_sqrt, inv_sqrt) * kjj)
        sigmas, u = np.linalg.eigh(normalized.a)
        all_sigmas = list(sigmas)
        x = inv_sqrt[:, None] * u
        v = red.Ktilde.a[:nb, nb:] @ x
        sigma_max = max(float(sigmas[-1]), 0.0)
        # mechanisms reduce Ktilde to pure rounding of an O(|K|) input, so
        # the coupling threshold keeps a floor tied to the full stiffness
        knorm = max(
            np.linalg.norm(red.Ktilde.a), 1e-6 * np.linalg.norm(sys.K.a)
        )
        floppy = sigmas <= tol_floppy * sigma_max
        for i in np.nonzero(floppy)[0]:
            coupling = np.linalg.norm(v[:, i])
            if coupling > tol_floppy * max(knorm, 1e-300):
                raise FloppyModeInconsistent(
                    f"interior mode with stiffness {sigmas[i]:.3e} couples to the "
                    f"terminals with norm {coupling:.3e} "
                    f"(threshold {tol_floppy * knorm:.3e})"
                )
        live = np.nonzero(~floppy)[0]
        groups = _cluster_ascending([float(sigmas[i]) for i in live], tol_cluster)
        for group in groups:
            members = [live[g] for g in group]
            sigma_j = float(np.mean([sigmas[i] for i in members]))
            r = np.zeros((nb, nb))
            for i in members:
                r += np.outer(v[:, i], v[:, i])
            modes.append(Mode(sigma_j, SymMatrix(r)))
    cr = CanonicalResponse(
        rayleigh=red.rayleigh,
        A=a_block,
        Mbb=red.Mbb.copy(),
        modes=tuple(modes),
        terminal_positions=red.terminal_positions,
    )
    if check and nb:
        rng = np.random.default_rng(seed)
        avoid = system_resonances(red.rayleigh, all_sigmas)
        worst = 0.0
        for lam in sample_nonresonant(rng, avoid, n_check):
            direct = evaluate_response(sys, lam, mode="pseudoinverse").W.a
            closed = evaluate_canonical(cr, lam).W.a
            # numerically-zero responses (mechanisms) are compared against
            # the pencil magnitude instead of their own rounding-level norm
            pencil_scale = (
                np.abs(sys.K.a).max()
                + np.abs(sys.C.a).max() * abs(lam)
                + np.abs(sys.M.a).max() * abs(lam) ** 2
            )
            scale = max(np.abs(direct).max(), 1e-4 * pencil_scale, 1e-300)
            worst = max(worst, np.abs(closed - direct).max() / scale)
        if worst > ROUNDTRIP_TOL:
            raise ReconstructionMismatch(
                f"pole-residue form deviates from the direct response by "
                f"{worst:.3e} relative (threshold {ROUNDTRIP_TOL:.1e})"
            )
    return cr


def evaluate_canonical(cr, lam, tol=1e-12):
    """Evaluate the pole-residue form at one Laplace point."""
    lam = complex(lam)
    damp = 1.0 + cr.rayleigh.alpha * lam
    w = damp * cr.A.a + (cr.rayleigh.beta * lam + lam * lam) * np.diag(cr.Mbb)
    guard = tol * (1.0 + abs(lam) ** 2)
    for mode in cr.modes:
        q = (
            mode.sigma
            + (cr.rayleigh.alpha * mode.sigma + cr.rayleigh.beta) * lam
            + lam * lam
        )
        if abs(q) <= guard:
            raise AtResonance(
                f"lambda = {lam} is a pole: |q({mode.sigma:.6g})| = {abs(q):.3e}"
            )
        w = w - (damp * damp / q) * mode.R.a
    return ResponseSample(lam, SymMatrix(w))


# ---------------------------------------------------------------------------
# JSON form: {alpha, beta, A, Mbb, modes[{sigma, R}], terminals}
# ---------------------------------------------------------------------------


def canonical_to_dict(cr):
    return {
        "alpha": cr.rayleigh.alpha,
        "beta": cr.rayleigh.beta,
        "A": [list(row) for row in cr.A.a],
        "Mbb": list(cr.Mbb),
        "modes": [
            {"sigma": m.sigma, "R": [list(row) for row in m.R.a]} for m in cr.modes
        ],
        "terminals": [list(p) for p in cr.terminal_positions],
    }


def canonical_from_dict(obj, path="canonical"):
    jsonio.check_fields(obj, path, ("alpha", "beta", "A", "Mbb", "modes", "terminals"))
    terminals = jsonio.as_matrix(obj["terminals"], f"{path}.terminals")
    if terminals.ndim != 2 or terminals.shape[1] not in (2, 3):
        raise SchemaError(f"{path}.terminals: expected rows of 2 or 3 coordinates")
    n = terminals.shape[0] * terminals.shape[1]
    try:
        a = SymMatrix(jsonio.as_matrix(obj["A"], f"{path}.A", (n, n)))
        modes = []
        for k, raw in enumerate(jsonio.as_list(obj["modes"], f"{path}.modes")):
            p = f"{path}.modes[{k}]"
            jsonio.check_fields(raw, p, ("sigma", "R"))
            modes.append(
                Mode(
                    jsonio.as_number(raw["sigma"], f"{p}.sigma"),
                    SymMatrix(jsonio.as_matrix(raw["R"], f"{p}.R", (n, n))),
                )
            )
        ray = RayleighParams(
            jsonio.as_number(obj["alpha"], f"{path}.alpha"),
            jsonio.as_number(obj["beta"], f"{path}.beta"),
        )
        return CanonicalResponse(
            rayleigh=ray,
            A=a,
            Mbb=jsonio.as_vector(obj["Mbb"], f"{path}.Mbb", n),
            modes=tuple(modes),
            terminal_positions=terminals,
        )
    except (ValueError, ElastonetError) as exc:
        if isinstance(exc, SchemaError):
            raise
        raise SchemaError(f"{path}: {exc}") from exc
