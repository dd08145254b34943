"""Build a network realizing an admissible pole-residue response.

The construction superposes three kinds of components that share terminal
nodes and only terminal nodes, so their responses add:

* one component of ideal rank-one elastic elements realizing the static
  slice ``(1 + alpha*lambda) * W(0)`` via the spectral factorization
  ``W(0) = sum_k w_k w_k^T`` (each factor is a balanced force system);
* one component of terminal masses realizing
  ``(beta*lambda + lambda^2) * diag(Mbb)``;
* per mode, one two-internal-node gadget per rank of the residue. A gadget
  supports an ideal element with force vector ``[f; g]`` where ``g``
  balances ``f``, and gives both internal nodes the mass ``m = |g|^2 /
  sigma``; its response is exactly

      [(1+alpha*lambda) - (1+alpha*lambda)^2 sigma / q(lambda)] f f^T,
      q(lambda) = sigma + (alpha*sigma+beta)*lambda + lambda^2,

  with zero static response.

Ideal elements stand in for static spring trusses: the element supported on
nodes with force vector ``f`` contributes the rank-one stiffness ``f f^T``.
Realizing one by literal springs is out of scope here except for the
two-node collinear case handled by :func:`decompose_two_node_element`.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .characterize import check_balanced, check_canonical
from .errors import (
    NotCharacterizable,
    PlacementFailed,
    ReconstructionMismatch,
    SchemaError,
    ZeroForce,
)
from .geometry import (
    balance_residual,
    cross,
    hull_diameter,
    hull_distance,
    project_balanced,
)
from .linalg import BlockPartition, SymMatrix
from .model import Node, RayleighParams, Spring, SystemMatrices, spring_direction
from .response import (
    ResponseSample,
    evaluate_canonical,
    evaluate_response,
    sample_nonresonant,
)

COMPONENT_KINDS = ("springs", "ideal_elements", "terminal_masses", "rank_one_gadget")

# Relative eigenvalue cutoff when factoring PSD blocks into rank-one terms.
RANK_TOL = 1e-12

SYNTH_ROUNDTRIP_TOL = 1e-8


def default_min_clearance(terminals):
    return 1e-6 * max(hull_diameter(terminals), 1.0)


@dataclass(frozen=True)
class IdealElasticElement:
    """Rank-one elastic element: stiffness contribution ``f f^T``.

    ``support`` lists the node indices the force vector acts on, d
    consecutive entries of ``force_vector`` per support node. The force
    system must be balanced at the support positions, which the owning
    component verifies.
    """

    support: tuple
    force_vector: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "support", tuple(int(i) for i in self.support))
        object.__setattr__(
            self, "force_vector", np.asarray(self.force_vector, dtype=float)
        )
        if len(set(self.support)) != len(self.support):
            raise ValueError("ideal element support repeats a node")
        if self.force_vector.ndim != 1 or self.force_vector.size % len(self.support):
            raise ValueError(
                f"force vector of length {self.force_vector.size} does not split "
                f"over {len(self.support)} support nodes"
            )


@dataclass(frozen=True)
class NetworkComponent:
    """One superposable piece of a generalized network.

    Nodes list every shared terminal first (in global order), then the
    component's own internal nodes. Element force systems are verified
    balanced at construction.
    """

    kind: str
    nodes: tuple
    n_terminals: int
    elements: tuple
    rayleigh: RayleighParams
    dimension: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.kind not in COMPONENT_KINDS:
            raise ValueError(f"unknown component kind {self.kind!r}")
        if not 1 <= self.n_terminals <= len(self.nodes):
            raise ValueError("component must include every terminal node")
        for k, node in enumerate(self.nodes):
            if node.is_terminal != (k < self.n_terminals):
                raise ValueError("terminal nodes must come first and be flagged")
        d = self.dimension
        positions = np.array([n.position for n in self.nodes])
        for el in self.elements:
            if isinstance(el, Spring):
                spring_direction(positions, el.i, el.j)
                continue
            if max(el.support) >= len(self.nodes):
                raise ValueError("ideal element references a missing node")
            if el.force_vector.size != len(el.support) * d:
                raise ValueError("ideal element force vector has the wrong length")
            residual = balance_residual(
                positions[list(el.support)], el.force_vector.reshape(-1, d)
            )
            if residual > 1e-8 * (1.0 + np.abs(el.force_vector).max()):
                raise ValueError(
                    f"ideal element force system is unbalanced (residual "
                    f"{residual:.3e})"
                )

    @property
    def internal_positions(self):
        return np.array([n.position for n in self.nodes[self.n_terminals:]]).reshape(
            -1, self.dimension
        )


def assemble_component(comp):
    """System matrices of one component (terminal coordinates first)."""
    d = comp.dimension
    n = len(comp.nodes) * d
    positions = np.array([node.position for node in comp.nodes])
    K = np.zeros((n, n))
    for el in comp.elements:
        if isinstance(el, Spring):
            nvec = spring_direction(positions, el.i, el.j)
            block = el.stiffness * np.outer(nvec, nvec)
            ci = range(el.i * d, (el.i + 1) * d)
            cj = range(el.j * d, (el.j + 1) * d)
            K[np.ix_(ci, ci)] += block
            K[np.ix_(cj, cj)] += block
            K[np.ix_(ci, cj)] -= block
            K[np.ix_(cj, ci)] -= block
        else:
            coords = [c for i in el.support for c in range(i * d, (i + 1) * d)]
            K[np.ix_(coords, coords)] += np.outer(el.force_vector, el.force_vector)
    masses = np.repeat([node.mass for node in comp.nodes], d)
    M = np.diag(masses)
    C = comp.rayleigh.alpha * K + comp.rayleigh.beta * M
    nb = comp.n_terminals * d
    return SystemMatrices(
        K=SymMatrix(K),
        C=SymMatrix(C),
        M=SymMatrix(M),
        partition=BlockPartition(range(nb), range(nb, n)),
        dimension=d,
        rayleigh=comp.rayleigh,
        terminal_positions=positions[: comp.n_terminals],
    )


@dataclass(frozen=True)
class GeneralizedNetwork:
    """Superposition of components sharing exactly the terminal nodes.

    Construction asserts the geometry contract: every internal node lies
    within ``epsilon_hull`` of the convex hull of the terminals, keeps
    ``min_clearance`` from every forbidden point, and internal nodes of all
    components are pairwise separated by ``min_clearance`` (components may
    share terminals only).
    """

    terminals: np.ndarray
    components: tuple
    epsilon_hull: float
    forbidden: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    min_clearance: float = None

    def __post_init__(self):
        terminals = np.atleast_2d(np.asarray(self.terminals, dtype=float))
        object.__setattr__(self, "terminals", terminals)
        object.__setattr__(self, "components", tuple(self.components))
        if self.epsilon_hull <= 0:
            raise ValueError("epsilon_hull must be > 0")
        d = terminals.shape[1]
        forb = np.asarray(self.forbidden, dtype=float).reshape(-1, d) if np.size(
            self.forbidden
        ) else np.zeros((0, d))
        object.__setattr__(self, "forbidden", forb)
        clearance = (
            default_min_clearance(terminals)
            if self.min_clearance is None
            else float(self.min_clearance)
        )
        object.__setattr__(self, "min_clearance", clearance)
        internal = []
        for k, comp in enumerate(self.components):
            if comp.dimension != d or comp.n_terminals != len(terminals):
                raise ValueError(f"component {k} does not share the terminal set")
            shared = np.array([n.position for n in comp.nodes[: comp.n_terminals]])
            if not np.array_equal(shared, terminals):
                raise ValueError(f"component {k} terminal positions differ")
            if comp.rayleigh != self.components[0].rayleigh:
                raise ValueError("components must share the damping constants")
            internal.extend(comp.internal_positions)
        slack = 1e-9
        for p in internal:
            if hull_distance(p, terminals) > self.epsilon_hull + slack:
                raise ValueError(
                    f"internal node {p} lies outside the epsilon-neighborhood "
                    f"of the terminal hull"
                )
            for q in forb:
                if np.linalg.norm(p - q) < clearance * (1.0 - 1e-9):
                    raise ValueError(f"internal node {p} violates a forbidden point")
        for a in range(len(internal)):
            for b in range(a + 1, len(internal)):
                if np.linalg.norm(internal[a] - internal[b]) < clearance * (1.0 - 1e-9):
                    raise ValueError("internal nodes of components must be distinct")

    @property
    def dimension(self):
        return self.terminals.shape[1]

    @property
    def rayleigh(self):
        if self.components:
            return self.components[0].rayleigh
        return RayleighParams(0.0, 0.0)


def evaluate_generalized(gn, lam, mode="inverse"):
    """Response of the superposition: the sum of the component responses."""
    nb = gn.terminals.size
    total = np.zeros((nb, nb), dtype=complex)
    for comp in gn.components:
        total = total + evaluate_response(assemble_component(comp), lam, mode=mode).W.a
    return ResponseSample(complex(lam), SymMatrix(total))


def assemble_union(gn):
    """Merge all components into a single assembled system.

    Terminal masses add across components; internal nodes are stacked after
    the shared terminals. Evaluating the union's Schur complement and
    summing per-component responses must agree: that is the superposition
    principle, exercised directly by the test suite.
    """
    d = gn.dimension
    nt = len(gn.terminals)
    terminal_mass = np.zeros(nt)
    internals = []
    mappings = []  # per component: global node index of each component node
    for comp in gn.components:
        mapping = list(range(nt))
        for k, node in enumerate(comp.nodes):
            if k < nt:
                terminal_mass[k] += node.mass
            else:
                mapping.append(nt + len(internals))
                internals.append(node)
        mappings.append(mapping)
    n_nodes = nt + len(internals)
    n = n_nodes * d
    K = np.zeros((n, n))
    masses = np.zeros(n_nodes)
    masses[:nt] = terminal_mass
    for k, node in enumerate(internals):
        masses[nt + k] = node.mass
    if internals:
        positions = np.vstack([gn.terminals, [node.position for node in internals]])
    else:
        positions = gn.terminals.copy()
    for comp, mapping in zip(gn.components, mappings):
        for el in comp.elements:
            if isinstance(el, Spring):
                gi, gj = mapping[el.i], mapping[el.j]
                nvec = spring_direction(positions, gi, gj)
                block = el.stiffness * np.outer(nvec, nvec)
                ci = range(gi * d, (gi + 1) * d)
                cj = range(gj * d, (gj + 1) * d)
                K[np.ix_(ci, ci)] += block
                K[np.ix_(cj, cj)] += block
                K[np.ix_(ci, cj)] -= block
                K[np.ix_(cj, ci)] -= block
            else:
                coords = [
                    c
                    for i in el.support
                    for c in range(mapping[i] * d, (mapping[i] + 1) * d)
                ]
                K[np.ix_(coords, coords)] += np.outer(
                    el.force_vector, el.force_vector
                )
    ray = gn.rayleigh
    M = np.diag(np.repeat(masses, d))
    C = ray.alpha * K + ray.beta * M
    nb = nt * d
    return SystemMatrices(
        K=SymMatrix(K),
        C=SymMatrix(C),
        M=SymMatrix(M),
        partition=BlockPartition(range(nb), range(nb, n)),
        dimension=d,
        rayleigh=ray,
        terminal_positions=gn.terminals.copy(),
    )


# ---------------------------------------------------------------------------
# Force balancing and gadget construction
# ---------------------------------------------------------------------------


def _total_torque(positions, forces):
    t = np.atleast_1d(cross(positions, forces))
    return t.reshape(len(positions), -1).sum(axis=0)


def _solve_couple(x1, x2, f_rem, tau, min_force):
    """Forces (g1 at x1, g2 at x2) cancelling net force f_rem and torque tau.

    ``tau`` is the torque of the full system once ``f_rem`` has been
    assigned to x1. The couple part is the minimum-norm solution of
    ``(x1 - x2) x h = -tau``; in three dimensions that requires the joining
    direction to be orthogonal to ``tau``. The null direction (equal and
    opposite forces along the joining line) is used to inflate ``|g|`` up to
    ``min_force`` without disturbing the balance.
    """
    w = x1 - x2
    wnorm2 = float(w @ w)
    if wnorm2 == 0.0:
        return None
    d = len(x1)
    if d == 2:
        h = (-float(tau[0]) / wnorm2) * np.array([-w[1], w[0]])
    else:
        if abs(float(w @ tau)) > 1e-9 * (np.linalg.norm(w) * np.linalg.norm(tau) + 1e-300):
            return None  # torque not cancellable along this joining direction
        h = np.cross(w, tau) / wnorm2
    g1 = f_rem + h
    g2 = -h
    g = np.concatenate([g1, g2])
    if min_force > 0.0 and np.linalg.norm(g) < min_force:
        t = (min_force + np.linalg.norm(h)) / np.sqrt(wnorm2)
        g = np.concatenate([g1 + t * w, g2 - t * w])
    return g


def _draw_point(rng, terminals, epsilon_hull, avoid, clearance, jitter_frac):
    """Random point within ``jitter_frac * epsilon_hull`` of the hull."""
    nt, d = terminals.shape
    weights = rng.dirichlet(np.ones(nt)) if nt > 1 else np.array([1.0])
    base = weights @ terminals
    direction = rng.standard_normal(d)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        return None
    radius = jitter_frac * epsilon_hull * rng.uniform(0.1, 1.0)
    point = base + (radius / norm) * direction
    for q in avoid:
        if np.linalg.norm(point - q) < clearance:
            return None
    return point


def balance_forces(
    terminals,
    f,
    epsilon_hull=0.1,
    forbidden=(),
    seed=0,
    min_clearance=None,
    min_force=0.0,
    candidates=None,
    max_tries=200,
):
    """Complete an arbitrary terminal force system to a balanced one.

    Places two new nodes near the convex hull of the terminals and returns
    ``(x1, x2, g)`` where ``g`` stacks the two balancing forces: the full
    system (``f`` at the terminals, ``g`` at the new nodes) has zero total
    force and torque. With ``candidates`` the two positions are taken as
    given (no placement constraints are applied); otherwise they are drawn
    with the requested hull/forbidden clearances. ``min_force`` requests
    ``|g|`` at least that large, achieved by adding an equal-and-opposite
    force pair along the joining line, which never disturbs the balance.
    """
    terminals = np.atleast_2d(np.asarray(terminals, dtype=float))
    nt, d = terminals.shape
    fmat = np.asarray(f, dtype=float).reshape(nt, d)
    forb = (
        np.asarray(forbidden, dtype=float).reshape(-1, d)
        if len(forbidden)
        else np.zeros((0, d))
    )
    clearance = (
        default_min_clearance(terminals) if min_clearance is None else float(min_clearance)
    )
    f_rem = -fmat.sum(axis=0)
    tau_terminals = _total_torque(terminals, fmat)
    scale = 1.0 + np.abs(fmat).max()

    def couple_at(x1, x2):
        tau = tau_terminals + np.atleast_1d(cross(x1, f_rem))
        return _solve_couple(x1, x2, f_rem, tau, min_force)

    if candidates is not None:
        x1 = np.asarray(candidates[0], dtype=float)
        x2 = np.asarray(candidates[1], dtype=float)
        g = couple_at(x1, x2)
        if g is None:
            raise PlacementFailed(
                "candidate nodes cannot balance the system (coincident, or "
                "joining direction not orthogonal to the residual torque)"
            )
        _assert_balanced(terminals, fmat, x1, x2, g, scale)
        return x1, x2, g

    rng = np.random.default_rng(seed)
    avoid = np.vstack([forb, terminals]) if forb.size else terminals
    for _ in range(max_tries):
        jitter1 = 0.45 if d == 3 else 0.9
        x1 = _draw_point(rng, terminals, epsilon_hull, avoid, clearance, jitter1)
        if x1 is None:
            continue
        if d == 2:
            x2 = _draw_point(rng, terminals, epsilon_hull, avoid, clearance, 0.9)
            if x2 is None:
                continue
        else:
            tau = tau_terminals + cross(x1, f_rem)
            tnorm = np.linalg.norm(tau)
            if tnorm > 1e-12 * scale:
                probe = rng.standard_normal(3)
                u = np.cross(tau, probe)
                if np.linalg.norm(u) < 1e-9 * tnorm:
                    continue
            else:
                u = rng.standard_normal(3)
                if np.linalg.norm(u) == 0.0:
                    continue
            u = u / np.linalg.norm(u)
            step = epsilon_hull * rng.uniform(0.1, 0.5)
            x2 = x1 - step * u
            if any(np.linalg.norm(x2 - q) < clearance for q in avoid):
                continue
        separation = np.linalg.norm(x1 - x2)
        if separation < max(clearance, 0.02 * epsilon_hull):
            continue
        g = couple_at(x1, x2)
        if g is None:
            continue
        _assert_balanced(terminals, fmat, x1, x2, g, scale)
        return x1, x2, g
    raise PlacementFailed(
        f"no admissible balancing pair found in {max_tries} draws "
        f"(epsilon_hull={epsilon_hull}, clearance={clearance:.3e})"
    )


def _assert_balanced(terminals, fmat, x1, x2, g, scale):
    d = terminals.shape[1]
    points = np.vstack([terminals, x1, x2])
    forces = np.vstack([fmat, g[:d], g[d:]])
    residual = balance_residual(points, forces)
    if residual > 1e-10 * scale:
        raise PlacementFailed(
            f"balancing construction left residual {residual:.3e}"
        )


def rank_one_response(f, sigma, rayleigh, lam):
    """Closed-form gadget response at one Laplace point."""
    lam = complex(lam)
    f = np.asarray(f, dtype=float).ravel()
    damp = 1.0 + rayleigh.alpha * lam
    q = sigma + (rayleigh.alpha * sigma + rayleigh.beta) * lam + lam * lam
    return SymMatrix((damp - damp * damp * sigma / q) * np.outer(f, f))


def build_rank_one_gadget(
    terminals,
    f,
    sigma,
    rayleigh,
    epsilon_hull=0.1,
    forbidden=(),
    seed=0,
    min_clearance=None,
    candidates=None,
):
    """Two-internal-node component with response ``w(lambda) f f^T``.

    The internal nodes carry the balancing forces ``g`` of
    :func:`balance_forces` and both receive the mass ``m = |g|^2 / sigma``,
    which pins the gadget's resonances at the roots of
    ``sigma + (alpha*sigma + beta)*lambda + lambda^2`` and makes the static
    response vanish (verified numerically before returning).
    """
    terminals = np.atleast_2d(np.asarray(terminals, dtype=float))
    nt, d = terminals.shape
    f = np.asarray(f, dtype=float).ravel()
    if f.size != nt * d:
        raise ValueError(f"force vector length {f.size}, expected {nt * d}")
    fnorm = np.linalg.norm(f)
    if fnorm == 0.0:
        raise ZeroForce("rank-one gadget needs a nonzero force vector")
    if sigma <= 0.0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    x1, x2, g = balance_forces(
        terminals,
        f,
        epsilon_hull=epsilon_hull,
        forbidden=forbidden,
        seed=seed,
        min_clearance=min_clearance,
        min_force=max(1e-2, 0.1 * fnorm),
        candidates=candidates,
    )
    mass = float(g @ g) / float(sigma)
    nodes = [Node(tuple(p), 0.0, True) for p in terminals]
    nodes.append(Node(tuple(x1), mass, False))
    nodes.append(Node(tuple(x2), mass, False))
    element = IdealElasticElement(
        support=tuple(range(nt + 2)), force_vector=np.concatenate([f, g])
    )
    comp = NetworkComponent(
        kind="rank_one_gadget",
        nodes=tuple(nodes),
        n_terminals=nt,
        elements=(element,),
        rayleigh=rayleigh,
        dimension=d,
    )
    sys = assemble_component(comp)
    w0 = evaluate_response(sys, 0.0, mode="pseudoinverse").W.a
    fscale = 1.0 + fnorm * fnorm
    if np.abs(w0).max() > 1e-10 * fscale:
        raise PlacementFailed(
            f"gadget static response is nonzero ({np.abs(w0).max():.3e})"
        )
    probe = 0.37 + 0.21j  # arbitrary spot check; Re > 0 is never resonant
    direct = evaluate_response(sys, probe).W.a
    closed = rank_one_response(f, sigma, rayleigh, probe).a
    # backward-error scale: a stiff mode (sigma >> |probe|^2) responds with a
    # tiny residual of large cancelling terms, so the comparison is against
    # the pre-cancellation working magnitude, not the residual itself
    raw = abs(1.0 + rayleigh.alpha * probe) * fscale
    if np.abs(direct - closed).max() > 1e-9 * max(np.abs(closed).max(), raw):
        raise PlacementFailed("gadget response deviates from the closed form")
    return comp


def decompose_two_node_element(el, positions, tol=1e-9):
    """Realize a two-node ideal element as a single spring when possible.

    Requires equal and opposite forces collinear with the node axis; then
    ``f f^T`` equals the axial block pattern of a spring with ``k = |f_1|^2``.
    Returns the spring, or None when the element is not representable (the
    zero element is dropped the same way).
    """
    if len(el.support) != 2:
        raise ValueError("decompose_two_node_element expects a two-node element")
    positions = np.asarray(positions, dtype=float)
    d = positions.shape[1]
    f1 = el.force_vector[:d]
    f2 = el.force_vector[d:]
    scale = 1.0 + np.abs(el.force_vector).max()
    if np.abs(el.force_vector).max() == 0.0:
        return None
    if np.linalg.norm(f1 + f2) > tol * scale:
        return None
    axis = positions[0] - positions[1]
    axis_norm = np.linalg.norm(axis)
    if axis_norm == 0.0:
        return None
    n = axis / axis_norm
    if np.linalg.norm(f1 - (f1 @ n) * n) > tol * scale:
        return None
    return Spring(el.support[0], el.support[1], float(f1 @ f1))


# ---------------------------------------------------------------------------
# Full synthesis
# ---------------------------------------------------------------------------


def _rank_one_factors(matrix, positions=None, what="", floor=0.0):
    """Spectral factorization of a PSD block into rank-one force vectors.

    Eigenvalues at or below ``RANK_TOL`` times the largest (or below the
    absolute ``floor``, which callers derive from the magnitudes whose
    cancellation produced the block) are treated as rank deficiency. With
    ``positions`` the factors are projected onto the balanced-force
    subspace: the block's columns are balanced, so its range lies in that
    subspace up to rounding, but eigenvectors of near-threshold eigenvalues
    amplify the rounding and need the projection to be usable as element
    force systems.
    """
    vals, vecs = np.linalg.eigh(matrix)
    top = max(float(vals[-1]), 0.0)
    cutoff = max(RANK_TOL * max(top, 1e-300), floor)
    factors = []
    for k in range(len(vals)):
        if vals[k] > cutoff:
            factors.append(np.sqrt(vals[k]) * vecs[:, k])
    if positions is not None:
        factors = [project_balanced(w, positions) for w in factors]
        for w in factors:
            ok, residual = check_balanced(w, positions, tol=1e-9)
            if not ok:
                raise NotCharacterizable(
                    f"{what} factor is not a balanced force system "
                    f"(residual {residual:.3e})"
                )
    return factors


def synthesize(
    cr,
    epsilon_hull=0.1,
    forbidden=(),
    seed=0,
    min_clearance=None,
    check=True,
    n_check=50,
    tol=1e-9,
):
    """Construct a generalized network realizing an admissible response.

    Raises :class:`NotCharacterizable` when the admissibility check fails
    (including a terminal mass diagonal that is not constant within a
    node's coordinate block, which no isotropic nodal mass can realize) and
    :class:`PlacementFailed` when internal nodes cannot be placed. With
    ``check`` the construction is verified against the closed form at
    ``n_check`` random non-resonant points.
    """
    report = check_canonical(cr, tol=tol)
    if not report.passed:
        raise NotCharacterizable(
            "response violates the admissibility conditions: "
            + ", ".join(report.failing())
        )
    nt, d = cr.n_terminals, cr.dimension
    terminals = cr.terminal_positions
    blocks = cr.Mbb.reshape(nt, d)
    if blocks.size and np.abs(blocks - blocks[:, :1]).max() > 1e-12 * (
        1.0 + np.abs(cr.Mbb).max()
    ):
        raise NotCharacterizable(
            "terminal mass diagonal varies within a node's coordinate block; "
            "nodal masses act isotropically"
        )
    clearance = (
        default_min_clearance(terminals) if min_clearance is None else float(min_clearance)
    )
    rng = np.random.default_rng(seed)
    user_forbidden = (
        np.asarray(forbidden, dtype=float).reshape(-1, d)
        if len(forbidden)
        else np.zeros((0, d))
    )
    components = []

    w0 = cr.static_response()
    # the static slice is a difference of the canonical blocks; spectral
    # content below their joint rounding is cancellation noise
    static_scale = np.abs(cr.A.a).max() + sum(
        np.abs(m.R.a).max() / m.sigma for m in cr.modes
    )
    static_factors = _rank_one_factors(
        w0.a, terminals, what="static slice", floor=1e-12 * static_scale
    )
    if static_factors:
        elements = tuple(
            IdealElasticElement(tuple(range(nt)), w) for w in static_factors
        )
        components.append(
            NetworkComponent(
                kind="ideal_elements",
                nodes=tuple(Node(tuple(p), 0.0, True) for p in terminals),
                n_terminals=nt,
                elements=elements,
                rayleigh=cr.rayleigh,
                dimension=d,
            )
        )

    node_masses = blocks[:, 0] if blocks.size else np.zeros(nt)
    if node_masses.max(initial=0.0) > 0.0:
        components.append(
            NetworkComponent(
                kind="terminal_masses",
                nodes=tuple(
                    Node(tuple(p), float(m), True)
                    for p, m in zip(terminals, node_masses)
                ),
                n_terminals=nt,
                elements=(),
                rayleigh=cr.rayleigh,
                dimension=d,
            )
        )

    placed = user_forbidden.copy()
    for mode in cr.modes:
        for v in _rank_one_factors(mode.R.a / mode.sigma):
            gadget = build_rank_one_gadget(
                terminals,
                v,
                mode.sigma,
                cr.rayleigh,
                epsilon_hull=epsilon_hull,
                forbidden=placed,
                seed=rng,
                min_clearance=clearance,
            )
            components.append(gadget)
            placed = np.vstack([placed, gadget.internal_positions])

    gn = GeneralizedNetwork(
        terminals=terminals.copy(),
        components=tuple(components),
        epsilon_hull=epsilon_hull,
        forbidden=user_forbidden,
        min_clearance=clearance,
    )
    if check:
        worst = verify_synthesis(gn, cr, n_samples=n_check, seed=rng)
        if worst > SYNTH_ROUNDTRIP_TOL:
            raise ReconstructionMismatch(
                f"synthesized response deviates by {worst:.3e} relative "
                f"(threshold {SYNTH_ROUNDTRIP_TOL:.1e})"
            )
    return gn


def verify_synthesis(gn, cr, n_samples=50, seed=0):
    """Max relative deviation between the network and the closed form."""
    rng = np.random.default_rng(seed)
    avoid = cr.resonances() + [0.0 + 0.0j, complex(-cr.rayleigh.beta)]
    if cr.rayleigh.alpha > 0.0:
        avoid.append(complex(-1.0 / cr.rayleigh.alpha))
    worst = 0.0
    for lam in sample_nonresonant(rng, avoid, n_samples):
        reference = evaluate_canonical(cr, lam).W.a
        achieved = evaluate_generalized(gn, lam).W.a
        scale = max(np.abs(reference).max(), 1e-300)
        worst = max(worst, np.abs(achieved - reference).max() / scale)
    return float(worst)


# ---------------------------------------------------------------------------
# JSON form: {terminals, components[{kind, nodes, elements, rayleigh}],
#             epsilon_hull}
# ---------------------------------------------------------------------------


def _element_to_dict(el):
    if isinstance(el, Spring):
        return {"i": el.i, "j": el.j, "k": el.stiffness}
    return {"support": list(el.support), "f": list(el.force_vector)}


def generalized_to_dict(gn):
    return {
        "terminals": [list(p) for p in gn.terminals],
        "components": [
            {
                "kind": comp.kind,
                "nodes": [
                    {
                        "position": list(n.position),
                        "mass": n.mass,
                        "terminal": n.is_terminal,
                    }
                    for n in comp.nodes
                ],
                "elements": [_element_to_dict(el) for el in comp.elements],
                "rayleigh": {
                    "alpha": comp.rayleigh.alpha,
                    "beta": comp.rayleigh.beta,
                },
            }
            for comp in gn.components
        ],
        "epsilon_hull": gn.epsilon_hull,
    }


def generalized_from_dict(obj, path="generalized"):
    jsonio.check_fields(obj, path, ("terminals", "components", "epsilon_hull"))
    terminals = jsonio.as_matrix(obj["terminals"], f"{path}.terminals")
    d = terminals.shape[1]
    if d not in (2, 3):
        raise SchemaError(f"{path}.terminals: expected 2 or 3 coordinates per row")
    components = []
    try:
        for ci, raw in enumerate(jsonio.as_list(obj["components"], f"{path}.components")):
            p = f"{path}.components[{ci}]"
            jsonio.check_fields(raw, p, ("kind", "nodes", "elements", "rayleigh"))
            kind = raw["kind"]
            if kind not in COMPONENT_KINDS:
                raise SchemaError(f"{p}.kind: unknown component kind {kind!r}")
            nodes = []
            for k, nraw in enumerate(jsonio.as_list(raw["nodes"], f"{p}.nodes")):
                np_ = f"{p}.nodes[{k}]"
                jsonio.check_fields(nraw, np_, ("position", "mass", "terminal"))
                nodes.append(
                    Node(
                        tuple(jsonio.as_vector(nraw["position"], f"{np_}.position", d)),
                        jsonio.as_number(nraw["mass"], f"{np_}.mass"),
                        jsonio.as_bool(nraw["terminal"], f"{np_}.terminal"),
                    )
                )
            elements = []
            for k, eraw in enumerate(jsonio.as_list(raw["elements"], f"{p}.elements")):
                ep = f"{p}.elements[{k}]"
                if "support" in eraw:
                    jsonio.check_fields(eraw, ep, ("support", "f"))
                    support = [
                        jsonio.as_int(i, f"{ep}.support[{q}]")
                        for q, i in enumerate(jsonio.as_list(eraw["support"], f"{ep}.support"))
                    ]
                    elements.append(
                        IdealElasticElement(
                            tuple(support), jsonio.as_vector(eraw["f"], f"{ep}.f")
                        )
                    )
                else:
                    jsonio.check_fields(eraw, ep, ("i", "j", "k"))
                    elements.append(
                        Spring(
                            jsonio.as_int(eraw["i"], f"{ep}.i"),
                            jsonio.as_int(eraw["j"], f"{ep}.j"),
                            jsonio.as_number(eraw["k"], f"{ep}.k"),
                        )
                    )
            rp = f"{p}.rayleigh"
            jsonio.check_fields(raw["rayleigh"], rp, ("alpha", "beta"))
            ray = RayleighParams(
                jsonio.as_number(raw["rayleigh"]["alpha"], f"{rp}.alpha"),
                jsonio.as_number(raw["rayleigh"]["beta"], f"{rp}.beta"),
            )
            components.append(
                NetworkComponent(
                    kind=kind,
                    nodes=tuple(nodes),
                    n_terminals=len(terminals),
                    elements=tuple(elements),
                    rayleigh=ray,
                    dimension=d,
                )
            )
        return GeneralizedNetwork(
            terminals=terminals,
            components=tuple(components),
            epsilon_hull=jsonio.as_number(obj["epsilon_hull"], f"{path}.epsilon_hull"),
        )
    except ValueError as exc:
        raise SchemaError(f"{path}: {exc}") from exc
