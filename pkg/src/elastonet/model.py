"""Geometric mass-spring-damper network model and system-matrix assembly.

A network lives in d = 2 or 3 dimensions. Every node carries a position, a
nonnegative mass and a terminal flag; springs connect distinct nodes with a
positive axial stiffness. Damping is proportional: the damping matrix is
always ``C = alpha*K + beta*M`` with fixed nonnegative constants, which
models a dashpot in parallel with every spring (constant ``alpha*k``) plus a
viscous cavity around every mass (constant ``beta*m``).

Degrees of freedom are ordered node-major, coordinate-minor: node 0 owns
rows/columns 0..d-1, node 1 owns d..2d-1, and so on. Every Schur partition
and residue reshaping in the package relies on this single convention.
"""

from dataclasses import dataclass, field

import numpy as np

from . import jsonio
from .errors import DegenerateSpring, DimensionMismatch, GenerationFailed, SchemaError
from .linalg import BlockPartition, SymMatrix

# Minimum pairwise node separation produced by the random generator.
MIN_NODE_SEPARATION = 1e-3


@dataclass(frozen=True)
class Node:
    """A point mass (possibly zero) at a fixed position."""

    position: tuple
    mass: float = 0.0
    is_terminal: bool = False

    def __post_init__(self):
        pos = tuple(float(x) for x in self.position)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "mass", float(self.mass))
        object.__setattr__(self, "is_terminal", bool(self.is_terminal))
        if not all(np.isfinite(pos)):
            raise ValueError(f"non-finite node position {pos}")
        if not np.isfinite(self.mass) or self.mass < 0:
            raise ValueError(f"node mass must be finite and >= 0, got {self.mass}")


@dataclass(frozen=True)
class Spring:
    """Linear spring between nodes ``i`` and ``j`` with stiffness ``k > 0``."""

    i: int
    j: int
    stiffness: float

    def __post_init__(self):
        object.__setattr__(self, "stiffness", float(self.stiffness))
        if self.i == self.j:
            raise ValueError(f"spring endpoints coincide (node {self.i})")
        if not np.isfinite(self.stiffness) or self.stiffness <= 0:
            raise ValueError(f"spring stiffness must be > 0, got {self.stiffness}")


@dataclass(frozen=True)
class RayleighParams:
    """Proportional-damping constants: C = alpha*K + beta*M."""

    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        if self.alpha < 0 or self.beta < 0 or not np.isfinite(self.alpha + self.beta):
            raise ValueError(f"alpha, beta must be finite and >= 0, got {self}")


@dataclass(frozen=True)
class ElastodynamicNetwork:
    """A damped mass-spring network with at least one terminal node.

    Duplicate springs on the same unordered node pair are merged at
    construction by summing their stiffnesses (parallel springs add).
    """

    dimension: int
    nodes: tuple
    springs: tuple
    rayleigh: RayleighParams = field(default_factory=RayleighParams)

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError(f"dimension must be 2 or 3, got {self.dimension}")
        nodes = tuple(self.nodes)
        if not nodes:
            raise ValueError("network has no nodes")
        for k, node in enumerate(nodes):
            if len(node.position) != self.dimension:
                raise DimensionMismatch(
                    f"node {k} position has {len(node.position)} coordinates, "
                    f"network dimension is {self.dimension}"
                )
        if not any(n.is_terminal for n in nodes):
            raise ValueError("network needs at least one terminal node")
        merged = {}
        for s in self.springs:
            if not (0 <= s.i < len(nodes)) or not (0 <= s.j < len(nodes)):
                raise ValueError(f"spring ({s.i}, {s.j}) references a missing node")
            key = (min(s.i, s.j), max(s.i, s.j))
            merged[key] = merged.get(key, 0.0) + s.stiffness
        springs = tuple(Spring(i, j, k) for (i, j), k in merged.items())
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "springs", springs)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def terminal_indices(self):
        return tuple(k for k, n in enumerate(self.nodes) if n.is_terminal)

    @property
    def interior_indices(self):
        return tuple(k for k, n in enumerate(self.nodes) if not n.is_terminal)

    def positions(self):
        return np.array([n.position for n in self.nodes], dtype=float)


@dataclass(frozen=True)
class SystemMatrices:
    """Assembled stiffness/damping/mass matrices plus bookkeeping.

    ``partition`` splits the coordinate range into terminal (boundary) and
    interior coordinates, d consecutive entries per node. The Rayleigh
    constants, spatial dimension and terminal positions ride along because
    the pole-residue extraction needs all three and receives only this
    object.
    """

    K: SymMatrix
    C: SymMatrix
    M: SymMatrix
    partition: BlockPartition
    dimension: int
    rayleigh: RayleighParams
    terminal_positions: np.ndarray

    @property
    def order(self):
        return self.K.order

    def mass_vector(self):
        return np.diag(self.M.a).copy()


def _coords(node_index, d):
    return range(node_index * d, (node_index + 1) * d)


def spring_direction(positions, i, j):
    """Unit vector along ``x_i - x_j``; raises for coincident endpoints."""
    dx = positions[i] - positions[j]
    scale = 1.0 + np.abs(positions).max()
    length = np.linalg.norm(dx)
    if length <= 1e-12 * scale:
        raise DegenerateSpring(
            f"spring ({i}, {j}) endpoints coincide (separation {length:.3e})"
        )
    return dx / length


def assemble(net):
    """Assemble the system matrices of a network.

    The stiffness matrix is the sum over springs of the rank-one axial block
    pattern: with ``n`` the unit vector along the spring and nodes ``i, j``,
    the spring adds ``k * n n^T`` on the (i,i) and (j,j) diagonal blocks and
    ``-k * n n^T`` on the off-diagonal ones. The mass matrix repeats each
    nodal mass d times on the diagonal, and ``C = alpha*K + beta*M`` exactly.
    """
    d = net.dimension
    positions = net.positions()
    # reject degenerate springs before any matrix is formed
    directions = {
        (s.i, s.j): spring_direction(positions, s.i, s.j) for s in net.springs
    }
    n = net.n_nodes * d
    K = np.zeros((n, n))
    for s in net.springs:
        nvec = directions[(s.i, s.j)]
        block = s.stiffness * np.outer(nvec, nvec)
        ii = np.ix_(_coords(s.i, d), _coords(s.i, d))
        jj = np.ix_(_coords(s.j, d), _coords(s.j, d))
        ij = np.ix_(_coords(s.i, d), _coords(s.j, d))
        ji = np.ix_(_coords(s.j, d), _coords(s.i, d))
        K[ii] += block
        K[jj] += block
        K[ij] -= block
        K[ji] -= block
    masses = np.repeat([node.mass for node in net.nodes], d)
    M = np.diag(masses)
    C = net.rayleigh.alpha * K + net.rayleigh.beta * M
    boundary = [c for k in net.terminal_indices for c in _coords(k, d)]
    interior = [c for k in net.interior_indices for c in _coords(k, d)]
    return SystemMatrices(
        K=SymMatrix(K),
        C=SymMatrix(C),
        M=SymMatrix(M),
        partition=BlockPartition(boundary, interior),
        dimension=d,
        rayleigh=net.rayleigh,
        terminal_positions=positions[list(net.terminal_indices)],
    )


def random_network(
    seed,
    d,
    n_terminals,
    n_interior,
    mass_fraction,
    alpha=None,
    beta=None,
    allow_empty=False,
    extra_edge_prob=0.3,
):
    """Deterministic random test network.

    Positions are drawn in the unit box with pairwise separation at least
    ``MIN_NODE_SEPARATION``; the spring graph is a random spanning tree plus
    random extra edges, so it is always connected. Exactly
    ``round(mass_fraction * n_interior)`` interior nodes receive a positive
    mass; each terminal is massive with probability one half. When ``alpha``
    or ``beta`` is None it is drawn uniformly from [0, 2].

    A single-node request cannot carry any spring; it raises
    :class:`GenerationFailed` unless ``allow_empty`` is set.
    """
    if d not in (2, 3):
        raise ValueError(f"dimension must be 2 or 3, got {d}")
    if n_terminals < 1:
        raise ValueError("need at least one terminal node")
    if n_interior < 0:
        raise ValueError("n_interior must be >= 0")
    if not 0.0 <= mass_fraction <= 1.0:
        raise ValueError(f"mass_fraction must lie in [0, 1], got {mass_fraction}")
    rng = np.random.default_rng(seed)
    n_total = n_terminals + n_interior

    positions = []
    for _ in range(n_total):
        for _attempt in range(200):
            cand = rng.uniform(0.0, 1.0, size=d)
            if all(
                np.linalg.norm(cand - p) >= MIN_NODE_SEPARATION for p in positions
            ):
                positions.append(cand)
                break
        else:
            raise GenerationFailed(
                f"could not place {n_total} nodes at separation "
                f">= {MIN_NODE_SEPARATION}"
            )

    springs = []
    if n_total >= 2:
        order = rng.permutation(n_total)
        for k in range(1, n_total):
            a = int(order[k])
            b = int(order[rng.integers(0, k)])
            springs.append(Spring(a, b, rng.uniform(0.5, 2.0)))
        tree_pairs = {(min(s.i, s.j), max(s.i, s.j)) for s in springs}
        for a in range(n_total):
            for b in range(a + 1, n_total):
                if (a, b) not in tree_pairs and rng.random() < extra_edge_prob:
                    springs.append(Spring(a, b, rng.uniform(0.5, 2.0)))
    elif not allow_empty:
        raise GenerationFailed(
            "a single-node network has no springs; pass allow_empty=True "
            "to build it anyway"
        )

    n_massive = int(round(mass_fraction * n_interior))
    massive = set(
        int(i) for i in rng.choice(n_interior, size=n_massive, replace=False)
    ) if n_interior else set()
    nodes = []
    for k in range(n_terminals):
        mass = rng.uniform(0.5, 2.0) if rng.random() < 0.5 else 0.0
        nodes.append(Node(tuple(positions[k]), mass, True))
    for k in range(n_interior):
        mass = rng.uniform(0.5, 2.0) if k in massive else 0.0
        nodes.append(Node(tuple(positions[n_terminals + k]), mass, False))

    ray = RayleighParams(
        alpha if alpha is not None else rng.uniform(0.0, 2.0),
        beta if beta is not None else rng.uniform(0.0, 2.0),
    )
    return ElastodynamicNetwork(d, tuple(nodes), tuple(springs), ray)


# ---------------------------------------------------------------------------
# JSON form: {dimension, nodes[{position, mass, terminal}],
#             springs[{i, j, k}], rayleigh{alpha, beta}}
# ---------------------------------------------------------------------------


def network_to_dict(net):
    return {
        "dimension": net.dimension,
        "nodes": [
            {
                "position": list(n.position),
                "mass": n.mass,
                "terminal": n.is_terminal,
            }
            for n in net.nodes
        ],
        "springs": [{"i": s.i, "j": s.j, "k": s.stiffness} for s in net.springs],
        "rayleigh": {"alpha": net.rayleigh.alpha, "beta": net.rayleigh.beta},
    }


def network_from_dict(obj, path="network"):
    jsonio.check_fields(obj, path, ("dimension", "nodes", "springs", "rayleigh"))
    d = jsonio.as_int(obj["dimension"], f"{path}.dimension")
    if d not in (2, 3):
        raise SchemaError(f"{path}.dimension: must be 2 or 3")
    nodes = []
    for k, raw in enumerate(jsonio.as_list(obj["nodes"], f"{path}.nodes")):
        p = f"{path}.nodes[{k}]"
        jsonio.check_fields(raw, p, ("position", "mass", "terminal"))
        try:
            nodes.append(
                Node(
                    tuple(jsonio.as_vector(raw["position"], f"{p}.position", d)),
                    jsonio.as_number(raw["mass"], f"{p}.mass"),
                    jsonio.as_bool(raw["terminal"], f"{p}.terminal"),
                )
            )
        except ValueError as exc:
            raise SchemaError(f"{p}: {exc}") from exc
    springs = []
    for k, raw in enumerate(jsonio.as_list(obj["springs"], f"{path}.springs")):
        p = f"{path}.springs[{k}]"
        jsonio.check_fields(raw, p, ("i", "j", "k"))
        try:
            springs.append(
                Spring(
                    jsonio.as_int(raw["i"], f"{p}.i"),
                    jsonio.as_int(raw["j"], f"{p}.j"),
                    jsonio.as_number(raw["k"], f"{p}.k"),
                )
            )
        except ValueError as exc:
            raise SchemaError(f"{p}: {exc}") from exc
    rp = f"{path}.rayleigh"
    jsonio.check_fields(obj["rayleigh"], rp, ("alpha", "beta"))
    try:
        ray = RayleighParams(
            jsonio.as_number(obj["rayleigh"]["alpha"], f"{rp}.alpha"),
            jsonio.as_number(obj["rayleigh"]["beta"], f"{rp}.beta"),
        )
    except ValueError as exc:
        raise SchemaError(f"{rp}: {exc}") from exc
    try:
        return ElastodynamicNetwork(d, tuple(nodes), tuple(springs), ray)
    except (ValueError, DimensionMismatch) as exc:
        raise SchemaError(f"{path}: {exc}") from exc
