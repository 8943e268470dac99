"""Ghost-vertex random-cluster (FK) representation of the Potts model.

The base graph gains a ghost vertex joined to every real vertex. Real
edges open with probability 1 - exp(-J_e), ghost edges with
1 - exp(-h_v). Bond configurations are weighted by

    prod_e p_e^{w_e} (1-p_e)^{1-w_e} * q^{k(w)}

where k counts all open clusters of the augmented graph, including the
ghost's. Colouring the ghost's cluster 0 and every other cluster with an
independent uniform spin recovers the Potts measure exactly; that
coupling, the conditional expectations it induces, and the connectivity
event used by the disjoint-support inequality all live here.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import expm1, fsum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .model import (
    EnumerationTooLarge,
    ModelError,
    PottsModel,
    SpinFunction,
    check_factors,
    check_state_cap,
    default_cap,
    region_indices,
)

_P_MAX = float(np.nextafter(1.0, 0.0))  # keep p < 1 even for huge J, h


@dataclass(frozen=True)
class AugmentedGraph:
    """Base model plus ghost vertex, with open probabilities on E+.

    `edge_index` lists E+ as index pairs (real edges first, then ghost
    edges in vertex order); the ghost carries index n_vertices.
    """

    base: PottsModel
    ghost: str
    edge_index: tuple[tuple[int, int], ...]
    p: tuple[float, ...]

    @property
    def n_vertices(self) -> int:
        return self.base.n_vertices

    @property
    def ghost_index(self) -> int:
        return self.base.n_vertices

    @property
    def n_bonds(self) -> int:
        return len(self.edge_index)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        names = self.base.vertices + (self.ghost,)
        return tuple((names[a], names[b]) for a, b in self.edge_index)


def augment(model: PottsModel) -> AugmentedGraph:
    """Attach the ghost vertex; every vertex gets a ghost edge (p=0 if h=0)."""
    ghost = "g"
    while ghost in model.vertices:
        ghost += "_"
    index = {v: i for i, v in enumerate(model.vertices)}
    n = model.n_vertices
    pairs = [(index[u], index[v]) for u, v in model.edges]
    pairs += [(n, i) for i in range(n)]
    p = [min(-expm1(-J), _P_MAX) for J in model.J]
    p += [min(-expm1(-h), _P_MAX) for h in model.h]
    return AugmentedGraph(model, ghost, tuple(pairs), tuple(p))


@dataclass(frozen=True)
class ClusterPartition:
    """Open clusters of a bond configuration, ghost cluster singled out."""

    ghost_cluster: tuple[str, ...]  # vertices joined to the ghost (ghost omitted)
    other_clusters: tuple[tuple[str, ...], ...]
    k: int  # number of non-ghost clusters


def _check_bond_config(aug: AugmentedGraph, omega: Sequence[int]) -> list[int]:
    bits = [int(b) for b in omega]
    if len(bits) != aug.n_bonds or any(b not in (0, 1) for b in bits):
        raise ModelError(
            f"bond configuration must be {aug.n_bonds} bits over E+, got {omega!r}"
        )
    return bits


def omega_from_code(aug: AugmentedGraph, code: int) -> np.ndarray:
    """Bond configuration from an integer; bit i of `code` is edge i of E+."""
    return np.array([(code >> i) & 1 for i in range(aug.n_bonds)], dtype=np.uint8)


def _labels_from_bits(aug: AugmentedGraph, bits: Sequence[int]) -> list[int]:
    """Connected-component label per node, canonicalized to min node index."""
    n1 = aug.n_vertices + 1
    parent = list(range(n1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for (a, b), bit in zip(aug.edge_index, bits):
        if bit:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
    return [find(x) for x in range(n1)]


def clusters(aug: AugmentedGraph, omega: Sequence[int]) -> ClusterPartition:
    """Open clusters of omega; isolated vertices are singletons."""
    bits = _check_bond_config(aug, omega)
    labels = _labels_from_bits(aug, bits)
    ghost_label = labels[aug.ghost_index]
    groups: dict[int, list[str]] = {}
    for i, v in enumerate(aug.base.vertices):
        groups.setdefault(labels[i], []).append(v)
    ghost_cluster = tuple(groups.pop(ghost_label, ()))
    others = tuple(tuple(groups[key]) for key in sorted(groups))
    return ClusterPartition(ghost_cluster, others, len(others))


# ---------------------------------------------------------------------------
# exact random-cluster measure
# ---------------------------------------------------------------------------


def check_bond_cap(aug: AugmentedGraph, cap: int | None = None) -> int:
    cap = default_cap() if cap is None else cap
    if 2**aug.n_bonds > cap:
        raise EnumerationTooLarge(
            f"2^{aug.n_bonds} bond configurations exceed cap {cap}"
        )
    return cap


def iter_bond_configs(
    aug: AugmentedGraph, cap: int | None = None
) -> Iterator[tuple[int, list[int], list[int]]]:
    """Yield (code, bits, labels) for every bond configuration of E+."""
    check_bond_cap(aug, cap)
    m = aug.n_bonds
    for code in range(2**m):
        bits = [(code >> i) & 1 for i in range(m)]
        yield code, bits, _labels_from_bits(aug, bits)


def rc_weight_from_labels(
    aug: AugmentedGraph, bits: Sequence[int], labels: Sequence[int]
) -> float:
    k_all = len(set(labels))
    w = float(aug.base.q) ** k_all
    for p, bit in zip(aug.p, bits):
        w *= p if bit else 1.0 - p
    return w


def rc_weight(aug: AugmentedGraph, omega: Sequence[int]) -> float:
    """Unnormalized weight prod p^w (1-p)^(1-w) * q^k, k incl. ghost cluster."""
    bits = _check_bond_config(aug, omega)
    return rc_weight_from_labels(aug, bits, _labels_from_bits(aug, bits))


def rc_partition(aug: AugmentedGraph, cap: int | None = None) -> float:
    return fsum(
        rc_weight_from_labels(aug, bits, labels)
        for _, bits, labels in iter_bond_configs(aug, cap)
    )


def rc_probability(
    aug: AugmentedGraph, omega: Sequence[int], cap: int | None = None
) -> float:
    """phi(omega), normalized over all of Omega+."""
    return rc_weight(aug, omega) / rc_partition(aug, cap)


def rc_distribution(aug: AugmentedGraph, cap: int | None = None) -> np.ndarray:
    """phi over all bond configurations, indexed by code (bit i = edge i)."""
    w = np.array(
        [
            rc_weight_from_labels(aug, bits, labels)
            for _, bits, labels in iter_bond_configs(aug, cap)
        ]
    )
    return w / fsum(w.tolist())


# ---------------------------------------------------------------------------
# cluster-spin coupling
# ---------------------------------------------------------------------------


def sample_spins(
    aug: AugmentedGraph, omega: Sequence[int], rng: np.random.Generator
) -> np.ndarray:
    """Colour clusters: ghost's cluster gets 0, the rest iid uniform spins."""
    bits = _check_bond_config(aug, omega)
    labels = _labels_from_bits(aug, bits)
    ghost_label = labels[aug.ghost_index]
    q, n = aug.base.q, aug.n_vertices
    colour: dict[int, int] = {ghost_label: 0}
    spins = np.empty(n, dtype=np.int64)
    for v in range(n):
        lab = labels[v]
        if lab not in colour:
            colour[lab] = int(rng.integers(q))
        spins[v] = colour[lab]
    return spins


def coupled_spin_marginal(aug: AugmentedGraph, cap: int | None = None) -> np.ndarray:
    """Spin law sum_w phi(w) P(sigma|w), over lexicographic spin states.

    Must agree with the Potts measure; the acceptance suite checks total
    variation against exact enumeration.
    """
    n, q = aug.n_vertices, aug.base.q
    check_state_cap(aug.base, cap)
    place = q ** np.arange(n - 1, -1, -1, dtype=np.int64) if n else np.zeros(0, int)
    marginal = np.zeros(q**n)
    total = 0.0
    for _, bits, labels in iter_bond_configs(aug, cap):
        w = rc_weight_from_labels(aug, bits, labels)
        total += w
        ghost_label = labels[aug.ghost_index]
        strides: dict[int, int] = {}
        for v in range(n):
            lab = labels[v]
            if lab != ghost_label:
                strides[lab] = strides.get(lab, 0) + int(place[v])
        flat = np.zeros(1, dtype=np.int64)
        for s in strides.values():
            flat = (flat[:, None] + s * np.arange(q, dtype=np.int64)[None, :]).ravel()
        np.add.at(marginal, flat, w / q ** len(strides))
    return marginal / total


# ---------------------------------------------------------------------------
# conditional expectations given the bond configuration
# ---------------------------------------------------------------------------


def _power_table(f: SpinFunction, max_m: int) -> list[list[complex]]:
    """table[x][m] = f(x)**m with 0**0 == 1."""
    out = []
    for x in range(f.q):
        row = [1 + 0j]
        for _ in range(max_m):
            row.append(row[-1] * f.values[x])
        out.append(row)
    return out


def _prepare_condexp(
    base: PottsModel, factors: Sequence[tuple[SpinFunction, Iterable[str]]]
) -> list[tuple[list[list[complex]], tuple[int, ...]]]:
    prepared = check_factors(base, factors)
    return [(_power_table(f, len(idx)), idx) for f, idx in prepared]


def _condexp_from_labels(
    prepared: list[tuple[list[list[complex]], tuple[int, ...]]],
    labels: Sequence[int],
    ghost_label: int,
    q: int,
    include_ghost: bool = True,
) -> complex:
    """E( prod_i f_i(sigma)^{R_i} | omega ) from cluster labels.

    Ghost cluster contributes prod_i f_i(0)^{|R_i ∩ A_g|}; every other
    cluster contributes the uniform mixed moment (1/q) sum_x prod_i
    f_i(x)^{m_i}, exponents m_i = |R_i ∩ cluster|.
    """
    counts: dict[int, list[int]] = {}
    for i, (_, idx) in enumerate(prepared):
        for v in idx:
            lab = labels[v]
            if lab not in counts:
                counts[lab] = [0] * len(prepared)
            counts[lab][i] += 1
    value = 1 + 0j
    for lab, ms in counts.items():
        if lab == ghost_label:
            if not include_ghost:
                continue
            for i, (pow_table, _) in enumerate(prepared):
                value *= pow_table[0][ms[i]]
        else:
            terms = []
            for x in range(q):
                t = 1 + 0j
                for i, (pow_table, _) in enumerate(prepared):
                    t *= pow_table[x][ms[i]]
                terms.append(t)
            value *= complex(
                fsum(t.real for t in terms) / q, fsum(t.imag for t in terms) / q
            )
    return value


def conditional_expectation(
    aug: AugmentedGraph,
    omega: Sequence[int],
    factors: Sequence[tuple[SpinFunction, Iterable[str]]],
) -> complex:
    """E( prod_i f_i(sigma)^{R_i} | omega ) under the cluster colouring."""
    bits = _check_bond_config(aug, omega)
    labels = _labels_from_bits(aug, bits)
    prepared = _prepare_condexp(aug.base, factors)
    return _condexp_from_labels(
        prepared, labels, labels[aug.ghost_index], aug.base.q
    )


def cluster_moment_product(
    aug: AugmentedGraph,
    omega: Sequence[int],
    f: SpinFunction,
    region: Iterable[str],
    include_ghost: bool = True,
) -> complex:
    """Single-factor conditional expectation.

    With include_ghost=False the f(0)^{|R ∩ A_g|} factor is dropped; that
    is the second factor of the disjoint-support factorization, where the
    connectivity indicator makes the ghost term moot.
    """
    bits = _check_bond_config(aug, omega)
    labels = _labels_from_bits(aug, bits)
    prepared = _prepare_condexp(aug.base, [(f, region)])
    return _condexp_from_labels(
        prepared, labels, labels[aug.ghost_index], aug.base.q, include_ghost
    )


def event_Z(
    aug: AugmentedGraph,
    omega: Sequence[int],
    R: Iterable[str],
    S: Iterable[str],
) -> int:
    """1 iff no open path joins S to R or to the ghost."""
    bits = _check_bond_config(aug, omega)
    labels = _labels_from_bits(aug, bits)
    r_idx = region_indices(aug.base, R)
    s_idx = region_indices(aug.base, S)
    blocked = {labels[v] for v in r_idx}
    blocked.add(labels[aug.ghost_index])
    return 0 if any(labels[v] in blocked for v in s_idx) else 1


def rc_expectation(
    aug: AugmentedGraph,
    factors: Sequence[tuple[SpinFunction, Iterable[str]]],
    cap: int | None = None,
) -> complex:
    """phi-average of the conditional expectation (the tower identity LHS)."""
    prepared = _prepare_condexp(aug.base, factors)
    q = aug.base.q
    ghost = aug.ghost_index
    num_re, num_im, den = [], [], []
    for _, bits, labels in iter_bond_configs(aug, cap):
        w = rc_weight_from_labels(aug, bits, labels)
        g = _condexp_from_labels(prepared, labels, labels[ghost], q)
        num_re.append(w * g.real)
        num_im.append(w * g.imag)
        den.append(w)
    z = fsum(den)
    return complex(fsum(num_re) / z, fsum(num_im) / z)
