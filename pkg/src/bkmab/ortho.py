"""Orthonormalization of the augmented basis over boundary quadrature nodes.

The polynomial part is generated by the Arnoldi variant of Gram-Schmidt:
starting from the constant, each candidate is z times the newest orthonormal
member, its antiderivative is produced by cumulative integration along the
contour, and projections use the Green's-formula inner product.  Singular
functions are then projected against everything accepted so far.  Members are
carried as node samples of values and antiderivatives (the antiderivatives
pinned to vanish at z0), together with their values at z0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .basis import BasisFunction, eval_eta, eval_mu
from .quadrature import (NodeSet, cauchy_value, cumulative_antiderivative,
                         gram_matrix, green_inner_product)

__all__ = [
    "OrthonormalizationError",
    "OrthonormalSystem",
    "orthonormalize",
    "gram_residual",
    "evaluate_member",
    "evaluate_member_antiderivative",
    "save_system",
    "load_system",
]

BREAKDOWN_FACTOR = 1e-13


class OrthonormalizationError(RuntimeError):
    """Numerical breakdown: a candidate lost essentially all of its norm."""

    def __init__(self, index: int, ratio: float):
        super().__init__(
            f"candidate {index} retains {ratio:.3e} of its norm after projection; "
            "basis is numerically dependent or precision is exhausted")
        self.index = index
        self.ratio = ratio


@dataclass
class OrthonormalSystem:
    """Orthonormal family over a node set: polynomial stage first, then singular."""

    nodes: NodeSet
    z0: complex
    basis: list
    n_poly: int
    values: np.ndarray          # (M, N) member values at nodes
    antiderivatives: np.ndarray  # (M, N) antiderivative samples, zero at z0
    at_z0: np.ndarray           # (M,) member values at z0
    hessenberg: np.ndarray      # (n_poly, max(n_poly - 1, 0)) recurrence columns
    norm0: float                # norm of the constant function
    sing_coeffs: list = field(default_factory=list)  # (coeffs over members, norm)
    raw_sing_values: np.ndarray | None = None
    raw_sing_antiderivatives: np.ndarray | None = None
    raw_sing_at_z0: np.ndarray | None = None

    def __len__(self) -> int:
        return self.values.shape[0]

    @property
    def n_singular(self) -> int:
        return len(self) - self.n_poly

    def singular_basis(self) -> list:
        return [f for f in self.basis if f.kind != "monomial"]


def orthonormalize(basis: list, nodes: NodeSet, z0: complex | None = None,
                   reorth: int = 1) -> OrthonormalSystem:
    """Orthonormalize the augmented system over the node set.

    The basis must contain at least one monomial.  Monomials enter through the
    Arnoldi recurrence (candidates z * P_k, never raw powers); pole and corner
    functions are projected afterwards, in basis order, against all accepted
    members.  `reorth` extra projection passes are applied to every candidate.
    """
    if z0 is None:
        z0 = nodes.boundary.z0
    singular = [f for f in basis if f.kind != "monomial"]
    n_poly = sum(1 for f in basis if f.kind == "monomial")
    if n_poly < 1:
        raise OrthonormalizationError(0, 0.0)
    M = n_poly + len(singular)
    N = len(nodes)
    values = np.zeros((M, N), dtype=complex)
    antider = np.zeros((M, N), dtype=complex)
    at_z0 = np.zeros(M, dtype=complex)
    H = np.zeros((n_poly, max(n_poly - 1, 0)), dtype=complex)
    # projection rows: row_j = conj(A_j) * w / 2i so that coeffs = rows @ v
    rows = np.zeros((M, N), dtype=complex)

    ones = np.ones(N, dtype=complex)
    const_antider = nodes.z - z0
    norm0_sq = green_inner_product(ones, const_antider, nodes).real
    norm0 = float(np.sqrt(norm0_sq))
    values[0] = 1.0 / norm0
    antider[0] = const_antider / norm0
    at_z0[0] = 1.0 / norm0
    rows[0] = np.conj(antider[0]) * nodes.w / 2j

    for k in range(n_poly - 1):
        v = nodes.z * values[k]
        V = cumulative_antiderivative(v, nodes)
        V -= cauchy_value(V, nodes, z0)
        vz0 = z0 * at_z0[k]
        pre_norm_sq = green_inner_product(v, V, nodes).real
        col = np.zeros(k + 1, dtype=complex)
        for _ in range(reorth + 1):
            c = rows[:k + 1] @ v
            v = v - c @ values[:k + 1]
            V = V - c @ antider[:k + 1]
            vz0 = vz0 - c @ at_z0[:k + 1]
            col += c
        norm_sq = green_inner_product(v, V, nodes).real
        if norm_sq <= (BREAKDOWN_FACTOR**2) * pre_norm_sq:
            raise OrthonormalizationError(k + 1, np.sqrt(max(norm_sq, 0.0) / pre_norm_sq))
        nrm = float(np.sqrt(norm_sq))
        H[:k + 1, k] = col
        H[k + 1, k] = nrm
        values[k + 1] = v / nrm
        antider[k + 1] = V / nrm
        at_z0[k + 1] = vz0 / nrm
        rows[k + 1] = np.conj(antider[k + 1]) * nodes.w / 2j

    # Singular members can lose ten or more digits to the projection (their
    # residual norm decays geometrically in the polynomial count), so the
    # candidate is accumulated in extended precision to keep the stored
    # residual direction meaningful after normalization.
    sing_coeffs = []
    raw_v = np.zeros((len(singular), N), dtype=complex)
    raw_a = np.zeros((len(singular), N), dtype=complex)
    raw_z0 = np.zeros(len(singular), dtype=complex)
    w_ld = nodes.w.astype(np.clongdouble)
    for s, fn in enumerate(singular):
        m = n_poly + s
        raw_v[s] = eval_eta(fn, nodes.z)
        raw_a[s] = eval_mu(fn, nodes.z, z0)
        raw_z0[s] = complex(eval_eta(fn, z0))
        v = raw_v[s].astype(np.clongdouble)
        V = raw_a[s].astype(np.clongdouble)
        vz0 = np.clongdouble(raw_z0[s])
        pre_norm_sq = float((np.dot(v * np.conj(V), w_ld) / 2j).real)
        coeffs = np.zeros(m, dtype=complex)
        for _ in range(reorth + 2):
            c = rows[:m] @ v
            v = v - c @ values[:m]
            V = V - c @ antider[:m]
            vz0 = vz0 - np.dot(c, at_z0[:m])
            coeffs += c.astype(complex)
        norm_sq = float((np.dot(v * np.conj(V), w_ld) / 2j).real)
        if norm_sq <= (BREAKDOWN_FACTOR**2) * pre_norm_sq:
            raise OrthonormalizationError(m, np.sqrt(max(norm_sq, 0.0) / pre_norm_sq))
        nrm = float(np.sqrt(norm_sq))
        values[m] = (v / nrm).astype(complex)
        antider[m] = (V / nrm).astype(complex)
        at_z0[m] = complex(vz0) / nrm
        rows[m] = np.conj(antider[m]) * nodes.w / 2j
        sing_coeffs.append((coeffs, nrm))

    return OrthonormalSystem(
        nodes=nodes, z0=complex(z0), basis=list(basis), n_poly=n_poly,
        values=values, antiderivatives=antider, at_z0=at_z0, hessenberg=H,
        norm0=norm0, sing_coeffs=sing_coeffs,
        raw_sing_values=raw_v, raw_sing_antiderivatives=raw_a, raw_sing_at_z0=raw_z0)


def gram_residual(system: OrthonormalSystem, nodes: NodeSet | None = None) -> float:
    """max_ij |<P_i, P_j> - delta_ij| recomputed from the node samples."""
    nodes = nodes or system.nodes
    G = gram_matrix(system.values, system.antiderivatives, nodes)
    return float(np.max(np.abs(G - np.eye(len(system)))))


def evaluate_member(system: OrthonormalSystem, j: int, z) -> np.ndarray:
    """Member values at arbitrary points via the Hessenberg recurrence.

    Polynomial members are evaluated by running the recurrence from the
    constant member; singular members combine a direct eta evaluation with the
    recorded projection coefficients.
    """
    z = np.asarray(z, dtype=complex)
    vals = _member_values(system, j, z)
    return vals[j]


def _member_values(system: OrthonormalSystem, j_max: int, z: np.ndarray) -> np.ndarray:
    shape = (j_max + 1,) + z.shape
    out = np.zeros(shape, dtype=complex)
    out[0] = 1.0 / system.norm0
    H = system.hessenberg
    for k in range(min(j_max, system.n_poly - 1)):
        v = z * out[k] - np.tensordot(H[:k + 1, k], out[:k + 1], axes=(0, 0))
        out[k + 1] = v / H[k + 1, k].real
    singular = system.singular_basis()
    for s in range(len(singular)):
        m = system.n_poly + s
        if m > j_max:
            break
        coeffs, nrm = system.sing_coeffs[s]
        v = eval_eta(singular[s], z) - np.tensordot(coeffs, out[:m], axes=(0, 0))
        out[m] = v / nrm
    return out


def evaluate_member_antiderivative(system: OrthonormalSystem, j: int, z,
                                   min_distance: float | None = None) -> np.ndarray:
    """Antiderivative of a member at interior points, vanishing at z0.

    Uses the Cauchy integral of the stored boundary antiderivative samples, so
    points must stay away from the boundary (roughly one panel length).
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    out = np.array([cauchy_value(system.antiderivatives[j], system.nodes, zz)
                    for zz in z])
    return out if out.size > 1 else out[0]


# ---------------------------------------------------------------------------
# plain-text serialization (coefficient data only; samples are replayable)
# ---------------------------------------------------------------------------

def _write_complex_block(fh, name, array):
    arr = np.atleast_2d(np.asarray(array, dtype=complex))
    fh.write(f"[{name}] {arr.shape[0]} {arr.shape[1]}\n")
    for row in arr:
        fh.write(" ".join(f"{c.real!r} {c.imag!r}" for c in row) + "\n")


def _read_complex_block(lines, idx, name):
    header = lines[idx].split()
    assert header[0] == f"[{name}]", f"expected block {name}, got {lines[idx]}"
    rows, cols = int(header[1]), int(header[2])
    data = np.zeros((rows, cols), dtype=complex)
    for r in range(rows):
        parts = [float(x) for x in lines[idx + 1 + r].split()]
        data[r] = np.array(parts[0::2]) + 1j * np.array(parts[1::2])
    return data, idx + 1 + rows


def save_system(system: OrthonormalSystem, path: str):
    """Dump recurrence and projection data as documented plain text."""
    with open(path, "w") as fh:
        fh.write("bkmab-orthonormal-system 1\n")
        fh.write(f"n_poly {system.n_poly}\n")
        fh.write(f"n_singular {system.n_singular}\n")
        fh.write(f"z0 {system.z0.real!r} {system.z0.imag!r}\n")
        fh.write(f"norm0 {system.norm0!r}\n")
        _write_complex_block(fh, "hessenberg", system.hessenberg)
        _write_complex_block(fh, "at_z0", system.at_z0[None, :])
        for s, (coeffs, nrm) in enumerate(system.sing_coeffs):
            fh.write(f"singular {s} norm {nrm!r}\n")
            _write_complex_block(fh, f"coeffs{s}", coeffs[None, :])


def load_system(path: str, basis: list, nodes: NodeSet) -> OrthonormalSystem:
    """Rebuild a system from a dump; node samples are replayed deterministically."""
    with open(path) as fh:
        lines = [ln.rstrip("\n") for ln in fh]
    assert lines[0].startswith("bkmab-orthonormal-system")
    n_poly = int(lines[1].split()[1])
    n_sing = int(lines[2].split()[1])
    z0 = complex(float(lines[3].split()[1]), float(lines[3].split()[2]))
    norm0 = float(lines[4].split()[1])
    H, idx = _read_complex_block(lines, 5, "hessenberg")
    atz, idx = _read_complex_block(lines, idx, "at_z0")
    sing_coeffs = []
    for s in range(n_sing):
        nrm = float(lines[idx].split()[3])
        coeffs, idx = _read_complex_block(lines, idx + 1, f"coeffs{s}")
        sing_coeffs.append((coeffs[0], nrm))

    M = n_poly + n_sing
    N = len(nodes)
    values = np.zeros((M, N), dtype=complex)
    antider = np.zeros((M, N), dtype=complex)
    values[0] = 1.0 / norm0
    antider[0] = (nodes.z - z0) / norm0
    for k in range(n_poly - 1):
        v = nodes.z * values[k] - H[:k + 1, k] @ values[:k + 1]
        values[k + 1] = v / H[k + 1, k].real
        V = cumulative_antiderivative(values[k + 1], nodes)
        antider[k + 1] = V - cauchy_value(V, nodes, z0)
    singular = [f for f in basis if f.kind != "monomial"]
    raw_v = np.array([eval_eta(f, nodes.z) for f in singular]) if singular else None
    raw_a = np.array([eval_mu(f, nodes.z, z0) for f in singular]) if singular else None
    raw_z0 = np.array([complex(eval_eta(f, z0)) for f in singular]) if singular else None
    for s in range(n_sing):
        m = n_poly + s
        coeffs, nrm = sing_coeffs[s]
        values[m] = (raw_v[s] - coeffs @ values[:m]) / nrm
        antider[m] = (raw_a[s] - coeffs @ antider[:m]) / nrm
    return OrthonormalSystem(
        nodes=nodes, z0=z0, basis=list(basis), n_poly=n_poly, values=values,
        antiderivatives=antider, at_z0=atz[0], hessenberg=H, norm0=norm0,
        sing_coeffs=sing_coeffs, raw_sing_values=raw_v,
        raw_sing_antiderivatives=raw_a, raw_sing_at_z0=raw_z0)
