"""Ground truth from dense linear algebra on an actual graph.

At a base vertex x we build the distance matrices, the primitive and dual
idempotents, split the standard module into irreducible T-modules, and check
the closed-form blueprints and multiplicity statements against what we find.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .arrays import IntersectionArray, p22_2
from .errors import (
    AuditFailure,
    BlueprintMismatch,
    DecompositionResidual,
    LocalOrderingViolation,
    ProjectorResidual,
)
from .graphs import GraphInstance, distance_matrices, verify_drg
from .modules import (
    LocalEigenvalueCase,
    ModuleBlueprint,
    blueprint_endpoint0,
    blueprint_endpoint1,
    blueprint_endpoint2,
    classify_eta,
    tilde_bounds,
)
from .polyfams import g_family, theta_parameter
from .poly import frac_str
from .spectra import Spectrum, spectrum

OPERATOR_TOL = 1e-9
RANK_TOL = 1e-8
CLOSURE_TOL = 1e-9
GROUP_TOL = 1e-6
SNAP_TOL = 1e-8
BLUEPRINT_RTOL = 1e-8
DEFAULT_SEED = 42


def snap(x: float):
    """Nearest integer (as a Fraction) when within SNAP_TOL, else the float itself."""
    r = round(x)
    return Fraction(int(r)) if abs(x - r) <= SNAP_TOL else float(x)


def fmt_res(x: float) -> str:
    return f"{x:.3e}"


# ---------------------------------------------------------------------------
# operators


@dataclass
class OperatorSet:
    graph: GraphInstance
    x: int
    arr: IntersectionArray
    spec: Spectrum
    A: List[np.ndarray]                 # distance matrices A_0..A_D
    levels: np.ndarray                  # levels[y] = distance from x to y
    eigvecs: List[np.ndarray]           # orthonormal columns spanning E_iV
    residuals: Dict[str, float] = field(default_factory=dict)

    @property
    def D(self) -> int:
        return self.arr.D

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def adjacency(self) -> np.ndarray:
        return self.A[1]

    def E(self, i: int) -> np.ndarray:
        U = self.eigvecs[i]
        return U @ U.T

    def E_apply(self, i: int, v: np.ndarray) -> np.ndarray:
        U = self.eigvecs[i]
        return U @ (U.T @ v)

    def estar_mask(self, i: int) -> np.ndarray:
        return self.levels == i

    def Estar(self, i: int) -> np.ndarray:
        return np.diag(self.estar_mask(i).astype(np.float64))

    def Estar_apply(self, i: int, v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        m = self.estar_mask(i)
        out[m] = v[m]
        return out

    @property
    def J(self) -> np.ndarray:
        return np.ones((self.n, self.n))

    @property
    def Jprime(self) -> np.ndarray:
        return sum(((-1) ** i) * Ai for i, Ai in enumerate(self.A))

    def s(self, i: int) -> np.ndarray:
        return self.A[i][:, self.x].copy()

    def xhat(self) -> np.ndarray:
        e = np.zeros(self.n)
        e[self.x] = 1.0
        return e


def operator_set(g: GraphInstance, x: int = 0, arr: Optional[IntersectionArray] = None,
                 spec: Optional[Spectrum] = None, tol: float = OPERATOR_TOL) -> OperatorSet:
    arr = arr or verify_drg(g)
    spec = spec or spectrum(arr)
    if not 0 <= x < g.n:
        raise IndexError(f"base vertex {x} out of range 0..{g.n - 1}")
    A = distance_matrices(g)
    D = arr.D
    vals, vecs = np.linalg.eigh(A[1])
    theta = [float(t) for t in spec.theta]
    groups: List[List[int]] = [[] for _ in theta]
    for col, lam in enumerate(vals):
        h = int(np.argmin([abs(lam - t) for t in theta]))
        if abs(lam - theta[h]) > GROUP_TOL:
            raise ProjectorResidual(f"adjacency eigenvalue {lam} is not in the predicted spectrum")
        groups[h].append(col)
    eigvecs = [vecs[:, cols] for cols in groups]
    for h, U in enumerate(eigvecs):
        if abs(U.shape[1] - float(spec.m[h])) > 0.5:
            raise ProjectorResidual(f"eigenspace {h} has dimension {U.shape[1]}, expected {spec.m[h]}")
    ops = OperatorSet(g, x, arr, spec, A, g.distances()[x].copy(), eigvecs)
    ops.residuals = operator_residuals(ops)
    bad = {k: v for k, v in ops.residuals.items() if v > tol}
    if bad:
        name, val = max(bad.items(), key=lambda kv: kv[1])
        raise ProjectorResidual(f"{name} residual {val:.3e} exceeds {tol:.0e}")
    return ops


def operator_residuals(ops: OperatorSet) -> Dict[str, float]:
    """Operator-norm residuals of the algebra relations (0 means exact)."""
    n, D = ops.n, ops.D
    U = np.hstack(ops.eigvecs)
    res: Dict[str, float] = {}
    # orthonormality of the joint eigenbasis gives idempotency, E_iE_j = 0 and sum E_i = I
    res["E_i E_j = delta_ij E_i"] = float(np.linalg.norm(U.T @ U - np.eye(n), 2))
    res["sum E_i = I"] = float(np.linalg.norm(U @ U.T - np.eye(n), 2))
    res["A E_i = theta_i E_i"] = max(
        float(np.linalg.norm(ops.adjacency @ Ui - float(t) * Ui, 2)) if Ui.size else 0.0
        for Ui, t in zip(ops.eigvecs, ops.spec.theta)
    )
    res["E_0 = J/|X|"] = float(np.linalg.norm(ops.E(0) - ops.J / n, 2))
    res["E_D = J'/|X|"] = float(np.linalg.norm(ops.E(D) - ops.Jprime / n, 2))
    masks = [ops.estar_mask(i) for i in range(D + 1)]
    cover = np.sum(masks, axis=0)
    res["sum E*_i = I, E*_iE*_j = delta_ij E*_i"] = float(np.abs(cover - 1).max())
    worst = 0.0
    for i in range(D + 1):
        for j in range(D + 1):
            if abs(i - j) > 1 and masks[i].any() and masks[j].any():
                worst = max(worst, float(np.abs(ops.adjacency[np.ix_(masks[i], masks[j])]).max()))
    res["E*_i A E*_j = 0 for |i-j| > 1"] = worst
    return res


# ---------------------------------------------------------------------------
# local spectrum


@dataclass(frozen=True)
class LocalSpectrum:
    eta: Tuple                 # eta_1 .. eta_{k_2}, snapped
    raw: Tuple[float, ...]
    p22: Fraction
    k: int

    @property
    def tail(self) -> Tuple:
        """eta_{k+1} .. eta_{k_2}."""
        return self.eta[self.k:]

    def to_json(self) -> dict:
        return {"eta": [frac_str(e) for e in self.eta], "p22_2": frac_str(self.p22)}


def local_spectrum(ops: OperatorSet) -> LocalSpectrum:
    """Eigenvalues of the distance-2 graph on the second subconstituent, in the standard order."""
    m = ops.estar_mask(2)
    vals = sorted(np.linalg.eigvalsh(ops.A[2][np.ix_(m, m)]), reverse=True)
    arr = ops.arr
    k, p22, top = arr.k, p22_2(arr), arr.b_(3) - 1
    rest = list(vals)

    def take(value, count):
        for _ in range(count):
            hit = next((i for i, v in enumerate(rest) if abs(v - float(value)) <= SNAP_TOL * 100), None)
            if hit is None:
                raise LocalOrderingViolation(
                    f"expected eigenvalue {frac_str(value)} with multiplicity >= {count}")
            rest.pop(hit)

    take(p22, 1)
    take(top, k - 1)
    ordered = [float(p22)] + [float(top)] * (k - 1) + rest
    return LocalSpectrum(tuple(snap(v) for v in ordered), tuple(ordered), p22, k)


# ---------------------------------------------------------------------------
# decomposition


@dataclass
class ModuleRecord:
    label: str
    basis: np.ndarray          # orthonormal columns
    endpoint: int
    estar_dims: Tuple[int, ...]
    e_dims: Tuple[int, ...]
    origin: str
    eta: Optional[object] = None
    case: Optional[LocalEigenvalueCase] = None

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]

    @property
    def thin(self) -> bool:
        return max(self.estar_dims) <= 1

    @property
    def case_tag(self) -> Optional[str]:
        return None if self.case is None else self.case.tag

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "origin": self.origin,
            "endpoint": self.endpoint,
            "dimension": self.dimension,
            "thin": self.thin,
            "estar_dims": list(self.estar_dims),
            "e_dims": list(self.e_dims),
            "eta": None if self.eta is None else frac_str(self.eta),
            "case": self.case_tag,
        }


@dataclass
class TDecomposition:
    graph: str
    x: int
    seed: int
    modules: List[ModuleRecord]
    local: LocalSpectrum
    u_eigen: List[Tuple[object, np.ndarray]]     # (eta, orthonormal basis of U_eta)
    residual: float

    @property
    def mult(self) -> Dict[object, int]:
        out: Dict[object, int] = {}
        for e in self.local.tail:
            key = _match_key(out, e)
            out[key] = out.get(key, 0) + 1
        return out

    @property
    def phi(self) -> List:
        return sorted(self.mult, key=float)

    @property
    def mu(self) -> Dict[object, int]:
        out: Dict[object, int] = {}
        for m in self.modules:
            if m.endpoint == 2 and m.thin:
                key = _match_key(out, m.eta)
                out[key] = out.get(key, 0) + 1
        return out

    def nonthin_endpoint2(self) -> List[ModuleRecord]:
        return [m for m in self.modules if m.endpoint == 2 and not m.thin]

    def counts(self) -> Dict[str, int]:
        out: Dict[str, int] = {}
        for m in self.modules:
            key = f"endpoint{m.endpoint}{'' if m.thin else '-nonthin'}"
            if m.case is not None:
                key += f"-case{m.case.tag}"
            out[key] = out.get(key, 0) + 1
        return out

    def to_json(self) -> dict:
        return {
            "graph": self.graph,
            "base_vertex": self.x,
            "seed": self.seed,
            "dimension_total": sum(m.dimension for m in self.modules),
            "modules": [m.to_json() for m in self.modules],
            "counts": self.counts(),
            "local_spectrum": self.local.to_json(),
            "phi": [frac_str(e) for e in self.phi],
            "mult": {frac_str(e): c for e, c in sorted(self.mult.items(), key=lambda kv: float(kv[0]))},
            "mu": {frac_str(e): c for e, c in sorted(self.mu.items(), key=lambda kv: float(kv[0]))},
            "orthogonality_residual": fmt_res(self.residual),
        }


def _match_key(d: Dict, value):
    for key in d:
        if abs(float(key) - float(value)) <= GROUP_TOL:
            return key
    return value


def _orthonormal(M: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    if M.size == 0:
        return M.reshape(M.shape[0], 0)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    return U[:, s > tol * max(1.0, s[0] if s.size else 0.0)]


def _level_dims(ops: OperatorSet, Q: np.ndarray) -> Tuple[int, ...]:
    return tuple(
        int(np.linalg.matrix_rank(Q[ops.estar_mask(i)], tol=RANK_TOL)) if ops.estar_mask(i).any() else 0
        for i in range(ops.D + 1)
    )


def _e_dims(ops: OperatorSet, Q: np.ndarray) -> Tuple[int, ...]:
    return tuple(
        int(np.linalg.matrix_rank(U.T @ Q, tol=RANK_TOL)) if U.size else 0 for U in ops.eigvecs
    )


def _is_invariant(ops: OperatorSet, Q: np.ndarray, tol: float = CLOSURE_TOL) -> bool:
    """Closure of span(Q) under A and every E*_i (these generate T)."""
    def leak(Y):
        return float(np.linalg.norm(Y - Q @ (Q.T @ Y), 2)) if Y.size else 0.0

    if leak(ops.adjacency @ Q) > tol:
        return False
    for i in range(ops.D + 1):
        if leak(ops.Estar_apply(i, Q)) > tol:
            return False
    return True


def closure(ops: OperatorSet, u: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis of the T-module generated by u.

    Every basis vector lies in a single subconstituent, so closing under A
    and splitting by level is the same as closing under A and all E*_i.
    """
    D = ops.D
    per_level: List[List[np.ndarray]] = [[] for _ in range(D + 1)]
    queue: List[np.ndarray] = []

    def add(w):
        for i in range(D + 1):
            wi = ops.Estar_apply(i, w)
            for q in per_level[i]:
                wi = wi - q * (q @ wi)
            for q in per_level[i]:
                wi = wi - q * (q @ wi)
            nrm = np.linalg.norm(wi)
            if nrm > tol * max(1.0, np.linalg.norm(w)):
                wi = wi / nrm
                per_level[i].append(wi)
                queue.append(wi)

    add(u / np.linalg.norm(u))
    while queue:
        add(ops.adjacency @ queue.pop(0))
    cols = [q for lvl in per_level for q in lvl]
    return np.column_stack(cols)


def _M_span(ops: OperatorSet, v: np.ndarray) -> np.ndarray:
    cols = []
    for i in range(ops.D + 1):
        w = ops.E_apply(i, v)
        nrm = np.linalg.norm(w)
        if nrm > RANK_TOL:
            cols.append(w / nrm)
    return np.column_stack(cols)


class _Builder:
    def __init__(self, ops: OperatorSet, arr: IntersectionArray, spec: Spectrum):
        self.ops, self.arr, self.spec = ops, arr, spec
        self.modules: List[ModuleRecord] = []

    def found_level(self, level: int) -> np.ndarray:
        m = self.ops.estar_mask(level)
        parts = [M.basis[m] for M in self.modules]
        if not parts:
            return np.zeros((int(m.sum()), 0))
        return _orthonormal(np.hstack(parts))

    def add(self, Q: np.ndarray, origin: str) -> ModuleRecord:
        ops = self.ops
        est = _level_dims(ops, Q)
        endpoint = next(i for i, d in enumerate(est) if d)
        rec = ModuleRecord(f"W{len(self.modules):03d}", Q, endpoint, est, _e_dims(ops, Q), origin)
        if endpoint == 2 and rec.thin:
            v = lowest_vector(ops, rec)
            rec.eta = snap(float(v @ (ops.A[2] @ v)))
            rec.case = classify_eta(rec.eta, self.arr, self.spec)
        self.modules.append(rec)
        return rec

    def complement(self, level: int) -> np.ndarray:
        """Orthonormal basis (in full coordinates) of E*_level V minus found modules."""
        ops = self.ops
        m = ops.estar_mask(level)
        F = self.found_level(level)
        size = int(m.sum())
        P = np.eye(size) - F @ F.T
        w, V = np.linalg.eigh(P)
        S = V[:, w > 0.5]
        out = np.zeros((ops.n, S.shape[1]))
        out[m] = S
        return out

    def try_cyclic(self, v: np.ndarray, origin: str) -> bool:
        """Accept Mv when it is T-invariant and orthogonal to every module so far."""
        Q = _M_span(self.ops, v)
        if not _is_invariant(self.ops, Q):
            return False
        for M in self.modules:
            if np.abs(M.basis.T @ Q).max() > 1e-8:
                return False
        self.add(Q, origin)
        return True


def _random_element(ops: OperatorSet, S: np.ndarray, level: int, rng) -> np.ndarray:
    """S^T X S for a random self-adjoint X in E*_level T E*_level."""
    D = ops.D
    XS = rng.standard_normal() * S
    for length in range(2, 2 * D + 1, 2):
        for _ in range(2):
            Y = S
            for step in range(length):
                Y = ops.adjacency @ Y
                if step < length - 1:
                    weights = rng.standard_normal(D + 1)
                    Y = weights[ops.levels][:, None] * Y
            XS = XS + ops.Estar_apply(level, Y)
    H = S.T @ XS
    return (H + H.T) / 2


def decompose(g: GraphInstance, x: int = 0, seed: int = DEFAULT_SEED,
              ops: Optional[OperatorSet] = None) -> TDecomposition:
    """Split the standard module at x into irreducible T-modules.

    V_0 and the endpoint-1 modules come from cyclic modules Mv; U is split into
    eigenspaces of E*_2A_2E*_2 and each eigenvector v is tried as Mv; anything
    left over is decomposed level by level with a seeded generic element of
    E*_eTE*_e.
    """
    ops = ops or operator_set(g, x)
    arr, spec = ops.arr, ops.spec
    rng = np.random.default_rng(seed)
    b = _Builder(ops, arr, spec)

    b.try_cyclic(ops.xhat(), "V0")
    for w in b.complement(1).T:
        b.try_cyclic(w, "endpoint-1")

    U = b.complement(2)
    local = local_spectrum(ops)
    u_eigen: List[Tuple[object, np.ndarray]] = []
    if U.shape[1]:
        H = U.T @ ops.A[2] @ U
        vals, vecs = np.linalg.eigh((H + H.T) / 2)
        groups: List[List[int]] = []
        for i, val in enumerate(vals):
            if groups and abs(val - vals[groups[-1][0]]) <= GROUP_TOL:
                groups[-1].append(i)
            else:
                groups.append([i])
        for grp in groups:
            eta = snap(float(np.mean(vals[grp])))
            basis = U @ vecs[:, grp]
            u_eigen.append((eta, basis))
            for v in basis.T:
                F = b.found_level(2)
                m = ops.estar_mask(2)
                r = v.copy()
                r[m] = r[m] - F @ (F.T @ r[m])
                if np.linalg.norm(r) > 1e-6:
                    b.try_cyclic(r / np.linalg.norm(r), "U")

    for level in range(ops.D + 1):
        S = b.complement(level)
        while S.shape[1]:
            H = _random_element(ops, S, level, rng)
            _, vecs = np.linalg.eigh(H)
            start = len(b.modules)
            m = ops.estar_mask(level)
            for y in vecs.T:
                u = S @ y
                for M in b.modules[start:]:
                    Fm = _orthonormal(M.basis[m])
                    u[m] = u[m] - Fm @ (Fm.T @ u[m])
                if np.linalg.norm(u) > 1e-6:
                    b.add(closure(ops, u / np.linalg.norm(u)), "generic")
            S = b.complement(level)

    Q = np.hstack([M.basis for M in b.modules])
    residual = float(np.linalg.norm(Q.T @ Q - np.eye(Q.shape[1]), 2))
    if Q.shape[1] != ops.n or residual > 1e-8:
        raise DecompositionResidual(
            f"modules span {Q.shape[1]} of {ops.n} dimensions, orthogonality residual {residual:.3e}")
    return TDecomposition(g.name, ops.x, seed, b.modules, local, u_eigen, residual)


def lowest_vector(ops: OperatorSet, rec: ModuleRecord) -> np.ndarray:
    """A unit vector spanning E*_eW for a thin module of endpoint e."""
    m = ops.estar_mask(rec.endpoint)
    block = rec.basis[m]
    u, s, _ = np.linalg.svd(block, full_matrices=False)
    v = np.zeros(ops.n)
    v[m] = u[:, 0]
    # fix the sign so reports do not depend on the eigensolver
    j = int(np.argmax(np.abs(v)))
    return v if v[j] > 0 else -v


# ---------------------------------------------------------------------------
# blueprint verification


@dataclass
class VerificationReport:
    label: str
    residuals: Dict[str, float] = field(default_factory=dict)
    tol: float = BLUEPRINT_RTOL

    def record(self, clause: str, residual: float) -> None:
        self.residuals[clause] = max(self.residuals.get(clause, 0.0), float(residual))

    @property
    def ok(self) -> bool:
        return all(r <= self.tol for r in self.residuals.values())

    def failures(self) -> List[str]:
        return [c for c, r in self.residuals.items() if r > self.tol]

    def to_json(self) -> dict:
        return {"module": self.label, "ok": self.ok,
                "residuals": {k: fmt_res(v) for k, v in sorted(self.residuals.items())}}


def _rel(measured: float, predicted) -> float:
    return abs(measured - float(predicted)) / max(1.0, abs(float(predicted)))


@dataclass
class MeasuredModule:
    v: np.ndarray
    E_v: List[np.ndarray]
    basis: List[np.ndarray]          # the E*A basis, in blueprint order
    E_norms: List[float]
    EA_norms: List[float]
    tridiag: np.ndarray
    transition: np.ndarray
    tridiag_residual: float
    transition_residual: float


def astar_basis(ops: OperatorSet, v: np.ndarray, endpoint: int, rows: Sequence[int]) -> List[np.ndarray]:
    """E*_{i+e} A_i v for i in rows (A_i x-hat itself for e = 0)."""
    return [ops.Estar_apply(i + endpoint, ops.A[i] @ v) for i in rows]


def measure(ops: OperatorSet, rec: ModuleRecord, e_indices: Sequence[int],
            astar_indices: Sequence[int]) -> MeasuredModule:
    v = lowest_vector(ops, rec)
    Ev = [ops.E_apply(j, v) for j in range(ops.D + 1)]
    basis = astar_basis(ops, v, rec.endpoint, astar_indices)
    En = [float(Ev[j] @ Ev[j]) for j in e_indices]
    EAn = [float(u @ u) for u in basis]
    B = np.column_stack(basis)
    AB = ops.adjacency @ B
    M = np.array([[basis[i] @ AB[:, j] / EAn[i] for j in range(len(basis))] for i in range(len(basis))])
    tri_res = float(np.linalg.norm(AB - B @ M) / max(1.0, np.linalg.norm(AB)))
    T = np.array([[basis[i] @ Ev[j] / (Ev[j] @ Ev[j]) for j in e_indices] for i in range(len(basis))])
    recon = np.column_stack([Ev[j] for j in e_indices]) @ T.T
    tr_res = float(np.linalg.norm(recon - B) / max(1.0, np.linalg.norm(B)))
    return MeasuredModule(v, Ev, basis, En, EAn, M, T, tri_res, tr_res)


def blueprint_for(rec: ModuleRecord, arr: IntersectionArray, spec: Spectrum) -> Optional[ModuleBlueprint]:
    if not rec.thin:
        return None
    if rec.endpoint == 0:
        return blueprint_endpoint0(arr, spec)
    if rec.endpoint == 1:
        return blueprint_endpoint1(arr, spec)
    if rec.endpoint == 2:
        return blueprint_endpoint2(arr, spec, rec.case)
    return None


def verify_blueprint(ops: OperatorSet, rec: ModuleRecord, bp: ModuleBlueprint,
                     tol: float = BLUEPRINT_RTOL, raise_on_failure: bool = True) -> VerificationReport:
    arr, D = ops.arr, ops.D
    rep = VerificationReport(rec.label, tol=tol)
    rep.record("dimension", abs(rec.dimension - bp.dimension))
    rep.record("E* dimensions", sum(abs(a - b) for a, b in zip(rec.estar_dims, bp.estar_dims)))
    rep.record("E dimensions", sum(abs(a - b) for a, b in zip(rec.e_dims, bp.e_dims)))
    if rep.failures():
        return _finish(rep, raise_on_failure)
    meas = measure(ops, rec, bp.e_indices, bp.astar_indices)

    # (a) vanishing pattern of E_i v
    for j in range(D + 1):
        if j not in bp.e_indices:
            rep.record("(a) E_i v = 0 off the index set", np.linalg.norm(meas.E_v[j]))
    # (b) square norms of both bases
    for got, want in zip(meas.E_norms, bp.basis_E_norms):
        rep.record("(b) ||E_i v||^2", _rel(got, want))
    for got, want in zip(meas.EA_norms, bp.basis_Astar_norms):
        rep.record("(b) ||E*A_i v||^2", _rel(got, want))
    for i in range(len(meas.basis)):
        for j in range(i):
            rep.record("(b) E*A basis orthogonal", abs(meas.basis[i] @ meas.basis[j]))
    # (c) matrix of A
    rep.record("(c) A preserves the E*A basis", meas.tridiag_residual)
    for i, row in enumerate(bp.tridiag):
        for j, want in enumerate(row):
            rep.record("(c) matrix of A", _rel(meas.tridiag[i, j], want))
    # (d) transition
    rep.record("(d) E*A basis lies in the E basis", meas.transition_residual)
    for i, row in enumerate(bp.transition):
        for j, want in enumerate(row):
            rep.record("(d) transition coefficients", _rel(meas.transition[i, j], want))
    # (e) vectors past the end of the basis vanish
    e = rec.endpoint
    last = bp.astar_indices[-1] if bp.astar_indices else -1
    for i in range(last + 1, D - e + 1):
        w = ops.Estar_apply(i + e, ops.A[i] @ meas.v)
        rep.record("(e) trailing E*A_i v = 0", np.linalg.norm(w))
    if bp.case is not None and bp.case.tag == "III":
        tp = theta_parameter(Fraction(0), arr, ops.spec)
        g = g_family(arr, tp)
        rhs = sum(float(g[D - 2](ops.spec.theta[j])) * meas.E_v[j] for j in range(D + 1))
        rep.record("(e) g_{D-2}(A) v = 0", np.linalg.norm(rhs))
    # local eigenvalue
    if e == 1:
        w = ops.Estar_apply(2, ops.adjacency @ meas.v)
        w = w / np.linalg.norm(w)
        rep.record("local eigenvalue b_3 - 1", _rel(float(w @ ops.A[2] @ w), bp.local_eigenvalue))
    if e == 2:
        rep.record("local eigenvalue", _rel(float(meas.v @ ops.A[2] @ meas.v), bp.local_eigenvalue))
    return _finish(rep, raise_on_failure)


def _finish(rep: VerificationReport, raise_on_failure: bool) -> VerificationReport:
    if raise_on_failure and not rep.ok:
        clause = max(rep.failures(), key=lambda c: rep.residuals[c])
        raise BlueprintMismatch(clause, rep.residuals[clause], f"(module {rep.label})")
    return rep


# ---------------------------------------------------------------------------
# multiplicities and the eigenvectors of U


@dataclass
class AuditReport:
    mult: Dict[object, int]
    mu: Dict[object, int]
    all_equal: bool
    all_endpoint2_thin: bool
    same_eta_residual: float
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> dict:
        def table(d):
            return {frac_str(k): v for k, v in sorted(d.items(), key=lambda kv: float(kv[0]))}

        return {
            "mult": table(self.mult),
            "mu": table(self.mu),
            "equality_for_all_eta": self.all_equal,
            "every_endpoint2_module_thin": self.all_endpoint2_thin,
            "same_eta_max_residual": fmt_res(self.same_eta_residual),
            "checks": dict(sorted(self.checks.items())),
        }


AUDIT_BOUND = "mult_eta >= mu_eta"
AUDIT_EQUIV = "equality for all eta iff every endpoint-2 module is thin"
AUDIT_ISO = "same local eigenvalue gives isomorphic modules"


def multiplicity_audit(decomp: TDecomposition, ops: Optional[OperatorSet] = None,
                       tol: float = BLUEPRINT_RTOL, raise_on_failure: bool = True) -> AuditReport:
    mult, mu = decomp.mult, decomp.mu
    bound_ok = True
    for eta, count in mu.items():
        key = _match_key(mult, eta)
        if mult.get(key, 0) < count:
            bound_ok = False
    all_equal = all(mu.get(_match_key(mu, eta), 0) == c for eta, c in mult.items()) and all(
        _match_key(mult, eta) in mult for eta in mu)
    all_thin = not decomp.nonthin_endpoint2()

    worst = 0.0
    if ops is not None:
        groups: Dict[object, List[ModuleRecord]] = {}
        for m in decomp.modules:
            if m.endpoint == 2 and m.thin:
                groups.setdefault(_match_key(groups, m.eta), []).append(m)
        for mods in groups.values():
            ref = mods[0]
            e_idx = [j for j, d in enumerate(ref.e_dims) if d]
            a_idx = list(range(ref.dimension))
            base = measure(ops, ref, e_idx, a_idx)
            for other in mods[1:]:
                if other.e_dims != ref.e_dims or other.estar_dims != ref.estar_dims:
                    worst = max(worst, 1.0)
                    continue
                cur = measure(ops, other, e_idx, a_idx)
                for a, b in ((base.E_norms, cur.E_norms), (base.EA_norms, cur.EA_norms),
                             (base.tridiag.ravel(), cur.tridiag.ravel()),
                             (base.transition.ravel(), cur.transition.ravel())):
                    for x, y in zip(a, b):
                        worst = max(worst, _rel(y, x))
    rep = AuditReport(mult, mu, all_equal, all_thin, worst)
    rep.checks[AUDIT_BOUND] = bound_ok
    rep.checks[AUDIT_EQUIV] = all_equal == all_thin
    rep.checks[AUDIT_ISO] = bool(worst <= tol)
    if raise_on_failure:
        for name, ok in rep.checks.items():
            if not ok:
                raise AuditFailure(name, f"failed on {decomp.graph} at vertex {decomp.x}")
    return rep


def local_bounds_residual(ops: OperatorSet, local: LocalSpectrum) -> float:
    """How far eta_{k+1}..eta_{k_2} stray outside [tilde theta_1, tilde theta_d] (0 if inside)."""
    t1, td = tilde_bounds(ops.arr, ops.spec)
    worst = 0.0
    for e in local.raw[local.k:]:
        worst = max(worst, float(t1) - e, e - float(td))
    return worst


@dataclass
class UEigenvectorReport:
    rows: List[dict]

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.rows)


def u_eigenvector_checks(ops: OperatorSet, decomp: TDecomposition, tol: float = OPERATOR_TOL) -> UEigenvectorReport:
    """Vanishing of E_iv on eigenvectors v of U, and the dimension of Mv."""
    arr, spec, D, d = ops.arr, ops.spec, ops.D, ops.arr.d
    t1, td = tilde_bounds(arr, spec)
    rows = []
    for eta, basis in decomp.u_eigen:
        is_t1 = abs(float(eta) - float(t1)) <= GROUP_TOL
        is_td = abs(float(eta) - float(td)) <= GROUP_TOL
        for v in basis.T:
            nrm = [float(np.linalg.norm(ops.E_apply(i, v))) for i in range(D + 1)]
            zero = [x <= tol for x in nrm]
            ok = zero[0] and zero[D]
            ok &= zero[1] == is_t1 and zero[D - 1] == is_t1
            ok &= zero[d] == is_td and zero[D - d] == is_td
            for i in range(2, D - 1):
                if i not in (d, D - d):
                    ok &= not zero[i]
            if is_t1 or (is_td and D % 2 == 1):
                want = D - 3
            elif is_td:
                want = D - 2
            else:
                want = D - 1
            dim = sum(1 for x in nrm if x > RANK_TOL)
            ok &= dim == want
            rows.append({"eta": frac_str(eta), "dim_Mv": dim, "expected": want, "ok": bool(ok)})
    return UEigenvectorReport(rows)
