"""Determinant-maximization solver for the steady-state rate program.

The program minimized here is

    minimize   -1/2 logdet Q  (+ a data constant)
    subject to G(Pi, Q) >= 0,

where G collects, block-diagonally, the linear matrix inequalities of one of
two equivalent semidefinite representations:

* form_b (noise loading with full row rank, BB^T invertible):
      [[Pi - Q, Pi A^T], [A Pi, A Pi A^T + BB^T]] >= 0,
      constant 1/2 log|BB^T|, Q of size p;
* form_a (A invertible, B may be singular):
      [[I - Q, B^T], [B, A Pi A^T + BB^T]] >= 0,
      constant log|det A|, Q of size q;

both joined with Lambda(Pi) - Pi >= 0, Pi > 0, Q > 0 and trace(Pi) <= D.
At the optimum -1/2 logdet Q + const equals 1/2 log(|Lambda|/|Pi|), the
information rate of the optimal one-step predictor pair.

Solution method: a primal log-barrier path follower.  For an increasing
weight t we Newton-minimize

    psi_t(Pi, Q) = -(1 + t/2) logdet Q - logdet G_rest(Pi, Q)

over the vectorized symmetric variables, with backtracking line search that
keeps every block strictly positive definite.  The centering weight t grows
geometrically (factor 5, i.e. the barrier parameter shrinks by 0.2) until
nu / t falls below the duality-gap target, nu being the total barrier
degree.  Suboptimality of the returned point is at most the reported gap.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_discrete_lyapunov

from .errors import InfeasibleModel, SolverDivergence
from .linalg import symmetrize

GAP_TARGET = 1e-10  # nats; |rate error| <= gap/ln 2 bits
T_GROWTH = 5.0  # barrier parameter decreases by factor 0.2 per stage
MAX_OUTER = 500
MAX_INNER = 50
INNER_TOL = 1e-5  # half squared Newton decrement, intermediate stages
INNER_TOL_FINAL = 1e-9


def sym_basis(p):
    """Basis of symmetric p x p matrices ordered by vech (row-major upper)."""
    out = []
    for i in range(p):
        for j in range(i, p):
            E = np.zeros((p, p))
            E[i, j] = 1.0
            E[j, i] = 1.0
            if i == j:
                E[i, i] = 1.0
            out.append(E)
    return np.array(out)


def vech(M):
    p = M.shape[0]
    return np.array([M[i, j] for i in range(p) for j in range(i, p)])


def unvech(x, p):
    M = np.zeros((p, p))
    k = 0
    for i in range(p):
        for j in range(i, p):
            M[i, j] = x[k]
            M[j, i] = x[k]
            k += 1
    return M


@dataclass
class MaxdetProblem:
    """Affine problem data: one fused unit-weight LMI group plus the Q block."""

    form: str  # "form_b" or "form_a"
    A: np.ndarray
    B: np.ndarray
    D: float
    const_bits: float  # additive objective constant, bits
    fused_C: np.ndarray  # (S, S)
    fused_dA: np.ndarray  # (n, S, S)
    q_dA: np.ndarray  # (n, m, m); the Q block value is sum x_j q_dA[j]
    nb_pi: int
    nb_q: int
    p: int
    m: int

    @property
    def n(self):
        return self.nb_pi + self.nb_q

    @property
    def nu(self):
        return self.fused_C.shape[0] + self.m


def _fused_common(p, n, nb_pi, Epi, A, BBt, D, top_C, top_fill):
    """Assemble [top LMI] + [Lambda-Pi] + [Pi] + [D - tr Pi] block-diagonally."""
    sL = top_C.shape[0]
    S = sL + p + p + 1
    C = np.zeros((S, S))
    dA = np.zeros((n, S, S))
    C[:sL, :sL] = top_C
    top_fill(dA)
    o = sL
    C[o : o + p, o : o + p] = BBt
    for j in range(nb_pi):
        E = Epi[j]
        dA[j, o : o + p, o : o + p] = A @ E @ A.T - E
    o += p
    for j in range(nb_pi):
        dA[j, o : o + p, o : o + p] = Epi[j]
    o += p
    C[o, o] = D
    for j in range(nb_pi):
        dA[j, o, o] = -np.trace(Epi[j])
    return C, dA


def form_b_problem(A, B, D) -> MaxdetProblem:
    """Blocks for the representation that needs BB^T invertible."""
    p = A.shape[0]
    BBt = B @ B.T
    sign, logdet_bbt = np.linalg.slogdet(BBt)
    if sign <= 0:
        raise InfeasibleModel("form_b requires BB^T to be nonsingular")
    Epi = sym_basis(p)
    Eq = sym_basis(p)
    nb_pi = nb_q = len(Epi)
    n = nb_pi + nb_q
    sL = 2 * p
    top_C = np.zeros((sL, sL))
    top_C[p:, p:] = BBt

    def fill(dA):
        for j in range(nb_pi):
            E = Epi[j]
            dA[j, :p, :p] = E
            dA[j, :p, p:sL] = E @ A.T
            dA[j, p:sL, :p] = A @ E
            dA[j, p:sL, p:sL] = A @ E @ A.T
        for j in range(nb_q):
            dA[nb_pi + j, :p, :p] = -Eq[j]

    C, dA = _fused_common(p, n, nb_pi, Epi, A, BBt, D, top_C, fill)
    q_dA = np.zeros((n, p, p))
    for j in range(nb_q):
        q_dA[nb_pi + j] = Eq[j]
    const_bits = 0.5 * logdet_bbt / np.log(2.0)
    return MaxdetProblem("form_b", A, B, D, const_bits, C, dA, q_dA, nb_pi, nb_q, p, p)


def form_a_problem(A, B, D) -> MaxdetProblem:
    """Blocks for the representation that needs A invertible (B may be singular)."""
    p = A.shape[0]
    q = B.shape[1]
    BBt = B @ B.T
    det_a = np.linalg.det(A)
    if abs(det_a) <= 1e-300:
        raise InfeasibleModel("form_a requires A to be nonsingular")
    Epi = sym_basis(p)
    Eq = sym_basis(q)
    nb_pi, nb_q = len(Epi), len(Eq)
    n = nb_pi + nb_q
    sL = q + p
    top_C = np.zeros((sL, sL))
    top_C[:q, :q] = np.eye(q)
    top_C[:q, q:] = B.T
    top_C[q:, :q] = B
    top_C[q:, q:] = BBt

    def fill(dA):
        for j in range(nb_pi):
            dA[j, q:sL, q:sL] = A @ Epi[j] @ A.T
        for j in range(nb_q):
            dA[nb_pi + j, :q, :q] = -Eq[j]

    C, dA = _fused_common(p, n, nb_pi, Epi, A, BBt, D, top_C, fill)
    q_dA = np.zeros((n, q, q))
    for j in range(nb_q):
        q_dA[nb_pi + j] = Eq[j]
    const_bits = np.log2(abs(det_a))
    return MaxdetProblem("form_a", A, B, D, const_bits, C, dA, q_dA, nb_pi, nb_q, p, q)


def _chol_logdet(G):
    try:
        L = np.linalg.cholesky(G)
    except np.linalg.LinAlgError:
        return None
    return 2.0 * float(np.sum(np.log(np.diag(L))))


def phase1_point(prob: MaxdetProblem):
    """A strictly feasible (Pi, Q).

    Pi0 is a scaled solution of the contracted stationarity equation
    P = s A P A^T + s BB^T with s = 1/(2 max(1, rho(A))^2): such P
    satisfies P < Lambda(P) strictly, and every downscaling c P with
    c <= 1 stays strictly inside while meeting trace(c P) < D.  Q0 sits at
    0.99 of its Schur-complement bound, strictly inside the top LMI.
    """
    A, B, D = prob.A, prob.B, prob.D
    p = prob.p
    BBt = B @ B.T
    rho = max(1.0, float(np.max(np.abs(np.linalg.eigvals(A)))))
    s = 1.0 / (2.0 * rho * rho)
    try:
        Pstar = solve_discrete_lyapunov(np.sqrt(s) * A, s * BBt)
    except Exception as exc:  # scipy raises LinAlgError subclasses
        raise InfeasibleModel(f"phase-1 stationarity solve failed: {exc}") from exc
    Pstar = symmetrize(Pstar)
    tr = float(np.trace(Pstar))
    if not np.isfinite(tr) or tr <= 0:
        raise InfeasibleModel("phase-1 produced a degenerate candidate")
    c = min(0.9 * D / tr, 0.95)
    for _ in range(8):
        Pi0 = c * Pstar
        Lam0 = A @ Pi0 @ A.T + BBt
        try:
            if prob.form == "form_b":
                Sb = Pi0 - Pi0 @ A.T @ np.linalg.solve(Lam0, A @ Pi0)
            else:
                Sb = np.eye(prob.m) - B.T @ np.linalg.solve(Lam0, B)
        except np.linalg.LinAlgError:
            c *= 0.5
            continue
        Q0 = 0.99 * symmetrize(Sb)
        x = np.concatenate([vech(Pi0), vech(Q0)])
        if _psi(prob, x, 1.0) is not None:
            return x
        c *= 0.5
    raise InfeasibleModel("phase-1 cannot find a strictly feasible point")


def _psi(prob, x, t):
    """Barrier potential, or None when x is not strictly feasible."""
    ld_f = _chol_logdet(prob.fused_C + np.tensordot(x, prob.fused_dA, axes=1))
    if ld_f is None:
        return None
    ld_q = _chol_logdet(np.tensordot(x, prob.q_dA, axes=1))
    if ld_q is None:
        return None
    return -ld_f - (1.0 + 0.5 * t) * ld_q


def solve_maxdet(prob: MaxdetProblem, gap_target=GAP_TARGET):
    """Run the barrier path follower; returns (Pi, Q, kkt_residual_nats).

    The residual is the duality-gap bound nu/t at the final stage plus the
    centering slack; all LMI blocks of the returned point are strictly
    positive definite.
    """
    x = phase1_point(prob)
    n = prob.n
    nu = float(prob.nu)
    S_eye = np.eye(prob.fused_C.shape[0])
    m_eye = np.eye(prob.m)
    t = 1.0
    last_lam2 = np.inf
    for _ in range(MAX_OUTER):
        final = nu / t <= gap_target
        tol = INNER_TOL_FINAL if final else INNER_TOL
        for _ in range(MAX_INNER):
            G = prob.fused_C + np.tensordot(x, prob.fused_dA, axes=1)
            Q = np.tensordot(x, prob.q_dA, axes=1)
            try:
                Lg = np.linalg.cholesky(G)
                Lq = np.linalg.cholesky(Q)
            except np.linalg.LinAlgError as exc:
                raise SolverDivergence(f"barrier iterate left the cone: {exc}") from exc
            Gi = symmetrize(cho_solve((Lg, True), S_eye))
            Qi = symmetrize(cho_solve((Lq, True), m_eye))
            w = 1.0 + 0.5 * t
            g = -np.einsum("ab,jba->j", Gi, prob.fused_dA)
            g -= w * np.einsum("ab,jba->j", Qi, prob.q_dA)
            T1 = np.einsum("ab,jbc,cd->jad", Gi, prob.fused_dA, Gi)
            H = np.einsum("jab,lba->jl", T1, prob.fused_dA)
            T2 = np.einsum("ab,jbc,cd->jad", Qi, prob.q_dA, Qi)
            H += w * np.einsum("jab,lba->jl", T2, prob.q_dA)
            H = symmetrize(H)
            try:
                dx = -cho_solve(cho_factor(H), g)
            except np.linalg.LinAlgError:
                ridge = 1e-10 * np.trace(H) / n
                dx = -np.linalg.solve(H + ridge * np.eye(n), g)
            lam2 = float(-g @ dx)
            if not np.isfinite(lam2) or lam2 < 0.0:
                break
            last_lam2 = lam2
            if 0.5 * lam2 <= tol:
                break
            base = _psi(prob, x, t)
            gdx = float(g @ dx)
            step = 1.0
            moved = False
            while step > 1e-16:
                cand = _psi(prob, x + step * dx, t)
                if cand is not None and cand <= base + 0.25 * step * gdx:
                    moved = True
                    break
                step *= 0.5
            if not moved:
                break
            x = x + step * dx
            if base - cand < 1e-13 * (1.0 + abs(base)):
                break
        if final:
            Pi = unvech(x[: prob.nb_pi], prob.p)
            Qm = unvech(x[prob.nb_pi :], prob.m)
            slack = np.sqrt(max(last_lam2, 0.0)) * np.sqrt(nu) / t
            return Pi, Qm, nu / t + slack
        t *= T_GROWTH
    raise SolverDivergence(
        f"barrier path following exceeded {MAX_OUTER} stages (gap target {gap_target})"
    )
