"""Steady-state information rate of a Gauss-Markov source at a distortion target.

``nrdf`` returns the minimal bits-per-vector-per-step rate of any causal
reproduction meeting E||x - y||^2 <= D in steady state, together with the
optimizing covariance pair: pi (filtered error covariance) and
lam = A pi A^T + B B^T (one-step prediction error covariance).  The rate is
1/2 log2(|lam| / |pi|).

Dispatch: the closed form for scalar sources, an exact zero-rate solution
for stable sources at D >= d_max, otherwise one of the two determinant-
maximization representations in :mod:`zdrd.maxdet` (form_b when BB^T is
invertible, form_a when only A is).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import maxdet
from .errors import BadDistortion, InfeasibleModel
from .linalg import symmetrize
from .source_model import GaussMarkovSource, d_max, stationary_covariance

RANK_RTOL = 1e-10  # singular values below RANK_RTOL * s_max count as zero

FORM_B = "form_b"
FORM_A = "form_a"
SCALAR_CLOSED_FORM = "scalar_closed_form"


@dataclass(frozen=True)
class NrdfSolution:
    distortion_target: float
    rate_bits: float
    pi: np.ndarray
    lam: np.ndarray
    kkt_residual: float
    form_used: str

    def to_dict(self):
        return {
            "distortion_target": self.distortion_target,
            "rate_bits": self.rate_bits,
            "pi": self.pi.tolist(),
            "lambda": self.lam.tolist(),
            "kkt_residual": self.kkt_residual,
            "form_used": self.form_used,
        }


@dataclass(frozen=True)
class RdPoint:
    d: float
    rate_lower_bits: float
    rate_upper_scalar_bits: float
    rate_upper_vector_bits: float
    active_dims: int
    status: str = "ok"


@dataclass(frozen=True)
class RdCurve:
    points: tuple


def scalar_ar1_nrdf(alpha: float, sigma2: float, D: float) -> float:
    """Closed-form rate for a scalar source x_{t+1} = alpha x_t + w_t, var sigma2.

    Returns max(0, 1/2 log2(alpha^2 + sigma2 / D)) bits.
    """
    if not (np.isfinite(D) and D > 0):
        raise BadDistortion(f"D must be a positive real, got {D}")
    if not (np.isfinite(sigma2) and sigma2 > 0):
        raise BadDistortion(f"sigma2 must be a positive real, got {sigma2}")
    return max(0.0, 0.5 * math.log2(alpha * alpha + sigma2 / D))


def _rank(M):
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def _rate_from_pair(pi, lam):
    sp, ldp = np.linalg.slogdet(pi)
    sl, ldl = np.linalg.slogdet(lam)
    if sp <= 0 or sl <= 0:
        raise InfeasibleModel("solution covariances are not positive definite")
    return max(0.0, 0.5 * (ldl - ldp) / math.log(2.0))


def _zero_rate_solution(src, D, form_name):
    S = stationary_covariance(src)
    if np.linalg.slogdet(S)[0] <= 0:
        raise InfeasibleModel("stationary covariance is singular")
    return NrdfSolution(
        distortion_target=float(D),
        rate_bits=0.0,
        pi=S,
        lam=S.copy(),
        kkt_residual=0.0,
        form_used=form_name,
    )


def _scalar_solution(src, D):
    alpha = float(src.A[0, 0])
    sigma2 = float((src.B @ src.B.T)[0, 0])
    dmax = sigma2 / (1.0 - alpha * alpha) if abs(alpha) < 1.0 else math.inf
    if D >= dmax:
        pi = np.array([[dmax]])
        return NrdfSolution(float(D), 0.0, pi, pi.copy(), 0.0, SCALAR_CLOSED_FORM)
    pi = np.array([[D]])
    lam = np.array([[alpha * alpha * D + sigma2]])
    return NrdfSolution(
        distortion_target=float(D),
        rate_bits=_rate_from_pair(pi, lam),
        pi=pi,
        lam=lam,
        kkt_residual=0.0,
        form_used=SCALAR_CLOSED_FORM,
    )


def dispatch_form(src: GaussMarkovSource) -> str:
    """Which representation applies: form_b if BB^T invertible, else form_a."""
    if _rank(src.B @ src.B.T) == src.p:
        return FORM_B
    if _rank(src.A) == src.p:
        return FORM_A
    raise InfeasibleModel(
        "existence requires A nonsingular or B with full row rank; neither holds"
    )


def nrdf(src: GaussMarkovSource, D: float, form: str | None = None,
         gap_target: float = maxdet.GAP_TARGET) -> NrdfSolution:
    """Rate (bits/vector/step) and optimizing pair at distortion target D.

    ``form`` forces a representation ("form_b", "form_a",
    "scalar_closed_form"); by default scalar sources use the closed form and
    vector sources dispatch on the rank conditions.  Stable sources at
    D >= d_max return the exact zero-rate stationary solution.
    """
    try:
        D = float(D)
    except (TypeError, ValueError) as exc:
        raise BadDistortion(f"D must be a positive real, got {D!r}") from exc
    if not (np.isfinite(D) and D > 0):
        raise BadDistortion(f"D must be a positive real, got {D!r}")
    if form is None:
        if src.p == 1:
            return _scalar_solution(src, D)
        form = dispatch_form(src)
    elif form == SCALAR_CLOSED_FORM:
        if src.p != 1:
            raise InfeasibleModel("scalar closed form needs p = 1")
        return _scalar_solution(src, D)
    elif form not in (FORM_B, FORM_A):
        raise ValueError(f"unknown form {form!r}")

    dm = d_max(src)
    if D >= dm:
        try:
            return _zero_rate_solution(src, D, form)
        except InfeasibleModel:
            pass  # degenerate stationarity; let the barrier's phase 1 decide

    if form == FORM_B:
        if _rank(src.B @ src.B.T) != src.p:
            raise InfeasibleModel("form_b requires BB^T to be nonsingular")
        prob = maxdet.form_b_problem(src.A, src.B, D)
    else:
        if _rank(src.A) != src.p:
            raise InfeasibleModel("form_a requires A to be nonsingular")
        prob = maxdet.form_a_problem(src.A, src.B, D)
    pi, _, kkt = maxdet.solve_maxdet(prob, gap_target=gap_target)
    pi = symmetrize(pi)
    lam = symmetrize(src.A @ pi @ src.A.T + src.B @ src.B.T)
    return NrdfSolution(
        distortion_target=D,
        rate_bits=_rate_from_pair(pi, lam),
        pi=pi,
        lam=lam,
        kkt_residual=float(kkt),
        form_used=form,
    )


def rd_curve(src: GaussMarkovSource, d_grid) -> RdCurve:
    """Lower bound and both quantizer upper bounds over a distortion grid.

    Failed grid points are flagged in their status and carry NaN rates; the
    curve is still emitted.  The vector upper bound uses the implemented
    4-dimensional lattice constant at every point.
    """
    from . import coding, realization

    d_grid = [float(d) for d in d_grid]
    if not d_grid:
        raise BadDistortion("distortion grid must be nonempty")
    if any(not (np.isfinite(d) and d > 0) for d in d_grid):
        raise BadDistortion("distortion grid entries must be positive reals")
    if any(b <= a for a, b in zip(d_grid, d_grid[1:])):
        raise BadDistortion("distortion grid must be strictly increasing")
    points = []
    for d in d_grid:
        try:
            sol = nrdf(src, d)
            scheme = realization.build_realization(src, sol)
            r = scheme.r
            up_s = coding.theoretical_upper_bound(sol.rate_bits, r, "sdusq")
            up_v = coding.theoretical_upper_bound(sol.rate_bits, r, "d4")
            points.append(RdPoint(d, sol.rate_bits, up_s, up_v, r))
        except Exception as exc:  # noqa: BLE001 - sweeps survive isolated failures
            from .errors import ZdrdError

            if not isinstance(exc, (ZdrdError, np.linalg.LinAlgError, ArithmeticError)):
                raise
            points.append(
                RdPoint(d, math.nan, math.nan, math.nan, -1, f"failed:{type(exc).__name__}")
            )
    return RdCurve(points=tuple(points))
