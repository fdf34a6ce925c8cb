"""Kink/anti-kink profiles of the reduced traveling-wave equation.

Works with the doubled profile F(s) = 2 f(s) which satisfies the cubic
first integral (F')^2 - chi_tilde (F')^3 = 2 m^2 (1 - cos F).  The
perturbative solution expands F in powers of chi_tilde around the
sine-Gordon kink F0 = 4 arctan(exp(m s)); the exact solver integrates
F' = H(F) by tracking the cubic root connected to the chi_tilde = 0
soliton branch.

The boundary-respecting "piecewise" branch glues the kink (s < 0) to the
anti-kink (s > 0); it is continuous with value pi at s = 0 and carries a
derivative jump there, which is reported rather than smoothed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad, solve_ivp

from .planar_reduction import PlanarConfig, TravelingWaveSetup

BRANCHES = ("kink", "antikink", "piecewise")

# cap on |m s| in exponentials; tanh/sech are saturated long before this
_EXP_CAP = 500.0


class BranchCollisionError(RuntimeError):
    """The tracked cubic root collided with another real root."""

    def __init__(self, omega: float, chi_tilde: float, s: float | None = None):
        self.omega = omega
        self.chi_tilde = chi_tilde
        self.s = s
        where = f" at s = {s:.6g}" if s is not None else ""
        super().__init__(
            f"soliton-branch root of the cubic disappeared{where} "
            f"(omega = {omega:.6g}, chi_tilde = {chi_tilde:.6g})"
        )


def _clip(u):
    return np.clip(u, -_EXP_CAP, _EXP_CAP)


def _kink0(s, m):
    """Kink F0 and its first four s-derivatives (closed forms)."""
    u = _clip(m * np.asarray(s, dtype=float))
    F0 = 4.0 * np.arctan(np.exp(u))
    sech = 1.0 / np.cosh(u)
    tanh = np.tanh(u)
    D = 2.0 * m * sech
    W = -2.0 * m**2 * sech * tanh          # = m^2 sin(F0)
    sinF = -2.0 * sech * tanh
    cosF = 1.0 - 2.0 * sech**2
    W3 = m**2 * cosF * D                    # F0'''
    W4 = m**2 * (-sinF * D**2 + cosF * W)   # F0''''
    return F0, D, W, W3, W4


def _branch0(s, m, branch):
    """F0 data on the requested branch (anti-kink = kink with m -> -m)."""
    if branch == "kink":
        return _kink0(s, m)
    if branch == "antikink":
        F0, D, W, W3, W4 = _kink0(s, -m)
        return F0, D, W, W3, W4
    if branch == "piecewise":
        k = _kink0(s, m)
        a = _kink0(s, -m)
        left = np.asarray(s, dtype=float) < 0.0
        return tuple(np.where(left, kk, aa) for kk, aa in zip(k, a))
    raise ValueError(f"unknown branch {branch!r}; expected one of {BRANCHES}")


def f0(s, m: float, branch: str = "kink"):
    """Zeroth-order profile: 4 arctan(e^{+ms}) (kink), 4 arctan(e^{-ms})
    (anti-kink), or the glued boundary-respecting piecewise form."""
    if m <= 0.0:
        raise ValueError("m must be positive")
    return _branch0(s, m, branch)[0]


def f0_prime(s, m: float, branch: str = "kink"):
    if m <= 0.0:
        raise ValueError("m must be positive")
    return _branch0(s, m, branch)[1]


def f0_second(s, m: float, branch: str = "kink"):
    if m <= 0.0:
        raise ValueError("m must be positive")
    return _branch0(s, m, branch)[2]


def f1(s, m: float):
    """First-order correction m sech(ms)(4 arctan(e^{ms}) - pi).

    Invariant under m -> -m, so the same expression serves the kink, the
    anti-kink and both halves of the piecewise profile.
    """
    if m <= 0.0:
        raise ValueError("m must be positive")
    F0, D, _, _, _ = _kink0(s, m)
    return 0.5 * D * (F0 - np.pi)


def f1_prime(s, m: float):
    F0, D, W, _, _ = _kink0(s, m)
    return 0.5 * W * (F0 - np.pi) + 0.5 * D**2


def f1_second(s, m: float):
    F0, D, W, W3, _ = _kink0(s, m)
    return 0.5 * W3 * (F0 - np.pi) + 1.5 * D * W


def f2(s, m: float, branch: str = "kink"):
    """Second-order correction, in the algebraically expanded form
    F0''/8 [(F0 - pi)^2 - 12] + F0'^2 (F0 - pi) / 4.

    The expansion removes the removable 0/0 of the raw form at s = 0
    (where F0'' vanishes); see f2_direct for the raw expression.  The
    correction is odd under m -> -m, so the piecewise branch uses each
    side's own zeroth-order profile.
    """
    if m <= 0.0:
        raise ValueError("m must be positive")
    F0, D, W, _, _ = _branch0(s, m, branch)
    P = F0 - np.pi
    return 0.125 * W * (P**2 - 12.0) + 0.25 * D**2 * P


def f2_direct(s, m: float, branch: str = "kink"):
    """The raw second-order formula with the 0/0 at s = 0.

    Singular within |m s| < 1e-4; evaluate f2 (the expanded form) there
    instead.  Kept for cross-checking the two expressions agree.
    """
    u = m * np.asarray(s, dtype=float)
    if np.any(np.abs(u) < 1e-4):
        raise ValueError("direct form is 0/0-singular near s = 0; use f2()")
    F0, D, W, _, _ = _branch0(s, m, branch)
    ratio = D**2 / W
    return 0.125 * W * ((F0 + ratio - np.pi) ** 2 - 12.0 - ratio**2)


def f2_prime(s, m: float, branch: str = "kink"):
    F0, D, W, W3, _ = _branch0(s, m, branch)
    P = F0 - np.pi
    return 0.125 * W3 * (P**2 - 12.0) + 0.75 * W * P * D + 0.25 * D**3


def f2_second(s, m: float, branch: str = "kink"):
    F0, D, W, W3, W4 = _branch0(s, m, branch)
    P = F0 - np.pi
    return 0.125 * W4 * (P**2 - 12.0) + P * D * W3 + 0.75 * P * W**2 + 1.5 * D**2 * W


def perturbative_profile(s, m: float, chi_tilde: float, order: int = 1,
                         branch: str = "piecewise"):
    """F(s) truncated at the requested order in chi_tilde (0, 1 or 2)."""
    if order not in (0, 1, 2):
        raise ValueError("order must be 0, 1 or 2")
    F = f0(s, m, branch)
    if order >= 1:
        F = F + chi_tilde * f1(s, m)
    if order >= 2:
        F = F + chi_tilde**2 * f2(s, m, branch)
    return F


def perturbative_profile_prime(s, m, chi_tilde, order=1, branch="piecewise"):
    Fp = f0_prime(s, m, branch)
    if order >= 1:
        Fp = Fp + chi_tilde * f1_prime(s, m)
    if order >= 2:
        Fp = Fp + chi_tilde**2 * f2_prime(s, m, branch)
    return Fp


def perturbative_profile_second(s, m, chi_tilde, order=1, branch="piecewise"):
    Fpp = f0_second(s, m, branch)
    if order >= 1:
        Fpp = Fpp + chi_tilde * f1_second(s, m)
    if order >= 2:
        Fpp = Fpp + chi_tilde**2 * f2_second(s, m, branch)
    return Fpp


def derivative_jump(m: float, chi_tilde: float = 0.0, order: int = 1) -> float:
    """Jump F'(0+) - F'(0-) of the piecewise profile (the glueing is
    continuous but not smooth: the kink side arrives with slope +2m, the
    anti-kink side leaves with -2m; chi_tilde corrections are two-sided
    symmetric at first order and cancel in the jump at s = 0)."""
    jump = -4.0 * m
    if order >= 2:
        # f2 is odd across the split but vanishes at 0; its derivative is
        # continuous at 0 only through the even combination, compute it:
        jump += chi_tilde**2 * (f2_prime(0.0, m, "antikink") - f2_prime(0.0, m, "kink"))
    return float(jump)


def phi_perturbative(z, t, setup: TravelingWaveSetup, order: int = 1,
                     branch: str = "piecewise"):
    """Rotation angle phi(z, t) = F(z - v t) / 2 of the traveling wave."""
    s = np.asarray(z, dtype=float) - setup.v * t
    return 0.5 * perturbative_profile(s, setup.m, setup.chi_tilde, order, branch)


def psi_strain(z, t, setup: TravelingWaveSetup, phi_evaluator=None,
               order: int = 1, branch: str = "piecewise"):
    """Longitudinal strain g' = 2 lam cos(phi) / (rho v^2 - lam - 2 mu) + C1
    of the traveling wave; phi defaults to the perturbative profile."""
    params = setup.params
    gap = params.rho * setup.v**2 - (params.lam + 2.0 * params.mu)
    if phi_evaluator is None:
        phi = phi_perturbative(z, t, setup, order, branch)
    else:
        phi = phi_evaluator(z, t)
    return 2.0 * params.lam / gap * np.cos(phi) + setup.c1


def traveling_config(setup: TravelingWaveSetup, order: int = 1,
                     branch: str = "piecewise") -> PlanarConfig:
    """PlanarConfig of the perturbative traveling pair with analytic
    derivative closures (phi from the profile, psi from its strain g')."""
    m, ct, v = setup.m, setup.chi_tilde, setup.v
    params = setup.params
    q = 2.0 * params.lam / (params.rho * v**2 - (params.lam + 2.0 * params.mu))

    def s_of(z, t):
        return z - v * t

    def phi(z, t):
        return 0.5 * perturbative_profile(s_of(z, t), m, ct, order, branch)

    def fp(z, t):
        return perturbative_profile_prime(s_of(z, t), m, ct, order, branch)

    def fpp(z, t):
        return perturbative_profile_second(s_of(z, t), m, ct, order, branch)

    def gprime(z, t):
        return q * np.cos(phi(z, t)) + setup.c1

    def gsecond(z, t):
        return -q * np.sin(phi(z, t)) * 0.5 * fp(z, t)

    def psi(z, t):
        val, _ = quad(lambda sig: q * np.cos(
            0.5 * perturbative_profile(sig, m, ct, order, branch)) + setup.c1,
            0.0, s_of(z, t), limit=200)
        return val

    derivatives = {
        "phi_z": lambda z, t: 0.5 * fp(z, t),
        "phi_t": lambda z, t: -0.5 * v * fp(z, t),
        "phi_zz": lambda z, t: 0.5 * fpp(z, t),
        "phi_tt": lambda z, t: 0.5 * v**2 * fpp(z, t),
        "psi_z": gprime,
        "psi_t": lambda z, t: -v * gprime(z, t),
        "psi_zz": gsecond,
        "psi_tt": lambda z, t: v**2 * gsecond(z, t),
    }
    return PlanarConfig(phi=phi, psi=psi, derivatives=derivatives)


# ---------------------------------------------------------------------------
# Numerically exact traveling profile
# ---------------------------------------------------------------------------


def soliton_branch_root(omega: float, chi_tilde: float, side: int,
                        predictor: float | None = None) -> float:
    """Real root of chi_tilde y^3 - y^2 + omega = 0 on the soliton branch.

    `side` is +1 (kink, F' > 0) or -1 (anti-kink).  The branch is the
    root continuously connected to side * sqrt(omega) at chi_tilde = 0;
    on the bounded side (side * chi_tilde > 0) it exists only while
    omega <= 4 / (27 chi_tilde^2), beyond which the root collides with
    the far root and BranchCollisionError is raised.
    """
    omega = max(float(omega), 0.0)
    if abs(chi_tilde) < 1e-300:
        return side * np.sqrt(omega)
    if side * chi_tilde > 0.0:
        omega_crit = 4.0 / (27.0 * chi_tilde**2)
        if omega > omega_crit * (1.0 + 1e-12):
            raise BranchCollisionError(omega, chi_tilde)
    roots = np.roots([chi_tilde, -1.0, 0.0, omega])
    real = roots[np.abs(roots.imag) < 1e-8 * (1.0 + np.abs(roots))].real
    candidates = [y for y in real if side * y >= 0.0]
    if not candidates:
        raise BranchCollisionError(omega, chi_tilde)
    if predictor is not None:
        y = min(candidates, key=lambda r: abs(r - predictor))
    else:
        y = min(candidates, key=abs)
    # one Newton polish on the cubic
    fval = chi_tilde * y**3 - y**2 + omega
    fder = 3.0 * chi_tilde * y**2 - 2.0 * y
    if fder != 0.0:
        y -= fval / fder
    return float(y)


@dataclass
class ExactProfile:
    """Sampled numerically exact profile (s, F, F') of the first integral."""

    s: np.ndarray
    F: np.ndarray
    Fp: np.ndarray
    m: float
    chi_tilde: float
    branch: str
    rtol: float
    derivative_jump: float | None = None

    def first_integral_residuals(self) -> np.ndarray:
        return (
            self.Fp**2
            - self.chi_tilde * self.Fp**3
            - 2.0 * self.m**2 * (1.0 - np.cos(self.F))
        )


def exact_profile(setup: TravelingWaveSetup, s_range=(-8.0, 8.0),
                  n_samples: int = 401, branch: str = "piecewise",
                  rtol: float = 1e-12, atol: float = 1e-13,
                  method: str = "DOP853") -> ExactProfile:
    """Integrate F' = H(F) from F(0) = pi with adaptive error control.

    H(F) is the tracked soliton-branch root of the cubic first integral.
    Raises BranchCollisionError (with the offending s) if chi_tilde is
    large enough for the branch to disappear along the way.
    """
    if setup.m_sq <= 0.0:
        raise ValueError("exact_profile requires the soliton regime m_sq > 0")
    if branch not in BRANCHES:
        raise ValueError(f"unknown branch {branch!r}")
    m, ct = setup.m, setup.chi_tilde
    s_lo, s_hi = map(float, s_range)
    if not s_lo < 0.0 < s_hi:
        raise ValueError("s_range must straddle 0 (the profile is seeded at s = 0)")
    s = np.linspace(s_lo, s_hi, int(n_samples))

    def omega(F):
        return 2.0 * m**2 * (1.0 - np.cos(F))

    def integrate(side: int, span):
        state = {"last": side * 2.0 * m}

        def rhs(sv, y):
            try:
                root = soliton_branch_root(omega(y[0]), ct, side, state["last"])
            except BranchCollisionError as err:
                raise BranchCollisionError(err.omega, ct, s=sv) from None
            state["last"] = root
            return [root]

        sol = solve_ivp(rhs, span, [np.pi], method=method, rtol=rtol, atol=atol,
                        dense_output=True)
        if not sol.success:
            raise RuntimeError(f"profile integration failed: {sol.message}")
        return sol

    def eval_branch(side: int, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        F = np.full(pts.shape, np.pi)
        fwd = pts > 0.0
        bwd = pts < 0.0
        if np.any(fwd):
            sol = integrate(side, (0.0, max(s_hi, float(pts[fwd].max()))))
            F[fwd] = sol.sol(pts[fwd])[0]
        if np.any(bwd):
            sol = integrate(side, (0.0, min(s_lo, float(pts[bwd].min()))))
            F[bwd] = sol.sol(pts[bwd])[0]
        Fp = np.array([soliton_branch_root(omega(fv), ct, side) for fv in F])
        return F, Fp

    jump = None
    if branch == "kink":
        F, Fp = eval_branch(+1, s)
    elif branch == "antikink":
        F, Fp = eval_branch(-1, s)
    else:
        left = s < 0.0
        F = np.full(s.shape, np.pi)
        Fp = np.zeros(s.shape)
        Fk, Fpk = eval_branch(+1, s[left])
        F[left], Fp[left] = Fk, Fpk
        right = ~left
        Fa, Fpa = eval_branch(-1, s[right])
        F[right], Fp[right] = Fa, Fpa
        jump = (
            soliton_branch_root(omega(np.pi), ct, -1)
            - soliton_branch_root(omega(np.pi), ct, +1)
        )
    return ExactProfile(s=s, F=F, Fp=Fp, m=m, chi_tilde=ct, branch=branch,
                        rtol=rtol, derivative_jump=jump)
