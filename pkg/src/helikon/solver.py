"""Parametrized Weierstrass families and the period-problem driver.

A FamilySpec bundles a parameter layout, a constructor mapping parameter
vectors to Weierstrass data, and a list of residual conditions (period
closure on cycles, puncture regularity).  solve() runs damped Newton with a
finite-difference Jacobian and a Levenberg-Marquardt fallback, accepting
only norm-decreasing steps.
"""

import cmath
import warnings
from dataclasses import dataclass, field

import numpy as np

from .divisor import (
    check_abel,
    exp_factor_coefficient,
    laurent_coefficient,
    residue,
)
from .errors import CoincidentPoints, SingularJacobian
from .expr import (
    Const,
    Exp,
    Expr,
    FormExpr,
    SigmaB,
    Torus,
    Var,
    ZetaB,
    add,
    div,
    eval_expr,
    mul,
    sub,
)
from .kernels import reduce_to_cell
from .lattice import Lattice
from .paths import integrate_path, polyline
from .surface import CycleBasis, WeierstrassData, period_report

FD_STEP = 1e-6


# ---------------------------------------------------------------------------
# residual conditions


@dataclass(frozen=True)
class HorizontalPeriod:
    """Closure of the horizontal periods on one cycle:
    oint g dh - conj(oint g^-1 dh) = target (two real components)."""

    cycle: object
    label: str = "cycle"
    target: complex = 0.0

    def evaluate(self, data, tol):
        g, ginv, h = data.g, data.g_inv(), data.dh.coeff
        p_plus = integrate_path(lambda z: eval_expr(g * h, z), self.cycle, tol)
        p_minus = integrate_path(
            lambda z: eval_expr(ginv * h, z), self.cycle, tol
        )
        r = p_plus - p_minus.conjugate() - self.target
        return [r.real, r.imag]


@dataclass(frozen=True)
class VerticalPeriod:
    """Re oint dh = target on one cycle (one real component)."""

    cycle: object
    label: str = "cycle"
    target: float = 0.0

    def evaluate(self, data, tol):
        h = data.dh.coeff
        p3 = integrate_path(lambda z: eval_expr(h, z), self.cycle, tol)
        return [p3.real - self.target]


@dataclass(frozen=True)
class AsymptoticRegularity:
    """asymptotic_residual at the declared punctures (one real component)."""

    radius: float = 0.08
    target: float = 0.0

    def evaluate(self, data, tol):
        val = asymptotic_residual(
            data, data.domain.punctures, radius=self.radius
        )
        return [val - self.target]


@dataclass
class FamilySpec:
    """Parameter layout + constructor + residual list for one family.

    parameters: list of (name, kind) with kind "real" or "complex"; the
    solver works on the flattened real vector (complex parameters occupy two
    consecutive slots).  constructor maps a {name: value} dict to
    WeierstrassData.  residuals is a nonempty list of condition objects with
    an evaluate(data, tol) method.
    """

    parameters: list
    constructor: object
    residuals: list
    quad_tol: float = 1e-10
    guard: object = None  # optional params-dict -> bool feasibility check

    def __post_init__(self):
        if not self.residuals:
            raise ValueError("residual list must be nonempty")

    def n_real(self):
        return sum(2 if kind == "complex" else 1 for _, kind in self.parameters)

    def unpack(self, x):
        """Flat real vector -> {name: value} dict."""
        x = np.asarray(x, dtype=float)
        if x.size != self.n_real():
            raise ValueError(
                f"parameter vector has {x.size} entries, expected {self.n_real()}"
            )
        out = {}
        i = 0
        for name, kind in self.parameters:
            if kind == "complex":
                out[name] = complex(x[i], x[i + 1])
                i += 2
            else:
                out[name] = float(x[i])
                i += 1
        return out

    def pack(self, params):
        """{name: value} dict -> flat real vector."""
        vals = []
        for name, kind in self.parameters:
            v = params[name]
            if kind == "complex":
                v = complex(v)
                vals.extend([v.real, v.imag])
            else:
                vals.append(float(v))
        return np.array(vals)

    def build(self, x):
        return self.constructor(self.unpack(x))

    def residual_vector(self, x):
        params = self.unpack(x)
        if self.guard is not None and not self.guard(params):
            raise CoincidentPoints("parameters left the feasible box")
        data = self.constructor(params)
        comps = []
        for cond in self.residuals:
            comps.extend(cond.evaluate(data, self.quad_tol))
        return np.array(comps)

    def cycle_basis(self, lattice=None):
        cycles, labels = [], []
        for cond in self.residuals:
            cyc = getattr(cond, "cycle", None)
            if cyc is not None and cyc not in cycles:
                cycles.append(cyc)
                labels.append(getattr(cond, "label", f"cycle{len(labels)}"))
        if not cycles:
            return None
        return CycleBasis(cycles=cycles, labels=labels, lattice=lattice)


# ---------------------------------------------------------------------------
# the periodic genus-one helicoid family


def periodic_g1h_family(params):
    """Weierstrass data for the periodic genus-one helicoid family.

    params: {tau, E1, E2, zero_shifts, pole_shifts, a, rho, c, basepoint}.
    E2 defaults to -E1; a (the exponential coefficient making g elliptic)
    defaults to the unique Abel correction.  dh = -i(zeta(u-E1) -
    zeta(u-E2)) du + c du carries residues -i, +i by construction; g =
    rho * exp(a u) * prod sigma(u - z_i) / prod sigma(u - w_j).
    """
    tau = complex(params.get("tau", 1j))
    lat = Lattice(tau)
    E1 = complex(params["E1"])
    E2 = complex(params.get("E2", -E1))
    if lat.same_point(E1, E2, 1e-10):
        raise CoincidentPoints(f"E1 = {E1} and E2 = {E2} coincide mod the lattice")
    zeros = [E1] + [complex(z) for z in params.get("zero_shifts", ())]
    poles = [E2] + [complex(w) for w in params.get("pole_shifts", ())]

    # cancel removable factors sigma(u-z)/sigma(u-w) with z = w
    for z in list(zeros):
        for w in list(poles):
            if lat.same_point(z, w, 1e-12):
                warnings.warn(
                    f"degenerate zero/pole pair at {z} cancelled", stacklevel=2
                )
                zeros.remove(z)
                poles.remove(w)
                break

    a = params.get("a")
    if a is None:
        a = exp_factor_coefficient(zeros, poles, lat)
    else:
        check_abel(zeros, poles, lat)
        a = complex(a)
    rho = complex(params.get("rho", 1.0))

    dom = Torus(lat, (E1, E2))
    gnode = Const(rho)
    if a != 0:
        gnode = mul(gnode, Exp(mul(Const(a), Var())))
    for z in zeros:
        gnode = mul(gnode, SigmaB(z))
    for w in poles:
        gnode = div(gnode, SigmaB(w))
    g = Expr(gnode, dom)

    c = complex(params.get("c", 0.0))
    dhnode = add(
        mul(Const(-1j), sub(ZetaB(E1), ZetaB(E2))), Const(c)
    )
    dh = FormExpr(Expr(dhnode, dom))
    return WeierstrassData(
        g=g,
        dh=dh,
        basepoint=complex(params.get("basepoint", 0.21 + 0.43j)),
        label="periodic-g1h",
    )


def asymptotic_residual(data, punctures, radius=0.08):
    """Helicoidal-end regularity defect: max over punctures of
    |residue(dg/g - i dh)| + |a_-2| of the same form.

    Zero means dg/g - i dh extends holomorphically across the punctures
    (scale-one helicoid asymptotics)."""
    omega = data.log_gauss_form() + data.dh.scale(-1j)
    worst = 0.0
    for p in punctures:
        p = complex(p)
        res = residue(omega, p, radius)
        a2 = laurent_coefficient(omega, p, -2, radius=radius)
        worst = max(worst, abs(res) + abs(a2))
    return worst


def standard_g1h_family(tau=1j, shift=None, cycle_base=-0.4871 - 0.3631j,
                        quad_tol=1e-10, min_separation=0.08):
    """The symmetric one-pair family solved by the bundled scene.

    Parameters (E1 complex, rho real, c complex); E2 = -E1, auxiliary zero
    at -E1 - shift and pole at its negative so Abel holds for every E1.
    Residuals: horizontal period closure on both torus generators plus
    asymptotic regularity at the punctures.  The vertical periods encode
    the screw motion and are deliberately left open.
    """
    tau = complex(tau)
    if shift is None:
        shift = 0.5 + 0.5 * tau
    lat = Lattice(tau)
    b = complex(cycle_base)
    cyc_a = polyline([b, b + 1])
    cyc_b = polyline([b, b + tau])

    def constructor(params):
        E1 = complex(params["E1"])
        return periodic_g1h_family(
            {
                "tau": tau,
                "E1": E1,
                "zero_shifts": [-E1 - shift],
                "pole_shifts": [E1 + shift],
                "rho": params["rho"],
                "c": params["c"],
            }
        )

    def guard(params):
        E1 = complex(params["E1"])
        if params["rho"] < 0.05:
            return False
        # punctures must stay separated (2 E1 away from the lattice)
        sep = min(
            abs(reduce_to_cell(2 * E1 + off, tau)[0])
            for off in (0, -1, -tau, -1 - tau)
        )
        return sep >= min_separation

    return FamilySpec(
        parameters=[("E1", "complex"), ("rho", "real"), ("c", "complex")],
        constructor=constructor,
        residuals=[
            HorizontalPeriod(cyc_a, label="A"),
            HorizontalPeriod(cyc_b, label="B"),
            AsymptoticRegularity(),
        ],
        quad_tol=quad_tol,
        guard=guard,
    )


# ---------------------------------------------------------------------------
# the driver


@dataclass
class SolveResult:
    params: np.ndarray
    history: list = field(default_factory=list)
    report: object = None
    converged: bool = False
    iterations: int = 0

    @property
    def final_norm(self):
        return self.history[-1] if self.history else float("inf")


def _jacobian(family, x, r0):
    """Finite-difference Jacobian, one column per real parameter slot."""
    n = x.size
    J = np.empty((r0.size, n))
    for j in range(n):
        xp = x.copy()
        xp[j] += FD_STEP
        J[:, j] = (family.residual_vector(xp) - r0) / FD_STEP
    return J


def solve(family, init, tol=1e-8, max_iter=50):
    """Drive the family's residual vector to zero.

    Damped Newton on the flattened real parameters; when the full Newton
    step fails to decrease the norm it is halved (up to 12 times), and when
    even that stalls a Levenberg-Marquardt step with increasing damping is
    tried.  Only norm-decreasing steps are accepted, so the recorded history
    is monotone.  Raises SingularJacobian when no descent direction can be
    produced; otherwise returns SolveResult with converged = final norm <
    tol (recomputed from scratch, not cached).
    """
    x = np.asarray(
        init if not isinstance(init, dict) else family.pack(init), dtype=float
    ).copy()
    r = family.residual_vector(x)
    norm = float(np.linalg.norm(r))
    history = [norm]
    iterations = 0

    for _ in range(max_iter):
        if norm < tol:
            break
        J = _jacobian(family, x, r)
        if not np.all(np.isfinite(J)):
            raise SingularJacobian("non-finite Jacobian entries")
        step, *_ = np.linalg.lstsq(J, -r, rcond=None)
        accepted = False
        # damped Newton: full step, then halving
        scale = 1.0
        for _ in range(12):
            try:
                r_new = family.residual_vector(x + scale * step)
            except Exception:
                scale *= 0.5
                continue
            n_new = float(np.linalg.norm(r_new))
            if n_new < norm:
                x = x + scale * step
                r, norm = r_new, n_new
                accepted = True
                break
            scale *= 0.5
        if not accepted:
            # Levenberg-Marquardt fallback with increasing damping
            JtJ = J.T @ J
            Jtr = J.T @ r
            mu = 1e-4 * max(np.trace(JtJ) / max(J.shape[1], 1), 1e-30)
            for _ in range(20):
                try:
                    lm = np.linalg.solve(JtJ + mu * np.eye(J.shape[1]), -Jtr)
                    r_new = family.residual_vector(x + lm)
                    n_new = float(np.linalg.norm(r_new))
                except Exception:
                    mu *= 10.0
                    continue
                if n_new < norm:
                    x = x + lm
                    r, norm = r_new, n_new
                    accepted = True
                    break
                mu *= 10.0
            if not accepted:
                if norm >= tol:
                    raise SingularJacobian(
                        f"Newton and LM both stalled at residual norm {norm:.3g}"
                    )
                break
        iterations += 1
        history.append(norm)

    # recompute the final residual from scratch; never trust the cache
    final_norm = float(np.linalg.norm(family.residual_vector(x)))
    history[-1] = final_norm
    data = family.build(x)
    basis = family.cycle_basis(lattice=data.domain.lattice)
    report = (
        period_report(data, basis, tol=max(tol, family.quad_tol))
        if basis is not None
        else None
    )
    return SolveResult(
        params=x,
        history=history,
        report=report,
        converged=final_norm < tol,
        iterations=iterations,
    )
