"""Expression trees for pointwise (elementwise) nonlinear discretizations.

A tree built from linear maps of the state, elementwise products, powers and
functions evaluates to a length-n vector.  Its exact Jacobian falls out of the
scalar chain rule applied with row scaling: d/dU of (A U) o (B U) is
row_scale(A, B U) + row_scale(B, A U), and so on for powers, sin, cos, exp.

Polynomial trees of total degree <= 3 can be lowered to an equivalent
PolySystem for cross-checks and for the linear-form machinery.
"""

from dataclasses import dataclass, field

import numpy as np

from .hadamard import row_scale
from .system import PolySystem

__all__ = [
    "HExpr",
    "State",
    "LinearMap",
    "HadamardProduct",
    "HadamardPower",
    "ElementwiseFunction",
    "DiagScale",
    "Sum",
    "SemiDiscreteIVP",
    "h_eval",
    "h_jacobian",
    "burgers_discretize",
    "lower_to_poly",
    "load_hexpr_json",
]


class HExpr:
    """Base class for expression-tree nodes."""


@dataclass(frozen=True)
class State(HExpr):
    """The state vector U itself."""


@dataclass(frozen=True)
class LinearMap(HExpr):
    """A @ child, with A acting on the child's value."""

    A: np.ndarray
    child: HExpr = field(default_factory=State)

    def __post_init__(self):
        object.__setattr__(self, "A", np.asarray(self.A, dtype=float))


@dataclass(frozen=True)
class HadamardProduct(HExpr):
    """Elementwise product of the children's values."""

    children: tuple

    def __init__(self, *children):
        if len(children) == 1 and isinstance(children[0], (list, tuple)):
            children = tuple(children[0])
        object.__setattr__(self, "children", tuple(children))


@dataclass(frozen=True)
class HadamardPower(HExpr):
    """Elementwise power child**q."""

    child: HExpr
    q: float


_FUNCS = {
    "sin": (np.sin, lambda x: np.cos(x)),
    "cos": (np.cos, lambda x: -np.sin(x)),
    "exp": (np.exp, np.exp),
}


@dataclass(frozen=True)
class ElementwiseFunction(HExpr):
    """Elementwise scalar function of the child; one of sin, cos, exp."""

    name: str
    child: HExpr

    def __post_init__(self):
        if self.name not in _FUNCS:
            raise ValueError(f"unsupported function {self.name!r}; use sin, cos or exp")


@dataclass(frozen=True)
class DiagScale(HExpr):
    """Fixed coefficient vector c times the child, elementwise."""

    c: np.ndarray
    child: HExpr

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float).ravel())


@dataclass(frozen=True)
class Sum(HExpr):
    """Weighted sum of the children's values."""

    children: tuple
    weights: tuple = None

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        w = self.weights
        if w is None:
            w = (1.0,) * len(self.children)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))
        if len(self.weights) != len(self.children):
            raise ValueError("weights and children length mismatch")


def h_eval(e, U):
    """Evaluate an expression tree at state U."""
    U = np.asarray(U, dtype=float).ravel()
    return _eval(e, U)


def _eval(e, U):
    if isinstance(e, State):
        return U
    if isinstance(e, LinearMap):
        return e.A @ _eval(e.child, U)
    if isinstance(e, HadamardProduct):
        out = _eval(e.children[0], U)
        for c in e.children[1:]:
            out = out * _eval(c, U)
        return out
    if isinstance(e, HadamardPower):
        v = _eval(e.child, U)
        q = e.q
        if q != int(q) and np.any(v < 0):
            raise ValueError(f"fractional power {q} of negative entry")
        if q < 0 and np.any(v == 0):
            raise ValueError(f"negative power {q} of zero entry")
        return np.ones_like(v) if q == 0 else np.power(v, q)
    if isinstance(e, ElementwiseFunction):
        return _FUNCS[e.name][0](_eval(e.child, U))
    if isinstance(e, DiagScale):
        return e.c * _eval(e.child, U)
    if isinstance(e, Sum):
        return sum(w * _eval(c, U) for w, c in zip(e.weights, e.children))
    raise TypeError(f"unknown node {type(e).__name__}")


def h_jacobian(e, U):
    """Exact Jacobian of h_eval(e, .) at U, via chain rules with row scaling."""
    U = np.asarray(U, dtype=float).ravel()
    return _jac(e, U)


def _jac(e, U):
    n = U.size
    if isinstance(e, State):
        return np.eye(n)
    if isinstance(e, LinearMap):
        return e.A @ _jac(e.child, U)
    if isinstance(e, HadamardProduct):
        vals = [_eval(c, U) for c in e.children]
        jacs = [_jac(c, U) for c in e.children]
        total = np.zeros((vals[0].size, n))
        for i in range(len(vals)):
            others = np.ones_like(vals[0])
            for j, v in enumerate(vals):
                if j != i:
                    others = others * v
            total += row_scale(jacs[i], others)
        return total
    if isinstance(e, HadamardPower):
        v = _eval(e.child, U)
        q = e.q
        if q == 0:
            return np.zeros((v.size, n))
        deriv = q * np.power(v, q - 1)
        return row_scale(_jac(e.child, U), deriv)
    if isinstance(e, ElementwiseFunction):
        v = _eval(e.child, U)
        return row_scale(_jac(e.child, U), _FUNCS[e.name][1](v))
    if isinstance(e, DiagScale):
        return row_scale(_jac(e.child, U), e.c)
    if isinstance(e, Sum):
        return sum(w * _jac(c, U) for w, c in zip(e.weights, e.children))
    raise TypeError(f"unknown node {type(e).__name__}")


@dataclass(frozen=True)
class SemiDiscreteIVP:
    """A method-of-lines system dU/dt = rhs(U) of dimension n.

    The optional matrix fields are populated by discretizers whose a-priori
    step-size bounds need them (see burgers_discretize).
    """

    n: int
    rhs: HExpr
    description: str = ""
    first_diff: np.ndarray = None
    second_diff: np.ndarray = None
    reynolds: float = None


def _periodic_first_diff(n, dx):
    A = np.zeros((n, n))
    for i in range(n):
        A[i, (i + 1) % n] = 1.0 / (2.0 * dx)
        A[i, (i - 1) % n] = -1.0 / (2.0 * dx)
    return A


def _periodic_second_diff(n, dx):
    B = np.zeros((n, n))
    for i in range(n):
        B[i, i] = -2.0 / dx**2
        B[i, (i + 1) % n] = 1.0 / dx**2
        B[i, (i - 1) % n] = 1.0 / dx**2
    return B


def burgers_discretize(n, Re):
    """Central-difference Burgers semi-discretization on a periodic unit domain.

    rhs(U) = (1/Re) B U - U o (A U) with A the central first-difference and B
    the central second-difference matrix, spacing dx = 1/n.  The boundary
    treatment (periodic) and spacing are implementation choices; they keep the
    difference matrices circulant so constants are annihilated exactly.
    """
    if n < 4:
        raise ValueError(f"grid too small: n={n} < 4")
    if Re <= 0:
        raise ValueError(f"Reynolds number must be positive, got {Re}")
    dx = 1.0 / n
    A = _periodic_first_diff(n, dx)
    B = _periodic_second_diff(n, dx)
    rhs = Sum(
        children=(
            LinearMap(B / Re),
            HadamardProduct(State(), LinearMap(A)),
        ),
        weights=(1.0, -1.0),
    )
    return SemiDiscreteIVP(
        n=n,
        rhs=rhs,
        description=f"periodic Burgers, n={n}, Re={Re}",
        first_diff=A,
        second_diff=B,
        reynolds=float(Re),
    )


class _PolyRep:
    """Per-row scalar polynomials up to degree 3 in the state."""

    def __init__(self, c0, lin, quad, cub):
        self.c0 = c0
        self.lin = lin
        self.quad = quad
        self.cub = cub

    @property
    def degree(self):
        if np.any(self.cub):
            return 3
        if np.any(self.quad):
            return 2
        if np.any(self.lin):
            return 1
        return 0

    @classmethod
    def zeros(cls, m, n):
        return cls(np.zeros(m), np.zeros((m, n)), np.zeros((m, n, n)), np.zeros((m, n, n, n)))


def _sym2(t):
    return 0.5 * (t + np.swapaxes(t, 1, 2))


def _sym3(t):
    perms = [(0, 1, 2, 3), (0, 1, 3, 2), (0, 2, 1, 3), (0, 2, 3, 1), (0, 3, 1, 2), (0, 3, 2, 1)]
    return sum(np.transpose(t, p) for p in perms) / 6.0


def _rep_product(a, b, n):
    if a.degree + b.degree > 3:
        raise ValueError("non-polynomial or degree > 3: product exceeds cubic")
    m = a.c0.size
    out = _PolyRep.zeros(m, n)
    out.c0 = a.c0 * b.c0
    out.lin = a.c0[:, None] * b.lin + b.c0[:, None] * a.lin
    cross2 = np.einsum("ij,ik->ijk", a.lin, b.lin)
    out.quad = _sym2(a.c0[:, None, None] * b.quad + b.c0[:, None, None] * a.quad + cross2)
    cross3 = np.einsum("ij,ikl->ijkl", a.lin, b.quad) + np.einsum("ij,ikl->ijkl", b.lin, a.quad)
    out.cub = _sym3(a.c0[:, None, None, None] * b.cub + b.c0[:, None, None, None] * a.cub + cross3)
    return out


def _lower(e, n):
    if isinstance(e, State):
        r = _PolyRep.zeros(n, n)
        r.lin = np.eye(n)
        return r
    if isinstance(e, LinearMap):
        c = _lower(e.child, n)
        A = e.A
        return _PolyRep(
            A @ c.c0,
            A @ c.lin,
            np.einsum("ia,ajk->ijk", A, c.quad),
            np.einsum("ia,ajkl->ijkl", A, c.cub),
        )
    if isinstance(e, DiagScale):
        c = _lower(e.child, n)
        d = e.c
        return _PolyRep(
            d * c.c0,
            d[:, None] * c.lin,
            d[:, None, None] * c.quad,
            d[:, None, None, None] * c.cub,
        )
    if isinstance(e, Sum):
        reps = [_lower(ch, n) for ch in e.children]
        out = _PolyRep.zeros(reps[0].c0.size, n)
        for w, r in zip(e.weights, reps):
            out.c0 = out.c0 + w * r.c0
            out.lin = out.lin + w * r.lin
            out.quad = out.quad + w * r.quad
            out.cub = out.cub + w * r.cub
        return out
    if isinstance(e, HadamardProduct):
        reps = [_lower(ch, n) for ch in e.children]
        out = reps[0]
        for r in reps[1:]:
            out = _rep_product(out, r, n)
        return out
    if isinstance(e, HadamardPower):
        q = e.q
        if q != int(q) or q < 0 or q > 3:
            raise ValueError(f"non-polynomial: elementwise power {q}")
        m = int(q)
        base = _lower(e.child, n)
        if m == 0:
            out = _PolyRep.zeros(base.c0.size, n)
            out.c0 = np.ones_like(base.c0)
            return out
        out = base
        for _ in range(m - 1):
            out = _rep_product(out, base, n)
        return out
    if isinstance(e, ElementwiseFunction):
        raise ValueError(f"non-polynomial node: elementwise {e.name}")
    raise TypeError(f"unknown node {type(e).__name__}")


def _infer_dim(e):
    if isinstance(e, LinearMap):
        return e.A.shape[1] if isinstance(e.child, State) else _infer_dim(e.child) or e.A.shape[1]
    if isinstance(e, DiagScale):
        return _infer_dim(e.child) or e.c.size
    if isinstance(e, (HadamardProduct, Sum)):
        for c in e.children:
            d = _infer_dim(c)
            if d is not None:
                return d
        return None
    if isinstance(e, (HadamardPower, ElementwiseFunction)):
        return _infer_dim(e.child)
    return None


def lower_to_poly(e, n=None):
    """Lower a polynomial expression tree (degree <= 3) to a PolySystem.

    Raises on non-polynomial nodes (elementwise functions, fractional or
    negative powers) and on total degree above 3.
    """
    if n is None:
        n = _infer_dim(e)
        if n is None:
            raise ValueError("cannot infer dimension; pass n explicitly")
    rep = _lower(e, n)
    if rep.c0.size != n:
        raise ValueError(f"tree evaluates to length {rep.c0.size}, expected {n}")
    return PolySystem(L=rep.lin, quad=rep.quad, cubic=rep.cub, const=rep.c0)


def load_hexpr_json(data):
    """Build an expression tree from its nested-JSON description.

    Nodes are objects {"op": ...} with op one of state, linear, hproduct,
    hpower, hfunction, diagscale, sum; matrices are inline dense lists.
    """
    if isinstance(data, (str, bytes)):
        import json

        data = json.loads(data)
    op = data.get("op")
    if op == "state":
        return State()
    if op == "linear":
        child = load_hexpr_json(data["child"]) if "child" in data else State()
        return LinearMap(np.asarray(data["matrix"], dtype=float), child)
    if op == "hproduct":
        return HadamardProduct(*[load_hexpr_json(c) for c in data["children"]])
    if op == "hpower":
        return HadamardPower(load_hexpr_json(data["child"]), float(data["exponent"]))
    if op == "hfunction":
        return ElementwiseFunction(data["name"], load_hexpr_json(data["child"]))
    if op == "diagscale":
        return DiagScale(np.asarray(data["scale"], dtype=float), load_hexpr_json(data["child"]))
    if op == "sum":
        children = [load_hexpr_json(c) for c in data["children"]]
        weights = data.get("weights")
        return Sum(children=tuple(children), weights=None if weights is None else tuple(weights))
    raise ValueError(f"unknown expression op {op!r}")
