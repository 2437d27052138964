"""Semi-discrete FEM models: assembly, input factorization, homogenization.

A transient problem arrives either as a heat-type first-order system
(C_th * T' + K_th * T = f) or a dynamics-type second-order system
(M u'' + C u' + K u = f).  Forcing is factorized into terms f0 * eta(t)
where each eta solves a small autonomous ODE (constant, exponential or
sinusoid), so the full problem can be rewritten as one autonomous system
x' = A x with a set-valued initial state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .errors import ConfigError, DimensionError, SingularMatrixError
from .sets import ConvexSet, Hyperrectangle, Zonotope, cartesian_product


def _is_sparse(matrix) -> bool:
    return scipy.sparse.issparse(matrix)


def _square_size(matrix, name: str) -> int:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {matrix.shape}")
    return matrix.shape[0]


def solve_columns(matrix, rhs) -> np.ndarray:
    """Solve matrix @ X = rhs with a single factorization (never via inverse)."""
    rhs = np.asarray(rhs, dtype=float)
    try:
        if _is_sparse(matrix):
            lu = scipy.sparse.linalg.splu(scipy.sparse.csc_matrix(matrix))
            return lu.solve(rhs)
        return np.linalg.solve(np.asarray(matrix, dtype=float), rhs)
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise SingularMatrixError(f"matrix factorization failed: {exc}") from exc


# ---------------------------------------------------------------------------
# input terms
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class InputTerm:
    """One forcing term f0 * eta(t), with eta the first state of xi' = B xi."""

    f0: np.ndarray
    generator: np.ndarray
    initial: ConvexSet
    label: str = ""

    def __post_init__(self):
        f0 = np.array(self.f0, dtype=float)
        mat = np.array(self.generator, dtype=float)
        if f0.ndim != 1:
            raise DimensionError("f0 must be a vector")
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError("input generator matrix must be square")
        if self.initial.dim != mat.shape[0]:
            raise DimensionError("input initial set must match the generator matrix size")
        f0.setflags(write=False)
        mat.setflags(write=False)
        object.__setattr__(self, "f0", f0)
        object.__setattr__(self, "generator", mat)

    @property
    def order(self) -> int:
        return self.generator.shape[0]


def _initial_from_values(values, radii) -> ConvexSet:
    values = np.atleast_1d(np.asarray(values, dtype=float))
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if np.all(radii == 0.0):
        return Zonotope.singleton(values)
    return Hyperrectangle(values, radii)


def constant_input(f0, value: float = 1.0, half_width: float = 0.0) -> InputTerm:
    """f(t) = f0 * c with c constant (possibly an interval of constants)."""
    return InputTerm(f0, [[0.0]], _initial_from_values([value], [half_width]), "constant")


def exponential_input(f0, rate: float, value: float, half_width: float = 0.0) -> InputTerm:
    """f(t) = f0 * c * exp(rate * t)."""
    return InputTerm(f0, [[rate]], _initial_from_values([value], [half_width]), "exponential")


def sinusoid_input(
    f0,
    omega: float,
    value: float,
    slope: float = 0.0,
    half_widths: tuple = (0.0, 0.0),
) -> InputTerm:
    """f(t) = f0 * eta(t) with eta'' = -omega^2 eta, eta(0)=value, eta'(0)=slope."""
    if omega <= 0.0:
        raise ValueError("sinusoid frequency must be positive")
    matrix = [[0.0, 1.0], [-omega * omega, 0.0]]
    return InputTerm(f0, matrix, _initial_from_values([value, slope], half_widths), "sinusoid")


# ---------------------------------------------------------------------------
# assembled systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SecondOrderSystem:
    """Assembled matrices of a transient FEM problem plus its forcing terms.

    kind is "heat" (damping = capacity C_th, stiffness = conductivity K_th,
    no mass) or "dynamics" (mass M, damping C or None for undamped,
    stiffness K).
    """

    kind: str
    stiffness: object
    damping: object = None
    mass: object = None
    inputs: tuple = ()

    def __post_init__(self):
        if self.kind not in ("heat", "dynamics"):
            raise ValueError(f"unknown system kind {self.kind!r}")
        n = _square_size(self.stiffness, "stiffness")
        if self.kind == "heat":
            if self.damping is None:
                raise ValueError("heat systems need a capacity matrix in the damping slot")
            if self.mass is not None:
                raise ValueError("heat systems have no mass matrix")
            if _square_size(self.damping, "capacity") != n:
                raise DimensionError("capacity and conductivity sizes differ")
        else:
            if self.mass is None:
                raise ValueError("dynamics systems need a mass matrix")
            if _square_size(self.mass, "mass") != n:
                raise DimensionError("mass and stiffness sizes differ")
            if self.damping is not None and _square_size(self.damping, "damping") != n:
                raise DimensionError("damping and stiffness sizes differ")
        for term in self.inputs:
            if term.f0.shape[0] != n:
                raise DimensionError("input f0 length must match the system size")
        object.__setattr__(self, "inputs", tuple(self.inputs))

    @property
    def n(self) -> int:
        return self.stiffness.shape[0]

    @property
    def state_dim(self) -> int:
        return self.n if self.kind == "heat" else 2 * self.n

    def forcing_function(self, use_midpoints: bool = True) -> Callable:
        """Point-valued forcing t -> f(t) for the classical integrators.

        Interval-valued term coefficients are collapsed to their midpoints.
        """
        from .sets import box_approximation

        parts = []
        for term in self.inputs:
            x0 = box_approximation(term.initial).center
            parts.append((term.f0, term.generator, x0))

        def forcing(t: float) -> np.ndarray:
            total = np.zeros(self.n)
            for f0, mat, x0 in parts:
                if mat.shape[0] == 1:
                    eta = x0[0] * np.exp(mat[0, 0] * t)
                else:
                    omega = np.sqrt(-mat[1, 0])
                    eta = x0[0] * np.cos(omega * t) + (x0[1] / omega) * np.sin(omega * t)
                total += f0 * eta
            return total

        return forcing


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Autonomous first-order system x' = A x with a set-valued initial state.

    The leading ``state_dim`` coordinates are the physical states; the
    remaining coordinates belong to the appended input models, located by
    ``input_layout`` as (offset, size) pairs.
    """

    matrix: np.ndarray
    state_dim: int
    initial: ConvexSet
    input_layout: tuple = ()

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        n = _square_size(mat, "state matrix")
        if self.initial.dim != n:
            raise DimensionError(
                f"initial set of dimension {self.initial.dim} for a system of size {n}"
            )
        if self.state_dim > n:
            raise DimensionError("state_dim exceeds the full system size")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "input_layout", tuple(self.input_layout))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def heat_first_order(system: SecondOrderSystem) -> np.ndarray:
    """First-order state matrix -C_th^{-1} K_th of a heat-type system."""
    if system.kind != "heat":
        raise ValueError("heat_first_order expects a heat-type system")
    stiff = system.stiffness.toarray() if _is_sparse(system.stiffness) else system.stiffness
    return -solve_columns(system.damping, np.asarray(stiff, dtype=float))


def dynamics_first_order(system: SecondOrderSystem) -> np.ndarray:
    """First-order state matrix [[0, I], [-M^{-1}K, -M^{-1}C]]."""
    if system.kind != "dynamics":
        raise ValueError("dynamics_first_order expects a dynamics-type system")
    n = system.n
    stiff = system.stiffness.toarray() if _is_sparse(system.stiffness) else np.asarray(system.stiffness, float)
    rhs = stiff if system.damping is None else np.hstack(
        [stiff, system.damping.toarray() if _is_sparse(system.damping) else np.asarray(system.damping, float)]
    )
    solved = solve_columns(system.mass, rhs)
    out = np.zeros((2 * n, 2 * n))
    out[:n, n:] = np.eye(n)
    out[n:, :n] = -solved[:, :n]
    if system.damping is not None:
        out[n:, n:] = -solved[:, n:]
    return out


def homogenize(state, inputs: Sequence[InputTerm] = (), initial: ConvexSet = None) -> LinearSystem:
    """Absorb forcing terms into an autonomous first-order system.

    ``state`` is either a SecondOrderSystem (inputs default to its own terms,
    and f0 vectors are premultiplied by C_th^{-1} or M^{-1} as appropriate) or
    a raw first-order state matrix (f0 vectors are used as-is).  ``initial``
    is the set of physical initial states; the combined initial set is its
    Cartesian product with each input model's initial set.
    """
    if initial is None:
        raise ValueError("an initial set for the physical states is required")

    if isinstance(state, SecondOrderSystem):
        if not inputs:
            inputs = state.inputs
        n_state = state.state_dim
        if state.kind == "heat":
            base = heat_first_order(state)
            if inputs:
                premul = solve_columns(state.damping, np.column_stack([t.f0 for t in inputs]))
            rows = slice(0, state.n)
        else:
            base = dynamics_first_order(state)
            if inputs:
                premul = solve_columns(state.mass, np.column_stack([t.f0 for t in inputs]))
            rows = slice(state.n, 2 * state.n)
    else:
        base = np.asarray(state, dtype=float)
        _square_size(base, "state matrix")
        n_state = base.shape[0]
        if inputs:
            premul = np.column_stack([t.f0 for t in inputs])
        rows = slice(0, n_state)

    if initial.dim != n_state:
        raise DimensionError(
            f"initial set of dimension {initial.dim} for {n_state} physical states"
        )
    inputs = tuple(inputs)
    if not inputs:
        return LinearSystem(base, n_state, initial)

    total = n_state + sum(t.order for t in inputs)
    full = np.zeros((total, total))
    full[:n_state, :n_state] = base
    layout = []
    offset = n_state
    for j, term in enumerate(inputs):
        # forcing couples only into the first input coordinate (eta itself)
        full[rows, offset] = premul[:, j]
        full[offset : offset + term.order, offset : offset + term.order] = term.generator
        layout.append((offset, term.order))
        offset += term.order
    combined = cartesian_product([initial] + [t.initial for t in inputs])
    return LinearSystem(full, n_state, combined, tuple(layout))


def initial_box(center, radius) -> Hyperrectangle:
    """Axis-aligned box of initial states (zero radius gives a singleton)."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    radius = np.asarray(radius, dtype=float)
    if radius.ndim == 0:
        radius = np.full(center.shape, float(radius))
    return Hyperrectangle(center, radius)


# ---------------------------------------------------------------------------
# one-dimensional assemblers
# ---------------------------------------------------------------------------


def assemble_bar_1d(
    modulus: float,
    area: float,
    density: float,
    length: float,
    elements: int,
) -> SecondOrderSystem:
    """Clamped-free bar with linear elements and a lumped mass matrix.

    Node 0 (the clamp) is eliminated; the returned system has one axial DOF
    per remaining node, the free end being the last one.
    """
    if elements < 1:
        raise ValueError("need at least one element")
    if min(modulus, area, density, length) <= 0.0:
        raise ValueError("physical parameters must be positive")
    ell = length / elements
    k = modulus * area / ell
    main = np.full(elements, 2.0 * k)
    main[-1] = k
    stiff = scipy.sparse.diags(
        [np.full(elements - 1, -k), main, np.full(elements - 1, -k)], [-1, 0, 1]
    ).tocsr()
    lumped = np.full(elements, density * area * ell)
    lumped[-1] *= 0.5
    mass = scipy.sparse.diags([lumped], [0]).tocsr()
    return SecondOrderSystem(kind="dynamics", stiffness=stiff, mass=mass)


def assemble_heat_1d(
    conductivity: float,
    density: float,
    specific_heat: float,
    length: float,
    elements: int,
    dirichlet_both_ends: bool = True,
) -> SecondOrderSystem:
    """Heat rod with linear elements and a consistent capacity matrix.

    With Dirichlet conditions at both ends the system covers the
    ``elements - 1`` interior nodes; otherwise the right end is left free
    (insulated) and only the left node is eliminated.
    """
    if elements < 2:
        raise ValueError("need at least two elements")
    if min(conductivity, density, specific_heat, length) <= 0.0:
        raise ValueError("physical parameters must be positive")
    ell = length / elements
    n = elements - 1 if dirichlet_both_ends else elements
    k = conductivity / ell
    c = density * specific_heat * ell / 6.0
    main_k = np.full(n, 2.0 * k)
    main_c = np.full(n, 4.0 * c)
    if not dirichlet_both_ends:
        main_k[-1] = k
        main_c[-1] = 2.0 * c
    stiff = scipy.sparse.diags(
        [np.full(n - 1, -k), main_k, np.full(n - 1, -k)], [-1, 0, 1]
    ).tocsr()
    capacity = scipy.sparse.diags(
        [np.full(n - 1, c), main_c, np.full(n - 1, c)], [-1, 0, 1]
    ).tocsr()
    return SecondOrderSystem(kind="heat", stiffness=stiff, damping=capacity)


def heat_gradient_directions(
    elements: int, length: float, dirichlet_both_ends: bool = True
) -> np.ndarray:
    """Per-element temperature gradient rows against the free DOFs.

    Row e evaluates (theta_{e+1} - theta_e) / ell for element e; eliminated
    boundary nodes contribute nothing.  Use a row as a support direction to
    bound the spatial gradient of a rod flowpipe.
    """
    if elements < 2:
        raise ValueError("need at least two elements")
    ell = length / elements
    n = elements - 1 if dirichlet_both_ends else elements
    rows = np.zeros((elements, n))
    for e in range(elements):
        left = e - 1  # dof of global node e (node 0 is eliminated)
        right = e
        if left >= 0:
            rows[e, left] = -1.0 / ell
        if right < n:
            rows[e, right] = 1.0 / ell
    return rows


# ---------------------------------------------------------------------------
# system files
# ---------------------------------------------------------------------------
#
# Plain-text exchange format for externally assembled systems:
#
#   kind: dynamics            # or: heat
#   n: 4
#   matrix K                  # sparse triplets, 1-based indices
#   1 1 2.0
#   1 2 -1.0
#   ...
#   matrix M                  # dynamics: M (and optionally C); heat: C
#   ...
#   input                     # zero or more forcing terms
#   f0: 0 0 0 10000
#   model: constant 1         # constant c | constant lo hi
#                             # exponential a x0 | exponential a lo hi
#                             # sinusoid w x1 x2 | sinusoid w x1lo x1hi x2lo x2hi
#
# '#' starts a comment; blank lines are ignored.


def parse_input_model(tokens: Sequence[str], where: str = "input model") -> tuple:
    """Parse a ``model:`` clause into (matrix, initial set, label)."""
    if not tokens:
        raise ConfigError(f"{where}: missing model name")
    name, args = tokens[0], tokens[1:]
    try:
        values = [float(a) for a in args]
    except ValueError as exc:
        raise ConfigError(f"{where}: non-numeric model parameter in {args}") from exc
    if name == "constant":
        if len(values) == 1:
            init = _initial_from_values([values[0]], [0.0])
        elif len(values) == 2:
            lo, hi = values
            init = _initial_from_values([(lo + hi) / 2.0], [(hi - lo) / 2.0])
        else:
            raise ConfigError(f"{where}: constant takes 1 value or lo hi bounds")
        return np.array([[0.0]]), init, "constant"
    if name == "exponential":
        if len(values) == 2:
            init = _initial_from_values([values[1]], [0.0])
        elif len(values) == 3:
            lo, hi = values[1], values[2]
            init = _initial_from_values([(lo + hi) / 2.0], [(hi - lo) / 2.0])
        else:
            raise ConfigError(f"{where}: exponential takes rate then 1 value or lo hi")
        return np.array([[values[0]]]), init, "exponential"
    if name == "sinusoid":
        if len(values) == 3:
            init = _initial_from_values(values[1:], [0.0, 0.0])
        elif len(values) == 5:
            lows, highs = values[1::2], values[2::2]
            centers = [(lo + hi) / 2.0 for lo, hi in zip(lows, highs)]
            radii = [(hi - lo) / 2.0 for lo, hi in zip(lows, highs)]
            init = _initial_from_values(centers, radii)
        else:
            raise ConfigError(f"{where}: sinusoid takes omega then 2 values or 2 lo/hi pairs")
        omega = values[0]
        if omega <= 0.0:
            raise ConfigError(f"{where}: sinusoid frequency must be positive")
        return np.array([[0.0, 1.0], [-omega * omega, 0.0]]), init, "sinusoid"
    raise ConfigError(f"{where}: unknown input model {name!r}")


def _format_model_line(term: InputTerm) -> str:
    from .sets import box_approximation

    box = box_approximation(term.initial)
    lo, hi = box.lo, box.hi
    if term.order == 1 and term.generator[0, 0] == 0.0:
        vals = [lo[0]] if lo[0] == hi[0] else [lo[0], hi[0]]
        return "model: constant " + " ".join(f"{v:.17g}" for v in vals)
    if term.order == 1:
        rate = term.generator[0, 0]
        vals = [rate] + ([lo[0]] if lo[0] == hi[0] else [lo[0], hi[0]])
        return "model: exponential " + " ".join(f"{v:.17g}" for v in vals)
    omega = float(np.sqrt(-term.generator[1, 0]))
    if np.all(lo == hi):
        vals = [omega, lo[0], lo[1]]
    else:
        vals = [omega, lo[0], hi[0], lo[1], hi[1]]
    return "model: sinusoid " + " ".join(f"{v:.17g}" for v in vals)


def save_system(system: SecondOrderSystem, path) -> None:
    """Write a system (and its input terms) in the plain-text triplet format."""
    lines = [f"kind: {system.kind}", f"n: {system.n}"]

    def emit(label: str, matrix) -> None:
        coo = scipy.sparse.coo_matrix(matrix)
        lines.append(f"matrix {label}")
        order = np.lexsort((coo.col, coo.row))
        for i in order:
            if coo.data[i] != 0.0:
                lines.append(f"{coo.row[i] + 1} {coo.col[i] + 1} {coo.data[i]:.17g}")

    emit("K", system.stiffness)
    if system.kind == "heat":
        emit("C", system.damping)
    else:
        emit("M", system.mass)
        if system.damping is not None:
            emit("C", system.damping)
    for term in system.inputs:
        lines.append("input")
        lines.append("f0: " + " ".join(f"{v:.17g}" for v in term.f0))
        lines.append(_format_model_line(term))
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def load_system(path) -> SecondOrderSystem:
    """Read a system written by save_system (or assembled externally)."""
    kind = None
    n = None
    matrices: dict[str, list] = {}
    inputs: list[InputTerm] = []
    current: list | None = None
    pending_f0: np.ndarray | None = None
    in_input = False

    def fail(lineno: int, message: str):
        raise ConfigError(f"{path}:{lineno}: {message}")

    with open(path) as handle:
        raw_lines = handle.readlines()

    for lineno, raw in enumerate(raw_lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("kind:"):
            kind = line.split(":", 1)[1].strip()
            if kind not in ("heat", "dynamics"):
                fail(lineno, f"unknown kind {kind!r}")
        elif line.startswith("n:"):
            try:
                n = int(line.split(":", 1)[1])
            except ValueError:
                fail(lineno, "n must be an integer")
        elif line.startswith("matrix"):
            if n is None:
                fail(lineno, "matrix block before the n: header")
            label = line.split(None, 1)[1].strip() if " " in line else ""
            if label not in ("K", "M", "C"):
                fail(lineno, f"unknown matrix label {label!r}")
            current = matrices.setdefault(label, [])
            in_input = False
        elif line == "input":
            current = None
            in_input = True
            pending_f0 = None
        elif line.startswith("f0:"):
            if not in_input:
                fail(lineno, "f0 outside an input block")
            try:
                pending_f0 = np.array([float(v) for v in line.split(":", 1)[1].split()])
            except ValueError:
                fail(lineno, "non-numeric f0 entry")
            if pending_f0.shape[0] != n:
                fail(lineno, f"f0 has {pending_f0.shape[0]} entries for n={n}")
        elif line.startswith("model:"):
            if not in_input or pending_f0 is None:
                fail(lineno, "model line without a preceding f0")
            try:
                matrix, init, label = parse_input_model(
                    line.split(":", 1)[1].split(), where=f"{path}:{lineno}"
                )
            except ConfigError:
                raise
            inputs.append(InputTerm(pending_f0, matrix, init, label))
            pending_f0 = None
        else:
            if current is None:
                fail(lineno, f"unexpected line {line!r}")
            parts = line.split()
            if len(parts) != 3:
                fail(lineno, "matrix entries are 'row col value' triplets")
            try:
                row, col, value = int(parts[0]), int(parts[1]), float(parts[2])
            except ValueError:
                fail(lineno, "malformed matrix triplet")
            if not (1 <= row <= n and 1 <= col <= n):
                fail(lineno, f"index ({row}, {col}) outside 1..{n}")
            current.append((row - 1, col - 1, value))

    if kind is None or n is None:
        raise ConfigError(f"{path}: missing kind/n header")

    def build(label: str):
        triplets = matrices.get(label)
        if triplets is None:
            return None
        rows = [t[0] for t in triplets]
        cols = [t[1] for t in triplets]
        data = [t[2] for t in triplets]
        return scipy.sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()

    stiffness = build("K")
    if stiffness is None:
        raise ConfigError(f"{path}: missing matrix K")
    if kind == "heat":
        capacity = build("C")
        if capacity is None:
            raise ConfigError(f"{path}: heat systems need matrix C")
        return SecondOrderSystem(
            kind="heat", stiffness=stiffness, damping=capacity, inputs=tuple(inputs)
        )
    mass = build("M")
    if mass is None:
        raise ConfigError(f"{path}: dynamics systems need matrix M")
    return SecondOrderSystem(
        kind="dynamics",
        stiffness=stiffness,
        mass=mass,
        damping=build("C"),
        inputs=tuple(inputs),
    )
