#!/usr/bin/env python3
"""Generate the small .system files packaged with the demo configs.

Run from the repository root after installing the package:

    python3 scripts/make_systems.py

Writes src/reachfem/configs/systems/{wave2d_small,hydration_small}.system and
prints the monitored dof indices used by the matching demo YAMLs.
"""
from pathlib import Path

import numpy as np
import scipy.sparse

from reachfem.model import (
    SecondOrderSystem,
    constant_input,
    exponential_input,
    save_system,
    sinusoid_input,
)

OUT = Path(__file__).resolve().parents[1] / "src" / "reachfem" / "configs" / "systems"

SECONDS_PER_HOUR = 3600.0


def wave_plate(
    nx=9,
    ny=9,
    width=1.0,
    height=1.0,
    modulus=1.8773e10,
    poisson=0.25,
    density=2200.0,
    load=-2.0e6,
):
    """Plane-strain square plate of linear triangles, clamped along the bottom
    edge, with a downward step point load at the top-centre node."""
    xs = np.linspace(0.0, width, nx)
    ys = np.linspace(0.0, height, ny)
    nodes = np.array([(x, y) for y in ys for x in xs])

    def node_id(i, j):
        return j * nx + i

    triangles = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            a, b = node_id(i, j), node_id(i + 1, j)
            c, d = node_id(i + 1, j + 1), node_id(i, j + 1)
            triangles.append((a, b, c))
            triangles.append((a, c, d))

    e, nu = modulus, poisson
    dmat = (
        e
        / ((1.0 + nu) * (1.0 - 2.0 * nu))
        * np.array([[1.0 - nu, nu, 0.0], [nu, 1.0 - nu, 0.0], [0.0, 0.0, (1.0 - 2.0 * nu) / 2.0]])
    )

    ndof = 2 * len(nodes)
    stiff = scipy.sparse.lil_matrix((ndof, ndof))
    lumped = np.zeros(ndof)
    for tri in triangles:
        (x1, y1), (x2, y2), (x3, y3) = nodes[list(tri)]
        det = (x2 - x1) * (y3 - y1) - (x3 - x1) * (y2 - y1)
        area = 0.5 * abs(det)
        b = np.array([y2 - y3, y3 - y1, y1 - y2]) / det
        c = np.array([x3 - x2, x1 - x3, x2 - x1]) / det
        bmat = np.zeros((3, 6))
        bmat[0, 0::2] = b
        bmat[1, 1::2] = c
        bmat[2, 0::2] = c
        bmat[2, 1::2] = b
        dofs = np.array([(2 * q, 2 * q + 1) for q in tri]).ravel()
        stiff[np.ix_(dofs, dofs)] += area * bmat.T @ dmat @ bmat
        lumped[dofs] += density * area / 3.0

    # eliminate the clamped bottom edge (y = 0)
    keep = np.array(
        [d for q in range(len(nodes)) if nodes[q][1] > 0.0 for d in (2 * q, 2 * q + 1)]
    )
    stiff = stiff.tocsr()[keep][:, keep]
    mass = scipy.sparse.diags([lumped[keep]], [0]).tocsr()

    loaded = node_id((nx - 1) // 2, ny - 1)
    loaded_dof = int(np.searchsorted(keep, 2 * loaded + 1))
    assert keep[loaded_dof] == 2 * loaded + 1
    tip = np.zeros(keep.size)
    tip[loaded_dof] = load

    system = SecondOrderSystem("dynamics", stiff, mass=mass, inputs=(constant_input(tip),))
    speed = np.sqrt(e * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu) * density))
    return system, loaded_dof, speed


def hydration_block(
    nx=6,
    ny=6,
    nz=4,
    spacing=0.1,
    conductivity=2.5,
    volumetric_capacity=2.4e6,
    film=10.0,
    ambient=20.0,
    source=330.0,
    rate=-7.95e-3,
):
    """Curing concrete block on a coarse structured grid, all faces convective.

    Finite-volume 7-point conduction; Robin (film) terms fold into the
    conductivity matrix and the ambient forcing vector.  Time unit is hours:
    an exponentially decaying hydration source plus an ambient made of a
    constant and a daily sinusoid, all with interval coefficients.
    """
    h = spacing
    n = nx * ny * nz

    def node_id(i, j, k):
        return (k * ny + j) * nx + i

    face = film * h * h * SECONDS_PER_HOUR
    conduct = conductivity * h * SECONDS_PER_HOUR
    stiff = scipy.sparse.lil_matrix((n, n))
    robin = np.zeros(n)
    for k in range(nz):
        for j in range(ny):
            for i in range(nx):
                a = node_id(i, j, k)
                for di, dj, dk in (
                    (1, 0, 0),
                    (-1, 0, 0),
                    (0, 1, 0),
                    (0, -1, 0),
                    (0, 0, 1),
                    (0, 0, -1),
                ):
                    ii, jj, kk = i + di, j + dj, k + dk
                    if 0 <= ii < nx and 0 <= jj < ny and 0 <= kk < nz:
                        stiff[a, a] += conduct
                        stiff[a, node_id(ii, jj, kk)] -= conduct
                    else:
                        stiff[a, a] += face
                        robin[a] += face

    capacity = scipy.sparse.diags([np.full(n, volumetric_capacity * h**3)], [0]).tocsr()
    heat = SECONDS_PER_HOUR * h**3 * np.ones(n)
    inputs = (
        exponential_input(heat, rate=rate, value=source, half_width=0.05 * source),
        constant_input(robin, value=ambient, half_width=1.0),
        sinusoid_input(robin, omega=np.pi / 12.0, value=-3.0, half_widths=(1.0, 0.0)),
    )
    system = SecondOrderSystem("heat", stiff.tocsr(), damping=capacity, inputs=inputs)
    centre = node_id(nx // 2, ny // 2, nz // 2)
    return system, centre


def main():
    OUT.mkdir(parents=True, exist_ok=True)

    plate, loaded_dof, speed = wave_plate()
    save_system(plate, OUT / "wave2d_small.system")
    print(f"wave2d_small.system: n = {plate.n} dofs, loaded dof {loaded_dof}")
    print(f"  pressure-wave speed {speed:.1f} m/s -> crossing time {1.0 / speed:.2e} s")

    block, centre = hydration_block()
    save_system(block, OUT / "hydration_small.system")
    print(f"hydration_small.system: n = {block.n} dofs, centre dof {centre}")


if __name__ == "__main__":
    main()
