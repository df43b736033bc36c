"""Per-tick proxy resolution and spring-force computation.

The haptic interface point (HIP) follows the device and may sink into the
object; the proxy is held on the surface.  Each tick resolves the proxy by
successive approximation: while the proxy penetrates it is lifted along the
local surface normal in steps of delta_n; once clear, it is lifted delta_n
off the surface and a line is drawn to the current HIP, and the first
crossing of that line with the surface becomes the new proxy.  The loop
stops when the proxy moves less than eps_converge between iterations.  The
rendered force is the spring F = k * (proxy - hip): magnitude proportional
to penetration depth, directed out of the object along the line from HIP to
proxy.

resolve_proxy runs in a fused kernel over a flat list of heights: at a 1 ms
tick budget, per-call overhead of the public query functions is the
dominant cost, so the kernel inlines bilinear sampling and the bracketed
root refinement.  The public operations in `surface` remain the reference
semantics; tests hold the two paths together.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, replace
from typing import Sequence

from .surface import DepthField, Vec3, is_penetrating, surface_normal

_LIFTS_PER_PASS = 200  # inner lift budget per successive-approximation pass


@dataclass(frozen=True)
class RenderParams:
    """Tuning constants of the rendering loop.

    stiffness_k: spring constant in N/mm.
    delta_n: proxy step length in mm; small enough that the lifted segment
        cannot skip over surface detail.
    eps_surface: on-surface tolerance in mm.
    eps_converge: proxy stationarity tolerance in mm.
    max_iters: per-tick cap on successive-approximation passes.
    tick_budget_us: real-time budget of one tick.
    """

    stiffness_k: float = 0.5
    delta_n: float = 0.1
    eps_surface: float = 1e-3
    eps_converge: float = 1e-3
    max_iters: int = 50
    tick_budget_us: float = 1000.0

    def __post_init__(self):
        if not (self.delta_n > 0.0):
            raise ValueError(f"delta_n must be positive, got {self.delta_n}")
        if not (self.stiffness_k >= 0.0):
            raise ValueError(f"stiffness_k must be non-negative, got {self.stiffness_k}")
        if self.eps_surface <= 0.0 or self.eps_converge <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass(frozen=True)
class HapticState:
    """Snapshot of the rendering loop after one tick.

    clamped records that the HIP or proxy had to be pinned to the lateral
    extent; converged=False flags a tick that hit max_iters before the proxy
    went stationary (fine texture can do this; the force is still valid).
    """

    hip: Vec3
    proxy: Vec3
    in_contact: bool = False
    force: Vec3 = (0.0, 0.0, 0.0)
    converged: bool = True
    clamped: bool = False


def initial_state(hip: Sequence[float]) -> HapticState:
    p = (float(hip[0]), float(hip[1]), float(hip[2]))
    return HapticState(hip=p, proxy=p)


def _clamp_lateral(field: DepthField, x: float, y: float):
    clamped = False
    if x < 0.0:
        x, clamped = 0.0, True
    elif x > field.extent_x:
        x, clamped = field.extent_x, True
    if y < 0.0:
        y, clamped = 0.0, True
    elif y > field.extent_y:
        y, clamped = field.extent_y, True
    return x, y, clamped


def step_proxy(state: HapticState, field: DepthField, params: RenderParams) -> HapticState:
    """One two-branch proxy update.

    Penetrating: move delta_n along the surface normal at the proxy's
    lateral position.  Free: move delta_n straight toward the HIP, landing
    exactly on it when it is within reach and the hop does not penetrate.
    """
    px, py, pz = state.proxy
    d = params.delta_n
    if is_penetrating(field, state.proxy):
        nx, ny, nz = surface_normal(field, px, py)
        x, y, clamped = _clamp_lateral(field, px + d * nx, py + d * ny)
        return replace(state, proxy=(x, y, pz + d * nz), clamped=state.clamped or clamped)
    hx, hy, hz = state.hip
    dx, dy, dz = hx - px, hy - py, hz - pz
    dist = math.sqrt(dx * dx + dy * dy + dz * dz)
    if dist <= d:
        if dist == 0.0 or not is_penetrating(field, state.hip):
            x, y, clamped = _clamp_lateral(field, hx, hy)
            return replace(state, proxy=(x, y, hz), clamped=state.clamped or clamped)
    scale = d / dist
    x, y, clamped = _clamp_lateral(field, px + dx * scale, py + dy * scale)
    return replace(state, proxy=(x, y, pz + dz * scale), clamped=state.clamped or clamped)


def _resolve(
    flat: list,
    w: int,
    h: int,
    s: float,
    hx: float,
    hy: float,
    hz: float,
    px: float,
    py: float,
    pz: float,
    delta_n: float,
    eps_surface: float,
    eps_converge: float,
    max_iters: int,
):
    """Successive-approximation kernel.

    Pure float/list math with everything in locals; both (hx, hy) and
    (px, py) must already lie inside the lateral extent.  Returns
    (px, py, pz, in_contact, converged, clamped, passes).
    """
    ex = (w - 1) * s
    ey = (h - 1) * s
    iw = w - 2
    jh = h - 2
    inv_s = 1.0 / s

    in_contact = False
    converged = False
    clamped = False
    passes = 0
    # two positions back, for 2-cycle detection on rough texture
    qx = qy = qz = math.inf
    # best spring length seen, for longer-period orbit detection: clean
    # convergence shortens the spring strictly every pass, an orbit stops
    # producing new bests
    best_d2 = math.inf
    bx = by = bz = 0.0
    stagnant = 0

    while passes < max_iters:
        passes += 1

        # -- (a) lift out of the surface along the local normal ------------
        lifts = 0
        while lifts < _LIFTS_PER_PASS:
            u = px * inv_s
            v = py * inv_s
            i = int(u)
            j = int(v)
            if i > iw:
                i = iw
            if j > jh:
                j = jh
            fx = u - i
            fy = v - j
            base = j * w + i
            z00 = flat[base]
            z10 = flat[base + 1]
            z01 = flat[base + w]
            z11 = flat[base + w + 1]
            a0 = z00 * (1.0 - fx) + z10 * fx
            a1 = z01 * (1.0 - fx) + z11 * fx
            f_here = a0 * (1.0 - fy) + a1 * fy
            if pz >= f_here:
                break
            gx = ((z10 - z00) * (1.0 - fy) + (z11 - z01) * fy) * inv_s
            gy = ((a1 - a0)) * inv_s
            inv_n = 1.0 / math.sqrt(gx * gx + gy * gy + 1.0)
            px -= delta_n * gx * inv_n
            py -= delta_n * gy * inv_n
            pz += delta_n * inv_n
            if px < 0.0:
                px, clamped = 0.0, True
            elif px > ex:
                px, clamped = ex, True
            if py < 0.0:
                py, clamped = 0.0, True
            elif py > ey:
                py, clamped = ey, True
            in_contact = True
            lifts += 1
        if lifts == _LIFTS_PER_PASS:
            continue  # still buried; spend another pass lifting

        gap = pz - f_here

        # -- (b) draw a line to the HIP and take its first surface crossing
        if gap <= eps_surface:
            # attached: hop delta_n off the surface first so the segment can
            # travel laterally before re-entering (the slide that pulls the
            # proxy toward the closest point)
            gx = ((z10 - z00) * (1.0 - fy) + (z11 - z01) * fy) * inv_s
            gy = (a1 - a0) * inv_s
            inv_n = 1.0 / math.sqrt(gx * gx + gy * gy + 1.0)
            ox = px - delta_n * gx * inv_n
            oy = py - delta_n * gy * inv_n
            oz = pz + delta_n * inv_n
            if ox < 0.0:
                ox = 0.0
            elif ox > ex:
                ox = ex
            if oy < 0.0:
                oy = 0.0
            elif oy > ey:
                oy = ey
            u = ox * inv_s
            v = oy * inv_s
            i = int(u)
            j = int(v)
            if i > iw:
                i = iw
            if j > jh:
                j = jh
            fx = u - i
            fy = v - j
            base = j * w + i
            g_lo = oz - (
                (flat[base] * (1.0 - fx) + flat[base + 1] * fx) * (1.0 - fy)
                + (flat[base + w] * (1.0 - fx) + flat[base + w + 1] * fx) * fy
            )
            if g_lo < 0.0:
                # the normal lift re-entered curved terrain across a cell
                # edge; a straight vertical hop can never penetrate
                ox = px
                oy = py
                oz = pz + delta_n
                g_lo = gap + delta_n
        else:
            ox = px
            oy = py
            oz = pz
            g_lo = gap

        dx = hx - ox
        dy = hy - oy
        dz = hz - oz
        seg = math.sqrt(dx * dx + dy * dy + dz * dz)
        if seg == 0.0:
            px, py, pz = hx, hy, hz
            in_contact = False
            converged = True
            break

        n_steps = int(seg / delta_n) + 1
        t_lo = 0.0
        t_hi = -1.0
        g_hi = 0.0
        for k in range(1, n_steps + 1):
            t = k / n_steps
            x = ox + dx * t
            y = oy + dy * t
            u = x * inv_s
            v = y * inv_s
            i = int(u)
            j = int(v)
            if i > iw:
                i = iw
            if j > jh:
                j = jh
            fx = u - i
            fy = v - j
            base = j * w + i
            g = (oz + dz * t) - (
                (flat[base] * (1.0 - fx) + flat[base + 1] * fx) * (1.0 - fy)
                + (flat[base + w] * (1.0 - fx) + flat[base + w + 1] * fx) * fy
            )
            if g < 0.0:
                t_hi = t
                g_hi = g
                break
            t_lo = t
            g_lo = g

        if t_hi < 0.0:
            # no crossing: the HIP is reachable through free space
            px, py, pz = hx, hy, hz
            in_contact = False
            converged = True
            break

        # refine: inside one bilinear cell the height residual along the
        # segment is exactly quadratic in t, so try its closed-form root
        # first (one verification sample); brackets that straddle cells fall
        # back to the secant/bisection loop below
        x = ox + dx * t_lo
        y = oy + dy * t_lo
        u = x * inv_s
        v = y * inv_s
        i = int(u)
        j = int(v)
        if i > iw:
            i = iw
        if j > jh:
            j = jh
        base = j * w + i
        z00 = flat[base]
        z10 = flat[base + 1]
        z01 = flat[base + w]
        z11 = flat[base + w + 1]
        c1 = z10 - z00
        c2 = z01 - z00
        c3 = z11 - z10 - z01 + z00
        du = dx * inv_s
        dv = dy * inv_s
        lu = u - i
        lv = v - j
        qa = -c3 * du * dv
        qb = dz - c1 * du - c2 * dv - c3 * (lu * dv + lv * du)
        qc = g_lo
        span = t_hi - t_lo
        root = -1.0
        if qa == 0.0:
            if qb < 0.0:
                root = -qc / qb
        else:
            disc = qb * qb - 4.0 * qa * qc
            if disc >= 0.0:
                sq = math.sqrt(disc)
                q = -0.5 * (qb + sq) if qb >= 0.0 else -0.5 * (qb - sq)
                r1 = q / qa
                r2 = qc / q if q != 0.0 else -1.0
                if r1 > r2:
                    r1, r2 = r2, r1
                if 0.0 <= r1 <= span:
                    root = r1
                elif 0.0 <= r2 <= span:
                    root = r2
        solved = False
        if 0.0 <= root <= span:
            t = t_lo + root
            for _try in range(4):
                x = ox + dx * t
                y = oy + dy * t
                u = x * inv_s
                v = y * inv_s
                i = int(u)
                j = int(v)
                if i > iw:
                    i = iw
                if j > jh:
                    j = jh
                fx = u - i
                fy = v - j
                base = j * w + i
                g = (oz + dz * t) - (
                    (flat[base] * (1.0 - fx) + flat[base + 1] * fx) * (1.0 - fy)
                    + (flat[base + w] * (1.0 - fx) + flat[base + w + 1] * fx) * fy
                )
                if 0.0 <= g <= 1e-12:
                    t_lo = t
                    solved = True
                    break
                slope = 2.0 * qa * (t - t_lo) + qb
                if abs(g) > 1e-9 or slope >= 0.0:
                    break  # bracket straddles cells; use the robust loop
                t += g / slope  # Newton step back toward the surface
                if not (t_lo <= t <= t_hi):
                    break
        it = 0
        while not solved and g_lo > 1e-12 and (t_hi - t_lo) * seg > 1e-12 and it < 90:
            denom = g_lo - g_hi
            if it & 1 == 0 and denom > 0.0:
                t = t_lo + g_lo * (t_hi - t_lo) / denom
                if not (t_lo < t < t_hi):
                    t = 0.5 * (t_lo + t_hi)
            else:
                t = 0.5 * (t_lo + t_hi)
            x = ox + dx * t
            y = oy + dy * t
            u = x * inv_s
            v = y * inv_s
            i = int(u)
            j = int(v)
            if i > iw:
                i = iw
            if j > jh:
                j = jh
            fx = u - i
            fy = v - j
            base = j * w + i
            g = (oz + dz * t) - (
                (flat[base] * (1.0 - fx) + flat[base + 1] * fx) * (1.0 - fy)
                + (flat[base + w] * (1.0 - fx) + flat[base + w + 1] * fx) * fy
            )
            if g < 0.0:
                t_hi = t
                g_hi = g
            else:
                t_lo = t
                g_lo = g
            it += 1

        nx_ = ox + dx * t_lo
        ny_ = oy + dy * t_lo
        nz_ = oz + dz * t_lo
        if nx_ < 0.0:
            nx_ = 0.0
        elif nx_ > ex:
            nx_ = ex
        if ny_ < 0.0:
            ny_ = 0.0
        elif ny_ > ey:
            ny_ = ey
        mdx = nx_ - px
        mdy = ny_ - py
        mdz = nz_ - pz
        moved = math.sqrt(mdx * mdx + mdy * mdy + mdz * mdz)
        cdx = nx_ - qx
        cdy = ny_ - qy
        cdz = nz_ - qz
        qx, qy, qz = px, py, pz
        px, py, pz = nx_, ny_, nz_
        in_contact = True

        # -- (c) stationarity test ----------------------------------------
        if moved < eps_converge:
            converged = True
            break
        ddx = hx - px
        ddy = hy - py
        ddz = hz - pz
        d2 = ddx * ddx + ddy * ddy + ddz * ddz
        if d2 < best_d2 * (1.0 - 1e-9):
            best_d2 = d2
            bx, by, bz = px, py, pz
            stagnant = 0
        else:
            stagnant += 1
        if cdx * cdx + cdy * cdy + cdz * cdz < eps_converge * eps_converge:
            # bouncing between two surface points (fine texture): the
            # displacement criterion will never be met, so stop here and
            # report the jerk instead of burning the whole iteration budget
            break
        if stagnant >= 6:
            # longer orbit around a texture minimum: same jerk case
            break

    if not converged:
        # hand back the best proxy visited (every candidate was a surface
        # hit, so non-penetration is preserved)
        if best_d2 < math.inf:
            ddx = hx - px
            ddy = hy - py
            ddz = hz - pz
            if best_d2 < ddx * ddx + ddy * ddy + ddz * ddz:
                px, py, pz = bx, by, bz
        # and make sure it still honors the non-penetration contract
        # (vertical projection cannot overshoot on a height field)
        u = px * inv_s
        v = py * inv_s
        i = int(u)
        j = int(v)
        if i > iw:
            i = iw
        if j > jh:
            j = jh
        fx = u - i
        fy = v - j
        base = j * w + i
        f_here = (flat[base] * (1.0 - fx) + flat[base + 1] * fx) * (1.0 - fy) + (
            flat[base + w] * (1.0 - fx) + flat[base + w + 1] * fx
        ) * fy
        if pz < f_here:
            pz = f_here
            in_contact = True

    return px, py, pz, in_contact, converged, clamped, passes


def resolve_proxy(state: HapticState, field: DepthField, params: RenderParams) -> HapticState:
    """Run the successive-approximation loop to the proxy's rest position.

    The returned proxy is never penetrating beyond eps_surface.  If the loop
    hits max_iters first (fine texture, deep catch-up), the best proxy so
    far is returned with converged=False; the next tick continues from it.
    The pursuit target is the HIP clamped to the lateral extent; state.hip
    itself is left untouched.
    """
    hx, hy, hclamp = _clamp_lateral(field, state.hip[0], state.hip[1])
    px, py, pclamp = _clamp_lateral(field, state.proxy[0], state.proxy[1])
    px, py, pz, in_contact, converged, clamped, _ = _resolve(
        field._flat,
        field.width,
        field.height,
        field.spacing,
        hx,
        hy,
        state.hip[2],
        px,
        py,
        state.proxy[2],
        params.delta_n,
        params.eps_surface,
        params.eps_converge,
        params.max_iters,
    )
    return replace(
        state,
        proxy=(px, py, pz),
        in_contact=in_contact,
        converged=converged,
        clamped=state.clamped or hclamp or pclamp or clamped,
    )


def compute_force(state: HapticState, params: RenderParams) -> Vec3:
    """Spring force in N: k * (proxy - hip) during contact, zero otherwise."""
    if not state.in_contact:
        return (0.0, 0.0, 0.0)
    k = params.stiffness_k
    return (
        k * (state.proxy[0] - state.hip[0]),
        k * (state.proxy[1] - state.hip[1]),
        k * (state.proxy[2] - state.hip[2]),
    )


def tick(
    state: HapticState,
    new_hip: Sequence[float],
    field: DepthField,
    params: RenderParams,
) -> tuple[HapticState, float]:
    """Advance one 1 ms tick: adopt the new HIP, resolve, compute the force.

    The HIP is pinned to the lateral extent (the workspace mapper guarantees
    commands inside the window; anything else is flagged).  Returns the new
    state and the measured wall-clock duration of the call in microseconds.
    """
    t0 = time.perf_counter_ns()
    hx, hy, hclamp = _clamp_lateral(field, float(new_hip[0]), float(new_hip[1]))
    st = HapticState(
        hip=(hx, hy, float(new_hip[2])),
        proxy=state.proxy,
        in_contact=state.in_contact,
        converged=state.converged,
        clamped=hclamp,
    )
    st = resolve_proxy(st, field, params)
    st = replace(st, force=compute_force(st, params))
    return st, (time.perf_counter_ns() - t0) / 1000.0
