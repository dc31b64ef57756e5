"""Planar rigid-body car with four friction-limited wheels.

The tire model asks each wheel for the force that would cancel its lateral
slip and deliver the commanded drive/brake force, then clamps that request to
the friction circle.  Saturation reproduces the expected limit behaviors:
braking or accelerating hard eats the budget of the lateral force (skidding),
front saturation understeers, rear saturation oversteers.  Grass multiplies
the friction budget by ``off_track_friction``.

All math is float64 numpy; stepping is branch-deterministic, so identical
inputs give bit-identical outputs.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

# Car geometry and inertia (meters, kilograms).
CAR_LENGTH = 4.0
CAR_WIDTH = 2.0
WHEELBASE = 2.6
AXLE_TRACK = 1.6
MASS = 1200.0
INERTIA = MASS * (CAR_LENGTH**2 + CAR_WIDTH**2) / 12.0

# Drive/brake/steering limits.
ENGINE_FORCE = 9000.0        # total at the rear axle at full gas, newtons
BRAKE_FORCE = 14000.0        # total over four wheels at full brake, newtons
MAX_STEER_ANGLE = 0.42       # radians at steer = +/-1
STEER_RATE = 3.0             # radians/second toward the commanded angle

TIRE_FRICTION = 1.0          # tire-road friction coefficient on asphalt
GRAVITY = 9.81
LINEAR_DRAG = 1.2            # quadratic aero drag, N / (m/s)^2
ROLLING_RESIST = 45.0        # N per unit of forward speed
ANGULAR_DAMPING = 0.6        # 1/s, bleeds spin when airborne of grip

# Body-frame wheel offsets, x right / y forward: FL, FR, RL, RR.
WHEEL_OFFSETS = np.array([
    [-AXLE_TRACK / 2.0, WHEELBASE / 2.0],
    [AXLE_TRACK / 2.0, WHEELBASE / 2.0],
    [-AXLE_TRACK / 2.0, -WHEELBASE / 2.0],
    [AXLE_TRACK / 2.0, -WHEELBASE / 2.0],
])
FRONT = (0, 1)
REAR = (2, 3)


@dataclass(frozen=True)
class WheelState:
    """Per-wheel bookkeeping refreshed each physics substep."""

    on_grass: bool = False
    slipping: bool = False


@dataclass(frozen=True)
class CarState:
    position: np.ndarray                 # (2,) world meters
    heading: float                       # radians in [-pi, pi)
    linear_velocity: np.ndarray          # (2,) world m/s
    angular_velocity: float              # rad/s
    steer_angle: float                   # current front-wheel angle, radians
    wheels: tuple[WheelState, ...] = field(
        default_factory=lambda: tuple(WheelState() for _ in range(4)))
    color: tuple[int, int, int] = (200, 40, 40)

    def rotation(self) -> np.ndarray:
        c, s = np.cos(self.heading), np.sin(self.heading)
        return np.array([[c, -s], [s, c]])

    def forward(self) -> np.ndarray:
        # heading measures the body +y (nose) direction from world +y
        return np.array([-np.sin(self.heading), np.cos(self.heading)])

    def wheel_positions(self) -> np.ndarray:
        return self.position + WHEEL_OFFSETS @ self.rotation().T

    def hull_corners(self) -> np.ndarray:
        half = np.array([CAR_WIDTH / 2.0, CAR_LENGTH / 2.0])
        local = np.array([[-1, -1], [1, -1], [1, 1], [-1, 1]]) * half
        return self.position + local @ self.rotation().T

    def speed(self) -> float:
        return float(np.linalg.norm(self.linear_velocity))


def make_car(position, heading: float, color=(200, 40, 40)) -> CarState:
    return CarState(
        position=np.asarray(position, dtype=float),
        heading=wrap_angle(heading),
        linear_velocity=np.zeros(2),
        angular_velocity=0.0,
        steer_angle=0.0,
        color=tuple(color),
    )


def wrap_angle(a: float) -> float:
    return float((a + np.pi) % (2.0 * np.pi) - np.pi)


def step_car(car: CarState, steer: float, gas: float, brake: float,
             wheel_friction: np.ndarray, dt: float) -> CarState:
    """Advance one physics substep.

    ``wheel_friction`` holds the per-wheel friction coefficient already
    including any grass reduction.  Control inputs must be pre-clamped.
    """
    rot = car.rotation()
    target = steer * MAX_STEER_ANGLE
    delta = np.clip(target - car.steer_angle, -STEER_RATE * dt, STEER_RATE * dt)
    steer_angle = car.steer_angle + delta

    wheel_world = car.position + WHEEL_OFFSETS @ rot.T
    total_force = np.zeros(2)
    total_torque = 0.0
    slipping = [False] * 4

    for i in range(4):
        angle = car.heading + (steer_angle if i in FRONT else 0.0)
        dir_fwd = np.array([-np.sin(angle), np.cos(angle)])
        dir_side = np.array([-dir_fwd[1], dir_fwd[0]])

        r = wheel_world[i] - car.position
        # contact-point velocity: v + omega x r in the plane
        vel = car.linear_velocity + car.angular_velocity * np.array([-r[1], r[0]])
        v_fwd = float(vel @ dir_fwd)
        v_side = float(vel @ dir_side)

        f_long = 0.0
        if i in REAR:
            f_long += gas * ENGINE_FORCE / 2.0
        # brake force opposes rolling; full brake can lock the wheel
        f_long -= brake * BRAKE_FORCE / 4.0 * np.tanh(v_fwd / 0.5)
        f_long -= ROLLING_RESIST / 4.0 * np.tanh(v_fwd / 0.5)
        # force needed to cancel lateral slip of this wheel within one substep
        f_lat = -(MASS / 4.0) * v_side / dt

        force = f_long * dir_fwd + f_lat * dir_side
        cap = wheel_friction[i] * TIRE_FRICTION * MASS * GRAVITY / 4.0
        mag = float(np.linalg.norm(force))
        if mag > cap:
            force *= cap / mag
            slipping[i] = True

        total_force += force
        total_torque += r[0] * force[1] - r[1] * force[0]

    speed = car.speed()
    if speed > 1e-9:
        total_force -= LINEAR_DRAG * speed * car.linear_velocity

    lin_vel = car.linear_velocity + total_force / MASS * dt
    ang_vel = car.angular_velocity + total_torque / INERTIA * dt
    ang_vel *= max(0.0, 1.0 - ANGULAR_DAMPING * dt)

    wheels = tuple(
        WheelState(on_grass=wheel_friction[i] < TIRE_FRICTION, slipping=slipping[i])
        for i in range(4))
    return replace(
        car,
        position=car.position + lin_vel * dt,
        heading=wrap_angle(car.heading + ang_vel * dt),
        linear_velocity=lin_vel,
        angular_velocity=float(ang_vel),
        steer_angle=float(steer_angle),
        wheels=wheels,
    )


def resolve_collision(car_a: CarState, car_b: CarState) -> tuple[CarState, CarState, np.ndarray]:
    """Impulse-based contact between two car hulls (restitution 0).

    Returns the updated cars and the impulse applied to ``car_a`` (``car_b``
    receives exactly its negation, so momentum is conserved).  No-op when the
    hulls do not overlap.
    """
    pa, pb = car_a.hull_corners(), car_b.hull_corners()
    contact = _obb_contact(pa, pb)
    if contact is None:
        return car_a, car_b, np.zeros(2)
    normal, depth, point = contact  # normal points from a toward b

    ra = point - car_a.position
    rb = point - car_b.position
    vel_a = car_a.linear_velocity + car_a.angular_velocity * np.array([-ra[1], ra[0]])
    vel_b = car_b.linear_velocity + car_b.angular_velocity * np.array([-rb[1], rb[0]])
    rel = vel_b - vel_a
    vn = float(rel @ normal)

    impulse = np.zeros(2)
    if vn < 0.0:  # approaching
        ra_n = ra[0] * normal[1] - ra[1] * normal[0]
        rb_n = rb[0] * normal[1] - rb[1] * normal[0]
        k = 2.0 / MASS + ra_n**2 / INERTIA + rb_n**2 / INERTIA
        j = -vn / k
        # Coulomb friction on the tangential relative velocity.
        tangent = np.array([-normal[1], normal[0]])
        vt = float(rel @ tangent)
        ra_t = ra[0] * tangent[1] - ra[1] * tangent[0]
        rb_t = rb[0] * tangent[1] - rb[1] * tangent[0]
        kt = 2.0 / MASS + ra_t**2 / INERTIA + rb_t**2 / INERTIA
        jt = float(np.clip(-vt / kt, -0.6 * j, 0.6 * j))
        impulse = -j * normal + jt * tangent  # applied to car_a

        car_a = _apply_impulse(car_a, impulse, ra)
        car_b = _apply_impulse(car_b, -impulse, rb)

    # positional correction: split the penetration evenly
    push = 0.5 * max(depth - 1e-3, 0.0) * normal
    car_a = replace(car_a, position=car_a.position - push)
    car_b = replace(car_b, position=car_b.position + push)
    return car_a, car_b, impulse


def _apply_impulse(car: CarState, impulse: np.ndarray, r: np.ndarray) -> CarState:
    ang = (r[0] * impulse[1] - r[1] * impulse[0]) / INERTIA
    return replace(
        car,
        linear_velocity=car.linear_velocity + impulse / MASS,
        angular_velocity=car.angular_velocity + float(ang),
    )


def _obb_contact(pa: np.ndarray, pb: np.ndarray):
    """SAT contact between two convex quads.

    Returns (normal from a to b, penetration depth, contact point) or None.
    """
    best_depth = np.inf
    best_normal = None
    for poly in (pa, pb):
        edges = np.roll(poly, -1, axis=0) - poly
        for e in edges:
            axis = np.array([e[1], -e[0]])
            n = np.linalg.norm(axis)
            if n < 1e-12:
                continue
            axis /= n
            proj_a = pa @ axis
            proj_b = pb @ axis
            overlap = min(proj_a.max(), proj_b.max()) - max(proj_a.min(), proj_b.min())
            if overlap <= 0.0:
                return None
            if overlap < best_depth:
                best_depth = overlap
                # orient from a toward b
                if proj_b.mean() < proj_a.mean():
                    axis = -axis
                best_normal = axis
    # contact point: mean of each hull's deepest corners toward the other
    depth_a = pa @ best_normal
    depth_b = pb @ best_normal
    pt_a = pa[np.argmax(depth_a)]
    pt_b = pb[np.argmin(depth_b)]
    point = 0.5 * (pt_a + pt_b)
    return best_normal, float(best_depth), point
