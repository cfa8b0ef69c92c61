"""SE(3) pose algebra: rotations, configurations, metric, interpolation, sampling.

A configuration is a rigid-body pose: a translation in map units plus a unit
quaternion rotation. The configuration metric is

    dist(a, b) = ||t_a - t_b||_2 + w_rot * angle(R_a, R_b)

where ``angle`` is the geodesic rotation angle in [0, pi] and ``w_rot`` (map
units per radian) trades rotation against translation. All types are immutable
values and safe to share across threads.
"""

import math
from dataclasses import dataclass

import numpy as np

_QUAT_NORM_SKIP = 1e-12  # |norm^2 - 1| below this: keep bits as-is


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64).reshape(3).copy()
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    a.setflags(write=False)
    return a


class Rotation:
    """Unit quaternion (w, x, y, z). Renormalized on construction.

    ``q`` and ``-q`` represent the same rotation and compare equal under
    :meth:`approx_equal`.
    """

    __slots__ = ("q",)

    def __init__(self, w: float, x: float, y: float, z: float):
        q = np.array([w, x, y, z], dtype=np.float64)
        if not np.all(np.isfinite(q)):
            raise ValueError("quaternion components must be finite")
        n2 = float(q @ q)
        if n2 <= 0.0:
            raise ValueError("zero quaternion is not a rotation")
        # Skip the divide when already unit-norm so that construction from an
        # already-normalized quaternion is bitwise stable (exact round trips).
        if abs(n2 - 1.0) > _QUAT_NORM_SKIP:
            q /= math.sqrt(n2)
        q.setflags(write=False)
        self.q = q

    @classmethod
    def identity(cls) -> "Rotation":
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def from_array(cls, q) -> "Rotation":
        w, x, y, z = np.asarray(q, dtype=np.float64).reshape(4)
        return cls(w, x, y, z)

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "Rotation":
        a = np.asarray(axis, dtype=np.float64).reshape(3)
        n = float(np.linalg.norm(a))
        if n == 0.0:
            raise ValueError("rotation axis must be nonzero")
        h = 0.5 * angle
        s = math.sin(h) / n
        return cls(math.cos(h), a[0] * s, a[1] * s, a[2] * s)

    @classmethod
    def from_matrix(cls, m) -> "Rotation":
        """Quaternion from a 3x3 rotation matrix (Shepperd's method)."""
        m = np.asarray(m, dtype=np.float64).reshape(3, 3)
        t = m[0, 0] + m[1, 1] + m[2, 2]
        if t > 0.0:
            s = math.sqrt(t + 1.0) * 2.0
            return cls(0.25 * s, (m[2, 1] - m[1, 2]) / s,
                       (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s)
        i = int(np.argmax([m[0, 0], m[1, 1], m[2, 2]]))
        if i == 0:
            s = math.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            return cls((m[2, 1] - m[1, 2]) / s, 0.25 * s,
                       (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s)
        if i == 1:
            s = math.sqrt(1.0 + m[1, 1] - m[0, 0] - m[2, 2]) * 2.0
            return cls((m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s,
                       0.25 * s, (m[1, 2] + m[2, 1]) / s)
        s = math.sqrt(1.0 + m[2, 2] - m[0, 0] - m[1, 1]) * 2.0
        return cls((m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s,
                   (m[1, 2] + m[2, 1]) / s, 0.25 * s)

    def matrix(self) -> np.ndarray:
        w, x, y, z = self.q
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def compose(self, other: "Rotation") -> "Rotation":
        """Hamilton product self * other (apply ``other`` first)."""
        w1, x1, y1, z1 = self.q
        w2, x2, y2, z2 = other.q
        return Rotation(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def inverse(self) -> "Rotation":
        w, x, y, z = self.q
        return Rotation(w, -x, -y, -z)

    def rotate(self, v) -> np.ndarray:
        """Rotate one 3-vector or an (n, 3) array of vectors."""
        a = np.asarray(v, dtype=np.float64)
        return a @ self.matrix().T

    def angle_to(self, other: "Rotation") -> float:
        """Geodesic angle in [0, pi]; double cover handled via |dot|."""
        d = abs(float(self.q @ other.q))
        if d >= 1.0:
            return 0.0
        return 2.0 * math.acos(d)

    def slerp(self, other: "Rotation", s: float) -> "Rotation":
        """Shortest-arc spherical interpolation; exact at the endpoints."""
        if s <= 0.0:
            return self
        if s >= 1.0:
            return other
        q0 = self.q
        q1 = other.q
        dot = float(q0 @ q1)
        if dot < 0.0:
            q1 = -q1
            dot = -dot
        if dot > 1.0 - 1e-12:
            q = (1.0 - s) * q0 + s * q1
            return Rotation.from_array(q)
        theta = math.acos(min(dot, 1.0))
        st = math.sin(theta)
        q = (math.sin((1.0 - s) * theta) / st) * q0 + (math.sin(s * theta) / st) * q1
        return Rotation.from_array(q)

    def approx_equal(self, other: "Rotation", tol: float = 1e-9) -> bool:
        return self.angle_to(other) <= tol

    def __repr__(self):
        return "Rotation(w={}, x={}, y={}, z={})".format(*self.q)


class Configuration:
    """An SE(3) pose: translation (map units) + unit quaternion rotation."""

    __slots__ = ("translation", "rotation")

    def __init__(self, translation, rotation: Rotation):
        self.translation = _as_vec3(translation)
        if not isinstance(rotation, Rotation):
            raise TypeError("rotation must be a Rotation")
        self.rotation = rotation

    @classmethod
    def identity(cls) -> "Configuration":
        return cls((0.0, 0.0, 0.0), Rotation.identity())

    @classmethod
    def from_array(cls, a) -> "Configuration":
        """Deserialize from [x, y, z, qw, qx, qy, qz] (rotation normalized)."""
        a = np.asarray(a, dtype=np.float64).reshape(7)
        return cls(a[:3], Rotation.from_array(a[3:]))

    def to_array(self) -> np.ndarray:
        """Serialize to [x, y, z, qw, qx, qy, qz]."""
        return np.concatenate([self.translation, self.rotation.q])

    def compose(self, other: "Configuration") -> "Configuration":
        """Pose applying ``other`` first, then ``self``."""
        return Configuration(
            self.rotation.rotate(other.translation) + self.translation,
            self.rotation.compose(other.rotation),
        )

    def inverse(self) -> "Configuration":
        rinv = self.rotation.inverse()
        return Configuration(-rinv.rotate(self.translation), rinv)

    def apply(self, points) -> np.ndarray:
        """Map local-frame point(s) into the world frame."""
        return self.rotation.rotate(points) + self.translation

    def __repr__(self):
        return f"Configuration(t={self.translation.tolist()}, r={self.rotation!r})"


@dataclass(frozen=True)
class MetricWeights:
    """Rotation weight of the configuration metric, in map units per radian."""

    w_rot: float = 0.5

    def __post_init__(self):
        if not (self.w_rot >= 0.0):
            raise ValueError("w_rot must be nonnegative")


@dataclass(frozen=True)
class SampleBounds:
    """Axis-aligned translation box for uniform configuration sampling."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = _as_vec3(self.lo)
        hi = _as_vec3(self.hi)
        if np.any(lo > hi):
            raise ValueError("bounds must satisfy min <= max componentwise")
        object.__setattr__(self, "lo", tuple(lo.tolist()))
        object.__setattr__(self, "hi", tuple(hi.tolist()))

    def expanded(self, margin: float) -> "SampleBounds":
        lo = np.asarray(self.lo) - margin
        hi = np.asarray(self.hi) + margin
        return SampleBounds(tuple(lo.tolist()), tuple(hi.tolist()))


def config_distance(a: Configuration, b: Configuration,
                    weights: MetricWeights = MetricWeights()) -> float:
    """Weighted SE(3) metric: Euclidean translation plus geodesic rotation."""
    dt = float(np.linalg.norm(a.translation - b.translation))
    return dt + weights.w_rot * a.rotation.angle_to(b.rotation)


def interpolate(a: Configuration, b: Configuration, s: float) -> Configuration:
    """Linear translation / shortest-arc rotation interpolation, s in [0, 1]."""
    if not (0.0 <= s <= 1.0):
        raise ValueError("interpolation parameter must be in [0, 1]")
    if s == 0.0:
        return a
    if s == 1.0:
        return b
    t = (1.0 - s) * a.translation + s * b.translation
    return Configuration(t, a.rotation.slerp(b.rotation, s))


def random_rotation(rng: np.random.Generator) -> Rotation:
    """Uniform rotation via the subgroup-algorithm (Shoemake) construction.

    Consumes exactly three uniform draws, so sample streams are reproducible.
    """
    u1, u2, u3 = rng.random(3)
    a = math.sqrt(1.0 - u1)
    b = math.sqrt(u1)
    t2 = 2.0 * math.pi * u2
    t3 = 2.0 * math.pi * u3
    return Rotation(b * math.cos(t3), a * math.sin(t2), a * math.cos(t2), b * math.sin(t3))


def sample_uniform(bounds: SampleBounds, rng: np.random.Generator) -> Configuration:
    """Translation uniform in the box, rotation uniform on SO(3)."""
    lo = np.asarray(bounds.lo)
    hi = np.asarray(bounds.hi)
    t = lo + rng.random(3) * (hi - lo)
    return Configuration(t, random_rotation(rng))
