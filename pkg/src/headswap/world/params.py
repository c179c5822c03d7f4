"""Parameter types for the procedural person world.

A person is fully described by ``Scene`` = (``HeadParams``, ``BodyParams``,
head anchor).  Head shape + appearance define identity; pose, expression and
lighting vary freely without changing who the person is.  All fields are
range-checked at construction so every downstream consumer can assume
validity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Tuple

import numpy as np

# Declared parameter ranges (inclusive).  Angles are degrees.
SHAPE_RANGE = (-1.0, 1.0)
EXPR_RANGE = (-1.0, 1.0)
YAW_RANGE = (-90.0, 90.0)
PITCH_RANGE = (-30.0, 30.0)
ROLL_RANGE = (-20.0, 20.0)
LIGHT_AZIMUTH_RANGE = (-90.0, 90.0)
LIGHT_ELEVATION_RANGE = (-45.0, 45.0)
LIGHT_INTENSITY_RANGE = (0.5, 1.5)
TORSO_RANGE = (0.5, 1.5)
ARM_RANGE = (-1.0, 1.0)

ACCESSORY_PROB = 0.25

POSE_RANGES = (YAW_RANGE, PITCH_RANGE, ROLL_RANGE)


class ParamError(ValueError):
    """A parameter is outside its declared range."""


def _check_range(name: str, value: float, lo: float, hi: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value < lo or value > hi:
        raise ParamError(f"{name}={value!r} outside [{lo}, {hi}]")
    return value


def _check_vec(name: str, vec, n: int, lo: float, hi: float) -> np.ndarray:
    arr = np.asarray(vec, dtype=np.float64)
    if arr.shape != (n,):
        raise ParamError(f"{name} must be a {n}-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < lo or arr.max() > hi:
        raise ParamError(f"{name}={arr.tolist()} outside [{lo}, {hi}]")
    arr.flags.writeable = False
    return arr


def _check_hue(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0.0 or value >= 1.0:
        raise ParamError(f"{name}={value!r} outside [0, 1)")
    return value


@dataclass(frozen=True)
class HeadParams:
    """Everything that describes a head.

    shape:      (width, height, jaw width, hair length), each in [-1, 1]
    pose:       (yaw, pitch, roll) degrees; yaw [-90,90], pitch [-30,30],
                roll [-20,20]
    expression: (jaw open, smile, brow raise, eye close), each in [-1, 1]
    hair_hue:   [0, 1) hue of the hair
    skin_tone:  [0, 1] dark..light skin
    hat/glasses: accessory flags
    light:      (azimuth deg [-90,90], elevation deg [-45,45]),
                intensity in [0.5, 1.5]

    Identity is (shape, hair_hue, skin_tone, hat, glasses); pose, expression
    and light vary without changing identity.
    """

    shape: np.ndarray
    pose: np.ndarray
    expression: np.ndarray
    hair_hue: float
    skin_tone: float
    hat: bool
    glasses: bool
    light_dir: np.ndarray  # (azimuth, elevation) degrees
    light_intensity: float

    def __post_init__(self):
        object.__setattr__(self, "shape", _check_vec("shape", self.shape, 4, *SHAPE_RANGE))
        pose = np.asarray(self.pose, dtype=np.float64)
        if pose.shape != (3,):
            raise ParamError(f"pose must be a 3-vector, got shape {pose.shape}")
        for i, (name, rng) in enumerate(zip(("yaw", "pitch", "roll"), POSE_RANGES)):
            _check_range(name, pose[i], *rng)
        pose.flags.writeable = False
        object.__setattr__(self, "pose", pose)
        object.__setattr__(self, "expression", _check_vec("expression", self.expression, 4, *EXPR_RANGE))
        object.__setattr__(self, "hair_hue", _check_hue("hair_hue", self.hair_hue))
        object.__setattr__(self, "skin_tone", _check_range("skin_tone", self.skin_tone, 0.0, 1.0))
        object.__setattr__(self, "hat", bool(self.hat))
        object.__setattr__(self, "glasses", bool(self.glasses))
        light = np.asarray(self.light_dir, dtype=np.float64)
        if light.shape != (2,):
            raise ParamError(f"light_dir must be a 2-vector, got shape {light.shape}")
        _check_range("light_azimuth", light[0], *LIGHT_AZIMUTH_RANGE)
        _check_range("light_elevation", light[1], *LIGHT_ELEVATION_RANGE)
        light.flags.writeable = False
        object.__setattr__(self, "light_dir", light)
        object.__setattr__(self, "light_intensity", _check_range("light_intensity", self.light_intensity, *LIGHT_INTENSITY_RANGE))

    def identity_fields(self) -> Tuple[np.ndarray, float, float, bool, bool]:
        return (self.shape, self.hair_hue, self.skin_tone, self.hat, self.glasses)

    def with_pose_expression(self, pose, expression) -> "HeadParams":
        return replace(self, pose=np.asarray(pose, dtype=np.float64), expression=np.asarray(expression, dtype=np.float64))

    def with_light(self, light_dir, light_intensity) -> "HeadParams":
        return replace(self, light_dir=np.asarray(light_dir, dtype=np.float64), light_intensity=float(light_intensity))


@dataclass(frozen=True)
class BodyParams:
    """Torso/backdrop description.  Nuisance from the head's point of view."""

    torso_w: float
    torso_h: float
    cloth_hue: float
    bg_hue: float
    arm_pose: float

    def __post_init__(self):
        object.__setattr__(self, "torso_w", _check_range("torso_w", self.torso_w, *TORSO_RANGE))
        object.__setattr__(self, "torso_h", _check_range("torso_h", self.torso_h, *TORSO_RANGE))
        object.__setattr__(self, "cloth_hue", _check_hue("cloth_hue", self.cloth_hue))
        object.__setattr__(self, "bg_hue", _check_hue("bg_hue", self.bg_hue))
        object.__setattr__(self, "arm_pose", _check_range("arm_pose", self.arm_pose, *ARM_RANGE))


@dataclass(frozen=True)
class Scene:
    """A renderable person: head + body + head-center pixel position.

    ``anchor`` is (row, col) of the head center.  ``frame`` is the square
    frame side in pixels; the anchor must leave the whole rendered head
    (hair, hat included) inside the frame.
    """

    head: HeadParams
    body: BodyParams
    anchor: Tuple[float, float]
    frame: int = 64

    def __post_init__(self):
        frame = int(self.frame)
        if frame < 16:
            raise ParamError(f"frame={frame} too small")
        object.__setattr__(self, "frame", frame)
        r, c = float(self.anchor[0]), float(self.anchor[1])
        object.__setattr__(self, "anchor", (r, c))
        if not (0 <= r < frame and 0 <= c < frame):
            raise ParamError(f"anchor {self.anchor} outside {frame}x{frame} frame")
        up, down, left, right = head_extent(self.head, frame)
        if r - up < 0 or r + down > frame - 1 or c - left < 0 or c + right > frame - 1:
            raise ParamError(
                f"head extent ({up:.1f},{down:.1f},{left:.1f},{right:.1f}) at anchor {self.anchor} "
                f"leaves the {frame}x{frame} frame"
            )


def head_semiaxes(head: HeadParams, frame: int) -> Tuple[float, float, float]:
    """Ellipsoid semi-axes (A horizontal, B vertical, C depth) in pixels."""
    scale = frame / 64.0
    a = 9.5 * (1.0 + 0.28 * head.shape[0]) * scale
    b = 12.0 * (1.0 + 0.25 * head.shape[1]) * scale
    b *= 1.0 + 0.10 * max(head.expression[0], 0.0)  # jaw open elongates vertically
    c = 1.08 * a
    return a, b, c


def head_extent(head: HeadParams, frame: int) -> Tuple[float, float, float, float]:
    """Conservative (up, down, left, right) pixel extents of the rendered head.

    Bounds the hair outer ellipse (the largest head layer), its linear
    yaw-dependent sideways shift, the hat band, and the nose protrusion,
    under any roll in range.
    """
    a, b, c = head_semiaxes(head, frame)
    ah, bh = 1.32 * a, 1.27 * b
    roll = np.deg2rad(ROLL_RANGE[1])
    # rotated-ellipse axis-aligned half extents
    half_w = float(np.hypot(ah * np.cos(roll), bh * np.sin(roll)))
    half_h = float(np.hypot(ah * np.sin(roll), bh * np.cos(roll)))
    half_w += 0.30 * a + abs(0.15 * c)  # hair yaw shift + nose protrusion margin
    half_h += 0.12 * b + 0.06 * b  # hair pitch/base shift
    pad = 1.5 * frame / 64.0
    return half_h + pad, half_h + pad, half_w + pad, half_w + pad


def sample_head(rng: np.random.Generator) -> HeadParams:
    u = rng.uniform
    return HeadParams(
        shape=u(-1.0, 1.0, size=4),
        pose=np.array([u(*YAW_RANGE), u(*PITCH_RANGE), u(*ROLL_RANGE)]),
        expression=u(-1.0, 1.0, size=4),
        hair_hue=u(0.0, 1.0),
        skin_tone=u(0.0, 1.0),
        hat=bool(rng.random() < ACCESSORY_PROB),
        glasses=bool(rng.random() < ACCESSORY_PROB),
        light_dir=np.array([u(*LIGHT_AZIMUTH_RANGE), u(*LIGHT_ELEVATION_RANGE)]),
        light_intensity=u(*LIGHT_INTENSITY_RANGE),
    )


def sample_body(rng: np.random.Generator) -> BodyParams:
    u = rng.uniform
    return BodyParams(
        torso_w=u(*TORSO_RANGE),
        torso_h=u(*TORSO_RANGE),
        cloth_hue=u(0.0, 1.0),
        bg_hue=u(0.0, 1.0),
        arm_pose=u(*ARM_RANGE),
    )


def sample_scene(rng: np.random.Generator, frame: int = 64) -> Scene:
    """Uniformly sample a valid scene; accessories appear with p=0.25 each.

    The anchor is drawn uniformly over the positions that keep the whole
    head inside the frame for the sampled head.
    """
    head = sample_head(rng)
    body = sample_body(rng)
    up, down, left, right = head_extent(head, frame)
    r = rng.uniform(up, frame - 1 - down)
    c = rng.uniform(left, frame - 1 - right)
    return Scene(head=head, body=body, anchor=(r, c), frame=frame)


# Sidecar serialization: fixed key order, full float precision.
_SIDECAR_KEYS = (
    "frame",
    "shape0", "shape1", "shape2", "shape3",
    "yaw", "pitch", "roll",
    "expr0", "expr1", "expr2", "expr3",
    "hair_hue", "skin_tone", "hat", "glasses",
    "light_azimuth", "light_elevation", "light_intensity",
    "torso_w", "torso_h", "cloth_hue", "bg_hue", "arm_pose",
    "anchor_row", "anchor_col",
)


def scene_to_sidecar(scene: Scene) -> str:
    h, b = scene.head, scene.body
    vals = {
        "frame": scene.frame,
        "shape0": h.shape[0], "shape1": h.shape[1], "shape2": h.shape[2], "shape3": h.shape[3],
        "yaw": h.pose[0], "pitch": h.pose[1], "roll": h.pose[2],
        "expr0": h.expression[0], "expr1": h.expression[1],
        "expr2": h.expression[2], "expr3": h.expression[3],
        "hair_hue": h.hair_hue, "skin_tone": h.skin_tone,
        "hat": int(h.hat), "glasses": int(h.glasses),
        "light_azimuth": h.light_dir[0], "light_elevation": h.light_dir[1],
        "light_intensity": h.light_intensity,
        "torso_w": b.torso_w, "torso_h": b.torso_h,
        "cloth_hue": b.cloth_hue, "bg_hue": b.bg_hue, "arm_pose": b.arm_pose,
        "anchor_row": scene.anchor[0], "anchor_col": scene.anchor[1],
    }
    return "".join(f"{k}={vals[k]!r}\n" for k in _SIDECAR_KEYS)


def scene_from_sidecar(text: str) -> Scene:
    vals = {}
    for line in text.strip().splitlines():
        k, _, v = line.partition("=")
        vals[k.strip()] = v.strip()
    missing = [k for k in _SIDECAR_KEYS if k not in vals]
    if missing:
        raise ParamError(f"sidecar missing keys: {missing}")
    f = lambda k: float(vals[k])
    head = HeadParams(
        shape=np.array([f("shape0"), f("shape1"), f("shape2"), f("shape3")]),
        pose=np.array([f("yaw"), f("pitch"), f("roll")]),
        expression=np.array([f("expr0"), f("expr1"), f("expr2"), f("expr3")]),
        hair_hue=f("hair_hue"),
        skin_tone=f("skin_tone"),
        hat=bool(int(float(vals["hat"]))),
        glasses=bool(int(float(vals["glasses"]))),
        light_dir=np.array([f("light_azimuth"), f("light_elevation")]),
        light_intensity=f("light_intensity"),
    )
    body = BodyParams(
        torso_w=f("torso_w"), torso_h=f("torso_h"),
        cloth_hue=f("cloth_hue"), bg_hue=f("bg_hue"), arm_pose=f("arm_pose"),
    )
    return Scene(head=head, body=body, anchor=(f("anchor_row"), f("anchor_col")), frame=int(float(vals["frame"])))
