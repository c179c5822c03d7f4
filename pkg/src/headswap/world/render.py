"""Deterministic procedural person renderer.

The head is a 3D ellipsoid viewed orthographically along -z (x right,
y down, z toward the viewer).  Pose rotates the ellipsoid; the silhouette
and per-pixel surface normals come from the rotated quadric in closed form.
Facial features are anchored to fixed points on the ellipsoid surface, so
their pixel positions follow the pose exactly (an affine function of the
rotation matrix entries).  Two deliberately non-sinusoidal cues keep yaw
identifiable near profile views, where all projected positions have zero
derivative: the hair mass shifts sideways linearly in yaw, and the fringe
line moves linearly in yaw.

Everything is drawn with ~1px antialiased edges so that image MSE is smooth
in every parameter; the parameter estimator depends on this.

All functions are pure: identical inputs give bit-identical outputs.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Tuple

import numpy as np

from .params import HeadParams, Scene, head_semiaxes

# Segmentation labels (closed set).
BACKGROUND, BODY, FACE, HAIR, ACCESSORY, NECK = 0, 1, 2, 3, 4, 5
LABELS = (BACKGROUND, BODY, FACE, HAIR, ACCESSORY, NECK)

# Densepose-style palette: one fixed color per label, background black.
DENSEPOSE_PALETTE = np.array(
    [
        [0.00, 0.00, 0.00],  # background
        [0.15, 0.30, 0.70],  # body
        [0.75, 0.55, 0.40],  # face
        [0.70, 0.20, 0.20],  # hair
        [0.20, 0.65, 0.30],  # accessory
        [0.75, 0.70, 0.30],  # neck
    ]
)

# Shading model: value *= intensity * (AMBIENT + DIFFUSE * max(0, n.L)).
AMBIENT = 0.5
DIFFUSE = 0.3

# Fixed feature colors (all <= 0.82 so shading never clips).
_COL_MOUTH = np.array([0.60, 0.22, 0.22])
_COL_MOUTH_INNER = np.array([0.22, 0.07, 0.07])
_COL_EYE = np.array([0.80, 0.80, 0.80])
_COL_PUPIL = np.array([0.08, 0.08, 0.10])
_COL_BROW = np.array([0.16, 0.12, 0.10])
_COL_HAT = np.array([0.18, 0.20, 0.55])
_COL_GLASSES = np.array([0.10, 0.10, 0.12])
_SKIN_DARK = np.array([0.35, 0.24, 0.18])
_SKIN_LIGHT = np.array([0.82, 0.66, 0.54])


@lru_cache(maxsize=8)
def _grid(frame: int):
    ys, xs = np.mgrid[0:frame, 0:frame].astype(np.float64)
    ys.flags.writeable = False
    xs.flags.writeable = False
    return ys, xs


def hue_rgb(hue: float, sat: float, val: float) -> np.ndarray:
    """HSV -> RGB for scalar hue; plain hexcone formula."""
    h = (hue % 1.0) * 6.0
    i = int(h)
    f = h - i
    p, q, t = val * (1 - sat), val * (1 - sat * f), val * (1 - sat * (1 - f))
    rgb = [
        (val, t, p), (q, val, p), (p, val, t),
        (p, q, val), (t, p, val), (val, p, q),
    ][i % 6]
    return np.array(rgb)


def light_vector(light_dir: np.ndarray) -> np.ndarray:
    """Unit light direction from (azimuth, elevation) degrees.

    Azimuth 0 / elevation 0 is frontal (0, 0, 1); positive azimuth moves the
    light to +x, positive elevation moves it up (-y, since y points down).
    """
    az, el = np.deg2rad(light_dir[0]), np.deg2rad(light_dir[1])
    return np.array([np.sin(az) * np.cos(el), -np.sin(el), np.cos(az) * np.cos(el)])


def pose_rotation(pose: np.ndarray) -> np.ndarray:
    """World-from-local rotation for (yaw, pitch, roll) degrees.

    x right, y down, z toward viewer.  Positive yaw turns the face toward
    +x (viewer's right); positive pitch tips the face up; positive roll
    tilts the head clockwise on screen.  R = Rz(roll) @ Rx(pitch) @ Ry(yaw).
    """
    yaw, pitch, roll = np.deg2rad(pose)
    cy, sy = np.cos(yaw), np.sin(yaw)
    cp, sp = np.cos(pitch), np.sin(pitch)
    cr, sr = np.cos(roll), np.sin(roll)
    ry = np.array([[cy, 0.0, sy], [0.0, 1.0, 0.0], [-sy, 0.0, cy]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cp, sp], [0.0, -sp, cp]])
    rz = np.array([[cr, sr, 0.0], [-sr, cr, 0.0], [0.0, 0.0, 1.0]])
    return rz @ rx @ ry


def _smooth01(x):
    """Clamped smoothstep on [0, 1]."""
    t = np.clip(x, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def _soft_inside(signed_dist, aa: float = 1.1):
    """1 inside, 0 outside, ~aa-pixel smooth edge.  signed_dist > 0 inside."""
    return _smooth01(signed_dist / aa + 0.5)


def _ellipse_cov(u, v, cu, cv, ru, rv, aa: float = 1.1):
    """Antialiased coverage of an axis-aligned ellipse in (u, v) coords."""
    val = ((u - cu) / ru) ** 2 + ((v - cv) / rv) ** 2
    sd = (1.0 - np.sqrt(np.maximum(val, 1e-12))) * min(ru, rv)
    return _soft_inside(sd, aa)


def ellipsoid_fields(head: HeadParams, anchor, frame: int):
    """Closed-form view of the posed head ellipsoid over the whole frame.

    Returns (inside, n_local, n_world):
      inside   HxW bool, pixel center within the projected silhouette
      n_local  HxWx3 unit normals in the head's local frame (expression
               tilts applied); arbitrary-but-unit values outside
      n_world  HxWx3 world-frame normals used for shading; outside the
               silhouette they continue the z=0 grazing field so shading
               stays continuous across the hair boundary
    """
    a, b, c = head_semiaxes(head, frame)
    rot = pose_rotation(head.pose)
    d = np.array([1.0 / a**2, 1.0 / b**2, 1.0 / c**2])
    q = rot @ np.diag(d) @ rot.T

    ys, xs = _grid(frame)
    u = xs - anchor[1]
    v = ys - anchor[0]

    # Solve q22*z^2 + 2*(q02*u + q12*v)*z + (quad2d - 1) = 0 for the front z.
    q22 = q[2, 2]
    bz = q[0, 2] * u + q[1, 2] * v
    quad2d = q[0, 0] * u * u + 2.0 * q[0, 1] * u * v + q[1, 1] * v * v
    disc = bz * bz - q22 * (quad2d - 1.0)
    inside = disc > 0.0
    z = (-bz + np.sqrt(np.maximum(disc, 0.0))) / q22  # larger root faces viewer

    pw = np.stack([u, v, np.where(inside, z, 0.0)], axis=-1)
    pl = pw @ rot  # == rot.T applied to each point
    nl = pl * d  # gradient of local quadric
    nl /= np.maximum(np.linalg.norm(nl, axis=-1, keepdims=True), 1e-12)

    nl = _expression_tilts(nl, pl, head.expression, a, b)
    nw = nl @ rot.T
    return inside, nl, nw


def _rotx(n, angle):
    ca, sa = np.cos(angle), np.sin(angle)
    y = ca * n[..., 1] - sa * n[..., 2]
    z = sa * n[..., 1] + ca * n[..., 2]
    return np.stack([n[..., 0], y, z], axis=-1)


def _expression_tilts(nl, pl, expr, a, b):
    """Tilt local normals inside fixed, compactly supported facial windows.

    Rule: jaw-open already stretched the ellipsoid vertically (see
    head_semiaxes); on top of that each expression component rotates the
    normals within its window, scaled by the component value.  Window
    weights are exactly zero outside their radius, so the ellipse center
    pixel is never touched.
    """
    xn = pl[..., 0] / a
    yn = pl[..., 1] / b

    def window(cx, cy, r):
        dist = np.sqrt((xn - cx) ** 2 + (yn - cy) ** 2)
        return _smooth01(1.0 - dist / r)

    jaw, smile, brow, eyec = expr

    w = window(0.0, 0.55, 0.32)
    if jaw != 0.0:
        nl = _rotx(nl, np.deg2rad(28.0) * jaw * w)
    if smile != 0.0:
        for sx in (-1.0, 1.0):
            w = window(0.48 * sx, 0.18, 0.26)
            ang = np.deg2rad(-20.0) * smile * w * sx
            ca, sa = np.cos(ang), np.sin(ang)
            x = ca * nl[..., 0] + sa * nl[..., 2]
            z = -sa * nl[..., 0] + ca * nl[..., 2]
            nl = np.stack([x, nl[..., 1], z], axis=-1)
    if brow != 0.0:
        w = window(-0.42, -0.45, 0.24) + window(0.42, -0.45, 0.24)
        nl = _rotx(nl, np.deg2rad(-16.0) * brow * w)
    if eyec != 0.0:
        w = window(-0.45, -0.20, 0.22) + window(0.45, -0.20, 0.22)
        nl = _rotx(nl, np.deg2rad(12.0) * eyec * w)
    return nl


def render_normal_map(head: HeadParams, anchor, frame: int = 64) -> np.ndarray:
    """Head-local surface normals of the posed head, encoded as (n+1)/2.

    Pixels outside the silhouette are exactly (0,0,0).  Because normals are
    expressed in the head's own frame, the map rotates with the pose: at
    zero pose the silhouette center encodes (0,0,1) -> RGB (0.5, 0.5, 1.0);
    at yaw=+90 the center encodes (-1,0,0).
    """
    inside, nl, _ = ellipsoid_fields(head, anchor, frame)
    out = np.where(inside[..., None], (nl + 1.0) * 0.5, 0.0)
    return out


def decode_normals(normal_map: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Inverse of the (n+1)/2 encoding -> (normals, interior mask)."""
    interior = np.any(normal_map != 0.0, axis=-1)
    return normal_map * 2.0 - 1.0, interior


def _feature_anchor(rot, a, b, c, xn, yn, zn=None):
    """Project a point given in normalized local coords onto the frame."""
    if zn is None:
        zn = np.sqrt(max(1.0 - xn * xn - yn * yn, 0.0))
    pl = np.array([xn * a, yn * b, zn * c])
    return rot @ pl


def render_scene(scene: Scene) -> Tuple[np.ndarray, np.ndarray]:
    """Render a scene to an RGB raster in [0,1] and its label map.

    Layer order (later covers earlier): background, torso, arms, neck,
    hair, face, fringe, nose, mouth, eyes, brows, glasses, hat.
    A pixel's label is the topmost layer covering it with weight > 0.5.
    Head pixels are shaded with the ellipsoid's world normals, everything
    else with a flat frontal normal; both use the same Lambert factor
    intensity * (0.5 + 0.3 * max(0, n.L)).
    """
    frame = scene.frame
    scale = frame / 64.0
    head, body = scene.head, scene.body
    r0, c0 = scene.anchor
    ys, xs = _grid(frame)
    x = xs - c0
    y = ys - r0

    a, b, c = head_semiaxes(head, frame)
    rot = pose_rotation(head.pose)
    yaw01 = head.pose[0] / 90.0

    # Rolled 2D head frame for hair/hat (roll only; yaw/pitch move content).
    roll = np.deg2rad(head.pose[2])
    cr, sr = np.cos(roll), np.sin(roll)
    u = cr * x + sr * y
    v = -sr * x + cr * y

    inside, nl, nw = ellipsoid_fields(head, scene.anchor, frame)

    layers = []  # (coverage, color HxWx3 or 3-vector, label, is_head_layer)

    # -- body --------------------------------------------------------------
    cloth = hue_rgb(body.cloth_hue, 0.55, 0.62)
    skin = _SKIN_DARK + (_SKIN_LIGHT - _SKIN_DARK) * head.skin_tone
    shoulder_y = 1.15 * b + 6.0 * scale * body.torso_h
    torso_hw = 14.0 * scale * body.torso_w
    ramp = _smooth01((y - shoulder_y) / (7.0 * scale)) ** 0.35
    torso_sd = torso_hw * ramp - np.abs(x)
    torso_cov = _soft_inside(np.minimum(torso_sd, y - shoulder_y))
    layers.append((torso_cov, cloth, BODY, False))

    arm_ang = np.deg2rad(18.0 + 14.0 * body.arm_pose)
    arm_cov = np.zeros_like(x)
    for sx in (-1.0, 1.0):
        ax0, ay0 = sx * (torso_hw + 0.5 * scale), shoulder_y + 3.0 * scale
        dx, dy = sx * np.sin(arm_ang), np.cos(arm_ang)
        px, py = x - ax0, y - ay0
        t = np.clip(px * dx + py * dy, 0.0, 40.0 * scale)
        dist = np.hypot(px - t * dx, py - t * dy)
        arm_cov = np.maximum(arm_cov, _soft_inside(4.2 * scale - dist))
    layers.append((arm_cov, cloth * 0.94, BODY, False))

    neck_hw = 0.36 * a
    neck_cov = _soft_inside(neck_hw - np.abs(x)) * _soft_inside(y - 0.55 * b) * _soft_inside(shoulder_y + 3.0 * scale - y)
    layers.append((neck_cov, skin * 0.97, NECK, False))

    # -- hair ---------------------------------------------------------------
    hair = hue_rgb(head.hair_hue, 0.65, 0.50)
    hlen01 = (head.shape[3] + 1.0) / 2.0
    ah, bh = 1.32 * a, 1.27 * b
    du_h = -0.30 * a * yaw01
    dv_h = -0.06 * b + 0.12 * b * np.sin(np.deg2rad(head.pose[1]))
    hair_bottom = b * (0.15 + 1.05 * hlen01)
    hair_cov = _ellipse_cov(u, v, du_h, dv_h, ah, bh) * _soft_inside(hair_bottom - v, 2.2)
    layers.append((hair_cov, hair, HAIR, True))

    # -- face ---------------------------------------------------------------
    # Silhouette of the posed ellipsoid, with the jaw widening the lower half.
    jaw_ramp = _smooth01((v / b - 0.05) / 0.7)
    jaw_g = 1.0 + 0.22 * head.shape[2] * jaw_ramp
    # Re-evaluate the quadric with u shrunk by the jaw factor (rolled frame).
    x_j = (u / jaw_g) * cr - v * sr
    y_j = (u / jaw_g) * sr + v * cr
    d = np.array([1.0 / a**2, 1.0 / b**2, 1.0 / c**2])
    q = rot @ np.diag(d) @ rot.T
    bz = q[0, 2] * x_j + q[1, 2] * y_j
    quad2d = q[0, 0] * x_j * x_j + 2.0 * q[0, 1] * x_j * y_j + q[1, 1] * y_j * y_j
    disc = bz * bz - q[2, 2] * (quad2d - 1.0)
    face_sd = disc * (a * b * q[2, 2]) * 0.5  # ~pixel-scaled signed distance
    face_cov = _soft_inside(face_sd / np.maximum(np.sqrt(np.abs(face_sd)), 1.0))
    layers.append((face_cov, skin, FACE, True))

    # fringe: hair covering the top of the face; line moves linearly in yaw
    v_fringe = -b * (0.52 - 0.22 * yaw01)
    fringe_cov = face_cov * _soft_inside(v_fringe - v, 1.6) * _ellipse_cov(u, v, du_h, dv_h, ah, bh)
    layers.append((fringe_cov, hair, HAIR, True))

    # -- facial features ----------------------------------------------------
    jaw, smile, brow, eyec = head.expression

    def vis(pw):
        return _smooth01((pw[2] / c - 0.02) / 0.22)

    def fcov(pw, ru, rv, aa=1.1):
        fu = cr * pw[0] + sr * pw[1]
        fv = -sr * pw[0] + cr * pw[1]
        return _ellipse_cov(u, v, fu, fv, ru, rv, aa) * vis(pw)

    nose_w = _feature_anchor(rot, a, b, c, 0.0, 0.10, 1.14)
    nose_cov = _ellipse_cov(
        u, v,
        cr * nose_w[0] + sr * nose_w[1],
        -sr * nose_w[0] + cr * nose_w[1],
        0.10 * a, 0.085 * b,
    ) * _smooth01((nose_w[2] / c + 0.5) / 0.3)
    layers.append((nose_cov, skin * 0.88, FACE, True))

    mouth_w = _feature_anchor(rot, a, b, c, 0.0, 0.52 - 0.05 * smile)
    wm = a * (0.26 + 0.07 * smile)
    hm = b * (0.032 + 0.045 * (1.0 + jaw))
    mouth_cov = fcov(mouth_w, wm, hm)
    open01 = np.clip(jaw, 0.0, 1.0)
    mouth_col = _COL_MOUTH * (1 - 0.8 * open01) + _COL_MOUTH_INNER * 0.8 * open01
    layers.append((mouth_cov, mouth_col, FACE, True))

    he = 0.085 * b * (1.0 - 0.38 * (eyec + 1.0))
    for sx in (-1.0, 1.0):
        eye_w = _feature_anchor(rot, a, b, c, 0.42 * sx, -0.18)
        layers.append((fcov(eye_w, 0.16 * a, max(he, 0.2)), _COL_EYE, FACE, True))
        layers.append((fcov(eye_w, 0.055 * a, max(0.8 * he, 0.15)), _COL_PUPIL, FACE, True))
        brow_w = _feature_anchor(rot, a, b, c, 0.42 * sx, -0.40 - 0.10 * brow)
        layers.append((fcov(brow_w, 0.17 * a, 0.032 * b + 0.25), _COL_BROW, FACE, True))

    # -- accessories ----------------------------------------------------------
    if head.glasses:
        g_cov = np.zeros_like(x)
        rims = []
        for sx in (-1.0, 1.0):
            eye_w = _feature_anchor(rot, a, b, c, 0.42 * sx, -0.18)
            fu = cr * eye_w[0] + sr * eye_w[1]
            fv = -sr * eye_w[0] + cr * eye_w[1]
            rg = 0.23 * a
            val = np.sqrt(((u - fu) / rg) ** 2 + ((v - fv) / (rg * 0.85)) ** 2)
            ring = _soft_inside((0.016 * a + 0.45) - np.abs(val - 1.0) * rg * 0.9)
            g_cov = np.maximum(g_cov, ring * vis(eye_w))
            rims.append((fu, fv, rg))
        (lu, lv, rg) = rims[0]
        (ru_, rv_, _) = rims[1]
        mid_u, mid_v = 0.5 * (lu + ru_), 0.5 * (lv + rv_)
        bridge = _ellipse_cov(u, v, mid_u, mid_v, max(0.5 * abs(ru_ - lu) - rg * 0.8, 1.0), 0.022 * b + 0.3)
        g_cov = np.maximum(g_cov, bridge * face_cov)
        layers.append((g_cov, _COL_GLASSES, ACCESSORY, True))

    if head.hat:
        hat_top, hat_bot = -0.92 * b, -0.60 * b
        hat_cov = (
            _soft_inside(v - hat_top, 1.4)
            * _soft_inside(hat_bot - v, 1.4)
            * _ellipse_cov(u, v, du_h, dv_h, 1.06 * ah, 1.04 * bh)
        )
        layers.append((hat_cov, _COL_HAT, ACCESSORY, True))

    # -- composite ------------------------------------------------------------
    bg = hue_rgb(body.bg_hue, 0.25, 0.78)
    img = np.empty((frame, frame, 3))
    img[:] = bg
    seg = np.zeros((frame, frame), dtype=np.uint8)
    head_cov = np.zeros_like(x)
    for cov, col, label, is_head in layers:
        img = img * (1.0 - cov[..., None]) + np.asarray(col) * cov[..., None]
        seg = np.where(cov > 0.5, np.uint8(label), seg)
        if is_head:
            head_cov = np.maximum(head_cov, cov)

    # -- shading ----------------------------------------------------------------
    lvec = light_vector(head.light_dir)
    ndotl_head = np.maximum(nw @ lvec, 0.0)
    flat = max(lvec[2], 0.0)
    ndotl = flat * (1.0 - head_cov) + ndotl_head * head_cov
    shade = head.light_intensity * (AMBIENT + DIFFUSE * ndotl)
    img = np.clip(img * shade[..., None], 0.0, 1.0)
    return img, seg


def render_densepose(scene: Scene) -> np.ndarray:
    """Body-part-coded conditioning image: fixed color per label."""
    _, seg = render_scene(scene)
    return densepose_from_seg(seg)


def densepose_from_seg(seg: np.ndarray) -> np.ndarray:
    return DENSEPOSE_PALETTE[seg]


def head_mask(seg: np.ndarray, include_neck: bool = False) -> np.ndarray:
    """Transfer region: face + hair + accessories (+ neck when flagged)."""
    m = (seg == FACE) | (seg == HAIR) | (seg == ACCESSORY)
    if include_neck:
        m = m | (seg == NECK)
    return m
