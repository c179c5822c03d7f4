from .params import (
    BodyParams,
    HeadParams,
    ParamError,
    Scene,
    head_extent,
    head_semiaxes,
    sample_body,
    sample_head,
    sample_scene,
    scene_from_sidecar,
    scene_to_sidecar,
)
from .render import (
    ACCESSORY,
    BACKGROUND,
    BODY,
    DENSEPOSE_PALETTE,
    FACE,
    HAIR,
    LABELS,
    NECK,
    decode_normals,
    densepose_from_seg,
    head_mask,
    render_densepose,
    render_normal_map,
    render_scene,
)
