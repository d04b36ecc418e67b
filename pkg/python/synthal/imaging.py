"""
Pixel primitives shared by synthesis and inpainting

Geometric transform, binary dilation/erosion, blur-based fusion masks and
endoscopic frame trimming. All functions are pure; inputs are never modified.
"""

import math
from typing import Optional, Tuple

import cv2
import numpy as np
from scipy import ndimage

from .data_types import (
    BinaryMask, BlurKind, FusionParams, RasterImage, SoftMask,
    TransformParams, TrimShape, TrimSpec,
)
from .errors import InvalidParameter, ShapeError

MASK_THRESHOLD = 0.5


def _check_odd(name: str, value: int):
    if int(value) != value or value < 1 or value % 2 == 0:
        raise InvalidParameter(f"{name} must be an odd integer >= 1, got {value}")


def affine_inverse(frame: Tuple[int, int], p: TransformParams) -> Tuple[np.ndarray, np.ndarray]:
    """
    Output-to-input map (row, col) of resize -> translate -> rotate.

    Resize and rotation are about the frame center; positive theta turns
    counter-clockwise on screen. Returns (matrix, offset) such that
    input = matrix @ output + offset.
    """
    height, width = frame
    center = np.array([(height - 1) / 2.0, (width - 1) / 2.0])
    shift = np.array([p.h * height, p.w * width])
    rad = math.radians(p.theta)
    cos, sin = math.cos(rad), math.sin(rad)
    rot_inv = np.array([[cos, sin], [-sin, cos]])
    matrix = rot_inv / p.c
    offset = center - matrix @ center - shift / p.c
    return matrix, offset


def _resample(channel: np.ndarray, matrix: np.ndarray, offset: np.ndarray) -> np.ndarray:
    return ndimage.affine_transform(
        channel, matrix, offset=offset, order=1, mode="grid-constant", cval=0.0,
    )


def transform(image: RasterImage, mask: BinaryMask,
              p: TransformParams) -> Tuple[RasterImage, BinaryMask]:
    """Apply the same resize/translate/rotate map to an image and its mask"""
    if image.frame != mask.frame:
        raise ShapeError(f"image {image.frame} and mask {mask.frame} differ")
    if not p.c > 0:
        raise InvalidParameter(f"resize ratio c must be > 0, got {p.c}")
    if p.is_identity():
        return RasterImage(image.data), BinaryMask(mask.data)

    matrix, offset = affine_inverse(image.frame, p)
    channels = [_resample(image.data[..., i], matrix, offset) for i in range(3)]
    warped = np.stack(channels, axis=-1)
    warped_mask = _resample(mask.data.astype(np.float64), matrix, offset)
    return RasterImage.clamped(warped), BinaryMask(warped_mask >= MASK_THRESHOLD)


def _square(size: int) -> np.ndarray:
    return np.ones((size, size), dtype=np.uint8)


def dilate(mask: BinaryMask, d: int) -> BinaryMask:
    """Union of the mask translated by every offset of a d x d square"""
    _check_odd("dilation kernel d", d)
    if d == 1:
        return BinaryMask(mask.data)
    out = cv2.dilate(mask.data.astype(np.uint8), _square(d))
    return BinaryMask(out.astype(bool))


def erode(mask: BinaryMask, d: int) -> BinaryMask:
    """Binary erosion by a d x d square; pixels outside the frame count as background"""
    _check_odd("erosion kernel d", d)
    if d == 1:
        return BinaryMask(mask.data)
    out = cv2.erode(mask.data.astype(np.uint8), _square(d),
                    borderType=cv2.BORDER_CONSTANT, borderValue=0)
    return BinaryMask(out.astype(bool))


def box_kernel(k: int) -> np.ndarray:
    _check_odd("blur kernel k", k)
    return np.full((k, k), 1.0 / (k * k))


def gaussian_kernel(k: int, sigma: float) -> np.ndarray:
    """k x k truncated, normalized Gaussian"""
    _check_odd("blur kernel k", k)
    if not sigma > 0:
        raise InvalidParameter(f"sigma must be > 0, got {sigma}")
    g = cv2.getGaussianKernel(k, sigma, ktype=cv2.CV_64F)
    return g @ g.T


def blur(data: np.ndarray, kind: BlurKind, k: int, sigma: Optional[float] = None) -> np.ndarray:
    """Box or Gaussian blur with replicated borders"""
    _check_odd("blur kernel k", k)
    if k == 1:
        return np.array(data, dtype=np.float64)
    src = np.ascontiguousarray(data, dtype=np.float64)
    if BlurKind(kind) is BlurKind.AVERAGE:
        return cv2.blur(src, (k, k), borderType=cv2.BORDER_REPLICATE)
    sigma = sigma if sigma is not None else k / 3.0
    return cv2.GaussianBlur(src, (k, k), sigmaX=sigma, sigmaY=sigma,
                            borderType=cv2.BORDER_REPLICATE)


def fusion_mask(dilated: BinaryMask, f: FusionParams) -> SoftMask:
    """Soft fusion mask: blur of the dilated instrument mask"""
    out = np.clip(blur(dilated.data, f.blur_kind, f.k, f.effective_sigma), 0.0, 1.0)
    if f.k > 1:
        # Saturated neighbourhoods are exact; blur sums can drift by an ulp.
        src = dilated.data.astype(np.uint8)
        inside = cv2.erode(src, _square(f.k), borderType=cv2.BORDER_REPLICATE).astype(bool)
        touched = cv2.dilate(src, _square(f.k), borderType=cv2.BORDER_REPLICATE).astype(bool)
        out[inside] = 1.0
        out[~touched] = 0.0
    return SoftMask(out)


def trim_region(frame: Tuple[int, int], t: TrimSpec) -> np.ndarray:
    """Boolean map of the pixels kept by a trim spec"""
    height, width = frame
    t.check_frame(height, width)
    if t.shape is TrimShape.CIRCLE:
        x_o, y_o = t.center
        yy, xx = np.mgrid[0:height, 0:width]
        return (xx - x_o) ** 2 + (yy - y_o) ** 2 <= t.radius ** 2
    keep = np.ones(frame, dtype=bool)
    if t.shape is TrimShape.RECTANGLE:
        top, bottom, left, right = (int(m) for m in t.margins)
        keep[:top, :] = False
        keep[height - bottom:, :] = False
        keep[:, :left] = False
        keep[:, width - right:] = False
    return keep


def trim(image: RasterImage, mask: BinaryMask, t: TrimSpec) -> Tuple[RasterImage, BinaryMask]:
    """
    Zero everything outside the vignette, then apply the final Gaussian blur
    to the image only. The zeroed border is re-trimmed after blurring so the
    black frame stays black; the mask is never blurred.
    """
    if image.frame != mask.frame:
        raise ShapeError(f"image {image.frame} and mask {mask.frame} differ")
    keep = trim_region(image.frame, t)
    img = image.data * keep[..., None]
    k_f, sigma_f = t.final_blur
    if k_f > 1:
        img = cv2.GaussianBlur(np.ascontiguousarray(img), (int(k_f), int(k_f)),
                               sigmaX=sigma_f, sigmaY=sigma_f,
                               borderType=cv2.BORDER_REPLICATE)
        img = img * keep[..., None]
    return RasterImage.clamped(img), BinaryMask(mask.data & keep)
