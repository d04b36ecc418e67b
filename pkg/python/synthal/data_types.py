"""
Data types for synthal images, masks, parameters and scores
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .errors import InvalidParameter, InvalidStack, ShapeError


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class RasterImage:
    """H x W x 3 image, float64 values in [0, 1]"""
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ShapeError(f"RasterImage needs shape (H, W, 3), got {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ShapeError(f"RasterImage must be at least 1x1, got {arr.shape}")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise InvalidParameter("RasterImage values must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def frame(self) -> Tuple[int, int]:
        """(height, width)"""
        return self.data.shape[:2]

    @classmethod
    def clamped(cls, data: np.ndarray) -> "RasterImage":
        """Build from arbitrary arithmetic output, clamping to [0, 1]"""
        return cls(np.clip(data, 0.0, 1.0))

    @classmethod
    def from_uint8(cls, data: np.ndarray) -> "RasterImage":
        return cls(np.asarray(data, dtype=np.float64) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.rint(self.data * 255.0).astype(np.uint8)


@dataclass(frozen=True, eq=False)
class BinaryMask:
    """H x W instrument mask with values in {0, 1}"""
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ShapeError(f"BinaryMask needs shape (H, W), got {arr.shape}")
        if arr.dtype != np.bool_:
            if not np.all((arr == 0) | (arr == 1)):
                raise InvalidParameter("BinaryMask values must be 0 or 1")
        object.__setattr__(self, "data", _frozen(np.array(arr, dtype=bool)))

    @property
    def frame(self) -> Tuple[int, int]:
        return self.data.shape

    @property
    def count(self) -> int:
        """Number of foreground pixels"""
        return int(np.count_nonzero(self.data))

    @property
    def is_empty(self) -> bool:
        return not self.data.any()

    @classmethod
    def zeros(cls, frame: Tuple[int, int]) -> "BinaryMask":
        return cls(np.zeros(frame, dtype=bool))

    def to_uint8(self) -> np.ndarray:
        """0/255 representation used on disk"""
        return self.data.astype(np.uint8) * 255


@dataclass(frozen=True, eq=False)
class SoftMask:
    """H x W real-valued mask in [0, 1] (fusion masks)"""
    data: np.ndarray

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeError(f"SoftMask needs shape (H, W), got {arr.shape}")
        if not np.all((arr >= 0.0) & (arr <= 1.0)):
            raise InvalidParameter("SoftMask values must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def frame(self) -> Tuple[int, int]:
        return self.data.shape

    @classmethod
    def ones(cls, frame: Tuple[int, int]) -> "SoftMask":
        """The all-ones matrix J"""
        return cls(np.ones(frame))

    @classmethod
    def zeros(cls, frame: Tuple[int, int]) -> "SoftMask":
        return cls(np.zeros(frame))

    @classmethod
    def from_binary(cls, mask: BinaryMask) -> "SoftMask":
        return cls(mask.data.astype(np.float64))

    def support(self) -> np.ndarray:
        """Boolean map of strictly positive pixels"""
        return self.data > 0.0


@dataclass(frozen=True, eq=False)
class LabeledImage:
    """A real image with its instrument mask"""
    image_id: str
    image: RasterImage
    mask: BinaryMask

    def __post_init__(self):
        if self.image.frame != self.mask.frame:
            raise ShapeError(
                f"{self.image_id}: image {self.image.frame} and mask {self.mask.frame} differ"
            )


@dataclass(frozen=True)
class TransformParams:
    """Resize ratio c, shift fractions w/h and rotation theta (degrees)"""
    c: float = 1.0
    w: float = 0.0
    h: float = 0.0
    theta: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise InvalidParameter(f"resize ratio c must be > 0, got {self.c}")

    def is_identity(self) -> bool:
        return self.c == 1.0 and self.w == 0.0 and self.h == 0.0 and self.theta == 0.0


class BlurKind(str, Enum):
    AVERAGE = "average"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class FusionParams:
    """Dilation size d and blur kernel (kind, k, sigma) for the fusion mask"""
    d: int
    blur_kind: BlurKind
    k: int
    sigma: Optional[float] = None  # gaussian only; defaults to k / 3

    def __post_init__(self):
        object.__setattr__(self, "blur_kind", BlurKind(self.blur_kind))
        for name, value in (("d", self.d), ("k", self.k)):
            if int(value) != value or value < 1 or value % 2 == 0:
                raise InvalidParameter(f"{name} must be an odd integer >= 1, got {value}")
        if self.sigma is not None and not self.sigma > 0:
            raise InvalidParameter(f"gaussian sigma must be > 0, got {self.sigma}")

    @property
    def effective_sigma(self) -> float:
        return self.sigma if self.sigma is not None else self.k / 3.0


class TrimShape(str, Enum):
    CIRCLE = "circle"
    RECTANGLE = "rectangle"
    NONE = "none"


@dataclass(frozen=True)
class TrimSpec:
    """Endoscopic vignette: circle or rectangular margins, then a weak blur"""
    shape: TrimShape = TrimShape.NONE
    center: Optional[Tuple[float, float]] = None  # (x_o, y_o) pixels
    radius: Optional[float] = None
    margins: Optional[Tuple[int, int, int, int]] = None  # (top, bottom, left, right)
    final_blur: Tuple[int, float] = (1, 1.0)  # (k_f, sigma_f)

    def __post_init__(self):
        object.__setattr__(self, "shape", TrimShape(self.shape))
        if self.shape is TrimShape.CIRCLE:
            if self.center is None or self.radius is None:
                raise InvalidParameter("circle trim needs center and radius")
            if not self.radius > 0:
                raise InvalidParameter(f"trim radius must be > 0, got {self.radius}")
        elif self.shape is TrimShape.RECTANGLE:
            if self.margins is None or len(self.margins) != 4:
                raise InvalidParameter("rectangle trim needs four margins")
            if any(int(m) != m or m < 0 for m in self.margins):
                raise InvalidParameter(f"trim margins must be integers >= 0, got {self.margins}")
        k_f, sigma_f = self.final_blur
        if int(k_f) != k_f or k_f < 1 or k_f % 2 == 0:
            raise InvalidParameter(f"final blur kernel must be odd >= 1, got {k_f}")
        if not sigma_f > 0:
            raise InvalidParameter(f"final blur sigma must be > 0, got {sigma_f}")

    def check_frame(self, height: int, width: int):
        """Raise InvalidParameter if the margins do not fit the frame"""
        if self.shape is TrimShape.RECTANGLE:
            top, bottom, left, right = self.margins
            if left + right >= width or top + bottom >= height:
                raise InvalidParameter(
                    f"trim margins {self.margins} leave no pixels in a {height}x{width} frame"
                )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shape": self.shape.value,
            "center": list(self.center) if self.center is not None else None,
            "radius": self.radius,
            "margins": list(self.margins) if self.margins is not None else None,
            "final_blur": list(self.final_blur),
        }


@dataclass(frozen=True)
class ColorAdjustParams:
    """Color factor alpha and brightness factor beta"""
    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise InvalidParameter(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.beta > 0:
            raise InvalidParameter(f"beta must be > 0, got {self.beta}")


@dataclass(frozen=True)
class SampledParams:
    """Every parameter drawn for one synthetic sample"""
    transform: TransformParams
    fusion: FusionParams
    color: ColorAdjustParams
    trim: TrimSpec
    fusion_enabled: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "c": self.transform.c,
            "w": self.transform.w,
            "h": self.transform.h,
            "theta": self.transform.theta,
            "d": self.fusion.d,
            "blur_kind": self.fusion.blur_kind.value,
            "k": self.fusion.k,
            "sigma": self.fusion.effective_sigma,
            "fusion_enabled": self.fusion_enabled,
            "alpha": self.color.alpha,
            "beta": self.color.beta,
            "trim": self.trim.to_dict(),
        }


class SynthType(str, Enum):
    TYPE1 = "type1"
    TYPE2 = "type2"


@dataclass(frozen=True, eq=False)
class SyntheticSample:
    """Composite image with its exact label and provenance record"""
    sample_id: str
    image: RasterImage
    mask: BinaryMask
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.image.frame != self.mask.frame:
            raise ShapeError("synthetic image and mask dimensions differ")

    @property
    def synth_type(self) -> SynthType:
        return SynthType(self.provenance["synth_type"])


class SelfTransform(str, Enum):
    FLIP_H = "flip_h"
    FLIP_V = "flip_v"
    ROT90 = "rot90"
    ROT180 = "rot180"
    ROT270 = "rot270"

    @property
    def requires_square(self) -> bool:
        return self in (SelfTransform.ROT90, SelfTransform.ROT270)


class BackgroundOrigin(str, Enum):
    REAL_EXTERNAL = "real_external"
    SELF_INPAINTED = "self_inpainted"
    EXTERNAL_INPAINTED = "external_inpainted"


@dataclass(frozen=True, eq=False)
class BackgroundImage:
    """Instrument-free frame held in the background pool"""
    background_id: str
    image: RasterImage
    origin: BackgroundOrigin
    source_ids: Tuple[str, ...] = ()
    transform: Optional[SelfTransform] = None

    @property
    def is_inpainted(self) -> bool:
        return self.origin is not BackgroundOrigin.REAL_EXTERNAL


@dataclass(frozen=True, eq=False)
class ProbabilityStack:
    """Committee softmax maps p[t, c, y, x]"""
    data: np.ndarray
    tolerance: float = 1e-4

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.float64)
        if arr.ndim != 4:
            raise InvalidStack(f"stack needs shape (T, C, H, W), got {arr.shape}")
        T, C, H, W = arr.shape
        if T < 1 or C < 2 or H < 1 or W < 1:
            raise InvalidStack(f"stack needs T >= 1, C >= 2 and a non-empty frame, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidStack("stack contains non-finite values")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise InvalidStack("stack probabilities must lie in [0, 1]")
        sums = arr.sum(axis=1)
        worst = float(np.max(np.abs(sums - 1.0)))
        if worst > self.tolerance:
            raise InvalidStack(f"class probabilities do not sum to 1 (max deviation {worst:.2e})")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def committee_size(self) -> int:
        return self.data.shape[0]

    @property
    def num_classes(self) -> int:
        return self.data.shape[1]

    @property
    def frame(self) -> Tuple[int, int]:
        return self.data.shape[2:]

    def mean_prediction(self) -> np.ndarray:
        """(C, H, W) committee mean"""
        return self.data.mean(axis=0)


@dataclass(frozen=True)
class ImageScore:
    """Acquisition score of one unlabeled image (nats)"""
    image_id: str
    score: float
    strategy: str = "bald"


@dataclass(frozen=True)
class ImageEval:
    image_id: str
    dsc: float
    iou: float
    iou_nb: float


@dataclass
class EvalResult:
    """Per-image metrics and their unweighted means"""
    per_image: List[ImageEval]
    band_width: int = 20

    @property
    def mean_dsc(self) -> float:
        return float(np.mean([e.dsc for e in self.per_image])) if self.per_image else 0.0

    @property
    def mean_iou(self) -> float:
        return float(np.mean([e.iou for e in self.per_image])) if self.per_image else 0.0

    @property
    def mean_iou_nb(self) -> float:
        return float(np.mean([e.iou_nb for e in self.per_image])) if self.per_image else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "band_width": self.band_width,
            "count": len(self.per_image),
            "mDSC": self.mean_dsc,
            "mIoU": self.mean_iou,
            "mIoU_NB": self.mean_iou_nb,
            "images": [
                {"id": e.image_id, "dsc": e.dsc, "iou": e.iou, "iou_nb": e.iou_nb}
                for e in self.per_image
            ],
        }
