"""
Segmentation metrics: DSC, IoU and IoU restricted to a band around the
ground-truth boundary (IoU_NB)
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Mapping, Union

from .data_types import BinaryMask, EvalResult, ImageEval
from .dataset import read_mask
from .errors import InvalidInput, InvalidParameter, ShapeError
from .imaging import dilate, erode

logger = logging.getLogger(__name__)

DEFAULT_BAND_WIDTH = 20


def _counts(s: BinaryMask, g: BinaryMask):
    if s.frame != g.frame:
        raise ShapeError(f"prediction {s.frame} and ground truth {g.frame} differ")
    inter = int((s.data & g.data).sum())
    return inter, s.count, g.count


def dsc(s: BinaryMask, g: BinaryMask) -> float:
    """2|S & G| / (|S| + |G|); two empty masks score 1"""
    inter, ns, ng = _counts(s, g)
    if ns + ng == 0:
        return 1.0
    return 2.0 * inter / (ns + ng)


def iou(s: BinaryMask, g: BinaryMask) -> float:
    """|S & G| / |S | G|; two empty masks score 1"""
    inter, ns, ng = _counts(s, g)
    union = ns + ng - inter
    if union == 0:
        return 1.0
    return inter / union


def boundary_band(g: BinaryMask, width: int = DEFAULT_BAND_WIDTH) -> BinaryMask:
    """
    Band of total `width` pixels straddling the boundary of G, width/2 on each
    side. Pixels beyond the frame count as background, so a full-frame G gets
    a band along the frame edge.
    """
    if width < 2 or width % 2:
        raise InvalidParameter(f"band width must be even and >= 2, got {width}")
    if g.is_empty:
        return BinaryMask.zeros(g.frame)
    kernel = width + 1
    return BinaryMask(dilate(g, kernel).data & ~erode(g, kernel).data)


def iou_nb(s: BinaryMask, g: BinaryMask, width: int = DEFAULT_BAND_WIDTH) -> float:
    """IoU counted only inside boundary_band(G, width); empty band scores 1"""
    if s.frame != g.frame:
        raise ShapeError(f"prediction {s.frame} and ground truth {g.frame} differ")
    band = boundary_band(g, width).data
    inter = int((s.data & g.data & band).sum())
    union = int(((s.data | g.data) & band).sum())
    if union == 0:
        return 1.0
    return inter / union


def evaluate_pair(image_id: str, s: BinaryMask, g: BinaryMask,
                  band_width: int = DEFAULT_BAND_WIDTH) -> ImageEval:
    return ImageEval(image_id=image_id, dsc=dsc(s, g), iou=iou(s, g),
                     iou_nb=iou_nb(s, g, band_width))


def evaluate(predictions: Mapping[str, BinaryMask], ground_truth: Mapping[str, BinaryMask],
             band_width: int = DEFAULT_BAND_WIDTH, workers: int = 1) -> EvalResult:
    """Per-image metrics and unweighted means, in image-id order"""
    missing = sorted(set(ground_truth) - set(predictions))
    extra = sorted(set(predictions) - set(ground_truth))
    if missing or extra:
        raise InvalidInput(
            f"prediction/ground-truth ids differ: missing {missing[:5]}, unexpected {extra[:5]}"
        )
    if not ground_truth:
        raise InvalidInput("nothing to evaluate")

    ids = sorted(ground_truth)

    def one(image_id: str) -> ImageEval:
        return evaluate_pair(image_id, predictions[image_id], ground_truth[image_id], band_width)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            rows = list(executor.map(one, ids))
    else:
        rows = [one(i) for i in ids]
    return EvalResult(per_image=rows, band_width=band_width)


def _mask_dir(directory: Path):
    if not directory.is_dir():
        raise InvalidInput(f"{directory} is not a directory")
    return {p.stem: read_mask(p) for p in sorted(directory.glob("*.png"))}


def evaluate_dirs(pred_dir: Union[str, Path], gt_dir: Union[str, Path],
                  band_width: int = DEFAULT_BAND_WIDTH, workers: int = 1) -> EvalResult:
    """Match <id>.png masks across two directories and evaluate them"""
    predictions = _mask_dir(Path(pred_dir))
    ground_truth = _mask_dir(Path(gt_dir))
    logger.info("evaluating %d masks from %s against %s", len(ground_truth), pred_dir, gt_dir)
    return evaluate(predictions, ground_truth, band_width, workers)
