"""
Background recovery by self-inpainting (flip/rotate) or external inpainting,
and the background pool that collects real and inpainted frames.
"""

import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from PIL import Image

from .config import SynthesisConfig
from .data_types import (
    BackgroundImage, BackgroundOrigin, LabeledImage, RasterImage, SelfTransform, SoftMask,
)
from .dataset import read_image, read_jsonl, write_image, write_jsonl
from .errors import FormatError, InvalidParameter, NoBackgroundAvailable, ShapeError
from .imaging import dilate, fusion_mask

logger = logging.getLogger(__name__)

# Fixed trial order for self-inpainting
SELF_TRANSFORM_ORDER: Tuple[SelfTransform, ...] = (
    SelfTransform.FLIP_H,
    SelfTransform.FLIP_V,
    SelfTransform.ROT90,
    SelfTransform.ROT180,
    SelfTransform.ROT270,
)

POOL_MANIFEST = "manifest.jsonl"


def apply_self_transform(array: np.ndarray, t: SelfTransform) -> np.ndarray:
    """Flip or rotate the first two axes of an (H, W[, C]) array"""
    t = SelfTransform(t)
    height, width = array.shape[:2]
    if t.requires_square and height != width:
        raise InvalidParameter(f"{t.value} needs a square frame, got {height}x{width}")
    if t is SelfTransform.FLIP_H:
        return np.flip(array, axis=1)
    if t is SelfTransform.FLIP_V:
        return np.flip(array, axis=0)
    turns = {SelfTransform.ROT90: 1, SelfTransform.ROT180: 2, SelfTransform.ROT270: 3}[t]
    return np.rot90(array, k=turns, axes=(0, 1))


def _fill(source: np.ndarray, original: np.ndarray, fusion: SoftMask) -> RasterImage:
    m = fusion.data[..., None]
    out = m * source + (1.0 - m) * original
    return RasterImage(np.clip(out, np.minimum(source, original), np.maximum(source, original)))


def self_inpaint(image: RasterImage, fusion: SoftMask, t: SelfTransform,
                 source_id: str = "") -> Optional[BackgroundImage]:
    """
    Fill the instrument region from a flipped/rotated copy of the same frame.

    Returns None when the fusion mask overlaps its own transformed copy.
    """
    if image.frame != fusion.frame:
        raise ShapeError(f"image {image.frame} and fusion mask {fusion.frame} differ")
    moved = apply_self_transform(fusion.data, t)
    if np.count_nonzero((fusion.data > 0) & (moved > 0)):
        return None
    flipped = apply_self_transform(image.data, t)
    return BackgroundImage(
        background_id=f"{source_id}_{SelfTransform(t).value}",
        image=_fill(flipped, image.data, fusion),
        origin=BackgroundOrigin.SELF_INPAINTED,
        source_ids=(source_id,),
        transform=SelfTransform(t),
    )


def external_inpaint(image: RasterImage, fusion: SoftMask, donor: BackgroundImage,
                     source_id: str = "") -> BackgroundImage:
    """Fill the instrument region from another background frame"""
    if not (image.frame == fusion.frame == donor.image.frame):
        raise ShapeError(
            f"external inpainting inputs differ: {image.frame}, {fusion.frame}, {donor.image.frame}"
        )
    return BackgroundImage(
        background_id=f"{source_id}_ext_{donor.background_id}",
        image=_fill(donor.image.data, image.data, fusion),
        origin=BackgroundOrigin.EXTERNAL_INPAINTED,
        source_ids=(source_id, donor.background_id),
    )


def inpainting_mask(sample: LabeledImage, cfg: SynthesisConfig,
                    rng: np.random.Generator) -> SoftMask:
    fusion = cfg.sample_fusion(rng)
    return fusion_mask(dilate(sample.mask, fusion.d), fusion)


def acquire_background(sample: LabeledImage, pool: "BackgroundPool", cfg: SynthesisConfig,
                       seed: int) -> BackgroundImage:
    """
    Instrument-free version of a labeled frame.

    A background already inpainted from this frame is reused. Otherwise the
    self transforms are tried in SELF_TRANSFORM_ORDER, then a random
    same-sized donor from the pool. New backgrounds are added to the pool.
    """
    cached = pool.find_inpainted(sample.image_id)
    if cached is not None:
        return cached

    rng = np.random.default_rng(seed)
    soft = inpainting_mask(sample, cfg, rng)
    height, width = sample.image.frame
    for t in SELF_TRANSFORM_ORDER:
        if t.requires_square and height != width:
            continue
        background = self_inpaint(sample.image, soft, t, sample.image_id)
        if background is not None:
            logger.debug("%s: self-inpainted with %s", sample.image_id, t.value)
            pool.add(background)
            return background

    frame = sample.image.frame
    if pool.count(frame=frame, exclude_source=sample.image_id) == 0:
        raise NoBackgroundAvailable(
            f"{sample.image_id}: every self transform overlaps and the pool has no donor"
        )
    donor = pool.draw(rng, frame=frame, exclude_source=sample.image_id)
    background = external_inpaint(sample.image, soft, donor, sample.image_id)
    logger.debug("%s: external-inpainted from %s", sample.image_id, donor.background_id)
    pool.add(background)
    return background


@dataclass
class _PoolEntry:
    background_id: str
    origin: BackgroundOrigin
    frame: Tuple[int, int]
    source_ids: Tuple[str, ...] = ()
    transform: Optional[SelfTransform] = None
    path: Optional[Path] = None
    image: Optional[RasterImage] = None


class BackgroundPool:
    """
    Ordered set of background frames.

    External backgrounds are loaded from disk on first use; inpainted ones
    live in memory until the pool is saved. Mutation is expected from a
    single writer.
    """

    def __init__(self, backgrounds: Iterable[BackgroundImage] = ()):
        self._entries: List[_PoolEntry] = []
        self._index: Dict[str, int] = {}
        self._by_source: Dict[str, str] = {}
        for background in backgrounds:
            self.add(background)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, background_id: str) -> bool:
        return background_id in self._index

    def ids(self) -> List[str]:
        return [e.background_id for e in self._entries]

    def _register(self, entry: _PoolEntry):
        if entry.background_id in self._index:
            raise InvalidParameter(f"background {entry.background_id!r} already in pool")
        self._index[entry.background_id] = len(self._entries)
        self._entries.append(entry)
        if entry.origin is not BackgroundOrigin.REAL_EXTERNAL and entry.source_ids:
            self._by_source.setdefault(entry.source_ids[0], entry.background_id)

    def add(self, background: BackgroundImage):
        self._register(_PoolEntry(
            background_id=background.background_id,
            origin=background.origin,
            frame=background.image.frame,
            source_ids=tuple(background.source_ids),
            transform=background.transform,
            image=background.image,
        ))

    def add_external(self, path: Union[str, Path], background_id: Optional[str] = None):
        """Register a real background frame without loading its pixels"""
        path = Path(path)
        try:
            with Image.open(path) as im:
                width, height = im.size
        except OSError as e:
            raise FormatError(f"cannot read background {path}: {e}") from e
        self._register(_PoolEntry(
            background_id=background_id or path.stem,
            origin=BackgroundOrigin.REAL_EXTERNAL,
            frame=(height, width),
            path=path,
        ))

    def get(self, background_id: str) -> BackgroundImage:
        entry = self._entries[self._index[background_id]]
        if entry.image is None:
            entry.image = read_image(entry.path)
        return BackgroundImage(
            background_id=entry.background_id,
            image=entry.image,
            origin=entry.origin,
            source_ids=entry.source_ids,
            transform=entry.transform,
        )

    def _candidates(self, frame: Optional[Tuple[int, int]], origins,
                    exclude_source: Optional[str] = None) -> List[_PoolEntry]:
        return [
            e for e in self._entries
            if (frame is None or tuple(e.frame) == tuple(frame))
            and (origins is None or e.origin in origins)
            and (exclude_source is None or exclude_source not in e.source_ids)
        ]

    def count(self, frame: Optional[Tuple[int, int]] = None, origins=None,
              exclude_source: Optional[str] = None) -> int:
        return len(self._candidates(frame, origins, exclude_source))

    def draw(self, rng: np.random.Generator, frame: Optional[Tuple[int, int]] = None,
             origins=None, exclude_source: Optional[str] = None) -> BackgroundImage:
        """
        Uniform random background, optionally restricted to a frame size and
        origins. `exclude_source` skips backgrounds inpainted from that image.
        """
        candidates = self._candidates(frame, origins, exclude_source)
        if not candidates:
            suffix = f" not derived from {exclude_source}" if exclude_source else ""
            raise NoBackgroundAvailable(f"no background of size {frame}{suffix} in pool")
        entry = candidates[int(rng.integers(len(candidates)))]
        return self.get(entry.background_id)

    def find_inpainted(self, source_id: str) -> Optional[BackgroundImage]:
        background_id = self._by_source.get(source_id)
        return self.get(background_id) if background_id is not None else None

    def save(self, directory: Union[str, Path]):
        """Write in-memory backgrounds as PNG plus a manifest.jsonl"""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        records = []
        for entry in self._entries:
            if entry.path is None:
                entry.path = directory / f"{entry.background_id}.png"
                write_image(entry.path, entry.image)
            stored = Path(os.path.relpath(entry.path.resolve(), directory.resolve())).as_posix()
            records.append({
                "id": entry.background_id,
                "path": stored,
                "origin": entry.origin.value,
                "source_ids": list(entry.source_ids),
                "transform": entry.transform.value if entry.transform else None,
            })
        write_jsonl(directory / POOL_MANIFEST, records)

    @classmethod
    def load(cls, directory: Union[str, Path]) -> "BackgroundPool":
        directory = Path(directory)
        pool = cls()
        for record in read_jsonl(directory / POOL_MANIFEST):
            try:
                path = Path(record["path"])
                if not path.is_absolute():
                    path = directory / path
                origin = BackgroundOrigin(record["origin"])
                transform = record.get("transform")
            except (KeyError, ValueError) as e:
                raise FormatError(f"{directory / POOL_MANIFEST}: bad record {record}: {e}") from e
            with Image.open(path) as im:
                width, height = im.size
            pool._register(_PoolEntry(
                background_id=record["id"],
                origin=origin,
                frame=(height, width),
                source_ids=tuple(record.get("source_ids", ())),
                transform=SelfTransform(transform) if transform else None,
                path=path,
            ))
        return pool
