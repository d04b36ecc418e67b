"""
On-disk dataset layout, PNG codecs and atomic file writes

A dataset root holds::

    manifest.jsonl        one {"id", "image_path", "mask_path", "split"} per line
    images/<id>.png       8-bit RGB
    masks/<id>.png        8-bit grayscale, instrument = 255, background = 0
    backgrounds/*.png     optional instrument-free frames

Paths in the manifest are relative to the root.
"""

import io
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from tempfile import NamedTemporaryFile
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

import numpy as np
from PIL import Image

from .data_types import BinaryMask, LabeledImage, RasterImage
from .errors import DatasetError, FormatError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

MANIFEST_NAME = "manifest.jsonl"
BACKGROUND_DIR = "backgrounds"
SPLITS = ("train", "test")


# -- atomic writes ---------------------------------------------------------

def atomic_write_bytes(path: PathLike, data: bytes):
    """Write to a temp file in the same directory, then rename over the target"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = None
    try:
        with NamedTemporaryFile("wb", delete=False, dir=path.parent, prefix=f".{path.name}.") as f:
            tmp = f.name
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: PathLike, text: str, encoding: str = "utf-8"):
    atomic_write_bytes(path, text.encode(encoding))


def write_json(path: PathLike, payload: Any):
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_jsonl(path: PathLike, records: Iterable[Dict[str, Any]]):
    lines = [json.dumps(r, sort_keys=True) for r in records]
    atomic_write_text(path, "".join(line + "\n" for line in lines))


def read_jsonl(path: PathLike) -> List[Dict[str, Any]]:
    path = Path(path)
    records = []
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise FormatError(f"cannot read {path}: {e}") from e
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as e:
            raise FormatError(f"{path}:{lineno}: invalid JSON: {e}") from e
    return records


# -- PNG codecs ------------------------------------------------------------

def _png_bytes(array: np.ndarray) -> bytes:
    """uint8 (H, W) saves as L, (H, W, 3) as RGB"""
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(array)).save(buf, format="PNG")
    return buf.getvalue()


def read_image(path: PathLike) -> RasterImage:
    try:
        with Image.open(path) as im:
            data = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except OSError as e:
        raise FormatError(f"cannot read image {path}: {e}") from e
    return RasterImage.from_uint8(data)


def read_mask(path: PathLike) -> BinaryMask:
    """Grayscale mask, binarized at > 127"""
    try:
        with Image.open(path) as im:
            data = np.asarray(im.convert("L"), dtype=np.uint8)
    except OSError as e:
        raise FormatError(f"cannot read mask {path}: {e}") from e
    return BinaryMask(data > 127)


def write_image(path: PathLike, image: RasterImage):
    atomic_write_bytes(path, _png_bytes(image.to_uint8()))


def write_mask(path: PathLike, mask: BinaryMask):
    atomic_write_bytes(path, _png_bytes(mask.to_uint8()))


# -- layout ----------------------------------------------------------------

@dataclass(frozen=True)
class DatasetRecord:
    image_id: str
    image_path: Path
    mask_path: Path
    split: str = "train"

    def to_json(self, root: Path) -> Dict[str, str]:
        return {
            "id": self.image_id,
            "image_path": _relative(self.image_path, root),
            "mask_path": _relative(self.mask_path, root),
            "split": self.split,
        }


def _relative(path: Path, root: Path) -> str:
    try:
        return path.resolve().relative_to(root.resolve()).as_posix()
    except ValueError:
        return str(path.resolve())


@dataclass
class DatasetLayout:
    """Validated dataset: records sorted by id, one common frame size"""
    root: Path
    records: List[DatasetRecord]
    frame: Tuple[int, int]
    backgrounds: List[Path] = field(default_factory=list)

    def __post_init__(self):
        self._by_id = {r.image_id: r for r in self.records}

    def ids(self, split: Optional[str] = "train") -> List[str]:
        return [r.image_id for r in self.records if split is None or r.split == split]

    def record(self, image_id: str) -> DatasetRecord:
        return self._by_id[image_id]

    def load(self, image_id: str) -> LabeledImage:
        r = self._by_id[image_id]
        return LabeledImage(image_id, read_image(r.image_path), read_mask(r.mask_path))

    def load_image(self, image_id: str) -> RasterImage:
        return read_image(self._by_id[image_id].image_path)


def _inspect_png(path: Path, kind: str) -> Tuple[Optional[Tuple[int, int]], Optional[str]]:
    """(frame, violation) for an image or mask file"""
    if not path.is_file():
        return None, f"missing {kind} file {path}"
    try:
        with Image.open(path) as im:
            if kind == "mask":
                data = np.asarray(im.convert("L"))
                values = np.unique(data)
                if not set(values.tolist()) <= {0, 255}:
                    odd = [v for v in values.tolist() if v not in (0, 255)][:3]
                    return data.shape, f"non-binary mask {path} (values {odd})"
                return data.shape, None
            width, height = im.size
            return (height, width), None
    except OSError as e:
        return None, f"unreadable {kind} file {path}: {e}"


def load_dataset(root: PathLike) -> DatasetLayout:
    """
    Read and validate a dataset root.

    Every problem found is collected; a DatasetError lists them all.
    """
    root = Path(root)
    if not root.is_dir():
        raise DatasetError(f"dataset root {root} does not exist")
    manifest = root / MANIFEST_NAME
    if not manifest.is_file():
        raise DatasetError(f"dataset root {root} has no {MANIFEST_NAME}")

    try:
        raw = read_jsonl(manifest)
    except FormatError as e:
        raise DatasetError(str(e)) from e
    if not raw:
        raise DatasetError(f"{manifest} lists no images")

    violations: List[str] = []
    records: List[DatasetRecord] = []
    seen = set()
    frames: Dict[Tuple[int, int], str] = {}

    for entry in raw:
        try:
            image_id = str(entry["id"])
            record = DatasetRecord(
                image_id=image_id,
                image_path=root / entry["image_path"],
                mask_path=root / entry["mask_path"],
                split=entry.get("split", "train"),
            )
        except (KeyError, TypeError):
            violations.append(f"malformed manifest record {entry!r}")
            continue
        if image_id in seen:
            violations.append(f"duplicate id {image_id}")
            continue
        seen.add(image_id)
        if record.split not in SPLITS:
            violations.append(f"{image_id}: unknown split {record.split!r}")

        image_frame, problem = _inspect_png(record.image_path, "image")
        if problem:
            violations.append(f"{image_id}: {problem}")
        mask_frame, problem = _inspect_png(record.mask_path, "mask")
        if problem:
            violations.append(f"{image_id}: {problem}")
        if image_frame and mask_frame and image_frame != mask_frame:
            violations.append(
                f"{image_id}: size mismatch image {image_frame} vs mask {mask_frame}"
            )
        if image_frame:
            frames.setdefault(tuple(image_frame), image_id)
        records.append(record)

    if len(frames) > 1:
        described = ", ".join(f"{f} (e.g. {i})" for f, i in sorted(frames.items()))
        violations.append(f"frame size mismatch across dataset: {described}")

    backgrounds = sorted((root / BACKGROUND_DIR).glob("*.png")) if (root / BACKGROUND_DIR).is_dir() else []
    frame = next(iter(frames)) if frames else (0, 0)
    for path in backgrounds:
        bg_frame, problem = _inspect_png(path, "background")
        if problem:
            violations.append(problem)
        elif frames and tuple(bg_frame) != frame:
            violations.append(f"background {path.name} is {bg_frame}, dataset frames are {frame}")

    if violations:
        raise DatasetError(f"dataset {root} is invalid", violations)

    records.sort(key=lambda r: r.image_id)
    logger.info("loaded dataset %s: %d images, %d backgrounds, frame %s",
                root, len(records), len(backgrounds), frame)
    return DatasetLayout(root=root, records=records, frame=frame, backgrounds=backgrounds)


def write_dataset(root: PathLike, samples: Iterable[LabeledImage],
                  split: Union[str, Dict[str, str]] = "train",
                  backgrounds: Iterable[Tuple[str, RasterImage]] = ()) -> Path:
    """Write labeled images (and optional backgrounds) as a dataset root.

    `split` is one split for every image or a mapping id -> split.
    """
    root = Path(root)
    records = []
    for sample in samples:
        image_path = root / "images" / f"{sample.image_id}.png"
        mask_path = root / "masks" / f"{sample.image_id}.png"
        write_image(image_path, sample.image)
        write_mask(mask_path, sample.mask)
        which = split if isinstance(split, str) else split.get(sample.image_id, "train")
        records.append(DatasetRecord(sample.image_id, image_path, mask_path, which).to_json(root))
    for name, image in backgrounds:
        write_image(root / BACKGROUND_DIR / f"{name}.png", image)
    write_jsonl(root / MANIFEST_NAME, records)
    return root
