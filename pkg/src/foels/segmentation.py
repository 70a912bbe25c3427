"""Panoptic label maps, class-prior tables and the masks derived from them."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping, Union

import numpy as np

from .errors import (
    BadDimsError,
    DimensionMismatchError,
    DuplicateClassError,
    ParseError,
    PriorOutOfRangeError,
    UnknownClassError,
)
from .images import decode_netpbm, encode_pgm

DEFAULT_TAU_STATIC = 0.3


@dataclass(frozen=True, eq=False)
class PanopticMap:
    """Per-pixel semantic class id and instance id (0 = uninstanced "stuff")."""

    class_id: np.ndarray
    instance_id: np.ndarray

    def __post_init__(self):
        cls = np.asarray(self.class_id)
        inst = np.asarray(self.instance_id)
        if cls.ndim != 2 or cls.size == 0:
            raise BadDimsError(f"label map must be a non-empty 2-D array, got {cls.shape}")
        if inst.shape != cls.shape:
            raise DimensionMismatchError(f"class map {cls.shape} vs instance map {inst.shape}")
        if not (np.issubdtype(cls.dtype, np.integer) and np.issubdtype(inst.dtype, np.integer)):
            raise ValueError("label maps must be integer arrays")
        if cls.min() < 0 or inst.min() < 0:
            raise ValueError("label ids must be non-negative")
        object.__setattr__(self, "class_id", cls.astype(np.int64))
        object.__setattr__(self, "instance_id", inst.astype(np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.class_id.shape

    @property
    def height(self) -> int:
        return self.class_id.shape[0]

    @property
    def width(self) -> int:
        return self.class_id.shape[1]


@dataclass(frozen=True)
class ClassEntry:
    prior: float
    is_sky: bool
    name: str


class ClassPriorTable(Mapping):
    """Read-only mapping ``class_id -> ClassEntry``."""

    def __init__(self, entries: Mapping[int, ClassEntry]):
        for cid, e in entries.items():
            if not 0.0 <= e.prior <= 1.0:
                raise PriorOutOfRangeError(f"class {cid}: prior {e.prior} outside [0, 1]")
        self._entries = MappingProxyType(dict(entries))
        ids = np.array(sorted(self._entries), dtype=np.int64)
        self._ids = ids
        self._priors = np.array([self._entries[i].prior for i in ids], dtype=np.float64)
        self._sky = np.array([self._entries[i].is_sky for i in ids], dtype=bool)

    def __getitem__(self, class_id: int) -> ClassEntry:
        return self._entries[class_id]

    def __iter__(self):
        return iter(self._entries)

    def __len__(self):
        return len(self._entries)

    def __repr__(self):
        return f"ClassPriorTable({len(self)} classes)"

    def to_text(self) -> str:
        lines = [f"{cid} {e.prior!r} {'sky' if e.is_sky else '-'} {e.name}"
                 for cid, e in sorted(self._entries.items())]
        return "\n".join(lines) + "\n"

    def _lookup(self, class_ids: np.ndarray) -> np.ndarray:
        """Index of each class id into the sorted id array; raises on unknown ids."""
        if len(self._ids) == 0:
            if class_ids.size:
                raise UnknownClassError(int(class_ids.min()))
            return np.zeros(class_ids.shape, dtype=np.int64)
        idx = np.searchsorted(self._ids, class_ids)
        idx_c = np.minimum(idx, len(self._ids) - 1)
        known = (idx < len(self._ids)) & (self._ids[idx_c] == class_ids)
        if not known.all():
            raise UnknownClassError(int(class_ids[~known].min()))
        return idx_c

    def priors_for(self, class_ids: np.ndarray) -> np.ndarray:
        return self._priors[self._lookup(np.asarray(class_ids))]

    def sky_for(self, class_ids: np.ndarray) -> np.ndarray:
        return self._sky[self._lookup(np.asarray(class_ids))]


def load_class_table(text: Union[str, Iterable[str]]) -> ClassPriorTable:
    """Parse ``<class_id> <prior> <sky|-> <name>`` lines; ``#`` starts a comment.

    The name is everything after the third field, so it may contain spaces.
    """
    lines = text.splitlines() if isinstance(text, str) else text
    entries: dict[int, ClassEntry] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 3)
        if len(parts) != 4:
            raise ParseError(f"line {lineno}: expected 4 fields, got {len(parts)}: {raw!r}")
        cid_s, prior_s, sky_s, name = parts
        try:
            cid = int(cid_s)
            prior = float(prior_s)
        except ValueError:
            raise ParseError(f"line {lineno}: bad id or prior in {raw!r}") from None
        if cid < 0:
            raise ParseError(f"line {lineno}: negative class id {cid}")
        if sky_s not in ("sky", "-"):
            raise ParseError(f"line {lineno}: sky flag must be 'sky' or '-', got {sky_s!r}")
        if not 0.0 <= prior <= 1.0:
            raise PriorOutOfRangeError(f"line {lineno}: prior {prior} outside [0, 1]")
        if cid in entries:
            raise DuplicateClassError(f"line {lineno}: class id {cid} defined twice")
        entries[cid] = ClassEntry(prior, sky_s == "sky", name)
    return ClassPriorTable(entries)


def read_class_table(path) -> ClassPriorTable:
    return load_class_table(Path(path).read_text(encoding="utf-8"))


def default_class_table() -> ClassPriorTable:
    """The bundled COCO-panoptic table (133 classes)."""
    text = resources.files("foels").joinpath("data/coco_panoptic_priors.txt").read_text("utf-8")
    return load_class_table(text)


def prior_map(seg: PanopticMap, table: ClassPriorTable) -> np.ndarray:
    """Prior moving probability per pixel, looked up from the class id."""
    return table.priors_for(seg.class_id)


def static_mask(prior: np.ndarray, tau_static: float = DEFAULT_TAU_STATIC) -> np.ndarray:
    if not 0.0 < tau_static < 1.0:
        raise ValueError(f"tau_static must be in (0, 1), got {tau_static}")
    return np.asarray(prior) < tau_static


def sky_mask(seg: PanopticMap, table: ClassPriorTable) -> np.ndarray:
    return table.sky_for(seg.class_id)


def read_panoptic(class_pgm: bytes, instance_pgm: bytes) -> PanopticMap:
    return PanopticMap(decode_netpbm(class_pgm), decode_netpbm(instance_pgm))


def load_panoptic(class_path, instance_path) -> PanopticMap:
    return read_panoptic(Path(class_path).read_bytes(), Path(instance_path).read_bytes())


def save_panoptic(seg: PanopticMap, class_path, instance_path) -> None:
    """Write both maps as 16-bit PGM (``<frame>.class.pgm`` / ``<frame>.inst.pgm``)."""
    if seg.class_id.max() > 65535 or seg.instance_id.max() > 65535:
        raise ValueError("label ids above 65535 do not fit a 16-bit PGM")
    Path(class_path).write_bytes(encode_pgm(seg.class_id.astype(np.uint16)))
    Path(instance_path).write_bytes(encode_pgm(seg.instance_id.astype(np.uint16)))
