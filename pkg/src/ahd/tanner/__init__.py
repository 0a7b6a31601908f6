"""Tanner module: QC-LDPC codes, Tanner graphs and systematic encoding."""
from .errors import EncodeSingular, InvalidSpec
from .models import CodeSpec, TannerGraph
from .service import (
    batch_syndrome,
    build_code,
    default_spec_path,
    encode,
    expand_dense,
    gf2_rank,
    is_staircase,
    load_spec,
    parse_spec,
    serialize_spec,
    syndrome,
    validate_spec,
)

__all__ = [
    "CodeSpec",
    "TannerGraph",
    "InvalidSpec",
    "EncodeSingular",
    "batch_syndrome",
    "build_code",
    "default_spec_path",
    "encode",
    "expand_dense",
    "gf2_rank",
    "is_staircase",
    "load_spec",
    "parse_spec",
    "serialize_spec",
    "syndrome",
    "validate_spec",
]
