"""PHY module: link-level chain around the LDPC decoder."""
from .crc import (
    CRC16_CCITT_FALSE,
    CRC24A,
    CRC24B,
    POLYNOMIALS,
    CrcPoly,
    bytes_to_bits,
    crc_attach,
    crc_check,
    crc_compute,
)
from .errors import BadLength, IndexOutOfRange, InvalidContext, NonPositiveNoise
from .models import (
    DEFAULT_MCS_TABLE,
    BitOrigin,
    BlockLayout,
    ChainConfig,
    Context,
    LlrFrame,
    McsEntry,
    TransportBlock,
)
from .modulation import awgn, constellation, demap, modulate, snr_to_noise_var
from .ratematch import (
    block_deinterleave,
    block_interleave,
    interleaver_permutation,
    rate_dematch,
    rate_match,
    shortening_recover,
    transmit_positions,
)
from .scrambling import descramble, lfsr_sequence, scramble, scrambling_seed
from .segmentation import desegment, segment, segment_sizes
from .service import (
    DATA_DIR,
    build_transport_block,
    context_resources,
    default_graph,
    default_seed,
    graph_for,
    load_context_grid,
    load_mcs_table,
    receive_llrs,
    run_link,
    transmit_bits,
)

__all__ = [
    "CRC16_CCITT_FALSE",
    "CRC24A",
    "CRC24B",
    "POLYNOMIALS",
    "CrcPoly",
    "bytes_to_bits",
    "crc_attach",
    "crc_check",
    "crc_compute",
    "BadLength",
    "IndexOutOfRange",
    "InvalidContext",
    "NonPositiveNoise",
    "DEFAULT_MCS_TABLE",
    "BitOrigin",
    "BlockLayout",
    "ChainConfig",
    "Context",
    "LlrFrame",
    "McsEntry",
    "TransportBlock",
    "awgn",
    "constellation",
    "demap",
    "modulate",
    "snr_to_noise_var",
    "block_deinterleave",
    "block_interleave",
    "interleaver_permutation",
    "rate_dematch",
    "rate_match",
    "shortening_recover",
    "transmit_positions",
    "descramble",
    "lfsr_sequence",
    "scramble",
    "scrambling_seed",
    "desegment",
    "segment",
    "segment_sizes",
    "DATA_DIR",
    "build_transport_block",
    "context_resources",
    "default_graph",
    "default_seed",
    "graph_for",
    "load_context_grid",
    "load_mcs_table",
    "receive_llrs",
    "run_link",
    "transmit_bits",
]
