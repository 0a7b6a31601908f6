"""
AHD-LDPC - Automated Heuristic Design for LDPC check-node kernels

Core Modules:
- Tanner (quasi-cyclic codes, Tanner graphs, systematic encoder)
- PHY (transport blocks, CRC, segmentation, rate matching, modulation, AWGN)
- Decoder (flooding belief propagation with CRC early stopping)
- Kernels (Boxplus, Boxplus-phi, Min-Sum, Offset Min-Sum, discovered kernel)
- KernelScript (sandboxed candidate language, interpreter, mutation)
- Scoring (hierarchical score, evaluation protocol, kernel comparison)
- Evolution (island-model program database, sampling, genetic reset)
- Services (database/evaluator HTTP services, sampler workers, mutators)
"""

__version__ = "0.1.0"
