"""Binary genetic encoding of rotation-parameter vectors.

A chromosome is a fixed-length string of 0/1 genes stored as a uint8 array;
a parameter vector for one trainable unitary needs ``d*d - 1`` chromosomes,
and a genome stacks one such block per trainable slot.  Genomes are treated
as immutable values: every operator returns fresh arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "CodecConfig",
    "chromosome_from_string",
    "chromosome_to_string",
    "decode",
    "decode_vector",
    "encode_nearest",
    "genome_from_field",
    "genome_from_strings",
    "genome_to_field",
    "genome_to_strings",
    "random_chromosome",
    "random_genome",
    "rounding_error_bound",
]


@dataclass(frozen=True)
class CodecConfig:
    """Fixed-point binary codec for rotation parameters.

    ``depth`` is the number of genes per chromosome, ``half_range`` the
    magnitude the code approaches at its ends, and ``dim`` the Hilbert-space
    dimension (a parameter vector has ``dim**2 - 1`` components).  The
    decoded grid has ``2**depth`` points with spacing
    ``half_range * 2**(1 - depth)``, symmetric about zero.
    """

    depth: int
    half_range: float = math.pi
    dim: int = 2

    def __post_init__(self):
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        if not self.half_range > 0:
            raise ValueError(f"half_range must be positive, got {self.half_range}")
        if self.dim < 2:
            raise ValueError(f"dim must be >= 2, got {self.dim}")

    @property
    def spacing(self) -> float:
        """Gap between neighboring decodable values."""
        return self.half_range * 2.0 ** (1 - self.depth)

    @property
    def n_components(self) -> int:
        """Chromosomes per parameter vector."""
        return self.dim * self.dim - 1


def decode(bits: np.ndarray, cfg: CodecConfig) -> np.ndarray:
    """Map 0/1 gene strings to reals on the symmetric grid.

    Gene ``l`` (1-based, most significant first) contributes
    ``+half_range / 2**l`` when set and ``-half_range / 2**l`` when clear, so
    an ``L``-bit string lands on one of ``2**L`` equally spaced values in
    ``[-R(1 - 2**-L), +R(1 - 2**-L)]``.  Computed through the equivalent
    integer form ``R * (2*u + 1 - 2**L) / 2**L`` (``u`` = the bits read as an
    unsigned integer) so each output is a single correctly rounded multiple.

    The last axis is the chromosome; leading axes pass through, so a whole
    genome (or population of genomes) decodes in one call.
    """
    bits = np.asarray(bits)
    depth = bits.shape[-1]
    if depth != cfg.depth:
        raise ValueError(f"chromosome length {depth} != codec depth {cfg.depth}")
    place = 1 << np.arange(depth - 1, -1, -1, dtype=np.int64)
    ints = bits.astype(np.int64) @ place
    full = np.int64(1) << depth
    return cfg.half_range * ((2 * ints + 1 - full) / float(full))


def decode_vector(vec: np.ndarray, cfg: CodecConfig) -> np.ndarray:
    """Decode one parameter vector: (d*d-1, depth) bits -> (d*d-1,) reals."""
    vec = np.asarray(vec)
    if vec.shape != (cfg.n_components, cfg.depth):
        raise ValueError(
            f"expected shape {(cfg.n_components, cfg.depth)}, got {vec.shape}"
        )
    return decode(vec, cfg)


def encode_nearest(values: np.ndarray, cfg: CodecConfig) -> np.ndarray:
    """Bits of the grid point nearest each value (clipped to the code range).

    Inverse of :func:`decode` on the grid: ``encode_nearest(decode(c)) == c``.
    """
    x = np.asarray(values, dtype=float)
    full = 1 << cfg.depth
    ints = np.rint((x / cfg.half_range * full - 1 + full) / 2.0).astype(np.int64)
    ints = np.clip(ints, 0, full - 1)
    shifts = np.arange(cfg.depth - 1, -1, -1, dtype=np.int64)
    return ((ints[..., None] >> shifts) & 1).astype(np.uint8)


def random_chromosome(rng: np.random.Generator, cfg: CodecConfig) -> np.ndarray:
    """One chromosome of independent fair genes from the given stream."""
    return rng.integers(0, 2, size=cfg.depth, dtype=np.uint8)


def random_genome(rng: np.random.Generator, cfg: CodecConfig, n_slots: int) -> np.ndarray:
    """Uniform random genome: (n_slots, d*d-1, depth) fair genes.

    Fully determined by the stream state, so a fixed seed reproduces the
    same genome.
    """
    if n_slots < 1:
        raise ValueError(f"n_slots must be >= 1, got {n_slots}")
    return rng.integers(0, 2, size=(n_slots, cfg.n_components, cfg.depth), dtype=np.uint8)


def rounding_error_bound(cfg: CodecConfig, n_slots: int) -> float:
    """Diagnostic scale of the error floor from the finite bit depth.

    Proportional bound ``d**2 * n_slots * spacing``; halves when the depth
    grows by one and doubles with the slot count.
    """
    return cfg.dim**2 * n_slots * cfg.spacing


def chromosome_to_string(bits: np.ndarray) -> str:
    """Chromosome as a '0'/'1' string, most significant gene first."""
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def chromosome_from_string(s: str) -> np.ndarray:
    """Parse a '0'/'1' string back into a chromosome."""
    if not s or any(ch not in "01" for ch in s):
        raise ValueError(f"invalid chromosome string: {s!r}")
    return np.frombuffer(s.encode("ascii"), dtype=np.uint8) - ord("0")


def genome_to_strings(genome: np.ndarray) -> list[list[str]]:
    """Genome as nested lists of bit strings, slot index then generator index."""
    genome = np.asarray(genome)
    return [[chromosome_to_string(chrom) for chrom in slot] for slot in genome]


def genome_from_strings(strings) -> np.ndarray:
    """Inverse of :func:`genome_to_strings`."""
    return np.stack(
        [np.stack([chromosome_from_string(s) for s in slot]) for slot in strings]
    ).astype(np.uint8)


def genome_to_field(genome: np.ndarray) -> str:
    """Genome as a single CSV-safe field: chromosomes joined by '|', slots by ';'."""
    return ";".join("|".join(slot) for slot in genome_to_strings(genome))


def genome_from_field(field: str) -> np.ndarray:
    """Inverse of :func:`genome_to_field`."""
    return genome_from_strings([slot.split("|") for slot in field.split(";")])
