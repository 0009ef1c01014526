"""Binary erasure multiple-descriptions coding and numeric verifiers."""

from . import binning, ceosim, gaussmd, infoverify, packet, sim

from .emdcodec import (
    Description,
    MdParams,
    TernaryString,
    closed_form_distortion,
    decode,
    derive_params,
    encode,
    worst_case_distortion,
)
from .gf2m import Field, field_construct
from .mdscode import GeneratorSet, build_systematic_generator, erasure_decode

__all__ = [
    "binning",
    "ceosim",
    "gaussmd",
    "infoverify",
    "packet",
    "sim",
    "Description",
    "Field",
    "GeneratorSet",
    "MdParams",
    "TernaryString",
    "build_systematic_generator",
    "closed_form_distortion",
    "decode",
    "derive_params",
    "encode",
    "erasure_decode",
    "field_construct",
    "worst_case_distortion",
]

__version__ = "0.1.0"
