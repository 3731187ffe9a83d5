"""Certified semiorthogonal decompositions of stable-pair spaces and their mutations."""
from __future__ import annotations

from .hecke import HeckeBlock, hecke_start, odd_sod, run_hecke
from .hodge import HHVector, HodgePoly, hh_of_blocks, hh_windows_chain, sym_hodge, verify_hh
from .lattice import SOD, Block, LineBundle, ModuliParams, derive_params, dual_block, restrict_to_stratum
from .plain_weave import ncr_blocks, pushtozero, run_plain_weave
from .weave import build_sod, modified_sod, run_twill, sod_2g

__version__ = "0.1.0"
