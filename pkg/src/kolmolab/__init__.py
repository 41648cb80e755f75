"""Exhaustive algorithmic-information lab on a fixed, fuel-bounded machine."""
from .codes import (
    LambdaRecord, decode_lambda, encode_lambda, pack_condition, sd_decode,
    sd_encode, unpack_condition,
)
from .complexity import (
    ABOVE_BOUND, ComplexityTable, TableKey, TableStore, build_pair_grid,
    build_table, complexity_of, load_table, save_table,
)
from .machine import ExecOutcome, MachineConfig, Mode, execute, parse_program
from .soi import (
    Bounds, CellGrid, InfoProfile, KLCode, Lab, build_cell_grid,
    find_asymmetry_witness, info_profile, kl_decode, kl_encode,
    second_order_complexity, verify_chain_rule_upper, verify_counting_bounds,
    verify_main_theorem,
)
from .lambalgen import (
    DecoderCostModel, DeficiencySets, compute_d0, deficiency_sets, p1_decode,
    p2_decode, plain_random_strings, verify_theorem2, verify_theorem3,
    weak_k_random_strings,
)

__version__ = "0.1.0"
