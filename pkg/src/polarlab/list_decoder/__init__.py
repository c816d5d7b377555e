from .decoder import ListDecodeResult, ListDecoder, Scheme, lscd_decode, write_event_log
from .pmu import (
    ADVANCE_RT_INDEX,
    PM_MAX,
    Thresholds,
    dts_prune,
    dts_thresholds,
    pmu_bit,
    prune_exact,
    sp1_decode,
    sp2_decode,
    subt_pmu,
)
from .tuples import Census, Tuple, TupleClass, census, classify_block, tuple_divide
