"""Weighted eps-packings of hypercubes and the adversarial instances they
induce for bounded-space online hypercube bin packing."""

import sys

# Counts and denominators routinely exceed the default 4300-digit str limit.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

from .adversary import (
    ExactnessError,
    InstanceStream,
    OfflineCertificate,
    build_instance,
    offline_bound,
    per_class_capacity,
    universal_lower_bound,
)
from .codes import (
    Caps,
    CapExceeded,
    CheckResult,
    Code,
    CodeFamily,
    RetriesExhausted,
    S_of,
    are_separated,
    bound_good_fraction,
    build_separated_family,
    count_good_exact,
    gen_F_family,
    is_gapped,
    warmup_family,
)
from .geometry import (
    AxisBox,
    Interval,
    Rat,
    base_coord,
    box_in_unit,
    boxes_overlap,
    check_gap_fact,
    format_rat,
    interval_of,
    intervals_overlap,
    parse_rat,
)
from .packing import (
    EpsilonPacking,
    PlacedCube,
    assemble,
    central_lemma_check,
    homogeneous_packing,
    place,
    validate,
    weight,
)
from .simulator import ClassNextFit, SimReport, ratio_check, run

__version__ = "0.1.0"
