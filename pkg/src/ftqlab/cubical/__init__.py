from .complex import CubicalComplex, CubicalError, Face
from .sheaf import (
    LocalComplex,
    SheafComplex,
    css_from_sheaf,
    local_exactness_report,
    local_robustness_bruteforce,
)
from .decoders import (
    DecoderRun,
    XDecoderRun,
    boundary_equivalent,
    coboundary_equivalent,
    reduced_weight,
    vertex_coloring,
    x_decode,
    z_decode_par,
    z_decode_seq,
)
from .experiments import SingleShotReport, single_shot_experiment
