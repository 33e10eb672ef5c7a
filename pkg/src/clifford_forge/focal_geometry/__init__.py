"""Focal variety M+ of the isoparametric family attached to a Clifford system."""

from .functions import (
    NotNormal,
    NullNormal,
    OffSphere,
    OutsideWRN,
    WRNInterval,
    eval_F,
    eval_H,
    eval_f,
    focal_map_phi,
    focal_map_velocity,
    geodesic,
    geodesic_velocity,
    grad_F,
    grad_f_numeric,
    m_plus_membership,
    shape_kernel,
    solve_Q_v,
    t_of_level,
    unit_normal_xi,
    w_rn_interval,
)
from .sampling import sample_m_plus, sample_normal
from .strata import (
    M1,
    M2,
    M3,
    WHOLE,
    classify_case,
    connectedness_census,
    eigensplit,
    hyperbolic_path_witness,
    path_witness,
    stratum_of,
)
from .witnesses import (
    HypothesisUnmet,
    WitnessRecord,
    inhomogeneity_witness,
    n_plus_membership,
    n_plus_witness,
)

__all__ = [name for name in dir() if not name.startswith("_")]
