from pairchar.analytic.closed_forms import (
    BELL_VISIBILITY_THRESHOLD,
    CLASSICAL_R_BOUND,
    CLOSED_FORMS,
    COHERENT_G2,
    THERMAL_G2,
    classical_bound,
    closed_form_value,
    conditional_zeta,
    evaluate,
    first_order_nonclassical,
    g2_auto,
    g2_auto_taylor,
    g2_conditional,
    g2_cross,
    g2_cross_no_dark,
    heralding_probability,
    hom_coincidences,
    ideal_moments_metrics,
    r_ideal,
    r_tilde,
    r_tilde_first_order,
    v_ent,
    v_ent_no_dark,
    v_hom,
    v_hom_first_order,
)
from pairchar.analytic.optimum import OPTIMIZABLE, Optimum, find_p_opt
