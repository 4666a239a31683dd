from pairchar.fock_oracle.detection import (
    apply_dark_counts,
    click_pattern_distribution,
    coincidence_probability,
    combine_copies,
    detection_probability,
    generating_moment,
    survival_pattern_distribution,
)
from pairchar.fock_oracle.oracle import (
    CutoffPolicy,
    hom_delayed_state,
    hom_dip_state,
    ideal_normal_ordered_moments,
    oracle_g2,
    oracle_g2_conditional,
    oracle_g2_cross,
    oracle_multimode,
    oracle_r,
    oracle_v_ent,
    oracle_v_hom,
    polarization_bell_state,
    split_both_state,
    split_signal_state,
    squeezed_dip_state,
    twin_beam_state,
)
from pairchar.fock_oracle.state import (
    DetectorAssignment,
    FockState,
    apply_beamsplitter,
    make_pair_exponential_state,
    split_mode,
)
