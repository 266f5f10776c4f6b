"""Declared term table for the 45-term hull parameterization.

The vector layout is fixed: term 0 is the length overall in metres and the
remaining 44 terms are dimensionless, so two hulls that differ only in term 0
are geometrically similar. Groups follow the principal / cross-section /
taper / bulb breakdown used throughout the toolkit.
"""

from __future__ import annotations

import numpy as np

# (name, unit, group, hard_lo, hard_hi, sample_lo, sample_hi)
_TERMS = [
    # principal dimensions (7)
    ("loa", "m", "principal", 1e-6, 1e6, 10.0, 350.0),
    ("bow_taper_frac", "frac_loa", "principal", 0.0, 1.0, 0.08, 0.50),
    ("stern_taper_frac", "frac_loa", "principal", 0.0, 1.0, 0.08, 0.50),
    ("beam_deck_frac", "frac_loa", "principal", 0.0, 1.0, 0.0833, 0.333),
    ("depth_frac", "frac_loa", "principal", 0.0, 1.0, 0.05, 0.25),
    ("transom_beam_frac", "frac_beam", "principal", 0.0, 1.0, 0.0, 1.0),
    ("design_draft_frac", "frac_depth", "principal", 0.0, 1.0, 0.30, 0.75),
    # parallel midbody cross section (4)
    ("deadrise_deg", "deg", "cross_section", 0.0, 85.0, 0.0, 45.0),
    ("chine_radius_frac", "frac_halfbeam", "cross_section", 0.0, 1.0, 0.0, 0.60),
    ("keel_radius_frac", "frac_halfbeam", "cross_section", 0.0, 1.0, 0.0, 0.40),
    ("chine_halfbeam_frac", "frac_halfbeam", "cross_section", 0.0, 1.0, 0.25, 1.0),
    # bow taper (9)
    ("bow_rake_deg", "deg", "bow_taper", 0.0, 85.0, 0.0, 40.0),
    ("bow_profile_exponent", "exponent", "bow_taper", 0.05, 10.0, 0.6, 2.5),
    ("bow_keelrise_start_frac", "frac_taper", "bow_taper", 0.0, 1.0, 0.0, 0.7),
    ("bow_keelrise_exponent", "exponent", "bow_taper", 0.05, 10.0, 0.6, 2.5),
    ("bow_drift_deck_deg", "deg", "bow_taper", 0.0, 85.0, 0.0, 20.0),
    ("bow_drift_keel_deg", "deg", "bow_taper", 0.0, 85.0, 0.0, 20.0),
    ("bow_waterplane_fullness_exponent", "exponent", "bow_taper", 0.05, 10.0, 0.5, 2.0),
    ("bow_midbody_transition_frac", "frac_taper", "bow_taper", 0.0, 0.95, 0.0, 0.5),
    ("bow_section_blend_exponent", "exponent", "bow_taper", 0.05, 10.0, 0.5, 3.0),
    # stern taper (11)
    ("stern_rake_deg", "deg", "stern_taper", 0.0, 85.0, 0.0, 40.0),
    ("stern_profile_exponent", "exponent", "stern_taper", 0.05, 10.0, 0.6, 2.5),
    ("stern_keelrise_start_frac", "frac_taper", "stern_taper", 0.0, 1.0, 0.0, 0.7),
    ("stern_keelrise_exponent", "exponent", "stern_taper", 0.05, 10.0, 0.6, 2.5),
    ("stern_drift_deck_deg", "deg", "stern_taper", 0.0, 85.0, 0.0, 20.0),
    ("stern_drift_exponent", "exponent", "stern_taper", 0.05, 10.0, 0.5, 2.0),
    ("stern_waterplane_fullness_exponent", "exponent", "stern_taper", 0.05, 10.0, 0.5, 2.0),
    ("stern_midbody_transition_frac", "frac_taper", "stern_taper", 0.0, 0.95, 0.0, 0.5),
    ("stern_section_blend_exponent", "exponent", "stern_taper", 0.05, 10.0, 0.5, 3.0),
    ("transom_bottom_height_frac", "frac_depth", "stern_taper", 0.0, 1.0, 0.0, 0.5),
    ("transom_deadrise_deg", "deg", "stern_taper", 0.0, 85.0, 0.0, 50.0),
    # bow bulb (7)
    ("bow_bulb_length_frac", "frac_loa", "bow_bulb", 0.0, 1.0, 0.0, 0.04),
    ("bow_bulb_center_depth_frac", "frac_depth", "bow_bulb", 0.0, 1.0, 0.12, 0.50),
    ("bow_bulb_radius_frac", "frac_depth", "bow_bulb", 0.0, 1.0, 0.04, 0.16),
    ("bow_bulb_vertical_asymmetry_ratio", "ratio", "bow_bulb", 0.0, 1.0, 0.30, 1.0),
    ("bow_bulb_lateral_width_ratio", "ratio", "bow_bulb", 0.0, 1.0, 0.25, 1.0),
    ("bow_bulb_tip_exponent", "exponent", "bow_bulb", 0.05, 10.0, 1.5, 3.5),
    ("bow_bulb_fillet_length_frac", "frac_taper", "bow_bulb", 0.0, 1.0, 0.20, 0.70),
    # stern bulb (7)
    ("stern_bulb_length_frac", "frac_loa", "stern_bulb", 0.0, 1.0, 0.0, 0.04),
    ("stern_bulb_center_depth_frac", "frac_depth", "stern_bulb", 0.0, 1.0, 0.12, 0.50),
    ("stern_bulb_radius_frac", "frac_depth", "stern_bulb", 0.0, 1.0, 0.04, 0.16),
    ("stern_bulb_vertical_asymmetry_ratio", "ratio", "stern_bulb", 0.0, 1.0, 0.30, 1.0),
    ("stern_bulb_lateral_width_ratio", "ratio", "stern_bulb", 0.0, 1.0, 0.25, 1.0),
    ("stern_bulb_tip_exponent", "exponent", "stern_bulb", 0.05, 10.0, 1.5, 3.5),
    ("stern_bulb_fillet_length_frac", "frac_taper", "stern_bulb", 0.0, 1.0, 0.20, 0.70),
]

N_TERMS = 45
assert len(_TERMS) == N_TERMS

PARAM_NAMES: tuple[str, ...] = tuple(t[0] for t in _TERMS)
PARAM_UNITS: tuple[str, ...] = tuple(t[1] for t in _TERMS)
PARAM_GROUPS: tuple[str, ...] = tuple(t[2] for t in _TERMS)

HARD_LOWER = np.array([t[3] for t in _TERMS])
HARD_UPPER = np.array([t[4] for t in _TERMS])
SAMPLE_LOWER = np.array([t[5] for t in _TERMS])
SAMPLE_UPPER = np.array([t[6] for t in _TERMS])
HARD_LOWER.flags.writeable = False
HARD_UPPER.flags.writeable = False
SAMPLE_LOWER.flags.writeable = False
SAMPLE_UPPER.flags.writeable = False

IDX: dict[str, int] = {name: i for i, name in enumerate(PARAM_NAMES)}

# index shorthands used by the geometry code
I_LOA = IDX["loa"]
I_LBOW = IDX["bow_taper_frac"]
I_LSTERN = IDX["stern_taper_frac"]
I_BEAM = IDX["beam_deck_frac"]
I_DEPTH = IDX["depth_frac"]
I_BTRANSOM = IDX["transom_beam_frac"]
I_TDESIGN = IDX["design_draft_frac"]
I_DEADRISE = IDX["deadrise_deg"]
I_RCHINE = IDX["chine_radius_frac"]
I_RKEEL = IDX["keel_radius_frac"]
I_YCHINE = IDX["chine_halfbeam_frac"]

BOW_TAPER_SLICE = slice(11, 20)
STERN_TAPER_SLICE = slice(20, 31)
BOW_BULB_SLICE = slice(31, 38)
STERN_BULB_SLICE = slice(38, 45)
TAPER_SLICE = slice(11, 31)
BULB_SLICE = slice(31, 45)

# the 44 dimensionless shape terms (everything but loa)
SHAPE_SLICE = slice(1, 45)
