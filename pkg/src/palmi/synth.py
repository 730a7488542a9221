"""Synthetic surrogate of the curated observation table.

Predictor marginals loosely follow the reference descriptive statistics.
The killed fraction is a logistic function of a planted efficacy score
driven mostly by plasma treatment time, contact time and liquid type, with
weaker contributions from strain, storage time and the liquid-to-suspension
ratio. Every row satisfies the dataset invariants.
"""
from __future__ import annotations

import numpy as np

from .dataset import RawRecord

PLASMA_TYPES = ("vdbd", "jet", "sdbd", "gliding arc", "corona", "microwave", "spark")
PLASMA_FREQ = (0.406, 0.333, 0.10, 0.06, 0.045, 0.03, 0.026)

GASES = ("air", "argon+oxygen", "argon", "helium", "nitrogen", "oxygen", "helium+oxygen", "argon+air")
GAS_FREQ = (0.785, 0.146, 0.025, 0.015, 0.01, 0.008, 0.006, 0.005)

LIQUIDS = (
    "diw", "saline", "pbs", "tap water", "distilled water", "nacl solution", "ringer", "lactate ringer",
    "culture medium", "h2o2 solution", "nitrate solution", "nitrite solution", "hepes", "glucose", "milli-q water",
)
LIQUID_FREQ = (0.517, 0.184, 0.08, 0.05, 0.04, 0.025, 0.02, 0.016, 0.014, 0.012, 0.01, 0.009, 0.008, 0.008, 0.007)
# additive efficacy of each liquid
LIQUID_EFFECT = (0.6, -0.9, -1.6, -0.2, 0.9, -0.5, -1.2, -0.8, -2.2, 1.8, 0.4, 0.8, -1.4, -0.4, 0.2)

STRAINS = (
    "e.coli", "s.aureus", "p.aeruginosa", "b.subtilis", "c.albicans", "l.monocytogenes", "s.typhimurium",
    "e.faecalis", "k.pneumoniae", "s.epidermidis", "a.baumannii", "mrsa", "b.cereus", "s.mutans",
    "p.fluorescens", "s.cerevisiae", "h.pylori", "e.coli o157:h7", "v.parahaemolyticus", "c.jejuni",
    "a.niger", "p.digitatum",
)
STRAIN_FREQ = (
    0.415, 0.311, 0.06, 0.03, 0.025, 0.02, 0.018, 0.015, 0.012, 0.011, 0.01, 0.009, 0.008, 0.008,
    0.007, 0.007, 0.006, 0.006, 0.006, 0.006, 0.005, 0.005,
)
# resistance: subtracted from efficacy
STRAIN_RESIST = (
    0.0, 0.3, 0.4, 0.9, 0.8, 0.2, 0.1, 0.5, 0.3, 0.2, 0.4, 0.5, 1.1, 0.3,
    0.2, 0.9, 0.1, 0.1, -0.2, 0.0, 1.2, 1.0,
)

GAPS = (0, 1, 2, 3, 4, 5, 6, 8, 10, 15, 20, 25, 30, 50, 81)
TREAT_S = (5, 10, 20, 30, 60, 90, 120, 180, 240, 300, 420, 600, 900, 1200, 1800, 2400, 3600, 5400, 7200, 10800, 14400)
VOLUMES = (0.25, 0.5, 1, 2, 3, 4, 5, 10, 15, 20, 50, 100, 200, 500)
RATIOS = (1, 2, 4, 5, 9, 10, 19, 20, 50, 100, 500, 1000)
CONTACT_MIN = (0, 1, 2, 3, 5, 7, 10, 15, 20, 30, 40, 45, 60, 90, 120, 180, 240, 300, 360, 480, 600, 720, 960, 1080, 1200, 1440)
TEMPS = (-80, -20, 4, 20, 22, 25, 30, 37)
STORAGE_H = (0, 0.5, 1, 2, 3, 6, 12, 24, 48, 72, 96, 120, 168, 240, 336, 480, 720, 1000, 1440, 2000, 2160, 2880, 3600, 4320, 5000, 5760, 6120)


def _skewed(values, rng, n, decay):
    w = np.exp(-decay * np.arange(len(values)))
    return np.asarray(values, dtype=float)[rng.choice(len(values), size=n, p=w / w.sum())]


def _nominal(tokens, freq, rng, n):
    p = np.asarray(freq, dtype=float)
    idx = rng.choice(len(tokens), size=n, p=p / p.sum())
    # every token appears at least once
    if n >= len(tokens):
        idx[rng.choice(n, size=len(tokens), replace=False)] = np.arange(len(tokens))
    return idx


def generate_surrogate(n: int = 1152, seed: int = 0, noise: float = 0.6) -> list[RawRecord]:
    rng = np.random.default_rng(seed)
    ptype = _nominal(PLASMA_TYPES, PLASMA_FREQ, rng, n)
    gas = _nominal(GASES, GAS_FREQ, rng, n)
    liquid = _nominal(LIQUIDS, LIQUID_FREQ, rng, n)
    strain = _nominal(STRAINS, STRAIN_FREQ, rng, n)

    gap = _skewed(GAPS, rng, n, 0.12)
    treat = _skewed(TREAT_S, rng, n, 0.12)
    volume = _skewed(VOLUMES, rng, n, 0.2)
    load = np.clip(np.round(rng.normal(6.62, 0.91, size=n), 1), 2.0, 9.0)
    ratio = _skewed(RATIOS, rng, n, 0.25)
    contact = _skewed(CONTACT_MIN, rng, n, 0.2)
    temp = np.asarray(TEMPS, dtype=float)[rng.choice(len(TEMPS), size=n, p=[0.02, 0.03, 0.1, 0.1, 0.1, 0.35, 0.05, 0.25])]
    storage = _skewed(STORAGE_H, rng, n, 0.35)

    # saturating dose responses in log time
    dose = np.log1p(treat / 60.0)
    exposure = np.log1p(contact)
    score = (
        1.6 * (dose - 1.0)
        + 1.1 * (exposure - 1.5)
        + 0.9 * np.tanh((dose - 1.0) * (exposure - 1.5) / 3.0)
        + np.asarray(LIQUID_EFFECT)[liquid]
        - 1.2 * np.asarray(STRAIN_RESIST)[strain]
        - 0.25 * np.log1p(storage)
        + 0.2 * np.log10(ratio)
        - 0.006 * gap
        + (ptype == 0) * 0.3
        + rng.normal(0.0, noise, size=n)
    )
    killed = 1.0 / (1.0 + np.exp(-(1.6 * score - 0.7)))
    mi = np.round(load * killed, 2)
    mi = np.minimum(mi, load)

    return [
        RawRecord(
            plasma_treatment_type=PLASMA_TYPES[ptype[i]],
            gas_type=GASES[gas[i]],
            discharge_gap=float(gap[i]),
            plasma_treatment_time=float(treat[i]),
            liquid_type=LIQUIDS[liquid[i]],
            treatment_volume=float(volume[i]),
            microbial_strain=STRAINS[strain[i]],
            initial_microbial_load=float(load[i]),
            pal_mo_volume_ratio=float(ratio[i]),
            contact_time=float(contact[i]),
            incubation_temperature=float(temp[i]),
            post_storage_time=float(storage[i]),
            mi_log_reduction=float(mi[i]),
        )
        for i in range(n)
    ]
