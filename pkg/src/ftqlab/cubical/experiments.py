"""Single-shot decoding experiments with noisy syndromes.

One round of decoding from syndrome + measurement noise, residuals
measured in (bounded) stabilizer-reduced block weight, an empirical
gamma-hat fit, and an optional noiseless follow-up round.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import lin
from .decoders import (
    boundary_equivalent,
    coboundary_equivalent,
    reduced_weight,
    x_decode,
    z_decode_par,
    z_decode_seq,
)
from .sheaf import SheafComplex


@dataclass
class SingleShotTrial:
    trial: int
    data_weight: int
    meas_weight: int
    residual_bound: int
    residual_exact: bool
    followup_zero: bool


@dataclass
class SingleShotReport:
    trials: list
    gamma_hat: float | None
    eta_hat: float | None
    followup_success_rate: float
    decoder: str


def _decode(sheaf, k, decoder, syndrome, rounds):
    if decoder == "z-seq":
        return z_decode_seq(sheaf, k, syndrome, eps=1.0)
    if decoder == "z-par":
        return z_decode_par(sheaf, k, syndrome, rounds=rounds)
    if decoder in ("x-seq", "x-par"):
        return x_decode(sheaf, k, syndrome, mode="par" if decoder == "x-par" else "seq",
                        rounds=rounds, noisy=True)
    raise ValueError(f"unknown decoder {decoder!r}")


def single_shot_experiment(sheaf: SheafComplex, k: int, p_data: float, p_meas: float,
                           trials: int, decoder: str = "z-seq", seed: int = 0,
                           rounds: int = 30, meas_weight: int = 0) -> SingleShotReport:
    """Noisy-syndrome rounds: residual reduced weight vs measurement weight.

    meas_weight > 0 injects exactly that many syndrome flips (adversarial
    positions drawn per trial) instead of iid flips at p_meas.  The
    follow-up pass feeds the residual's noiseless syndrome back into the
    same decoder and checks the error is fully cleared.
    """
    zside = decoder.startswith("z")
    syn_level = k + 1 if zside else k - 1
    syn_matrix = sheaf.delta_matrix(k) if zside else sheaf.partial_matrix(k)
    dim_e = sheaf.dim(k)
    dim_s = sheaf.dim(syn_level)
    out = []
    followup_hits = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        e = (rng.random(dim_e) < p_data).astype(np.uint8)
        if meas_weight:
            m = np.zeros(dim_s, dtype=np.uint8)
            m[rng.choice(dim_s, size=meas_weight, replace=False)] = 1
        else:
            m = (rng.random(dim_s) < p_meas).astype(np.uint8)
        sigma = lin.matvec(syn_matrix, e, sheaf.field) ^ m
        run = _decode(sheaf, k, decoder, sigma, rounds)
        corr = run.correction
        residual = e ^ corr
        rw, exact = reduced_weight(sheaf, k, residual,
                                   image="coboundary" if zside else "boundary")
        # noiseless follow-up on the residual error
        sigma2 = lin.matvec(syn_matrix, residual, sheaf.field)
        run2 = _decode(sheaf, k, decoder.replace("par", "seq"), sigma2, rounds)
        residual2 = residual ^ run2.correction
        if zside:
            follow_ok = coboundary_equivalent(sheaf, k, residual2,
                                              np.zeros(dim_e, dtype=np.uint8))
        else:
            follow_ok = boundary_equivalent(sheaf, k, residual2,
                                            np.zeros(dim_e, dtype=np.uint8))
        followup_hits += follow_ok
        out.append(SingleShotTrial(trial, sheaf.block_weight(e, k),
                                   sheaf.block_weight(m, syn_level),
                                   rw, exact, follow_ok))
    with_noise = [t for t in out if t.meas_weight > 0]
    gamma_hat = max((t.residual_bound / t.meas_weight for t in with_noise), default=None)
    pure_data = [t for t in out if t.meas_weight == 0 and t.data_weight > 0]
    eta_hat = max((t.residual_bound / t.data_weight for t in pure_data), default=None)
    return SingleShotReport(out, gamma_hat, eta_hat, followup_hits / max(trials, 1), decoder)
