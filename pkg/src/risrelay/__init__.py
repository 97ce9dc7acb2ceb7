"""Outage probability of RIS-assisted decode-and-forward relaying under co-channel interference.

Three independent routes to the same quantity: a closed form
(:mod:`risrelay.analytic`), its high-SNR limit (:mod:`risrelay.asymptotic`)
and a protocol-level simulation (:mod:`risrelay.montecarlo`), refereed by
adaptive quadrature (:mod:`risrelay.oracle`).
"""
from .analytic import OutageEstimate, outage_probability
from .asymptotic import AsymptoticResult, asymptotic_outage
from .channel import HopModel, InterferenceProfile, SystemConfig
from .montecarlo import SimResult, SimSpec, simulate

__all__ = [
    "OutageEstimate",
    "outage_probability",
    "AsymptoticResult",
    "asymptotic_outage",
    "HopModel",
    "InterferenceProfile",
    "SystemConfig",
    "SimResult",
    "SimSpec",
    "simulate",
]
__version__ = "0.1.0"
