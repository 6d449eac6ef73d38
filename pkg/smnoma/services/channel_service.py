"""
Servicio de canal para el simulador SM-NOMA.

Genera realizaciones de canal (pérdida de trayecto x desvanecimiento Rayleigh)
y calcula el presupuesto de enlace de cada punto de SNR.

Funcionalidades principales:
    - Modelo de pérdidas 128.1 + 37.6 log10(r) dB (r en km)
    - Potencia de ruido N0 + 10 log10(B)
    - Conversión del eje de SNR a potencia transmitida según SnrReference
    - Canales deterministas por (seed, trial, usuario) con flujos Philox

Note:
    - La pérdida de trayecto se incluye en la matriz de canal, no en el ruido;
      los detectores trabajan así sin depender de la escala
    - Desvanecimiento i.i.d. entre antenas, sin correlación espacial ni sombra
"""

import logging
import math
from typing import Tuple


from smnoma.exceptions import ChannelDomainError
from smnoma.models.channel import ChannelRealization, LinkBudget
from smnoma.models.system_config import SnrReference, SystemConfig
from smnoma.utils.db_utils import db_to_linear, dbm_to_mw
from smnoma.utils.rng_utils import CHANNEL_STREAM, RngKey, complex_normal

logger = logging.getLogger(__name__)

# Constantes del modelo de pérdidas (r en km)
PATHLOSS_INTERCEPT_DB = 128.1
PATHLOSS_SLOPE_DB     = 37.6


def pathloss_db(distance_km: float) -> float:
    """
    Pérdida de trayecto en dB para una distancia BS-usuario.

    Args:
        distance_km (float): Distancia en km, > 0

    Returns:
        float: 128.1 + 37.6 log10(distance_km)

    Raises:
        ChannelDomainError: Si la distancia no es positiva

    Example:
        >>> pathloss_db(1.0)
        128.1
    """
    if not distance_km > 0:
        raise ChannelDomainError(f"La distancia debe ser > 0 km (recibido {distance_km})")
    return PATHLOSS_INTERCEPT_DB + PATHLOSS_SLOPE_DB * math.log10(distance_km)


def noise_power_dbm(cfg: SystemConfig) -> float:
    """Potencia de ruido en dBm: noise_density_dbm_hz + 10 log10(bandwidth_hz)."""
    return cfg.noise_density_dbm_hz + 10.0 * math.log10(cfg.bandwidth_hz)


def noise_power_mw(cfg: SystemConfig) -> float:
    """Potencia de ruido en mW."""
    return dbm_to_mw(noise_power_dbm(cfg))


def tx_power_dbm(cfg: SystemConfig, snr_db: float) -> float:
    """
    Potencia total transmitida por la BS para un punto del eje de SNR.

    Note:
        - RECEIVE : snr_db es la SNR media recibida a reference_distance_km
        - TRANSMIT: snr_db es potencia transmitida sobre ruido, antes de pérdidas
    """
    if cfg.snr_reference == SnrReference.RECEIVE:
        return snr_db + noise_power_dbm(cfg) + pathloss_db(cfg.reference_distance_km)
    return snr_db + noise_power_dbm(cfg)


def tx_power_mw(cfg: SystemConfig, snr_db: float) -> float:
    """Potencia total transmitida en mW."""
    return dbm_to_mw(tx_power_dbm(cfg, snr_db))


def link_budget(cfg: SystemConfig, snr_db: float) -> LinkBudget:
    """Presupuesto de enlace completo de un punto de SNR."""
    return LinkBudget(
        noise_power_dbm = noise_power_dbm(cfg),
        pathloss_db     = tuple(pathloss_db(d) for d in cfg.distances_km),
        tx_power_dbm    = tx_power_dbm(cfg, snr_db),
    )


def path_gains(cfg: SystemConfig) -> Tuple[float, ...]:
    """Ganancias lineales de trayecto 10^(-PL/10) por usuario."""
    return tuple(db_to_linear(-pathloss_db(d)) for d in cfg.distances_km)


def gen_channel(cfg: SystemConfig, trial_index: int) -> ChannelRealization:
    """
    Genera la realización de canal ``trial_index`` para todos los usuarios.

    Cada usuario u recibe sqrt(g_u) * W, con W de entradas CN(0, 1) i.i.d. y
    g_u la ganancia lineal de trayecto. El resultado es función pura de
    (seed, trial_index, usuario): no depende del orden de llamada ni del hilo.

    Args:
        cfg (SystemConfig): Configuración del experimento
        trial_index (int) : Índice de realización, >= 0

    Returns:
        ChannelRealization: 2K matrices Nr x Nt

    Raises:
        ChannelDomainError: Si trial_index es negativo
    """
    if trial_index < 0:
        raise ChannelDomainError(f"trial_index debe ser >= 0 (recibido {trial_index})")

    root = RngKey.root(cfg.seed)
    per_user = []
    for user, gain in enumerate(path_gains(cfg)):
        rng = root.child(CHANNEL_STREAM, trial_index, user).generator()
        fading = complex_normal(rng, (cfg.n_rx, cfg.n_tx))
        per_user.append(math.sqrt(gain) * fading)

    return ChannelRealization(per_user=tuple(per_user), trial_index=trial_index)
