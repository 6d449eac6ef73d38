"""
Servicio del NOMA multi-antena convencional (esquema de comparación CMN).

Forma clusters de dos usuarios, diseña haces ZF sobre los canales efectivos de
los usuarios fuertes y evalúa las tasas gaussianas con superposición y SIC.

Funcionalidades principales:
    - Canal efectivo de un usuario: u1^H H (combinador MRC en recepción)
    - Clusters con la misma regla de emparejamiento que el sistema SM; el fuerte
      de cada cluster es el de mayor ganancia tras el haz
    - Haces ZF de norma unitaria: W = H^H (H H^H)^-1 con columnas normalizadas
    - Tasas de Shannon con SIC perfecto y fuga inter-cluster en el usuario débil

Note:
    - Potencia igual entre clusters (P/K); el reparto beta viene de la configuración
    - El usuario débil comparte el haz del fuerte y conserva la fuga residual de
      los demás haces; se suma a su ruido y se informa en NomaRates.leakage
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from smnoma.exceptions import SingularChannelError
from smnoma.models.channel import ChannelRealization
from smnoma.models.grouping import Cluster
from smnoma.models.results import NomaRates
from smnoma.models.system_config import PairingMode, SystemConfig
from smnoma.services.channel_service import noise_power_mw, tx_power_mw
from smnoma.services.pairing_service import pair_users

logger = logging.getLogger(__name__)

# Número de condición a partir del cual el conjunto de canales se considera singular
MAX_CONDITION_NUMBER = 1e12

# Rediseños ZF permitidos al reordenar fuerte / débil por ganancia tras el haz
MAX_ROLE_PASSES = 4


def effective_channel(h: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Canal efectivo de una antena virtual para un usuario con Nr antenas.

    Args:
        h (np.ndarray): Matriz de canal Nr x Nt

    Returns:
        tuple: (fila efectiva u1^H H de largo Nt, combinador u1 de largo Nr);
               la norma de la fila es el mayor valor singular de H
    """
    u, _, _ = np.linalg.svd(h)
    combiner = u[:, 0]
    return combiner.conj() @ h, combiner


def zf_beams(effective_channels: Sequence[np.ndarray]) -> List[np.ndarray]:
    """
    Haces de forzado a cero de norma unitaria.

    Args:
        effective_channels (Sequence[np.ndarray]): K filas efectivas de largo Nt

    Returns:
        List[np.ndarray]: K haces; h_j . w_k = 0 para j != k

    Raises:
        SingularChannelError: Si K > Nt o las filas no son linealmente independientes

    Example:
        >>> beams = zf_beams([h])      # K = 1: transmisión adaptada h^H / ||h||
    """
    stacked = np.vstack([np.asarray(h, dtype=complex).reshape(1, -1) for h in effective_channels])
    n_clusters, n_tx = stacked.shape
    if n_clusters > n_tx:
        raise SingularChannelError(f"singular channel set: {n_clusters} clusters > {n_tx} antennas")
    if not np.all(np.isfinite(stacked)) or np.linalg.cond(stacked) > MAX_CONDITION_NUMBER:
        raise SingularChannelError()

    gram = stacked @ stacked.conj().T
    precoder = stacked.conj().T @ np.linalg.solve(gram, np.eye(n_clusters))
    precoder = precoder / np.linalg.norm(precoder, axis=0, keepdims=True)
    return [precoder[:, k] for k in range(n_clusters)]


def beam_gain(row: np.ndarray, beam: np.ndarray) -> float:
    """Ganancia efectiva |h . w|^2 de una fila efectiva sobre un haz."""
    return float(np.abs(row @ beam) ** 2)


def form_clusters(channels: ChannelRealization,
                  n_clusters: int,
                  power_split: float = 0.8,
                  pairing_mode: PairingMode = PairingMode.SIMILARITY) -> List[Cluster]:
    """
    Forma los K clusters del NOMA convencional con sus haces ZF.

    Args:
        channels (ChannelRealization): Realización con 2K usuarios
        n_clusters (int)             : K
        power_split (float)          : Fracción de potencia al usuario débil
        pairing_mode (PairingMode)   : Misma regla de emparejamiento que SM

    Returns:
        List[Cluster]: Un cluster por par; el fuerte es el de mayor ganancia tras el haz

    Raises:
        SingularChannelError: Si los canales efectivos de los fuertes son dependientes

    Note:
        - El primer diseño ZF usa al de mayor norma efectiva de cada par; si tras
          el haz el otro usuario queda con más ganancia se intercambian los roles
          y se rediseña ZF sobre los nuevos fuertes, hasta que ningún par cambie
    """
    pairs = pair_users(channels, pairing_mode)
    if len(pairs) != n_clusters:
        raise SingularChannelError(f"singular channel set: expected {n_clusters} clusters, got {len(pairs)}")

    effective = [effective_channel(h)[0] for h in channels.per_user]
    norms = [np.linalg.norm(e) for e in effective]
    roles = [(u, v) if norms[u] >= norms[v] else (v, u) for u, v in (pair.users for pair in pairs)]

    for _ in range(MAX_ROLE_PASSES):
        beams = zf_beams([effective[strong] for strong, _ in roles])
        swapped = {k for k, ((s, w), beam) in enumerate(zip(roles, beams))
                   if beam_gain(effective[w], beam) > beam_gain(effective[s], beam)}
        if not swapped:
            break
        logger.debug(f"Clusters {sorted(swapped)}: el débil supera al fuerte tras el haz, se invierten los roles")
        roles = [(w, s) if k in swapped else (s, w) for k, (s, w) in enumerate(roles)]
    else:
        beams = zf_beams([effective[strong] for strong, _ in roles])
    return [Cluster(strong_user=s, weak_user=w, beam=beam, power_split=power_split)
            for (s, w), beam in zip(roles, beams)]


def sic_rates(cluster: Cluster,
              effective_gains: Tuple[float, float],
              total_power: float,
              noise_power: float,
              leakage: float = 0.0) -> Tuple[float, float]:
    """
    Tasas de superposición con SIC perfecto dentro de un cluster.

    Args:
        cluster (Cluster)       : Cluster con su reparto de potencia beta
        effective_gains (tuple) : (g_fuerte, g_débil) tras el haz, >= 0
        total_power (float)     : Potencia P del cluster, > 0
        noise_power (float)     : Potencia de ruido, > 0
        leakage (float)         : Interferencia de otros haces en el débil

    Returns:
        tuple: (tasa_fuerte, tasa_débil) en bits/s/Hz

    Example:
        >>> sic_rates(cluster_beta_08, (4.0, 1.0), 1.0, 1.0)
        (0.848..., 0.736...)
    """
    g_strong, g_weak = effective_gains
    beta = cluster.power_split
    weak_rate = math.log2(1.0 + beta * total_power * g_weak
                          / ((1.0 - beta) * total_power * g_weak + noise_power + leakage))
    strong_rate = math.log2(1.0 + (1.0 - beta) * total_power * g_strong / noise_power)
    return strong_rate, weak_rate


def conventional_sum_rate(channels: ChannelRealization,
                          cfg: SystemConfig,
                          snr_db: Optional[float] = None,
                          cluster_powers: Optional[Sequence[float]] = None,
                          include_leakage: bool = True) -> NomaRates:
    """
    Tasas del NOMA convencional para una realización de canal.

    Compone form_clusters -> zf_beams -> sic_rates con potencia P/K por cluster.

    Args:
        channels (ChannelRealization): Realización de canal
        cfg (SystemConfig)           : Configuración del experimento
        snr_db (float)               : Punto de SNR (por defecto el último de la grilla)
        cluster_powers (Sequence)    : Potencia por cluster en mW (por defecto P/K)
        include_leakage (bool)       : Sumar la fuga inter-cluster al ruido del débil

    Returns:
        NomaRates: Tasa por usuario, tasa suma y fuga medida por cluster
    """
    snr_db = cfg.snr_grid_db[-1] if snr_db is None else snr_db
    noise = noise_power_mw(cfg)
    clusters = form_clusters(channels, cfg.n_pairs, cfg.noma_power_split, cfg.pairing_mode)
    if cluster_powers is None:
        cluster_powers = [tx_power_mw(cfg, snr_db) / cfg.n_pairs] * len(clusters)

    effective = [effective_channel(h)[0] for h in channels.per_user]
    per_user = [0.0] * channels.n_users
    leakages = []
    for k, cluster in enumerate(clusters):
        h_strong = effective[cluster.strong_user]
        h_weak = effective[cluster.weak_user]
        g_strong = beam_gain(h_strong, cluster.beam)
        g_weak = beam_gain(h_weak, cluster.beam)
        leakage = math.fsum(cluster_powers[j] * beam_gain(h_weak, other.beam)
                            for j, other in enumerate(clusters) if j != k)
        leakages.append(leakage)

        strong_rate, weak_rate = sic_rates(cluster, (g_strong, g_weak), cluster_powers[k], noise,
                                           leakage if include_leakage else 0.0)
        per_user[cluster.strong_user] = strong_rate
        per_user[cluster.weak_user] = weak_rate

    return NomaRates(per_user_rate=tuple(per_user), sum_rate=math.fsum(per_user), leakage=tuple(leakages))
