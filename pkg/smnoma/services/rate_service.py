"""
Servicio de tasas ergódicas del sistema SM-NOMA (alfabeto finito).

Estima por Monte Carlo la información mutua de cada usuario de un par a partir
de un tensor de hipótesis (antena, símbolo, interferencia) y promedia sobre
realizaciones de canal.

Funcionalidades principales:
    - mi_index_user : I(A; Y1) con el símbolo como variable de molestia
    - mi_symbol_user: I(X; Y2) con la antena marginalizada, o I(X; Y2 | A)
    - mi_joint      : I(A, X; Y), la tasa SM punto a punto
    - sm_pair_rate / sm_trial_rates / ergodic_rates

Note:
    - Todas las mezclas de verosimilitudes se evalúan con logsumexp
    - Las muestras se generan en el dominio blanqueado, donde la perturbación
      es CN(0, I); la interferencia entre grupos se trata como gaussiana salvo
      en el modo EXACT, que enumera su alfabeto (K <= 2, L*M <= 16)
    - Cada muestra de log p(y|a) - log p(y) es <= log L por construcción, así
      que los topes log2 L y log2 M se cumplen sin recortes
"""

import logging
import math
from itertools import product
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from smnoma.exceptions import InvalidConfigError
from smnoma.models.channel import ChannelRealization
from smnoma.models.grouping import AntennaPartition, UserPair
from smnoma.models.results import MiEstimate, Scheme, SweepRow
from smnoma.models.signal import Constellation
from smnoma.models.system_config import InterferenceModel, RateSplit, SystemConfig, config_digest
from smnoma.services.channel_service import gen_channel, noise_power_mw, tx_power_mw
from smnoma.services.detection_service import as_columns, build_interference_covariance, whitening_matrix
from smnoma.services.modem_service import make_constellation
from smnoma.services.pairing_service import DEFAULT_EXHAUSTIVE_LIMIT, allocate_antennas, pair_users
from smnoma.utils.rng_utils import NOISE_STREAM, RngKey, complex_normal

logger = logging.getLogger(__name__)

LOG2_E = 1.0 / math.log(2.0)

# Tamaño máximo del alfabeto de interferencia enumerado en modo EXACT
EXACT_MAX_PAIRS    = 2
EXACT_MAX_ALPHABET = 16

INDEX_ROLE  = 0
SYMBOL_ROLE = 1


# ============================================================================
# NÚCLEO DEL ESTIMADOR
# ============================================================================

def _hypotheses(columns: np.ndarray,
                constellation: Constellation,
                interference: Optional[np.ndarray]) -> np.ndarray:
    """Tensor de medias (L, M, J, Nr) de la señal recibida sin ruido."""
    signal = columns.T[:, None, :] * constellation.points[None, :, None]
    if interference is None:
        interference = np.zeros((1, columns.shape[0]), dtype=complex)
    return signal[:, :, None, :] + interference[None, None, :, :]


def _log_likelihoods(columns: np.ndarray,
                     constellation: Constellation,
                     noise_power: float,
                     n_samples: int,
                     rng_key: RngKey,
                     interference: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Muestrea (a, n, j, ruido) y devuelve -||y - m||^2 / sigma^2 para todas las hipótesis.

    Returns:
        tuple: (D de forma (S, L, M, J), antenas muestreadas, símbolos muestreados)
    """
    means = _hypotheses(columns, constellation, interference)
    n_ant, n_pts, n_int, n_rx = means.shape

    rng = rng_key.generator()
    a = rng.integers(0, n_ant, size=n_samples)
    n = rng.integers(0, n_pts, size=n_samples)
    j = rng.integers(0, n_int, size=n_samples)
    noise = complex_normal(rng, (n_samples, n_rx), variance=noise_power)
    y = means[a, n, j] + noise

    # ||y - m||^2 = ||y||^2 - 2 Re(y^H m) + ||m||^2, con un solo producto matricial
    flat = means.reshape(-1, n_rx)
    cross = np.real(y.conj() @ flat.T)
    distances = (np.sum(np.abs(y) ** 2, axis=1)[:, None] - 2.0 * cross
                 + np.sum(np.abs(flat) ** 2, axis=1)[None, :])
    log_lik = -np.maximum(distances, 0.0) / noise_power
    return log_lik.reshape(n_samples, n_ant, n_pts, n_int), a, n


def _information_samples(log_lik: np.ndarray, a: np.ndarray, n: np.ndarray, kind: str) -> np.ndarray:
    """
    Muestras en bits de log p(y|.) - log p(y) para una descomposición.

    Args:
        kind (str): 'index', 'symbol', 'joint' o 'symbol_given_index'
    """
    n_samples, n_ant, n_pts, n_int = log_lik.shape
    rows = np.arange(n_samples)

    # Se reduce primero la interferencia; las demás marginales parten de (S, L, M)
    per_an = log_lik[..., 0] if n_int == 1 else logsumexp(log_lik, axis=3)
    per_a = logsumexp(per_an, axis=2)
    log_p_y_a = per_a[rows, a] - math.log(n_pts * n_int)
    log_p_y_an = per_an[rows, a, n] - math.log(n_int)
    if kind == 'symbol_given_index':
        return (log_p_y_an - log_p_y_a) * LOG2_E

    log_p_y = logsumexp(per_a, axis=1) - math.log(n_ant * n_pts * n_int)
    if kind == 'index':
        return (log_p_y_a - log_p_y) * LOG2_E
    if kind == 'joint':
        return (log_p_y_an - log_p_y) * LOG2_E
    log_p_y_n = logsumexp(per_an, axis=1)[rows, n] - math.log(n_ant * n_int)
    return (log_p_y_n - log_p_y) * LOG2_E


def _to_estimate(samples: np.ndarray) -> MiEstimate:
    n_samples = samples.size
    std_error = float(np.std(samples, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return MiEstimate(value=float(np.mean(samples)), std_error=std_error, n_noise_samples=n_samples)


def _estimate(kind: str,
              columns,
              constellation: Constellation,
              noise_power: float,
              n_samples: int,
              rng_key: RngKey,
              interference: Optional[np.ndarray]) -> MiEstimate:
    if not noise_power > 0:
        raise InvalidConfigError("noise_power must be > 0")
    if n_samples < 1:
        raise InvalidConfigError("n_noise_samples must be >= 1")
    log_lik, a, n = _log_likelihoods(as_columns(columns), constellation, noise_power,
                                     n_samples, rng_key, interference)
    return _to_estimate(_information_samples(log_lik, a, n, kind))


# ============================================================================
# ESTIMADORES PÚBLICOS
# ============================================================================

def mi_index_user(columns,
                  constellation: Constellation,
                  noise_power: float,
                  n_samples: int,
                  rng_key: RngKey,
                  interference: Optional[np.ndarray] = None) -> MiEstimate:
    """
    Información mutua I(A; Y1) del usuario de índice.

    Args:
        columns                    : Columnas recibidas del grupo (Nr x L), con amplitud incluida
        constellation (Constellation): Alfabeto del símbolo (variable de molestia)
        noise_power (float)        : Varianza del ruido blanco, > 0
        n_samples (int)            : Muestras Monte Carlo
        rng_key (RngKey)           : Clave del flujo de ruido
        interference (np.ndarray)  : Alfabeto de interferencia (J x Nr), equiprobable

    Returns:
        MiEstimate: Valor acotado por log2 L y error estándar
    """
    return _estimate('index', columns, constellation, noise_power, n_samples, rng_key, interference)


def mi_symbol_user(columns,
                   constellation: Constellation,
                   noise_power: float,
                   n_samples: int,
                   rng_key: RngKey,
                   interference: Optional[np.ndarray] = None,
                   given_index: bool = False) -> MiEstimate:
    """
    Información mutua del usuario de símbolo.

    Con ``given_index=False`` estima I(X; Y2) con la antena marginalizada; con
    ``given_index=True`` estima I(X; Y2 | A) = I(A, X; Y2) - I(A; Y2).

    Returns:
        MiEstimate: Valor acotado por log2 M
    """
    kind = 'symbol_given_index' if given_index else 'symbol'
    return _estimate(kind, columns, constellation, noise_power, n_samples, rng_key, interference)


def mi_joint(columns,
             constellation: Constellation,
             noise_power: float,
             n_samples: int,
             rng_key: RngKey,
             interference: Optional[np.ndarray] = None) -> MiEstimate:
    """Información mutua conjunta I(A, X; Y), acotada por log2(L M)."""
    return _estimate('joint', columns, constellation, noise_power, n_samples, rng_key, interference)


# ============================================================================
# TASAS POR PAR Y POR REALIZACIÓN
# ============================================================================

def resolve_interference_model(cfg: SystemConfig, warn: bool = False) -> InterferenceModel:
    """
    Modo de interferencia efectivo: EXACT solo si K <= 2 y L*M <= 16.

    Con ``warn`` se registra un WARNING cuando EXACT cae a WHITENED.
    """
    model = cfg.interference_model
    if model == InterferenceModel.EXACT and (cfg.n_pairs > EXACT_MAX_PAIRS
                                             or cfg.group_size * cfg.qam_order > EXACT_MAX_ALPHABET):
        if warn:
            logger.warning(f"Modo exact no disponible para K={cfg.n_pairs}, L*M="
                           f"{cfg.group_size * cfg.qam_order}; se usa whitened")
        return InterferenceModel.WHITENED
    return model


def _interference_alphabet(h_user: np.ndarray,
                           partition: AntennaPartition,
                           own_group: int,
                           amplitude: float,
                           constellation: Constellation) -> np.ndarray:
    """Todas las combinaciones (antena, símbolo) de los demás grupos: J x Nr."""
    per_group = []
    for g, antennas in enumerate(partition.groups):
        if g == own_group:
            continue
        cols = h_user[:, list(antennas)] * amplitude
        per_group.append([cols[:, i] * x for i in range(cols.shape[1]) for x in constellation.points])
    if not per_group:
        return np.zeros((1, h_user.shape[0]), dtype=complex)
    return np.array([np.sum(combo, axis=0) for combo in product(*per_group)])


def _receiver_view(h_user: np.ndarray,
                   partition: AntennaPartition,
                   group: int,
                   cfg: SystemConfig,
                   group_power: float,
                   noise: float,
                   model: InterferenceModel,
                   constellation: Constellation) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Columnas (y alfabeto de interferencia) en el dominio de ruido unitario."""
    amplitude = math.sqrt(group_power)
    columns = h_user[:, list(partition.groups[group])] * amplitude
    scale = 1.0 / math.sqrt(noise)

    if cfg.n_pairs == 1 or model == InterferenceModel.CANCELLED:
        return columns * scale, None
    if model == InterferenceModel.EXACT:
        alphabet = _interference_alphabet(h_user, partition, group, amplitude, constellation)
        return columns * scale, alphabet * scale

    covariance = build_interference_covariance(h_user, partition, group, group_power)
    return whitening_matrix(covariance, noise) @ columns, None


def sm_pair_rate(channels: ChannelRealization,
                 pair: UserPair,
                 partition: AntennaPartition,
                 cfg: SystemConfig,
                 group: int = 0,
                 snr_db: Optional[float] = None,
                 rng_key: Optional[RngKey] = None) -> Tuple[float, float]:
    """
    Tasas (índice, símbolo) en bits/s/Hz del par servido por el grupo ``group``.

    Args:
        channels (ChannelRealization): Realización de canal
        pair (UserPair)              : Par con roles asignados
        partition (AntennaPartition) : Partición de antenas
        cfg (SystemConfig)           : Configuración (modos, potencia, muestras)
        group (int)                  : Grupo de antenas del par
        snr_db (float)               : Punto de SNR (por defecto el último de la grilla)
        rng_key (RngKey)             : Clave de ruido del par; por defecto
                                       (seed, NOISE_STREAM, trial, 0, group)

    Returns:
        tuple: (tasa_usuario_índice, tasa_usuario_símbolo)
    """
    snr_db = cfg.snr_grid_db[-1] if snr_db is None else snr_db
    if rng_key is None:
        rng_key = RngKey.root(cfg.seed).child(NOISE_STREAM, channels.trial_index, 0, group)

    constellation = make_constellation(cfg.qam_order)
    group_power = tx_power_mw(cfg, snr_db) / cfg.n_pairs
    noise = noise_power_mw(cfg)
    model = resolve_interference_model(cfg)
    n_samples = cfg.n_noise_samples

    columns, alphabet = _receiver_view(channels.per_user[pair.index_user], partition, group,
                                       cfg, group_power, noise, model, constellation)
    index_rate = mi_index_user(columns, constellation, 1.0, n_samples,
                               rng_key.child(INDEX_ROLE), alphabet).value

    columns, alphabet = _receiver_view(channels.per_user[pair.symbol_user], partition, group,
                                       cfg, group_power, noise, model, constellation)
    symbol_rate = mi_symbol_user(columns, constellation, 1.0, n_samples, rng_key.child(SYMBOL_ROLE),
                                 alphabet, given_index=cfg.rate_split == RateSplit.CHAIN).value

    return index_rate, symbol_rate


def sm_trial_rates(cfg: SystemConfig,
                   trial_index: int,
                   snr_index: int,
                   channels: Optional[ChannelRealization] = None,
                   pairs: Optional[Sequence[UserPair]] = None,
                   partition: Optional[AntennaPartition] = None,
                   exhaustive_limit: int = DEFAULT_EXHAUSTIVE_LIMIT) -> np.ndarray:
    """
    Tasas SM por usuario (2K) de una realización en un punto de la grilla.

    Es función pura de (cfg, trial_index, snr_index): el canal, el emparejamiento
    y la asignación se derivan de la realización si no se entregan.

    Returns:
        np.ndarray: Tasa de cada usuario, indexada por número de usuario
    """
    channels = channels if channels is not None else gen_channel(cfg, trial_index)
    pairs = pairs if pairs is not None else pair_users(channels, cfg.pairing_mode)
    if partition is None:
        partition = allocate_antennas(channels, pairs, cfg, exhaustive_limit=exhaustive_limit)

    snr_db = cfg.snr_grid_db[snr_index]
    root = RngKey.root(cfg.seed)
    rates = np.zeros(cfg.n_users)
    for group, pair in enumerate(pairs):
        key = root.child(NOISE_STREAM, trial_index, snr_index, group)
        rates[pair.index_user], rates[pair.symbol_user] = sm_pair_rate(
            channels, pair, partition, cfg, group=group, snr_db=snr_db, rng_key=key)
    return rates


# ============================================================================
# PROMEDIOS ERGÓDICOS
# ============================================================================

def summarize_trials(per_trial: np.ndarray) -> Tuple[Tuple[float, ...], float, float, float]:
    """
    Agrega tasas por realización (T x 2K) en orden de realización.

    Returns:
        tuple: (media por usuario, media de la suma, media del peor usuario,
                error estándar de la suma)
    """
    n_trials = per_trial.shape[0]
    sums = [math.fsum(row) for row in per_trial]
    worst = [float(np.min(row)) for row in per_trial]

    per_user = tuple(math.fsum(per_trial[:, u]) / n_trials for u in range(per_trial.shape[1]))
    mean_sum = math.fsum(sums) / n_trials
    mean_worst = math.fsum(worst) / n_trials
    if n_trials > 1:
        variance = math.fsum((s - mean_sum) ** 2 for s in sums) / (n_trials - 1)
        sum_se = math.sqrt(variance / n_trials)
    else:
        sum_se = math.nan
    return per_user, mean_sum, mean_worst, sum_se


def snr_index_of(cfg: SystemConfig, snr_db: float) -> int:
    try:
        return cfg.snr_grid_db.index(float(snr_db))
    except ValueError:
        raise InvalidConfigError(f"snr_db {snr_db} is not a point of snr_grid_db")


def ergodic_rates(cfg: SystemConfig, snr_db: float) -> SweepRow:
    """
    Tasas ergódicas SM en un punto de la grilla, promediadas sobre n_trials.

    Args:
        cfg (SystemConfig): Configuración del experimento
        snr_db (float)    : Punto de SNR perteneciente a snr_grid_db

    Returns:
        SweepRow: Fila SMN sin BER (usar run_sweep para incluirla)

    Raises:
        InvalidConfigError: Si snr_db no está en la grilla
    """
    snr_index = snr_index_of(cfg, snr_db)
    resolve_interference_model(cfg, warn=True)
    per_trial = np.array([sm_trial_rates(cfg, t, snr_index) for t in range(cfg.n_trials)])
    per_user, mean_sum, mean_worst, sum_se = summarize_trials(per_trial)
    logger.info(f"SMN @ {snr_db:g} dB: suma {mean_sum:.4f}, peor usuario {mean_worst:.4f}")
    return SweepRow(
        scheme         = Scheme.SMN,
        snr_db         = float(snr_db),
        sum_rate       = mean_sum,
        worst_rate     = mean_worst,
        index_ber      = None,
        symbol_ber     = None,
        n_trials       = cfg.n_trials,
        seed           = cfg.seed,
        config_digest  = config_digest(cfg),
        per_user_rates = per_user,
        sum_rate_se    = sum_se,
    )
