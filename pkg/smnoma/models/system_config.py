"""
Módulo de modelo SystemConfig para el simulador SM-NOMA.

Este módulo define la descripción completa de un experimento (antenas, pares,
constelación, presupuesto de enlace, grilla de SNR, semilla) y las funciones
para cargarla, validarla y serializarla como documento plano ``clave = valor``.

El módulo incluye:
    - Enums de modos        : RateSplit, InterferenceModel, PairingMode,
                              AllocationMode, SnrReference
    - Clase SystemConfig    : Descripción inmutable del experimento
    - load_config()         : Carga y valida desde archivo o mapping
    - default_paper_config(): Escenario de referencia (4.32 MHz, -169 dBm/Hz)
    - serialize() / dump_config() / config_digest()

Funcionalidades principales:
    - Lectura con python-decouple (RepositoryEnv para archivos, mapping en memoria)
    - Validación de todos los invariantes con errores que nombran la regla
    - Round trip exacto: load_config(serialize(c)) == c
"""

import dataclasses
import hashlib
import logging
import math
import os
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Mapping, Tuple, Union

from decouple import Config, Csv, RepositoryEmpty, RepositoryEnv, UndefinedValueError

from smnoma.exceptions import ConfigError, InvalidConfigError, MissingFieldError

logger = logging.getLogger(__name__)


# ============================================================================
# ENUMERACIONES DE MODOS
# ============================================================================

class RateSplit(Enum):
    """
    Descomposición de la tasa de alfabeto finito entre los dos usuarios del par.

    Modos disponibles:
        MARGINAL : R1 = I(A;Y1), R2 = I(X;Y2) con la otra variable marginalizada
        CHAIN    : R1 = I(A;Y1), R2 = I(X;Y2|A) (usuario de símbolo con índice conocido)
    """
    MARGINAL = "marginal"
    CHAIN    = "chain"


class InterferenceModel(Enum):
    """
    Tratamiento de la interferencia entre grupos de antenas en los receptores SM.

    Modos disponibles:
        WHITENED  : Interferencia gaussiana con covarianza ajustada + blanqueo
        CANCELLED : Interferencia entre pares removida idealmente
        EXACT     : Enumeración del alfabeto de interferencia (K <= 2, L*M <= 16)
    """
    WHITENED  = "whitened"
    CANCELLED = "cancelled"
    EXACT     = "exact"


class PairingMode(Enum):
    """Emparejamiento por similitud de dirección o fijo (2k, 2k+1)."""
    SIMILARITY = "similarity"
    FIXED      = "fixed"


class AllocationMode(Enum):
    """Asignación de antenas a grupos."""
    FIXED      = "fixed"        # Round-robin: antena a -> grupo a mod K
    GREEDY     = "greedy"       # Una pasada round-robin por ganancia marginal
    EXHAUSTIVE = "exhaustive"   # Enumeración de todas las particiones balanceadas


class SnrReference(Enum):
    """
    Significado del eje de SNR.

    Modos disponibles:
        RECEIVE  : SNR media recibida por un usuario a reference_distance_km
        TRANSMIT : Potencia total transmitida sobre potencia de ruido, antes de pérdidas
    """
    RECEIVE  = "receive"
    TRANSMIT = "transmit"


# ============================================================================
# CLASE PRINCIPAL
# ============================================================================

REQUIRED_FIELDS = (
    'n_tx', 'n_rx', 'n_pairs', 'qam_order', 'bandwidth_hz', 'noise_density_dbm_hz',
    'distances_km', 'snr_grid_db', 'n_trials', 'seed',
)


def _is_power_of_two(value: int) -> bool:
    return value >= 1 and (value & (value - 1)) == 0


@dataclass(frozen=True)
class SystemConfig:
    """
    Descripción inmutable de un experimento SM-NOMA / NOMA convencional.

    Attributes:
        n_tx (int)                      : Antenas totales de la BS (Nt)
        n_rx (int)                      : Antenas por usuario (Nr)
        n_pairs (int)                   : Pares de usuarios K (2K usuarios)
        qam_order (int)                 : Tamaño de constelación M
        bandwidth_hz (float)            : Ancho de banda en Hz
        noise_density_dbm_hz (float)    : Densidad de ruido en dBm/Hz
        distances_km (tuple)            : Distancia BS-usuario por usuario (km)
        snr_grid_db (tuple)             : Puntos de SNR, estrictamente crecientes
        n_trials (int)                  : Realizaciones de canal por punto de SNR
        seed (int)                      : Semilla de 64 bits sin signo
        noma_power_split (float)        : Fracción de potencia al usuario débil (baseline)
        n_noise_samples (int)           : Muestras de ruido por estimación de MI
        mrc_normalized (bool)           : Estadístico MRC compensado por norma
        rate_split (RateSplit)          : Descomposición de tasas SM
        interference_model (InterferenceModel): Tratamiento de interferencia entre grupos
        pairing_mode (PairingMode)      : Regla de emparejamiento
        allocation_mode (AllocationMode): Regla de asignación de antenas
        snr_reference (SnrReference)    : Significado del eje de SNR
        reference_distance_km (float)   : Distancia de referencia para snr_reference=receive
    """
    n_tx                 : int
    n_rx                 : int
    n_pairs              : int
    qam_order            : int
    bandwidth_hz         : float
    noise_density_dbm_hz : float
    distances_km         : Tuple[float, ...]
    snr_grid_db          : Tuple[float, ...]
    n_trials             : int
    seed                 : int
    noma_power_split     : float = 0.8
    n_noise_samples      : int = 200
    mrc_normalized       : bool = False
    rate_split           : RateSplit = RateSplit.MARGINAL
    interference_model   : InterferenceModel = InterferenceModel.WHITENED
    pairing_mode         : PairingMode = PairingMode.SIMILARITY
    allocation_mode      : AllocationMode = AllocationMode.FIXED
    snr_reference        : SnrReference = SnrReference.RECEIVE
    reference_distance_km: float = 0.15

    def __post_init__(self):
        # Listas recibidas por código se congelan como tuplas
        object.__setattr__(self, 'distances_km', tuple(float(d) for d in self.distances_km))
        object.__setattr__(self, 'snr_grid_db', tuple(float(s) for s in self.snr_grid_db))
        self.validate()

    def __repr__(self):
        return (f'<SystemConfig Nt={self.n_tx} Nr={self.n_rx} K={self.n_pairs} '
                f'M={self.qam_order} trials={self.n_trials} seed={self.seed}>')

    # ------------------------------------------------------------------
    # Propiedades derivadas
    # ------------------------------------------------------------------

    @property
    def n_users(self) -> int:
        """Número total de usuarios (2K)."""
        return 2 * self.n_pairs

    @property
    def group_size(self) -> int:
        """Antenas por grupo L = Nt/K."""
        return self.n_tx // self.n_pairs

    @property
    def index_bits(self) -> int:
        """Bits por uso de canal del usuario de índice: log2(L)."""
        return int(math.log2(self.group_size))

    @property
    def symbol_bits(self) -> int:
        """Bits por uso de canal del usuario de símbolo: log2(M)."""
        return int(math.log2(self.qam_order))

    # ------------------------------------------------------------------
    # Validación
    # ------------------------------------------------------------------

    def validate(self) -> None:
        """
        Verifica todos los invariantes del experimento.

        Raises:
            InvalidConfigError: Con la regla violada como ``constraint``
        """
        if self.n_tx < 1 or self.n_rx < 1 or self.n_pairs < 1:
            raise InvalidConfigError("n_tx, n_rx and n_pairs must be >= 1")
        if self.n_tx % self.n_pairs != 0:
            raise InvalidConfigError("n_tx mod n_pairs ≠ 0")
        if not _is_power_of_two(self.n_tx // self.n_pairs):
            raise InvalidConfigError("n_tx/n_pairs must be a power of two")
        if self.qam_order < 2 or not _is_power_of_two(self.qam_order):
            raise InvalidConfigError("qam_order must be a power of two >= 2")
        if not self.bandwidth_hz > 0:
            raise InvalidConfigError("bandwidth_hz must be > 0")
        if len(self.distances_km) != 2 * self.n_pairs:
            raise InvalidConfigError("distances_km must have exactly 2*n_pairs entries")
        if any(not d > 0 for d in self.distances_km):
            raise InvalidConfigError("distances_km entries must be > 0")
        if len(self.snr_grid_db) < 1:
            raise InvalidConfigError("snr_grid_db must not be empty")
        if any(b <= a for a, b in zip(self.snr_grid_db, self.snr_grid_db[1:])):
            raise InvalidConfigError("snr_grid_db must be strictly increasing")
        if self.n_trials < 1:
            raise InvalidConfigError("n_trials must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidConfigError("seed must be a 64-bit unsigned integer")
        if not 0.0 < self.noma_power_split < 1.0:
            raise InvalidConfigError("power split must be in open interval (0, 1)")
        if self.n_noise_samples < 1:
            raise InvalidConfigError("n_noise_samples must be >= 1")
        if not self.reference_distance_km > 0:
            raise InvalidConfigError("reference_distance_km must be > 0")

    def with_overrides(self, **overrides: Any) -> "SystemConfig":
        """Devuelve una copia validada con los campos indicados reemplazados."""
        return dataclasses.replace(self, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        """Representación en diccionario (valores nativos, enums como texto)."""
        return {
            f.name: (getattr(self, f.name).value if isinstance(getattr(self, f.name), Enum)
                     else list(getattr(self, f.name)) if isinstance(getattr(self, f.name), tuple)
                     else getattr(self, f.name))
            for f in dataclasses.fields(self)
        }


# ============================================================================
# CARGA Y SERIALIZACIÓN
# ============================================================================

class RepositoryMapping(RepositoryEmpty):
    """
    Repositorio de python-decouple respaldado por un mapping en memoria.

    Los valores se convierten a texto con las mismas reglas que ``serialize``
    para que los casts de decouple se apliquen igual que con un archivo.
    """

    def __init__(self, source: Mapping[str, Any]):
        self.data = {str(key): _to_text(value) for key, value in source.items()}

    def __contains__(self, key):
        return key in self.data

    def __getitem__(self, key):
        return self.data[key]


def _to_text(value: Any) -> str:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ",".join(_to_text(float(v)) for v in value)
    return str(value)


_FLOAT_LIST = Csv(cast=float)

# Campo -> (cast, default). Los requeridos no tienen default.
_FIELD_CASTS = {
    'n_tx'                  : int,
    'n_rx'                  : int,
    'n_pairs'               : int,
    'qam_order'             : int,
    'bandwidth_hz'          : float,
    'noise_density_dbm_hz'  : float,
    'distances_km'          : _FLOAT_LIST,
    'snr_grid_db'           : _FLOAT_LIST,
    'n_trials'              : int,
    'seed'                  : int,
    'noma_power_split'      : float,
    'n_noise_samples'       : int,
    'mrc_normalized'        : bool,
    'rate_split'            : RateSplit,
    'interference_model'    : InterferenceModel,
    'pairing_mode'          : PairingMode,
    'allocation_mode'       : AllocationMode,
    'snr_reference'         : SnrReference,
    'reference_distance_km' : float,
}


def load_config(source: Union[str, os.PathLike, Mapping[str, Any]]) -> SystemConfig:
    """
    Carga y valida un SystemConfig desde un documento plano ``clave = valor``.

    Args:
        source: Ruta a un archivo de configuración o mapping en memoria

    Returns:
        SystemConfig: Configuración validada

    Raises:
        MissingFieldError : Si falta una clave requerida (nombra la clave)
        InvalidConfigError: Si un valor no se puede convertir o viola un invariante

    Example:
        >>> cfg = load_config('experiments/paper.cfg')
        >>> cfg.group_size
        2
    """
    if isinstance(source, Mapping):
        repository = RepositoryMapping(source)
    else:
        try:
            repository = RepositoryEnv(os.fspath(source))
        except OSError as e:
            raise ConfigError(f"No se pudo leer la configuración {source}: {e}", error_code="CONFIG_NOT_FOUND")

    reader = Config(repository)
    defaults = {f.name: f.default for f in dataclasses.fields(SystemConfig)
                if f.default is not dataclasses.MISSING}

    values: Dict[str, Any] = {}
    for name, cast in _FIELD_CASTS.items():
        if name not in repository:
            if name in REQUIRED_FIELDS:
                raise MissingFieldError(name)
            values[name] = defaults[name]
            continue
        try:
            value = reader(name, cast=cast)
        except (ValueError, UndefinedValueError) as e:
            raise InvalidConfigError(f"{name} has an unparsable value ({e})")
        values[name] = tuple(value) if isinstance(value, list) else value

    cfg = SystemConfig(**values)
    logger.debug(f"Configuración cargada: {cfg!r}")
    return cfg


def serialize(cfg: SystemConfig) -> Dict[str, str]:
    """Documento plano clave -> texto; ``load_config(serialize(c)) == c``."""
    return {f.name: _to_text(getattr(cfg, f.name)) for f in dataclasses.fields(cfg)}


def dump_config(cfg: SystemConfig, path: Union[str, os.PathLike]) -> None:
    """Escribe el documento ``clave = valor`` en ``path``."""
    lines = [f"{key} = {value}" for key, value in serialize(cfg).items()]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def config_digest(cfg: SystemConfig) -> str:
    """Huella SHA-256 (16 hex) del documento serializado canónico."""
    canonical = "\n".join(f"{k}={v}" for k, v in sorted(serialize(cfg).items()))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def default_paper_config() -> SystemConfig:
    """
    Escenario de referencia del estudio: 4.32 MHz, -169 dBm/Hz, 100.000 realizaciones.

    Returns:
        SystemConfig: Nt=8, Nr=8, K=4, M=64; usuarios de índice a 0.15 km y
                      usuarios de símbolo a 0.1 km (alternados por par)

    Note:
        - Nr = Nt permite que el blanqueo en recepción suprima los K-1 grupos
          interferentes y deja observables los topes log2(Nt/K)
        - Grilla de SNR -10..60 dB en pasos de 10 (8 puntos)
    """
    n_pairs = 4
    return SystemConfig(
        n_tx                 = 8,
        n_rx                 = 8,
        n_pairs              = n_pairs,
        qam_order            = 64,
        bandwidth_hz         = 4.32e6,
        noise_density_dbm_hz = -169.0,
        distances_km         = (0.15, 0.1) * n_pairs,
        snr_grid_db          = tuple(float(s) for s in range(-10, 61, 10)),
        n_trials             = 100_000,
        seed                 = 2017,
    )
