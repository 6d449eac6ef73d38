"""
Módulo de modelos de resultados para el simulador SM-NOMA.

El módulo incluye:
    - Enum Scheme        : Esquemas comparados (SMN, CMN)
    - Clase MiEstimate   : Estimación Monte Carlo de información mutua
    - Clase NomaRates    : Tasas por usuario del NOMA convencional
    - Clase SweepRow     : Fila agregada por (esquema, punto de SNR)
    - Clase SweepResult  : Conjunto de filas con metadatos de procedencia
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple


class Scheme(Enum):
    """
    Esquemas de acceso comparados.

    Esquemas disponibles:
        SMN : NOMA multi-antena asistido por modulación espacial
        CMN : NOMA multi-antena convencional (superposición + SIC)
    """
    SMN = "SMN"
    CMN = "CMN"


@dataclass(frozen=True)
class MiEstimate:
    """
    Estimación de información mutua en bits por uso de canal.

    Attributes:
        value (float)         : Media muestral sin recortar; a SNR muy baja puede quedar apenas bajo cero
        std_error (float)     : Error estándar muestral
        n_noise_samples (int) : Muestras usadas
    """
    value          : float
    std_error      : float
    n_noise_samples: int


@dataclass(frozen=True)
class NomaRates:
    """
    Tasas gaussianas del NOMA convencional para una realización.

    Attributes:
        per_user_rate (tuple): bits/s/Hz por usuario (2K entradas)
        sum_rate (float)     : Suma de las tasas
        leakage (tuple)      : Fuga inter-cluster (mW) medida en cada usuario débil
    """
    per_user_rate: Tuple[float, ...]
    sum_rate     : float
    leakage      : Tuple[float, ...] = ()

    @property
    def worst_rate(self) -> float:
        return min(self.per_user_rate)


@dataclass(frozen=True)
class SweepRow:
    """
    Resultado agregado de un esquema en un punto de SNR.

    Attributes:
        scheme (Scheme)             : SMN o CMN
        snr_db (float)              : Punto de la grilla
        sum_rate (float)            : Media de la tasa suma (bits/s/Hz)
        worst_rate (float)          : Media del mínimo por realización sobre usuarios
        index_ber (Optional[float]) : BER de bits de índice (solo SMN)
        symbol_ber (Optional[float]): BER de bits de símbolo (solo SMN)
        n_trials (int)              : Realizaciones promediadas
        seed (int)                  : Semilla del experimento
        config_digest (str)         : Huella de la configuración
        per_user_rates (tuple)      : Tasa ergódica por usuario (no va al CSV)
        sum_rate_se (float)         : Error estándar de la tasa suma (no va al CSV)
    """
    scheme        : Scheme
    snr_db        : float
    sum_rate      : float
    worst_rate    : float
    index_ber     : Optional[float]
    symbol_ber    : Optional[float]
    n_trials      : int
    seed          : int
    config_digest : str
    per_user_rates: Tuple[float, ...] = field(default=(), compare=False)
    sum_rate_se   : float = field(default=math.nan, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scheme'        : self.scheme.value,
            'snr_db'        : self.snr_db,
            'sum_rate'      : self.sum_rate,
            'worst_rate'    : self.worst_rate,
            'index_ber'     : self.index_ber,
            'symbol_ber'    : self.symbol_ber,
            'n_trials'      : self.n_trials,
            'seed'          : self.seed,
            'config_digest' : self.config_digest,
            'per_user_rates': list(self.per_user_rates),
            'sum_rate_se'   : self.sum_rate_se,
        }


@dataclass(frozen=True)
class SweepResult:
    """
    Resultado de un barrido completo.

    Attributes:
        rows (tuple)     : Filas en orden (esquema, snr)
        metadata (dict)  : Procedencia (perfil, modos, referencia de SNR); no se compara
    """
    rows    : Tuple[SweepRow, ...]
    metadata: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __len__(self):
        return len(self.rows)

    def for_scheme(self, scheme: Scheme) -> Tuple[SweepRow, ...]:
        return tuple(r for r in self.rows if r.scheme == scheme)

    def row(self, scheme: Scheme, snr_db: float) -> SweepRow:
        for r in self.rows:
            if r.scheme == scheme and r.snr_db == snr_db:
                return r
        raise KeyError(f"No hay fila para {scheme.value} @ {snr_db} dB")
