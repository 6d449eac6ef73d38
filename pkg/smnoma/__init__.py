"""
Módulo de inicialización del simulador SM-NOMA.

Este módulo contiene la factory function para crear y configurar el simulador
a partir de un perfil de entorno, y la fachada Simulator que usan la CLI y
los tests para ejecutar barridos, BER, estudios y validaciones.

El módulo incluye:
    - Factory function create_simulator() : Creación y configuración del simulador
    - Clase Simulator                     : Fachada sobre los servicios
    - Configuración de logging            : Nivel del perfil y filtro de avisos de numpy

Funcionalidades principales:
    - Patrón factory para múltiples perfiles (desk, paper, testing)
    - El perfil fija procesos, muestras de ruido y presupuesto de realizaciones
    - Escritura de CSV + JSON de metadatos para cada barrido
"""

import logging
import os
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

from config import config_dict
from smnoma.models.results import Scheme, SweepResult
from smnoma.models.system_config import SystemConfig, default_paper_config, load_config
from smnoma.services.oracle_service import SuiteResult, run_validation
from smnoma.services.sweep_service import (
    ALL_SCHEMES,
    find_crossover,
    run_ber,
    run_study,
    run_sweep,
    write_csv,
    write_metadata,
)

logger = logging.getLogger(__name__)


class NumpyWarningFilter(logging.Filter):
    """Descarta los RuntimeWarning de numpy (overflow/underflow en colas de verosimilitud)."""

    def filter(self, record):
        msg = str(record.getMessage())
        if 'RuntimeWarning' in msg and ('overflow' in msg or 'underflow' in msg or 'divide by zero' in msg):
            return False
        return True


class Simulator:
    """
    Fachada del simulador configurada con un perfil.

    Attributes:
        settings (type) : Clase de perfil de config.py
        profile (str)   : Nombre del perfil
    """

    def __init__(self, settings):
        self.settings = settings
        self.profile  = settings.PROFILE

    def __repr__(self):
        return f'<Simulator profile={self.profile} workers={self.settings.WORKERS}>'

    def load(self, source: Union[None, str, os.PathLike, Mapping[str, Any]] = None,
             **overrides: Any) -> SystemConfig:
        """
        Carga la configuración del experimento.

        Sin ``source`` parte del escenario de referencia con el presupuesto de
        realizaciones y muestras de ruido del perfil.

        Args:
            source    : Archivo ``clave = valor``, mapping o None
            overrides : Campos a reemplazar (p. ej. n_trials=1000)

        Returns:
            SystemConfig: Configuración validada
        """
        if source is None:
            cfg = default_paper_config().with_overrides(n_trials=self.settings.TRIALS,
                                                        n_noise_samples=self.settings.NOISE_SAMPLES)
        else:
            cfg = load_config(source)
        return cfg.with_overrides(**overrides) if overrides else cfg

    def sweep(self, cfg: SystemConfig, schemes: Iterable[Scheme] = ALL_SCHEMES,
              out: Optional[str] = None, workers: Optional[int] = None) -> SweepResult:
        """Ejecuta un barrido y, con ``out``, escribe el CSV y su JSON de metadatos."""
        result = run_sweep(cfg, schemes,
                           workers=workers or self.settings.WORKERS,
                           chunk_size=self.settings.CHUNK_SIZE,
                           exhaustive_limit=self.settings.EXHAUSTIVE_LIMIT,
                           profile=self.profile)
        if out:
            write_csv(result, out)
            write_metadata(result, out)
        return result

    def ber(self, cfg: SystemConfig, snr_db: float, n_bits: int) -> Tuple[Optional[float], float]:
        return run_ber(cfg, snr_db, n_bits, exhaustive_limit=self.settings.EXHAUSTIVE_LIMIT)

    def study(self, cfg: SystemConfig, variants: Sequence[Mapping[str, int]],
              schemes: Iterable[Scheme] = ALL_SCHEMES,
              out_dir: Optional[str] = None) -> Dict[str, SweepResult]:
        return run_study(cfg, variants, schemes,
                         out_dir=out_dir or self.settings.OUTPUT_DIR,
                         workers=self.settings.WORKERS,
                         exhaustive_limit=self.settings.EXHAUSTIVE_LIMIT,
                         profile=self.profile)

    def validate(self, seed: int = 0, only: Optional[Sequence[str]] = None) -> List[SuiteResult]:
        return run_validation(seed, only)

    @staticmethod
    def crossovers(result: SweepResult) -> List[float]:
        return find_crossover(result)


def create_simulator(profile: str = 'default') -> Simulator:
    """
    Factory function para crear y configurar el simulador.

    Args:
        profile (str, opcional): Nombre del perfil. Debe coincidir con una clave
                                 en config_dict: 'desk', 'paper', 'testing', 'default'.

    Returns:
        Simulator: Simulador con logging configurado según el perfil

    Raises:
        KeyError: Si profile no existe en config_dict

    Note:
        - Los avisos de ``warnings`` se enrutan a logging y se filtran los de numpy
    """
    settings = config_dict[profile]

    logging.basicConfig(
        level=getattr(logging, str(settings.LOG_LEVEL).upper(), logging.INFO),
        format='%(asctime)s %(levelname)s [%(name)s] %(message)s',
    )
    logging.captureWarnings(True)
    warnings_logger = logging.getLogger('py.warnings')
    if not any(isinstance(f, NumpyWarningFilter) for f in warnings_logger.filters):
        warnings_logger.addFilter(NumpyWarningFilter())

    simulator = Simulator(settings)
    logger.debug(f"Simulador creado: {simulator!r}")
    return simulator
