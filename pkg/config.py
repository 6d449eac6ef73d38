"""
Módulo de configuración de entorno para el simulador SM-NOMA.

Este módulo define los perfiles de ejecución del simulador (escala de
escritorio, escala del estudio completo, testing). Los perfiles controlan
cuántos procesos se usan, el nivel de logging y el presupuesto de
realizaciones; la descripción física del experimento vive en SystemConfig.

El módulo incluye:
    - Clase Config      : Configuración base con parámetros comunes
    - DeskConfig        : 10.000 realizaciones, para iterar en minutos
    - PaperConfig       : 100.000 realizaciones, el presupuesto del estudio
    - TestingConfig     : Pocas realizaciones y un solo proceso
    - config_dict       : Diccionario de perfiles disponibles

Funcionalidades principales:
    - Gestión de variables de entorno con valores por defecto (python-decouple)
    - Lectura de un archivo .env en la raíz del proyecto
    - Número de procesos del barrido (única perilla de paralelismo)
    - Límite de la búsqueda exhaustiva de asignación de antenas
"""

from decouple import config


class Config:
    """
    Clase de configuración base del simulador.

    Utiliza python-decouple para cargar variables de entorno con valores por
    defecto seguros.

    Attributes:
        PROFILE (str)           : Nombre del perfil, se registra en los metadatos
        WORKERS (int)           : Procesos del barrido (SMNOMA_WORKERS)
        LOG_LEVEL (str)         : Nivel de logging (SMNOMA_LOG_LEVEL)
        OUTPUT_DIR (str)        : Carpeta por defecto de los CSV (SMNOMA_OUTPUT_DIR)
        NOISE_SAMPLES (int)     : Muestras de ruido por estimación de MI (SMNOMA_NOISE_SAMPLES)
        EXHAUSTIVE_LIMIT (int)  : Máximo de particiones a enumerar (SMNOMA_EXHAUSTIVE_LIMIT)
        TRIALS (int)            : Realizaciones por punto de SNR del perfil
        CHUNK_SIZE (int)        : Realizaciones por tarea enviada a un proceso
    """

    PROFILE = 'default'

    # Paralelismo
    WORKERS    = config('SMNOMA_WORKERS', default=1, cast=int)
    CHUNK_SIZE = config('SMNOMA_CHUNK_SIZE', default=250, cast=int)

    # Logging y salida
    LOG_LEVEL  = config('SMNOMA_LOG_LEVEL', default='INFO')
    OUTPUT_DIR = config('SMNOMA_OUTPUT_DIR', default='results')

    # Estimación y búsqueda
    NOISE_SAMPLES    = config('SMNOMA_NOISE_SAMPLES', default=200, cast=int)
    EXHAUSTIVE_LIMIT = config('SMNOMA_EXHAUSTIVE_LIMIT', default=1_000_000, cast=int)

    TRIALS = 10_000


class DeskConfig(Config):
    """
    Perfil de escritorio: 10.000 realizaciones por punto de SNR.

    Note:
        - Permite reproducir las tendencias del estudio en minutos
    """
    PROFILE = 'desk'
    TRIALS  = 10_000


class PaperConfig(Config):
    """
    Perfil del estudio completo: 100.000 realizaciones por punto de SNR.

    Note:
        - Pensado para correr con SMNOMA_WORKERS igual al número de núcleos
    """
    PROFILE = 'paper'
    TRIALS  = 100_000


class TestingConfig(Config):
    """
    Perfil para pruebas automatizadas.

    Attributes:
        TESTING (bool)        : Marca el perfil de pruebas
        WORKERS (int)         : Siempre un proceso
        NOISE_SAMPLES (int)   : Estimaciones de MI más baratas
    """
    PROFILE       = 'testing'
    TESTING       = True
    TRIALS        = 200
    WORKERS       = 1
    NOISE_SAMPLES = 64
    LOG_LEVEL     = 'WARNING'


# Perfiles disponibles
config_dict = {
    'desk'    : DeskConfig,
    'paper'   : PaperConfig,
    'testing' : TestingConfig,
    'default' : DeskConfig
}

"""
Diccionario que mapea nombres de perfil a sus clases de configuración.

Keys:
    desk (DeskConfig)       : 10.000 realizaciones
    paper (PaperConfig)     : 100.000 realizaciones
    testing (TestingConfig) : Para ejecución de tests
    default (DeskConfig)    : Perfil por defecto

Usage:
    profile = config('SMNOMA_PROFILE', default='default')
    simulator = create_simulator(profile)
"""
