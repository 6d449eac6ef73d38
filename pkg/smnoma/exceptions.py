"""
Excepciones del simulador SM-NOMA.

Este módulo define la jerarquía de errores que comparten todos los servicios
del simulador. Cada excepción lleva un código estable (``error_code``) para que
la CLI y los tests puedan distinguir el tipo de falla sin depender del texto.

El módulo incluye:
    - SimulationError               : Excepción base con mensaje y código
    - ConfigError                   : Errores de carga/validación de configuración
    - MissingFieldError             : Falta una clave requerida en el documento
    - InvalidConfigError            : Se viola un invariante de SystemConfig
    - ChannelDomainError            : Argumento fuera del dominio (p. ej. distancia <= 0)
    - UnsupportedConstellationError : Orden de constelación no soportado
    - BitLengthError                : Vector de bits con largo incorrecto
    - SingularChannelError          : Conjunto de canales sin rango completo (ZF)
    - WhiteningError                : Covarianza no definida positiva
    - AllocationSizeError           : Búsqueda exhaustiva demasiado grande
    - OutputError                   : Falla de E/S al escribir resultados
"""

from typing import Optional


class SimulationError(Exception):
    """
    Excepción base para todos los errores del simulador.

    Attributes:
        message (str)    : Mensaje descriptivo del error
        error_code (str) : Código estable del error
    """

    def __init__(self, message: str, error_code: Optional[str] = None):
        self.message    = message
        self.error_code = error_code
        super().__init__(self.message)

    def __str__(self) -> str:
        """Representación string del error con su código."""
        error_parts = [self.message]

        if self.error_code:
            error_parts.append(f"Código: {self.error_code}")

        return " | ".join(error_parts)


class ConfigError(SimulationError):
    """Errores relacionados con la configuración del experimento."""


class MissingFieldError(ConfigError):
    """Falta una clave requerida en el documento de configuración."""

    def __init__(self, field: str):
        super().__init__(f"missing field: {field}", error_code="MISSING_FIELD")
        self.field = field


class InvalidConfigError(ConfigError):
    """Se viola un invariante de SystemConfig; ``constraint`` nombra la regla."""

    def __init__(self, constraint: str):
        super().__init__(f"invalid config: {constraint}", error_code="INVALID_CONFIG")
        self.constraint = constraint


class ChannelDomainError(SimulationError):
    """Argumento fuera del dominio de una función del modelo de canal."""

    def __init__(self, message: str):
        super().__init__(message, error_code="DOMAIN_ERROR")


class UnsupportedConstellationError(SimulationError):
    """El orden pedido no es BPSK ni QAM cuadrada soportada."""

    def __init__(self, order: int):
        super().__init__(f"unsupported constellation: orden {order}", error_code="UNSUPPORTED_CONSTELLATION")
        self.order = order


class BitLengthError(SimulationError):
    """El vector de bits no tiene el largo esperado."""

    def __init__(self, expected: int, received: int):
        super().__init__(
            f"Largo de bits inválido: se esperaban {expected}, se recibieron {received}",
            error_code="BIT_LENGTH",
        )
        self.expected = expected
        self.received = received


class SingularChannelError(SimulationError):
    """Los canales efectivos no son linealmente independientes."""

    def __init__(self, message: str = "singular channel set"):
        super().__init__(message, error_code="SINGULAR_CHANNEL")


class WhiteningError(SimulationError):
    """La covarianza de interferencia más ruido no es definida positiva."""

    def __init__(self, min_eigenvalue: float):
        super().__init__(
            f"Covarianza no definida positiva (autovalor mínimo {min_eigenvalue:.3e})",
            error_code="NUMERICAL_ERROR",
        )
        self.min_eigenvalue = min_eigenvalue


class AllocationSizeError(SimulationError):
    """La enumeración exhaustiva de particiones excede el límite."""

    def __init__(self, count: int, limit: int):
        super().__init__(
            f"Búsqueda exhaustiva inviable: {count} particiones superan el límite de {limit}; "
            f"use allocation_mode=greedy",
            error_code="INFEASIBLE_EXHAUSTIVE",
        )
        self.count = count
        self.limit = limit


class OutputError(SimulationError):
    """Falla de E/S al persistir resultados."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"No se pudo escribir {path}: {reason}", error_code="IO_ERROR")
        self.path = path
