"""
Paquete de utilidades del simulador SM-NOMA.

Este paquete contiene funciones auxiliares reutilizables por todos los
servicios del simulador.

Módulos incluidos:
    - rng_utils: Claves de flujos aleatorios reproducibles (Philox)
    - db_utils : Conversiones entre dB, dBm y escala lineal
"""
