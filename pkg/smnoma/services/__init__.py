"""
Paquete de servicios del simulador SM-NOMA.

Módulos incluidos:
    - channel_service   : Pérdidas de trayecto, presupuesto de enlace y canales Rayleigh
    - modem_service     : Constelaciones Gray y mapeo SM
    - detection_service : Detectores MRC / ML y blanqueo de interferencia
    - pairing_service   : Emparejamiento de usuarios y asignación de antenas
    - noma_service      : NOMA convencional con ZF y SIC
    - rate_service      : Información mutua de alfabeto finito y tasas ergódicas
    - sweep_service     : Barridos, BER, CSV y estudios
    - oracle_service    : Oráculos independientes y suites de validación
"""
