"""
Trayectorias càdlàg y sus transformaciones.

Exportaciones principales:
- CadlagPath / MonotonePath: Trayectorias por nodos (hold o linear)
- stair_fill(): Relleno lineal de escaleras f
- right_inverse(), compose(), phi(): Inversa generalizada, composición y Φ
- PathDomainError: Excepción para tiempos o nodos fuera de dominio
"""

from .cadlag import HOLD, LINEAR, CadlagPath, MonotonePath, PathDomainError, load_path, save_path
from .transforms import compose, phi, right_inverse, stair_fill

__all__ = [
    "HOLD",
    "LINEAR",
    "CadlagPath",
    "MonotonePath",
    "PathDomainError",
    "load_path",
    "save_path",
    "compose",
    "phi",
    "right_inverse",
    "stair_fill",
]
