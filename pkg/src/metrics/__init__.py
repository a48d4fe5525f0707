"""Distancias uniforme, J1 y M1 entre trayectorias y certificados M1 por subconjuntos ordenados."""
