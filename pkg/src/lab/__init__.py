"""Laboratorio: configuración, experimentos de convergencia, baterías de propiedades e informes."""
