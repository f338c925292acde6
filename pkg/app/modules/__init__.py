# app/modules/__init__.py
"""
Módulos del núcleo de deformación

Cada módulo agrupa una etapa del cálculo: modelo de operador, dinámica clásica,
matriz de deformación, serie perturbativa, oráculos y verificación.
"""
