"""
Bloques numéricos compartidos por los módulos del dominio.

- quadrature: reglas de Gauss–Legendre, regla logarítmica y símplex ordenado
- ode: RK4 de paso fijo por lotes con salida densa de Hermite
- interpolation: tablas de Chebyshev tensoriales
- finite_difference: plantillas centradas y laterales de cuarto orden
- linalg: normas de operador y funciones de matrices
"""
