"""Elliptic solvers: 1-D quadrature solutions and the 2-D finite-difference Newton solver."""
from .fd2d import GridSolution, log_gradient_sup, solve_elliptic_2d
from .kernels import BACKEND
from .ode1d import solve_ode_1d

__all__ = ["GridSolution", "log_gradient_sup", "solve_elliptic_2d", "solve_ode_1d", "BACKEND"]
