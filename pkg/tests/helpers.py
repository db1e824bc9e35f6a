"""Shared model builders for the tests."""

import numpy as np

from periodyn.expressions import PeriodicExpr, const
from periodyn.kernels import DelayKernel
from periodyn.model import Activation, NetworkModel

ZERO = const(0.0)


def scalar_model(d, a=0.0, inputs=None, kernel=None, tau=None, omega=1.0,
                 g=None, f=None):
    """One-unit model with optional coupling, kernel, delay and input."""
    a_expr = a if isinstance(a, PeriodicExpr) else (const(a) if a else ZERO)
    return NetworkModel(
        n=1, omega=omega,
        d=(d if isinstance(d, PeriodicExpr) else const(d),),
        a=((a_expr,),),
        kernels=((kernel or DelayKernel(),),),
        tau=((tau or ZERO,),),
        inputs=(inputs or ZERO,),
        g=(g or Activation.tanh(),),
        f=(f or Activation.identity(),),
    )


def weighted_norms(states, xi):
    return np.max(np.abs(states) / np.asarray(xi)[None, :], axis=1)
