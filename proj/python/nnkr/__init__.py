"""Nonnegative recovery from rank-one measurements."""

from ._core import (
    ConfigError,
    ContractError,
    DimensionError,
    DomainError,
    Ensemble,
    Error,
    InfeasibleError,
    InputError,
    ParameterError,
    PreconditionError,
    __version__,
    adjoint,
    build_phi,
    cd_constants,
    constant_chain,
    forward,
    fourth_order_poly,
    p_vectorize,
    rip_exhaustive,
    rip_to_nsp,
    run_cli,
    solve_nnls,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
