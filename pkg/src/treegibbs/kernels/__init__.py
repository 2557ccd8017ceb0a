"""Kernel families K(t, u) on [0, 1]^2."""
from .base import (
    BUILTIN_XI,
    FAMILIES,
    Kernel,
    PositivityScan,
    XiGrid,
    export_kernel,
    kernel_from_xi,
    kernel_to_xi,
    load_kernel,
    load_xi,
    random_symmetric_xi,
    require_positive,
)
from .catalog import (
    ClosedFormPair,
    a_k,
    b_n,
    build_k2_kernel,
    build_k3_kernel,
    build_k_ge4_kernel,
    c_k,
    c_k_exact,
    c_n,
    c_n_cubed,
    closed_form_pairs,
    find_n0,
)
from .moments import (
    K0Search,
    MomentSystem,
    build_four_cycle_kernel,
    find_k0,
    four_cycle_min,
    four_cycle_parts,
    moment_matrix,
    solve_exact,
    solve_moment_system,
)


def build_family(family: str, rule=None, **params) -> Kernel:
    """Build a catalog kernel by family name.

    ``k2_family`` takes ``n``; ``k_ge4_family`` and ``four_cycle_family``
    take ``k``; ``generic_xi`` takes ``xi``, ``J`` and ``beta``.
    """
    if family == "k2_family":
        return build_k2_kernel(int(params["n"]), rule)
    if family == "k3_family":
        return build_k3_kernel(rule)
    if family == "k_ge4_family":
        return build_k_ge4_kernel(int(params["k"]), rule)
    if family == "four_cycle_family":
        return build_four_cycle_kernel(int(params["k"]), rule)
    if family == "generic_xi":
        return kernel_from_xi(params.get("xi", "zero"), params.get("J", 1.0), params.get("beta", 1.0), rule)
    raise ValueError(f"unknown kernel family {family!r}")
