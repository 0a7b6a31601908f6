"""KernelScript forms of the native kernels, used as evolution seeds."""

from ahd.kernels import KernelParams

from .models import KernelProgram
from .parser import format_number, parse


def boxplus_source(params: KernelParams = KernelParams()) -> str:
    c = format_number(params.atanh_clip)
    return (
        "t = tanh(L / 2)\n"
        "p = prod_excl(t)\n"
        f"m = 2 * atanh(clamp(p, -{c}, {c}))\n"
        "return m"
    )


def boxplus_phi_source(params: KernelParams = KernelParams()) -> str:
    lo, hi = format_number(params.phi_clip_lo), format_number(params.phi_clip_hi)
    return (
        f"a = clamp(abs(L), {lo}, {hi})\n"
        "f = -log(tanh(a / 2))\n"
        f"s = clamp(sum_excl(f), {lo}, {hi})\n"
        "g = -log(tanh(s / 2))\n"
        "r = signprod_excl(L) * g\n"
        "return r"
    )


def min_sum_source() -> str:
    return (
        "s = signprod_excl(L)\n"
        "m = min_excl(abs(L))\n"
        "r = s * m\n"
        "return r"
    )


def offset_min_sum_source(beta: float = 0.5) -> str:
    return (
        "s = signprod_excl(L)\n"
        "m = min_excl(abs(L))\n"
        f"r = s * max(m - {format_number(float(beta))}, 0)\n"
        "return r"
    )


def discovered_source(params: KernelParams = KernelParams()) -> str:
    c = format_number(params.atanh_clip)
    return (
        "t = tanh(L / 2)\n"
        "s = sgn(t)\n"
        f"g = log(abs(t) + {format_number(params.log_eps)})\n"
        "m = exp(sum_all(g) - g)\n"
        "q = signprod_all(t) * s\n"
        f"p = clamp(q * m, -{c}, {c})\n"
        "r = 2 * atanh(p)\n"
        "return r"
    )


def seed_source(name: str, params: KernelParams = KernelParams()) -> str:
    """Script source of a native kernel by registry name."""
    sources = {
        "boxplus": lambda: boxplus_source(params),
        "boxplus-phi": lambda: boxplus_phi_source(params),
        "min-sum": min_sum_source,
        "offset-min-sum": lambda: offset_min_sum_source(params.beta),
        "discovered": lambda: discovered_source(params),
    }
    if name not in sources:
        raise KeyError(name)
    return sources[name]()


def seed_program(name: str, params: KernelParams = KernelParams()) -> KernelProgram:
    return parse(seed_source(name, params))
