import math
from tokenize import TokenError
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import sympy as sp
from sympy.parsing.sympy_parser import convert_xor, parse_expr, standard_transformations

from systolic.models.errors import InputError

_TRANSFORMS = standard_transformations + (convert_xor,)
_ALLOWED = {"pi": sp.pi, "e": sp.E, "sin": sp.sin, "cos": sp.cos, "tan": sp.tan,
            "exp": sp.exp, "log": sp.log, "sqrt": sp.sqrt, "tanh": sp.tanh}


def compile_field(expression: str,
                  variables: Sequence[str],
                  params: Optional[Dict[str, float]] = None) -> Callable[..., np.ndarray]:
    """Compile an expression such as ``0.2*sin(2*pi*x)`` into a vectorized numpy function.

    Free symbols other than ``variables`` must be bound through ``params``.
    The result broadcasts constants to the shape of its first argument.
    """
    params = params or {}
    symbols = {name: sp.Symbol(name, real=True) for name in variables}
    namespace = dict(_ALLOWED)
    namespace.update(symbols)
    namespace.update({name: sp.Symbol(name, real=True) for name in params})
    try:
        expr = parse_expr(expression, local_dict=namespace, transformations=_TRANSFORMS)
    except (SyntaxError, TypeError, ValueError, TokenError, sp.SympifyError) as e:
        raise InputError(f"Cannot parse expression {expression!r}: {e}")

    expr = expr.subs({sp.Symbol(name, real=True): value for name, value in params.items()})
    unbound = {str(s) for s in expr.free_symbols} - set(variables)
    if unbound:
        raise InputError(f"Expression {expression!r} has unbound symbols: {sorted(unbound)}")

    function = sp.lambdify([symbols[name] for name in variables], expr, modules="numpy")

    def field(*args):
        first = np.asarray(args[0], dtype=float)
        return np.broadcast_to(np.asarray(function(*args), dtype=float), first.shape).copy()

    return field


def parse_params(items: Optional[List[str]]) -> Dict[str, float]:
    """Parse ``name=value`` pairs"""
    params = {}
    for item in items or []:
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"Parameter {item!r} must look like name=value")
        try:
            params[name.strip()] = float(value)
        except ValueError:
            raise InputError(f"Parameter {item!r} has a non-numeric value")
    return params


def parse_classes(text: str) -> List[Tuple[int, int]]:
    """Parse ``"1,0;0,1"`` into integer period pairs"""
    classes = []
    for chunk in text.split(";"):
        parts = [p.strip() for p in chunk.split(",") if p.strip()]
        if len(parts) != 2:
            raise InputError(f"Class {chunk!r} must have two integer periods")
        try:
            classes.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise InputError(f"Class {chunk!r} has non-integer periods")
    return classes


def parse_exponents(text: str) -> List[float]:
    """Parse ``"1,2,4,inf"`` into a sorted list of exponents"""
    exponents = []
    for part in text.split(","):
        part = part.strip().lower()
        try:
            exponents.append(math.inf if part in ("inf", "infinity") else float(part))
        except ValueError:
            raise InputError(f"Exponent {part!r} is not a number")
    return sorted(exponents)


def parse_grid(text: str) -> Tuple[int, int]:
    """Parse ``"128x128"``"""
    try:
        rows, cols = (int(x) for x in text.lower().split("x"))
    except ValueError:
        raise InputError(f"Grid {text!r} must look like MxK")
    return rows, cols


def exponent_label(p: float) -> str:
    """Label an exponent for tables: 2.0 -> "2", inf -> "inf" """
    if math.isinf(p):
        return "inf"
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def format_float(value: float, digits: int = 17) -> str:
    """Render a float with a fixed number of significant digits"""
    if math.isnan(value):
        return '"nan"'
    if math.isinf(value):
        return '"inf"' if value > 0 else '"-inf"'
    return format(value, f".{digits}g")
