from systolic.utils.helpers import compile_field, exponent_label, format_float

__all__ = ["compile_field", "exponent_label", "format_float"]
