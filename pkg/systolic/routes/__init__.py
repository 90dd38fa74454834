from systolic.routes.commands import HANDLERS, dispatch

__all__ = ["HANDLERS", "dispatch"]
