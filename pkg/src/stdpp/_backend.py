"""Select the compiled or pure-python compute core.

The environment variable STDPP_BACKEND picks the core explicitly:

    STDPP_BACKEND=c       require the compiled extension (ImportError if absent)
    STDPP_BACKEND=python  force the pure-python core
    (unset)               use the extension when available

Both cores expose the same functions with identical semantics; see
``stdpp._pykern`` for the reference implementations.
"""

import os

_choice = os.environ.get("STDPP_BACKEND", "").strip().lower()

if _choice == "python":
    from . import _pykern as core
    BACKEND = "python"
elif _choice == "c":
    from . import _ckern as core  # type: ignore[attr-defined]
    BACKEND = "c"
elif _choice == "":
    try:
        from . import _ckern as core  # type: ignore[attr-defined]
        BACKEND = "c"
    except ImportError:
        from . import _pykern as core
        BACKEND = "python"
else:
    raise ImportError(
        "STDPP_BACKEND must be 'c' or 'python', got %r" % _choice)

__all__ = ["core", "BACKEND"]
