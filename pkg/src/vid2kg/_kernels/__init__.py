"""Backend selection for the MLP kernels.

The compiled extension is used when it imported cleanly; otherwise the
numpy fallback takes over.  Setting VID2KG_PURE_KERNELS=1 forces the
fallback, which is useful for benchmarking and debugging.
"""

import os

if os.environ.get("VID2KG_PURE_KERNELS"):
    from vid2kg._kernels import pykernels as _impl
else:
    try:
        from vid2kg._kernels import _ckernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from vid2kg._kernels import pykernels as _impl

BACKEND = _impl.BACKEND
mlp2_forward = _impl.mlp2_forward
mlp2_backward = _impl.mlp2_backward

__all__ = ["BACKEND", "mlp2_forward", "mlp2_backward"]
