"""Select the compiled kernels when available, else the pure-Python twins."""

import os

if os.environ.get("LWMCMC_PURE_PYTHON"):
    from . import _pykernels as impl

    NAME = "python"
else:
    try:
        from . import _ckernels as impl

        NAME = "cython"
    except ImportError:
        from . import _pykernels as impl

        NAME = "python"

leapfrog_path = impl.leapfrog_path
pairwise_gauss_logsum = impl.pairwise_gauss_logsum
multinomial_counts = impl.multinomial_counts

# numpy's BLAS dot beats the compiled reduction loop (see benchmarks/), so the
# autocovariance always uses the vectorized version
from ._pykernels import autocovariance  # noqa: E402
